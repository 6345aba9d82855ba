use std::path::PathBuf;
use std::process::{Command, Output};

fn daqsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daqsim")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("daqsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const QUICK: [&str; 6] = ["--points", "3", "--shots", "64", "--seed", "5"];

#[test]
fn writes_csv_to_stdout() {
    let out = daqsim(&[&["two-spin", "--backend", "theory,da"][..], &QUICK].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "recipe,backend,t_phys_us,t_mapped,observable,qubit,value,stderr,seed");
    assert_eq!(lines.count(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean_l1[da]"));
}

#[test]
fn output_does_not_depend_on_threads() {
    let run = |threads: &str| {
        let path = scratch(&format!("threads-{threads}.csv"));
        let p = path.to_str().unwrap();
        let out = daqsim(&[&["cluster", "--threads", threads, "--out", p][..], &QUICK].concat());
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(&path).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn plot_script_names_the_csv() {
    let csv = scratch("plot.csv");
    let script = scratch("plot.py");
    let out = daqsim(&[
        "optimal-coupling",
        "--out",
        csv.to_str().unwrap(),
        "--plot-script",
        script.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&script).unwrap().contains(csv.to_str().unwrap()));
}

#[test]
fn config_errors_exit_with_2() {
    for args in [
        vec!["no-such-recipe"],
        vec!["two-spin", "--backend", "quantum"],
        vec!["two-spin", "--shots", "0"],
        vec!["two-spin", "--qubits", "0,5"],
        vec!["disorder", "--pattern", "0101", "--points", "2"],
        vec!["cluster", "--device", "qx14-like", "--backend", "theory", "--continuum"],
    ] {
        let out = daqsim(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn device_errors_exit_with_3() {
    let missing = daqsim(&["two-spin", "--device", "/nonexistent/device.json"]);
    assert_eq!(missing.status.code(), Some(3));

    let bad = scratch("bad-device.json");
    std::fs::write(
        &bad,
        r#"{"name":"x","qubits":[{"id":0,"t1_us":50,"t2_us":150}],"couplings":[],
            "gates":{"single_ns":50,"identity_ns":100,"cnot_ns":300,"cnot_error":0.02}}"#,
    )
    .unwrap();
    let out = daqsim(&["two-spin", "--device", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn device_file_matches_preset() {
    let preset = include_str!("../../core/presets/qx2-like.json");
    let path = scratch("qx2-copy.json");
    std::fs::write(&path, preset).unwrap();
    let a = daqsim(&[&["qft", "--device", path.to_str().unwrap()][..], &QUICK].concat());
    let b = daqsim(&[&["qft", "--device", "qx2-like"][..], &QUICK].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
