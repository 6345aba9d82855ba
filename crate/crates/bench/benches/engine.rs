use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use daqsim_core::compiler::{trotterize_da, trotterize_digital};
use daqsim_core::model::{build_tfim, build_tfim_on, FieldRule};
use daqsim_core::noise::run_trajectories_from;
use daqsim_core::statevector::{exact_propagator, gates};
use daqsim_core::{DeviceModel, NoiseModel, StateVector, ZzTerm};

fn statevector(c: &mut Criterion) {
    let mut g = c.benchmark_group("statevector");
    for n in [10usize, 14] {
        let mut psi = StateVector::new_basis_state(n, 0).unwrap();
        let rx = gates::rx(0.3);
        g.bench_with_input(BenchmarkId::new("rx_all_qubits", n), &n, |b, &n| {
            b.iter(|| (0..n).for_each(|q| psi.apply_1q(q, &rx).unwrap()))
        });
        let terms: Vec<ZzTerm> = (0..n - 1).map(|q| ZzTerm::new(q, q + 1, 0.1)).collect();
        g.bench_with_input(BenchmarkId::new("zz_chain", n), &n, |b, _| b.iter(|| psi.apply_zz_phase(&terms).unwrap()));
    }
    g.finish();
}

fn dense_oracle(c: &mut Criterion) {
    let dev = DeviceModel::preset("qx2-like").unwrap();
    let h = build_tfim(&dev, &FieldRule::Uniform2JBar, None).unwrap().hamiltonian().unwrap();
    c.bench_function("exact_propagator_5q", |b| b.iter(|| exact_propagator(&h, 1.0).unwrap()));
}

fn trajectories(c: &mut Criterion) {
    let mut g = c.benchmark_group("trajectories");
    g.sample_size(10);
    let qx14 = DeviceModel::preset("qx14-like").unwrap();
    let noise = NoiseModel::from_device(&qx14);

    let pair = build_tfim_on(&qx14, &[0, 1], &FieldRule::PerPair2J(0, 1), None).unwrap();
    let t = 2.5 / pair.mean_coupling().unwrap();
    let init2 = StateVector::new_basis_state(2, 0).unwrap();
    let digital = trotterize_digital(&pair, t, 6, Some(&qx14)).unwrap();
    let da = trotterize_da(&pair, &qx14, t, 6).unwrap();
    g.bench_function("two_spin_digital_x256", |b| {
        b.iter(|| run_trajectories_from(&digital, Some(&qx14), &noise, &init2, 256, 1).unwrap())
    });
    g.bench_function("two_spin_da_x256", |b| {
        b.iter(|| run_trajectories_from(&da, Some(&qx14), &noise, &init2, 256, 1).unwrap())
    });

    let all = build_tfim(&qx14, &FieldRule::Uniform2JBar, None).unwrap();
    let init14 = StateVector::new_basis_state(14, 0b00000001111111).unwrap();
    let wall = trotterize_da(&all, &qx14, t, 6).unwrap();
    g.bench_function("fourteen_spin_da_x16", |b| {
        b.iter(|| run_trajectories_from(&wall, Some(&qx14), &noise, &init14, 16, 1).unwrap())
    });
    g.finish();
}

criterion_group!(benches, statevector, dense_oracle, trajectories);
criterion_main!(benches);
