use super::*;
use crate::compiler::Schedule;
use crate::device::DeviceModel;
use crate::noise::evolve_noiseless;
use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn series(t: Vec<f64>, v: Vec<f64>) -> ObservableSeries {
    let n = t.len();
    ObservableSeries::new("s", t.clone(), t, v, vec![0.0; n]).unwrap()
}

#[test]
fn series_rejects_bad_shapes() {
    assert!(ObservableSeries::new("x", vec![0.0], vec![0.0, 1.0], vec![0.0], vec![0.0]).is_err());
    assert!(ObservableSeries::new("x", vec![0.0], vec![0.0], vec![0.0], vec![-1e-3]).is_err());
}

#[test]
fn mean_excitation_examples() {
    assert_eq!(mean_excitation(&[0, 0, 0], 2, ExcitationScale::PerSpin).unwrap(), (0.0, 0.0));
    let (v, _) = mean_excitation(&[0b01, 0b10], 2, ExcitationScale::PerSpin).unwrap();
    assert!((v - 0.5).abs() < 1e-15);
    let (raw, _) = mean_excitation(&[0b01, 0b10], 2, ExcitationScale::RawSum).unwrap();
    assert!((raw - 1.0).abs() < 1e-15);
    assert!(mean_excitation(&[], 2, ExcitationScale::PerSpin).is_err());
    assert!(mean_excitation(&[0b100], 2, ExcitationScale::PerSpin).is_err());
}

#[test]
fn stderr_matches_direct_formula() {
    // {0, 1, 1, 1}: mean 3/4, Σ(x − x̄)² = 3/4, se = sqrt(3/4 / 12) = 1/4.
    let (m, se) = mean_and_stderr(&[0.0, 1.0, 1.0, 1.0]).unwrap();
    assert!((m - 0.75).abs() < 1e-15);
    assert!((se - 0.25).abs() < 1e-15);
}

#[test]
fn stderr_at_8192_runs_is_order_1e_minus_3() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<u64> = (0..8192).map(|_| rng.random_range(0..4)).collect();
    let (_, se) = mean_excitation(&bits, 2, ExcitationScale::PerSpin).unwrap();
    assert!(se > 1e-3 && se < 1e-2, "se = {se}");
}

#[test]
fn stderr_scales_as_inverse_sqrt_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bits: Vec<u64> = (0..4096 * 16).map(|_| rng.random_range(0..16)).collect();
    let (_, small) = mean_excitation(&bits[..4096], 4, ExcitationScale::PerSpin).unwrap();
    let (_, large) = mean_excitation(&bits, 4, ExcitationScale::PerSpin).unwrap();
    let ratio = small / large;
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn magnetization_examples() {
    assert_eq!(magnetization_pattern(&[0, 0], 3).unwrap(), vec![-1.0; 3]);
    assert_eq!(magnetization_pattern(&[0b111], 3).unwrap(), vec![1.0; 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n_runs = 10_000;
    let bits: Vec<u64> = (0..n_runs).map(|_| rng.random_range(0..8)).collect();
    let m = magnetization_pattern(&bits, 3).unwrap();
    let se = magnetization_stderr(&bits, 3).unwrap();
    for (mj, s) in m.iter().zip(&se) {
        assert!(mj.abs() < 5.0 * s, "m = {mj}, se = {s}");
        assert!((s - 1.0 / (n_runs as f64).sqrt()).abs() < 1e-3);
    }
}

#[test]
fn exact_observables_match_basis_states() {
    let psi = StateVector::new_basis_state(3, 0b101).unwrap();
    assert_eq!(magnetization_exact(&psi), vec![1.0, -1.0, 1.0]);
    assert!((mean_excitation_exact(&psi, ExcitationScale::PerSpin) - 2.0 / 3.0).abs() < 1e-15);
    assert!((mean_excitation_exact(&psi, ExcitationScale::RawSum) - 2.0).abs() < 1e-15);
}

#[test]
fn half_difference_examples() {
    let pattern = 0b1111111_0000000u64;
    let (up, down) = pattern_sets(pattern, 14);
    assert_eq!(up, (7..14).collect::<Vec<_>>());
    let m: Vec<f64> = (0..14).map(|q| if pattern >> q & 1 == 1 { 1.0 } else { -1.0 }).collect();
    assert_eq!(half_difference(&m, &up, &down).unwrap(), 2.0);
    assert_eq!(half_difference(&[0.0; 14], &up, &down).unwrap(), 0.0);
    assert!(half_difference(&m, &[1, 2], &[2, 3]).is_err());
    assert!(half_difference(&m, &[], &[2, 3]).is_err());
    assert!(half_difference(&m, &[20], &[2]).is_err());
}

#[test]
fn l1_examples() {
    let t = vec![0.0, 1.0, 2.0];
    let a = series(t.clone(), vec![0.1, 0.5, 0.3]);
    assert_eq!(l1_metric(&a, &a).unwrap(), vec![0.0; 3]);
    let b = series(t, vec![0.2, 0.6, 0.4]);
    assert!(l1_metric(&a, &b).unwrap().iter().all(|d| (d - 0.1).abs() < 1e-12));
    let other = series(vec![0.0, 1.0, 2.5], vec![0.0; 3]);
    assert!(l1_metric(&a, &other).is_err());
}

#[test]
fn fourier_constant_series_is_all_zero_frequency() {
    let s = series((0..8).map(f64::from).collect(), vec![0.4; 8]);
    let x = fourier_components(&s).unwrap();
    assert!((x[0] - c(8.0, 0.0)).norm() < 1e-12);
    assert!(x[1..].iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn fourier_cosine_has_two_symmetric_bins() {
    let n = 16;
    let v: Vec<f64> = (0..n).map(|m| (2.0 * PI * 3.0 * m as f64 / n as f64).cos()).collect();
    let x = fourier_components(&series((0..n).map(|m| m as f64 * 0.5).collect(), v)).unwrap();
    for (k, xk) in x.iter().enumerate() {
        let expect = if k == 3 || k == n - 3 { n as f64 / 2.0 } else { 0.0 };
        assert!((xk.norm() - expect).abs() < 1e-9, "bin {k}: {xk}");
    }
}

#[test]
fn fourier_matches_dense_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 11;
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let max = v.iter().copied().fold(0.0, f64::max);
    let x = fourier_components(&series((0..n).map(|m| m as f64).collect(), v.clone())).unwrap();
    let dft = nalgebra::DMatrix::from_fn(n, n, |k, m| Complex64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / n as f64));
    let y = dft * nalgebra::DVector::from_iterator(n, v.iter().map(|x| c(x / max, 0.0)));
    for k in 0..n {
        assert!((x[k] - y[k]).norm() < 1e-12);
    }
}

#[test]
fn fourier_errors() {
    assert!(fourier_components(&series(vec![0.0], vec![1.0])).is_err());
    assert!(fourier_components(&series(vec![0.0, 1.0, 3.0], vec![1.0; 3])).is_err());
    assert!(fourier_components(&series(vec![0.0, 1.0, 2.0], vec![0.0; 3])).is_err());
}

#[test]
fn classical_distance_examples() {
    let p = [0.25, 0.25, 0.5];
    assert_eq!(trace_distance_classical(&p, &p).unwrap(), 0.0);
    assert_eq!(bhattacharyya(&p, &p).unwrap(), 0.0);
    assert_eq!(trace_distance_classical(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    assert_eq!(bhattacharyya(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), f64::INFINITY);
    assert!((trace_distance_classical(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    assert!((bhattacharyya(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.3466).abs() < 1e-4);
    assert!(trace_distance_classical(&[0.5, 0.4], &[0.5, 0.5]).is_err());
    assert!(bhattacharyya(&[0.5, 0.5], &[1.0]).is_err());
}

#[test]
fn empirical_distribution_counts() {
    let p = empirical_distribution(&[0, 3, 3, 1], 2).unwrap();
    assert_eq!(p, vec![0.25, 0.25, 0.0, 0.5]);
}

fn random_density<R: Rng>(rng: &mut R) -> DensityMatrix2x2 {
    // Mixture of two random pure states.
    let pure = |rng: &mut R| {
        let a = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n, b / n)
    };
    let w = rng.random_range(0.0..1.0);
    let ((a1, b1), (a2, b2)) = (pure(rng), pure(rng));
    let e = |x: Complex64, y: Complex64, u: Complex64, v: Complex64| w * x * y.conj() + (1.0 - w) * u * v.conj();
    DensityMatrix2x2::new([[e(a1, a1, a2, a2), e(a1, b1, a2, b2)], [e(b1, a1, b2, a2), e(b1, b1, b2, b2)]]).unwrap()
}

fn svd_trace_distance(r1: &DensityMatrix2x2, r2: &DensityMatrix2x2) -> f64 {
    let m = Matrix2::from_fn(|i, j| r1.get(i, j) - r2.get(i, j));
    0.5 * m.svd(false, false).singular_values.sum()
}

#[test]
fn quantum_distance_examples() {
    let zero = DensityMatrix2x2::from_pure(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let one = DensityMatrix2x2::from_pure(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    assert!(trace_distance_quantum(&zero, &zero).unwrap().abs() < 1e-15);
    assert!((trace_distance_quantum(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(distinguish_probability(1.0), 1.0);
    assert_eq!(distinguish_probability(0.0), 0.5);
}

#[test]
fn quantum_distance_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let (a, b) = (random_density(&mut rng), random_density(&mut rng));
        assert!((trace_distance_quantum(&a, &b).unwrap() - svd_trace_distance(&a, &b)).abs() < 1e-12);
    }
}

#[test]
fn branch_states_have_distance_twice_b() {
    // ρ± = [[½, ±B], [±B*, ½]] differ by an off-diagonal 2B, so D = 2|B|.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let b = Complex64::from_polar(rng.random_range(0.0..0.5), rng.random_range(0.0..2.0 * PI));
        let h = c(0.5, 0.0);
        let plus = DensityMatrix2x2::new([[h, b], [b.conj(), h]]).unwrap();
        let minus = DensityMatrix2x2::new([[h, -b], [-b.conj(), h]]).unwrap();
        assert!((svd_trace_distance(&plus, &minus) - 2.0 * b.norm()).abs() < 1e-12);
        assert!((trace_distance_quantum(&plus, &minus).unwrap() - 2.0 * b.norm()).abs() < 1e-12);
    }
}

#[test]
fn bell_formula_examples() {
    for bell in BellState::ALL {
        assert_eq!(analytic_bell_trace_distance(100.0, 50.0, 0.0, bell), 1.0);
    }
    // Φ+, J01 = J02 = J: D = |cos 4Jt|, first zero at t = π/(8J).
    let j = 60.0;
    let t0 = PI / (8.0 * j * KHZ_US);
    assert!(analytic_bell_trace_distance(j, j, t0, BellState::PhiPlus) < 1e-12);
    assert!(analytic_bell_trace_distance(j, j, 0.9 * t0, BellState::PhiPlus) > 0.1);
}

#[test]
fn psi_period_is_about_twice_phi_period_when_j01_is_three_j02() {
    // Periods of |cos 2(τ01 ± τ02)| are π / (2(J01 ± J02)); ratio (J01 + J02)/(J01 − J02) = 2.
    let (j01, j02) = (75.0, 25.0);
    let first_zero = |bell| {
        let mut t = 0.0;
        while analytic_bell_trace_distance(j01, j02, t, bell) > 1e-3 {
            t += 1e-3;
        }
        t
    };
    let ratio = first_zero(BellState::PsiPlus) / first_zero(BellState::PhiPlus);
    assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
}

#[test]
fn b_coefficient_trivial_and_errors() {
    for bell in BellState::ALL {
        assert!((general_b_coefficient(bell.amplitudes(), 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }
    assert!(general_b_coefficient([c(1.0, 0.0); 4], 0.1, 0.2).is_err());
}

#[test]
fn b_coefficient_reduces_to_bell_formula() {
    let (j01, j02) = (100.0, 50.0);
    for bell in BellState::ALL {
        for i in 0..=40 {
            let t = i as f64 * 0.5;
            let b = general_b_coefficient(bell.amplitudes(), crosstalk_tau(j01, t), crosstalk_tau(j02, t)).unwrap();
            assert!((2.0 * b - analytic_bell_trace_distance(j01, j02, t, bell)).abs() < 1e-12);
        }
    }
}

/// |B|² written out term by term: ¼[Σp² + 2ab cos4τ02 + 2ac cos4τ01 + 2ad cos4(τ01+τ02)
/// + 2bc cos4(τ01−τ02) + 2bd cos4τ01 + 2cd cos4τ02] with (a, b, c, d) the populations.
fn b_squared_expanded(p: [f64; 4], t1: f64, t2: f64) -> f64 {
    let [a, b, cc, d] = p;
    let cos4 = |x: f64| (4.0 * x).cos();
    0.25 * (a * a + b * b + cc * cc + d * d
        + 2.0 * a * b * cos4(t2)
        + 2.0 * a * cc * cos4(t1)
        + 2.0 * a * d * cos4(t1 + t2)
        + 2.0 * b * cc * cos4(t1 - t2)
        + 2.0 * b * d * cos4(t1)
        + 2.0 * cc * d * cos4(t2))
}

fn random_env<R: Rng>(rng: &mut R) -> [Complex64; 4] {
    let mut env = [c(0.0, 0.0); 4];
    for a in &mut env {
        *a = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let n = env.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    env.map(|a| a / n)
}

#[test]
fn b_coefficient_matches_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let env = random_env(&mut rng);
        let (t1, t2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let b = general_b_coefficient(env, t1, t2).unwrap();
        let p = env.map(|a| a.norm_sqr());
        assert!((b * b - b_squared_expanded(p, t1, t2)).abs() < 1e-12);
    }
}

/// Target qubit 0 in |±⟩, neighbors 1 and 2 in `env`, idling under crosstalk on qx4-like.
fn engine_branch_distance(env: [Complex64; 4], t_us: f64) -> f64 {
    let device = DeviceModel::preset("qx4-like").unwrap();
    let mut sched = Schedule::new(3, Some(vec![0, 1, 2]));
    sched.push_idle(t_us * 1e3);
    let branch = |sign: f64| {
        let mut amps = vec![c(0.0, 0.0); 8];
        for (e, a) in env.iter().enumerate() {
            // env index reads |q1 q2⟩; register index has q1 at bit 1, q2 at bit 2.
            let reg = (e >> 1 & 1) << 1 | (e & 1) << 2;
            amps[reg] = a * FRAC_1_SQRT_2;
            amps[reg | 1] = a * FRAC_1_SQRT_2 * sign;
        }
        let psi = StateVector::from_amplitudes(amps).unwrap();
        evolve_noiseless(&sched, Some(&device), &psi, false)
            .unwrap()
            .partial_trace_single(0)
            .unwrap()
    };
    trace_distance_quantum(&branch(1.0), &branch(-1.0)).unwrap()
}

#[test]
fn b_coefficient_matches_full_engine() {
    let device = DeviceModel::preset("qx4-like").unwrap();
    let (j01, j02) = (device.coupling(0, 1).unwrap(), device.coupling(0, 2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let env = random_env(&mut rng);
        let t = rng.random_range(0.0..40.0);
        let b = general_b_coefficient(env, crosstalk_tau(j01, t), crosstalk_tau(j02, t)).unwrap();
        assert!((2.0 * b - engine_branch_distance(env, t)).abs() < 1e-9);
    }
}

#[test]
fn bell_formula_matches_full_engine_on_grid() {
    let device = DeviceModel::preset("qx4-like").unwrap();
    let (j01, j02) = (device.coupling(0, 1).unwrap(), device.coupling(0, 2).unwrap());
    for bell in BellState::ALL {
        let worst = (0..50)
            .map(|i| {
                let t = i as f64 * 0.4;
                (engine_branch_distance(bell.amplitudes(), t) - analytic_bell_trace_distance(j01, j02, t, bell)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "{}: {worst}", bell.name());
    }
}

proptest! {
    #[test]
    fn distances_vanish_only_for_equal_distributions(raw in prop::collection::vec(0.0f64..1.0, 2..8), shift in 0usize..8) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        prop_assert!(trace_distance_classical(&p, &p).unwrap() <= 1e-12);
        prop_assert!(bhattacharyya(&p, &p).unwrap() <= 1e-12);
        let mut q = p.clone();
        q.rotate_left(shift % p.len());
        let differ = p.iter().zip(&q).any(|(a, b)| (a - b).abs() > 1e-6);
        let td = trace_distance_classical(&p, &q).unwrap();
        let bh = bhattacharyya(&p, &q).unwrap();
        prop_assert_eq!(td > 1e-12, differ);
        prop_assert_eq!(bh > 1e-12, differ);
    }

    #[test]
    fn quantum_distance_is_bounded_and_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_density(&mut rng), random_density(&mut rng));
        let d = trace_distance_quantum(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - trace_distance_quantum(&b, &a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn mean_excitation_bounded(bits in prop::collection::vec(0u64..256, 1..50)) {
        let (v, se) = mean_excitation(&bits, 8, ExcitationScale::PerSpin).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(se >= 0.0);
        let m = magnetization_pattern(&bits, 8).unwrap();
        prop_assert!((m.iter().sum::<f64>() / 8.0 - (2.0 * v - 1.0)).abs() < 1e-12);
    }
}
