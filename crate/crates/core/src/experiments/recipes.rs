use num_complex::Complex64;
use rayon::prelude::*;

use super::{Backend, ExperimentConfig, ExperimentOutput, Record};
use crate::compiler::{qft_da, qft_digital, spectator_closure, trotterize_da, trotterize_digital, Schedule, Trotter};
use crate::device::{optimal_coupling, DeviceModel, KHZ_US};
use crate::error::{Error, Result};
use crate::metrics::{
    analytic_bell_trace_distance, bhattacharyya, empirical_distribution, fourier_components, half_difference,
    l1_metric, magnetization_exact, magnetization_pattern, mean_and_stderr, mean_excitation,
    mean_excitation_exact, pattern_sets, trace_distance_classical, trace_distance_quantum, BellState,
};
use crate::model::{build_tfim_on, unmap_time, FieldRule, SpinModel};
use crate::noise::{run_observed, run_trajectories_from, NoiseModel};
use crate::rng;
use crate::statevector::{apply_dense, exact_propagator, format_bitstring, parse_bitstring, DensityMatrix2x2, StateVector, MAX_DENSE_QUBITS};

/// Initial pattern of the disorder recipe: qubits 0–6 excited, 7–13 ground.
pub const DOMAIN_WALL: &str = "00000001111111";

const SWEEP: u64 = 0x7377_6565_70;

/// Seed of one independent run inside a sweep.
fn run_seed(master: u64, backend: Backend, point: usize, sub: usize) -> u64 {
    rng::derive(rng::derive(master, point as u64, backend.tag()), sub as u64, SWEEP)
}

struct Sweep<'a> {
    cfg: &'a ExperimentConfig,
    device: DeviceModel,
    noise: NoiseModel,
    trotter: Trotter,
    times: Vec<f64>,
}

impl<'a> Sweep<'a> {
    fn new(cfg: &'a ExperimentConfig, default_steps: usize) -> Result<Self> {
        cfg.validate()?;
        let device = cfg.device.resolve()?;
        Ok(Self {
            noise: cfg.noise.noise_model(&device)?,
            device,
            trotter: cfg.trotter.unwrap_or_else(|| default_steps.into()),
            times: cfg.time_grid.times()?,
            cfg,
        })
    }

    fn record(&self, backend: Backend, t_phys_us: f64, t_mapped: f64, observable: impl Into<String>) -> Record {
        Record {
            recipe: self.cfg.recipe.name().into(),
            backend: backend.label().into(),
            t_phys_us,
            t_mapped,
            observable: observable.into(),
            qubit: None,
            value: 0.0,
            stderr: 0.0,
            seed: self.cfg.master_seed,
        }
    }

    /// Final state (noiseless backends) or measured bitstrings.
    fn evolve(&self, backend: Backend, model: &SpinModel, t: f64, initial: &StateVector, seed: u64) -> Result<Outcome> {
        let shots = |s: Schedule| -> Result<Outcome> {
            let r = run_trajectories_from(&s, Some(&self.device), &self.noise, initial, self.cfg.shots, seed)?;
            Ok(Outcome::Shots(r.bitstrings))
        };
        match backend {
            Backend::Theory => {
                let s = trotterize_digital(model, t, self.trotter, None)?;
                Ok(Outcome::Exact(crate::noise::evolve_noiseless(&s, None, initial, false)?))
            }
            Backend::Continuum => {
                let u = exact_propagator(&model.hamiltonian()?, t)?;
                Ok(Outcome::Exact(apply_dense(&u, initial)?))
            }
            Backend::Digital => shots(trotterize_digital(model, t, self.trotter, Some(&self.device))?),
            Backend::DigitalAnalog => shots(trotterize_da(model, &self.device, t, self.trotter)?),
        }
    }

    fn initial_state(&self, n_active: usize, n_register: usize, default: u64) -> Result<StateVector> {
        let pattern = match &self.cfg.pattern {
            Some(p) => {
                if p.len() != n_active {
                    return Err(Error::Config(format!(
                        "pattern {p:?} has {} characters for {n_active} spins",
                        p.len()
                    )));
                }
                parse_bitstring(p).map_err(|e| Error::Config(e.to_string()))?
            }
            None => default,
        };
        StateVector::new_basis_state(n_register, pattern as usize)
    }

    fn check_continuum(&self, n: usize) -> Result<()> {
        if self.cfg.backends.contains(&Backend::Continuum) && n > MAX_DENSE_QUBITS.min(10) {
            return Err(Error::Config(format!("continuum backend supports at most 10 spins, model has {n}")));
        }
        Ok(())
    }
}

enum Outcome {
    Exact(StateVector),
    Shots(Vec<u64>),
}

fn active_bits(bits: &[u64], n_active: usize) -> Vec<u64> {
    let mask = if n_active >= 64 { u64::MAX } else { (1u64 << n_active) - 1 };
    bits.iter().map(|b| b & mask).collect()
}

impl Outcome {
    /// Mean excitation of the first `n_active` register qubits.
    fn excitation(&self, n_active: usize, cfg: &ExperimentConfig) -> Result<(f64, f64)> {
        match self {
            Outcome::Exact(psi) => {
                let raw = mean_excitation_exact(psi, crate::metrics::ExcitationScale::RawSum)
                    - (n_active..psi.n_qubits()).map(|q| psi.excited_population(q)).sum::<f64>();
                let div = match cfg.excitation_scale {
                    crate::metrics::ExcitationScale::PerSpin => n_active as f64,
                    crate::metrics::ExcitationScale::RawSum => 1.0,
                };
                Ok((raw / div, 0.0))
            }
            Outcome::Shots(bits) => mean_excitation(&active_bits(bits, n_active), n_active, cfg.excitation_scale),
        }
    }

    /// Per-qubit magnetizations with errors, and the half-difference with its error.
    fn magnetization(&self, up: &[usize], down: &[usize], n: usize) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
        match self {
            Outcome::Exact(psi) => {
                let m = magnetization_exact(psi)[..n].to_vec();
                let hd = half_difference(&m, up, down)?;
                Ok((m, vec![0.0; n], hd, 0.0))
            }
            Outcome::Shots(bits) => {
                let bits = active_bits(bits, n);
                let m = magnetization_pattern(&bits, n)?;
                let m_se = crate::metrics::magnetization_stderr(&bits, n)?;
                let per_shot: Vec<f64> = bits
                    .iter()
                    .map(|&b| {
                        let mj: Vec<f64> = (0..n).map(|q| if b >> q & 1 == 1 { 1.0 } else { -1.0 }).collect();
                        half_difference(&mj, up, down)
                    })
                    .collect::<Result<_>>()?;
                let (hd, hd_se) = mean_and_stderr(&per_shot)?;
                Ok((m, m_se, hd, hd_se))
            }
        }
    }
}

fn mapped_times(sweep: &Sweep, model: &SpinModel) -> Result<Vec<f64>> {
    let tm = model
        .time_map()
        .ok_or_else(|| Error::Config("model has no device time map".into()))?;
    sweep.times.iter().map(|&t| unmap_time(t, tm)).collect()
}

/// ⟨n(t)⟩ for every backend over the grid, on `model` embedded in its spectator closure.
fn excitation_sweep(sweep: &Sweep, model: &SpinModel) -> Result<ExperimentOutput> {
    let closure = spectator_closure(model, &sweep.device)?;
    let n_active = model.n_spins();
    sweep.check_continuum(closure.n_spins())?;
    let initial = sweep.initial_state(n_active, closure.n_spins(), 0)?;
    let mapped = mapped_times(sweep, model)?;
    let mut out = ExperimentOutput::default();
    for &backend in &sweep.cfg.backends {
        let rows: Vec<Record> = (0..mapped.len())
            .into_par_iter()
            .map(|p| {
                let seed = run_seed(sweep.cfg.master_seed, backend, p, 0);
                let outcome = sweep.evolve(backend, &closure, mapped[p], &initial, seed)?;
                let (value, stderr) = outcome.excitation(n_active, sweep.cfg)?;
                Ok(Record {
                    value,
                    stderr,
                    ..sweep.record(backend, sweep.times[p], mapped[p], "mean_excitation")
                })
            })
            .collect::<Result<_>>()?;
        out.records.extend(rows);
    }
    summarize_excitation(sweep, &mut out);
    Ok(out)
}

fn summarize_excitation(sweep: &Sweep, out: &mut ExperimentOutput) {
    let theory = out.series(Backend::Theory, "mean_excitation", None).ok();
    for &backend in &sweep.cfg.backends {
        let Ok(s) = out.series(backend, "mean_excitation", None) else { continue };
        if let Some(th) = &theory {
            if backend != Backend::Theory {
                if let Ok(l1) = l1_metric(&s, th) {
                    let mean = l1.iter().sum::<f64>() / l1.len() as f64;
                    out.summary.push((format!("mean_l1[{backend}]"), mean));
                }
            }
        }
        if let Ok(x) = fourier_components(&s) {
            out.summary.push((format!("fourier0[{backend}]"), x[0].norm()));
        }
    }
}

/// Two spins on one coupled pair (default Q0, Q1), both with field 2J of that pair.
pub fn run_two_spin(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweep = Sweep::new(cfg, 6)?;
    let active = cfg.qubits.clone().unwrap_or_else(|| vec![0, 1]);
    let [a, b] = active[..] else {
        return Err(Error::Config(format!("two-spin needs exactly 2 qubits, got {active:?}")));
    };
    if sweep.device.coupling(a, b).is_none() {
        return Err(Error::Config(format!("device has no Q{a}-Q{b} coupling")));
    }
    let model = build_tfim_on(&sweep.device, &active, &FieldRule::PerPair2J(a, b), None)?;
    excitation_sweep(&sweep, &model)
}

/// Every device qubit (or the configured subset) with uniform field 2J̄.
pub fn run_cluster(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let device = cfg.device.resolve()?;
    let qubits = cfg.qubits.clone().unwrap_or_else(|| (0..device.n_qubits()).collect());
    let steps = if qubits.len() > 5 { 3 } else { 6 };
    let sweep = Sweep::new(cfg, steps)?;
    let model = build_tfim_on(&sweep.device, &qubits, &FieldRule::Uniform2JBar, None)?;
    excitation_sweep(&sweep, &model)
}

/// Domain-wall melting with and without random longitudinal fields.
pub fn run_disorder(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweep = Sweep::new(cfg, 6)?;
    let qubits = cfg.qubits.clone().unwrap_or_else(|| (0..sweep.device.n_qubits()).collect());
    let n = qubits.len();
    if cfg.backends.contains(&Backend::Continuum) {
        return Err(Error::Config("disorder recipe has no continuum backend".into()));
    }
    let clean = build_tfim_on(&sweep.device, &qubits, &FieldRule::Uniform2JBar, None)?;
    let closure = spectator_closure(&clean, &sweep.device)?;
    let pattern_text = cfg.pattern.clone().unwrap_or_else(|| DOMAIN_WALL.to_string());
    if pattern_text.len() != n {
        return Err(Error::Config(format!("pattern {pattern_text:?} has {} characters for {n} spins", pattern_text.len())));
    }
    let pattern = parse_bitstring(&pattern_text).map_err(|e| Error::Config(e.to_string()))?;
    let (up, down) = pattern_sets(pattern, n);
    if up.is_empty() || down.is_empty() {
        return Err(Error::Config("pattern must contain both excited and ground spins".into()));
    }
    let initial = StateVector::new_basis_state(closure.n_spins(), pattern as usize)?;
    let j_bar = clean.mean_coupling()?;
    let realizations = cfg.disorder.realizations;
    // Variant 0 is the clean model, 1..=R the disorder realizations.
    let models: Vec<SpinModel> = std::iter::once(Ok(closure.clone()))
        .chain((0..realizations).map(|r| {
            let mut eps = cfg.disorder.realization(j_bar, n, r)?;
            eps.resize(closure.n_spins(), 0.0);
            closure.clone().with_disorder(eps)
        }))
        .collect::<Result<_>>()?;
    let mapped = mapped_times(&sweep, &clean)?;

    let mut out = ExperimentOutput::default();
    for &backend in &cfg.backends {
        let jobs: Vec<(usize, usize)> = (0..mapped.len()).flat_map(|p| (0..models.len()).map(move |v| (p, v))).collect();
        let results: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = jobs
            .par_iter()
            .map(|&(p, v)| {
                let seed = run_seed(cfg.master_seed, backend, p, v);
                sweep.evolve(backend, &models[v], mapped[p], &initial, seed)?.magnetization(&up, &down, n)
            })
            .collect::<Result<_>>()?;
        for p in 0..mapped.len() {
            let at = |v: usize| &results[p * models.len() + v];
            let base = sweep.record(backend, sweep.times[p], mapped[p], "");
            let (m, m_se, hd, hd_se) = at(0);
            for q in 0..n {
                out.records.push(Record {
                    observable: "magnetization_clean".into(),
                    qubit: Some(q),
                    value: m[q],
                    stderr: m_se[q],
                    ..base.clone()
                });
            }
            out.records.push(Record {
                observable: "half_difference_clean".into(),
                value: *hd,
                stderr: *hd_se,
                ..base.clone()
            });
            if realizations == 0 {
                continue;
            }
            let avg = |f: &dyn Fn(&(Vec<f64>, Vec<f64>, f64, f64)) -> (f64, f64)| -> Result<(f64, f64)> {
                let vals: Vec<(f64, f64)> = (1..models.len()).map(|v| f(at(v))).collect();
                let (mean, spread) = mean_and_stderr(&vals.iter().map(|x| x.0).collect::<Vec<_>>())?;
                // One realization: only the sampling error is available.
                Ok((mean, if vals.len() > 1 { spread } else { vals[0].1 }))
            };
            for q in 0..n {
                let (value, stderr) = avg(&|r| (r.0[q], r.1[q]))?;
                out.records.push(Record {
                    observable: "magnetization".into(),
                    qubit: Some(q),
                    value,
                    stderr,
                    ..base.clone()
                });
            }
            let (value, stderr) = avg(&|r| (r.2, r.3))?;
            out.records.push(Record {
                observable: "half_difference".into(),
                value,
                stderr,
                ..base
            });
        }
        if realizations > 0 {
            let dirty = out.series(backend, "half_difference", None)?;
            let clean_s = out.series(backend, "half_difference_clean", None)?;
            let (lo, hi) = middle_third(dirty.len());
            let margin = (lo..hi).map(|i| dirty.values[i] - clean_s.values[i]).fold(f64::INFINITY, f64::min);
            out.summary.push((format!("min_mid_margin[{backend}]"), margin));
        }
    }
    Ok(out)
}

/// Index range `[lo, hi)` of the middle third of `n` grid points.
pub(crate) fn middle_third(n: usize) -> (usize, usize) {
    (n / 3, n - n / 3)
}

/// Three-qubit QFT on every basis input, ideal versus compiled noisy runs.
pub fn run_qft(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweep = Sweep::new(cfg, 1)?;
    let triple: [usize; 3] = match cfg.qubits.as_deref() {
        None => [0, 1, 2],
        Some(&[a, b, c]) => [a, b, c],
        Some(other) => return Err(Error::Config(format!("qft needs exactly 3 qubits, got {other:?}"))),
    };
    let ideal_sched = qft_digital(3, None)?;
    let mut out = ExperimentOutput::default();
    for &backend in &cfg.backends {
        let sched = match backend {
            Backend::Theory => None,
            Backend::Digital => Some(qft_digital(3, Some((&sweep.device, &triple[..])))?),
            Backend::DigitalAnalog => Some(qft_da(&sweep.device, triple)?),
            Backend::Continuum => return Err(Error::Config("qft has no continuum backend".into())),
        };
        let t_us = sched.as_ref().map_or(0.0, |s| s.total_phys_time_ns() * 1e-3);
        let per_input: Vec<(Vec<f64>, Vec<f64>)> = (0..8usize)
            .into_par_iter()
            .map(|x| {
                let input = StateVector::new_basis_state(3, x)?;
                let ideal = crate::noise::evolve_noiseless(&ideal_sched, None, &input, false)?.probabilities();
                let got = match &sched {
                    None => ideal.clone(),
                    Some(s) => {
                        let seed = run_seed(cfg.master_seed, backend, x, 0);
                        let r = run_trajectories_from(s, Some(&sweep.device), &sweep.noise, &input, cfg.shots, seed)?;
                        empirical_distribution(&r.bitstrings, 3)?
                    }
                };
                Ok((ideal, got))
            })
            .collect::<Result<_>>()?;
        let (mut td_sum, mut bh_sum) = (0.0, 0.0);
        for (x, (ideal, got)) in per_input.iter().enumerate() {
            let tag = format_bitstring(x as u64, 3);
            let base = sweep.record(backend, t_us, 0.0, "");
            for (y, p) in got.iter().enumerate() {
                let stderr = if sched.is_some() { (p * (1.0 - p) / cfg.shots as f64).sqrt() } else { 0.0 };
                out.records.push(Record {
                    observable: format!("p[in={tag},out={}]", format_bitstring(y as u64, 3)),
                    value: *p,
                    stderr,
                    ..base.clone()
                });
            }
            // Sampled frequencies sum to one only up to rounding.
            let total: f64 = got.iter().sum();
            let got_n: Vec<f64> = got.iter().map(|p| p / total).collect();
            let td = trace_distance_classical(ideal, &got_n)?;
            let bh = bhattacharyya(ideal, &got_n)?;
            td_sum += td;
            bh_sum += bh;
            out.records.push(Record {
                observable: format!("trace_distance[in={tag}]"),
                value: td,
                ..base.clone()
            });
            out.records.push(Record {
                observable: format!("bhattacharyya[in={tag}]"),
                value: bh,
                ..base
            });
        }
        out.summary.push((format!("mean_trace_distance[{backend}]"), td_sum / 8.0));
        out.summary.push((format!("mean_bhattacharyya[{backend}]"), bh_sum / 8.0));
    }
    Ok(out)
}

/// Environment of the non-Markovian experiment: a Bell pair, or the
/// computational-basis target pair with the neighbors in |00⟩.
#[derive(Clone, Copy, Debug)]
enum Probe {
    Bell(BellState),
    Basis,
}

impl Probe {
    fn name(self) -> &'static str {
        match self {
            Probe::Bell(b) => b.name(),
            Probe::Basis => "basis",
        }
    }

    /// Register state with target (register qubit 0) in branch `sign`.
    fn state(self, sign: usize) -> Result<StateVector> {
        let z = Complex64::new(0.0, 0.0);
        let (target, env) = match self {
            Probe::Bell(b) => {
                let s = if sign == 0 { 1.0 } else { -1.0 };
                let r = std::f64::consts::FRAC_1_SQRT_2;
                ([Complex64::new(r, 0.0), Complex64::new(s * r, 0.0)], b.amplitudes())
            }
            Probe::Basis => {
                let t = if sign == 0 { [Complex64::new(1.0, 0.0), z] } else { [z, Complex64::new(1.0, 0.0)] };
                (t, [Complex64::new(1.0, 0.0), z, z, z])
            }
        };
        let mut amps = vec![z; 8];
        for (e, a) in env.iter().enumerate() {
            // Environment labels read |q1 q2⟩: q1 is register bit 1, q2 bit 2.
            let reg = (e >> 1 & 1) << 1 | (e & 1) << 2;
            amps[reg] = a * target[0];
            amps[reg | 1] = a * target[1];
        }
        StateVector::from_amplitudes(amps)
    }
}

/// Distinguishability of target states under crosstalk with an entangled environment.
pub fn run_nonmarkov(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweep = Sweep::new(cfg, 1)?;
    let qubits = cfg.qubits.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let [t0, e1, e2] = qubits[..] else {
        return Err(Error::Config(format!("nonmarkov needs 3 qubits (target, env, env), got {qubits:?}")));
    };
    let coupling = |a, b| {
        sweep
            .device
            .coupling(a, b)
            .ok_or_else(|| Error::Config(format!("device has no Q{a}-Q{b} coupling")))
    };
    let (j01, j02) = (coupling(t0, e1)?, coupling(t0, e2)?);
    let probes: Vec<Probe> = BellState::ALL.into_iter().map(Probe::Bell).chain([Probe::Basis]).collect();
    let mut out = ExperimentOutput::default();
    for &backend in &cfg.backends {
        let rows: Vec<Vec<(f64, &str)>> = (0..sweep.times.len())
            .into_par_iter()
            .map(|p| {
                let t = sweep.times[p];
                probes
                    .iter()
                    .enumerate()
                    .map(|(k, &probe)| {
                        let d = match (backend, probe) {
                            (Backend::Theory, Probe::Bell(b)) => analytic_bell_trace_distance(j01, j02, t, b),
                            (Backend::Theory, Probe::Basis) => 1.0,
                            (Backend::DigitalAnalog, _) => {
                                let seed = run_seed(cfg.master_seed, backend, p, k);
                                idle_branch_distance(&sweep, &qubits, probe, t, seed)?
                            }
                            _ => return Err(Error::Config(format!("nonmarkov has no {backend} backend"))),
                        };
                        Ok((d, probe.name()))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (p, ds) in rows.iter().enumerate() {
            for &(d, name) in ds {
                out.records.push(Record {
                    value: d,
                    ..sweep.record(backend, sweep.times[p], 0.0, format!("trace_distance[{name}]"))
                });
            }
        }
        for (k, probe) in probes.iter().enumerate() {
            if let Some(p) = rows.iter().position(|ds| ds[k].0 < 0.05) {
                out.summary.push((format!("first_indistinguishable_us[{backend},{}]", probe.name()), sweep.times[p]));
            }
        }
    }
    Ok(out)
}

/// Trace distance between the target's two branches after idling `t_us`.
/// Stochastic noise averages the reduced state over `shots` trajectories.
fn idle_branch_distance(sweep: &Sweep, qubits: &[usize], probe: Probe, t_us: f64, seed: u64) -> Result<f64> {
    let mut sched = Schedule::new(3, Some(qubits.to_vec()));
    sched.push_idle(t_us * 1e3);
    let runs = if sweep.noise.is_stochastic() { sweep.cfg.shots } else { 1 };
    let reduced = |sign: usize| -> Result<DensityMatrix2x2> {
        let initial = probe.state(sign)?;
        let rhos = run_observed(&sched, Some(&sweep.device), &sweep.noise, &initial, runs, seed, |s| {
            s.partial_trace_single(0).map(|r| *r.entries())
        })?;
        let mut avg = [[Complex64::new(0.0, 0.0); 2]; 2];
        for rho in rhos {
            let rho = rho?;
            for i in 0..2 {
                for j in 0..2 {
                    avg[i][j] += rho[i][j] / runs as f64;
                }
            }
        }
        DensityMatrix2x2::new(avg)
    };
    trace_distance_quantum(&reduced(0)?, &reduced(1)?)
}

/// Optimal coupling and step budget of the error model `J t_1q + 1/(J T)`
/// over the grid of coherence times, for a few single-qubit gate times.
pub fn run_optimal_coupling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweep = Sweep::new(cfg, 1)?;
    let mut t1q: Vec<f64> = vec![20.0, 50.0, 100.0, sweep.device.gates().single_ns];
    t1q.sort_by(f64::total_cmp);
    t1q.dedup();
    let j_dev = sweep.device.mean_coupling_khz()?;
    let mut out = ExperimentOutput::default();
    for &t_coh in sweep.times.iter().filter(|t| **t > 0.0) {
        for &tg in &t1q {
            let opt = optimal_coupling(tg, t_coh)?;
            let budget = opt.j_opt_khz * KHZ_US * t_coh;
            let base = sweep.record(Backend::Theory, t_coh, 0.0, "");
            for (name, value) in [
                ("j_opt_khz", opt.j_opt_khz),
                ("min_error", opt.min_error),
                ("step_budget", budget),
                ("device_to_opt_ratio", j_dev / opt.j_opt_khz),
            ] {
                out.records.push(Record {
                    observable: format!("{name}[t1q={tg}ns]"),
                    value,
                    ..base.clone()
                });
            }
            out.summary.push((format!("j_opt_khz[t1q={tg}ns,T={t_coh}us]"), opt.j_opt_khz));
            out.summary.push((format!("step_budget[t1q={tg}ns,T={t_coh}us]"), budget));
        }
    }
    if out.records.is_empty() {
        return Err(Error::Config("optimal-coupling needs at least one positive coherence time".into()));
    }
    Ok(out)
}
