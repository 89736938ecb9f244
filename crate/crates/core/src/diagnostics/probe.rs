//! Empirical radii near the degenerate origin: the decay radius `r₀` and the
//! Lipschitz modulus of the flow on `B(0, r₀)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::decay::{fit_two_sided_decay, log_spaced, DecayError, TwoSidedDecay};
use crate::dynamics::{integrate, DynamicsError, RunOptions, Sampling};
use crate::model::initial::{eigen_direction, random_low_mode, Component};
use crate::model::{FieldEvaluator, ModalState, Nonlinearity, ProblemConfig, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusProbeOptions {
    pub r_max: f64,
    /// Ladder `r_max·2^{-j}`, `j = 0..levels`.
    pub levels: usize,
    pub n_random: usize,
    pub n_low: usize,
    pub horizon: f64,
    pub n_samples: usize,
    /// Admissible `|E − Q| / Q`, with `Q` the quadratic energy.
    pub nonlinear_fraction: f64,
    /// Admissible `sup_t I_u(t) / I_u(0)`.
    pub growth: f64,
    pub seed: u64,
}

impl Default for RadiusProbeOptions {
    fn default() -> Self {
        Self {
            r_max: 4.0,
            levels: 10,
            n_random: 8,
            n_low: 4,
            horizon: 20.0,
            n_samples: 200,
            nonlinear_fraction: 0.1,
            growth: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRung {
    pub r: f64,
    pub max_nonlinear_fraction: f64,
    pub max_growth: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRadius {
    /// Largest accepted rung; `None` if every rung failed.
    pub r0: Option<f64>,
    pub rungs: Vec<RadiusRung>,
}

/// Quadratic part `Q = ½(‖∇u‖² + ‖u_t‖² + f'(0)‖u‖²)` of the energy.
pub fn quadratic_energy(s: &ModalState, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    0.5 * (s.i_u(basis) + config.fprime0() * s.l2_sq())
}

/// Walks down the radius ladder and accepts the first rung on which, for
/// every probe trajectory, the nonlinear part of the energy stays within
/// `nonlinear_fraction` of the quadratic part and `I_u` never exceeds
/// `growth·I_u(0)`.
pub fn probe_decay_radius(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RadiusProbeOptions,
) -> Result<DecayRadius, DynamicsError> {
    let mut rungs = Vec::new();
    let nl = Nonlinearity::from_config(config);
    let run_opts = RunOptions::sampled(Sampling::Uniform(opts.horizon / opts.n_samples as f64)).without_step_log();
    for j in 0..opts.levels {
        let r = opts.r_max * 0.5f64.powi(j as i32);
        let mut starts: Vec<ModalState> = (0..opts.n_random)
            .map(|i| random_low_mode(basis, opts.n_low.min(basis.len()), r, opts.seed, i as u64))
            .collect();
        starts.push(eigen_direction(basis, 0, Component::Displacement, r));
        starts.push(eigen_direction(basis, 0, Component::Velocity, r));
        let results: Result<Vec<(f64, f64)>, DynamicsError> = starts
            .par_iter()
            .map(|s0| {
                let traj = integrate(s0, opts.horizon, config, basis, &run_opts)?;
                let mut ev = FieldEvaluator::new(basis, nl);
                let i0 = s0.i_u(basis);
                let mut frac: f64 = 0.0;
                let mut growth: f64 = 0.0;
                for s in &traj.states {
                    let q = quadratic_energy(s, config, basis);
                    let e = 0.5 * s.i_u(basis) + ev.potential(&s.a);
                    if q > 0.0 {
                        frac = frac.max((e - q).abs() / q);
                    }
                    growth = growth.max(s.i_u(basis) / i0);
                }
                Ok((frac, growth))
            })
            .collect();
        let results = results?;
        let max_frac = results.iter().map(|x| x.0).fold(0.0, f64::max);
        let max_growth = results.iter().map(|x| x.1).fold(0.0, f64::max);
        let accepted = max_frac <= opts.nonlinear_fraction && max_growth <= opts.growth;
        rungs.push(RadiusRung {
            r,
            max_nonlinear_fraction: max_frac,
            max_growth,
            accepted,
        });
        if accepted {
            return Ok(DecayRadius { r0: Some(r), rungs });
        }
    }
    Ok(DecayRadius { r0: None, rungs })
}

/// Distance used by [`lipschitz_gap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LipschitzMetric {
    /// `H¹₀ × L²`.
    Phase,
    /// `(‖∇δ‖² + ‖δ_t‖² + f'(0)‖δ‖²)^{1/2}`, conserved by the linear undamped flow.
    Conserved,
}

fn metric_distance(x: &ModalState, y: &ModalState, metric: LipschitzMetric, f1: f64, basis: &SpectralBasis) -> f64 {
    let d = x.sub(y);
    match metric {
        LipschitzMetric::Phase => d.phase_norm(basis),
        LipschitzMetric::Conserved => (d.i_u(basis) + f1 * d.l2_sq()).max(0.0).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub times: Vec<f64>,
    /// Largest ratio over pairs at each time.
    pub max_ratio: Vec<f64>,
    pub sup: f64,
    /// Supremum over the first half of the horizon.
    pub sup_first_half: f64,
    pub n_pairs: usize,
}

impl LipschitzReport {
    /// `sup[0,T] / sup[0,T/2]`; values near 1 mean no growth with the horizon.
    pub fn growth(&self) -> f64 {
        self.sup / self.sup_first_half
    }
}

/// `max` over pairs of `‖S(t)ω₁ − S(t)ω₂‖ / ‖ω₁ − ω₂‖` on a time grid.
/// Coincident pairs are skipped.
pub fn lipschitz_gap(
    pairs: &[(ModalState, ModalState)],
    times: &[f64],
    metric: LipschitzMetric,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<LipschitzReport, DynamicsError> {
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let mut ropts = opts.clone();
    ropts.sampling = Sampling::Times(times.to_vec());
    let f1 = config.fprime0();
    let ratios: Result<Vec<Option<(Vec<f64>, Vec<f64>)>>, DynamicsError> = pairs
        .par_iter()
        .map(|(a, b)| {
            let d0 = metric_distance(a, b, metric, f1, basis);
            if d0 == 0.0 {
                return Ok(None);
            }
            let ta = integrate(a, horizon, config, basis, &ropts)?;
            let tb = integrate(b, horizon, config, basis, &ropts)?;
            let r = ta
                .states
                .iter()
                .zip(&tb.states)
                .map(|(x, y)| metric_distance(x, y, metric, f1, basis) / d0)
                .collect();
            Ok(Some((ta.times, r)))
        })
        .collect();
    let ratios: Vec<(Vec<f64>, Vec<f64>)> = ratios?.into_iter().flatten().collect();
    let out_times = ratios.first().map(|r| r.0.clone()).unwrap_or_default();
    let mut max_ratio = vec![0.0f64; out_times.len()];
    for (_, r) in &ratios {
        for (m, v) in max_ratio.iter_mut().zip(r) {
            *m = m.max(*v);
        }
    }
    let sup = max_ratio.iter().copied().fold(0.0, f64::max);
    let sup_first_half = out_times
        .iter()
        .zip(&max_ratio)
        .filter(|(t, _)| **t <= 0.5 * horizon)
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    Ok(LipschitzReport {
        times: out_times,
        max_ratio,
        sup,
        sup_first_half,
        n_pairs: ratios.len(),
    })
}

#[derive(Debug, Error)]
pub enum DecayRunError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Fit(#[from] DecayError),
}

/// A small-data run sampled at log-spaced times with its two-sided fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRun {
    pub norm0: f64,
    pub times: Vec<f64>,
    /// Phase norm at each time, starting with `t = 0`.
    pub norms: Vec<f64>,
    pub fit: TwoSidedDecay,
}

/// Integrates seeded low-mode data of phase norm `norm0` to `horizon`, samples
/// `n_out` log-spaced times from `10^{-1}` and fits the tail on `window`.
#[allow(clippy::too_many_arguments)]
pub fn small_data_decay(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    norm0: f64,
    horizon: f64,
    window: (f64, f64),
    n_out: usize,
    seed: u64,
    index: u64,
) -> Result<DecayRun, DecayRunError> {
    let s0 = random_low_mode(basis, 4.min(basis.len()), norm0, seed, index);
    let opts = RunOptions::sampled(Sampling::Times(log_spaced(0.1, horizon, n_out))).without_step_log();
    let traj = integrate(&s0, horizon, config, basis, &opts)?;
    let norms = traj.phase_norms(basis);
    let fit = fit_two_sided_decay(&traj.times, &norms, config.p, s0.i_u(basis), window)?;
    Ok(DecayRun {
        norm0,
        times: traj.times,
        norms,
        fit,
    })
}

/// Column header of the decay CSV.
pub const DECAY_CSV_HEADER: &str = "run,t,phase_norm";

/// Writes every run's samples with 17 significant digits.
pub fn write_decay_csv<W: std::io::Write>(out: &mut W, runs: &[DecayRun]) -> std::io::Result<()> {
    writeln!(out, "{DECAY_CSV_HEADER}")?;
    for (i, run) in runs.iter().enumerate() {
        for (t, y) in run.times.iter().zip(&run.norms) {
            writeln!(out, "{i},{t:.16e},{y:.16e}")?;
        }
    }
    Ok(())
}
