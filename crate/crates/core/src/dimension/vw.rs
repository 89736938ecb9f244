//! Contraction of the `V` part and smoothness of the `W` part of the
//! linearized flow at attractor samples away from the origin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::smooth_norm_sq;
use crate::dynamics::{integrate_vw, DynamicsError, RunOptions, Sampling};
use crate::model::initial::{eigen_direction, Component};
use crate::model::{ModalState, ProblemConfig, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VwOptions {
    /// Samples with `I_u(0) < ε₀²` are skipped.
    pub eps0: f64,
    /// Unit directions: displacement and velocity eigen-directions of the
    /// first `n_dirs/2` modes.
    pub n_dirs: usize,
    /// Ladder `t_first·2^j`, `j = 0..=levels`, searched for `T₀`.
    pub t_first: f64,
    pub levels: usize,
    /// `T₀` is the first rung with `max I_V(T)/I_V(0) ≤ target`.
    pub target: f64,
    pub beta: f64,
    /// Output spacing for the `W` supremum; must divide `t_first`.
    pub dt: f64,
}

impl Default for VwOptions {
    fn default() -> Self {
        Self {
            eps0: 0.5,
            n_dirs: 8,
            t_first: 0.5,
            levels: 6,
            target: 0.5,
            beta: 2.0 / 7.0,
            dt: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VwReport {
    pub eps0: f64,
    pub n_samples: usize,
    pub n_dirs: usize,
    /// Ladder times, followed by `2·` the last rung.
    pub t_grid: Vec<f64>,
    /// `max` over samples and directions of `I_V(T)/I_V(0)` at each ladder time.
    pub q_max: Vec<f64>,
    pub t0: Option<f64>,
    /// `max I_V(2T₀)/I_V(0)`.
    pub q_at_2t0: Option<f64>,
    /// `sup` over samples, directions and time of `‖W‖²_{H^{1+β}} + ‖W_t‖²_{H^β}`.
    pub w_sup: f64,
    /// The same supremum over the first half of the horizon.
    pub w_sup_first_half: f64,
}

/// Probe directions: unit eigen-directions of the lowest modes.
pub fn probe_directions(basis: &SpectralBasis, n_dirs: usize) -> Vec<ModalState> {
    (0..n_dirs)
        .map(|i| {
            let comp = if i % 2 == 0 {
                Component::Displacement
            } else {
                Component::Velocity
            };
            eigen_direction(basis, (i / 2).min(basis.len() - 1), comp, 1.0)
        })
        .collect()
}

/// Runs the `V/W` split for every (sample, direction) pair to twice the last
/// ladder rung and reports the contraction of `V` and the size of `W`.
pub fn vw_splitting_report(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    samples: &[ModalState],
    opts: &VwOptions,
) -> Result<VwReport, DynamicsError> {
    let used: Vec<&ModalState> = samples
        .iter()
        .filter(|s| s.i_u(basis) >= opts.eps0 * opts.eps0)
        .collect();
    let dirs = probe_directions(basis, opts.n_dirs);
    let mut t_grid: Vec<f64> = (0..=opts.levels).map(|j| opts.t_first * 2f64.powi(j as i32)).collect();
    let horizon = 2.0 * t_grid[t_grid.len() - 1];
    t_grid.push(horizon);
    let ropts = RunOptions::sampled(Sampling::Uniform(opts.dt)).without_step_log();
    let pairs: Vec<(&ModalState, &ModalState)> = used.iter().flat_map(|u| dirs.iter().map(move |d| (*u, d))).collect();
    let per: Result<Vec<(Vec<f64>, f64, f64)>, DynamicsError> = pairs
        .par_iter()
        .map(|(u0, dir)| {
            let run = integrate_vw(u0, dir, horizon, config, basis, &ropts)?;
            let iv0 = run.v.states[0].i_u(basis);
            let q: Vec<f64> = t_grid
                .iter()
                .map(|t| {
                    let k = run
                        .v
                        .times
                        .iter()
                        .position(|x| (x - t).abs() <= 1e-9 * t)
                        .expect("ladder time not on the output grid");
                    run.v.states[k].i_u(basis) / iv0
                })
                .collect();
            let mut all: f64 = 0.0;
            let mut half: f64 = 0.0;
            for (t, w) in run.w.times.iter().zip(&run.w.states) {
                let v = smooth_norm_sq(w, opts.beta, basis);
                all = all.max(v);
                if *t <= 0.5 * horizon {
                    half = half.max(v);
                }
            }
            Ok((q, all, half))
        })
        .collect();
    let per = per?;
    let q_max: Vec<f64> = (0..t_grid.len())
        .map(|i| per.iter().map(|x| x.0[i]).fold(0.0, f64::max))
        .collect();
    let rungs = t_grid.len() - 1;
    let t0_idx = (!per.is_empty())
        .then(|| (0..rungs).find(|&i| q_max[i] <= opts.target))
        .flatten();
    let t0 = t0_idx.map(|i| t_grid[i]);
    let q_at_2t0 = t0_idx.map(|i| q_max[if i + 1 < rungs { i + 1 } else { rungs }]);
    Ok(VwReport {
        eps0: opts.eps0,
        n_samples: used.len(),
        n_dirs: dirs.len(),
        t_grid,
        q_max,
        t0,
        q_at_2t0,
        w_sup: per.iter().map(|x| x.1).fold(0.0, f64::max),
        w_sup_first_half: per.iter().map(|x| x.2).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VwProbe {
    /// `ε₀` rungs tried, descending.
    pub ladder: Vec<f64>,
    /// Smallest rung on which `T₀` was found.
    pub eps0: Option<f64>,
    /// Report on that rung, or on the first rung when none succeeded.
    pub report: VwReport,
}

/// Picks `n` samples with `I_u ≥ ε₀²`, evenly spaced through the candidates.
pub fn select_samples(points: &[ModalState], eps0: f64, n: usize, basis: &SpectralBasis) -> Vec<ModalState> {
    let cand: Vec<&ModalState> = points.iter().filter(|s| s.i_u(basis) >= eps0 * eps0).collect();
    if cand.is_empty() || n == 0 {
        return Vec::new();
    }
    let n = n.min(cand.len());
    (0..n).map(|i| cand[i * cand.len() / n].clone()).collect()
}

/// Walks `ε₀ = eps_max·2^{-j}` down the ladder while `T₀` is still found on
/// the ladder, and reports the smallest such `ε₀`.
pub fn probe_vw_threshold(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    points: &[ModalState],
    n_samples: usize,
    eps_max: f64,
    rungs: usize,
    opts: &VwOptions,
) -> Result<VwProbe, DynamicsError> {
    assert!(rungs >= 1, "need at least one rung");
    let ladder: Vec<f64> = (0..rungs).map(|j| eps_max * 0.5f64.powi(j as i32)).collect();
    let mut best: Option<(f64, VwReport)> = None;
    let mut first: Option<VwReport> = None;
    for &eps0 in &ladder {
        let samples = select_samples(points, eps0, n_samples, basis);
        let report = vw_splitting_report(config, basis, &samples, &VwOptions { eps0, ..*opts })?;
        let found = report.t0.is_some() && report.n_samples > 0;
        if first.is_none() {
            first = Some(report.clone());
        }
        if !found {
            break;
        }
        best = Some((eps0, report));
    }
    Ok(match best {
        Some((eps0, report)) => VwProbe {
            ladder,
            eps0: Some(eps0),
            report,
        },
        None => VwProbe {
            ladder,
            eps0: None,
            report: first.expect("ladder is nonempty"),
        },
    })
}
