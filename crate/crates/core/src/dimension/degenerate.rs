//! Covering of the attractor near the degenerate origin.
//!
//! Points of the attractor inside `B(0, ε₀)` are images under the flow of the
//! annulus `ε₁ < ‖x‖ ≤ ε₀`. Covering the annulus at scale `ε_m` and the time
//! interval `[0, t_m]` by slots of length `ε_m`, then pushing the centres
//! through the flow, covers the inner region by
//! `N(annulus, ε_m)·⌈t_m/ε_m⌉ + 1` balls of radius `2L(2√2 ε_m)^θ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{box_dimension, greedy_net, grid_count, CoverMethod, CoveringReport, MIN_SCALES};
use crate::diagnostics::{
    holder_time_exponent, lipschitz_gap, log_spaced, DecayFit, HolderFit, HolderOptions, LipschitzMetric,
};
use crate::dynamics::{integrate, DynamicsError, RunOptions, Sampling};
use crate::model::initial::random_low_mode;
use crate::model::{ModalState, ProblemConfig, SpectralBasis};
use crate::stats::{linear_fit, mean};

/// Joint Hölder modulus `‖S(t₁)u₁ − S(t₂)u₂‖ ≤ L(|t₁−t₂| + ‖u₁−u₂‖)^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverInflation {
    pub l: f64,
    pub theta: f64,
}

impl CoverInflation {
    /// Radius `2L(2√2 ε)^θ` of the balls that cover the pushed cells.
    pub fn radius(&self, eps: f64) -> f64 {
        2.0 * self.l * (2.0 * 2f64.sqrt() * eps).powf(self.theta)
    }

    /// Joint modulus from a measured time-Hölder fit and a Lipschitz
    /// supremum in the data: `L` is the larger constant, `θ` the Hölder slope
    /// capped at 1. `None` when the fit has no slope.
    pub fn measured(holder: &HolderFit, lipschitz: f64) -> Option<Self> {
        let theta = holder.slope?.min(1.0);
        let l = holder.constant()?.max(lipschitz);
        (theta > 0.0 && l.is_finite()).then_some(Self { l, theta })
    }
}

/// Measurements behind a [`CoverInflation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationProbe {
    pub holder: HolderFit,
    pub lipschitz: f64,
    pub inflation: Option<CoverInflation>,
}

/// Measures the joint modulus on `B(0, radius)`: the time-Hölder fit of one
/// trajectory over lags in `[0.01, 0.1]` on `[0, 50]`, and the Lipschitz
/// supremum of four seeded pairs over the same horizon.
pub fn measure_inflation(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    radius: f64,
    seed: u64,
) -> Result<InflationProbe, DynamicsError> {
    let n_low = 4.min(basis.len());
    let horizon = 50.0;
    let opts = RunOptions::sampled(Sampling::Uniform(0.01)).without_step_log();
    let traj = integrate(
        &random_low_mode(basis, n_low, radius, seed, 0),
        horizon,
        config,
        basis,
        &opts,
    )?;
    let holder = holder_time_exponent(
        &traj,
        basis,
        &HolderOptions {
            dt_min: 0.01,
            dt_max: 0.1,
            seed,
            ..Default::default()
        },
    );
    let pairs: Vec<(ModalState, ModalState)> = (0..4)
        .map(|i| {
            (
                random_low_mode(basis, n_low, radius, seed, 100 + i),
                random_low_mode(basis, n_low, radius, seed, 200 + i),
            )
        })
        .collect();
    let lip = lipschitz_gap(
        &pairs,
        &log_spaced(0.1, horizon, 50),
        LipschitzMetric::Phase,
        config,
        basis,
        &RunOptions::default().without_step_log(),
    )?;
    let inflation = CoverInflation::measured(&holder, lip.sup);
    Ok(InflationProbe {
        holder,
        lipschitz: lip.sup,
        inflation,
    })
}

/// `t_m = max(0, (C₂/ε_m)^p − k₂ε₀^{−p})` from the upper decay envelope
/// `C₂(t + k₂I₀^{−p/2})^{−1/p}`, made nondecreasing; `t_m` bounds the time
/// after which every trajectory launched in `B(0, ε₀)` stays below `ε_m`.
pub fn decay_schedule(eps0: f64, eps: &[f64], p: f64, upper: &DecayFit) -> Vec<f64> {
    let shift = upper.offset * eps0.powf(-p);
    let mut prev: f64 = 0.0;
    eps.iter()
        .map(|e| {
            let t = ((upper.amplitude / e).powf(p) - shift).max(0.0).max(prev);
            prev = t;
            t
        })
        .collect()
}

/// `ln t_m / (−ln ε_m)`, undefined where `t_m ≤ 0` or `ε_m ≥ 1`.
pub fn d0_sequence(eps: &[f64], t: &[f64]) -> Vec<Option<f64>> {
    eps.iter()
        .zip(t)
        .map(|(e, t)| (*t > 0.0 && *e < 1.0).then(|| t.ln() / -e.ln()))
        .collect()
}

fn last_three(seq: &[Option<f64>]) -> Option<f64> {
    let vals: Vec<f64> = seq.iter().rev().take(3).map_while(|x| *x).collect();
    (vals.len() == 3).then(|| mean(&vals))
}

/// One scale of the degenerate cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCover {
    pub m: usize,
    pub eps: f64,
    pub t_m: f64,
    pub annulus_count: usize,
    /// `max(1, ⌈t_m/ε_m⌉)`.
    pub slots: u64,
    /// `annulus_count · slots + 1`.
    pub inner_count: f64,
    /// Radius of the covering balls.
    pub radius: f64,
    /// `None` when the pushed cover exceeded the verification budget.
    pub verified: Option<bool>,
    /// Indices (into the inner points) not covered, at most 16.
    pub uncovered: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateOptions {
    /// Scales `ε_m = 2^{−m}ε₀`, `m = 1..=m_max`.
    pub m_max: usize,
    pub method: CoverMethod,
    /// Scale ratio of the box-counting report of the annulus; the grid
    /// method needs `1/alpha` to be an integer.
    pub alpha: f64,
    /// Largest number of pushed centre samples checked per scale.
    pub verify_budget: usize,
}

impl Default for DegenerateOptions {
    fn default() -> Self {
        Self {
            m_max: 30,
            method: CoverMethod::Grid,
            alpha: 0.5,
            verify_budget: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCover {
    pub eps0: f64,
    pub eps1: f64,
    pub p: f64,
    pub inflation: CoverInflation,
    pub n_inner: usize,
    pub n_annulus: usize,
    pub scales: Vec<ScaleCover>,
    /// Inner-region counts against `ε_m`, with `t_list`, `slope` (of
    /// `ln N` against `−ln radius`) and `d0` filled in.
    pub report: CoveringReport,
    /// Box-counting report of the annulus itself.
    pub annulus: Option<CoveringReport>,
}

/// Builds the cover of `{x ∈ cloud : ‖x‖ ≤ ε₀}` from covers of the annulus
/// `ε₁ < ‖x‖ ≤ ε₀` transported by the flow, and verifies it on the cloud
/// wherever the number of pushed centres fits the budget.
#[allow(clippy::too_many_arguments)]
pub fn degenerate_cover(
    cloud: &[ModalState],
    eps0: f64,
    eps1: f64,
    upper: &DecayFit,
    inflation: CoverInflation,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &DegenerateOptions,
) -> Result<DegenerateCover, DynamicsError> {
    assert!(eps0 > eps1 && eps1 > 0.0, "need ε₀ > ε₁ > 0");
    let p = config.p;
    let inner: Vec<&ModalState> = cloud.iter().filter(|s| s.phase_norm(basis) <= eps0).collect();
    let annulus: Vec<Vec<f64>> = inner
        .iter()
        .filter(|s| s.phase_norm(basis) > eps1)
        .map(|s| s.embed(basis))
        .collect();
    let inner_emb: Vec<Vec<f64>> = inner.iter().map(|s| s.embed(basis)).collect();
    let inner_norms: Vec<f64> = inner.iter().map(|s| s.phase_norm(basis)).collect();
    let eps: Vec<f64> = (1..=opts.m_max).map(|m| eps0 * 0.5f64.powi(m as i32)).collect();
    let t = decay_schedule(eps0, &eps, p, upper);

    let mut scales = Vec::with_capacity(eps.len());
    for (i, (&e, &tm)) in eps.iter().zip(&t).enumerate() {
        let (count, centers) = if annulus.is_empty() {
            (0, Vec::new())
        } else {
            let net = greedy_net(&annulus, e);
            let count = match opts.method {
                CoverMethod::Grid => grid_count(&annulus, e),
                CoverMethod::Greedy => net.len(),
            };
            (count, net)
        };
        let slots = ((tm / e).ceil() as u64).max(1);
        let radius = inflation.radius(e);
        let inner_count = count as f64 * slots as f64 + 1.0;
        let pushed = centers.len() as f64 * slots as f64;
        let (verified, uncovered) = if annulus.is_empty() {
            // only the ball B(0, radius) around the origin is needed
            let bad: Vec<usize> = (0..inner_emb.len())
                .filter(|&j| inner_norms[j] > radius)
                .take(16)
                .collect();
            (Some(bad.is_empty()), bad)
        } else if pushed <= opts.verify_budget as f64 {
            let starts: Vec<ModalState> = centers
                .iter()
                .map(|&c| ModalState::from_embedded(&annulus[c], basis))
                .collect();
            let images = push_centers(&starts, e, slots, config, basis)?;
            let bad: Vec<usize> = (0..inner_emb.len())
                .into_par_iter()
                .filter(|&j| {
                    inner_norms[j] > radius
                        && !images
                            .iter()
                            .any(|y| super::dist_sq(y, &inner_emb[j]) <= radius * radius)
                })
                .collect();
            (Some(bad.is_empty()), bad.into_iter().take(16).collect())
        } else {
            (None, Vec::new())
        };
        scales.push(ScaleCover {
            m: i + 1,
            eps: e,
            t_m: tm,
            annulus_count: count,
            slots,
            inner_count,
            radius,
            verified,
            uncovered,
        });
    }

    let d0 = last_three(&d0_sequence(&eps, &t));
    let xs: Vec<f64> = scales.iter().map(|s| -s.radius.ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|s| s.inner_count.ln()).collect();
    let slope = if annulus.is_empty() {
        Some(0.0)
    } else if scales.len() >= MIN_SCALES {
        Some(linear_fit(&xs, &ys).slope)
    } else {
        None
    };
    let report = CoveringReport {
        eps_list: eps.clone(),
        counts: scales
            .iter()
            .map(|s| s.inner_count.min(usize::MAX as f64) as usize)
            .collect(),
        t_list: Some(t),
        slope,
        d0,
        method: opts.method,
        alpha: 0.5,
        window: (!scales.is_empty()).then(|| [0, scales.len() - 1]),
        fit_residual: None,
        n_points: inner.len(),
        diameter: super::cloud::diameter(&inner_emb),
        cross_check: None,
    };
    let annulus_report = if annulus.is_empty() {
        None
    } else {
        box_dimension(&annulus, eps0, opts.alpha, opts.m_max, opts.method).ok()
    };
    Ok(DegenerateCover {
        eps0,
        eps1,
        p,
        inflation,
        n_inner: inner.len(),
        n_annulus: annulus.len(),
        scales,
        report,
        annulus: annulus_report,
    })
}

/// Embedded images `S(jε)c` for `j = 0..slots` of every centre.
fn push_centers(
    starts: &[ModalState],
    eps: f64,
    slots: u64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
) -> Result<Vec<Vec<f64>>, DynamicsError> {
    let times: Vec<f64> = (1..slots).map(|j| j as f64 * eps).collect();
    let horizon = slots as f64 * eps;
    let opts = RunOptions::sampled(Sampling::Times(times)).without_step_log();
    let runs: Result<Vec<Vec<Vec<f64>>>, DynamicsError> = starts
        .par_iter()
        .map(|s| {
            let tr = integrate(s, horizon, config, basis, &opts)?;
            Ok(tr.states.iter().map(|x| x.embed(basis)).collect())
        })
        .collect();
    Ok(runs?.into_iter().flatten().collect())
}

/// The final chain of the two-regime estimate:
/// `d_B(𝒜) ≤ d_B(𝒜 ∖ B(0,ε₀)) + θ^{−1}(d_B(annulus) + d₀ + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRegimeSummary {
    pub outer_slope: f64,
    pub annulus_slope: f64,
    pub d0: f64,
    pub theta: f64,
    /// `θ^{−1}(d_B(annulus) + d₀ + 1)`, or 0 when the annulus is empty and
    /// the inner region is covered by the single ball at the origin.
    pub inner_bound: f64,
    pub combined: f64,
}

impl TwoRegimeSummary {
    pub fn new(outer_slope: f64, annulus_slope: f64, d0: f64, theta: f64) -> Self {
        let inner_bound = (annulus_slope + d0 + 1.0) / theta;
        Self {
            outer_slope,
            annulus_slope,
            d0,
            theta,
            inner_bound,
            combined: outer_slope + inner_bound,
        }
    }

    /// Summary for an empty annulus: one ball at every scale, so no inner term.
    pub fn without_annulus(outer_slope: f64, theta: f64) -> Self {
        Self {
            outer_slope,
            annulus_slope: 0.0,
            d0: 0.0,
            theta,
            inner_bound: 0.0,
            combined: outer_slope,
        }
    }

    /// Assembles the summary from the degenerate cover; `None` when the
    /// annulus slope or `d₀` is missing. The caller supplies the outer slope
    /// (0 for an empty outer set).
    pub fn from_reports(outer_slope: f64, cover: &DegenerateCover) -> Option<Self> {
        if cover.n_annulus == 0 {
            return Some(Self::without_annulus(outer_slope, cover.inflation.theta));
        }
        let annulus_slope = cover.annulus.as_ref()?.slope?;
        Some(Self::new(
            outer_slope,
            annulus_slope,
            cover.report.d0?,
            cover.inflation.theta,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper(c2: f64, k2: f64, p: f64) -> DecayFit {
        DecayFit {
            exponent: 1.0 / p,
            amplitude: c2,
            offset: k2,
            residual: 0.0,
            window: [1.0, 100.0],
            time_shift: k2,
        }
    }

    #[test]
    fn d0_tends_to_p() {
        for p in [1.2, 1.5, 1.8] {
            let eps: Vec<f64> = (1..=40).map(|m| 0.5f64.powi(m)).collect();
            let t = decay_schedule(1.0, &eps, p, &upper(1.3, 0.4, p));
            let d0 = last_three(&d0_sequence(&eps, &t)).unwrap();
            assert!((d0 - p).abs() < 0.05 * p, "{p}: {d0}");
            assert!(t.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn schedule_matches_envelope_inversion() {
        let p = 1.5;
        let fit = upper(2.0, 0.5, p);
        let eps0 = 0.8;
        let t = decay_schedule(eps0, &[0.01], p, &fit);
        // the envelope at I₀ = ε₀² evaluated at t_m equals ε_m
        let y = fit.amplitude * (t[0] + fit.offset * eps0.powf(-p)).powf(-1.0 / p);
        assert!((y - 0.01).abs() < 1e-12);
    }

    #[test]
    fn summary_identity() {
        let s = TwoRegimeSummary::new(1.0, 0.5, 1.5, 0.5);
        assert_eq!(s.combined, 1.0 + (0.5 + 1.5 + 1.0) / 0.5);
    }
}
