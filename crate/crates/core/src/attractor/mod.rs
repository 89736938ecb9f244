//! Ensembles of trajectories: the absorbing radius, burn-in and sampling of
//! attractor point clouds, the `w`-regularity sweep and an invariance proxy.

pub mod cloud;

pub use cloud::{diameter, hausdorff, CloudError, PointCloud, PointLabel, Provenance};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::smooth_norm_sq;
use crate::dynamics::{
    integrate, integrate_decomposition, integrate_decomposition_observed, DynamicsError, RunOptions, Sampling,
};
use crate::integrate::IntegrateError;
use crate::model::initial::{eigen_direction, random_low_mode, Component};
use crate::model::{ModalState, ProblemConfig, SpectralBasis};

#[derive(Debug, Error)]
pub enum AttractorError {
    #[error(transparent)]
    Dynamics(DynamicsError),
    #[error("time budget exhausted at t = {t} after {steps} steps")]
    Budget { t: f64, steps: u64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

impl From<DynamicsError> for AttractorError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Integrate(IntegrateError::MaxSteps { t, steps }) => AttractorError::Budget { t, steps },
            other => AttractorError::Dynamics(other),
        }
    }
}

/// Initial conditions: seeded random low-mode data with phase norms spread
/// evenly over `(0, radius]`, plus eigen-directions at norm `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_random: usize,
    pub n_low: usize,
    /// Largest phase norm `K`.
    pub radius: f64,
    /// Displacement and velocity eigen-directions for the first `n_eigen` modes.
    pub n_eigen: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn random(n_random: usize, radius: f64, seed: u64) -> Self {
        Self {
            n_random,
            n_low: 4,
            radius,
            n_eigen: 0,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.n_random + 2 * self.n_eigen
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Members of the ensemble in a fixed order (random members first).
pub fn ensemble(basis: &SpectralBasis, spec: &EnsembleSpec) -> Vec<ModalState> {
    let n_low = spec.n_low.clamp(1, basis.len());
    let mut out: Vec<ModalState> = (0..spec.n_random)
        .map(|i| {
            let norm = spec.radius * (i + 1) as f64 / spec.n_random as f64;
            random_low_mode(basis, n_low, norm, spec.seed, i as u64)
        })
        .collect();
    for k in 0..spec.n_eigen.min(basis.len()) {
        out.push(eigen_direction(basis, k, Component::Displacement, spec.radius));
        out.push(eigen_direction(basis, k, Component::Velocity, spec.radius));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingOptions {
    pub horizon: f64,
    /// Sampling interval of the phase norm.
    pub dt: f64,
    /// Relative slack of the absorbing ball.
    pub margin: f64,
    /// Step budget per trajectory.
    pub max_steps: u64,
}

impl Default for AbsorbingOptions {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            dt: 0.05,
            margin: 0.1,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingReport {
    /// Largest phase norm over the second half of the horizon.
    pub radius: f64,
    /// Largest phase norm over the last quarter; close to `radius` once the
    /// ensemble has settled, smaller while it is still contracting.
    pub late_radius: f64,
    pub margin: f64,
    pub horizon: f64,
    pub initial_norms: Vec<f64>,
    /// First sample time after which the trajectory stays in `B(0, R(1+margin))`.
    pub entry_times: Vec<f64>,
    /// Entry times are nondecreasing when ordered by initial norm.
    pub entry_monotone: bool,
}

impl AbsorbingReport {
    pub fn max_entry_time(&self) -> f64 {
        self.entry_times.iter().copied().fold(0.0, f64::max)
    }

    /// The second half of the horizon stayed within the margin of its last quarter.
    pub fn settled(&self) -> bool {
        self.radius <= self.late_radius * (1.0 + self.margin)
    }
}

/// Runs the ensemble to the horizon and reports the smallest ball that every
/// trajectory enters and stays in, together with the entry times.
pub fn probe_absorbing_radius(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    starts: &[ModalState],
    opts: &AbsorbingOptions,
) -> Result<AbsorbingReport, AttractorError> {
    if starts.is_empty() {
        return Err(AttractorError::Input("empty ensemble".into()));
    }
    let mut ropts = RunOptions::sampled(Sampling::Uniform(opts.dt)).without_step_log();
    ropts.max_steps = opts.max_steps;
    let runs: Result<Vec<(Vec<f64>, Vec<f64>)>, DynamicsError> = starts
        .par_iter()
        .map(|s0| {
            let tr = integrate(s0, opts.horizon, config, basis, &ropts)?;
            let norms = tr.phase_norms(basis);
            Ok((tr.times, norms))
        })
        .collect();
    let runs = runs?;
    let sup_after = |t0: f64| {
        runs.iter()
            .flat_map(|(t, n)| t.iter().zip(n).filter(move |(t, _)| **t >= t0).map(|(_, n)| *n))
            .fold(0.0, f64::max)
    };
    let radius = sup_after(0.5 * opts.horizon);
    let late_radius = sup_after(0.75 * opts.horizon);
    let ball = radius * (1.0 + opts.margin);
    let entry_times: Vec<f64> = runs
        .iter()
        .map(|(t, n)| match n.iter().rposition(|x| *x > ball) {
            None => 0.0,
            Some(i) => t[i + 1],
        })
        .collect();
    let initial_norms: Vec<f64> = starts.iter().map(|s| s.phase_norm(basis)).collect();
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&i, &j| initial_norms[i].total_cmp(&initial_norms[j]));
    let entry_monotone = order.windows(2).all(|w| entry_times[w[1]] >= entry_times[w[0]]);
    Ok(AbsorbingReport {
        radius,
        late_radius,
        margin: opts.margin,
        horizon: opts.horizon,
        initial_norms,
        entry_times,
        entry_monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub burn_in: f64,
    pub n_samples: usize,
    pub stride: f64,
    /// Points closer than this are merged.
    pub dedup_tol: f64,
}

impl SampleOptions {
    pub fn new(burn_in: f64, n_samples: usize, stride: f64) -> Self {
        Self {
            burn_in,
            n_samples,
            stride,
            dedup_tol: 1e-12,
        }
    }

    /// Sample times `burn_in + k·stride`, `k = 0..n_samples`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples)
            .map(|k| self.burn_in + k as f64 * self.stride)
            .collect()
    }

    /// Integration horizon: one stride past the last sample, so every sample
    /// comes from dense output and the step sequence only depends on this value.
    pub fn horizon(&self) -> f64 {
        self.burn_in + self.n_samples as f64 * self.stride
    }
}

/// Burns in every ensemble member and samples it at a fixed stride. Points are
/// merged in trajectory order, then time order, and deduplicated.
pub fn sample_attractor(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    spec: &EnsembleSpec,
    opts: &SampleOptions,
) -> Result<PointCloud, AttractorError> {
    if opts.n_samples == 0 || !(opts.stride > 0.0) || !(opts.burn_in >= 0.0) {
        return Err(AttractorError::Input(
            "need n_samples ≥ 1, stride > 0 and burn_in ≥ 0".into(),
        ));
    }
    let starts = ensemble(basis, spec);
    let times = opts.times();
    let ropts = RunOptions::sampled(Sampling::Times(times.clone())).without_step_log();
    let runs: Result<Vec<Vec<ModalState>>, DynamicsError> = starts
        .par_iter()
        .map(|s0| {
            let tr = integrate(s0, opts.horizon(), config, basis, &ropts)?;
            // drop t = 0 unless it is itself a sample time
            Ok(tr
                .times
                .iter()
                .zip(tr.states)
                .filter(|(t, _)| times.binary_search_by(|x| x.total_cmp(t)).is_ok())
                .map(|(_, s)| s)
                .collect())
        })
        .collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, run) in runs?.into_iter().enumerate() {
        for (t, s) in times.iter().zip(run) {
            points.push(s);
            labels.push(PointLabel { trajectory: i, t: *t });
        }
    }
    let mut cloud = PointCloud {
        points,
        labels,
        provenance: Provenance::new(config, basis, opts.burn_in, opts.stride, spec.seed),
    };
    cloud.dedup(opts.dedup_tol, basis);
    Ok(cloud)
}

/// Partitions a cloud into the closed ball `B(0, ε)` and its complement.
pub fn annulus_split(cloud: &PointCloud, eps: f64, basis: &SpectralBasis) -> (PointCloud, PointCloud) {
    assert!(eps > 0.0, "ε must be positive");
    let mut inner = PointCloud {
        points: Vec::new(),
        labels: Vec::new(),
        provenance: cloud.provenance.clone(),
    };
    let mut outer = inner.clone();
    for (i, s) in cloud.points.iter().enumerate() {
        let dst = if s.phase_norm(basis) <= eps {
            &mut inner
        } else {
            &mut outer
        };
        dst.points.push(s.clone());
        if let Some(l) = cloud.labels.get(i) {
            dst.labels.push(*l);
        }
    }
    (inner, outer)
}

/// Points of the cloud in a shell `lo < ‖x‖ ≤ hi`.
pub fn shell(cloud: &PointCloud, lo: f64, hi: f64, basis: &SpectralBasis) -> Vec<ModalState> {
    cloud
        .points
        .iter()
        .filter(|s| {
            let r = s.phase_norm(basis);
            r > lo && r <= hi
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub beta: f64,
    pub horizon: f64,
    /// `sup` over runs and output times of `‖w‖²_{H^{1+β}} + ‖w_t‖²_{H^β}`.
    pub sup: f64,
    /// The same supremum restricted to `[0, T/2]`.
    pub sup_first_half: f64,
    pub per_run: Vec<f64>,
    /// `sup > 1.2·sup_first_half`: the norm was still growing.
    pub growth: bool,
}

/// Runs the `v/w` decomposition with shift `f'(0)` for every member and
/// reports the supremum of the smooth-part norm of `w`.
pub fn w_regularity_report(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    starts: &[ModalState],
    horizon: f64,
    dt: f64,
    beta: f64,
) -> Result<RegularityReport, AttractorError> {
    let shift = config.fprime0();
    let ropts = RunOptions::sampled(Sampling::Uniform(dt)).without_step_log();
    let per: Result<Vec<(f64, f64)>, DynamicsError> = starts
        .par_iter()
        .map(|s0| {
            let run = integrate_decomposition(s0, shift, horizon, config, basis, &ropts)?;
            let mut all: f64 = 0.0;
            let mut half: f64 = 0.0;
            for (t, w) in run.w.times.iter().zip(&run.w.states) {
                let v = smooth_norm_sq(w, beta, basis);
                all = all.max(v);
                if *t <= 0.5 * horizon {
                    half = half.max(v);
                }
            }
            Ok((all, half))
        })
        .collect();
    let per = per?;
    let sup = per.iter().map(|x| x.0).fold(0.0, f64::max);
    let sup_first_half = per.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(RegularityReport {
        beta,
        horizon,
        sup,
        sup_first_half,
        per_run: per.iter().map(|x| x.0).collect(),
        growth: sup > 1.2 * sup_first_half,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VDecayReport {
    pub horizon: f64,
    pub level: f64,
    /// `sup` over members of `Ĩ_v(0)`.
    pub sup_initial: f64,
    /// First output time at which every member has `Ĩ_v ≤ level·sup_initial`.
    pub uniform_time: Option<f64>,
    /// Per member, the first output time with `Ĩ_v ≤ level·Ĩ_v(0)`.
    pub member_times: Vec<Option<f64>>,
    /// Largest increase of `Ĩ_v` between consecutive accepted steps, relative
    /// to the member's `Ĩ_v(0)`.
    pub max_step_increase: f64,
    /// Largest `u − (v + w)` defect over members, relative to `sup_t ‖u‖`.
    pub reconstruction: f64,
}

/// Runs the decomposition with shift `f'(0)` for every member, audits `Ĩ_v`
/// at every accepted step and finds the time after which the whole ensemble
/// has `Ĩ_v` below `level` times the ensemble's initial supremum.
pub fn v_decay_report(
    config: &ProblemConfig,
    basis: &SpectralBasis,
    starts: &[ModalState],
    horizon: f64,
    dt: f64,
    level: f64,
) -> Result<VDecayReport, AttractorError> {
    let shift = config.fprime0();
    let n = basis.len();
    let ropts = RunOptions::sampled(Sampling::Uniform(dt)).without_step_log();
    let lam = basis.eigenvalues();
    // packed layout [u.a, u.b, v.a, v.b, w.a, w.b, q]
    let shifted = |y: &[f64]| -> f64 {
        let (va, vb) = (&y[2 * n..3 * n], &y[3 * n..4 * n]);
        (0..n).map(|k| (lam[k] + shift) * va[k] * va[k] + vb[k] * vb[k]).sum()
    };
    let per: Result<Vec<(Vec<f64>, Vec<f64>, f64, f64)>, DynamicsError> = starts
        .par_iter()
        .map(|s0| {
            let i0 = s0.i_u(basis) + shift * s0.l2_sq();
            let mut prev = i0;
            let mut worst: f64 = 0.0;
            let run = integrate_decomposition_observed(s0, shift, horizon, config, basis, &ropts, &mut |_, y| {
                let cur = shifted(y);
                if i0 > 0.0 {
                    worst = worst.max((cur - prev) / i0);
                }
                prev = cur;
            })?;
            let defect = run.reconstruction_defect(basis);
            Ok((run.v.times.clone(), run.shifted_energy_v(basis), worst, defect))
        })
        .collect();
    let per = per?;
    let sup_initial = per.iter().map(|x| x.1[0]).fold(0.0, f64::max);
    let member_times = per
        .iter()
        .map(|(t, iv, _, _)| t.iter().zip(iv).find(|(_, x)| **x <= level * iv[0]).map(|(t, _)| *t))
        .collect();
    let uniform_time = per.first().and_then(|(times, _, _, _)| {
        (0..times.len())
            .find(|&k| per.iter().all(|(_, iv, _, _)| iv[k] <= level * sup_initial))
            .map(|k| times[k])
    });
    Ok(VDecayReport {
        horizon,
        level,
        sup_initial,
        uniform_time,
        member_times,
        max_step_increase: per.iter().map(|x| x.2).fold(0.0, f64::max),
        reconstruction: per.iter().map(|x| x.3).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub dt: f64,
    /// Hausdorff distance between the cloud and its image under `S(dt)`.
    pub hausdorff: f64,
    pub diameter: f64,
}

impl InvarianceReport {
    pub fn relative(&self) -> f64 {
        if self.diameter == 0.0 {
            0.0
        } else {
            self.hausdorff / self.diameter
        }
    }
}

/// Pushes every cloud point through `S(dt)` and compares the image with the cloud.
pub fn invariance_check(
    cloud: &PointCloud,
    dt: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
) -> Result<InvarianceReport, AttractorError> {
    let ropts = RunOptions::sampled(Sampling::Times(vec![dt])).without_step_log();
    let image: Result<Vec<Vec<f64>>, DynamicsError> = cloud
        .points
        .par_iter()
        .map(|s| Ok(integrate(s, dt, config, basis, &ropts)?.last().embed(basis)))
        .collect();
    let image = image?;
    let orig = cloud.embedded(basis);
    Ok(InvarianceReport {
        dt,
        hausdorff: hausdorff(&orig, &image),
        diameter: diameter(&orig),
    })
}

/// Smallest lag (as a multiple of the uniform spacing `dt`) at which the
/// sample autocorrelation of `values` drops below `threshold`.
pub fn decorrelation_stride(values: &[f64], dt: f64, threshold: f64) -> Option<f64> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if var == 0.0 {
        return Some(dt);
    }
    (1..n / 2)
        .find(|&lag| {
            let c: f64 = (0..n - lag)
                .map(|i| (values[i] - mean) * (values[i + lag] - mean))
                .sum();
            c / var < threshold
        })
        .map(|lag| lag as f64 * dt)
}
