//! Empirical temporal Hölder exponent of a trajectory in the phase norm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::model::initial::member_rng;
use crate::model::SpectralBasis;
use crate::stats::{linear_fit, quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderOptions {
    pub n_pairs: usize,
    /// Pairs with `|t₁ − t₂|` outside `[dt_min, dt_max]` are not drawn.
    pub dt_min: f64,
    pub dt_max: f64,
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            n_pairs: 2000,
            dt_min: 0.0,
            dt_max: f64::INFINITY,
            n_boot: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// `None` when the trajectory is an equilibrium.
    pub slope: Option<f64>,
    /// `ln L` in `‖Δ‖ ≈ L |Δt|^θ`.
    pub intercept: Option<f64>,
    /// 95% bootstrap interval of the slope.
    pub ci: Option<[f64; 2]>,
    pub degenerate: bool,
    pub n_pairs: usize,
    /// Decades spanned by the used `|t₁ − t₂|`.
    pub decades: f64,
}

impl HolderFit {
    /// Multiplicative constant `L`.
    pub fn constant(&self) -> Option<f64> {
        self.intercept.map(f64::exp)
    }
}

/// Regresses `ln‖x(t₁) − x(t₂)‖` on `ln|t₁ − t₂|` over random sample pairs.
pub fn holder_time_exponent(traj: &Trajectory, basis: &SpectralBasis, opts: &HolderOptions) -> HolderFit {
    let n = traj.len();
    let scale = traj.states.iter().map(|s| s.phase_norm(basis)).fold(0.0, f64::max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    if n >= 2 {
        let mut rng = member_rng(opts.seed, 0x401d);
        let mut tries = 0;
        while xs.len() < opts.n_pairs && tries < 20 * opts.n_pairs {
            tries += 1;
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            let dt = (traj.times[i] - traj.times[j]).abs();
            if i == j || dt < opts.dt_min || dt > opts.dt_max || dt == 0.0 {
                continue;
            }
            let d = traj.states[i].phase_distance(&traj.states[j], basis);
            if d > 1e-14 * scale.max(f64::MIN_POSITIVE) {
                xs.push(dt.ln());
                ys.push(d.ln());
            }
        }
    }
    if xs.len() < 3 {
        return HolderFit {
            slope: None,
            intercept: None,
            ci: None,
            degenerate: true,
            n_pairs: xs.len(),
            decades: 0.0,
        };
    }
    let fit = linear_fit(&xs, &ys);
    let mut rng = member_rng(opts.seed, 0xb007);
    let mut boots = Vec::with_capacity(opts.n_boot);
    let (mut bx, mut by) = (vec![0.0; xs.len()], vec![0.0; xs.len()]);
    for _ in 0..opts.n_boot {
        for k in 0..xs.len() {
            let i = rng.random_range(0..xs.len());
            bx[k] = xs[i];
            by[k] = ys[i];
        }
        let s = linear_fit(&bx, &by).slope;
        if s.is_finite() {
            boots.push(s);
        }
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    HolderFit {
        slope: Some(fit.slope),
        intercept: Some(fit.intercept),
        ci: (!boots.is_empty()).then(|| [quantile(&boots, 0.025), quantile(&boots, 0.975)]),
        degenerate: false,
        n_pairs: xs.len(),
        decades: (hi - lo) / std::f64::consts::LN_10,
    }
}
