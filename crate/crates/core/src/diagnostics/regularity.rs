//! Regularity proxies for the smooth part of the decomposition.

use serde::{Deserialize, Serialize};

use super::gronwall::{gronwall_bound_check, GronwallError, GronwallReport};
use crate::dynamics::DecompositionRun;
use crate::model::{norm_hs, FieldEvaluator, ModalState, Nonlinearity, ProblemConfig, SpectralBasis};

/// Regularity index of the smooth part.
pub const BETA: f64 = 2.0 / 7.0;

/// `‖w‖²_{H^{1+β}} + ‖w_t‖²_{H^β}` in modal form.
pub fn smooth_norm_sq(s: &ModalState, beta: f64, basis: &SpectralBasis) -> f64 {
    norm_hs(&s.a, 1.0 + beta, basis).powi(2) + norm_hs(&s.b, beta, basis).powi(2)
}

/// Collocation proxy of `‖u‖_{L^q}`.
pub fn lq_norm(a: &[f64], q: f64, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    let mut ev = FieldEvaluator::new(basis, Nonlinearity::from_config(config));
    let g = ev.grid_values(a);
    (basis.weight() * g.iter().map(|x| x.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEnergyCheck {
    pub eps: f64,
    /// Fitted constant in `F' + φF ≤ C I_u^{p/2}(1 + ‖u‖²_{L¹⁴})`.
    pub c: f64,
    pub report: GronwallReport,
}

/// Applies the Gronwall checker to the weighted energy of `w̃ = A^{β/2}w`,
/// `F = ½(‖w̃_t‖² + ‖∇w̃‖² + λ‖w̃‖²) + ε I_u^{p/2}(w̃_t, w̃)`, with
/// `φ = (2ε/3) I_u^{p/2}` and `ψ = (3C/2ε)(1 + ‖u‖²_{L¹⁴})`. The constant `C`
/// is fitted from the run (with a 50% margin). Requires uniform sampling.
pub fn w_weighted_energy_check(
    run: &DecompositionRun,
    eps: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
) -> Result<WeightedEnergyCheck, GronwallError> {
    let ev = basis.eigenvalues();
    let lam = run.shift;
    let p = config.p;
    let n = run.u.len();
    let mut f = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    let mut l14 = Vec::with_capacity(n);
    for (u, w) in run.u.states.iter().zip(&run.w.states) {
        let mut ta = 0.0;
        let mut tb = 0.0;
        let mut tl = 0.0;
        let mut cross = 0.0;
        for k in 0..basis.len() {
            let s = ev[k].powf(BETA);
            ta += ev[k] * s * w.a[k] * w.a[k];
            tb += s * w.b[k] * w.b[k];
            tl += s * w.a[k] * w.a[k];
            cross += s * w.a[k] * w.b[k];
        }
        let iup = u.i_u(basis).powf(0.5 * p);
        f.push(0.5 * (tb + ta + lam * tl) + eps * iup * cross);
        weight.push(iup);
        l14.push(lq_norm(&u.a, 14.0, config, basis));
    }
    let t = &run.u.times;
    let phi: Vec<f64> = weight.iter().map(|w| 2.0 * eps / 3.0 * w).collect();
    let mut c: f64 = 0.0;
    for i in 0..n.saturating_sub(1) {
        let dt = t[i + 1] - t[i];
        let df = (f[i + 1] - f[i]) / dt;
        let fm = 0.5 * (f[i] + f[i + 1]);
        let pm = 0.5 * (phi[i] + phi[i + 1]);
        let wm = 0.5 * (weight[i] * (1.0 + l14[i] * l14[i]) + weight[i + 1] * (1.0 + l14[i + 1] * l14[i + 1]));
        if wm > 0.0 {
            c = c.max((df + pm * fm) / wm);
        }
    }
    let c = 1.5 * c.max(1e-12);
    let psi: Vec<f64> = l14.iter().map(|l| 1.5 * c / eps * (1.0 + l * l)).collect();
    let f_clamped: Vec<f64> = f.iter().map(|x| x.max(0.0)).collect();
    let first = gronwall_bound_check(t, &f_clamped, &phi, &psi, f64::INFINITY, f64::INFINITY, 0.0)?;
    let c1 = first.max_integral * (1.0 + 1e-9);
    let c2 = first.max_oscillation * (1.0 + 1e-9);
    let report = gronwall_bound_check(t, &f_clamped, &phi, &psi, c1, c2, 1e-6)?;
    Ok(WeightedEnergyCheck { eps, c, report })
}
