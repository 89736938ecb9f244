//! Discrete check of the uniform Gronwall-type bound: if `F' + φF ≤ ψφ`,
//! the unit-window integrals of `φ` and `ψ` are at most `C₁`, and `φ` varies
//! by at most a factor `C₂` on unit windows, then
//! `F ≤ M = F(0) + C₁C₂² e^{2C₁}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GronwallError {
    #[error("need matching samples on a uniform grid with at least one unit window")]
    BadGrid,
    #[error("functions must be nonnegative and finite")]
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// `∫ψ + ∫φ` over `[t, t+1]` exceeds `C₁`.
    Integral { t: f64, value: f64 },
    /// `sup φ / inf φ` over `[t, t+1]` exceeds `C₂`.
    Oscillation { t: f64, value: f64 },
    /// Discrete form of `F' + φF ≤ ψφ` fails on `[t, t+dt]`.
    Differential { t: f64, excess: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub hypotheses_ok: bool,
    /// Implied ceiling `M`.
    pub bound: f64,
    pub sup_f: f64,
    pub bounded: bool,
    /// Largest unit-window `∫ψ + ∫φ`.
    pub max_integral: f64,
    /// Largest unit-window `sup φ / inf φ`.
    pub max_oscillation: f64,
    pub violations: Vec<Violation>,
}

/// `F(0) + C₁C₂² e^{2C₁}`.
pub fn implied_bound(f0: f64, c1: f64, c2: f64) -> f64 {
    f0 + c1 * c2 * c2 * (2.0 * c1).exp()
}

/// Checks the hypotheses on samples at uniform times `t` and returns the
/// implied bound. `rel_slack` absorbs discretization error in (iii).
pub fn gronwall_bound_check(
    t: &[f64],
    f: &[f64],
    phi: &[f64],
    psi: &[f64],
    c1: f64,
    c2: f64,
    rel_slack: f64,
) -> Result<GronwallReport, GronwallError> {
    let n = t.len();
    if n < 3 || f.len() != n || phi.len() != n || psi.len() != n {
        return Err(GronwallError::BadGrid);
    }
    let dt = t[1] - t[0];
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(GronwallError::BadGrid);
    }
    let per_unit = (1.0 / dt).round() as usize;
    if per_unit == 0 || per_unit >= n {
        return Err(GronwallError::BadGrid);
    }
    if [f, phi, psi]
        .iter()
        .any(|v| v.iter().any(|x| !(x.is_finite() && *x >= 0.0)))
    {
        return Err(GronwallError::Negative);
    }
    let mut violations = Vec::new();
    let mut max_integral: f64 = 0.0;
    let mut max_osc: f64 = 1.0;
    for start in 0..n - per_unit {
        let end = start + per_unit;
        let mut integral = 0.0;
        for i in start..end {
            integral += 0.5 * dt * (phi[i] + phi[i + 1] + psi[i] + psi[i + 1]);
        }
        max_integral = max_integral.max(integral);
        if integral > c1 {
            violations.push(Violation::Integral {
                t: t[start],
                value: integral,
            });
        }
        let w = &phi[start..=end];
        let hi = w.iter().copied().fold(0.0, f64::max);
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        let osc = if lo > 0.0 {
            hi / lo
        } else if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        max_osc = max_osc.max(osc);
        if osc > c2 {
            violations.push(Violation::Oscillation {
                t: t[start],
                value: osc,
            });
        }
    }
    for i in 0..n - 1 {
        let fm = 0.5 * (f[i] + f[i + 1]);
        let pm = 0.5 * (phi[i] + phi[i + 1]);
        let qm = 0.5 * (psi[i] + psi[i + 1]);
        let df = (f[i + 1] - f[i]) / dt;
        let lhs = df + pm * fm;
        let rhs = qm * pm;
        let scale = df.abs() + pm * fm + rhs;
        if lhs - rhs > rel_slack * scale {
            violations.push(Violation::Differential {
                t: t[i],
                excess: lhs - rhs,
            });
        }
    }
    let bound = implied_bound(f[0], c1, c2);
    let sup_f = f.iter().copied().fold(0.0, f64::max);
    Ok(GronwallReport {
        hypotheses_ok: violations.is_empty(),
        bound,
        sup_f,
        bounded: sup_f <= bound,
        max_integral,
        max_oscillation: max_osc,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_solution() {
        let t: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|t| 1.0 + (-t).exp()).collect();
        let one = vec![1.0; t.len()];
        let r = gronwall_bound_check(&t, &f, &one, &one, 2.0 + 1e-9, 1.0, 1e-4).unwrap();
        assert!(r.hypotheses_ok, "{:?}", r.violations);
        assert!((r.sup_f - 2.0).abs() < 1e-12);
        assert!(r.bounded && r.bound >= 2.0);
    }

    #[test]
    fn zero_function() {
        let t: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
        let z = vec![0.0; t.len()];
        let one = vec![1.0; t.len()];
        let r = gronwall_bound_check(&t, &z, &one, &z, 1.0 + 1e-9, 1.0, 0.0).unwrap();
        assert!(r.hypotheses_ok && r.bounded && r.sup_f == 0.0);
    }

    #[test]
    fn growth_is_reported() {
        let t: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|t| t.exp()).collect();
        let one = vec![1.0; t.len()];
        let r = gronwall_bound_check(&t, &f, &one, &one, 2.0, 1.0, 1e-4).unwrap();
        assert!(!r.hypotheses_ok);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Differential { .. })));
    }
}
