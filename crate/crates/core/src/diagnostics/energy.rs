//! Energy functionals, the energy-equality audit and the trajectory CSV.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::model::{FieldEvaluator, ModalState, Nonlinearity, ProblemConfig, SpectralBasis};

/// `E = ½ I_u + ∫ F(u)`.
pub fn energy(state: &ModalState, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    let mut ev = FieldEvaluator::new(basis, Nonlinearity::from_config(config));
    0.5 * state.i_u(basis) + ev.potential(&state.a)
}

/// `E_ε = E + ε (u, u_t)`.
pub fn energy_eps(state: &ModalState, eps: f64, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    energy(state, config, basis) + eps * state.cross()
}

/// `Λ_U = ½(‖U_t‖² + ‖∇U‖² + f'(0)‖U‖²) + ε I_u^{p/2} (U_t, U)`.
pub fn lambda_u(u: &ModalState, tangent: &ModalState, eps: f64, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    assert!(eps >= 0.0, "ε must be nonnegative");
    let quad = 0.5 * (tangent.vel_sq() + tangent.grad_sq(basis) + config.fprime0() * tangent.l2_sq());
    let iu = u.i_u(basis);
    if iu == 0.0 {
        quad
    } else {
        quad + eps * iu.powf(0.5 * config.p) * tangent.cross()
    }
}

/// Default `ε` for `Λ_U`: the midpoint of the admissible range `(p/4, 1)`.
pub fn lambda_u_default_eps(p: f64) -> f64 {
    0.5 * (1.0 + 0.25 * p)
}

/// Per-output-time functionals of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_eps")]
    pub e_eps: f64,
    #[serde(rename = "I_u")]
    pub i_u: f64,
    #[serde(rename = "I_up")]
    pub i_up: f64,
    /// Signed defect `E(t) + ∫₀ᵗ I_{u,p}‖u_t‖² − E(0)`.
    pub residual: f64,
}

/// Functionals at every output time of a run produced by `integrate`.
pub fn energy_reports(traj: &Trajectory, eps: f64, config: &ProblemConfig, basis: &SpectralBasis) -> Vec<EnergyReport> {
    let mut ev = FieldEvaluator::new(basis, Nonlinearity::from_config(config));
    let mut out = Vec::with_capacity(traj.len());
    let mut e0 = 0.0;
    for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let e = 0.5 * s.i_u(basis) + ev.potential(&s.a);
        if i == 0 {
            e0 = e;
        }
        let q = traj.damping_integral.get(i).copied().unwrap_or(0.0);
        out.push(EnergyReport {
            t: *t,
            e,
            e_eps: e + eps * s.cross(),
            i_u: s.i_u(basis),
            i_up: s.damping_coefficient(config.p, basis),
            residual: e + q - e0,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max_t |E(t) + ∫₀ᵗ I_{u,p}‖u_t‖² − E(0)|`.
    pub max_abs: f64,
    pub t_worst: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
}

pub fn energy_equality_residual(traj: &Trajectory, config: &ProblemConfig, basis: &SpectralBasis) -> ResidualReport {
    let reports = energy_reports(traj, 0.0, config, basis);
    let mut worst = ResidualReport {
        max_abs: 0.0,
        t_worst: 0.0,
        e0: reports.first().map_or(0.0, |r| r.e),
    };
    for r in &reports {
        if r.residual.abs() > worst.max_abs {
            worst.max_abs = r.residual.abs();
            worst.t_worst = r.t;
        }
    }
    worst
}

/// Column header of the per-run CSV.
pub const CSV_HEADER: &str = "t,E,I_u,I_up,residual,phase_norm,sobolev_w";

/// Writes the per-run CSV with 17 significant digits. `sobolev_w` holds the
/// `H^{1+β}×H^β` norm of the smooth part when available and `NaN` otherwise.
pub fn write_energy_csv<W: Write>(out: &mut W, reports: &[EnergyReport], sobolev_w: Option<&[f64]>) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (i, r) in reports.iter().enumerate() {
        let sw = sobolev_w.and_then(|s| s.get(i)).copied().unwrap_or(f64::NAN);
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t,
            r.e,
            r.i_u,
            r.i_up,
            r.residual,
            r.i_u.sqrt(),
            sw
        )?;
    }
    Ok(())
}

/// Smallest `C` with `E_ε ≥ ¼(1 − μ₀/λ₁) I_u − C` on the given states.
pub fn e_eps_lower_constant(
    states: &[ModalState],
    eps: f64,
    mu0: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
) -> f64 {
    let coef = 0.25 * (1.0 - mu0 / basis.lambda1());
    states
        .iter()
        .map(|s| coef * s.i_u(basis) - energy_eps(s, eps, config, basis))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn energy_examples() {
        let c = ProblemConfig::builder(1.5)
            .modes(2)
            .poly(0.0, 0.0, 0.0)
            .build()
            .unwrap();
        let b = SpectralBasis::new(&c);
        assert_eq!(energy(&ModalState::zeros(2), &c, &b), 0.0);
        let s = ModalState::new(vec![1.0, 0.0], vec![0.0, 0.0]);
        assert!((energy(&s, &c, &b) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn lambda_u_examples() {
        let c = ProblemConfig::builder(1.5)
            .modes(3)
            .poly(0.5, 1.0, 0.0)
            .build()
            .unwrap();
        let b = SpectralBasis::new(&c);
        let z = ModalState::zeros(3);
        let u = ModalState::new(vec![0.1, 0.2, 0.0], vec![0.3, 0.0, 0.1]);
        assert_eq!(lambda_u(&u, &z, 0.7, &c, &b), 0.0);
        let tan = ModalState::new(vec![1.0, -1.0, 0.5], vec![0.2, 0.3, -0.4]);
        let want = 0.5 * (tan.vel_sq() + tan.grad_sq(&b) + 0.5 * tan.l2_sq());
        assert!((lambda_u(&z, &tan, 123.0, &c, &b) - want).abs() < 1e-13);
    }

    #[test]
    fn csv_has_fixed_header_and_precision() {
        let r = EnergyReport {
            t: 0.5,
            e: 1.0 / 3.0,
            e_eps: 0.0,
            i_u: 4.0,
            i_up: 0.0,
            residual: -1e-12,
        };
        let mut buf = Vec::new();
        write_energy_csv(&mut buf, &[r], None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[1], "3.3333333333333331e-1");
        assert_eq!(row[5], "2.0000000000000000e0");
        assert_eq!(row[6], "NaN");
    }
}
