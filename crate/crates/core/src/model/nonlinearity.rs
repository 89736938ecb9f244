//! The polynomial nonlinearity `f(s) = f1·s + c3·s³ + c5·s⁵` and its spectral
//! evaluation through the collocation grid.

use serde::{Deserialize, Serialize};

use super::basis::{GridWork, SpectralBasis};
use super::config::ProblemConfig;
use super::state::ModalState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub f1: f64,
    pub c3: f64,
    pub c5: f64,
}

impl Nonlinearity {
    pub fn from_config(config: &ProblemConfig) -> Self {
        Self {
            f1: config.f1,
            c3: config.c3,
            c5: config.c5,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.c3 == 0.0 && self.c5 == 0.0
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        let s2 = s * s;
        s * (self.f1 + s2 * (self.c3 + s2 * self.c5))
    }

    #[inline]
    pub fn fprime(&self, s: f64) -> f64 {
        let s2 = s * s;
        self.f1 + s2 * (3.0 * self.c3 + 5.0 * self.c5 * s2)
    }

    /// `F(s) = ∫₀ˢ f`.
    #[inline]
    pub fn antiderivative(&self, s: f64) -> f64 {
        let s2 = s * s;
        s2 * (0.5 * self.f1 + s2 * (0.25 * self.c3 + s2 * self.c5 / 6.0))
    }
}

/// Scratch space for evaluating nonlinear terms; owned by one integrator.
#[derive(Debug, Clone)]
pub struct FieldWork {
    grid: GridWork,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FieldWork {
    pub fn new(basis: &SpectralBasis) -> Self {
        Self {
            grid: basis.workspace(),
            u: vec![0.0; basis.grid_len()],
            v: vec![0.0; basis.grid_len()],
        }
    }
}

/// Evaluator bundling the basis, the nonlinearity and scratch buffers.
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'a> {
    basis: &'a SpectralBasis,
    nl: Nonlinearity,
    work: FieldWork,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(basis: &'a SpectralBasis, nl: Nonlinearity) -> Self {
        Self {
            basis,
            nl,
            work: FieldWork::new(basis),
        }
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nl
    }

    /// Writes the coefficients of `f(u)` into `out`.
    pub fn f_modal(&mut self, a: &[f64], out: &mut [f64]) {
        if self.nl.is_linear() {
            for (o, x) in out.iter_mut().zip(a) {
                *o = self.nl.f1 * x;
            }
            return;
        }
        let w = &mut self.work;
        self.basis.to_grid(a, &mut w.u, &mut w.grid);
        for g in w.u.iter_mut() {
            *g = self.nl.f(*g);
        }
        self.basis.project(&w.u, out, &mut w.grid);
    }

    /// Writes the coefficients of `f'(u)·U` into `out`.
    pub fn fprime_modal(&mut self, a: &[f64], da: &[f64], out: &mut [f64]) {
        if self.nl.is_linear() {
            for (o, x) in out.iter_mut().zip(da) {
                *o = self.nl.f1 * x;
            }
            return;
        }
        let w = &mut self.work;
        self.basis.to_grid(a, &mut w.u, &mut w.grid);
        self.basis.to_grid(da, &mut w.v, &mut w.grid);
        for (g, d) in w.u.iter_mut().zip(&w.v) {
            *g = self.nl.fprime(*g) * d;
        }
        self.basis.project(&w.u, out, &mut w.grid);
    }

    /// `∫_Ω F(u) dx`.
    pub fn potential(&mut self, a: &[f64]) -> f64 {
        if self.nl.is_linear() {
            return 0.5 * self.nl.f1 * a.iter().map(|x| x * x).sum::<f64>();
        }
        let w = &mut self.work;
        self.basis.to_grid(a, &mut w.u, &mut w.grid);
        let sum: f64 = w.u.iter().map(|&s| self.nl.antiderivative(s)).sum();
        sum * self.basis.weight()
    }

    /// Collocation-grid values of `u`; used by `L^q` proxies.
    pub fn grid_values(&mut self, a: &[f64]) -> &[f64] {
        let w = &mut self.work;
        self.basis.to_grid(a, &mut w.u, &mut w.grid);
        &w.u
    }
}

/// Coefficients of `f(u)` for the state's displacement.
pub fn eval_f_modal(state: &ModalState, config: &ProblemConfig, basis: &SpectralBasis) -> Vec<f64> {
    assert_eq!(state.len(), basis.len(), "state does not match basis");
    let mut out = vec![0.0; basis.len()];
    FieldEvaluator::new(basis, Nonlinearity::from_config(config)).f_modal(&state.a, &mut out);
    out
}

/// `∫_Ω F(u) dx` by collocation quadrature.
pub fn potential_integral(state: &ModalState, config: &ProblemConfig, basis: &SpectralBasis) -> f64 {
    assert_eq!(state.len(), basis.len(), "state does not match basis");
    FieldEvaluator::new(basis, Nonlinearity::from_config(config)).potential(&state.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::Dim;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn cfg(f1: f64, c3: f64, c5: f64, n: usize) -> ProblemConfig {
        ProblemConfig::builder(1.5).modes(n).poly(f1, c3, c5).build().unwrap()
    }

    /// Composite Simpson rule on `[0,1]` with `n` (even) panels.
    fn simpson(n: usize, g: impl Fn(f64) -> f64) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = g(0.0) + g(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn linear_f_is_identity_on_coefficients() {
        let c = cfg(1.0, 0.0, 0.0, 6);
        let b = SpectralBasis::new(&c);
        let s = ModalState::new(vec![0.3, -1.0, 2.0, 0.0, 0.1, 5.0], vec![0.0; 6]);
        assert_eq!(eval_f_modal(&s, &c, &b), s.a);
    }

    #[test]
    fn cubic_projection_matches_fine_quadrature() {
        let c = cfg(0.0, 1.0, 0.0, 8);
        let b = SpectralBasis::new(&c);
        let mut a = vec![0.0; 8];
        a[0] = 1.0;
        let got = eval_f_modal(&ModalState::new(a, vec![0.0; 8]), &c, &b);
        for k in 1..=8 {
            let e = |x: f64| SQRT_2 * (k as f64 * PI * x).sin();
            let want = simpson(10_000, |x| (SQRT_2 * (PI * x).sin()).powi(3) * e(x));
            assert!((got[k - 1] - want).abs() < 1e-12, "k={k}: {} vs {want}", got[k - 1]);
        }
        assert!((got[0] - 1.5).abs() < 1e-13);
    }

    #[test]
    fn zero_state_gives_zero() {
        let c = cfg(-2.0, -40.0, 10.0, 5);
        let b = SpectralBasis::new(&c);
        let z = ModalState::zeros(5);
        assert!(eval_f_modal(&z, &c, &b).iter().all(|&x| x == 0.0));
        assert_eq!(potential_integral(&z, &c, &b), 0.0);
    }

    #[test]
    fn potential_examples() {
        let mut a = vec![0.0; 4];
        a[0] = 1.0;
        let s = ModalState::new(a, vec![0.0; 4]);
        let c = cfg(1.0, 0.0, 0.0, 4);
        let b = SpectralBasis::new(&c);
        assert!((potential_integral(&s, &c, &b) - 0.5).abs() < 1e-14);
        let c = cfg(0.0, 4.0, 0.0, 4);
        let b = SpectralBasis::new(&c);
        // ∫ F = (4/4)∫ u⁴ = 4 ∫ sin⁴(πx) = 4 · 3/8.
        let analytic = 4.0 * 3.0 / 8.0;
        let quad = simpson(10_000, |x| (SQRT_2 * (PI * x).sin()).powi(4));
        assert!((analytic - quad).abs() < 1e-12);
        assert!((potential_integral(&s, &c, &b) - analytic).abs() < 1e-13);
    }

    #[test]
    fn quintic_2d_projection_matches_tensor_quadrature() {
        let c = ProblemConfig::builder(1.5)
            .dim(Dim::Two)
            .modes(3)
            .poly(0.5, -1.0, 2.0)
            .build()
            .unwrap();
        let b = SpectralBasis::new(&c);
        let a: Vec<f64> = (0..b.len()).map(|i| 0.4 / (1.0 + i as f64)).collect();
        let s = ModalState::new(a.clone(), vec![0.0; b.len()]);
        let got = eval_f_modal(&s, &c, &b);
        let nl = Nonlinearity::from_config(&c);
        let u = |x: f64, y: f64| -> f64 {
            b.wave_numbers()
                .iter()
                .zip(&a)
                .map(|(&(j, k), c)| c * 2.0 * (j as f64 * PI * x).sin() * (k as f64 * PI * y).sin())
                .sum()
        };
        let n = 400;
        for (pos, &(j, k)) in b.wave_numbers().iter().enumerate() {
            let want = simpson(n, |x| {
                simpson(n, |y| {
                    nl.f(u(x, y)) * 2.0 * (j as f64 * PI * x).sin() * (k as f64 * PI * y).sin()
                })
            });
            assert!((got[pos] - want).abs() < 1e-9, "({j},{k}): {} vs {want}", got[pos]);
        }
    }

    proptest! {
        #[test]
        fn parseval_consistency(a in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let c = cfg(0.0, 1.0, 0.0, 10);
            let b = SpectralBasis::new(&c);
            let mut ev = FieldEvaluator::new(&b, Nonlinearity::from_config(&c));
            let g = ev.grid_values(&a).to_vec();
            let quad = b.integrate(&g.iter().map(|x| x * x).collect::<Vec<_>>());
            let modal: f64 = a.iter().map(|x| x * x).sum();
            prop_assert!((quad - modal).abs() <= 1e-10 * modal.max(1e-300));
        }

        #[test]
        fn linear_in_coefficients(
            a in proptest::collection::vec(-1.0f64..1.0, 6),
            f1 in -1.0f64..1.0, c3 in 0.1f64..2.0, c5 in 0.1f64..2.0,
        ) {
            let b = SpectralBasis::new(&cfg(0.0, 1.0, 0.0, 6));
            let s = ModalState::new(a, vec![0.0; 6]);
            let mut parts = [[0.0; 6]; 3];
            for (i, nl) in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)].iter().enumerate() {
                let mut e = FieldEvaluator::new(&b, Nonlinearity { f1: nl.0, c3: nl.1, c5: nl.2 });
                e.f_modal(&s.a, &mut parts[i]);
            }
            let mut full = [0.0; 6];
            FieldEvaluator::new(&b, Nonlinearity { f1, c3, c5 }).f_modal(&s.a, &mut full);
            for k in 0..6 {
                let comb = f1 * parts[0][k] + c3 * parts[1][k] + c5 * parts[2][k];
                prop_assert!((full[k] - comb).abs() <= 1e-12 * (1.0 + comb.abs()));
            }
        }
    }
}
