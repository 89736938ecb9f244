//! Fixed-step implicit midpoint rule for stiff high-mode runs.

use nalgebra::{DMatrix, DVector};

use super::{IntegrateError, StepReport, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointOptions {
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Relative perturbation for the finite-difference Jacobian.
    pub fd_eps: f64,
}

impl Default for MidpointOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-13,
            max_newton: 20,
            fd_eps: 1e-7,
        }
    }
}

/// Solves `z = y + (h/2) F(t + h/2, z)` by Newton's method and sets
/// `y ← 2z − y`. The Jacobian is rebuilt by finite differences every step.
#[derive(Debug, Clone)]
pub struct ImplicitMidpoint<F: VectorField> {
    field: F,
    opts: MidpointOptions,
    t: f64,
    y: Vec<f64>,
    f0: Vec<f64>,
    f1: Vec<f64>,
    zp: Vec<f64>,
}

impl<F: VectorField> ImplicitMidpoint<F> {
    pub fn new(field: F, t0: f64, y0: &[f64], opts: MidpointOptions) -> Self {
        let n = field.len();
        assert_eq!(y0.len(), n);
        Self {
            field,
            opts,
            t: t0,
            y: y0.to_vec(),
            f0: vec![0.0; n],
            f1: vec![0.0; n],
            zp: vec![0.0; n],
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn step(&mut self, h: f64) -> Result<StepReport, IntegrateError> {
        let n = self.y.len();
        let tm = self.t + 0.5 * h;
        let mut z = self.y.clone();
        let mut jac = DMatrix::<f64>::zeros(n, n);
        self.field.eval(tm, &z, &mut self.f0);
        for j in 0..n {
            let d = self.opts.fd_eps * (1.0 + z[j].abs());
            self.zp.copy_from_slice(&z);
            self.zp[j] += d;
            self.field.eval(tm, &self.zp, &mut self.f1);
            for i in 0..n {
                let df = (self.f1[i] - self.f0[i]) / d;
                jac[(i, j)] = if i == j { 1.0 } else { 0.0 } - 0.5 * h * df;
            }
        }
        let lu = jac.lu();
        let mut converged = false;
        for it in 0..self.opts.max_newton {
            if it > 0 {
                self.field.eval(tm, &z, &mut self.f0);
            }
            let g = DVector::from_iterator(n, (0..n).map(|i| z[i] - self.y[i] - 0.5 * h * self.f0[i]));
            let dz = lu.solve(&g).ok_or(IntegrateError::NewtonFailure { t: self.t })?;
            let mut size: f64 = 0.0;
            for i in 0..n {
                z[i] -= dz[i];
                size = size.max(dz[i].abs() / (1.0 + z[i].abs()));
            }
            if !size.is_finite() {
                return Err(IntegrateError::NonFinite { t: self.t });
            }
            if size <= self.opts.newton_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(IntegrateError::NewtonFailure { t: self.t });
        }
        for i in 0..n {
            self.y[i] = 2.0 * z[i] - self.y[i];
        }
        let t_old = self.t;
        self.t += h;
        Ok(StepReport {
            t_old,
            t_new: self.t,
            h,
            err: f64::NAN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Stiff;

    impl VectorField for Stiff {
        fn len(&self) -> usize {
            2
        }
        fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -1e6 * y[0] - y[1] - y[0] * y[0] * y[0];
        }
    }

    struct Osc;

    impl VectorField for Osc {
        fn len(&self) -> usize {
            2
        }
        fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn second_order_on_oscillator() {
        let run = |h: f64| {
            let mut s = ImplicitMidpoint::new(Osc, 0.0, &[1.0, 0.0], MidpointOptions::default());
            for _ in 0..(1.0 / h).round() as usize {
                s.step(h).unwrap();
            }
            (s.state()[0] - 1f64.cos()).abs()
        };
        let ratio = run(0.02) / run(0.01);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn stable_beyond_explicit_limit() {
        let mut s = ImplicitMidpoint::new(Stiff, 0.0, &[1e-3, 0.0], MidpointOptions::default());
        for _ in 0..200 {
            s.step(0.05).unwrap();
        }
        let y = s.state();
        let energy = 0.5 * (y[1] * y[1] + 1e6 * y[0] * y[0]);
        assert!(energy.is_finite() && energy <= 0.5 * 1e6 * 1e-6 * 1.0001);
    }
}
