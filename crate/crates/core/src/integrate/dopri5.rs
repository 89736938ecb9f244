//! Dormand–Prince 5(4) with FSAL, PI step-size control and quartic dense output.

use super::{IntegrateError, StepReport, VectorField};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order-minus-fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// How the local error estimate is measured against the tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// `‖e‖₂ / (atol + rtol·max(‖y‖₂, ‖y_new‖₂))`.
    Euclidean,
    /// RMS of `e_i / (atol + rtol·max(|y_i|, |y_new,i|))`.
    ComponentRms,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub norm: ErrorNorm,
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps below this size abort with [`IntegrateError::StepUnderflow`].
    pub h_min: f64,
    pub max_steps: u64,
    pub safety: f64,
    /// PI stabilization exponent.
    pub beta: f64,
    pub fac_min: f64,
    pub fac_max: f64,
}

impl Dopri5Options {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self {
            atol,
            rtol,
            ..Self::default()
        }
    }
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            norm: ErrorNorm::Euclidean,
            atol: 1e-10,
            rtol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 200_000_000,
            safety: 0.8,
            beta: 0.04,
            fac_min: 0.2,
            fac_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Adaptive solver owning its vector field, state and stage buffers.
#[derive(Debug, Clone)]
pub struct Dopri5<F: VectorField> {
    field: F,
    opts: Dopri5Options,
    t: f64,
    y: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    cont: [Vec<f64>; 5],
    t_old: f64,
    h_last: f64,
    err_old: f64,
    /// `k[0]` holds `f(t, y)` for the current state.
    fsal: bool,
    stats: SolverStats,
}

impl<F: VectorField> Dopri5<F> {
    pub fn new(field: F, t0: f64, y0: &[f64], opts: Dopri5Options) -> Self {
        let n = field.len();
        assert_eq!(y0.len(), n, "initial state length does not match the vector field");
        let z = || vec![0.0; n];
        Self {
            field,
            opts,
            t: t0,
            y: y0.to_vec(),
            h: opts.h_init.unwrap_or(0.0),
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            cont: [y0.to_vec(), z(), z(), z(), z()],
            t_old: t0,
            h_last: 0.0,
            err_old: 1e-4,
            fsal: false,
            stats: SolverStats::default(),
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

    pub fn field_mut(&mut self) -> &mut F {
        &mut self.field
    }

    pub fn into_field(self) -> F {
        self.field
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn options(&self) -> &Dopri5Options {
        &self.opts
    }

    /// Proposed size of the next step.
    pub fn next_step_size(&self) -> f64 {
        self.h
    }

    fn eval(&mut self, stage: usize, t: f64, from_tmp: bool) {
        self.stats.evaluations += 1;
        let y = if from_tmp { &self.ytmp } else { &self.y };
        self.field.eval(t, y, &mut self.k[stage]);
    }

    fn ensure_fsal(&mut self) {
        if !self.fsal {
            self.eval(0, self.t, false);
            self.fsal = true;
        }
    }

    fn scale(&self, y0: f64, y1: f64) -> f64 {
        self.opts.atol + self.opts.rtol * y0.abs().max(y1.abs())
    }

    /// Starting step from the local derivative scales.
    fn initial_step(&mut self) -> f64 {
        self.ensure_fsal();
        let n = self.y.len() as f64;
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..self.y.len() {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.k[0][i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        dnf /= n;
        dny /= n;
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.opts.h_max);
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + h * self.k[0][i];
        }
        self.eval(1, self.t + h, true);
        let mut der2 = 0.0;
        for i in 0..self.y.len() {
            let sk = self.scale(self.y[i], self.y[i]);
            der2 += ((self.k[1][i] - self.k[0][i]) / sk).powi(2);
        }
        let der2 = (der2 / n).sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.opts.h_max)
    }

    /// Computes the stages for step `h` into `ynew` and returns the scaled
    /// error norm. Leaves `k[6] = f(t+h, ynew)`.
    fn attempt(&mut self, h: f64) -> f64 {
        self.ensure_fsal();
        let n = self.y.len();
        for s in 1..7 {
            let row = &A[s];
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate().take(s) {
                    acc += a * self.k[j][i];
                }
                self.ytmp[i] = self.y[i] + h * acc;
            }
            if s == 6 {
                self.ynew.copy_from_slice(&self.ytmp);
            }
            self.eval(s, self.t + C[s] * h, true);
        }
        let mut err = 0.0;
        let mut ny0 = 0.0;
        let mut ny1 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (s, w) in E.iter().enumerate() {
                e += w * self.k[s][i];
            }
            match self.opts.norm {
                ErrorNorm::Euclidean => {
                    err += (h * e).powi(2);
                    ny0 += self.y[i] * self.y[i];
                    ny1 += self.ynew[i] * self.ynew[i];
                }
                ErrorNorm::ComponentRms => {
                    let sk = self.scale(self.y[i], self.ynew[i]);
                    err += (h * e / sk).powi(2);
                }
            }
        }
        match self.opts.norm {
            ErrorNorm::Euclidean => err.sqrt() / (self.opts.atol + self.opts.rtol * ny0.max(ny1).sqrt()),
            ErrorNorm::ComponentRms => (err / n as f64).sqrt(),
        }
    }

    fn accept(&mut self, h: f64, t_new: f64) {
        let n = self.y.len();
        for i in 0..n {
            let ydiff = self.ynew[i] - self.y[i];
            let bspl = h * self.k[0][i] - ydiff;
            let mut dk = 0.0;
            for (s, d) in D.iter().enumerate() {
                dk += d * self.k[s][i];
            }
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * self.k[6][i] - bspl;
            self.cont[4][i] = h * dk;
        }
        self.t_old = self.t;
        self.h_last = h;
        self.t = t_new;
        std::mem::swap(&mut self.y, &mut self.ynew);
        self.k.swap(0, 6);
        self.fsal = true;
        self.stats.accepted += 1;
    }

    /// One fixed step of size `h`, accepted unconditionally. Returns the local
    /// error estimate (scaled as configured by [`ErrorNorm`]).
    pub fn fixed_step(&mut self, h: f64) -> Result<f64, IntegrateError> {
        let err = self.attempt(h);
        if !self.ynew.iter().all(|v| v.is_finite()) {
            return Err(IntegrateError::NonFinite { t: self.t });
        }
        self.accept(h, self.t + h);
        Ok(err)
    }

    /// Takes one accepted adaptive step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<StepReport, IntegrateError> {
        if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
            return Err(IntegrateError::MaxSteps {
                t: self.t,
                steps: self.opts.max_steps,
            });
        }
        if self.h <= 0.0 {
            self.h = self.initial_step();
        }
        let expo1 = 0.2 - self.opts.beta * 0.75;
        let facc1 = 1.0 / self.opts.fac_min;
        let facc2 = 1.0 / self.opts.fac_max;
        let mut rejected_here = false;
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.opts.h_max);
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h < self.opts.h_min && !clipped {
                return Err(IntegrateError::StepUnderflow { t: self.t, h });
            }
            let err = self.attempt(h);
            if !err.is_finite() {
                self.stats.rejected += 1;
                rejected_here = true;
                self.h = h * self.opts.fac_min;
                if self.h < self.opts.h_min {
                    return Err(IntegrateError::NonFinite { t: self.t });
                }
                continue;
            }
            let fac11 = err.powf(expo1);
            if err <= 1.0 {
                let mut fac = fac11 / self.err_old.powf(self.opts.beta);
                fac = (fac / self.opts.safety).min(facc1).max(facc2);
                let mut hnew = h / fac;
                if rejected_here {
                    hnew = hnew.min(h);
                }
                self.err_old = err.max(1e-4);
                self.accept(h, if clipped { t_limit } else { self.t + h });
                if !clipped || hnew < self.h {
                    self.h = hnew;
                }
                return Ok(StepReport {
                    t_old: self.t_old,
                    t_new: self.t,
                    h,
                    err,
                });
            }
            self.stats.rejected += 1;
            rejected_here = true;
            self.h = h / facc1.min(fac11 / self.opts.safety);
        }
    }

    /// Dense output at `t` inside the last accepted step.
    pub fn dense_into(&self, t: f64, out: &mut [f64]) {
        let theta = if self.h_last > 0.0 {
            (t - self.t_old) / self.h_last
        } else {
            0.0
        };
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            let c = |j: usize| self.cont[j][i];
            *o = c(0) + theta * (c(1) + theta1 * (c(2) + theta * (c(3) + theta1 * c(4))));
        }
    }

    /// Start and end of the last accepted step.
    pub fn last_step(&self) -> (f64, f64) {
        (self.t_old, self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        omega: f64,
    }

    impl VectorField for Oscillator {
        fn len(&self) -> usize {
            2
        }
        fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -self.omega * self.omega * y[0];
        }
    }

    struct Decay;

    impl VectorField for Decay {
        fn len(&self) -> usize {
            1
        }
        fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -y[0];
        }
    }

    #[test]
    fn adaptive_oscillator_tracks_closed_form() {
        let w = std::f64::consts::PI;
        let mut s = Dopri5::new(
            Oscillator { omega: w },
            0.0,
            &[1.0, 0.0],
            Dopri5Options::new(1e-13, 1e-13),
        );
        while s.time() < 10.0 {
            s.step(10.0).unwrap();
        }
        assert_eq!(s.time(), 10.0);
        let y = s.state();
        assert!((y[0] - (w * 10.0).cos()).abs() < 1e-10);
        assert!((y[1] + w * (w * 10.0).sin()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_is_fourth_order_accurate() {
        let mut s = Dopri5::new(Decay, 0.0, &[1.0], Dopri5Options::new(1e-12, 1e-12));
        let mut out = [0.0];
        let mut worst: f64 = 0.0;
        while s.time() < 3.0 {
            s.step(3.0).unwrap();
            let (a, b) = s.last_step();
            for j in 1..5 {
                let t = a + (b - a) * j as f64 / 5.0;
                s.dense_into(t, &mut out);
                worst = worst.max((out[0] - (-t).exp()).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn fixed_step_order_five() {
        let run = |h: f64| {
            let mut s = Dopri5::new(Decay, 0.0, &[1.0], Dopri5Options::default());
            let n = (1.0 / h).round() as usize;
            for _ in 0..n {
                s.fixed_step(h).unwrap();
            }
            (s.state()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 25.0, "{ratio}");
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut s = Dopri5::new(Oscillator { omega: 2.0 }, 0.0, &[0.0, 0.0], Dopri5Options::default());
        let r = s.step(1.0).unwrap();
        assert_eq!(r.err, 0.0);
        assert_eq!(s.state(), &[0.0, 0.0]);
    }

    #[test]
    fn nan_field_is_reported() {
        struct Bad;
        impl VectorField for Bad {
            fn len(&self) -> usize {
                1
            }
            fn eval(&mut self, _t: f64, _y: &[f64], dy: &mut [f64]) {
                dy[0] = f64::NAN;
            }
        }
        let mut s = Dopri5::new(Bad, 0.0, &[1.0], Dopri5Options::default());
        assert!(matches!(s.step(1.0), Err(IntegrateError::NonFinite { .. })));
    }
}
