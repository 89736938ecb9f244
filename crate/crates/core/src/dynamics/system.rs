//! Galerkin vector fields of the full problem and its coupled companions.
//!
//! Every system is packed as consecutive `[a | b]` blocks of length `2n`
//! followed by one scalar `q`, the running dissipation integral
//! `∫₀ᵗ I_{u,p} ‖u_t‖²`, so that it is integrated with the same stages as the
//! state.

use serde::{Deserialize, Serialize};

use crate::integrate::VectorField;
use crate::model::state::{dot, grad_dot, grad_sq, sq};
use crate::model::{FieldEvaluator, Nonlinearity, ProblemConfig, SpectralBasis};

/// Which coupled system is being advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `[u]`.
    Full,
    /// `[u, v, w]` with a shift `λ`.
    Decomposition,
    /// `[u, U]`.
    Linearized,
    /// `[u, V, W]`.
    VW,
    /// `[u, U, ũ]`: a base run, its linearization and a perturbed run.
    FrechetProbe,
}

impl SystemKind {
    pub fn blocks(self) -> usize {
        match self {
            SystemKind::Full => 1,
            SystemKind::Linearized => 2,
            SystemKind::Decomposition | SystemKind::VW | SystemKind::FrechetProbe => 3,
        }
    }
}

/// Packed length of a system over a basis of size `n`.
pub fn packed_len(kind: SystemKind, n: usize) -> usize {
    2 * n * kind.blocks() + 1
}

#[derive(Debug, Clone)]
pub struct GalerkinSystem<'a> {
    kind: SystemKind,
    basis: &'a SpectralBasis,
    ev: FieldEvaluator<'a>,
    p: f64,
    /// 1 with damping, 0 in the damping-free test mode.
    damp: f64,
    shift: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    sum: Vec<f64>,
}

/// Scalars of the nonlocal damping at one state.
#[derive(Debug, Clone, Copy)]
struct Damping {
    grad_sq: f64,
    vel_sq: f64,
    grad_p: f64,
    vel_p: f64,
}

impl Damping {
    fn new(a: &[f64], b: &[f64], ev: &[f64], p: f64, damp: f64) -> Self {
        let g = grad_sq(a, ev);
        let v = sq(b);
        Self {
            grad_sq: g,
            vel_sq: v,
            grad_p: damp * g.powf(0.5 * p),
            vel_p: damp * v.powf(0.5 * p),
        }
    }

    fn total(&self) -> f64 {
        self.grad_p + self.vel_p
    }

    /// `p[‖∇u‖^{p−2}(∇u,∇U) + ‖u_t‖^{p−2}(u_t,U_t)]`, each term 0 where its norm is 0.
    fn derivative(&self, p: f64, gd: f64, vd: f64) -> f64 {
        let mut s = 0.0;
        if self.grad_sq > 0.0 {
            s += self.grad_p / self.grad_sq * gd;
        }
        if self.vel_sq > 0.0 {
            s += self.vel_p / self.vel_sq * vd;
        }
        p * s
    }
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(kind: SystemKind, config: &ProblemConfig, basis: &'a SpectralBasis) -> Self {
        let n = basis.len();
        Self {
            kind,
            basis,
            ev: FieldEvaluator::new(basis, Nonlinearity::from_config(config)),
            p: config.p,
            damp: if config.damping_off { 0.0 } else { 1.0 },
            shift: 0.0,
            f: vec![0.0; n],
            g: vec![0.0; n],
            sum: vec![0.0; n],
        }
    }

    /// Sets the shift `λ` of the v/w decomposition.
    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    fn full_block(&mut self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) -> Damping {
        let ev = self.basis.eigenvalues();
        let d = Damping::new(a, b, ev, self.p, self.damp);
        let dt = d.total();
        self.ev.f_modal(a, &mut self.f);
        for k in 0..a.len() {
            da[k] = b[k];
            db[k] = -ev[k] * a[k] - dt * b[k] - self.f[k];
        }
        d
    }
}

fn split(y: &[f64], n: usize, block: usize) -> (&[f64], &[f64]) {
    let o = 2 * n * block;
    (&y[o..o + n], &y[o + n..o + 2 * n])
}

fn split_mut(y: &mut [f64], n: usize, block: usize) -> (&mut [f64], &mut [f64]) {
    let o = 2 * n * block;
    let (a, b) = y[o..o + 2 * n].split_at_mut(n);
    (a, b)
}

impl VectorField for GalerkinSystem<'_> {
    fn len(&self) -> usize {
        packed_len(self.kind, self.basis.len())
    }

    fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.basis.len();
        let last = dy.len() - 1;
        let (au, bu) = split(y, n, 0);
        let du = {
            let (da, db) = split_mut(dy, n, 0);
            self.full_block(au, bu, da, db)
        };
        dy[last] = du.total() * du.vel_sq;
        let ev = self.basis.eigenvalues();
        match self.kind {
            SystemKind::Full => {}
            SystemKind::Decomposition => {
                let (av, bv) = split(y, n, 1);
                let (aw, bw) = split(y, n, 2);
                let wvel_p = self.damp * sq(bw).powf(0.5 * self.p);
                let s = self.shift;
                let cv = du.grad_p + 0.5 * du.vel_p;
                {
                    let (da, db) = split_mut(dy, n, 1);
                    for k in 0..n {
                        da[k] = bv[k];
                        db[k] = -ev[k] * av[k] - s * av[k] - 0.5 * du.vel_p * bu[k] + 0.5 * wvel_p * bw[k] - cv * bv[k];
                    }
                }
                let cw = 0.5 * wvel_p + cv;
                let (da, db) = split_mut(dy, n, 2);
                for k in 0..n {
                    da[k] = bw[k];
                    db[k] = -ev[k] * aw[k] - cw * bw[k] - self.f[k] + s * au[k] - s * aw[k];
                }
            }
            SystemKind::Linearized => {
                let (ua, ub) = split(y, n, 1);
                self.ev.fprime_modal(au, ua, &mut self.g);
                let c = du.derivative(self.p, grad_dot(au, ua, ev), dot(bu, ub));
                let dt = du.total();
                let (da, db) = split_mut(dy, n, 1);
                for k in 0..n {
                    da[k] = ub[k];
                    db[k] = -ev[k] * ua[k] - dt * ub[k] - self.g[k] - c * bu[k];
                }
            }
            SystemKind::VW => {
                let (va, vb) = split(y, n, 1);
                let (wa, wb) = split(y, n, 2);
                let dt = du.total();
                {
                    let (da, db) = split_mut(dy, n, 1);
                    for k in 0..n {
                        da[k] = vb[k];
                        db[k] = -ev[k] * va[k] - dt * vb[k];
                    }
                }
                let mut sb = std::mem::take(&mut self.sum);
                let mut gd = 0.0;
                let mut vd = 0.0;
                for k in 0..n {
                    sb[k] = va[k] + wa[k];
                    gd += ev[k] * au[k] * sb[k];
                    vd += bu[k] * (vb[k] + wb[k]);
                }
                self.ev.fprime_modal(au, &sb, &mut self.g);
                self.sum = sb;
                let c = du.derivative(self.p, gd, vd);
                let (da, db) = split_mut(dy, n, 2);
                for k in 0..n {
                    da[k] = wb[k];
                    db[k] = -ev[k] * wa[k] - dt * wb[k] - self.g[k] - c * bu[k];
                }
            }
            SystemKind::FrechetProbe => {
                let (ua, ub) = split(y, n, 1);
                self.ev.fprime_modal(au, ua, &mut self.g);
                let c = du.derivative(self.p, grad_dot(au, ua, ev), dot(bu, ub));
                let dt = du.total();
                {
                    let (da, db) = split_mut(dy, n, 1);
                    for k in 0..n {
                        da[k] = ub[k];
                        db[k] = -ev[k] * ua[k] - dt * ub[k] - self.g[k] - c * bu[k];
                    }
                }
                let (pa, pb) = split(y, n, 2);
                let (da, db) = split_mut(dy, n, 2);
                self.full_block(pa, pb, da, db);
            }
        }
    }
}
