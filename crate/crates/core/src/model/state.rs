//! Modal coordinates of `(u, u_t)` and the norms/functionals built from them.

use serde::{Deserialize, Serialize};

use super::basis::SpectralBasis;

/// Coefficients of `u` (`a`) and `u_t` (`b`) in the orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
        }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len(), "u and u_t coefficient lengths differ");
        Self { a, b }
    }

    /// Reads a state from a packed `[a, b]` slice.
    pub fn from_packed(y: &[f64]) -> Self {
        let n = y.len() / 2;
        Self {
            a: y[..n].to_vec(),
            b: y[n..2 * n].to_vec(),
        }
    }

    pub fn pack_into(&self, out: &mut [f64]) {
        let n = self.len();
        out[..n].copy_from_slice(&self.a);
        out[n..2 * n].copy_from_slice(&self.b);
    }

    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.len());
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&x| x == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a.iter().map(|x| s * x).collect(),
            b: self.b.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x - y).collect(),
        }
    }

    /// `‖u‖²`.
    pub fn l2_sq(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum()
    }

    /// `‖∇u‖² = Σ λ_k a_k²`.
    pub fn grad_sq(&self, basis: &SpectralBasis) -> f64 {
        grad_sq(&self.a, basis.eigenvalues())
    }

    /// `‖u_t‖²`.
    pub fn vel_sq(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum()
    }

    /// `I_u = ‖∇u‖² + ‖u_t‖²`.
    pub fn i_u(&self, basis: &SpectralBasis) -> f64 {
        self.grad_sq(basis) + self.vel_sq()
    }

    /// `‖(u, u_t)‖` in `H¹₀ × L²`.
    pub fn phase_norm(&self, basis: &SpectralBasis) -> f64 {
        self.i_u(basis).sqrt()
    }

    /// `(Σ λ_k^s a_k²)^{1/2}`; `s = 0` is `‖u‖`, `s = 1` is `‖∇u‖`.
    pub fn norm_hs(&self, s: f64, basis: &SpectralBasis) -> f64 {
        norm_hs(&self.a, s, basis)
    }

    /// `‖∇u‖^p + ‖u_t‖^p`.
    pub fn damping_coefficient(&self, p: f64, basis: &SpectralBasis) -> f64 {
        damping_coefficient(self.grad_sq(basis), self.vel_sq(), p)
    }

    /// `(u, u_t)`.
    pub fn cross(&self) -> f64 {
        self.a.iter().zip(&self.b).map(|(x, y)| x * y).sum()
    }

    /// Coordinates `(√λ_k a_k, b_k)` in which the Euclidean metric is the
    /// `H¹₀ × L²` phase metric.
    pub fn embed(&self, basis: &SpectralBasis) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .a
            .iter()
            .zip(basis.eigenvalues())
            .map(|(a, l)| a * l.sqrt())
            .collect();
        v.extend_from_slice(&self.b);
        v
    }

    /// Inverse of [`embed`](Self::embed).
    pub fn from_embedded(x: &[f64], basis: &SpectralBasis) -> Self {
        let n = basis.len();
        Self {
            a: x[..n]
                .iter()
                .zip(basis.eigenvalues())
                .map(|(v, l)| v / l.sqrt())
                .collect(),
            b: x[n..2 * n].to_vec(),
        }
    }

    /// `H¹₀ × L²` distance.
    pub fn phase_distance(&self, other: &Self, basis: &SpectralBasis) -> f64 {
        let ev = basis.eigenvalues();
        let mut acc = 0.0;
        for k in 0..self.len() {
            let da = self.a[k] - other.a[k];
            let db = self.b[k] - other.b[k];
            acc += ev[k] * da * da + db * db;
        }
        acc.sqrt()
    }
}

pub(crate) fn grad_sq(a: &[f64], ev: &[f64]) -> f64 {
    a.iter().zip(ev).map(|(x, l)| l * x * x).sum()
}

pub(crate) fn sq(b: &[f64]) -> f64 {
    b.iter().map(|x| x * x).sum()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn grad_dot(x: &[f64], y: &[f64], ev: &[f64]) -> f64 {
    x.iter().zip(y).zip(ev).map(|((a, b), l)| l * a * b).sum()
}

/// Modal Sobolev norm of a coefficient sequence.
pub fn norm_hs(a: &[f64], s: f64, basis: &SpectralBasis) -> f64 {
    assert!(s >= -1.0, "Sobolev index must be ≥ −1");
    a.iter()
        .zip(basis.eigenvalues())
        .map(|(x, l)| l.powf(s) * x * x)
        .sum::<f64>()
        .sqrt()
}

/// `‖∇u‖^p + ‖u_t‖^p` from the squared norms.
pub fn damping_coefficient(grad_sq: f64, vel_sq: f64, p: f64) -> f64 {
    grad_sq.powf(0.5 * p) + vel_sq.powf(0.5 * p)
}
