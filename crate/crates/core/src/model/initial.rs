//! Initial data: seeded random low-mode states and eigen-directions, scaled to
//! a prescribed phase norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::basis::SpectralBasis;
use super::state::ModalState;

/// Generator for member `index` of an ensemble seeded by `seed`.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random state supported on the first `n_low` modes with phase norm `norm`.
///
/// Draws exactly `2·n_low` normals, so the state does not depend on the basis
/// size beyond truncation.
pub fn random_low_mode(basis: &SpectralBasis, n_low: usize, norm: f64, seed: u64, index: u64) -> ModalState {
    assert!(n_low >= 1, "need at least one active mode");
    let mut rng = member_rng(seed, index);
    let n = basis.len();
    let mut s = ModalState::zeros(n);
    for k in 0..n_low {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        if k < n {
            s.a[k] = x / basis.eigenvalues()[k].sqrt();
            s.b[k] = y;
        }
    }
    scale_to_norm(s, norm, basis)
}

/// A random unit direction in the phase norm (used for tangent probes).
pub fn random_direction(basis: &SpectralBasis, n_low: usize, seed: u64, index: u64) -> ModalState {
    random_low_mode(basis, n_low, 1.0, seed ^ 0x5eed_d1ec_7100_0000, index)
}

/// Where an eigen-direction puts its mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Displacement,
    Velocity,
}

/// `(e_k/√λ_k, 0)` or `(0, e_k)` scaled to phase norm `norm` (`k` is 0-based).
pub fn eigen_direction(basis: &SpectralBasis, k: usize, component: Component, norm: f64) -> ModalState {
    let mut s = ModalState::zeros(basis.len());
    match component {
        Component::Displacement => s.a[k] = norm / basis.eigenvalues()[k].sqrt(),
        Component::Velocity => s.b[k] = norm,
    }
    s
}

/// Rescales a nonzero state to the given phase norm; zero stays zero.
pub fn scale_to_norm(s: ModalState, norm: f64, basis: &SpectralBasis) -> ModalState {
    let cur = s.phase_norm(basis);
    if cur == 0.0 {
        s
    } else {
        s.scaled(norm / cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::ProblemConfig;

    #[test]
    fn random_data_has_requested_norm_and_is_reproducible() {
        let b = SpectralBasis::new(&ProblemConfig::builder(1.5).modes(8).build().unwrap());
        let s = random_low_mode(&b, 4, 0.7, 42, 3);
        assert!((s.phase_norm(&b) - 0.7).abs() < 1e-14);
        assert!(s.a[4..].iter().all(|&x| x == 0.0));
        assert_eq!(s, random_low_mode(&b, 4, 0.7, 42, 3));
        assert_ne!(s, random_low_mode(&b, 4, 0.7, 42, 4));
    }

    #[test]
    fn low_mode_data_is_basis_independent() {
        let b8 = SpectralBasis::new(&ProblemConfig::builder(1.5).modes(8).build().unwrap());
        let b16 = SpectralBasis::new(&ProblemConfig::builder(1.5).modes(16).build().unwrap());
        let s8 = random_low_mode(&b8, 4, 1.0, 7, 0);
        let s16 = random_low_mode(&b16, 4, 1.0, 7, 0);
        assert_eq!(&s8.a[..4], &s16.a[..4]);
    }

    #[test]
    fn eigen_direction_norm() {
        let b = SpectralBasis::new(&ProblemConfig::builder(1.5).modes(4).build().unwrap());
        for k in 0..4 {
            for c in [Component::Displacement, Component::Velocity] {
                let s = eigen_direction(&b, k, c, 2.0);
                assert!((s.phase_norm(&b) - 2.0).abs() < 1e-14);
            }
        }
    }
}
