//! Covering numbers and box-counting dimension of finite point sets, synthetic
//! fixtures with known dimension, the cover of the degenerate region and the
//! `V/W` splitting report.

pub mod degenerate;
pub mod vw;

pub use degenerate::{
    d0_sequence, decay_schedule, degenerate_cover, CoverInflation, DegenerateCover, DegenerateOptions, ScaleCover,
    TwoRegimeSummary,
};
pub use vw::{vw_splitting_report, VwOptions, VwReport};

use std::collections::HashSet;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attractor::cloud;
use crate::stats::linear_fit;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("empty point set")]
    Empty,
    #[error("points have inconsistent dimensions")]
    Ragged,
    #[error("invalid scale: {0}")]
    Scale(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMethod {
    /// Occupied half-open cells `[kε, (k+1)ε)` of the coordinate grid.
    Grid,
    /// Greedy ε-net with centers in the set; an upper bound on `N(K, ε)`.
    Greedy,
}

impl CoverMethod {
    pub fn other(self) -> Self {
        match self {
            CoverMethod::Grid => CoverMethod::Greedy,
            CoverMethod::Greedy => CoverMethod::Grid,
        }
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<(), DimensionError> {
    let first = points.first().ok_or(DimensionError::Empty)?;
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(DimensionError::Ragged);
    }
    Ok(())
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Number of ε-sets covering `points` by the given method.
pub fn covering_number(points: &[Vec<f64>], eps: f64, method: CoverMethod) -> Result<usize, DimensionError> {
    check_points(points)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(DimensionError::Scale(format!(
            "ε must be positive and finite, got {eps}"
        )));
    }
    Ok(match method {
        CoverMethod::Grid => grid_count(points, eps),
        CoverMethod::Greedy => greedy_net(points, eps).len(),
    })
}

/// Offsets within this many cell widths below a cell boundary are snapped
/// up to it, so that points on a boundary in exact arithmetic are not split
/// by roundoff.
const GRID_SNAP: f64 = 1e-9;

/// Counts occupied cells of a grid of side `eps` anchored at the lower corner
/// of the bounding box, so that a set hugging a coordinate plane is not split
/// across it.
fn grid_count(points: &[Vec<f64>], eps: f64) -> usize {
    let lower = lower_corner(points);
    let cells: HashSet<Vec<i64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&lower)
                .map(|(x, lo)| ((x - lo) / eps + GRID_SNAP).floor() as i64)
                .collect()
        })
        .collect();
    cells.len()
}

fn lower_corner(points: &[Vec<f64>]) -> Vec<f64> {
    let dim = points.first().map_or(0, Vec::len);
    (0..dim)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Indices of a greedy ε-net: points are visited in index order and become
/// centers when no earlier center lies within `eps`.
pub fn greedy_net(points: &[Vec<f64>], eps: f64) -> Vec<usize> {
    let e2 = eps * eps;
    let mut centers: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !centers.iter().any(|&c| dist_sq(&points[c], p) <= e2) {
            centers.push(i);
        }
    }
    centers
}

/// Box-counting summary over a geometric scale sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// `ε_m = ε₀ α^m`, decreasing.
    pub eps_list: Vec<f64>,
    /// `N(K, ε_m)`.
    pub counts: Vec<usize>,
    /// Time schedule of the degenerate cover, when one applies.
    pub t_list: Option<Vec<f64>>,
    /// Least-squares slope of `ln N` against `−ln ε` on the scaling window;
    /// `None` when no window of at least [`MIN_SCALES`] scales exists.
    pub slope: Option<f64>,
    /// Last-three-scales average of `ln t_m / (−ln ε_m)`.
    pub d0: Option<f64>,
    pub method: CoverMethod,
    pub alpha: f64,
    /// Inclusive index range `[first, last]` of the scaling window.
    pub window: Option<[usize; 2]>,
    /// RMS residual of the window fit.
    pub fit_residual: Option<f64>,
    pub n_points: usize,
    pub diameter: f64,
    /// Counts by the other method, when computed.
    pub cross_check: Option<Vec<usize>>,
}

/// Minimum number of scales in a scaling window.
pub const MIN_SCALES: usize = 4;

/// `ε₀ α^m` for `m = 0..=m_max`.
pub fn scale_sequence(eps0: f64, alpha: f64, m_max: usize) -> Vec<f64> {
    (0..=m_max).map(|m| eps0 * alpha.powi(m as i32)).collect()
}

/// Counts coverings at `ε_m = ε₀α^m` and fits the box-counting slope.
///
/// Scales above the set diameter (one cell holds everything) and scales whose
/// count exceeds a quarter of the points (every point alone in its cell) are
/// saturated. The scaling window is the finer half of the remaining scales,
/// and at least [`MIN_SCALES`] of them. The grid method needs `1/α` to be an
/// integer so that successive grids are nested.
pub fn box_dimension(
    points: &[Vec<f64>],
    eps0: f64,
    alpha: f64,
    m_max: usize,
    method: CoverMethod,
) -> Result<CoveringReport, DimensionError> {
    check_points(points)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DimensionError::Scale(format!("α ∈ (0,1) violated: α = {alpha}")));
    }
    if !(eps0 > 0.0) || !eps0.is_finite() {
        return Err(DimensionError::Scale(format!("ε₀ must be positive, got {eps0}")));
    }
    if method == CoverMethod::Grid && ((1.0 / alpha) - (1.0 / alpha).round()).abs() > 1e-9 {
        return Err(DimensionError::Scale(format!(
            "grid method needs 1/α to be an integer, got α = {alpha}"
        )));
    }
    let eps_list = scale_sequence(eps0, alpha, m_max);
    let counts: Vec<usize> = eps_list
        .par_iter()
        .map(|&e| match method {
            CoverMethod::Grid => grid_count(points, e),
            CoverMethod::Greedy => greedy_net(points, e).len(),
        })
        .collect();
    let diameter = cloud::diameter(points);
    let n = points.len();
    let (slope, window, fit_residual) = if diameter == 0.0 {
        (Some(0.0), Some([0, m_max]), Some(0.0))
    } else {
        fit_window(&eps_list, &counts, diameter, n)
    };
    Ok(CoveringReport {
        eps_list,
        counts,
        t_list: None,
        slope,
        d0: None,
        method,
        alpha,
        window,
        fit_residual,
        n_points: n,
        diameter,
        cross_check: None,
    })
}

fn fit_window(
    eps: &[f64],
    counts: &[usize],
    diameter: f64,
    n: usize,
) -> (Option<f64>, Option<[usize; 2]>, Option<f64>) {
    let usable: Vec<usize> = (0..eps.len())
        .filter(|&m| eps[m] <= diameter && 4 * counts[m] <= n)
        .collect();
    if usable.len() < MIN_SCALES {
        return (None, None, None);
    }
    // the finer half of the unsaturated range, where coarse-scale bias has died out
    let keep = MIN_SCALES.max(usable.len().div_ceil(2));
    let usable = &usable[usable.len() - keep..];
    let xs: Vec<f64> = usable.iter().map(|&m| -eps[m].ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|&m| (counts[m] as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    (
        Some(fit.slope),
        Some([usable[0], usable[usable.len() - 1]]),
        Some(fit.rms),
    )
}

impl CoveringReport {
    /// Adds counts by the other method at the same scales.
    pub fn with_cross_check(mut self, points: &[Vec<f64>]) -> Self {
        let other = self.method.other();
        self.cross_check = Some(
            self.eps_list
                .par_iter()
                .map(|&e| match other {
                    CoverMethod::Grid => grid_count(points, e),
                    CoverMethod::Greedy => greedy_net(points, e).len(),
                })
                .collect(),
        );
        self
    }

    /// CSV table `m,eps,count,t_m` (`t_m` empty when absent).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "m,eps,count,t_m")?;
        for (m, (e, c)) in self.eps_list.iter().zip(&self.counts).enumerate() {
            match self.t_list.as_ref().and_then(|t| t.get(m)) {
                Some(t) => writeln!(out, "{m},{e:.16e},{c},{t:.16e}")?,
                None => writeln!(out, "{m},{e:.16e},{c},")?,
            }
        }
        Ok(())
    }
}

/// Synthetic sets with known box dimension.
pub mod fixtures {
    use rand::Rng;

    use crate::model::initial::member_rng;

    /// `n` uniform points on `[0, 1]`.
    pub fn segment(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = member_rng(seed, 0x5e6);
        (0..n).map(|_| vec![rng.random::<f64>()]).collect()
    }

    /// `side²` cell-centred grid points on the unit square.
    pub fn square(side: usize) -> Vec<Vec<f64>> {
        let h = 1.0 / side as f64;
        (0..side * side)
            .map(|i| vec![((i / side) as f64 + 0.5) * h, ((i % side) as f64 + 0.5) * h])
            .collect()
    }

    /// Midpoints of the `2^depth` intervals of the middle-thirds construction.
    pub fn cantor_dust(depth: u32) -> Vec<Vec<f64>> {
        let len = 3f64.powi(-(depth as i32));
        (0..1u64 << depth)
            .map(|bits| {
                let left: f64 = (0..depth)
                    .map(|j| {
                        if bits >> (depth - 1 - j) & 1 == 1 {
                            2.0 * 3f64.powi(-(j as i32) - 1)
                        } else {
                            0.0
                        }
                    })
                    .sum();
                vec![left + 0.5 * len]
            })
            .collect()
    }
}
