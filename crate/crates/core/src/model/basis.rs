//! Dirichlet-Laplacian eigenbasis on `(0,1)` or `(0,1)²` with a uniform interior
//! collocation grid. Transforms are dense discrete sine transforms; with
//! `M ≥ 4N` points per axis the projection of products of up to five truncated
//! sine series (and the quadrature of up to six) is exact to roundoff.

use std::f64::consts::{PI, SQRT_2};

use super::config::{Dim, ProblemConfig};

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    dim: Dim,
    n_modes: usize,
    n_colloc: usize,
    eigenvalues: Vec<f64>,
    /// 1-based wave numbers per basis function: `(k, 0)` in 1D, `(j, k)` in 2D.
    wave_numbers: Vec<(usize, usize)>,
    /// Row-major `M × N`: `√2 sin(kπ x_i)`, `k = 1..N`.
    sine: Vec<f64>,
    nodes: Vec<f64>,
    /// 2D only: position in the sorted basis of wave pair `(j, k)` at `(j−1)·N + (k−1)`.
    pair_index: Vec<usize>,
}

/// Scratch buffers for grid transforms; one per thread of work.
#[derive(Debug, Clone)]
pub struct GridWork {
    dense: Vec<f64>,
    half: Vec<f64>,
}

impl SpectralBasis {
    /// Builds the basis for a validated config.
    pub fn new(config: &ProblemConfig) -> Self {
        let n = config.n_modes;
        let m = config.n_colloc;
        let h = 1.0 / (m as f64 + 1.0);
        let nodes: Vec<f64> = (1..=m).map(|i| i as f64 * h).collect();
        let mut sine = vec![0.0; m * n];
        for (i, &x) in nodes.iter().enumerate() {
            for k in 0..n {
                sine[i * n + k] = SQRT_2 * ((k + 1) as f64 * PI * x).sin();
            }
        }
        let (eigenvalues, wave_numbers, pair_index) = match config.dim {
            Dim::One => {
                let ev = (1..=n).map(|k| (k as f64 * PI).powi(2)).collect();
                let wn = (1..=n).map(|k| (k, 0)).collect();
                (ev, wn, Vec::new())
            }
            Dim::Two => {
                let mut pairs: Vec<(usize, usize)> = (1..=n).flat_map(|j| (1..=n).map(move |k| (j, k))).collect();
                pairs.sort_by_key(|&(j, k)| (j * j + k * k, j, k));
                let ev = pairs.iter().map(|&(j, k)| (j * j + k * k) as f64 * PI * PI).collect();
                let mut idx = vec![0; n * n];
                for (pos, &(j, k)) in pairs.iter().enumerate() {
                    idx[(j - 1) * n + (k - 1)] = pos;
                }
                (ev, pairs, idx)
            }
        };
        Self {
            dim: config.dim,
            n_modes: n,
            n_colloc: m,
            eigenvalues,
            wave_numbers,
            sine,
            nodes,
            pair_index,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Number of basis functions (`N` in 1D, `N²` in 2D).
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_colloc(&self) -> usize {
        self.n_colloc
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn wave_numbers(&self) -> &[(usize, usize)] {
        &self.wave_numbers
    }

    /// Collocation nodes along one axis.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Total number of collocation points.
    pub fn grid_len(&self) -> usize {
        match self.dim {
            Dim::One => self.n_colloc,
            Dim::Two => self.n_colloc * self.n_colloc,
        }
    }

    /// Quadrature weight of one grid point.
    pub fn weight(&self) -> f64 {
        let h = 1.0 / (self.n_colloc as f64 + 1.0);
        match self.dim {
            Dim::One => h,
            Dim::Two => h * h,
        }
    }

    pub fn workspace(&self) -> GridWork {
        let (n, m) = (self.n_modes, self.n_colloc);
        match self.dim {
            Dim::One => GridWork {
                dense: Vec::new(),
                half: Vec::new(),
            },
            Dim::Two => GridWork {
                dense: vec![0.0; n * n],
                half: vec![0.0; m * n],
            },
        }
    }

    /// Evaluates `Σ c_k e_k` at every grid point.
    pub fn to_grid(&self, coeffs: &[f64], grid: &mut [f64], work: &mut GridWork) {
        debug_assert_eq!(coeffs.len(), self.len());
        debug_assert_eq!(grid.len(), self.grid_len());
        let (n, m) = (self.n_modes, self.n_colloc);
        match self.dim {
            Dim::One => {
                for (i, g) in grid.iter_mut().enumerate() {
                    let row = &self.sine[i * n..(i + 1) * n];
                    *g = row.iter().zip(coeffs).map(|(s, c)| s * c).sum();
                }
            }
            Dim::Two => {
                for (pos, &(j, k)) in self.wave_numbers.iter().enumerate() {
                    work.dense[(j - 1) * n + (k - 1)] = coeffs[pos];
                }
                // half[x, k] = Σ_j S[x, j] C[j, k]
                for x in 0..m {
                    let srow = &self.sine[x * n..(x + 1) * n];
                    for k in 0..n {
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += srow[j] * work.dense[j * n + k];
                        }
                        work.half[x * n + k] = acc;
                    }
                }
                // grid[x, y] = Σ_k half[x, k] S[y, k]
                for x in 0..m {
                    let hrow = &work.half[x * n..(x + 1) * n];
                    for y in 0..m {
                        let srow = &self.sine[y * n..(y + 1) * n];
                        grid[x * m + y] = hrow.iter().zip(srow).map(|(a, b)| a * b).sum();
                    }
                }
            }
        }
    }

    /// Projects grid values onto the basis: `c_k = w Σ_x e_k(x) g(x)`.
    pub fn project(&self, grid: &[f64], coeffs: &mut [f64], work: &mut GridWork) {
        debug_assert_eq!(coeffs.len(), self.len());
        let (n, m) = (self.n_modes, self.n_colloc);
        let w = self.weight();
        match self.dim {
            Dim::One => {
                coeffs.iter_mut().for_each(|c| *c = 0.0);
                for (i, &g) in grid.iter().enumerate() {
                    let row = &self.sine[i * n..(i + 1) * n];
                    for (c, s) in coeffs.iter_mut().zip(row) {
                        *c += s * g;
                    }
                }
                coeffs.iter_mut().for_each(|c| *c *= w);
            }
            Dim::Two => {
                // half[x, k] = Σ_y g[x, y] S[y, k]
                for x in 0..m {
                    let grow = &grid[x * m..(x + 1) * m];
                    let hrow = &mut work.half[x * n..(x + 1) * n];
                    hrow.iter_mut().for_each(|h| *h = 0.0);
                    for (y, &g) in grow.iter().enumerate() {
                        let srow = &self.sine[y * n..(y + 1) * n];
                        for (h, s) in hrow.iter_mut().zip(srow) {
                            *h += g * s;
                        }
                    }
                }
                // dense[j, k] = Σ_x S[x, j] half[x, k]
                work.dense.iter_mut().for_each(|d| *d = 0.0);
                for x in 0..m {
                    let srow = &self.sine[x * n..(x + 1) * n];
                    let hrow = &work.half[x * n..(x + 1) * n];
                    for j in 0..n {
                        let s = srow[j];
                        for k in 0..n {
                            work.dense[j * n + k] += s * hrow[k];
                        }
                    }
                }
                for (pos, &(j, k)) in self.wave_numbers.iter().enumerate() {
                    coeffs[pos] = w * work.dense[(j - 1) * n + (k - 1)];
                }
            }
        }
    }

    /// Trapezoidal quadrature of grid values over the domain (boundary values are zero).
    pub fn integrate(&self, grid: &[f64]) -> f64 {
        self.weight() * grid.iter().sum::<f64>()
    }

    /// Sorted position of the 2D wave pair `(j, k)`, if present.
    pub fn index_of(&self, j: usize, k: usize) -> Option<usize> {
        match self.dim {
            Dim::One => (k == 0 && j >= 1 && j <= self.n_modes).then(|| j - 1),
            Dim::Two => (j >= 1 && k >= 1 && j <= self.n_modes && k <= self.n_modes)
                .then(|| self.pair_index[(j - 1) * self.n_modes + (k - 1)]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(dim: Dim, n: usize) -> SpectralBasis {
        let cfg = ProblemConfig::builder(1.5).dim(dim).modes(n).build().unwrap();
        SpectralBasis::new(&cfg)
    }

    #[test]
    fn eigenvalues_1d() {
        let b = basis(Dim::One, 4);
        let pi2 = PI * PI;
        let want = [pi2, 4.0 * pi2, 9.0 * pi2, 16.0 * pi2];
        for (a, w) in b.eigenvalues().iter().zip(want) {
            assert!((a - w).abs() < 1e-12);
        }
        let b1 = basis(Dim::One, 1);
        assert!((b1.lambda1() - 9.869_604_401_089_358).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_2d_sorted() {
        let b = basis(Dim::Two, 2);
        assert_eq!(b.len(), 4);
        assert!((b.lambda1() - 2.0 * PI * PI).abs() < 1e-12);
        assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let b3 = basis(Dim::Two, 3);
        assert_eq!(b3.wave_numbers()[0], (1, 1));
        assert_eq!(b3.wave_numbers()[1], (1, 2));
        assert_eq!(b3.wave_numbers()[2], (2, 1));
        assert_eq!(b3.index_of(2, 1), Some(2));
    }

    #[test]
    fn transform_roundtrip() {
        for dim in [Dim::One, Dim::Two] {
            let b = basis(dim, 5);
            let mut w = b.workspace();
            let c: Vec<f64> = (0..b.len()).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut g = vec![0.0; b.grid_len()];
            b.to_grid(&c, &mut g, &mut w);
            let mut back = vec![0.0; b.len()];
            b.project(&g, &mut back, &mut w);
            for (x, y) in c.iter().zip(&back) {
                assert!((x - y).abs() < 1e-13, "{dim:?}: {x} vs {y}");
            }
        }
    }
}
