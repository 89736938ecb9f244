//! Attractor point clouds: provenance, deduplication, the versioned binary
//! format and the CSV export. The binary layout is documented in
//! `docs/cloud-format.md`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Dim, ModalState, ProblemConfig, SpectralBasis};

/// File magic of the binary cloud format.
pub const MAGIC: &[u8; 8] = b"DNWCLOUD";
/// Current binary format version.
pub const VERSION: u32 = 1;
/// Size of the fixed binary header in bytes.
pub const HEADER_LEN: usize = 88;

#[derive(Debug, Error)]
pub enum CloudError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a cloud file (bad magic)")]
    Magic,
    #[error("unsupported cloud format version {0}")]
    Version(u32),
    #[error("corrupt cloud header: {0}")]
    Header(String),
    #[error("cloud was produced for config {found}, expected {expected}")]
    ConfigMismatch { expected: String, found: String },
}

/// Where a cloud came from; enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hex SHA-256 of the canonical config text.
    pub config_hash: String,
    pub dim: Dim,
    pub n_modes: usize,
    pub basis_len: usize,
    pub burn_in: f64,
    pub stride: f64,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config: &ProblemConfig, basis: &SpectralBasis, burn_in: f64, stride: f64, seed: u64) -> Self {
        Self {
            config_hash: config.hash_hex(),
            dim: config.dim,
            n_modes: config.n_modes,
            basis_len: basis.len(),
            burn_in,
            stride,
            seed,
        }
    }
}

/// Trajectory index and sample time of a cloud point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLabel {
    pub trajectory: usize,
    pub t: f64,
}

/// A finite sample of the attractor in the `H¹₀ × L²` metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<ModalState>,
    /// Per-point labels; empty for clouds read back from the binary format.
    pub labels: Vec<PointLabel>,
    pub provenance: Provenance,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest phase norm in the cloud.
    pub fn radius(&self, basis: &SpectralBasis) -> f64 {
        self.points.iter().map(|s| s.phase_norm(basis)).fold(0.0, f64::max)
    }

    /// Points in the embedding where the Euclidean metric is the phase metric.
    pub fn embedded(&self, basis: &SpectralBasis) -> Vec<Vec<f64>> {
        self.points.iter().map(|s| s.embed(basis)).collect()
    }

    /// Largest pairwise phase distance.
    pub fn diameter(&self, basis: &SpectralBasis) -> f64 {
        diameter(&self.embedded(basis))
    }

    /// Removes points within `tol` of an earlier point, keeping the first
    /// occurrence in storage order.
    pub fn dedup(&mut self, tol: f64, basis: &SpectralBasis) {
        let keep = dedup_mask(&self.embedded(basis), tol);
        let mut i = 0;
        self.points.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        if !self.labels.is_empty() {
            let mut i = 0;
            self.labels.retain(|_| {
                i += 1;
                keep[i - 1]
            });
        }
    }

    /// Writes the binary format.
    pub fn write_bin<W: Write>(&self, out: &mut W) -> Result<(), CloudError> {
        let pv = &self.provenance;
        let hash = hex::decode(&pv.config_hash)
            .ok()
            .filter(|h| h.len() == 32)
            .ok_or_else(|| CloudError::Header(format!("config hash `{}` is not 32 hex bytes", pv.config_hash)))?;
        let mut head = Vec::with_capacity(HEADER_LEN);
        head.extend_from_slice(MAGIC);
        head.extend_from_slice(&VERSION.to_le_bytes());
        head.extend_from_slice(&(pv.dim.as_usize() as u32).to_le_bytes());
        head.extend_from_slice(&(pv.n_modes as u32).to_le_bytes());
        head.extend_from_slice(&(pv.basis_len as u32).to_le_bytes());
        head.extend_from_slice(&hash);
        head.extend_from_slice(&(self.points.len() as u64).to_le_bytes());
        head.extend_from_slice(&pv.burn_in.to_le_bytes());
        head.extend_from_slice(&pv.stride.to_le_bytes());
        head.extend_from_slice(&pv.seed.to_le_bytes());
        debug_assert_eq!(head.len(), HEADER_LEN);
        out.write_all(&head)?;
        let mut rec = Vec::with_capacity(16 * pv.basis_len);
        for s in &self.points {
            if s.len() != pv.basis_len {
                return Err(CloudError::Header(format!(
                    "point of length {} in a cloud of basis length {}",
                    s.len(),
                    pv.basis_len
                )));
            }
            rec.clear();
            for x in s.a.iter().chain(&s.b) {
                rec.extend_from_slice(&x.to_le_bytes());
            }
            out.write_all(&rec)?;
        }
        Ok(())
    }

    /// Reads the binary format.
    pub fn read_bin<R: Read>(input: &mut R) -> Result<Self, CloudError> {
        let mut head = [0u8; HEADER_LEN];
        input.read_exact(&mut head)?;
        if &head[..8] != MAGIC {
            return Err(CloudError::Magic);
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(CloudError::Version(version));
        }
        let dim = match u32_at(12) {
            1 => Dim::One,
            2 => Dim::Two,
            d => return Err(CloudError::Header(format!("dim {d}"))),
        };
        let n_modes = u32_at(16) as usize;
        let basis_len = u32_at(20) as usize;
        if basis_len == 0 {
            return Err(CloudError::Header("basis length 0".into()));
        }
        let config_hash = hex::encode(&head[24..56]);
        let count = u64_at(56) as usize;
        let provenance = Provenance {
            config_hash,
            dim,
            n_modes,
            basis_len,
            burn_in: f64_at(64),
            stride: f64_at(72),
            seed: u64_at(80),
        };
        let mut points = Vec::with_capacity(count.min(1 << 20));
        let mut rec = vec![0u8; 16 * basis_len];
        for _ in 0..count {
            input.read_exact(&mut rec)?;
            let vals: Vec<f64> = rec
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            points.push(ModalState::new(vals[..basis_len].to_vec(), vals[basis_len..].to_vec()));
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(CloudError::Header("trailing bytes after the last record".into()));
        }
        Ok(Self {
            points,
            labels: Vec::new(),
            provenance,
        })
    }

    /// Checks that the cloud belongs to `config`.
    pub fn check_config(&self, config: &ProblemConfig) -> Result<(), CloudError> {
        let expected = config.hash_hex();
        if self.provenance.config_hash != expected {
            return Err(CloudError::ConfigMismatch {
                expected,
                found: self.provenance.config_hash.clone(),
            });
        }
        Ok(())
    }

    /// CSV export: `trajectory,t,phase_norm,a_1..a_n,b_1..b_n`. Unlabelled
    /// points get empty `trajectory` and `t` fields.
    pub fn write_csv<W: Write>(&self, out: &mut W, basis: &SpectralBasis) -> io::Result<()> {
        let n = self.provenance.basis_len;
        let mut header = String::from("trajectory,t,phase_norm");
        for k in 1..=n {
            header.push_str(&format!(",a_{k}"));
        }
        for k in 1..=n {
            header.push_str(&format!(",b_{k}"));
        }
        writeln!(out, "{header}")?;
        for (i, s) in self.points.iter().enumerate() {
            match self.labels.get(i) {
                Some(l) => write!(out, "{},{:.16e}", l.trajectory, l.t)?,
                None => write!(out, ",")?,
            }
            write!(out, ",{:.16e}", s.phase_norm(basis))?;
            for x in s.a.iter().chain(&s.b) {
                write!(out, ",{x:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `keep[i]` is false when point `i` lies within `tol` of a kept point with a
/// smaller index. Candidates are found by a sweep over sorted norms, since
/// `|‖x‖ − ‖y‖| ≤ ‖x − y‖`.
pub fn dedup_mask(points: &[Vec<f64>], tol: f64) -> Vec<bool> {
    let n = points.len();
    let norms: Vec<f64> = points.iter().map(|x| norm(x)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]).then(i.cmp(&j)));
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut keep = vec![true; n];
    for i in 0..n {
        if !keep[i] {
            continue;
        }
        let r = rank[i];
        let mut scan = |rr: usize| {
            let j = order[rr];
            if j > i && keep[j] && dist(&points[i], &points[j]) <= tol {
                keep[j] = false;
            }
        };
        let mut lo = r;
        while lo > 0 && norms[order[lo - 1]] >= norms[i] - tol {
            lo -= 1;
            scan(lo);
        }
        let mut hi = r + 1;
        while hi < n && norms[order[hi]] <= norms[i] + tol {
            scan(hi);
            hi += 1;
        }
    }
    keep
}

/// Largest pairwise Euclidean distance.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    use rayon::prelude::*;
    (0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|y| dist(&points[i], y)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two finite sets.
pub fn hausdorff(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    use rayon::prelude::*;
    let one_sided = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.par_iter()
            .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    if x.is_empty() || y.is_empty() {
        return if x.is_empty() && y.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    one_sided(x, y).max(one_sided(y, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cloud() -> (PointCloud, SpectralBasis) {
        let c = ProblemConfig::builder(1.5).modes(3).build().unwrap();
        let b = SpectralBasis::new(&c);
        let pts = vec![
            ModalState::new(vec![0.1, 0.2, -0.3], vec![1.0, 0.0, 2.5]),
            ModalState::new(vec![-1e-3, 5.0, 0.0], vec![0.0, -7.25, 1e-300]),
        ];
        let labels = vec![
            PointLabel { trajectory: 0, t: 1.0 },
            PointLabel { trajectory: 1, t: 2.0 },
        ];
        let cloud = PointCloud {
            points: pts,
            labels,
            provenance: Provenance::new(&c, &b, 10.0, 0.5, 7),
        };
        (cloud, b)
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let (cloud, _) = sample_cloud();
        let mut buf = Vec::new();
        cloud.write_bin(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 2 * 6 * 8);
        assert_eq!(&buf[..8], b"DNWCLOUD");
        let back = PointCloud::read_bin(&mut buf.as_slice()).unwrap();
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.provenance, cloud.provenance);
        assert!(back.labels.is_empty());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let (cloud, _) = sample_cloud();
        let mut buf = Vec::new();
        cloud.write_bin(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            PointCloud::read_bin(&mut bad.as_slice()),
            Err(CloudError::Magic)
        ));
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(matches!(
            PointCloud::read_bin(&mut bad.as_slice()),
            Err(CloudError::Version(9))
        ));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(PointCloud::read_bin(&mut &short[..]), Err(CloudError::Io(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            PointCloud::read_bin(&mut long.as_slice()),
            Err(CloudError::Header(_))
        ));
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 5e-13],
            vec![1.0, 1e-13],
            vec![0.0, 1.0],
        ];
        assert_eq!(dedup_mask(&pts, 1e-12), vec![true, true, false, false, true]);
    }

    #[test]
    fn csv_has_documented_columns() {
        let (cloud, b) = sample_cloud();
        let mut out = Vec::new();
        cloud.write_csv(&mut out, &b).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "trajectory,t,phase_norm,a_1,a_2,a_3,b_1,b_2,b_3");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn hausdorff_of_shifted_sets() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![vec![0.0], vec![1.0], vec![3.0]];
        assert_eq!(hausdorff(&x, &y), 2.0);
        assert_eq!(hausdorff(&x, &x), 0.0);
        assert_eq!(diameter(&y), 3.0);
    }
}
