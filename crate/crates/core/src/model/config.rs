//! Problem configuration: damping exponent, polynomial nonlinearity, discretization
//! and integrator tolerances, plus the plain-text `key = value` format used on disk.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Spatial dimension of the box domain `(0,1)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("p ∈ (1,2) violated: p = {0}")]
    DampingExponent(f64),
    #[error("dim ∈ {{1,2}} violated: dim = {0}")]
    Dimension(usize),
    #[error("n_modes ≥ 1 violated")]
    ModeCount,
    #[error("n_colloc ≥ 4·n_modes violated: n_colloc = {n_colloc}, n_modes = {n_modes}")]
    Collocation { n_colloc: usize, n_modes: usize },
    #[error("f'(0) > −(1−p/4)λ₁ violated: f1 = {f1}, bound = {bound}")]
    LinearCoefficient { f1: f64, bound: f64 },
    #[error("dissipativity violated: need c5 > 0, or c5 = 0 and c3 > 0, or c5 = c3 = 0 and f1 > −λ₁ (f1 = {f1}, c3 = {c3}, c5 = {c5})")]
    Dissipativity { f1: f64, c3: f64, c5: f64 },
    #[error("|f''(s)| ≤ C(1+|s|) violated: strict_growth requires c5 = 0 (c5 = {0})")]
    Growth(f64),
    #[error("tolerances must be positive and finite (tol_abs = {abs}, tol_rel = {rel})")]
    Tolerance { abs: f64, rel: f64 },
    #[error("coefficient {0} is not finite")]
    NonFinite(&'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("cannot read config {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Full problem description. Construct through [`ProblemConfig::builder`] or
/// [`ProblemConfig::parse`]; both run [`ProblemConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub p: f64,
    pub dim: Dim,
    pub n_modes: usize,
    pub n_colloc: usize,
    pub f1: f64,
    pub c3: f64,
    pub c5: f64,
    pub strict_growth: bool,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub seed: u64,
    /// Test mode: drop the nonlocal damping term entirely.
    pub damping_off: bool,
}

const KEYS: &[&str] = &[
    "p",
    "dim",
    "n_modes",
    "n_colloc",
    "f1",
    "c3",
    "c5",
    "strict_growth",
    "tol_abs",
    "tol_rel",
    "seed",
    "damping_off",
];

impl ProblemConfig {
    pub fn builder(p: f64) -> ConfigBuilder {
        ConfigBuilder::new(p)
    }

    /// First Dirichlet eigenvalue of `(0,1)^dim`.
    pub fn lambda1(&self) -> f64 {
        self.dim.as_usize() as f64 * PI * PI
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("p", self.p), ("f1", self.f1), ("c3", self.c3), ("c5", self.c5)] {
            if !v.is_finite() {
                return Err(ConfigError::NonFinite(name));
            }
        }
        if !(self.p > 1.0 && self.p < 2.0) {
            return Err(ConfigError::DampingExponent(self.p));
        }
        if self.n_modes == 0 {
            return Err(ConfigError::ModeCount);
        }
        if self.n_colloc < 4 * self.n_modes {
            return Err(ConfigError::Collocation {
                n_colloc: self.n_colloc,
                n_modes: self.n_modes,
            });
        }
        let l1 = self.lambda1();
        let bound = -(1.0 - self.p / 4.0) * l1;
        if self.f1 <= bound {
            return Err(ConfigError::LinearCoefficient { f1: self.f1, bound });
        }
        let dissipative =
            self.c5 > 0.0 || (self.c5 == 0.0 && self.c3 > 0.0) || (self.c5 == 0.0 && self.c3 == 0.0 && self.f1 > -l1);
        if !dissipative {
            return Err(ConfigError::Dissipativity {
                f1: self.f1,
                c3: self.c3,
                c5: self.c5,
            });
        }
        if self.strict_growth && self.c5 != 0.0 {
            return Err(ConfigError::Growth(self.c5));
        }
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0) || !self.tol_abs.is_finite() || !self.tol_rel.is_finite() {
            return Err(ConfigError::Tolerance {
                abs: self.tol_abs,
                rel: self.tol_rel,
            });
        }
        Ok(())
    }

    /// Parses the `key = value` format. `#` starts a comment; blank lines are
    /// ignored; unknown keys and duplicate keys are errors. `p` is required.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("expected `key = value`, got `{body}`"),
                });
            };
            let key = k.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line,
                });
            }
            if seen.contains_key(key) {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            seen.insert(key.to_string(), (line, v.trim().to_string()));
        }

        fn num<T: std::str::FromStr>(
            seen: &BTreeMap<String, (usize, String)>,
            key: &str,
        ) -> Result<Option<T>, ConfigError> {
            match seen.get(key) {
                None => Ok(None),
                Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| ConfigError::Parse {
                    line: *line,
                    msg: format!("invalid value `{v}` for `{key}`"),
                }),
            }
        }
        fn flag(seen: &BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<bool>, ConfigError> {
            match seen.get(key) {
                None => Ok(None),
                Some((line, v)) => match v.as_str() {
                    "true" | "1" | "yes" => Ok(Some(true)),
                    "false" | "0" | "no" => Ok(Some(false)),
                    _ => Err(ConfigError::Parse {
                        line: *line,
                        msg: format!("invalid boolean `{v}` for `{key}`"),
                    }),
                },
            }
        }

        let p: f64 = num(&seen, "p")?.ok_or(ConfigError::MissingKey("p"))?;
        let mut b = ConfigBuilder::new(p);
        if let Some(d) = num::<usize>(&seen, "dim")? {
            b.dim = match d {
                1 => Dim::One,
                2 => Dim::Two,
                other => return Err(ConfigError::Dimension(other)),
            };
        }
        if let Some(n) = num(&seen, "n_modes")? {
            b.n_modes = n;
        }
        b.n_colloc = num(&seen, "n_colloc")?;
        if let Some(v) = num(&seen, "f1")? {
            b.f1 = v;
        }
        if let Some(v) = num(&seen, "c3")? {
            b.c3 = v;
        }
        if let Some(v) = num(&seen, "c5")? {
            b.c5 = v;
        }
        if let Some(v) = flag(&seen, "strict_growth")? {
            b.strict_growth = v;
        }
        if let Some(v) = num(&seen, "tol_abs")? {
            b.tol_abs = v;
        }
        if let Some(v) = num(&seen, "tol_rel")? {
            b.tol_rel = v;
        }
        if let Some(v) = num(&seen, "seed")? {
            b.seed = v;
        }
        if let Some(v) = flag(&seen, "damping_off")? {
            b.damping_off = v;
        }
        b.build()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Canonical text form: every key, fixed order, round-trip float formatting.
    pub fn canonical_text(&self) -> String {
        format!(
            "p = {:?}\ndim = {}\nn_modes = {}\nn_colloc = {}\nf1 = {:?}\nc3 = {:?}\nc5 = {:?}\n\
             strict_growth = {}\ntol_abs = {:?}\ntol_rel = {:?}\nseed = {}\ndamping_off = {}\n",
            self.p,
            self.dim.as_usize(),
            self.n_modes,
            self.n_colloc,
            self.f1,
            self.c3,
            self.c5,
            self.strict_growth,
            self.tol_abs,
            self.tol_rel,
            self.seed,
            self.damping_off
        )
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text).
    pub fn hash(&self) -> [u8; 32] {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }

    /// Copy with a different modal truncation; collocation follows at `4·n`.
    pub fn with_modes(&self, n_modes: usize) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        c.n_modes = n_modes;
        c.n_colloc = 4 * n_modes;
        c.validate()?;
        Ok(c)
    }

    pub fn with_tolerances(&self, tol_abs: f64, tol_rel: f64) -> Self {
        let mut c = self.clone();
        c.tol_abs = tol_abs;
        c.tol_rel = tol_rel;
        c
    }

    pub fn with_p(&self, p: f64) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        c.p = p;
        c.validate()?;
        Ok(c)
    }

    /// `f'(0)`.
    pub fn fprime0(&self) -> f64 {
        self.f1
    }

    pub fn is_linear(&self) -> bool {
        self.c3 == 0.0 && self.c5 == 0.0
    }
}

impl fmt::Display for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    p: f64,
    dim: Dim,
    n_modes: usize,
    n_colloc: Option<usize>,
    f1: f64,
    c3: f64,
    c5: f64,
    strict_growth: bool,
    tol_abs: f64,
    tol_rel: f64,
    seed: u64,
    damping_off: bool,
}

impl ConfigBuilder {
    fn new(p: f64) -> Self {
        Self {
            p,
            dim: Dim::One,
            n_modes: 8,
            n_colloc: None,
            f1: 0.0,
            c3: 1.0,
            c5: 0.0,
            strict_growth: false,
            tol_abs: 1e-10,
            tol_rel: 1e-10,
            seed: 0,
            damping_off: false,
        }
    }

    pub fn dim(mut self, dim: Dim) -> Self {
        self.dim = dim;
        self
    }
    pub fn modes(mut self, n: usize) -> Self {
        self.n_modes = n;
        self
    }
    pub fn collocation(mut self, m: usize) -> Self {
        self.n_colloc = Some(m);
        self
    }
    /// Coefficients of `f(s) = f1·s + c3·s³ + c5·s⁵`.
    pub fn poly(mut self, f1: f64, c3: f64, c5: f64) -> Self {
        self.f1 = f1;
        self.c3 = c3;
        self.c5 = c5;
        self
    }
    pub fn strict_growth(mut self, on: bool) -> Self {
        self.strict_growth = on;
        self
    }
    pub fn tolerances(mut self, abs: f64, rel: f64) -> Self {
        self.tol_abs = abs;
        self.tol_rel = rel;
        self
    }
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
    pub fn damping_off(mut self, off: bool) -> Self {
        self.damping_off = off;
        self
    }

    pub fn build(self) -> Result<ProblemConfig, ConfigError> {
        let cfg = ProblemConfig {
            p: self.p,
            dim: self.dim,
            n_modes: self.n_modes,
            n_colloc: self.n_colloc.unwrap_or(4 * self.n_modes),
            f1: self.f1,
            c3: self.c3,
            c5: self.c5,
            strict_growth: self.strict_growth,
            tol_abs: self.tol_abs,
            tol_rel: self.tol_rel,
            seed: self.seed,
            damping_off: self.damping_off,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
