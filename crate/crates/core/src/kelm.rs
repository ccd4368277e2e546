//! Kernel extreme learning machine for binary targets.
//!
//! Training solves `(I/C + Ω) α = t` with `t ∈ {−1, +1}ᴺ` and `Ω` the Gram
//! matrix of the training rows; the score of a new point is `Σ αᵢ k(xᵢ, x)`.
//! The ridge term keeps the system positive definite, so a Cholesky solve
//! always applies.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, solve_spd, squared_distance, Matrix};

pub const KELM_MAGIC: &str = "SMFG-KELM-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum KernelKind {
    Link,
    Rbfk,
    Polyk,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Link, KernelKind::Rbfk, KernelKind::Polyk];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Link => "LINK",
            KernelKind::Rbfk => "RBFK",
            KernelKind::Polyk => "POLYK",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "link" | "linear" | "lin" => Ok(KernelKind::Link),
            "rbfk" | "rbf" | "gaussian" => Ok(KernelKind::Rbfk),
            "polyk" | "poly" | "polynomial" => Ok(KernelKind::Polyk),
            other => Err(Error::Parameter(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// RBF width; ignored by the other kernels.
    pub gamma: f64,
    /// Polynomial degree; ignored by the other kernels.
    pub degree: u32,
    /// Polynomial offset; ignored by the other kernels.
    pub coef0: f64,
}

impl KernelSpec {
    /// `gamma = 1/d`, `degree = 3`, `coef0 = 1`.
    pub fn with_defaults(kind: KernelKind, input_dim: usize) -> Self {
        Self {
            kind,
            gamma: 1.0 / input_dim.max(1) as f64,
            degree: 3,
            coef0: 1.0,
        }
    }

    pub fn linear() -> Self {
        Self::with_defaults(KernelKind::Link, 1)
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::with_defaults(KernelKind::Rbfk, 1)
        }
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Self {
        Self {
            degree,
            coef0,
            ..Self::with_defaults(KernelKind::Polyk, 1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Parameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.degree < 1 {
            return Err(Error::Parameter("polynomial degree must be at least 1".into()));
        }
        if !self.coef0.is_finite() {
            return Err(Error::Parameter("coef0 must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Link => dot(x, z),
            KernelKind::Rbfk => (-self.gamma * squared_distance(x, z)).exp(),
            KernelKind::Polyk => (dot(x, z) + self.coef0).powi(self.degree as i32),
        }
    }
}

pub fn kernel(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: z.len(),
        });
    }
    Ok(spec.eval_unchecked(x, z))
}

/// Symmetric Gram matrix; each unordered pair is evaluated once.
pub fn gram_matrix(spec: &KernelSpec, x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval_unchecked(x.row(i), x.row(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedKelm {
    pub spec: KernelSpec,
    pub reg_c: f64,
    pub train_x: Matrix,
    /// ±1 training targets.
    pub targets: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn train_kelm(x: &Matrix, y: &[bool], spec: &KernelSpec, reg_c: f64) -> Result<TrainedKelm> {
    spec.validate()?;
    if !(reg_c > 0.0) {
        return Err(Error::Parameter(format!("regularization C must be positive, got {reg_c}")));
    }
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::Training("kernel ELM needs at least two training rows".into()));
    }
    if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
        return Err(Error::Training("kernel ELM needs both classes in the training data".into()));
    }
    if !x.is_finite() {
        return Err(Error::Training("training inputs contain non-finite values".into()));
    }
    let targets: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut system = gram_matrix(spec, x);
    let ridge = 1.0 / reg_c;
    for i in 0..x.rows() {
        system.set(i, i, system.get(i, i) + ridge);
    }
    let alpha = solve_spd(&system, &targets)?;
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::Training("kernel system solve produced non-finite coefficients".into()));
    }
    Ok(TrainedKelm {
        spec: *spec,
        reg_c,
        train_x: x.clone(),
        targets,
        alpha,
    })
}

impl TrainedKelm {
    pub fn input_dim(&self) -> usize {
        self.train_x.cols()
    }

    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(self
            .train_x
            .iter_rows()
            .zip(&self.alpha)
            .map(|(xi, a)| a * self.spec.eval_unchecked(xi, x))
            .sum())
    }

    pub fn predict_scores(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.iter_rows().map(|r| self.predict_score(r)).collect()
    }

    /// Scores of exactly zero classify positive.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_score(x)? >= 0.0)
    }

    /// ‖(I/C + Ω)α − t‖.
    pub fn residual_norm(&self) -> f64 {
        let omega = gram_matrix(&self.spec, &self.train_x);
        let ridge = 1.0 / self.reg_c;
        let r: Vec<f64> = (0..self.alpha.len())
            .map(|i| {
                dot(omega.row(i), &self.alpha) + ridge * self.alpha[i] - self.targets[i]
            })
            .collect();
        norm(&r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{KELM_MAGIC}").map_err(io)?;
        writeln!(
            w,
            "kernel={} gamma={} degree={} coef0={} reg_c={} n={} d={}",
            self.spec.kind,
            self.spec.gamma,
            self.spec.degree,
            self.spec.coef0,
            self.reg_c,
            self.train_x.rows(),
            self.train_x.cols()
        )
        .map_err(io)?;
        for (i, row) in self.train_x.iter_rows().enumerate() {
            write!(w, "{} {}", self.targets[i], self.alpha[i]).map_err(io)?;
            for v in row {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of kernel ELM file".into()))?
                .map_err(|e| Error::io(path, e))
        };
        if next()? != KELM_MAGIC {
            return Err(Error::Format(format!("missing {KELM_MAGIC} header")));
        }
        let header = next()?;
        let get = |key: &str| -> Result<&str> {
            header
                .split_whitespace()
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v)
                .ok_or_else(|| Error::Format(format!("missing header field '{key}'")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Format(format!("invalid header field '{key}'")))
        };
        let spec = KernelSpec {
            kind: get("kernel")?.parse()?,
            gamma: num("gamma")?,
            degree: num("degree")? as u32,
            coef0: num("coef0")?,
        };
        let reg_c = num("reg_c")?;
        let n = num("n")? as usize;
        let d = num("d")? as usize;
        let mut targets = Vec::with_capacity(n);
        let mut alpha = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let line = next()?;
            let vals = line
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{v}'"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != d + 2 {
                return Err(Error::Dimension {
                    expected: d + 2,
                    actual: vals.len(),
                });
            }
            targets.push(vals[0]);
            alpha.push(vals[1]);
            data.extend_from_slice(&vals[2..]);
        }
        Ok(Self {
            spec,
            reg_c,
            train_x: Matrix::from_vec(n, d, data)?,
            targets,
            alpha,
        })
    }
}
