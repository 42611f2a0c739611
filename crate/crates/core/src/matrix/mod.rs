//! Dense square complex matrices.
//!
//! [`ComplexMatrix`] is the concrete operator every other module works on.
//! Entries are stored row-major and are always finite; constructors reject
//! anything else.

mod lu;
mod svd;

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lu::Lu;
pub use svd::singular_values;

/// Absolute floor used wherever a relative tolerance would collapse to zero.
pub const ABS_FLOOR: f64 = 1e-14;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Trace norm, Hilbert-Schmidt norm, the 2/3-quasinorm and the operator
/// norm, all computed from one set of singular values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenNorms {
    pub s1: f64,
    pub s2: f64,
    pub s23: f64,
    pub op: f64,
}

impl SchattenNorms {
    pub fn from_singular_values(sv: &[f64]) -> Self {
        let s1 = sv.iter().sum();
        let s2 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        let s23 = sv.iter().map(|s| s.powf(2.0 / 3.0)).sum::<f64>().powf(1.5);
        let op = sv.iter().copied().fold(0.0, f64::max);
        Self { s1, s2, s23, op }
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix(format!(
                "not square: {dim} rows but a row of length {}",
                bad.len()
            )));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        let dim = diag.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self::new(dim, data)
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        Self::from_diag(
            &diag
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + c * b)
                .collect(),
        }
    }

    /// `z I - self`.
    pub fn shifted(&self, z: Complex64) -> Self {
        let mut out = self.scale(Complex64::new(-1.0, 0.0));
        for i in 0..self.dim {
            out.data[i * self.dim + i] += z;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.dim);
        let mut out = Self::zeros(k);
        for i in 0..k {
            out.data[i * k..(i + 1) * k].copy_from_slice(&self.row(i)[..k]);
        }
        out
    }

    /// Embeds `self` in the top-left corner of a zero `dim x dim` matrix.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut out = Self::zeros(dim);
        for i in 0..self.dim {
            out.data[i * dim..i * dim + self.dim].copy_from_slice(self.row(i));
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (r, &b) in row.iter_mut().zip(brow) {
                    *r += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `self^n` by binary exponentiation; `A^0 = I`.
    pub fn power(&self, n: u64) -> Result<Self> {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base);
                if !result.is_finite() {
                    return Err(Error::PowerOverflow(n));
                }
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
                if !base.is_finite() {
                    return Err(Error::PowerOverflow(n));
                }
            }
        }
        Ok(result)
    }

    pub fn inverse(&self) -> Result<Self> {
        Lu::new(self)?.inverse()
    }

    /// `(z I - self)^{-1}`.
    pub fn resolvent(&self, z: Complex64) -> Result<Self> {
        let shifted = self.shifted(z);
        match Lu::new(&shifted) {
            Ok(lu) => lu.inverse().map_err(|_| Error::ResolventAtSpectrum(z)),
            Err(_) => Err(Error::ResolventAtSpectrum(z)),
        }
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        singular_values(self)
    }

    pub fn schatten_norms(&self) -> Result<SchattenNorms> {
        Ok(SchattenNorms::from_singular_values(
            &self.singular_values()?,
        ))
    }

    pub fn op_norm(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Number of singular values above `rel * max(sigma_max, 1)`.
    ///
    /// The unit floor keeps a numerically zero matrix at rank 0; any nonzero
    /// idempotent has operator norm at least one.
    pub fn numerical_rank(&self, rel: f64) -> Result<usize> {
        let sv = self.singular_values()?;
        let cut = rel * sv.first().copied().unwrap_or(0.0).max(1.0);
        Ok(sv.iter().filter(|&&s| s > cut).count())
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// On-disk layout: `{"dim": n, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.entries.len() != file.dim {
            return Err(Error::InvalidMatrix(format!(
                "dim is {} but {} rows given",
                file.dim,
                file.entries.len()
            )));
        }
        Self::from_rows(
            file.entries
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|[re, im]| Complex64::new(re, im))
                        .collect()
                })
                .collect(),
        )
    }
}

impl From<ComplexMatrix> for MatrixFile {
    fn from(m: ComplexMatrix) -> Self {
        MatrixFile {
            dim: m.dim,
            entries: (0..m.dim)
                .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }
}
