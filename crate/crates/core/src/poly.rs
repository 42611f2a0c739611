//! Complex polynomials and their evaluation at matrices.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Polynomial with complex coefficients in ascending degree.
///
/// Trailing zero coefficients are trimmed, so the zero polynomial has no
/// coefficients at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs
            .last()
            .is_some_and(|c| *c == Complex64::new(0.0, 0.0))
        {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `c z^degree`.
    pub fn monomial(degree: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, m: u32) -> Self {
        (0..m).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `p(z^d)`: the coefficient of `z^k` moves to `z^{kd}`.
    pub fn compose_power(&self, d: usize) -> Self {
        assert!(d >= 1);
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (self.coeffs.len() - 1) * d + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * d] = c;
        }
        Self::new(coeffs)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Horner evaluation of `F(A)`.
    pub fn eval_matrix(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = a.dim();
        let mut acc = ComplexMatrix::zeros(n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.matmul(a).axpy(c, &ComplexMatrix::identity(n));
            if !acc.is_finite() {
                return Err(Error::PolynomialOverflow);
            }
        }
        Ok(acc)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Polynomial::new(
            (0..len)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + rhs.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn matrix_evaluation_examples() {
        let sq = Polynomial::monomial(2, c(1.0));
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(sq.eval_matrix(&nil).unwrap(), ComplexMatrix::zeros(2));

        let one = Polynomial::one();
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[-3.0, 0.5]]).unwrap();
        assert_eq!(one.eval_matrix(&a).unwrap(), ComplexMatrix::identity(2));

        // z^3 - z at 2 is 6
        let p = Polynomial::from_real(&[0.0, -1.0, 0.0, 1.0]);
        let out = p
            .eval_matrix(&ComplexMatrix::from_real_diag(&[2.0]).unwrap())
            .unwrap();
        assert!((out[(0, 0)] - c(6.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_exactness() {
        let p = Polynomial::new(vec![
            Complex64::new(0.5, -1.0),
            c(2.0),
            Complex64::new(0.0, 3.0),
            c(-1.0),
        ]);
        let lams = [c(0.3), Complex64::new(-1.0, 2.0), Complex64::new(0.0, -0.7)];
        let out = p
            .eval_matrix(&ComplexMatrix::from_diag(&lams).unwrap())
            .unwrap();
        let expected = ComplexMatrix::from_diag(&lams.map(|l| p.eval(l))).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn overflow_is_reported() {
        let p = Polynomial::monomial(400, c(1.0));
        let a = ComplexMatrix::from_real_diag(&[1e3]).unwrap();
        assert!(matches!(p.eval_matrix(&a), Err(Error::PolynomialOverflow)));
    }

    #[test]
    fn algebra() {
        let p = Polynomial::from_real(&[-1.0, 1.0]);
        let q = Polynomial::from_real(&[1.0, 1.0]);
        assert_eq!(&p * &q, Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(&p + &q, Polynomial::from_real(&[0.0, 2.0]));
        assert_eq!(p.pow(0), Polynomial::one());
        assert_eq!(
            Polynomial::from_real(&[-1.0, 1.0]).compose_power(3),
            Polynomial::from_real(&[-1.0, 0.0, 0.0, 1.0])
        );
        assert_eq!(Polynomial::from_real(&[1.0, 0.0, 0.0]).degree(), Some(0));
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(
            Polynomial::from_real(&[5.0, 3.0, 2.0]).derivative(),
            Polynomial::from_real(&[3.0, 4.0])
        );
    }
}
