//! All eigenvalues of a dense complex matrix: Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR with Wilkinson shifts
//! and deflation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const ITERS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues with algebraic multiplicity (length `dim`), unordered.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let mut h = Hess::from(a);
    h.reduce();
    h.qr_iterate()?;
    Ok((0..n).map(|i| h.at(i, i)).collect())
}

struct Hess {
    n: usize,
    h: Vec<Complex64>,
}

impl From<&ComplexMatrix> for Hess {
    fn from(a: &ComplexMatrix) -> Self {
        Self {
            n: a.dim(),
            h: a.as_slice().to_vec(),
        }
    }
}

impl Hess {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.h[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.h[i * self.n + j]
    }

    fn reduce(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        for k in 0..n - 2 {
            let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| self.at(i, k)).collect();
            let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                continue;
            }
            let x0 = v[0];
            let phase = if x0.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                x0 / x0.norm()
            };
            // reflect x onto -phase * |x| e1 to avoid cancellation
            v[0] = x0 + phase * xnorm;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= vnorm);

            // left: H[k+1.., k..] -= 2 v (v^H H)
            for j in k..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| vi.conj() * self.at(k + 1 + t, j))
                    .sum();
                let f = dot * 2.0;
                for (t, vi) in v.iter().enumerate() {
                    *self.at_mut(k + 1 + t, j) -= vi * f;
                }
            }
            // right: H[.., k+1..] -= 2 (H v) v^H
            for i in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| self.at(i, k + 1 + t) * vi)
                    .sum();
                let f = dot * 2.0;
                for (t, vi) in v.iter().enumerate() {
                    *self.at_mut(i, k + 1 + t) -= f * vi.conj();
                }
            }
            for i in (k + 2)..n {
                *self.at_mut(i, k) = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn qr_iterate(&mut self) -> Result<()> {
        let n = self.n;
        if n == 1 {
            return Ok(());
        }
        let hnorm = self.h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if hnorm == 0.0 {
            return Ok(());
        }
        let eps = f64::EPSILON;
        let cap = ITERS_PER_EIGENVALUE * n;
        let mut total = 0usize;
        let mut hi = n - 1;
        let mut since_deflation = 0usize;

        while hi > 0 {
            // find the start of the active unreduced block
            let mut lo = hi;
            while lo > 0 {
                let sub = self.at(lo, lo - 1).norm();
                let mut scale = self.at(lo, lo).norm() + self.at(lo - 1, lo - 1).norm();
                if scale == 0.0 {
                    scale = hnorm;
                }
                if sub <= eps * scale {
                    *self.at_mut(lo, lo - 1) = Complex64::new(0.0, 0.0);
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                since_deflation = 0;
                continue;
            }

            total += 1;
            since_deflation += 1;
            if total > cap {
                return Err(Error::EigensolverFailure(cap));
            }

            let shift = if since_deflation.is_multiple_of(11) {
                // exceptional shift to break cycles (e.g. permutation matrices)
                let s = self.at(hi, hi - 1).norm()
                    + if hi >= 2 {
                        self.at(hi - 1, hi - 2).norm()
                    } else {
                        0.0
                    };
                self.at(hi, hi) + Complex64::new(0.75 * s, 0.4 * s)
            } else {
                self.wilkinson_shift(hi)
            };
            self.qr_step(lo, hi, shift);
        }
        Ok(())
    }

    fn wilkinson_shift(&self, hi: usize) -> Complex64 {
        let a = self.at(hi - 1, hi - 1);
        let b = self.at(hi - 1, hi);
        let c = self.at(hi, hi - 1);
        let d = self.at(hi, hi);
        let half = (a - d) * 0.5;
        let disc = (half * half + b * c).sqrt();
        let m = (a + d) * 0.5;
        let l1 = m + disc;
        let l2 = m - disc;
        if (l1 - d).norm() <= (l2 - d).norm() {
            l1
        } else {
            l2
        }
    }

    /// One explicit shifted QR sweep on the block `lo..=hi` via Givens
    /// rotations. Only the block itself is updated; eigenvalues do not
    /// depend on the coupling to the rest of the matrix.
    fn qr_step(&mut self, lo: usize, hi: usize, shift: Complex64) {
        for i in lo..=hi {
            *self.at_mut(i, i) -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let a = self.at(k, k);
            let b = self.at(k + 1, k);
            let (c, s) = givens(a, b);
            for j in k..=hi {
                let x = self.at(k, j);
                let y = self.at(k + 1, j);
                *self.at_mut(k, j) = x * c + s * y;
                *self.at_mut(k + 1, j) = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let last = (k + 2).min(hi);
            for i in lo..=last {
                let x = self.at(i, k);
                let y = self.at(i, k + 1);
                *self.at_mut(i, k) = x * c + y * s.conj();
                *self.at_mut(i, k + 1) = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            *self.at_mut(i, i) += shift;
        }
    }
}

/// `(c, s)` with real `c` such that `[[c, s], [-conj(s), c]] [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}
