//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Column pairs are rotated until mutually orthogonal; the singular values
//! are then the column norms. The method has good relative accuracy for
//! small singular values, which the rank decisions downstream rely on.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let m = a.max_abs();
    if m == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // Exact power-of-two prescaling keeps the inner products away from
    // overflow and the subnormal range.
    let unit = 2f64.powi(-m.log2().round() as i32);
    // column-major working copy
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)] * unit).collect())
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| sq_norm(c)).collect();
    let tol = f64::EPSILON * n as f64;
    // A column this short only carries roundoff; its direction is noise and
    // would never pass the orthogonality test, so it is left alone.
    let negligible = (f64::EPSILON * f64::EPSILON) * norms.iter().sum::<f64>().sqrt();
    let negligible_sq = negligible * negligible;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= negligible_sq || beta <= negligible_sq {
                    continue;
                }
                let gamma: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g < f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    // y is taken with its phase removed so the pair is real-orthogonalized
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
                norms[p] = sq_norm(&cols[p]);
                norms[q] = sq_norm(&cols[q]);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailure(MAX_SWEEPS));
    }

    let mut sv: Vec<f64> = norms.iter().map(|v| v.sqrt() / unit).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn sq_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_with_phases() {
        let a = ComplexMatrix::from_diag(&[
            Complex64::new(0.0, -2.0),
            Complex64::new(0.5, 0.0),
            Complex64::from_polar(3.0, 1.0),
        ])
        .unwrap();
        let sv = singular_values(&a).unwrap();
        for (s, e) in sv.iter().zip([3.0, 2.0, 0.5]) {
            assert!((s - e).abs() < 1e-14);
        }
    }

    #[test]
    fn tiny_singular_values_keep_relative_accuracy() {
        // A = U diag(1, 1e-12) U*
        let (c, s) = (0.6, 0.8);
        let u = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap();
        let d = ComplexMatrix::from_real_diag(&[1.0, 1e-12]).unwrap();
        let a = &(&u * &d) * &u.adjoint();
        let sv = singular_values(&a).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-14);
        assert!((sv[1] - 1e-12).abs() < 1e-15);
    }

    #[test]
    fn extreme_scales() {
        for s in [1e-150, 1e-300, 1e150, 1e300] {
            let a = ComplexMatrix::from_real_rows(&[&[s, 2.0 * s], &[0.0, 1e-3 * s]]).unwrap();
            let sv = singular_values(&a).unwrap();
            // oracle: closed form for the 2x2 singular values of [[1, 2], [0, 1e-3]]
            let (fro2, det): (f64, f64) = (5.0 + 1e-6, 1e-3);
            let big = ((fro2 + (fro2 * fro2 - 4.0 * det * det).sqrt()) / 2.0).sqrt();
            assert!((sv[0] / s - big).abs() < 1e-13 * big, "{s}");
            assert!((sv[1] / s - det / big).abs() < 1e-12 * det / big, "{s}");
        }
    }

    #[test]
    fn rank_deficient_converges() {
        // roundoff-sized residual of rank two; used to cycle on its null column
        let c = Complex64::new;
        let a = ComplexMatrix::new(
            3,
            vec![
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-1.3010426069826053e-18, 1.474514954580286e-17),
                c(-1.1102230246251565e-16, 3.2959746043559335e-17),
                c(0.0, -6.938893903907228e-18),
                c(0.0, 0.0),
                c(-1.734723475976807e-18, -1.3877787807814457e-17),
                c(-1.1102230246251565e-16, 8.673617379884035e-18),
            ],
        )
        .unwrap();
        let sv = singular_values(&a).unwrap();
        let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((fro - a.frobenius_norm()).abs() < 1e-14 * fro);
        assert!(sv[2] < 1e-14 * sv[0]);
    }

    #[test]
    fn frobenius_is_preserved() {
        let a = ComplexMatrix::from_fn(7, |i, j| {
            Complex64::new(((i * 7 + j) as f64).sin(), ((i + 2 * j) as f64).cos())
        })
        .unwrap();
        let sv = singular_values(&a).unwrap();
        let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((fro - a.frobenius_norm()).abs() < 1e-12);
    }
}
