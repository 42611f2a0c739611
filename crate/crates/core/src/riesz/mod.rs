//! Riesz functional calculus by contour quadrature: spectral projections,
//! local operators, the splitting of `F(A)` into pieces attached to the
//! outer eigenvalues and to the inner disk, and the orbit-filtering
//! polynomials together with bounds on their inner remainder.

mod fpr;
mod quadrature;

use num_complex::Complex64;

pub use fpr::{
    build_fpr, remainder_bound_certificate, trace_fpr_decomposition, DecayReport, DecayRow, Fpr,
    FprDecomposition, FprParams,
};
pub use quadrature::{check_contour, contour_integrals, Contour, QuadratureConfig, Weight};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::poly::Polynomial;
use crate::spectrum::DistinctSpectrum;

/// Relative singular value cut for ranks of projections.
pub const RANK_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RieszProjection {
    pub matrix: ComplexMatrix,
    pub rank: usize,
    /// `||P^2 - P||_op`.
    pub idempotency_defect: f64,
    pub nodes: usize,
}

/// Circle around `alpha` that separates it from the rest of the spectrum:
/// half the distance to the nearest other point, or half of `|alpha|` when
/// `alpha` is the only point.
pub fn isolating_contour(s: &DistinctSpectrum, alpha: Complex64) -> Result<Contour> {
    if alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("alpha must be nonzero".into()));
    }
    let radius = match s.separation_radius(alpha) {
        Ok(sep) => sep.radius,
        Err(Error::NoSeparation(_)) => (0.5 * alpha.norm()).max(100.0 * s.cluster_tol()),
        Err(e) => return Err(e),
    };
    let contour = Contour::new(alpha, radius);
    check_contour(s, &contour)?;
    Ok(contour)
}

fn integrate_one(
    a: &ComplexMatrix,
    contour: &Contour,
    w: Weight<'_>,
    q: &QuadratureConfig,
) -> Result<(ComplexMatrix, usize)> {
    let (mut out, nodes) = contour_integrals(a, contour, &[w], q)?;
    Ok((out.remove(0), nodes))
}

/// `P(alpha) = (1/2 pi i) \oint (z - A)^-1 dz` around `alpha`.
///
/// Its rank is the algebraic multiplicity of `alpha` (zero when `alpha` is
/// not an eigenvalue).
pub fn riesz_projection(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    alpha: Complex64,
    q: &QuadratureConfig,
) -> Result<RieszProjection> {
    let contour = isolating_contour(s, alpha)?;
    let one = |_: Complex64| Complex64::new(1.0, 0.0);
    let (p, nodes) = integrate_one(a, &contour, &one, q)?;
    let defect = (&p.matmul(&p) - &p).op_norm()?;
    let p_norm = p.op_norm()?;
    if defect > 1e-8 * (1.0 + p_norm) {
        return Err(Error::ProjectionNotConverged(nodes));
    }
    Ok(RieszProjection {
        rank: p.numerical_rank(RANK_REL_TOL)?,
        matrix: p,
        idempotency_defect: defect,
        nodes,
    })
}

/// `T(alpha) = (1/2 pi i) \oint z (z - A)^-1 dz` around `alpha`, the part of
/// `A` living on the generalized eigenspace of `alpha`.
pub fn local_operator(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    alpha: Complex64,
    q: &QuadratureConfig,
) -> Result<ComplexMatrix> {
    let contour = isolating_contour(s, alpha)?;
    let z = |z: Complex64| z;
    integrate_one(a, &contour, &z, q).map(|(m, _)| m)
}

/// `(1/2 pi i) \oint_{|z| = rho} w(z) (z - A)^-1 dz`: the part of `w(A)` on
/// the eigenvalues inside the circle.
pub fn inner_part(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    rho: f64,
    w: Weight<'_>,
    q: &QuadratureConfig,
) -> Result<ComplexMatrix> {
    let contour = Contour::origin(rho);
    check_contour(s, &contour)?;
    integrate_one(a, &contour, w, q).map(|(m, _)| m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusSplit {
    /// `F(T(alpha))` for each eigenvalue with `|alpha| > rho`, outermost first.
    pub outer: Vec<(Complex64, ComplexMatrix)>,
    pub inner: ComplexMatrix,
    pub f_of_a: ComplexMatrix,
    /// `||F(A) - sum F(T(alpha)) - F(S)||_op`.
    pub residual: f64,
}

/// Splits `F(A)` into the contour integrals of `F(z) (z - A)^-1` around each
/// eigenvalue outside `|z| = rho` and over `|z| = rho` itself, and checks
/// that they add back up to `F(A)` within `1e-7 (1 + ||F(A)||_op)`.
pub fn calculus_split(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    f: &Polynomial,
    rho: f64,
    q: &QuadratureConfig,
) -> Result<CalculusSplit> {
    let fz = |z: Complex64| f.eval(z);
    let inner = inner_part(a, s, rho, &fz, q)?;
    let mut total = inner.clone();
    let mut outer = Vec::new();
    for pt in s.points().iter().filter(|p| p.value.norm() > rho) {
        let contour = isolating_contour(s, pt.value)?;
        let (piece, _) = integrate_one(a, &contour, &fz, q)?;
        total = &total + &piece;
        outer.push((pt.value, piece));
    }
    let f_of_a = f.eval_matrix(a)?;
    let residual = (&f_of_a - &total).op_norm()?;
    let bound = 1e-7 * (1.0 + f_of_a.op_norm()?);
    if residual > bound {
        return Err(Error::SplitResidual { residual, bound });
    }
    Ok(CalculusSplit {
        outer,
        inner,
        f_of_a,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn spectrum_of(a: &ComplexMatrix) -> DistinctSpectrum {
        DistinctSpectrum::of_matrix(a, None).unwrap()
    }

    #[test]
    fn projection_examples() {
        let a = ComplexMatrix::from_real_diag(&[2.0, 1.0]).unwrap();
        let p = riesz_projection(&a, &spectrum_of(&a), c(2.0, 0.0), &q()).unwrap();
        assert!(
            p.matrix
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0]).unwrap())
                < 1e-10
        );
        assert_eq!(p.rank, 1);

        let a = ComplexMatrix::from_real_diag(&[5.0]).unwrap();
        let p = riesz_projection(&a, &spectrum_of(&a), c(1.0, 0.0), &q()).unwrap();
        assert!(p.matrix.max_abs() < 1e-12);
        assert_eq!(p.rank, 0);

        let j3 =
            ComplexMatrix::from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]])
                .unwrap();
        let s = spectrum_of(&j3);
        assert_eq!(s.multiplicity(c(2.0, 0.0)), 3);
        let p = riesz_projection(&j3, &s, c(2.0, 0.0), &q()).unwrap();
        assert!(p.matrix.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
        assert_eq!(p.rank, 3);
    }

    #[test]
    fn projections_are_disjoint_and_commute() {
        let a =
            ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.5], &[0.0, -1.0, 1.0], &[0.3, 0.0, 2.5]])
                .unwrap();
        let s = spectrum_of(&a);
        let ps: Vec<ComplexMatrix> = s
            .points()
            .iter()
            .map(|p| riesz_projection(&a, &s, p.value, &q()).unwrap().matrix)
            .collect();
        let mut sum = ComplexMatrix::zeros(3);
        for (i, p) in ps.iter().enumerate() {
            let scale = 1.0 + p.op_norm().unwrap();
            assert!(
                (&a.matmul(p) - &p.matmul(&a)).op_norm().unwrap()
                    <= 1e-8 * scale * a.op_norm().unwrap()
            );
            for (j, r) in ps.iter().enumerate() {
                if i != j {
                    assert!(p.matmul(r).max_abs() < 1e-8 * scale);
                }
            }
            sum = &sum + p;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn doubling_is_stable_once_converged() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, -1.0]]).unwrap();
        let s = spectrum_of(&a);
        let p = riesz_projection(&a, &s, c(1.0, 0.0), &q()).unwrap();
        let finer = QuadratureConfig::default().with_start_nodes(p.nodes * 2);
        let p2 = riesz_projection(&a, &s, c(1.0, 0.0), &finer).unwrap();
        assert!(p.matrix.max_abs_diff(&p2.matrix) <= 1e-10);
    }

    #[test]
    fn local_operator_examples() {
        let a = ComplexMatrix::from_real_diag(&[2.0, 1.0]).unwrap();
        let t = local_operator(&a, &spectrum_of(&a), c(2.0, 0.0), &q()).unwrap();
        assert!(t.max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 0.0]).unwrap()) < 1e-10);

        let j2 = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let t = local_operator(&j2, &spectrum_of(&j2), c(1.0, 0.0), &q()).unwrap();
        assert!(t.max_abs_diff(&j2) < 1e-10);
    }

    #[test]
    fn local_parts_and_inner_part_rebuild_the_matrix() {
        // oracle: direct summation T(3) + T(-3) + S = A
        let a = ComplexMatrix::from_real_diag(&[3.0, -3.0]).unwrap();
        let s = spectrum_of(&a);
        let t1 = local_operator(&a, &s, c(3.0, 0.0), &q()).unwrap();
        let t2 = local_operator(&a, &s, c(-3.0, 0.0), &q()).unwrap();
        let z = |z: Complex64| z;
        let inner = inner_part(&a, &s, 1.0, &z, &q()).unwrap();
        assert!(inner.max_abs() < 1e-12);
        assert!((&(&t1 + &t2) + &inner).max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn split_examples() {
        let a = ComplexMatrix::from_real_diag(&[2.0, 0.1]).unwrap();
        let s = spectrum_of(&a);
        let split =
            calculus_split(&a, &s, &Polynomial::monomial(1, c(1.0, 0.0)), 1.0, &q()).unwrap();
        assert_eq!(split.outer.len(), 1);
        assert!(
            split.outer[0]
                .1
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 0.0]).unwrap())
                < 1e-10
        );
        assert!(
            split
                .inner
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 0.1]).unwrap())
                < 1e-10
        );

        // F = 1 gives a partition of unity
        let a =
            ComplexMatrix::from_real_rows(&[&[1.5, 1.0, 0.0], &[0.0, -2.0, 1.0], &[0.2, 0.0, 0.3]])
                .unwrap();
        let s = spectrum_of(&a);
        let split = calculus_split(&a, &s, &Polynomial::one(), 0.8, &q()).unwrap();
        let sum = split
            .outer
            .iter()
            .fold(split.inner.clone(), |acc, (_, m)| &acc + m);
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn flat_polynomial_kills_the_local_piece() {
        // F = (z - 2)^3 g vanishes with two derivatives at 2, so F(T(2)) = 0 on J_3(2)
        let a = ComplexMatrix::from_real_rows(&[
            &[2.0, 1.0, 0.0, 0.0],
            &[0.0, 2.0, 1.0, 0.0],
            &[0.0, 0.0, 2.0, 0.0],
            &[0.0, 0.0, 0.0, 0.4],
        ])
        .unwrap();
        let s = spectrum_of(&a);
        assert_eq!(s.multiplicity(c(2.0, 0.0)), 3);
        let g = Polynomial::from_real(&[1.0, -0.5, 0.25]);
        let f = &Polynomial::from_real(&[-2.0, 1.0]).pow(3) * &g;
        let split = calculus_split(&a, &s, &f, 1.0, &q()).unwrap();
        let piece = &split.outer[0].1;
        assert!(piece.max_abs() < 1e-9 * (1.0 + split.f_of_a.max_abs()));

        // one order less is not enough
        let f2 = &Polynomial::from_real(&[-2.0, 1.0]).pow(2) * &g;
        let split = calculus_split(&a, &s, &f2, 1.0, &q()).unwrap();
        assert!(split.outer[0].1.max_abs() > 0.1);
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let a = ComplexMatrix::identity(2);
        assert!(riesz_projection(&a, &spectrum_of(&a), c(0.0, 0.0), &q()).is_err());
    }
}
