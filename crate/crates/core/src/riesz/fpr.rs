//! Polynomials that isolate one rotation orbit of the spectrum.
//!
//! For an eigenvalue `lambda`, a rotation order `d` and a radius `rho`,
//! `F(z) = (z / lambda)^(d p* + d p + r) phi(z)` where `phi(z) = psi(z^d)`
//! vanishes to full multiplicity at every eigenvalue outside `|z| = rho`
//! that is not on the orbit `{lambda omega^k}`, and equals one on that
//! orbit. Then `Trace F(A)` is `sum_k omega^(k r) m(lambda omega^k)` plus a
//! remainder coming from the eigenvalues inside the circle, which decays
//! geometrically in `p`.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use super::isolating_contour;
use super::quadrature::{check_contour, contour_integrals, Contour, QuadratureConfig, Weight};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::poly::Polynomial;
use crate::spectrum::DistinctSpectrum;
use crate::symmetry::root_of_unity;

/// Number of boundary samples used for the maxima in the remainder bound.
pub const BOUNDARY_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FprParams {
    pub lambda: Complex64,
    pub d: usize,
    pub p_star: usize,
    pub p: usize,
    pub r: usize,
    pub rho: f64,
}

impl FprParams {
    pub fn exponent(&self) -> usize {
        self.d * self.p_star + self.d * self.p + self.r
    }

    fn validate(&self) -> Result<()> {
        if self.lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("lambda must be nonzero".into()));
        }
        if self.d < 2 || self.r == 0 || self.r >= self.d {
            return Err(Error::InvalidArgument(format!(
                "need d >= 2 and 1 <= r <= d-1, got d = {}, r = {}",
                self.d, self.r
            )));
        }
        if !(self.rho > 0.0 && self.rho < self.lambda.norm()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < rho < |lambda|, got rho = {}, |lambda| = {}",
                self.rho,
                self.lambda.norm()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fpr {
    pub polynomial: Polynomial,
    pub phi: Polynomial,
    pub exponent: usize,
    /// `(k, lambda omega^k as found in the spectrum, multiplicity)`.
    pub orbit: Vec<(usize, Complex64, usize)>,
    /// Eigenvalues outside the circle that `phi` annihilates.
    pub excluded: Vec<(Complex64, usize)>,
}

/// Which `k` (if any) places `alpha` at `lambda omega^k`.
fn orbit_slot(alpha: Complex64, lambda: Complex64, d: usize, tol: f64) -> Option<usize> {
    let match_tol = tol.max(64.0 * f64::EPSILON * lambda.norm());
    (0..d).find(|&k| (alpha - lambda * root_of_unity(d, k)).norm() <= match_tol)
}

/// Builds `F_pr` and its annihilating factor `phi`.
pub fn build_fpr(s: &DistinctSpectrum, params: &FprParams) -> Result<Fpr> {
    params.validate()?;
    let FprParams { lambda, d, rho, .. } = *params;
    let lambda_d = lambda.powu(d as u32);
    let mut orbit = Vec::new();
    let mut excluded = Vec::new();
    // annihilated points grouped by their d-th power, with the largest multiplicity
    let mut factors: Vec<(Complex64, usize)> = Vec::new();
    for pt in s.points().iter().filter(|p| p.value.norm() >= rho) {
        if let Some(k) = orbit_slot(pt.value, lambda, d, s.cluster_tol()) {
            orbit.push((k, pt.value, pt.multiplicity));
            continue;
        }
        let alpha_d = pt.value.powu(d as u32);
        if (lambda_d - alpha_d).norm() <= 64.0 * f64::EPSILON * lambda_d.norm() {
            return Err(Error::OrbitCollision(pt.value));
        }
        excluded.push((pt.value, pt.multiplicity));
        let same = (64.0 * f64::EPSILON * alpha_d.norm())
            .max(s.cluster_tol() * d as f64 * pt.value.norm().powi(d as i32 - 1));
        match factors
            .iter_mut()
            .find(|(w, _)| (*w - alpha_d).norm() <= same)
        {
            Some(f) => f.1 = f.1.max(pt.multiplicity),
            None => factors.push((alpha_d, pt.multiplicity)),
        }
    }
    let mut psi = Polynomial::one();
    for (alpha_d, m) in factors {
        let gap = lambda_d - alpha_d;
        // (w - alpha^d) / (lambda^d - alpha^d)
        let factor = Polynomial::new(vec![-alpha_d / gap, Complex64::new(1.0, 0.0) / gap]);
        psi = &psi * &factor.pow(m as u32);
    }
    let phi = psi.compose_power(d);
    let exponent = params.exponent();
    let lead = Polynomial::monomial(
        exponent,
        Complex64::new(1.0, 0.0) / lambda.powu(exponent as u32),
    );
    Ok(Fpr {
        polynomial: &lead * &phi,
        phi,
        exponent,
        orbit,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FprDecomposition {
    /// `sum_k Trace F(T(lambda omega^k))` by quadrature.
    pub orbit_sum: Complex64,
    /// `sum_k omega^(k r) m(lambda omega^k)` from the clustered spectrum.
    pub expected_orbit_sum: Complex64,
    /// Contributions of the annihilated eigenvalues (zero up to quadrature error).
    pub off_orbit: Complex64,
    /// `Trace F(S)` over `|z| = rho`.
    pub remainder: Complex64,
    /// `Trace F(A)` computed directly.
    pub direct: Complex64,
}

impl FprDecomposition {
    pub fn total(&self) -> Complex64 {
        self.orbit_sum + self.off_orbit + self.remainder
    }
}

fn integral_trace(
    a: &ComplexMatrix,
    contour: &Contour,
    w: Weight<'_>,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let (m, _) = contour_integrals(a, contour, &[w], q)?;
    Ok(m[0].trace())
}

/// Splits `Trace F_pr(A)` into the orbit part, the annihilated part and the
/// inner remainder, and checks that they add up to the directly computed
/// trace within `1e-7 (1 + ||F_pr(A)||_F)`.
pub fn trace_fpr_decomposition(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    params: &FprParams,
    q: &QuadratureConfig,
) -> Result<FprDecomposition> {
    let fpr = build_fpr(s, params)?;
    let f = |z: Complex64| fpr.polynomial.eval(z);

    let mut orbit_sum = Complex64::new(0.0, 0.0);
    let mut expected = Complex64::new(0.0, 0.0);
    for &(k, beta, m) in &fpr.orbit {
        orbit_sum += integral_trace(a, &isolating_contour(s, beta)?, &f, q)?;
        expected += root_of_unity(params.d, k * params.r) * m as f64;
    }
    let mut off_orbit = Complex64::new(0.0, 0.0);
    for &(alpha, _) in &fpr.excluded {
        off_orbit += integral_trace(a, &isolating_contour(s, alpha)?, &f, q)?;
    }
    let inner = Contour::origin(params.rho);
    check_contour(s, &inner)?;
    let remainder = integral_trace(a, &inner, &f, q)?;

    let f_of_a = fpr.polynomial.eval_matrix(a)?;
    let out = FprDecomposition {
        orbit_sum,
        expected_orbit_sum: expected,
        off_orbit,
        remainder,
        direct: f_of_a.trace(),
    };
    let residual = (out.direct - out.total()).norm();
    let bound = 1e-7 * (1.0 + f_of_a.frobenius_norm());
    if residual > bound {
        return Err(Error::DecompositionMismatch { residual, bound });
    }
    Ok(out)
}

/// One line of a decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub p: usize,
    pub r: usize,
    /// `||F_pr(S)||_S1`.
    pub remainder_s1: f64,
    /// `C t^p`.
    #[serde(rename = "bound_C_tp")]
    pub bound_c_tp: f64,
    /// Measured remainder over the one at `p - 1` (same `r`); empty on the
    /// first row of each `r`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub d: usize,
    pub p_star: usize,
    pub rho: f64,
    /// `(rho / |lambda|)^d`.
    pub t: f64,
    /// `max |phi|` on `|z| = rho`.
    pub phi_max: f64,
    /// `max ||(z - A)^-1||_op` on `|z| = rho`.
    pub resolvent_max: f64,
    /// `phi_max * resolvent_max * rho * ||A^(d p*)||_S1 / |lambda|^(d p*)`.
    pub c: f64,
    /// `max_p ||F_pr(S)||_S1 / t^p` over the table.
    pub empirical_c: f64,
    /// Whether every measured remainder is within its bound.
    pub certified: bool,
    pub rows: Vec<DecayRow>,
}

/// Measures `||F_pr(S)||_S1` for every `r` in `1..d` and `p` in `ps` and
/// compares against `C t^p`.
#[allow(clippy::too_many_arguments)]
pub fn remainder_bound_certificate(
    a: &ComplexMatrix,
    s: &DistinctSpectrum,
    lambda: Complex64,
    d: usize,
    p_star: usize,
    rho: f64,
    ps: RangeInclusive<usize>,
    q: &QuadratureConfig,
) -> Result<DecayReport> {
    if ps.is_empty() {
        return Err(Error::InvalidArgument("empty range of p".into()));
    }
    let base = FprParams {
        lambda,
        d,
        p_star,
        p: *ps.start(),
        r: 1,
        rho,
    };
    base.validate()?;
    let inner = Contour::origin(rho);
    check_contour(s, &inner)?;

    let phi = build_fpr(s, &base)?.phi;
    let samples: Vec<Complex64> = (0..BOUNDARY_SAMPLES)
        .map(|j| {
            Complex64::from_polar(
                rho,
                std::f64::consts::TAU * j as f64 / BOUNDARY_SAMPLES as f64,
            )
        })
        .collect();
    let phi_max = samples
        .iter()
        .map(|&z| phi.eval(z).norm())
        .fold(0.0, f64::max);
    let resolvent_norms = q
        .execution
        .map(&samples, |&z| a.resolvent(z).and_then(|r| r.op_norm()));
    let mut resolvent_max = 0.0f64;
    for n in resolvent_norms {
        resolvent_max = resolvent_max.max(n?);
    }
    let lead_power = a.power((d * p_star) as u64)?.schatten_norms()?.s1;
    let lambda_abs = lambda.norm();
    let c = phi_max * resolvent_max * rho * lead_power / lambda_abs.powi((d * p_star) as i32);
    let t = (rho / lambda_abs).powi(d as i32);

    let mut jobs = Vec::new();
    for r in 1..d {
        for p in ps.clone() {
            jobs.push((r, p, build_fpr(s, &FprParams { p, r, ..base })?.polynomial));
        }
    }
    let closures: Vec<Box<dyn Fn(Complex64) -> Complex64 + Sync>> = jobs
        .iter()
        .map(|(_, _, poly)| {
            let poly = poly.clone();
            Box::new(move |z: Complex64| poly.eval(z)) as Box<dyn Fn(Complex64) -> Complex64 + Sync>
        })
        .collect();
    let weights: Vec<Weight<'_>> = closures.iter().map(|b| b.as_ref() as Weight<'_>).collect();
    let (parts, _) = contour_integrals(a, &inner, &weights, q)?;
    let norms = q
        .execution
        .map(&parts, |m| m.schatten_norms().map(|n| n.s1));

    let mut rows: Vec<DecayRow> = Vec::with_capacity(jobs.len());
    for ((r, p, _), s1) in jobs.iter().zip(norms) {
        let measured = s1?;
        let ratio = rows
            .last()
            .filter(|prev| prev.r == *r)
            .map(|prev| measured / prev.remainder_s1);
        rows.push(DecayRow {
            p: *p,
            r: *r,
            remainder_s1: measured,
            bound_c_tp: c * t.powi(*p as i32),
            ratio,
        });
    }
    Ok(DecayReport {
        d,
        p_star,
        rho,
        t,
        phi_max,
        resolvent_max,
        c,
        empirical_c: rows
            .iter()
            .map(|row| row.remainder_s1 / t.powi(row.p as i32))
            .fold(0.0, f64::max),
        certified: rows.iter().all(|row| row.remainder_s1 <= row.bound_c_tp),
        rows,
    })
}
