//! Trapezoid rule for `(1/2 pi i) \oint w(z) (z - A)^-1 dz` on a circle.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::par::Execution;
use crate::spectrum::DistinctSpectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn origin(radius: f64) -> Self {
        Self::new(Complex64::new(0.0, 0.0), radius)
    }

    fn node(&self, j: usize, n: usize) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, TAU * j as f64 / n as f64)
    }
}

/// Node-doubling schedule and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub start_nodes: usize,
    pub max_nodes: usize,
    /// Stop once one doubling changes every integral by at most this much,
    /// relative to its largest entry.
    pub tol: f64,
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            start_nodes: 64,
            max_nodes: 4096,
            tol: 1e-10,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_start_nodes(mut self, nodes: usize) -> Self {
        self.start_nodes = nodes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.start_nodes < 16 || self.start_nodes > self.max_nodes {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs 16 <= start nodes <= {}, got {}",
                self.max_nodes, self.start_nodes
            )));
        }
        Ok(())
    }
}

/// Rejects circles that pass within `radius * 1e-6` of a spectrum point.
pub fn check_contour(s: &DistinctSpectrum, contour: &Contour) -> Result<()> {
    if !(contour.radius > 0.0 && contour.radius.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "contour radius must be positive, got {}",
            contour.radius
        )));
    }
    let distance = s.distance_to_circle(contour.center, contour.radius);
    if distance <= contour.radius * 1e-6 {
        return Err(Error::ContourTouchesSpectrum {
            center: contour.center,
            radius: contour.radius,
            distance,
        });
    }
    Ok(())
}

pub type Weight<'a> = &'a (dyn Fn(Complex64) -> Complex64 + Sync);

/// Integrals `(1/2 pi i) \oint w(z) (z - A)^-1 dz` for several weights on
/// one circle, sharing the resolvent evaluations. Returns the integrals and
/// the final node count.
///
/// Nodes double (reusing all earlier ones) until every integral moves by at
/// most `tol` times its largest entry, or by a small multiple of the
/// roundoff in the node sum, whichever is larger. Node contributions are
/// accumulated in node order, so results do not depend on the execution
/// policy.
pub fn contour_integrals(
    a: &ComplexMatrix,
    contour: &Contour,
    weights: &[Weight<'_>],
    config: &QuadratureConfig,
) -> Result<(Vec<ComplexMatrix>, usize)> {
    config.validate()?;
    let dim = a.dim();
    let mut sums = vec![ComplexMatrix::zeros(dim); weights.len()];
    let mut term_scale = vec![0.0f64; weights.len()];

    let absorb =
        |nodes: &[Complex64], sums: &mut [ComplexMatrix], term_scale: &mut [f64]| -> Result<()> {
            let resolvents = config.execution.map(nodes, |&z| a.resolvent(z));
            for (&z, r) in nodes.iter().zip(resolvents) {
                let r = r?;
                let r_max = r.max_abs();
                for ((w, sum), scale) in weights
                    .iter()
                    .zip(sums.iter_mut())
                    .zip(term_scale.iter_mut())
                {
                    let c = w(z) * (z - contour.center);
                    *sum = sum.axpy(c, &r);
                    *scale = scale.max(c.norm() * r_max);
                }
            }
            Ok(())
        };

    let mut n = config.start_nodes;
    let first: Vec<Complex64> = (0..n).map(|j| contour.node(j, n)).collect();
    absorb(&first, &mut sums, &mut term_scale)?;
    let mut current: Vec<ComplexMatrix> = sums
        .iter()
        .map(|s| s.scale(Complex64::new(1.0 / n as f64, 0.0)))
        .collect();

    while n < config.max_nodes {
        let fresh: Vec<Complex64> = (0..n).map(|j| contour.node(2 * j + 1, 2 * n)).collect();
        absorb(&fresh, &mut sums, &mut term_scale)?;
        n *= 2;
        let next: Vec<ComplexMatrix> = sums
            .iter()
            .map(|s| s.scale(Complex64::new(1.0 / n as f64, 0.0)))
            .collect();
        let converged = next
            .iter()
            .zip(&current)
            .zip(&term_scale)
            .all(|((new, old), &scale)| {
                let allowed = (config.tol * new.max_abs()).max(1e3 * f64::EPSILON * scale);
                new.max_abs_diff(old) <= allowed
            });
        current = next;
        if converged {
            return Ok((current, n));
        }
    }
    Err(Error::ProjectionNotConverged(n))
}
