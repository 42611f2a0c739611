//! Eigenvalues, their clustering into a distinct spectrum with algebraic
//! multiplicities, and the geometric quantities built on it (spectral
//! mapping for powers, isolation radii, separating circles).

mod eigen;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub use eigen::eigenvalues as eigen_full;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct eigenvalues with algebraic multiplicities.
///
/// Points are kept sorted by descending modulus, then ascending argument in
/// `[0, 2pi)`. Any two points are more than `2 * cluster_tol` apart, and the
/// multiplicities add up to `dim`. A value that is not an eigenvalue simply
/// has no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctSpectrum {
    points: Vec<SpectralPoint>,
    dim: usize,
    cluster_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationData {
    pub alpha: Complex64,
    pub radius: f64,
}

/// Default clustering tolerance `dim * 1e-8 * max(1, ||A||_op)`.
pub fn default_cluster_tol(a: &ComplexMatrix) -> Result<f64> {
    Ok(a.dim() as f64 * 1e-8 * a.op_norm()?.max(1.0))
}

/// Argument mapped to `[0, 2pi)`.
pub fn arg_0_2pi(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t >= 0.0 {
        return t;
    }
    let wrapped = t + TAU;
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

impl DistinctSpectrum {
    /// Eigenvalues of `a`, clustered at `tol` (or the default tolerance).
    pub fn of_matrix(a: &ComplexMatrix, tol: Option<f64>) -> Result<Self> {
        let tol = match tol {
            Some(t) => t,
            None => default_cluster_tol(a)?,
        };
        Ok(Self::cluster(&eigen_full(a)?, tol))
    }

    /// Single-linkage clustering of raw eigenvalues at threshold `tol`.
    pub fn cluster(eigs: &[Complex64], tol: f64) -> Self {
        let weighted: Vec<(Complex64, usize)> = eigs.iter().map(|&z| (z, 1)).collect();
        Self::from_weighted(&weighted, tol)
    }

    /// Builds a spectrum from `(value, multiplicity)` pairs, merging any
    /// that lie within the tolerance of each other.
    pub fn from_weighted(points: &[(Complex64, usize)], tol: f64) -> Self {
        assert!(tol >= 0.0, "cluster tolerance must be nonnegative");
        let pts: Vec<(Complex64, usize)> = points.iter().copied().filter(|p| p.1 > 0).collect();
        let n = pts.len();

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (pts[i].0 - pts[j].0).norm() <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[rj] = ri;
                    }
                }
            }
        }
        let mut groups: Vec<(Complex64, usize)> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push((Complex64::new(0.0, 0.0), 0));
            }
            let g = &mut groups[slot[r]];
            g.0 += pts[i].0 * pts[i].1 as f64;
            g.1 += pts[i].1;
        }
        let mut merged: Vec<(Complex64, usize)> =
            groups.into_iter().map(|(s, m)| (s / m as f64, m)).collect();

        // weighted means may drift closer than 2 * tol; merge until they don't
        loop {
            let mut pair = None;
            'search: for i in 0..merged.len() {
                for j in (i + 1)..merged.len() {
                    if (merged[i].0 - merged[j].0).norm() <= 2.0 * tol {
                        pair = Some((i, j));
                        break 'search;
                    }
                }
            }
            let Some((i, j)) = pair else { break };
            let (zj, mj) = merged.swap_remove(j);
            let (zi, mi) = merged[i];
            merged[i] = (
                (zi * mi as f64 + zj * mj as f64) / (mi + mj) as f64,
                mi + mj,
            );
        }

        let dim = merged.iter().map(|p| p.1).sum();
        let mut points: Vec<SpectralPoint> = merged
            .into_iter()
            .map(|(value, multiplicity)| SpectralPoint {
                value,
                multiplicity,
            })
            .collect();
        sort_points(&mut points);
        Self {
            points,
            dim,
            cluster_tol: tol,
        }
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Points treated as zero are those within `cluster_tol` of the origin.
    pub fn is_zero(&self, z: Complex64) -> bool {
        z.norm() <= self.cluster_tol
    }

    pub fn nonzero_points(&self) -> impl Iterator<Item = &SpectralPoint> {
        self.points.iter().filter(|p| !self.is_zero(p.value))
    }

    /// `m(alpha)`: multiplicity of the point within `cluster_tol` of `alpha`,
    /// zero if there is none.
    pub fn multiplicity(&self, alpha: Complex64) -> usize {
        self.points
            .iter()
            .filter(|p| (p.value - alpha).norm() <= self.cluster_tol)
            .map(|p| p.multiplicity)
            .sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.value.norm())
    }

    /// Spectrum of `A^n`: every point is raised to the n-th power and
    /// coinciding images are merged with their multiplicities summed.
    ///
    /// The image tolerance is the first-order propagation of `cluster_tol`,
    /// `n * rho^(n-1) * cluster_tol` with `rho` the spectral radius.
    pub fn power(&self, n: u32) -> Self {
        assert!(n >= 1, "power must be positive");
        let rho = self.spectral_radius();
        let tol = self.cluster_tol * n as f64 * rho.powi(n as i32 - 1);
        let images: Vec<(Complex64, usize)> = self
            .points
            .iter()
            .map(|p| (p.value.powu(n), p.multiplicity))
            .collect();
        Self::from_weighted(&images, tol)
    }

    /// Half the distance from `alpha` to the nearest other spectrum point.
    pub fn separation_radius(&self, alpha: Complex64) -> Result<SeparationData> {
        let nearest = self
            .points
            .iter()
            .map(|p| (p.value - alpha).norm())
            .filter(|&d| d > self.cluster_tol && d > 0.0)
            .fold(f64::INFINITY, f64::min);
        if !nearest.is_finite() {
            return Err(Error::NoSeparation(alpha));
        }
        Ok(SeparationData {
            alpha,
            radius: 0.5 * nearest,
        })
    }

    /// Radius `rho < lambda_abs` of a circle centered at the origin that
    /// avoids the spectrum: the midpoint of the widest gap between spectrum
    /// moduli in `[0, lambda_abs)`, smallest `rho` on ties.
    ///
    /// Uses the spectrum's own `cluster_tol` as the minimal admissible
    /// distance between the circle and the spectrum.
    pub fn choose_annulus_rho(&self, lambda_abs: f64) -> Result<f64> {
        self.choose_annulus_rho_with_tol(lambda_abs, self.cluster_tol)
    }

    pub fn choose_annulus_rho_with_tol(&self, lambda_abs: f64, tol: f64) -> Result<f64> {
        if !(lambda_abs > 0.0) {
            return Err(Error::InvalidArgument("lambda_abs must be positive".into()));
        }
        let mut cuts: Vec<f64> = vec![0.0, lambda_abs];
        cuts.extend(
            self.points
                .iter()
                .map(|p| p.value.norm())
                .filter(|&r| r < lambda_abs - tol),
        );
        cuts.sort_by(f64::total_cmp);

        let tie = 1e-12 * lambda_abs;
        let mut best: Option<(f64, f64)> = None; // (width, rho)
        for w in cuts.windows(2) {
            let width = w[1] - w[0];
            let rho = 0.5 * (w[0] + w[1]);
            best = match best {
                Some((bw, _)) if width <= bw + tie => best,
                _ => Some((width, rho)),
            };
        }
        match best {
            Some((width, rho)) if 0.5 * width > tol && rho > 0.0 => Ok(rho),
            _ => Err(Error::NoSeparatingCircle(lambda_abs)),
        }
    }

    /// Smallest distance from the circle `|z - center| = radius` to any
    /// spectrum point.
    pub fn distance_to_circle(&self, center: Complex64, radius: f64) -> f64 {
        self.points
            .iter()
            .map(|p| ((p.value - center).norm() - radius).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn sort_points(points: &mut [SpectralPoint]) {
    points.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(arg_0_2pi(a.value).total_cmp(&arg_0_2pi(b.value)))
    });
}

impl Serialize for DistinctSpectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            re: f64,
            im: f64,
            mult: usize,
        }
        let mut seq = serializer.serialize_seq(Some(self.points.len()))?;
        for p in &self.points {
            seq.serialize_element(&Entry {
                re: p.value.re,
                im: p.value.im,
                mult: p.multiplicity,
            })?;
        }
        seq.end()
    }
}
