use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectrum::{arg_0_2pi, DistinctSpectrum};

/// `exp(2 pi i k / d)`.
pub fn root_of_unity(d: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k % d) as f64 / d as f64)
}

/// One rotation orbit `{rep * omega^k}`; `multiplicities[k]` is the
/// multiplicity of `rep * omega^k` (zero when that point is absent).
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub representative: Complex64,
    pub multiplicities: Vec<usize>,
}

impl Orbit {
    pub fn is_balanced(&self) -> bool {
        self.multiplicities.windows(2).all(|w| w[0] == w[1])
    }
}

/// Written as `{"re", "im", "multiplicities"}`.
impl Serialize for Orbit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Orbit", 3)?;
        st.serialize_field("re", &self.representative.re)?;
        st.serialize_field("im", &self.representative.im)?;
        st.serialize_field("multiplicities", &self.multiplicities)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPartition {
    pub d: usize,
    pub omega: Complex64,
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    /// True iff every orbit carries one multiplicity on all of its points.
    pub fn is_symmetric(&self) -> bool {
        self.orbits.iter().all(Orbit::is_balanced)
    }
}

pub fn spectral_symmetry_check(p: &OrbitPartition) -> bool {
    p.is_symmetric()
}

/// Groups the nonzero spectrum into orbits of multiplication by
/// `omega = exp(2 pi i / d)`.
///
/// Matching uses the spectrum's `cluster_tol`. Each representative has its
/// argument in `[0, 2pi/d)`; a point sitting within tolerance of the upper
/// sector boundary is normalized toward argument 0 instead.
pub fn partition_orbits(s: &DistinctSpectrum, d: usize) -> Result<OrbitPartition> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let tol = s.cluster_tol();
    let sector = TAU / d as f64;
    let pts: Vec<(Complex64, usize)> = s
        .nonzero_points()
        .map(|p| (p.value, p.multiplicity))
        .collect();
    let mut taken = vec![false; pts.len()];
    let mut orbits = Vec::new();

    for i in 0..pts.len() {
        if taken[i] {
            continue;
        }
        let (z, _) = pts[i];
        let theta = arg_0_2pi(z);
        let mut k = ((theta / sector).floor() as usize).min(d - 1);
        let residual = theta - k as f64 * sector;
        if (sector - residual) * z.norm() <= tol {
            k = (k + 1) % d;
        }
        let rep = z * root_of_unity(d, d - k);
        let match_tol = tol.max(64.0 * f64::EPSILON * z.norm());

        let mut mults = vec![0usize; d];
        for (j, slot) in mults.iter_mut().enumerate() {
            let target = rep * root_of_unity(d, j);
            let hits: Vec<usize> = if j == k {
                vec![i]
            } else {
                (0..pts.len())
                    .filter(|&q| !taken[q] && (pts[q].0 - target).norm() <= match_tol)
                    .collect()
            };
            match hits.as_slice() {
                [] => {}
                [q] => {
                    *slot = pts[*q].1;
                    taken[*q] = true;
                }
                _ => return Err(Error::AmbiguousOrbitMatching(target)),
            }
        }
        orbits.push(Orbit {
            representative: rep,
            multiplicities: mults,
        });
    }
    Ok(OrbitPartition {
        d,
        omega: root_of_unity(d, 1),
        orbits,
    })
}
