use num_complex::Complex64;

use super::orbit::{partition_orbits, root_of_unity};
use crate::error::{Error, Result};
use crate::spectrum::DistinctSpectrum;

/// `r = a g`, `d = b g` with `g = gcd(r, d)` and `tau = exp(2 pi i / b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcdDecomposition {
    pub r: usize,
    pub d: usize,
    pub g: usize,
    pub a: usize,
    pub b: usize,
    pub tau: Complex64,
}

fn gcd(mut x: usize, mut y: usize) -> usize {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

pub fn gcd_decompose(r: usize, d: usize) -> Result<GcdDecomposition> {
    if r == 0 || r >= d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r <= d-1, got r = {r}, d = {d}"
        )));
    }
    let g = gcd(r, d);
    let b = d / g;
    Ok(GcdDecomposition {
        r,
        d,
        g,
        a: r / g,
        b,
        tau: root_of_unity(b, 1),
    })
}

/// One `Z_b`-orbit `{mu tau^j}` of the spectrum of `T^n` and its weighted sum
/// `sum_j mu tau^j m(mu tau^j; T^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSum {
    pub representative: Complex64,
    pub sum: Complex64,
}

/// Splits `Trace T^n` into `Z_b`-orbit contributions, where `b` comes from
/// `gcd_decompose(n mod d, d)`. The sums add up to `Trace T^n`; for a
/// `Z_d`-symmetric spectrum each of them vanishes.
pub fn orbit_trace_sum(s: &DistinctSpectrum, d: usize, n: usize) -> Result<Vec<OrbitSum>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let dec = gcd_decompose(n % d, d)?;
    let exp =
        u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("exponent {n} too large")))?;
    let powered = s.power(exp);
    let part = partition_orbits(&powered, dec.b)?;
    Ok(part
        .orbits
        .iter()
        .map(|o| OrbitSum {
            representative: o.representative,
            sum: o
                .multiplicities
                .iter()
                .enumerate()
                .map(|(j, &m)| o.representative * root_of_unity(dec.b, j) * m as f64)
                .sum(),
        })
        .collect())
}
