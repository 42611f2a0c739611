use num_complex::Complex64;

use super::orbit::root_of_unity;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Lu};

/// `S_r = sum_k omega^(k r) y_k` for `r = 1..d-1`, with `d = y.len()`.
pub fn orbit_character_sums(y: &[usize]) -> Vec<Complex64> {
    let d = y.len();
    (1..d)
        .map(|r| {
            y.iter()
                .enumerate()
                .map(|(k, &m)| root_of_unity(d, k * r) * m as f64)
                .sum()
        })
        .collect()
}

/// Recovers the multiplicities `y_0..y_{d-1}` along an orbit from the sums
/// `S_1..S_{d-1}` of [`orbit_character_sums`] and a known `y_0`.
///
/// Solves `sum_{k>=1} omega^(k r) y_k = S_r - y_0`, rounds to integers and
/// rejects the data when the rounded vector does not reproduce the sums
/// within `1e-6` relative to their size.
pub fn vandermonde_recover(sums: &[Complex64], y0: usize) -> Result<Vec<usize>> {
    let scale = sums
        .iter()
        .map(|s| s.norm())
        .fold(y0 as f64, f64::max)
        .max(1.0);
    vandermonde_recover_with_tol(sums, y0, 1e-6 * scale)
}

pub fn vandermonde_recover_with_tol(sums: &[Complex64], y0: usize, tol: f64) -> Result<Vec<usize>> {
    let d = sums.len() + 1;
    if d < 2 {
        return Err(Error::InvalidArgument("need at least one orbit sum".into()));
    }
    let m = ComplexMatrix::from_fn(d - 1, |r, k| root_of_unity(d, (k + 1) * (r + 1)))?;
    let rhs: Vec<Complex64> = sums.iter().map(|s| s - y0 as f64).collect();
    let x = Lu::new(&m)?.solve(&rhs);
    let mut y = vec![y0];
    for (k, v) in x.iter().enumerate() {
        let rounded = v.re.round();
        if rounded < 0.0 || !rounded.is_finite() {
            return Err(Error::InconsistentOrbitData(format!(
                "slot {} solves to {v}, not a multiplicity",
                k + 1
            )));
        }
        y.push(rounded as usize);
    }
    let back = orbit_character_sums(&y);
    let residual = back
        .iter()
        .zip(sums)
        .map(|(b, s)| (b - s).norm())
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::InconsistentOrbitData(format!(
            "rounded multiplicities {y:?} leave residual {residual:.3e} > {tol:.3e}"
        )));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn all_zero_sums_give_constant_vector() {
        assert_eq!(vandermonde_recover(&[c(0.0, 0.0)], 3).unwrap(), vec![3, 3]);
        assert_eq!(
            vandermonde_recover(&[c(0.0, 0.0); 2], 1).unwrap(),
            vec![1, 1, 1]
        );
    }

    #[test]
    fn forward_then_recover_for_2_1_1() {
        // S_1 = 2 + w + w^2 = 1 and S_2 = 2 + w^2 + w^4 = 1
        let w = root_of_unity(3, 1);
        let s1 = 2.0 + w + w * w;
        let s2 = 2.0 + w * w + w.powu(4);
        assert!((s1 - c(1.0, 0.0)).norm() < 1e-15 && (s2 - c(1.0, 0.0)).norm() < 1e-15);
        let sums = orbit_character_sums(&[2, 1, 1]);
        assert!((sums[0] - s1).norm() < 1e-15 && (sums[1] - s2).norm() < 1e-15);
        assert_eq!(vandermonde_recover(&sums, 2).unwrap(), vec![2, 1, 1]);
    }

    #[test]
    fn inconsistent_data_is_rejected() {
        assert!(matches!(
            vandermonde_recover(&[c(0.5, 0.0)], 1),
            Err(Error::InconsistentOrbitData(_))
        ));
        // y_1 would be negative
        assert!(vandermonde_recover(&[c(5.0, 0.0)], 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn round_trip(y in (2usize..=8).prop_flat_map(|d| proptest::collection::vec(0usize..=10, d))) {
            let sums = orbit_character_sums(&y);
            let back = vandermonde_recover(&sums, y[0]).unwrap();
            prop_assert_eq!(&back, &y);
            let residual = orbit_character_sums(&back)
                .iter()
                .zip(&sums)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            prop_assert!(residual < 1e-9);
        }
    }
}
