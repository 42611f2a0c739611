//! Reproducible test matrices with known rotation symmetry (or a known
//! defect of it).
//!
//! Randomness comes from ChaCha8 seeded with a `u64`; complex entries are
//! uniform on the closed unit disk.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Lu};
use crate::symmetry::root_of_unity;

/// How a generated matrix was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub family: String,
    pub d: usize,
    /// `None` once the case has been perturbed.
    pub ground_truth: Option<bool>,
    pub seed: u64,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    #[serde(flatten)]
    pub matrix: ComplexMatrix,
    pub meta: CaseMeta,
}

impl TestCase {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("test case serializes")
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed complex unit disk.
pub fn unit_disk(rng: &mut impl Rng) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.gen::<f64>())
}

pub fn random_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data = (0..dim * dim).map(|_| unit_disk(rng)).collect();
    ComplexMatrix::new(dim, data).expect("finite entries")
}

/// Block cyclic shift: block row `i` holds `blocks[i]` in block column
/// `i + 1 mod d`, all other blocks are zero.
pub fn dcyclic_from_blocks(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = blocks.len();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two blocks, got {d}"
        )));
    }
    let m = blocks[0].dim();
    if blocks.iter().any(|b| b.dim() != m) {
        return Err(Error::InvalidArgument("blocks must share one size".into()));
    }
    ComplexMatrix::from_fn(d * m, |i, j| {
        let (bi, bj) = (i / m, j / m);
        if bj == (bi + 1) % d {
            blocks[bi][(i % m, j % m)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn gen_dcyclic_with_blocks(blocks: &[ComplexMatrix], seed: u64) -> Result<TestCase> {
    let matrix = dcyclic_from_blocks(blocks)?;
    Ok(TestCase {
        meta: CaseMeta {
            family: "dcyclic".into(),
            d: blocks.len(),
            ground_truth: Some(true),
            seed,
            params: json!({ "block_dim": blocks[0].dim(), "blocks": "given" }),
        },
        matrix,
    })
}

/// A `d`-cyclic matrix of size `d * block_dim` with random blocks; its
/// spectrum is invariant under rotation by `exp(2 pi i / d)`.
pub fn gen_dcyclic(d: usize, block_dim: usize, seed: u64) -> Result<TestCase> {
    if d < 2 || block_dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and block_dim >= 1, got d = {d}, block_dim = {block_dim}"
        )));
    }
    let mut r = rng(seed);
    let blocks: Vec<ComplexMatrix> = (0..d).map(|_| random_matrix(block_dim, &mut r)).collect();
    let matrix = dcyclic_from_blocks(&blocks)?;
    Ok(TestCase {
        meta: CaseMeta {
            family: "dcyclic".into(),
            d,
            ground_truth: Some(true),
            seed,
            params: json!({ "block_dim": block_dim }),
        },
        matrix,
    })
}

/// Whether a prescribed `(value, multiplicity)` list is `Z_d`-symmetric.
///
/// Values closer than `1e-12` relative to the largest modulus are taken to
/// be the same point.
pub fn prescribed_is_symmetric(spectrum: &[(Complex64, usize)], d: usize) -> bool {
    let scale = spectrum.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mult_at = |z: Complex64| -> usize {
        spectrum
            .iter()
            .filter(|(w, _)| (w - z).norm() <= tol)
            .map(|(_, m)| m)
            .sum()
    };
    spectrum
        .iter()
        .filter(|(z, _)| z.norm() > tol)
        .all(|&(z, _)| {
            let m = mult_at(z);
            (1..d).all(|k| mult_at(z * root_of_unity(d, k)) == m)
        })
}

/// Random `P = I + E` with `||E||_op = (cap - 1) / (cap + 1)`, so that
/// `cond(P) <= cap`.
pub fn random_similarity(dim: usize, cond_cap: f64, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if !(cond_cap >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "condition cap must be >= 1, got {cond_cap}"
        )));
    }
    let e = random_matrix(dim, rng);
    let target = (cond_cap - 1.0) / (cond_cap + 1.0);
    let norm = e.op_norm()?;
    let e = e.scale(Complex64::new(
        if norm > 0.0 { target / norm } else { 0.0 },
        0.0,
    ));
    Ok(ComplexMatrix::identity(dim).axpy(Complex64::new(1.0, 0.0), &e))
}

/// Jordan matrix with one block of size `m` per `(value, m)`.
pub fn jordan_matrix(spectrum: &[(Complex64, usize)]) -> Result<ComplexMatrix> {
    if spectrum.iter().any(|&(_, m)| m == 0) {
        return Err(Error::InvalidArgument(
            "multiplicities must be at least 1".into(),
        ));
    }
    let dim: usize = spectrum.iter().map(|(_, m)| m).sum();
    if dim == 0 {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let mut block_of = Vec::with_capacity(dim);
    for (b, &(_, m)) in spectrum.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, m));
    }
    ComplexMatrix::from_fn(dim, |i, j| {
        if i == j {
            spectrum[block_of[i]].0
        } else if j == i + 1 && block_of[i] == block_of[j] {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `P J P^-1` for the Jordan matrix `J` of the prescribed spectrum and a
/// random `P` with condition number at most `cond_cap`. The ground truth is
/// read off the prescribed list.
pub fn gen_prescribed(
    spectrum: &[(Complex64, usize)],
    d: usize,
    seed: u64,
    cond_cap: f64,
) -> Result<TestCase> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let j = jordan_matrix(spectrum)?;
    let mut r = rng(seed);
    let p = random_similarity(j.dim(), cond_cap, &mut r)?;
    let p_inv = Lu::new(&p)?.inverse()?;
    let matrix = &(&p * &j) * &p_inv;
    let listed: Vec<serde_json::Value> = spectrum
        .iter()
        .map(|(z, m)| json!({ "re": z.re, "im": z.im, "mult": m }))
        .collect();
    Ok(TestCase {
        meta: CaseMeta {
            family: "prescribed".into(),
            d,
            ground_truth: Some(prescribed_is_symmetric(spectrum, d)),
            seed,
            params: json!({ "spectrum": listed, "cond_cap": cond_cap }),
        },
        matrix,
    })
}

/// Adds a random matrix of operator norm `epsilon`. A nonzero perturbation
/// voids the ground truth.
pub fn gen_perturbed(tc: &TestCase, epsilon: f64, seed: u64) -> Result<TestCase> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(tc.clone());
    }
    let mut r = rng(seed);
    let e = random_matrix(tc.matrix.dim(), &mut r);
    let e = e.scale(Complex64::new(epsilon / e.op_norm()?, 0.0));
    let mut meta = tc.meta.clone();
    meta.ground_truth = None;
    meta.params = json!({ "base": tc.meta.params, "base_family": tc.meta.family, "epsilon": epsilon, "perturb_seed": seed });
    meta.family = "perturbed".into();
    Ok(TestCase {
        matrix: &tc.matrix + &e,
        meta,
    })
}

/// A `Z_d`-symmetric spectrum: `orbits` full rotation orbits with distinct
/// moduli in `[0.3, 1]` (the first has modulus one) and per-orbit
/// multiplicity in `1..=max_mult`.
pub fn random_symmetric_spectrum(
    d: usize,
    orbits: usize,
    max_mult: usize,
    rng: &mut impl Rng,
) -> Vec<(Complex64, usize)> {
    let mut moduli: Vec<f64> = vec![1.0];
    while moduli.len() < orbits {
        let r = rng.gen_range(0.3..0.9);
        if moduli.iter().all(|m| (m - r).abs() >= 0.1) {
            moduli.push(r);
        }
    }
    let mut out = Vec::new();
    for r in moduli {
        let base = Complex64::from_polar(r, rng.gen::<f64>() * TAU / d as f64);
        let m = rng.gen_range(1..=max_mult);
        out.extend((0..d).map(|k| (base * root_of_unity(d, k), m)));
    }
    out
}

/// A prescribed spectrum whose leading orbit (modulus one) has one slot's
/// multiplicity raised or lowered by one, conjugated by a similarity with
/// condition number at most `cond_cap`. Multiplicities stay at most 2.
pub fn gen_broken(d: usize, orbits: usize, seed: u64, cond_cap: f64) -> Result<TestCase> {
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut spectrum = random_symmetric_spectrum(d, orbits.max(1), 1, &mut r);
    let slot = r.gen_range(0..d);
    if r.gen_bool(0.5) {
        spectrum[slot].1 += 1;
    } else {
        spectrum.remove(slot);
    }
    let mut tc = gen_prescribed(&spectrum, d, seed, cond_cap)?;
    debug_assert_eq!(tc.meta.ground_truth, Some(false));
    tc.meta.family = "broken".into();
    Ok(tc)
}
