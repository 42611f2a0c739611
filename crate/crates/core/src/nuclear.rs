//! Nuclear operators `A x = sum_k a_k f_k(x) y_k` on sequence spaces.
//!
//! Functionals and vectors are finitely supported coordinate sequences
//! (0-based indices); a representation is either an explicit list of terms
//! or one of a few closed-form infinite families, in which case every
//! operation takes an explicit truncation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generators::{rng, unit_disk};
use crate::matrix::ComplexMatrix;
use crate::spectrum::eigen_full;

/// Slack on the unit-ball constraints for `f_k` and `y_k`.
const NORM_SLACK: f64 = 1e-12;
/// Terms summed exactly before the integral tail for `a_k = k^-s`.
const POWER_EXACT_TERMS: usize = 1000;

/// `||v||_p` for `p` in `[1, inf]`.
pub fn lp_norm(v: &[(usize, Complex64)], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    }
    let max = v.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    // scaled to avoid overflow for large p
    max * v
        .iter()
        .map(|(_, z)| (z.norm() / max).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Conjugate exponent `p / (p - 1)`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `f(y) = sum_i f_i y_i` for sparse coordinate sequences.
pub fn pairing(f: &[(usize, Complex64)], y: &[(usize, Complex64)]) -> Complex64 {
    f.iter()
        .flat_map(|&(i, fi)| {
            y.iter()
                .filter(move |(j, _)| *j == i)
                .map(move |&(_, yj)| fi * yj)
        })
        .sum()
}

fn serialize_sparse<S: Serializer>(
    v: &[(usize, Complex64)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(i, z)| (i, z.re, z.im)))
}

fn deserialize_sparse<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<(usize, Complex64)>, D::Error> {
    let raw: Vec<(usize, f64, f64)> = Deserialize::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|(i, re, im)| (i, Complex64::new(re, im)))
        .collect())
}

/// One term `a f(.) y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearTerm {
    pub a: f64,
    #[serde(
        serialize_with = "serialize_sparse",
        deserialize_with = "deserialize_sparse"
    )]
    pub f: Vec<(usize, Complex64)>,
    #[serde(
        serialize_with = "serialize_sparse",
        deserialize_with = "deserialize_sparse"
    )]
    pub y: Vec<(usize, Complex64)>,
}

impl NuclearTerm {
    fn unit(a: f64, f_index: usize, y_index: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            a,
            f: vec![(f_index, one)],
            y: vec![(y_index, one)],
        }
    }

    fn support(&self) -> usize {
        self.f
            .iter()
            .chain(&self.y)
            .map(|(i, _)| i + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Built-in infinite families, `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// `a_k = scale ratio^k`, `f_k = e*_(k-1)`, `y_k = e_(k-1)`.
    GeometricDiagonal { ratio: f64, scale: f64 },
    /// `a_k = scale ratio^k`, `f_k = e*_(k-1)`, `y_k = e_k`: a weighted
    /// forward shift.
    WeightedShift { ratio: f64, scale: f64 },
    /// `a_k = scale k^-exponent`, diagonal.
    PowerDiagonal { exponent: f64, scale: f64 },
}

/// Upper bound for `sum_(k > n) k^-s`, `s > 1`.
fn power_tail(s: f64, n: usize) -> f64 {
    if n == 0 {
        1.0 + 1.0 / (s - 1.0)
    } else {
        (n as f64).powf(1.0 - s) / (s - 1.0)
    }
}

impl Rule {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Rule::GeometricDiagonal { ratio, scale } | Rule::WeightedShift { ratio, scale } => {
                ratio > 0.0 && ratio < 1.0 && scale > 0.0 && scale.is_finite()
            }
            Rule::PowerDiagonal { exponent, scale } => {
                exponent > 1.0 && exponent.is_finite() && scale > 0.0 && scale.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "rule parameters out of range: {self:?}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::GeometricDiagonal { .. } => "geometric_diagonal",
            Rule::WeightedShift { .. } => "weighted_shift",
            Rule::PowerDiagonal { .. } => "power_diagonal",
        }
    }

    fn params(&self) -> Value {
        match *self {
            Rule::GeometricDiagonal { ratio, scale } | Rule::WeightedShift { ratio, scale } => {
                json!({"ratio": ratio, "scale": scale})
            }
            Rule::PowerDiagonal { exponent, scale } => {
                json!({"exponent": exponent, "scale": scale})
            }
        }
    }

    fn parse(name: &str, params: &Value) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).and_then(Value::as_f64).ok_or_else(|| {
                Error::InvalidArgument(format!("rule {name} needs numeric parameter {key}"))
            })
        };
        let scale = match params.get("scale") {
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidArgument("scale must be a number".into()))?,
            None => 1.0,
        };
        let rule = match name {
            "geometric_diagonal" => Rule::GeometricDiagonal {
                ratio: get("ratio")?,
                scale,
            },
            "weighted_shift" => Rule::WeightedShift {
                ratio: get("ratio")?,
                scale,
            },
            "power_diagonal" => Rule::PowerDiagonal {
                exponent: get("exponent")?,
                scale,
            },
            other => return Err(Error::InvalidArgument(format!("unknown rule {other:?}"))),
        };
        rule.validate()?;
        Ok(rule)
    }

    fn a(&self, k: usize) -> f64 {
        match *self {
            Rule::GeometricDiagonal { ratio, scale } | Rule::WeightedShift { ratio, scale } => {
                scale * ratio.powi(k as i32)
            }
            Rule::PowerDiagonal { exponent, scale } => scale * (k as f64).powf(-exponent),
        }
    }

    fn term(&self, k: usize) -> NuclearTerm {
        match self {
            Rule::WeightedShift { .. } => NuclearTerm::unit(self.a(k), k - 1, k),
            _ => NuclearTerm::unit(self.a(k), k - 1, k - 1),
        }
    }

    /// Upper bound for `sum_(k > n) a_k^e`, or `None` if that series diverges.
    fn tail(&self, n: usize, e: f64) -> Option<f64> {
        match *self {
            Rule::GeometricDiagonal { ratio, scale } | Rule::WeightedShift { ratio, scale } => {
                let q = ratio.powf(e);
                Some(scale.powf(e) * q.powi(n as i32 + 1) / (1.0 - q))
            }
            Rule::PowerDiagonal { exponent, scale } => {
                let s = exponent * e;
                (s > 1.0).then(|| scale.powf(e) * power_tail(s, n))
            }
        }
    }

    fn a_star(&self) -> f64 {
        match self {
            Rule::PowerDiagonal { .. } => {
                let head: f64 = (1..=POWER_EXACT_TERMS).map(|k| self.a(k)).sum();
                head + self.tail(POWER_EXACT_TERMS, 1.0).expect("exponent > 1")
            }
            _ => self.tail(0, 1.0).expect("geometric"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terms {
    Finite(Vec<NuclearTerm>),
    Rule(Rule),
}

/// A nuclear representation on `l^space_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearRep {
    space_p: f64,
    terms: Terms,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RepFile {
    Terms {
        #[serde(default = "default_space")]
        space_p: SpaceExponent,
        terms: Vec<NuclearTerm>,
    },
    Rule {
        #[serde(default = "default_space")]
        space_p: SpaceExponent,
        rule: String,
        #[serde(default)]
        params: Value,
    },
}

/// `p` in `[1, inf]`; infinity is written as `"inf"`.
#[derive(Debug, Clone, Copy)]
struct SpaceExponent(f64);

fn default_space() -> SpaceExponent {
    SpaceExponent(2.0)
}

impl Serialize for SpaceExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for SpaceExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n
                .as_f64()
                .map(SpaceExponent)
                .ok_or_else(|| serde::de::Error::custom("bad exponent")),
            Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(SpaceExponent(f64::INFINITY))
            }
            other => Err(serde::de::Error::custom(format!(
                "space_p must be a number or \"inf\", got {other}"
            ))),
        }
    }
}

impl NuclearRep {
    pub fn finite(space_p: f64, terms: Vec<NuclearTerm>) -> Result<Self> {
        let rep = Self {
            space_p,
            terms: Terms::Finite(terms),
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn rule(space_p: f64, rule: Rule) -> Result<Self> {
        let rep = Self {
            space_p,
            terms: Terms::Rule(rule),
        };
        rep.validate()?;
        Ok(rep)
    }

    fn validate(&self) -> Result<()> {
        if !(self.space_p >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "space exponent must be >= 1, got {}",
                self.space_p
            )));
        }
        match &self.terms {
            Terms::Rule(rule) => rule.validate(),
            Terms::Finite(terms) => {
                let dual = dual_exponent(self.space_p);
                for (k, t) in terms.iter().enumerate() {
                    if !(t.a > 0.0 && t.a.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "term {}: a must be positive, got {}",
                            k + 1,
                            t.a
                        )));
                    }
                    let (nf, ny) = (lp_norm(&t.f, dual), lp_norm(&t.y, self.space_p));
                    if nf > 1.0 + NORM_SLACK || ny > 1.0 + NORM_SLACK {
                        return Err(Error::InvalidArgument(format!(
                            "term {}: need ||f|| <= 1 and ||y|| <= 1, got {nf} and {ny}",
                            k + 1
                        )));
                    }
                    if t.f
                        .iter()
                        .chain(&t.y)
                        .any(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
                    {
                        return Err(Error::InvalidArgument(format!(
                            "term {}: non-finite coordinate",
                            k + 1
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn space_p(&self) -> f64 {
        self.space_p
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    /// Number of terms, `None` for an infinite family.
    pub fn len(&self) -> Option<usize> {
        match &self.terms {
            Terms::Finite(t) => Some(t.len()),
            Terms::Rule(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Term `k >= 1`.
    pub fn term(&self, k: usize) -> NuclearTerm {
        match &self.terms {
            Terms::Finite(t) => t[k - 1].clone(),
            Terms::Rule(rule) => rule.term(k),
        }
    }

    /// `a* = sum_k a_k`; an upper bound on the nuclear norm.
    pub fn a_star(&self) -> f64 {
        match &self.terms {
            Terms::Finite(t) => t.iter().map(|t| t.a).sum(),
            Terms::Rule(rule) => rule.a_star(),
        }
    }

    /// Upper bound for `sum_(k > n) a_k^e`.
    fn tail(&self, n: usize, e: f64) -> Option<f64> {
        match &self.terms {
            Terms::Finite(t) => Some(t.iter().skip(n).map(|t| t.a.powf(e)).sum()),
            Terms::Rule(rule) => rule.tail(n, e),
        }
    }

    fn check_truncation(&self, k: usize) -> Result<()> {
        match self.len() {
            Some(q) if k > q => Err(Error::InvalidArgument(format!(
                "truncation {k} exceeds the {q} terms"
            ))),
            _ => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<RepFile>(text)? {
            RepFile::Terms { space_p, terms } => Self::finite(space_p.0, terms),
            RepFile::Rule {
                space_p,
                rule,
                params,
            } => Self::rule(space_p.0, Rule::parse(&rule, &params)?),
        }
    }

    pub fn to_json(&self) -> String {
        let file = match &self.terms {
            Terms::Finite(t) => RepFile::Terms {
                space_p: SpaceExponent(self.space_p),
                terms: t.clone(),
            },
            Terms::Rule(rule) => RepFile::Rule {
                space_p: SpaceExponent(self.space_p),
                rule: rule.name().into(),
                params: rule.params(),
            },
        };
        serde_json::to_string_pretty(&file).expect("rep serializes")
    }
}

/// A random finite representation on `l^space_p`: `terms` terms supported
/// on the first `support` coordinates, with `||f_k||, ||y_k||` in `[1/2, 1]`.
pub fn random_rep(terms: usize, support: usize, space_p: f64, seed: u64) -> Result<NuclearRep> {
    if support == 0 {
        return Err(Error::InvalidArgument("support must be positive".into()));
    }
    let mut rng = rng(seed);
    let dual = dual_exponent(space_p);
    let sparse = |p: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let nnz = rng.gen_range(1..=support.min(4));
        let mut v: Vec<(usize, Complex64)> = Vec::with_capacity(nnz);
        while v.len() < nnz {
            let i = rng.gen_range(0..support);
            if v.iter().all(|(j, _)| *j != i) {
                v.push((i, unit_disk(rng)));
            }
        }
        let target = rng.gen_range(0.5..=1.0) / lp_norm(&v, p).max(f64::MIN_POSITIVE);
        v.iter_mut().for_each(|(_, z)| *z *= target);
        v
    };
    let list = (0..terms)
        .map(|_| {
            let a = rng.gen_range(0.01..=1.0) * 2f64.powf(-rng.gen_range(0.0..8.0));
            let f = sparse(dual, &mut rng);
            let y = sparse(space_p, &mut rng);
            NuclearTerm { a, f, y }
        })
        .collect();
    NuclearRep::finite(space_p, list)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEstimate {
    /// `sum_(k <= K) a_k f_k(y_k)`.
    pub value: Complex64,
    /// `sum_(k > K) a_k`, which bounds the neglected part.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Trace by definition, truncated after `k` terms.
pub fn nuclear_trace(rep: &NuclearRep, k: usize) -> Result<TraceEstimate> {
    rep.check_truncation(k)?;
    let value = (1..=k)
        .map(|j| {
            let t = rep.term(j);
            pairing(&t.f, &t.y) * t.a
        })
        .sum();
    Ok(TraceEstimate {
        value,
        tail_bound: rep.tail(k, 1.0).expect("a* is finite"),
        terms: k,
    })
}

/// The `n x n` leading section `A_ij = sum_k a_k f_k(e_j) (y_k)_i`.
pub fn materialize_matrix(rep: &NuclearRep, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "section size must be positive".into(),
        ));
    }
    let count = match rep.len() {
        Some(q) => q,
        // the built-in families touch only coordinates >= k - 1 from term k on
        None => n + 1,
    };
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 1..=count {
        let t = rep.term(k);
        for &(i, yi) in t.y.iter().filter(|(i, _)| *i < n) {
            for &(j, fj) in t.f.iter().filter(|(j, _)| *j < n) {
                data[i * n + j] += fj * yi * t.a;
            }
        }
    }
    ComplexMatrix::new(n, data)
}

/// `F x = sum_k a_k^(1/2) f_k(x) e_k` and `J xi = sum_k a_k^(1/2) xi_k y_k`
/// for the first `truncation_order` terms, zero-padded to a common square
/// size `max(truncation_order, section_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationPair {
    pub f_matrix: ComplexMatrix,
    pub j_matrix: ComplexMatrix,
    pub truncation_order: usize,
    /// Coordinates touched by the retained terms.
    pub section_dim: usize,
    /// `a*` of the whole representation.
    pub a_star: f64,
    pub space_p: f64,
}

impl FactorizationPair {
    /// `(||F||_op, ||J||_op)` in the Euclidean norm on the section.
    pub fn op_norms(&self) -> Result<(f64, f64)> {
        Ok((self.f_matrix.op_norm()?, self.j_matrix.op_norm()?))
    }
}

pub fn factorize(rep: &NuclearRep, k: usize) -> Result<FactorizationPair> {
    rep.check_truncation(k)?;
    if k == 0 {
        return Err(Error::InvalidArgument("truncation must be positive".into()));
    }
    let terms: Vec<NuclearTerm> = (1..=k).map(|j| rep.term(j)).collect();
    let section_dim = terms
        .iter()
        .map(NuclearTerm::support)
        .max()
        .unwrap_or(0)
        .max(1);
    let n = k.max(section_dim);
    let zero = Complex64::new(0.0, 0.0);
    let mut f = vec![zero; n * n];
    let mut jm = vec![zero; n * n];
    for (m, t) in terms.iter().enumerate() {
        let w = t.a.sqrt();
        for &(j, fj) in &t.f {
            f[m * n + j] += fj * w;
        }
        for &(i, yi) in &t.y {
            jm[i * n + m] += yi * w;
        }
    }
    Ok(FactorizationPair {
        f_matrix: ComplexMatrix::new(n, f)?,
        j_matrix: ComplexMatrix::new(n, jm)?,
        truncation_order: k,
        section_dim,
        a_star: rep.a_star(),
        space_p: rep.space_p(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FjGram {
    /// `FJ`, with `FJ[m][k] = a_k^(1/2) a_m^(1/2) f_m(y_k)`.
    pub matrix: ComplexMatrix,
    pub s2: f64,
    pub a_star: f64,
}

/// `FJ` and the certificate `s2(FJ) <= a* (1 + 1e-9)`.
pub fn fj_gram(pair: &FactorizationPair) -> Result<FjGram> {
    let matrix = pair.f_matrix.matmul(&pair.j_matrix);
    let s2 = matrix.frobenius_norm();
    if s2 > pair.a_star * (1.0 + 1e-9) {
        return Err(Error::HsBoundViolation {
            s2,
            a_star: pair.a_star,
        });
    }
    Ok(FjGram {
        matrix,
        s2,
        a_star: pair.a_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoThirds {
    /// `sum_(k <= K) a_k^(2/3)`.
    pub partial_sum: f64,
    /// Upper bound for the rest of the series; `None` if it diverges.
    pub tail_estimate: Option<f64>,
    pub holds: bool,
}

/// Whether `sum_k a_k^(2/3)` converges, with the truncated sum.
pub fn two_thirds_check(rep: &NuclearRep, k: usize) -> Result<TwoThirds> {
    rep.check_truncation(k)?;
    let e = 2.0 / 3.0;
    let partial_sum = (1..=k).map(|j| rep.term(j).a.powf(e)).sum();
    let tail_estimate = rep.tail(k, e);
    Ok(TwoThirds {
        partial_sum,
        tail_estimate,
        holds: tail_estimate.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTraceReport {
    pub n: u32,
    pub dim: usize,
    /// `Trace A_N^n`.
    pub trace_power: Complex64,
    /// `sum_i lambda_i(A_N)^n`.
    pub eigen_power_sum: Complex64,
    pub eigen_delta: f64,
    /// `Trace A_(2N)^n`.
    pub trace_power_doubled: Complex64,
    pub truncation_delta: f64,
    /// `sum_(k > N) a_k`.
    pub tail_sum: f64,
    /// Smallest power for which the infinite-dimensional argument via the
    /// 2/3 condition gives absolutely summable eigenvalues.
    pub power_threshold: u32,
    /// The sharper threshold available from finer eigenvalue estimates.
    pub refined_threshold: u32,
}

/// Compares `Trace A_N^n` with the eigenvalue power sum of `A_N`, and with
/// the trace on the section of size `2N`.
pub fn power_trace_consistency(rep: &NuclearRep, n: u32, size: usize) -> Result<PowerTraceReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be positive".into()));
    }
    let a = materialize_matrix(rep, size)?;
    let trace_power = a.power(n as u64)?.trace();
    let eigen_power_sum: Complex64 = eigen_full(&a)?.iter().map(|z| z.powu(n)).sum();
    let trace_power_doubled = materialize_matrix(rep, 2 * size)?.power(n as u64)?.trace();
    let tail_sum = match rep.len() {
        Some(q) => rep.tail(size.min(q), 1.0),
        None => rep.tail(size, 1.0),
    }
    .expect("a* is finite");
    Ok(PowerTraceReport {
        n,
        dim: size,
        trace_power,
        eigen_power_sum,
        eigen_delta: (trace_power - eigen_power_sum).norm(),
        trace_power_doubled,
        truncation_delta: (trace_power - trace_power_doubled).norm(),
        tail_sum,
        power_threshold: 4,
        refined_threshold: 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_rank_one(f: usize, y: usize) -> NuclearRep {
        NuclearRep::finite(2.0, vec![NuclearTerm::unit(1.0, f, y)]).unwrap()
    }

    fn geometric() -> NuclearRep {
        NuclearRep::rule(
            2.0,
            Rule::GeometricDiagonal {
                ratio: 0.5,
                scale: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn traces_of_small_reps() {
        let t = nuclear_trace(&unit_rank_one(0, 0), 1).unwrap();
        assert_eq!(t.value, c(1.0, 0.0));
        assert_eq!(t.tail_bound, 0.0);
        assert_eq!(
            nuclear_trace(&unit_rank_one(0, 1), 1).unwrap().value,
            c(0.0, 0.0)
        );
        assert!(nuclear_trace(&unit_rank_one(0, 0), 2).is_err());
    }

    #[test]
    fn geometric_trace_and_tail() {
        let t = nuclear_trace(&geometric(), 20).unwrap();
        // oracle: partial geometric sum 1 - 2^-20, tail 2^-20
        let partial: f64 = (1..=20).map(|k| 0.5f64.powi(k)).sum();
        assert!((t.value.re - partial).abs() < 1e-15);
        assert!((t.value.re - 1.0).abs() <= t.tail_bound + 1e-15);
        assert!((t.tail_bound - 2f64.powi(-20)).abs() < 1e-20);
        assert!((geometric().a_star() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sections() {
        let a = materialize_matrix(&unit_rank_one(0, 0), 3).unwrap();
        assert_eq!(a, ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]).unwrap());
        let a = materialize_matrix(&geometric(), 4).unwrap();
        assert_eq!(
            a,
            ComplexMatrix::from_real_diag(&[0.5, 0.25, 0.125, 0.0625]).unwrap()
        );
        let shift = NuclearRep::rule(
            2.0,
            Rule::WeightedShift {
                ratio: 0.5,
                scale: 1.0,
            },
        )
        .unwrap();
        let a = materialize_matrix(&shift, 3).unwrap();
        assert_eq!(a[(1, 0)], c(0.5, 0.0));
        assert_eq!(a[(2, 1)], c(0.25, 0.0));
        assert_eq!(a.trace(), c(0.0, 0.0));
        assert!(materialize_matrix(&shift, 0).is_err());
    }

    #[test]
    fn section_trace_matches_definition() {
        for seed in 0..20 {
            let rep = random_rep(6, 5, 2.0, seed).unwrap();
            let t = nuclear_trace(&rep, 6).unwrap();
            let a = materialize_matrix(&rep, 5).unwrap();
            assert!((a.trace() - t.value).norm() < 1e-14);
        }
    }

    #[test]
    fn factorization_of_rank_one_and_diagonal() {
        let pair = factorize(&unit_rank_one(0, 0), 1).unwrap();
        assert_eq!(
            pair.f_matrix,
            ComplexMatrix::from_real_diag(&[1.0]).unwrap()
        );
        assert_eq!(pair.j_matrix, pair.f_matrix);
        let g = fj_gram(&pair).unwrap();
        assert_eq!(g.s2, 1.0);
        assert_eq!(g.a_star, 1.0);

        let pair = factorize(&geometric(), 10).unwrap();
        let jf = pair.j_matrix.matmul(&pair.f_matrix);
        assert!(jf.max_abs_diff(&materialize_matrix(&geometric(), 10).unwrap()) < 1e-15);
        let g = fj_gram(&pair).unwrap();
        // closed form sqrt(sum 4^-k) for k <= 10
        let want = (1..=10).map(|k| 4f64.powi(-k)).sum::<f64>().sqrt();
        assert!((g.s2 - want).abs() < 1e-15);
        assert!(g.s2 < 1.0);
    }

    #[test]
    fn shift_factorization_matches_section() {
        let shift = NuclearRep::rule(
            2.0,
            Rule::WeightedShift {
                ratio: 0.7,
                scale: 2.0,
            },
        )
        .unwrap();
        let pair = factorize(&shift, 8).unwrap();
        assert_eq!(pair.section_dim, 9);
        let jf = pair.j_matrix.matmul(&pair.f_matrix);
        assert!(jf.max_abs_diff(&materialize_matrix(&shift, 9).unwrap()) < 1e-15);
    }

    #[test]
    fn gram_entries_follow_the_pairing() {
        let rep = random_rep(7, 6, 2.0, 3).unwrap();
        let pair = factorize(&rep, 7).unwrap();
        let g = fj_gram(&pair).unwrap();
        for m in 1..=7 {
            for k in 1..=7 {
                let (tm, tk) = (rep.term(m), rep.term(k));
                let want = pairing(&tm.f, &tk.y) * (tm.a * tk.a).sqrt();
                assert!((g.matrix[(m - 1, k - 1)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hs_violation_is_reported() {
        let mut pair = factorize(&unit_rank_one(0, 0), 1).unwrap();
        pair.a_star = 0.5;
        assert!(matches!(
            fj_gram(&pair),
            Err(Error::HsBoundViolation { .. })
        ));
    }

    #[test]
    fn two_thirds_examples() {
        let g = two_thirds_check(&geometric(), 60).unwrap();
        let limit = 1.0 / (2f64.powf(2.0 / 3.0) - 1.0);
        assert!(g.holds);
        assert!((g.partial_sum - limit).abs() < 1e-10);
        assert!(g.partial_sum + g.tail_estimate.unwrap() >= limit - 1e-12);

        let p2 = NuclearRep::rule(
            2.0,
            Rule::PowerDiagonal {
                exponent: 2.0,
                scale: 1.0,
            },
        )
        .unwrap();
        let t = two_thirds_check(&p2, 1000).unwrap();
        assert!(t.holds);
        // the p-series with exponent 4/3 sums to zeta(4/3) ~ 3.6009
        let total = t.partial_sum + t.tail_estimate.unwrap();
        assert!(t.partial_sum < 3.6010 && total > 3.6009);

        let p_slow = NuclearRep::rule(
            2.0,
            Rule::PowerDiagonal {
                exponent: 1.2,
                scale: 1.0,
            },
        )
        .unwrap();
        assert!(!two_thirds_check(&p_slow, 100).unwrap().holds);

        let finite = random_rep(5, 4, 2.0, 1).unwrap();
        let t = two_thirds_check(&finite, 5).unwrap();
        assert!(t.holds);
        assert_eq!(t.tail_estimate, Some(0.0));
    }

    #[test]
    fn power_traces() {
        let d = power_trace_consistency(&geometric(), 3, 6).unwrap();
        assert!(d.eigen_delta < 1e-15);
        let rep = random_rep(5, 16, 2.0, 9).unwrap();
        let r = power_trace_consistency(&rep, 4, 16).unwrap();
        assert!(r.eigen_delta < 1e-10);
        assert!(r.truncation_delta < 1e-10);

        let shift = NuclearRep::rule(
            2.0,
            Rule::WeightedShift {
                ratio: 1.0 / 3.0,
                scale: 1.0,
            },
        )
        .unwrap();
        let r = power_trace_consistency(&shift, 4, 8).unwrap();
        assert!(r.truncation_delta <= r.tail_sum);
        assert_eq!(r.power_threshold, 4);
    }

    #[test]
    fn json_round_trip() {
        let rep = random_rep(4, 5, 3.0, 2).unwrap();
        assert_eq!(NuclearRep::from_json(&rep.to_json()).unwrap(), rep);
        let g =
            NuclearRep::from_json(r#"{"rule": "geometric_diagonal", "params": {"ratio": 0.5}}"#)
                .unwrap();
        assert_eq!(g, geometric());
        assert_eq!(NuclearRep::from_json(&g.to_json()).unwrap(), g);
        let text = r#"{"space_p": "inf", "terms": [{"a": 1.0, "f": [[0, 1.0, 0.0]], "y": [[1, 0.0, 1.0]]}]}"#;
        let rep = NuclearRep::from_json(text).unwrap();
        assert!(rep.space_p().is_infinite());
        assert_eq!(rep.term(1).y, vec![(1, c(0.0, 1.0))]);
        assert!(rep.to_json().contains("\"inf\""));
    }

    #[test]
    fn rejects_invalid_reps() {
        assert!(NuclearRep::finite(2.0, vec![NuclearTerm::unit(0.0, 0, 0)]).is_err());
        let big = NuclearTerm {
            a: 1.0,
            f: vec![(0, c(2.0, 0.0))],
            y: vec![(0, c(1.0, 0.0))],
        };
        assert!(NuclearRep::finite(2.0, vec![big]).is_err());
        // in l^1 the functional lives in l^inf, so (1, 1) is admissible there only
        let flat = NuclearTerm {
            a: 1.0,
            f: vec![(0, c(1.0, 0.0)), (1, c(1.0, 0.0))],
            y: vec![(0, c(1.0, 0.0))],
        };
        assert!(NuclearRep::finite(1.0, vec![flat.clone()]).is_ok());
        assert!(NuclearRep::finite(2.0, vec![flat]).is_err());
        assert!(
            NuclearRep::from_json(r#"{"rule": "weighted_shift", "params": {"ratio": 1.5}}"#)
                .is_err()
        );
        assert!(NuclearRep::from_json(r#"{"rule": "nope", "params": {}}"#).is_err());
        assert!(NuclearRep::finite(0.5, vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn nuclear_bounds_hold(seed in any::<u64>(), k in 1usize..=24, support in 1usize..=12) {
            let rep = random_rep(k, support, 2.0, seed).unwrap();
            let a_star = rep.a_star();
            prop_assert!(nuclear_trace(&rep, k).unwrap().value.norm() <= a_star * (1.0 + 1e-12));
            let pair = factorize(&rep, k).unwrap();
            let g = fj_gram(&pair).unwrap();
            prop_assert!(g.s2 <= a_star * (1.0 + 1e-9));
            let (nf, nj) = pair.op_norms().unwrap();
            prop_assert!(nf <= a_star.sqrt() * (1.0 + 1e-9) && nj <= a_star.sqrt() * (1.0 + 1e-9));
            let jf = pair.j_matrix.matmul(&pair.f_matrix);
            let section = materialize_matrix(&rep, jf.dim()).unwrap();
            prop_assert!(jf.max_abs_diff(&section) <= 1e-12 * section.max_abs().max(f64::MIN_POSITIVE));
        }
    }
}
