use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::par::Execution;

/// Settings for the trace-vanishing test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    pub n_min: usize,
    /// Defaults to `d * dim`.
    pub n_max: Option<usize>,
    pub rel_tol: f64,
    /// Absolute roundoff allowance per unit of `n * dim`, in units where the
    /// matrix has operator norm one.
    pub floor: f64,
    pub execution: Execution,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: None,
            rel_tol: 1e-8,
            floor: 1e-14,
            execution: Execution::default(),
        }
    }
}

impl TraceConfig {
    pub fn resolved_n_max(&self, d: usize, dim: usize) -> usize {
        self.n_max.unwrap_or(d * dim)
    }
}

/// `|Trace B^n|` and the trace norm of the computed `B^n`, where
/// `B = A / ||A||_op`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    pub abs_trace: f64,
    pub normalizer: f64,
    /// `|Trace B^n| / ||B^n||_S1`; zero when the power vanishes.
    #[serde(skip)]
    pub ratio: f64,
    #[serde(skip)]
    pub vanishes: bool,
    #[serde(skip)]
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheck {
    pub d: usize,
    pub verdict: bool,
    pub marginal: bool,
    pub entries: Vec<TraceEntry>,
    /// `||A||_op`, the factor the matrix was divided by.
    pub scale: f64,
    pub max_ratio: f64,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone)]
struct ScanPoint {
    n: usize,
    /// Trace and trace norm of `B^n * exp(-log_factor)`.
    trace: Complex64,
    s1: f64,
    log_factor: f64,
}

/// Traces and trace norms of the powers `B^n`, `n_min <= n <= n_max`, of the
/// norm-one rescaling `B` of a matrix, shared between several `d`.
///
/// Powers are accumulated one multiplication at a time and renormalized
/// whenever they get small, so that long scans of strongly contracting
/// matrices neither underflow nor lose the relative size of trace and
/// trace norm.
#[derive(Debug, Clone)]
pub struct PowerScan {
    dim: usize,
    scale: f64,
    points: Vec<ScanPoint>,
}

const RENORMALIZE_BELOW: f64 = 1e-8;

impl PowerScan {
    /// Scans every `n` in `n_min..=n_max` for which `wanted(n)` holds.
    pub fn compute(
        a: &ComplexMatrix,
        n_min: usize,
        n_max: usize,
        wanted: impl Fn(usize) -> bool,
        execution: Execution,
    ) -> Result<Self> {
        if n_min == 0 || n_min > n_max {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n_min <= n_max, got {n_min}..{n_max}"
            )));
        }
        let dim = a.dim();
        let scale = a.op_norm()?;
        if scale == 0.0 {
            let points = (n_min..=n_max)
                .filter(|&n| wanted(n))
                .map(|n| ScanPoint {
                    n,
                    trace: Complex64::new(0.0, 0.0),
                    s1: 0.0,
                    log_factor: 0.0,
                })
                .collect();
            return Ok(Self { dim, scale, points });
        }
        let b = a.scale(Complex64::new(1.0 / scale, 0.0));

        let mut powers: Vec<(usize, ComplexMatrix, f64)> = Vec::new();
        let mut p = ComplexMatrix::identity(dim);
        let mut log_factor = 0.0;
        for n in 1..=n_max {
            p = p.matmul(&b);
            let m = p.max_abs();
            if m > 0.0 && m < RENORMALIZE_BELOW {
                p = p.scale(Complex64::new(1.0 / m, 0.0));
                log_factor += m.ln();
            }
            if n >= n_min && wanted(n) {
                powers.push((n, p.clone(), log_factor));
            }
        }

        let norms = execution.map(&powers, |(_, pw, _)| pw.schatten_norms().map(|s| s.s1));
        let points = powers
            .iter()
            .zip(norms)
            .map(|((n, pw, lf), s1)| {
                Ok(ScanPoint {
                    n: *n,
                    trace: pw.trace(),
                    s1: s1?,
                    log_factor: *lf,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, scale, points })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Applies the vanishing test for rotation order `d` to the scanned
    /// exponents in `n_min..=n_max` that are not multiples of `d`.
    ///
    /// `Trace B^n` counts as zero when it is at most
    /// `rel_tol * ||B^n||_S1 + floor * n * dim`; the second term covers the
    /// roundoff of forming `B^n` with `||B||_op = 1`.
    pub fn check(
        &self,
        d: usize,
        n_min: usize,
        n_max: usize,
        rel_tol: f64,
        floor: f64,
    ) -> TraceCheck {
        let mut entries = Vec::new();
        for pt in self
            .points
            .iter()
            .filter(|p| p.n % d != 0 && p.n >= n_min && p.n <= n_max)
        {
            let factor = pt.log_factor.exp();
            let allowance = floor * (pt.n * self.dim) as f64;
            let threshold = rel_tol * pt.s1 + allowance / factor;
            let tau = pt.trace.norm();
            let ratio = if pt.s1 > 0.0 { tau / pt.s1 } else { 0.0 };
            entries.push(TraceEntry {
                n: pt.n,
                abs_trace: tau * factor,
                normalizer: pt.s1 * factor,
                ratio,
                vanishes: tau <= threshold,
                marginal: tau >= 0.1 * threshold && tau <= 10.0 * threshold,
            });
        }
        TraceCheck {
            d,
            verdict: entries.iter().all(|e| e.vanishes),
            marginal: entries.iter().any(|e| e.marginal),
            max_ratio: entries.iter().map(|e| e.ratio).fold(0.0, f64::max),
            entries,
            scale: self.scale,
            n_min,
            n_max,
        }
    }
}

/// Whether `Trace A^n` vanishes for every `n` in the configured range with
/// `n mod d != 0`.
///
/// The matrix is first divided by its operator norm, so every power stays
/// bounded; rotation symmetry of the spectrum is unaffected by scaling.
pub fn trace_symmetry_check(
    a: &ComplexMatrix,
    d: usize,
    config: &TraceConfig,
) -> Result<TraceCheck> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let n_max = config.resolved_n_max(d, a.dim());
    let scan = PowerScan::compute(a, config.n_min, n_max, |n| n % d != 0, config.execution)?;
    Ok(scan.check(d, config.n_min, n_max, config.rel_tol, config.floor))
}
