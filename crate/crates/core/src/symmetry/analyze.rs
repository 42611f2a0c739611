use serde::Serialize;

use super::orbit::{partition_orbits, spectral_symmetry_check, Orbit};
use super::trace::{PowerScan, TraceCheck, TraceConfig, TraceEntry};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::par::Execution;
use crate::spectrum::{default_cluster_tol, DistinctSpectrum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeConfig {
    /// Defaults to `dim * 1e-8 * max(1, ||A||_op)`.
    pub cluster_tol: Option<f64>,
    pub rel_tol: f64,
    pub floor: f64,
    pub n_min: usize,
    /// Defaults to `d * dim`.
    pub n_max: Option<usize>,
    pub execution: Execution,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        let t = TraceConfig::default();
        Self {
            cluster_tol: None,
            rel_tol: t.rel_tol,
            floor: t.floor,
            n_min: t.n_min,
            n_max: t.n_max,
            execution: t.execution,
        }
    }
}

impl AnalyzeConfig {
    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            n_min: self.n_min,
            n_max: self.n_max,
            rel_tol: self.rel_tol,
            floor: self.floor,
            execution: self.execution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub cluster_tol: f64,
    pub rel_tol: f64,
    pub floor: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Operator norm the matrix was divided by before taking powers; the
    /// trace columns are in those rescaled units.
    pub scale: f64,
}

/// Both symmetry criteria for one `d`, with their diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub d: usize,
    pub spectral_verdict: bool,
    pub trace_verdict: bool,
    pub marginal: bool,
    pub orbits: Vec<Orbit>,
    pub traces: Vec<TraceEntry>,
    pub tolerances: Tolerances,
    /// Largest `|Trace A^n| / ||A^n||_S1` over the checked exponents.
    #[serde(skip)]
    pub max_trace_ratio: f64,
}

impl SymmetryReport {
    pub fn verdicts_agree(&self) -> bool {
        self.spectral_verdict == self.trace_verdict
    }

    fn assemble(
        spectrum: &DistinctSpectrum,
        check: TraceCheck,
        config: &AnalyzeConfig,
    ) -> Result<Self> {
        let partition = partition_orbits(spectrum, check.d)?;
        Ok(Self {
            d: check.d,
            spectral_verdict: spectral_symmetry_check(&partition),
            trace_verdict: check.verdict,
            marginal: check.marginal,
            orbits: partition.orbits,
            tolerances: Tolerances {
                cluster_tol: spectrum.cluster_tol(),
                rel_tol: config.rel_tol,
                floor: config.floor,
                n_min: check.n_min,
                n_max: check.n_max,
                scale: check.scale,
            },
            max_trace_ratio: check.max_ratio,
            traces: check.entries,
        })
    }
}

/// Decides `Z_d` symmetry of the spectrum of `a` from its eigenvalue
/// multiplicities and, independently, from the traces of its powers.
pub fn analyze(a: &ComplexMatrix, d: usize, config: &AnalyzeConfig) -> Result<SymmetryReport> {
    analyze_scan(a, &[d], config).map(|mut v| v.remove(0))
}

/// [`analyze`] for several rotation orders, sharing one eigenvalue
/// computation and one power scan.
pub fn analyze_scan(
    a: &ComplexMatrix,
    ds: &[usize],
    config: &AnalyzeConfig,
) -> Result<Vec<SymmetryReport>> {
    if ds.is_empty() {
        return Err(Error::InvalidArgument("no rotation order given".into()));
    }
    if let Some(&d) = ds.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "d must be at least 2, got {d}"
        )));
    }
    if let Some(t) = config.cluster_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cluster tolerance must be positive, got {t}"
            )));
        }
    }
    if !(config.rel_tol > 0.0 && config.rel_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance must be positive, got {}",
            config.rel_tol
        )));
    }
    let dim = a.dim();
    let tc = config.trace_config();
    let n_max_all = ds
        .iter()
        .map(|&d| tc.resolved_n_max(d, dim))
        .max()
        .unwrap_or(1);
    let scan = PowerScan::compute(
        a,
        config.n_min,
        n_max_all.max(config.n_min),
        |n| ds.iter().any(|&d| n % d != 0),
        config.execution,
    )?;

    let tol = match config.cluster_tol {
        Some(t) => t,
        None => default_cluster_tol(a)?,
    };
    let spectrum = DistinctSpectrum::of_matrix(a, Some(tol))?;

    ds.iter()
        .map(|&d| {
            let n_max = tc.resolved_n_max(d, dim);
            if n_max < config.n_min {
                return Err(Error::InvalidArgument(format!(
                    "need n_min <= n_max, got {}..{n_max}",
                    config.n_min
                )));
            }
            let check = scan.check(d, config.n_min, n_max, config.rel_tol, config.floor);
            SymmetryReport::assemble(&spectrum, check, config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn symmetric_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let r = analyze(&a, 2, &AnalyzeConfig::default()).unwrap();
        assert!(r.spectral_verdict && r.trace_verdict);
        assert!(!r.marginal);
        assert_eq!(r.orbits.len(), 2);
    }

    #[test]
    fn broken_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0, 2.0]).unwrap();
        let r = analyze(&a, 2, &AnalyzeConfig::default()).unwrap();
        assert!(!r.spectral_verdict && !r.trace_verdict);
    }

    #[test]
    fn report_json_has_exact_fields() {
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0]).unwrap();
        let r = analyze(&a, 2, &AnalyzeConfig::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "d",
                "marginal",
                "orbits",
                "spectral_verdict",
                "tolerances",
                "trace_verdict",
                "traces"
            ]
        );
        let orbit = v["orbits"][0].as_object().unwrap();
        assert!(
            orbit.contains_key("re")
                && orbit.contains_key("im")
                && orbit.contains_key("multiplicities")
        );
        let entry = v["traces"][0].as_object().unwrap();
        assert_eq!(entry.len(), 3);
        assert!(
            entry.contains_key("n")
                && entry.contains_key("abs_trace")
                && entry.contains_key("normalizer")
        );
    }

    #[test]
    fn scan_matches_single_runs() {
        // fourth roots of unity, twice: symmetric for d in {2, 4} only
        let w: Vec<Complex64> = (0..4)
            .map(|k| super::super::root_of_unity(4, k) * 0.7)
            .collect();
        let a = ComplexMatrix::from_diag(&[w.clone(), w].concat()).unwrap();
        let cfg = AnalyzeConfig::default();
        let scan = analyze_scan(&a, &[2, 3, 4, 5, 6], &cfg).unwrap();
        let verdicts: Vec<(bool, bool)> = scan
            .iter()
            .map(|r| (r.spectral_verdict, r.trace_verdict))
            .collect();
        assert_eq!(
            verdicts,
            [
                (true, true),
                (false, false),
                (true, true),
                (false, false),
                (false, false)
            ]
        );
        for r in &scan {
            let single = analyze(&a, r.d, &cfg).unwrap();
            assert_eq!(single.spectral_verdict, r.spectral_verdict);
            assert_eq!(single.trace_verdict, r.trace_verdict);
            assert_eq!(single.traces.len(), r.traces.len());
        }
    }

    #[test]
    fn rejects_bad_config() {
        let a = ComplexMatrix::identity(2);
        let bad = AnalyzeConfig {
            rel_tol: 0.0,
            ..AnalyzeConfig::default()
        };
        assert!(analyze(&a, 2, &bad).is_err());
        assert!(analyze(&a, 1, &AnalyzeConfig::default()).is_err());
    }
}
