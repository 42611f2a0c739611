//! Verification campaign: generate labelled cases, run both symmetry
//! criteria on each, and cross-check one Riesz projection rank per case.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::generators::{
    gen_broken, gen_dcyclic, gen_prescribed, random_symmetric_spectrum, rng, TestCase,
};
use crate::par::Execution;
use crate::riesz::{riesz_projection, QuadratureConfig};
use crate::spectrum::{default_cluster_tol, DistinctSpectrum};
use crate::symmetry::{analyze, AnalyzeConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    pub count: usize,
    pub seed: u64,
    /// Every `broken_every`-th case is a deliberately unbalanced one; `0`
    /// disables them.
    pub broken_every: usize,
    pub cond_cap: f64,
    pub analyze: AnalyzeConfig,
    pub quadrature: QuadratureConfig,
    /// Policy across cases.
    pub execution: Execution,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 0,
            broken_every: 4,
            cond_cap: 10.0,
            analyze: AnalyzeConfig {
                execution: Execution::Sequential,
                ..AnalyzeConfig::default()
            },
            quadrature: QuadratureConfig {
                execution: Execution::Sequential,
                ..QuadratureConfig::default()
            },
            execution: Execution::default(),
        }
    }
}

fn case_seed(seed: u64, id: usize) -> u64 {
    seed.wrapping_mul(0x2545_f491_4f6c_dd1d)
        .wrapping_add(id as u64)
}

/// Case `id` of the campaign: cycles `d` through `2..=6` and alternates
/// d-cyclic block matrices with disguised symmetric Jordan matrices,
/// replacing every `broken_every`-th case by an unbalanced one.
pub fn campaign_case(id: usize, config: &CampaignConfig) -> Result<TestCase> {
    let seed = case_seed(config.seed, id);
    let d = 2 + id % 5;
    let mut r = rng(seed);
    let orbits = r.gen_range(1..=3);
    if config.broken_every > 0 && id % config.broken_every == config.broken_every - 1 {
        gen_broken(d, orbits, seed, config.cond_cap)
    } else if id.is_multiple_of(2) {
        gen_dcyclic(d, r.gen_range(1..=(24 / d).min(4)), seed)
    } else {
        let spectrum = random_symmetric_spectrum(d, orbits, 2, &mut r);
        gen_prescribed(&spectrum, d, seed, config.cond_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub id: usize,
    pub family: String,
    pub d: usize,
    pub dim: usize,
    pub seed: u64,
    pub ground_truth: Option<bool>,
    pub spectral_verdict: bool,
    pub trace_verdict: bool,
    pub marginal: bool,
    /// Largest `|Trace A^n| / ||A^n||_S1` over `n` not divisible by `d`.
    pub max_trace_ratio: f64,
    /// Eigenvalue of largest modulus whose projection rank was checked.
    pub rank_at_re: f64,
    pub rank_at_im: f64,
    pub projection_rank: Option<usize>,
    pub multiplicity: usize,
    pub rank_agrees: bool,
    /// Analyzer or quadrature failure, if any.
    pub error: Option<String>,
}

impl CaseResult {
    /// Verdicts agree with each other and with the label, when there is one.
    pub fn verdicts_consistent(&self) -> bool {
        self.error.is_none()
            && self.spectral_verdict == self.trace_verdict
            && self.ground_truth.is_none_or(|g| g == self.spectral_verdict)
    }
}

/// Runs both criteria and the rank check on one case.
pub fn run_case(id: usize, tc: &TestCase, config: &CampaignConfig) -> CaseResult {
    let mut out = CaseResult {
        id,
        family: tc.meta.family.clone(),
        d: tc.meta.d,
        dim: tc.matrix.dim(),
        seed: tc.meta.seed,
        ground_truth: tc.meta.ground_truth,
        spectral_verdict: false,
        trace_verdict: false,
        marginal: false,
        max_trace_ratio: f64::NAN,
        rank_at_re: f64::NAN,
        rank_at_im: f64::NAN,
        projection_rank: None,
        multiplicity: 0,
        rank_agrees: false,
        error: None,
    };
    if let Err(e) = fill_case(tc, config, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

fn fill_case(tc: &TestCase, config: &CampaignConfig, out: &mut CaseResult) -> Result<()> {
    let report = analyze(&tc.matrix, tc.meta.d, &config.analyze)?;
    out.spectral_verdict = report.spectral_verdict;
    out.trace_verdict = report.trace_verdict;
    out.marginal = report.marginal;
    out.max_trace_ratio = report.max_trace_ratio;

    let tol = match config.analyze.cluster_tol {
        Some(t) => t,
        None => default_cluster_tol(&tc.matrix)?,
    };
    let spectrum = DistinctSpectrum::of_matrix(&tc.matrix, Some(tol))?;
    let Some(top) = spectrum
        .nonzero_points()
        .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
    else {
        out.rank_agrees = true;
        return Ok(());
    };
    let alpha: Complex64 = top.value;
    out.rank_at_re = alpha.re;
    out.rank_at_im = alpha.im;
    out.multiplicity = top.multiplicity;
    let p = riesz_projection(&tc.matrix, &spectrum, alpha, &config.quadrature)?;
    out.projection_rank = Some(p.rank);
    out.rank_agrees = p.rank == top.multiplicity;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub cases: usize,
    pub labelled: usize,
    /// Labelled cases whose verdicts disagree with each other or the label.
    pub disagreements: usize,
    pub unlabelled_disagreements: usize,
    pub rank_agreements: usize,
    pub errors: usize,
    /// Largest trace ratio over the cases labelled symmetric.
    pub max_symmetric_trace_ratio: f64,
    /// Smallest trace ratio over the cases labelled asymmetric.
    pub min_broken_trace_ratio: f64,
}

impl CampaignSummary {
    pub fn of(results: &[CaseResult]) -> Self {
        let labelled: Vec<&CaseResult> = results
            .iter()
            .filter(|r| r.ground_truth.is_some())
            .collect();
        let ratios = |truth: bool| {
            labelled
                .iter()
                .filter(move |r| r.ground_truth == Some(truth) && r.error.is_none())
                .map(|r| r.max_trace_ratio)
        };
        Self {
            cases: results.len(),
            labelled: labelled.len(),
            disagreements: labelled.iter().filter(|r| !r.verdicts_consistent()).count(),
            unlabelled_disagreements: results
                .iter()
                .filter(|r| r.ground_truth.is_none() && !r.verdicts_consistent())
                .count(),
            rank_agreements: results.iter().filter(|r| r.rank_agrees).count(),
            errors: results.iter().filter(|r| r.error.is_some()).count(),
            max_symmetric_trace_ratio: ratios(true).fold(0.0, f64::max),
            min_broken_trace_ratio: ratios(false).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn passed(&self) -> bool {
        self.disagreements == 0
    }
}

/// Generates and checks `config.count` cases; results are sorted by id.
pub fn run_campaign(config: &CampaignConfig) -> Result<(Vec<CaseResult>, CampaignSummary)> {
    let cases: Vec<TestCase> = (0..config.count)
        .map(|id| campaign_case(id, config))
        .collect::<Result<_>>()?;
    let results = config
        .execution
        .map_range(0..cases.len(), |id| run_case(id, &cases[id], config));
    let summary = CampaignSummary::of(&results);
    Ok((results, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaign_is_clean() {
        let cfg = CampaignConfig {
            count: 24,
            seed: 5,
            ..CampaignConfig::default()
        };
        let (results, summary) = run_campaign(&cfg).unwrap();
        assert_eq!(results.len(), 24);
        assert!(results.windows(2).all(|w| w[0].id < w[1].id));
        assert!(summary.passed(), "{summary:?}");
        assert_eq!(summary.errors, 0);
        assert_eq!(summary.rank_agreements, 24);
        for r in &results {
            assert_eq!(r.trace_verdict, r.ground_truth.unwrap(), "{r:?}");
        }
        assert_eq!(results.iter().filter(|r| r.family == "broken").count(), 6);
    }

    #[test]
    fn policies_agree() {
        let base = CampaignConfig {
            count: 6,
            seed: 1,
            ..CampaignConfig::default()
        };
        let seq = run_campaign(&CampaignConfig {
            execution: Execution::Sequential,
            ..base
        })
        .unwrap();
        let par = run_campaign(&CampaignConfig {
            execution: Execution::Parallel,
            ..base
        })
        .unwrap();
        assert_eq!(seq.0, par.0);
    }

    #[test]
    fn summary_counts_disagreements() {
        let cfg = CampaignConfig {
            count: 4,
            ..CampaignConfig::default()
        };
        let (mut results, _) = run_campaign(&cfg).unwrap();
        results[0].trace_verdict = !results[0].trace_verdict;
        let s = CampaignSummary::of(&results);
        assert_eq!(s.disagreements, 1);
        assert!(!s.passed());
    }
}
