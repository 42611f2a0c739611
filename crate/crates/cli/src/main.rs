//! `zdsym`: batch front end for the rotational spectral symmetry checks.
//!
//! Exit codes: 0 when the two criteria agree (or the command succeeded),
//! 2 when they disagree somewhere, 1 on any error.

mod output;

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use zdsym::campaign::{campaign_case, run_campaign, CampaignConfig};
use zdsym::generators::{
    gen_broken, gen_dcyclic, gen_prescribed, random_symmetric_spectrum, rng, TestCase,
};
use zdsym::riesz::{remainder_bound_certificate, QuadratureConfig};
use zdsym::symmetry::{analyze_scan, AnalyzeConfig};
use zdsym::{ComplexMatrix, DistinctSpectrum, Execution};

use output::{write_atomic, OutputTarget};

#[derive(Debug, Parser)]
#[command(
    name = "zdsym",
    version,
    about = "Rotational (Z_d) symmetry of matrix spectra: eigenvalue and trace criteria"
)]
struct Cli {
    /// Output file (analyze, decay) or directory (generate, verify).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Directory for outputs when --output is not given.
    #[arg(long, global = true, env = "ZDSYM_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run both symmetry criteria on one matrix.
    Analyze(AnalyzeArgs),
    /// Write a batch of labelled test matrices.
    Generate(GenerateArgs),
    /// Generate labelled cases, run both criteria on each, summarize.
    Verify(VerifyArgs),
    /// Tabulate the decay of the inner remainder of the orbit-filtering polynomials.
    Decay(DecayArgs),
}

#[derive(Debug, Args)]
struct Tolerances {
    /// Eigenvalue clustering tolerance [default: dim * 1e-8 * max(1, ||A||)].
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Relative tolerance for a vanishing trace.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Smallest exponent checked.
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    /// Largest exponent checked [default: d * dim].
    #[arg(long)]
    n_max: Option<usize>,
}

impl Tolerances {
    fn config(&self, execution: Execution) -> Result<AnalyzeConfig> {
        if let Some(t) = self.cluster_tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("--cluster-tol must be positive, got {t}");
            }
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            bail!("--rel-tol must be positive, got {}", self.rel_tol);
        }
        if self.n_min == 0 {
            bail!("--n-min must be at least 1");
        }
        if let Some(n_max) = self.n_max {
            if n_max < self.n_min {
                bail!("need --n-min <= --n-max, got {}..{n_max}", self.n_min);
            }
        }
        Ok(AnalyzeConfig {
            cluster_tol: self.cluster_tol,
            rel_tol: self.rel_tol,
            n_min: self.n_min,
            n_max: self.n_max,
            execution,
            ..AnalyzeConfig::default()
        })
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Matrix (or generated test case) JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Rotation order.
    #[arg(long, conflicts_with = "scan_d", required_unless_present = "scan_d")]
    d: Option<usize>,
    /// Inclusive range of rotation orders, e.g. 2..6.
    #[arg(long, value_parser = parse_range)]
    scan_d: Option<RangeInclusive<usize>>,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// dcyclic, prescribed (symmetric), broken, or campaign (the verify mix).
    #[arg(long, default_value = "campaign")]
    family: String,
    /// Rotation order (ignored by the campaign family).
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Block size for dcyclic.
    #[arg(long, default_value_t = 2)]
    block_dim: usize,
    /// Number of rotation orbits for prescribed and broken.
    #[arg(long, default_value_t = 2)]
    orbits: usize,
    /// Condition number cap of the disguising similarity.
    #[arg(long, default_value_t = 10.0)]
    cond_cap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Make every k-th case deliberately asymmetric (0: none).
    #[arg(long, default_value_t = 4)]
    broken_every: usize,
    /// Starting node count of the contour quadrature.
    #[arg(long, default_value_t = 64)]
    quadrature_nodes: usize,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct DecayArgs {
    /// Matrix (or generated test case) JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Rotation order.
    #[arg(long)]
    d: usize,
    /// Which nonzero eigenvalue to use as lambda, counted by decreasing modulus.
    #[arg(long, default_value_t = 0)]
    lambda_index: usize,
    /// Radius of the inner circle [default: middle of the widest spectral gap below |lambda|].
    #[arg(long)]
    rho: Option<f64>,
    /// Exponents p, e.g. 1..6.
    #[arg(long, value_parser = parse_range, default_value = "1..6")]
    p: RangeInclusive<usize>,
    /// Extra power d p* split off in the bound.
    #[arg(long, default_value_t = 0)]
    p_star: usize,
    /// Eigenvalue clustering tolerance [default: dim * 1e-8 * max(1, ||A||)].
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Starting node count of the contour quadrature.
    #[arg(long, default_value_t = 64)]
    quadrature_nodes: usize,
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower end {lo:?}: {e}"))?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("bad upper end {hi:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok(lo..=hi)
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ComplexMatrix::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_analyze(args: &AnalyzeArgs, out: &OutputTarget, execution: Execution) -> Result<ExitCode> {
    let config = args.tolerances.config(execution)?;
    let a = read_matrix(&args.input)?;
    let ds: Vec<usize> = match (&args.scan_d, args.d) {
        (Some(range), _) => range.clone().collect(),
        (None, Some(d)) => vec![d],
        (None, None) => bail!("give --d or --scan-d"),
    };
    let reports = analyze_scan(&a, &ds, &config)?;
    let json = if args.scan_d.is_some() {
        serde_json::to_string_pretty(&reports)?
    } else {
        serde_json::to_string_pretty(&reports[0])?
    };
    let path = out.file("analyze.json");
    write_atomic(&path, json.as_bytes())?;

    let mut agree = true;
    for r in &reports {
        agree &= r.verdicts_agree();
        println!(
            "d = {}: spectral {}, trace {}{}{}",
            r.d,
            r.spectral_verdict,
            r.trace_verdict,
            if r.marginal { " (marginal)" } else { "" },
            if r.verdicts_agree() {
                ""
            } else {
                "  <-- DISAGREE"
            }
        );
    }
    println!("report: {}", path.display());
    Ok(if agree {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn generate_one(args: &GenerateArgs, id: usize) -> Result<TestCase> {
    let seed = args.seed.wrapping_add(id as u64);
    Ok(match args.family.as_str() {
        "dcyclic" => gen_dcyclic(args.d, args.block_dim, seed)?,
        "prescribed" => {
            let spectrum = random_symmetric_spectrum(args.d, args.orbits, 2, &mut rng(seed));
            gen_prescribed(&spectrum, args.d, seed, args.cond_cap)?
        }
        "broken" => gen_broken(args.d, args.orbits, seed, args.cond_cap)?,
        "campaign" => campaign_case(
            id,
            &CampaignConfig {
                seed: args.seed,
                cond_cap: args.cond_cap,
                ..CampaignConfig::default()
            },
        )?,
        other => {
            bail!("unknown family {other:?} (expected dcyclic, prescribed, broken or campaign)")
        }
    })
}

fn cmd_generate(args: &GenerateArgs, out: &OutputTarget) -> Result<ExitCode> {
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    let dir = out.dir()?;
    for id in 0..args.count {
        let tc = generate_one(args, id)?;
        write_atomic(
            &dir.join(format!("case_{id:04}.json")),
            tc.to_json().as_bytes(),
        )?;
    }
    println!(
        "wrote {} {} cases to {}",
        args.count,
        args.family,
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs, out: &OutputTarget, execution: Execution) -> Result<ExitCode> {
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    let analyze = args.tolerances.config(Execution::Sequential)?;
    let config = CampaignConfig {
        count: args.count,
        seed: args.seed,
        broken_every: args.broken_every,
        analyze,
        quadrature: QuadratureConfig {
            execution: Execution::Sequential,
            ..QuadratureConfig::default()
        }
        .with_start_nodes(args.quadrature_nodes),
        execution,
        ..CampaignConfig::default()
    };
    let (results, summary) = run_campaign(&config)?;

    let dir = out.dir()?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    for r in &results {
        csv.serialize(r)?;
    }
    let bytes = csv.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    write_atomic(&dir.join("verify_cases.csv"), &bytes)?;
    write_atomic(
        &dir.join("verify_summary.json"),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;

    println!(
        "{} cases ({} labelled): {} disagreements, {} errors, {} projection ranks agree",
        summary.cases,
        summary.labelled,
        summary.disagreements,
        summary.errors,
        summary.rank_agreements
    );
    println!(
        "max trace ratio on symmetric cases {:.3e}; min on asymmetric cases {:.3e}",
        summary.max_symmetric_trace_ratio, summary.min_broken_trace_ratio
    );
    for r in results
        .iter()
        .filter(|r| r.ground_truth.is_some() && !r.verdicts_consistent())
    {
        println!(
            "  case {} ({}, d = {}): truth {:?}, spectral {}, trace {}{}",
            r.id,
            r.family,
            r.d,
            r.ground_truth,
            r.spectral_verdict,
            r.trace_verdict,
            r.error
                .as_deref()
                .map(|e| format!(", error: {e}"))
                .unwrap_or_default()
        );
    }
    println!("results: {}", dir.display());
    Ok(if summary.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

#[derive(Serialize)]
struct DecayCsvRow {
    p: usize,
    r: usize,
    measured: f64,
    bound: f64,
    ratio: Option<f64>,
}

fn cmd_decay(args: &DecayArgs, out: &OutputTarget, execution: Execution) -> Result<ExitCode> {
    let a = read_matrix(&args.input)?;
    let tol = match args.cluster_tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => bail!("--cluster-tol must be positive, got {t}"),
        Some(t) => t,
        None => zdsym::spectrum::default_cluster_tol(&a)?,
    };
    let s = DistinctSpectrum::of_matrix(&a, Some(tol))?;
    let lambda: Complex64 = s
        .nonzero_points()
        .nth(args.lambda_index)
        .map(|p| p.value)
        .ok_or_else(|| anyhow!("no nonzero eigenvalue with index {}", args.lambda_index))?;
    let rho = match args.rho {
        Some(rho) => rho,
        None => s.choose_annulus_rho(lambda.norm())?,
    };
    let q = QuadratureConfig {
        execution,
        ..QuadratureConfig::default()
    }
    .with_start_nodes(args.quadrature_nodes);
    let report =
        remainder_bound_certificate(&a, &s, lambda, args.d, args.p_star, rho, args.p.clone(), &q)?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        csv.serialize(DecayCsvRow {
            p: row.p,
            r: row.r,
            measured: row.remainder_s1,
            bound: row.bound_c_tp,
            ratio: row.ratio,
        })?;
    }
    let path = out.file("decay.csv");
    write_atomic(&path, &csv.into_inner().map_err(|e| anyhow!("csv: {e}"))?)?;

    println!(
        "lambda = {lambda}, d = {}, rho = {rho}, t = (rho/|lambda|)^d = {:.6e}",
        args.d, report.t
    );
    println!(
        "C = {:.6e} (max|phi| {:.3e}, max||R|| {:.3e}); empirical constant {:.6e}",
        report.c, report.phi_max, report.resolvent_max, report.empirical_c
    );
    println!(
        "bound {} on all {} rows",
        if report.certified { "holds" } else { "FAILS" },
        report.rows.len()
    );
    println!("table: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let out = OutputTarget::new(cli.output.clone(), cli.output_dir.clone());
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(args, &out, execution),
        Command::Generate(args) => cmd_generate(args, &out),
        Command::Verify(args) => cmd_verify(args, &out, execution),
        Command::Decay(args) => cmd_decay(args, &out, execution),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
