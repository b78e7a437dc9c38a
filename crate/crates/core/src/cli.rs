//! Command-line surface: argument parsing, job validation and dispatch.

use crate::check::{run_suite, CheckLine, SuiteConfig};
use crate::classify::{integrate_path, verify_pullback, ClassifyOptions, ClassifyResult, DeformationPath, PullbackReport};
use crate::error::{Error, Result};
use crate::family::{build_family_seeded, classify_fiber_unchecked, dis_map_nodes, fiber_classification, DEFAULT_SEED};
use crate::json::{parse, to_output, ClassifyInput, GermInput, PointInput};
use crate::local_algebra::{analyze_with_order, default_order, residue_pairing};
use clap::{Parser, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

pub const SEED_VAR: &str = "GERMDEFORM_SEED";
pub const MAX_ORDER: usize = 128;
pub const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Family,
    Dis,
    Fiber,
    Classify,
    Check,
}

#[derive(Debug, Parser)]
#[command(name = "germdeform", about = "Universal deformations of plane-curve germs")]
pub struct Args {
    pub command: Command,
    /// Input JSON file (not needed for `check`).
    pub file: Option<PathBuf>,
    /// Truncation order of the series arithmetic.
    #[arg(long)]
    pub order: Option<usize>,
    /// Number of contour nodes (power of two).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of RK4 steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual tolerance of `classify`.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// A validated job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub order: Option<usize>,
    pub nodes: Option<usize>,
    pub steps: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
}

fn validate_nodes(m: usize) -> Result<usize> {
    if m.is_power_of_two() && (8..=MAX_NODES).contains(&m) {
        Ok(m)
    } else {
        Err(Error::InvalidInput(format!(
            "node count {m} must be a power of two between 8 and {MAX_NODES}"
        )))
    }
}

fn validate_order(n: usize) -> Result<usize> {
    if (1..=MAX_ORDER).contains(&n) {
        Ok(n)
    } else {
        Err(Error::InvalidInput(format!("order {n} must lie in 1..={MAX_ORDER}")))
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("{SEED_VAR}={v} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl JobConfig {
    pub fn from_args(args: Args) -> Result<Self> {
        if args.command != Command::Check && args.file.is_none() {
            return Err(Error::InvalidInput("an input file is required".into()));
        }
        if let Some(n) = args.order {
            validate_order(n)?;
        }
        if let Some(m) = args.nodes {
            validate_nodes(m)?;
        }
        if args.steps == Some(0) || args.steps.is_some_and(|k| k > 100_000) {
            return Err(Error::InvalidInput("steps must lie in 1..=100000".into()));
        }
        if let Some(tol) = args.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidInput("tolerance must be positive".into()));
            }
        }
        let seed = match args.seed {
            Some(s) => s,
            None => env_seed()?.unwrap_or(DEFAULT_SEED),
        };
        Ok(JobConfig {
            command: args.command,
            input: args.file,
            order: args.order,
            nodes: args.nodes,
            steps: args.steps,
            seed,
            tol: args.tol,
        })
    }

    fn read_input(&self) -> Result<String> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("an input file is required".into()))?;
        std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
    }
}

#[derive(Debug, Serialize)]
struct AnalyzeOutput {
    d: usize,
    r: usize,
    basis: Vec<String>,
    divisor_orders: Vec<usize>,
    /// Dual elements as [a, b, re, im] terms.
    dual_basis: Vec<Vec<(usize, usize, f64, f64)>>,
    /// max |pairing(g_i, h_j) - delta_ij|.
    dual_certificate: f64,
    discriminant: Vec<C64>,
    x_scale: f64,
    delta1: f64,
    delta2: f64,
    order: i32,
}

#[derive(Debug, Serialize)]
struct FamilyOutput {
    r: usize,
    basis: Vec<String>,
    param_box: f64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    #[serde(flatten)]
    result: ClassifyResult,
    verification: PullbackReport,
}

#[derive(Debug, Serialize)]
struct CheckOutput {
    seed: u64,
    nodes: usize,
    passed: bool,
    checks: Vec<CheckLine>,
}

fn analyze_job(job: &JobConfig) -> Result<String> {
    let input: GermInput = parse(&job.read_input()?)?;
    let germ = input.to_germ()?;
    let order = job.order.map_or(default_order(germ.r), |n| n as i32);
    let q = analyze_with_order(&germ, order)?;
    let mut dev = 0.0f64;
    for (i, g) in q.basis_g.iter().enumerate() {
        for (j, h) in q.dual_h.iter().enumerate() {
            let p = residue_pairing(g, h, &germ)?;
            let delta = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((p - delta).norm());
        }
    }
    to_output(&AnalyzeOutput {
        d: germ.d,
        r: germ.r,
        basis: q.basis_labels(),
        divisor_orders: q.divisor_orders.clone(),
        dual_basis: q
            .dual_h
            .iter()
            .map(|h| h.terms().into_iter().map(|(a, b, c)| (a, b, c.re, c.im)).collect())
            .collect(),
        dual_certificate: dev,
        discriminant: germ.disc_x.coeffs.clone(),
        x_scale: germ.x_scale,
        delta1: germ.delta1,
        delta2: germ.delta2,
        order: q.order,
    })
}

fn family_job(job: &JobConfig) -> Result<String> {
    let input: GermInput = parse(&job.read_input()?)?;
    let fam = build_family_seeded(&input.to_germ()?, job.seed)?;
    to_output(&FamilyOutput {
        r: fam.r,
        basis: fam.quotient.basis_labels(),
        param_box: fam.param_box,
        seed: fam.seed,
    })
}

fn point_job(job: &JobConfig, enforce_box: bool) -> Result<String> {
    let input: PointInput = parse(&job.read_input()?)?;
    let fam = build_family_seeded(&input.germ.to_germ()?, job.seed)?;
    let report = if enforce_box {
        fiber_classification(&fam, &input.t)?
    } else {
        let mut rep = classify_fiber_unchecked(&fam, &input.t)?;
        if let Some(m) = job.nodes {
            rep.dis_value = dis_map_nodes(&fam, &input.t, m)?;
        }
        rep
    };
    to_output(&report)
}

fn classify_job(job: &JobConfig) -> Result<String> {
    let input: ClassifyInput = parse(&job.read_input()?)?;
    let germ = input.germ.to_germ()?;
    let fam = build_family_seeded(&germ, job.seed)?;
    let path = DeformationPath::new(input.path_poly(&germ)?, input.s_max.unwrap_or(1.0), &fam)?;
    let defaults = ClassifyOptions::default();
    let nodes = match job.nodes.or(input.nodes) {
        Some(m) => validate_nodes(m)?,
        None => defaults.nodes,
    };
    let order = match job.order.or(input.order) {
        Some(n) => validate_order(n)?,
        None => defaults.order,
    };
    let opts = ClassifyOptions {
        steps: job.steps.or(input.steps).unwrap_or(defaults.steps).max(1),
        nodes,
        order,
        tol: job.tol.unwrap_or(defaults.tol),
        halving_check: true,
    };
    let result = integrate_path(&path, &fam, opts)?;
    let verification = verify_pullback(&path, &result, &fam)?;
    to_output(&ClassifyOutput {
        result,
        verification,
    })
}

/// Runs a job; returns the exit status and the JSON for standard output.
pub fn run(job: &JobConfig) -> Result<(i32, String)> {
    let out = match job.command {
        Command::Analyze => analyze_job(job)?,
        Command::Family => family_job(job)?,
        Command::Dis => point_job(job, false)?,
        Command::Fiber => point_job(job, true)?,
        Command::Classify => classify_job(job)?,
        Command::Check => {
            let nodes = job.nodes.unwrap_or(64);
            let checks = run_suite(SuiteConfig {
                seed: job.seed,
                nodes,
            });
            let passed = checks.iter().all(|c| c.passed);
            let out = to_output(&CheckOutput {
                seed: job.seed,
                nodes,
                passed,
                checks,
            })?;
            return Ok((if passed { 0 } else { 1 }, out));
        }
    };
    Ok((0, out))
}

#[derive(Debug, Serialize)]
struct ErrorOutput<'a> {
    error: &'a str,
    message: String,
}

/// Error report printed on standard error.
pub fn error_json(e: &Error) -> String {
    serde_json::to_string(&ErrorOutput {
        error: e.code(),
        message: e.to_string(),
    })
    .unwrap_or_else(|_| e.to_string())
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args(args: Args) -> i32 {
    match JobConfig::from_args(args).and_then(|job| run(&job)) {
        Ok((code, out)) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not an error of the job
            let _ = writeln!(stdout, "{out}");
            code
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Args {
        Args::parse_from(std::iter::once("germdeform").chain(v.iter().copied()))
    }

    #[test]
    fn job_bounds() {
        assert!(JobConfig::from_args(args(&["analyze", "f.json", "--nodes", "100"])).is_err());
        assert!(JobConfig::from_args(args(&["analyze", "f.json", "--nodes", "8192"])).is_err());
        assert!(JobConfig::from_args(args(&["analyze", "f.json", "--order", "129"])).is_err());
        assert!(JobConfig::from_args(args(&["analyze"])).is_err());
        let job = JobConfig::from_args(args(&["check", "--seed", "7", "--nodes", "128"])).unwrap();
        assert_eq!((job.seed, job.nodes), (7, Some(128)));
    }
}
