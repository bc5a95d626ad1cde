//! `cdk`: function recovery experiments, separation certificates and
//! Monte Carlo moment matrices from the command line.
//!
//! Exit status is 0 on success, 1 when a computation fails and 2 for usage
//! errors (bad flags, unreadable or malformed inputs).

mod output;
mod selftest;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cdk::basis::{BasisSpec, Family};
use cdk::bounds::{delta3, delta_max_estimate, separating_degree, SeparationInputs};
use cdk::measures::{empirical_moment_matrix, jitter_samples, SampleSet};
use cdk::pipeline::{
    catalog, rate_fit, run_experiment, write_approximant_csv, ExperimentMode, ExperimentSpec,
};
use cdk::Error;

#[derive(Parser, Debug)]
#[command(name = "cdk", version, about = "Christoffel-Darboux function recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recover a catalog function at one degree.
    Approximate {
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        common: ExperimentArgs,
    },
    /// Recover a catalog function over a degree range and fit the error rate.
    Sweep {
        /// Degree range as lo:step:hi.
        #[arg(long)]
        degrees: DegreeRange,
        #[command(flatten)]
        common: ExperimentArgs,
    },
    /// Smallest degree at which the on-graph lower bound beats the off-graph
    /// upper bound.
    Bounds(BoundsArgs),
    /// Monte Carlo moment matrix of a sample file.
    Moments(MomentsArgs),
    /// Built-in invariant checks.
    Selftest,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    /// Half-width of the Gaussian band (smoothed mode).
    #[arg(long, conflicts_with = "samples", allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Number of uniform x samples (empirical mode).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0.0, requires = "samples", allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, default_value_t = 1, requires = "samples")]
    replication: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta1: f64,
    #[arg(long, default_value_t = Family::Legendre)]
    basis: Family,
    /// Gauss-Legendre points per axis, 2(d+1) when omitted.
    #[arg(long)]
    quad: Option<usize>,
    /// Record wall-clock runtime in the report.
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value = "cdk-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, allow_negative_numbers = true)]
    volx: f64,
    #[arg(long, allow_negative_numbers = true)]
    delta1: f64,
    #[arg(long, required_unless_present = "points", conflicts_with = "points", allow_negative_numbers = true)]
    deltamax: Option<f64>,
    /// CSV of points on the variety (header x1,...,xn,y); δ_max is twice
    /// their diameter.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dmax: usize,
    #[arg(long, default_value = "cdk-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// CSV with header x1,...,xn,y.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    degree: usize,
    #[arg(long, default_value_t = Family::Legendre)]
    basis: Family,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    replication: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cdk-out")]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct DegreeRange(Vec<usize>);

impl FromStr for DegreeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, step, hi] = parts[..] else {
            return Err(format!("expected lo:step:hi, got `{s}`"));
        };
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
        let (lo, step, hi) = (parse(lo)?, parse(step)?, parse(hi)?);
        if step == 0 {
            return Err("step must be positive".into());
        }
        if lo > hi {
            return Err(format!("empty range: {lo} > {hi}"));
        }
        Ok(DegreeRange((lo..=hi).step_by(step).collect()))
    }
}

enum Failure {
    Usage(String),
    Compute(String),
}

type CmdResult = Result<(), Failure>;

fn flag_name(field: &str) -> &str {
    match field {
        "grid_points" => "grid",
        "quad_order" => "quad",
        "m" => "samples",
        "vol_x" => "volx",
        "delta_max" => "deltamax",
        "d_max" => "dmax",
        other => other,
    }
}

/// Precondition failures become usage errors naming the flag.
fn usage(e: Error) -> Failure {
    match e {
        Error::InvalidArgument { name, reason } => {
            Failure::Usage(format!("invalid value for --{}: {reason}", flag_name(name)))
        }
        other => Failure::Usage(other.to_string()),
    }
}

fn compute(e: impl std::fmt::Display) -> Failure {
    Failure::Compute(e.to_string())
}

fn experiment_spec(common: &ExperimentArgs, degrees: Vec<usize>) -> Result<ExperimentSpec, Failure> {
    let function = catalog(&common.function).map_err(|e| Failure::Usage(format!("--function: {e}")))?;
    let mut spec = ExperimentSpec::new(function, degrees);
    spec.beta = common.beta;
    spec.grid_points = common.grid;
    spec.delta1 = common.delta1;
    spec.family = common.basis;
    spec.quad_order = common.quad;
    spec.timing = common.timing;
    spec.mode = match (common.epsilon, common.samples) {
        (Some(epsilon), _) => ExperimentMode::Smoothed { epsilon },
        (None, Some(m)) => ExperimentMode::Empirical {
            m,
            sigma: common.sigma,
            replication: common.replication,
            seed: common.seed,
        },
        (None, None) => ExperimentMode::Tikhonov,
    };
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn config_json(command: &str, spec: &ExperimentSpec, common: &ExperimentArgs) -> Value {
    let quad: Vec<usize> = spec.degrees.iter().map(|&d| spec.quad_order_for(d)).collect();
    json!({
        "command": command,
        "function": spec.function.name(),
        "degrees": spec.degrees,
        "beta": spec.beta,
        "grid": spec.grid_points,
        "delta1": spec.delta1,
        "basis": spec.family,
        "quad": quad,
        "mode": spec.mode,
        "seed": common.seed,
        "timing": spec.timing,
    })
}

fn print_rows(report: &cdk::pipeline::ErrorReport) -> Result<(), Failure> {
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(compute)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}

fn cmd_approximate(degree: usize, common: &ExperimentArgs) -> CmdResult {
    let spec = experiment_spec(common, vec![degree])?;
    let out = run_experiment(&spec).map_err(compute)?;
    let mut csv = Vec::new();
    write_approximant_csv(&out.approximants[0].samples, &mut csv).map_err(compute)?;
    let doc = json!({ "config": config_json("approximate", &spec, common), "report": out.report });
    output::write_atomic(&common.out.join("approximant.csv"), &csv).map_err(compute)?;
    output::write_json(&common.out.join("report.json"), &doc).map_err(compute)?;
    print_rows(&out.report)
}

fn cmd_sweep(degrees: &DegreeRange, common: &ExperimentArgs) -> CmdResult {
    let spec = experiment_spec(common, degrees.0.clone())?;
    let out = run_experiment(&spec).map_err(compute)?;
    let (slope, slope_error) = match rate_fit(&out.report) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut csv = Vec::new();
    out.report.write_csv(&mut csv).map_err(compute)?;
    let doc = json!({
        "config": config_json("sweep", &spec, common),
        "report": out.report,
        "slope": slope,
        "slope_error": slope_error,
    });
    output::write_atomic(&common.out.join("report.csv"), &csv).map_err(compute)?;
    output::write_json(&common.out.join("report.json"), &doc).map_err(compute)?;
    print_rows(&out.report)?;
    match slope {
        Some(s) => println!("slope,{}", cdk::pipeline::fmt_f64(s)),
        None => println!("slope,null"),
    }
    Ok(())
}

fn read_samples(path: &Path) -> Result<SampleSet, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    SampleSet::read_csv(BufReader::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_bounds(a: &BoundsArgs) -> CmdResult {
    let delta_max = match (&a.points, a.deltamax) {
        (Some(p), _) => delta_max_estimate(read_samples(p)?.points()).map_err(usage)?,
        (None, Some(v)) => v,
        (None, None) => return Err(Failure::Usage("--deltamax or --points is required".into())),
    };
    let d3 = delta3(a.delta1, delta_max).map_err(usage)?;
    let inputs = SeparationInputs::new(a.volx, d3, a.n, a.dmax).map_err(usage)?;
    let cert = separating_degree(&inputs);
    let doc = json!({
        "config": {
            "command": "bounds",
            "volx": a.volx,
            "delta1": a.delta1,
            "deltamax": delta_max,
            "delta3": d3,
            "n": a.n,
            "dmax": a.dmax,
        },
        "found": cert.found(),
        "constant_c": cert.constant_c,
        "d_star_sep": cert.d_star_sep,
        "table": cert.table,
    });
    output::write_json(&a.out.join("certificate.json"), &doc).map_err(compute)?;
    println!("{}", serde_json::to_string_pretty(&doc).map_err(compute)?);
    Ok(())
}

fn cmd_moments(a: &MomentsArgs) -> CmdResult {
    let samples = read_samples(&a.samples)?;
    let spec = BasisSpec::new(samples.dim(), a.degree, a.basis).map_err(usage)?;
    let jittered = jitter_samples(&samples, a.sigma, a.replication, a.seed).map_err(usage)?;
    let m = empirical_moment_matrix(&jittered, &spec).map_err(compute)?;
    let text = m.to_json_string().map_err(compute)?;
    let path = a.out.join("moments.json");
    output::write_atomic(&path, format!("{text}\n").as_bytes()).map_err(compute)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Approximate { degree, common } => cmd_approximate(*degree, common),
        Command::Sweep { degrees, common } => cmd_sweep(degrees, common),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Selftest => {
            return if selftest::run() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
