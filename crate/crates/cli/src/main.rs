mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use nsnr_core::harness::{
    correlation_table, lambda_grid, rmb_experiment, run_trials, scatter_csv, tune_lambda, verify,
    write_file, RmbSpec, RunHeader, ScenarioSpec, TableColumn, TuneSpec, VerifyConfig,
};
use nsnr_core::metrics::{matrix_ratio, nsnr_min};
use nsnr_core::oracle::OracleConfig;
use nsnr_core::randgen::TruthKind;
use nsnr_core::{evaluate_all, EstimatorSpec, Execution, SpdMatrix};

use config::ConfigFile;

#[derive(Parser, Debug)]
#[command(
    name = "nsnr",
    version,
    about = "Worst-case NSNR distance between covariance matrices"
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores; 1 runs sequentially).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// key=value file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the closed form against brute force and the KL bound on random SPD pairs.
    Verify(VerifyArgs),
    /// Print every metric for the diagonal pair diag(1, a, a²) vs diag(1, a², a).
    Example1(Example1Args),
    /// Pearson correlation of each metric with the NSNR distance.
    Table(TableArgs),
    /// Per-trial metric values as CSV.
    Scatter(ScatterArgs),
    /// Choose the knowledge-aided shrinkage coefficient by each metric.
    Tune(TuneArgs),
    /// Mean NSNR of a fixed target with the plain sample covariance.
    Rmb(RmbArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    pairs: Option<usize>,
    /// Fixed dimension; random in 2..=10 per pair when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random directions tried by the brute-force search per pair.
    #[arg(long)]
    oracle_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct Example1Args {
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    scenario: Option<TruthKind>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    n_samples: Option<Vec<usize>>,
    /// Comma-separated loading values; 0 is the plain sample covariance, `lw` is Ledoit-Wolf.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    lambda: Option<Vec<EstimatorChoice>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScatterArgs {
    #[arg(long)]
    scenario: Option<TruthKind>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    lambda: Option<EstimatorChoice>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Mean of every metric at each grid point.
    #[arg(long, value_name = "FILE")]
    curve_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RmbArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Estimator named on the command line: a loading value or `lw`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum EstimatorChoice {
    Loading(f64),
    LedoitWolf,
}

impl EstimatorChoice {
    fn spec(self) -> EstimatorSpec {
        match self {
            EstimatorChoice::Loading(0.0) => EstimatorSpec::Sample,
            EstimatorChoice::Loading(lambda) => EstimatorSpec::DiagonalLoading { lambda },
            EstimatorChoice::LedoitWolf => EstimatorSpec::LedoitWolf,
        }
    }
}

impl FromStr for EstimatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("lw") {
            return Ok(EstimatorChoice::LedoitWolf);
        }
        match s.parse::<f64>() {
            Ok(l) if l >= 0.0 && l.is_finite() => Ok(EstimatorChoice::Loading(l)),
            _ => Err(format!("`{s}` is neither a loading value ≥ 0 nor `lw`")),
        }
    }
}

impl fmt::Display for EstimatorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorChoice::Loading(l) => write!(f, "{l}"),
            EstimatorChoice::LedoitWolf => f.write_str("lw"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    if let Some(path) = path {
        write_file(path, contents)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs, file: &ConfigFile, exec: Execution) -> Result<ExitCode> {
    file.check_keys(&["workers", "pairs", "dim", "seed", "oracle-samples"])?;
    let defaults = VerifyConfig::default();
    let oracle = OracleConfig {
        n_random: file.pick(
            args.oracle_samples,
            "oracle-samples",
            OracleConfig::default().n_random,
        )?,
        ..OracleConfig::default()
    };
    let cfg = VerifyConfig {
        pairs: file.pick(args.pairs, "pairs", defaults.pairs)?,
        dim: args.dim.or(file.get("dim")?),
        master_seed: file.pick(args.seed, "seed", defaults.master_seed)?,
        oracle: Some(oracle),
        ..defaults
    };
    info!("verifying {} pairs", cfg.pairs);
    let report = verify(&cfg, exec)?;
    println!("{report}");
    if report.passed() {
        println!("verify: ok");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify: FAILED");
        Ok(ExitCode::from(1))
    }
}

fn cmd_example1(args: Example1Args, file: &ConfigFile) -> Result<ExitCode> {
    file.check_keys(&["workers", "alpha"])?;
    let alpha = file.pick(args.alpha, "alpha", 0.1)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("alpha must lie in (0, 1), got {alpha}");
    }
    let c = SpdMatrix::from_diagonal(&[1.0, alpha, alpha * alpha])?;
    let c_hat = SpdMatrix::from_diagonal(&[1.0, alpha * alpha, alpha])?;
    let m = evaluate_all(&c, &c_hat)?;
    let kappa = matrix_ratio(&c, &c_hat)?.spectrum.kappa;
    println!("alpha        {alpha}");
    println!("kappa        {kappa}");
    println!("nsnr_min     {}", nsnr_min(&c, &c_hat)?);
    println!("d_nsnr       {}", m.d_nsnr);
    println!("d_kl         {}", m.d_kl);
    println!("d_symkl      {}", m.d_symkl);
    println!("d_frobenius  {}", m.d_frobenius);
    println!("d_spectral   {}", m.d_spectral);
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs, file: &ConfigFile, exec: Execution) -> Result<ExitCode> {
    file.check_keys(&[
        "workers",
        "scenario",
        "n-samples",
        "lambda",
        "trials",
        "seed",
        "dim",
        "out",
    ])?;
    let scenario = file.pick(args.scenario, "scenario", TruthKind::Identity)?;
    let sizes = file.pick_list(args.n_samples, "n-samples", vec![50, 100, 150, 200])?;
    let choices = file.pick_list(args.lambda, "lambda", vec![EstimatorChoice::Loading(0.0)])?;
    let trials = file.pick(args.trials, "trials", 1000)?;
    let seed = file.pick(args.seed, "seed", 0)?;
    let dim = file.pick(args.dim, "dim", 10)?;
    let out = args.out.or(file.get("out")?);
    if sizes.is_empty() || choices.is_empty() {
        bail!("need at least one sample size and one estimator");
    }

    let mut columns = Vec::new();
    for &n in &sizes {
        for &choice in &choices {
            let estimator = choice.spec();
            let label = match (sizes.len(), choices.len()) {
                (_, 1) => format!("N={n}"),
                (1, _) => estimator.label(),
                _ => format!("N={n} {}", estimator.label()),
            };
            let mut spec = ScenarioSpec::new(scenario, n, estimator);
            spec.n_trials = trials;
            spec.master_seed = seed;
            spec.dim = dim;
            columns.push(TableColumn { label, spec });
        }
    }
    info!("running {} columns of {trials} trials", columns.len());
    let table = correlation_table(&columns, exec)?;
    let header = RunHeader::new("table", seed)
        .with("scenario", scenario)
        .with("dim", dim)
        .with("n_samples", join(&sizes))
        .with("lambda", join(&choices))
        .with("trials", trials);
    print!("{}", table.to_text());
    emit(out.as_deref(), &table.to_csv(&header))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_scatter(args: ScatterArgs, file: &ConfigFile, exec: Execution) -> Result<ExitCode> {
    file.check_keys(&[
        "workers",
        "scenario",
        "n-samples",
        "lambda",
        "trials",
        "seed",
        "dim",
        "out",
    ])?;
    let scenario = file.pick(args.scenario, "scenario", TruthKind::Identity)?;
    let n = file.pick(args.n_samples, "n-samples", 50)?;
    let choice = file.pick(args.lambda, "lambda", EstimatorChoice::Loading(0.0))?;
    let trials = file.pick(args.trials, "trials", 1000)?;
    let seed = file.pick(args.seed, "seed", 0)?;
    let dim = file.pick(args.dim, "dim", 10)?;
    let out: PathBuf = args
        .out
        .or(file.get("out")?)
        .ok_or_else(|| anyhow!("scatter needs --out FILE"))?;

    let mut spec = ScenarioSpec::new(scenario, n, choice.spec());
    spec.n_trials = trials;
    spec.master_seed = seed;
    spec.dim = dim;
    let run = run_trials(&spec, exec)?;
    if run.redraws > 0 {
        info!("{} singular estimates were redrawn", run.redraws);
    }
    let header = RunHeader::new("scatter", seed)
        .with("scenario", scenario)
        .with("dim", dim)
        .with("n_samples", n)
        .with("lambda", choice)
        .with("trials", trials);
    emit(Some(&out), &scatter_csv(&run.records, &header)?)?;
    println!("wrote {} rows to {}", run.records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_tune(args: TuneArgs, file: &ConfigFile, exec: Execution) -> Result<ExitCode> {
    file.check_keys(&[
        "workers",
        "grid-step",
        "trials",
        "n-samples",
        "seed",
        "dim",
        "out",
        "curve-out",
    ])?;
    let step = file.pick(args.grid_step, "grid-step", 0.02)?;
    let trials = file.pick(args.trials, "trials", 1000)?;
    let n = file.pick(args.n_samples, "n-samples", 50)?;
    let seed = file.pick(args.seed, "seed", 0)?;
    let dim = file.pick(args.dim, "dim", 10)?;
    let out: Option<PathBuf> = args.out.or(file.get("out")?);
    let curve_out: Option<PathBuf> = args.curve_out.or(file.get("curve-out")?);

    let mut base = ScenarioSpec::new(
        TruthKind::RandomLowRankPlusWishart,
        n,
        EstimatorSpec::KnowledgeAided {
            lambda: 0.0,
            prior: None,
        },
    );
    base.n_trials = trials;
    base.master_seed = seed;
    base.dim = dim;
    let spec = TuneSpec {
        lambda_grid: lambda_grid(step)?,
        base,
    };
    info!(
        "tuning over {} grid points with {trials} trials each",
        spec.lambda_grid.len()
    );
    let result = tune_lambda(&spec, exec)?;
    let header = RunHeader::new("tune", seed)
        .with("scenario", TruthKind::RandomLowRankPlusWishart)
        .with("dim", dim)
        .with("n_samples", n)
        .with("grid_step", step)
        .with("trials", trials);
    print!("{}", result.to_text());
    emit(out.as_deref(), &result.to_csv(&header))?;
    emit(curve_out.as_deref(), &result.curve_csv(&header))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rmb(args: RmbArgs, file: &ConfigFile, exec: Execution) -> Result<ExitCode> {
    file.check_keys(&["workers", "dim", "n-samples", "trials", "seed"])?;
    let spec = RmbSpec {
        dim: file.pick(args.dim, "dim", 10)?,
        n_samples: file.pick(args.n_samples, "n-samples", 20)?,
        n_trials: file.pick(args.trials, "trials", 1000)?,
        master_seed: file.pick(args.seed, "seed", 0)?,
    };
    let result = rmb_experiment(&spec, exec)?;
    println!(
        "dim={} n_samples={} trials={} mean_nsnr={:.6}",
        spec.dim, spec.n_samples, spec.n_trials, result.mean_nsnr
    );
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let exec = match cli.workers.or(file.get("workers")?) {
        None | Some(0) => Execution::Auto,
        Some(n) => Execution::with_workers(n),
    };
    match cli.command {
        Command::Verify(a) => cmd_verify(a, &file, exec),
        Command::Example1(a) => cmd_example1(a, &file),
        Command::Table(a) => cmd_table(a, &file, exec),
        Command::Scatter(a) => cmd_scatter(a, &file, exec),
        Command::Tune(a) => cmd_tune(a, &file, exec),
        Command::Rmb(a) => cmd_rmb(a, &file, exec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn estimator_choices_parse() {
        assert_eq!("lw".parse(), Ok(EstimatorChoice::LedoitWolf));
        assert_eq!("0.1".parse(), Ok(EstimatorChoice::Loading(0.1)));
        assert_eq!(
            "0".parse::<EstimatorChoice>().unwrap().spec(),
            EstimatorSpec::Sample
        );
        assert!("-1".parse::<EstimatorChoice>().is_err());
        assert!("nan".parse::<EstimatorChoice>().is_err());
    }
}
