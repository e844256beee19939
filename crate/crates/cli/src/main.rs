//! `mallows`: command-line front end for the Mallows-distance laboratory.
//!
//! Exit codes: 0 on success, 2 for malformed input or configuration (and
//! I/O failures), 3 when a computation is refused on numerical grounds
//! (divergent moments, unmet limit-theorem preconditions, domain errors).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mallows_lab::boot::{bootstrap_gap, bootstrap_gap_exact, lower_bound, shift_identity_check, upper_bound};
use mallows_lab::bridge::ContinuousLimitOptions;
use mallows_lab::dist::{parse_model, EmpiricalDistribution, Law};
use mallows_lab::hazard::{
    check_variance_sandwich, condition2_verdict, hazard_divergence_verdict, hazard_profile, mgf_radius_bound, Tail,
};
use mallows_lab::mallows::distance;
use mallows_lab::stats::{Summary, SUMMARY_LEVELS};
use mallows_lab::studies::rng::COMPONENT_USER;
use mallows_lab::studies::{
    derive_stream, emit_report, limit_draws, parallel_map, run_convergence_study, to_json, write_report, StudyConfig,
};
use mallows_lab::LabError;

const MODEL_HELP: &str = "Model specification such as normal(mu=0,sigma=1), uniform(a=0,b=1), \
exponential(rate=1), lognormal(mu=0,sigma=1), pareto(scale=1,shape=3), \
step(x=[0,1],p=[0.5,0.5]), bernoulli(p=0.5) or point(x=0)";

#[derive(Parser)]
#[command(name = "mallows", version, about = "Mallows (Wasserstein) distances between empirical and population laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Distance d_r between two laws, printed as JSON.
    Distance {
        /// Left law: a model specification or @path to a sample file.
        #[arg(long)]
        lhs: String,
        /// Right law: a model specification or @path to a sample file.
        #[arg(long)]
        rhs: String,
        /// Order r ≥ 1.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
    },
    /// Draws from the limit law of the normalised distance.
    Limit {
        #[arg(long, help = MODEL_HELP)]
        model: String,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Number of draws.
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Bridge grid points for continuous models.
        #[arg(long, default_value_t = 4097)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Assert that the density is monotone near both ends of an
        /// unbounded support.
        #[arg(long)]
        monotone_tails: bool,
        /// csv: one draw per line; json: summary statistics.
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Hazard report: profile, tail verdicts, MGF radius, sandwich table.
    Hazard {
        #[arg(long, help = MODEL_HELP)]
        model: String,
        /// Threshold t for the MGF radius inf_{|x| ≥ t} h(x).
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Bootstrap distance bounds for the normalised sample mean.
    Bootstrap {
        #[arg(long, help = MODEL_HELP)]
        model: String,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Independent trials (samples); more than one prints every trial
        /// and the rates at which the bounds hold.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Monte Carlo draws per root distribution.
        #[arg(long, default_value_t = 10_000)]
        gap_draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Enumerate the bootstrap law exactly (n ≤ 7).
        #[arg(long)]
        exact: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Convergence-rate study from a configuration file and/or flags.
    #[command(long_about = STUDY_HELP)]
    Study(StudyArgs),
}

const STUDY_HELP: &str = "Convergence-rate study.

Settings come from an optional key = value file (--config), overridden by
flags. Keys:
  model       model specification (default uniform(a=0,b=1))
  r           distance order, r ≥ 1 (default 2)
  n_grid      sample sizes: list 64,128,256 or range 2^6..2^14 (default 2^6..2^14)
  reps        replications per sample size, ≥ 100 (default 1000)
  seed        master seed (default 1)
  alpha       normalisation exponent in (0,1); default 1/2 continuous, 1/(2r) discrete
  grid_size   bridge grid points for continuous limit draws (default 4097)
  limit_reps  limit-law draws for the comparison (default 10000)
  out         output path (default: standard output)
  format      json or csv (default json)
  threads     worker threads, 0 = all cores (default 0)

Lines starting with # and trailing # comments are ignored.";

#[derive(Args)]
struct StudyArgs {
    /// Configuration file of key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model specification.
    #[arg(long)]
    model: Option<String>,
    /// Distance order r ≥ 1.
    #[arg(long)]
    r: Option<String>,
    /// Sample sizes: list 64,128 or range 2^6..2^14.
    #[arg(long)]
    n_grid: Option<String>,
    /// Replications per sample size (≥ 100).
    #[arg(long)]
    reps: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Normalisation exponent in (0,1).
    #[arg(long)]
    alpha: Option<String>,
    /// Bridge grid points for continuous limit draws.
    #[arg(long)]
    grid_size: Option<String>,
    /// Limit-law draws for the comparison.
    #[arg(long)]
    limit_reps: Option<String>,
    /// Output path (default: standard output).
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure { code: if e.is_numeric_refusal() { 3 } else { 2 }, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_law(arg: &str) -> CliResult<Law> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure { code: 2, message: format!("cannot read sample file {path}: {e}") })?;
            Ok(Law::Empirical(EmpiricalDistribution::from_text(&text)?))
        }
        None => Ok(parse_model(arg)?),
    }
}

fn print_json(value: &Value) -> CliResult<()> {
    let bytes = to_json(value)?;
    std::io::stdout().write_all(&bytes).map_err(|e| Failure { code: 2, message: format!("cannot write output: {e}") })
}

fn summary_json(values: &[f64]) -> Value {
    let s = Summary::of(values);
    let quantiles: serde_json::Map<String, Value> = SUMMARY_LEVELS
        .iter()
        .zip(&s.quantiles)
        .map(|(p, q)| (format!("q{:02}", (p * 100.0).round()), json!(q)))
        .collect();
    json!({ "count": s.count, "mean": s.mean, "variance": s.variance, "std_error": s.std_error, "quantiles": quantiles })
}

fn hazard_report(model: &str, t: f64) -> CliResult<Value> {
    let law = parse_model(model)?;
    let m = law.as_continuous().ok_or_else(|| Failure {
        code: 3,
        message: format!("hazard diagnostics need a continuous model, got {law}"),
    })?;
    let profile: Vec<Value> = hazard_profile(m)
        .into_iter()
        .map(|(tail, p, x, h)| json!({ "tail": tail, "tail_probability": p, "x": x, "hazard": h }))
        .collect();
    let mut sandwich = Vec::new();
    for p in [0.5, 0.75, 0.9, 0.99, 0.999] {
        for (tail, level) in [(Tail::Right, p), (Tail::Left, 1.0 - p)] {
            let t = m.quantile(level)?;
            match check_variance_sandwich(m, t, tail) {
                Ok(c) => sandwich.push(serde_json::to_value(c).expect("serialisable")),
                Err(e) => sandwich.push(json!({ "tail": tail, "t": t, "error": e.to_string() })),
            }
        }
    }
    Ok(json!({
        "model": m.to_string(),
        "profile": profile,
        "condition2": condition2_verdict(m),
        "hazard_divergence": hazard_divergence_verdict(m),
        "mgf_radius": { "t": t, "c": mgf_radius_bound(m, t)? },
        "sandwich": sandwich,
    }))
}

fn bootstrap_trial(law: &Law, n: usize, draws: usize, seed: u64, trial: usize, exact: bool) -> CliResult<Value> {
    let mut rng = derive_stream(seed, &[COMPONENT_USER, trial as u64]);
    let sample = law.sample(n, &mut rng)?;
    let upper = upper_bound(&sample, law)?;
    let lower = lower_bound(&sample, law)?;
    let gap = if exact {
        bootstrap_gap_exact(&sample, law, draws, &mut rng)?
    } else {
        bootstrap_gap(&sample, law, draws, &mut rng)?
    };
    let identity = shift_identity_check(&sample, law)?;
    Ok(json!({
        "upper": upper,
        "lower": lower,
        "gap": gap.gap,
        "mc_error": gap.mc_error,
        "identity_check": identity,
    }))
}

fn run_study(args: StudyArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::default(),
    };
    let flags = [
        ("model", &args.model),
        ("r", &args.r),
        ("n_grid", &args.n_grid),
        ("reps", &args.reps),
        ("seed", &args.seed),
        ("alpha", &args.alpha),
        ("grid_size", &args.grid_size),
        ("limit_reps", &args.limit_reps),
        ("out", &args.out),
        ("format", &args.format),
        ("threads", &args.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    let report = run_convergence_study(&cfg)?;
    match &cfg.out {
        Some(path) => write_report(&report, cfg.format, path)?,
        None => std::io::stdout()
            .write_all(&emit_report(&report, cfg.format)?)
            .map_err(|e| Failure { code: 2, message: format!("cannot write output: {e}") })?,
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Distance { lhs, rhs, r } => {
            let (a, b) = (load_law(&lhs)?, load_law(&rhs)?);
            let d = distance(&a, &b, r)?;
            print_json(&json!({ "lhs": a.to_string(), "rhs": b.to_string(), "distance": d }))
        }
        Command::Limit { model, r, reps, grid, seed, monotone_tails, format, threads } => {
            let law = parse_model(&model)?;
            let opts = ContinuousLimitOptions { grid_size: grid, monotone_tails };
            let sample = limit_draws(&law, r, &opts, reps, seed, threads)?;
            match format {
                OutFormat::Csv => {
                    let mut out = String::new();
                    for d in &sample.draws {
                        out.push_str(&format!("{d:.16e}\n"));
                    }
                    std::io::stdout()
                        .write_all(out.as_bytes())
                        .map_err(|e| Failure { code: 2, message: format!("cannot write output: {e}") })
                }
                OutFormat::Json => print_json(&json!({
                    "kind": sample.kind,
                    "r": sample.r,
                    "model": sample.model,
                    "grid_size": sample.grid_size,
                    "bias_note": sample.bias_note,
                    "summary": summary_json(&sample.draws),
                })),
            }
        }
        Command::Hazard { model, t } => print_json(&hazard_report(&model, t)?),
        Command::Bootstrap { model, n, reps, gap_draws, seed, exact, threads } => {
            let law = parse_model(&model)?;
            if n == 0 || reps == 0 {
                return Err(Failure { code: 2, message: "--n and --reps must be positive".into() });
            }
            let trials = parallel_map(threads, reps, |k| bootstrap_trial(&law, n, gap_draws, seed, k, exact))?
                .into_iter()
                .collect::<CliResult<Vec<Value>>>()?;
            if reps == 1 {
                return print_json(&trials[0]);
            }
            let rate = |f: &dyn Fn(&Value) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / reps as f64;
            let num = |v: &Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
            let dominance = rate(&|t| num(t, "gap") <= num(t, "upper") + 3.0 * num(t, "mc_error"));
            let sandwich = rate(&|t| num(t, "lower") <= num(t, "gap") + 3.0 * num(t, "mc_error"));
            print_json(&json!({ "trials": trials, "upper_holds_rate": dominance, "lower_holds_rate": sandwich }))
        }
        Command::Study(args) => run_study(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
