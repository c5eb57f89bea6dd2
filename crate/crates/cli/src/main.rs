use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skewrank::aggregation::Method;
use skewrank::analysis::coherence;
use skewrank::experiments::{
    irt_comparison, nlogn_samples, recovery_trial, IrtSpec, RecoveryTrialSpec, ScoreModel, TrialStatus,
};
use skewrank::io::Metadata;
use skewrank::pipeline::{run_aggregate, run_analyze, run_rank, ModelCode, RunConfig, FORMAT_VERSION};
use skewrank::scoring::ScoreVector;
use skewrank::solver::SolverConfig;
use skewrank::svd::SvdOptions;
use skewrank::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_DOMAIN: u8 = 4;
const EXIT_NOT_CONVERGED: u8 = 5;

/// Rank aggregation by skew-symmetric matrix completion.
#[derive(Parser)]
#[command(name = "skewrank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the pairwise comparison matrix from a ratings file.
    Aggregate(AggregateArgs),
    /// Aggregate (or load an aggregate), complete, and rank the items.
    Rank(RankArgs),
    /// Recompute residuals and coherence for the output of `rank`.
    Analyze(AnalyzeArgs),
    /// Recovery success rate against the number of sampled comparisons.
    SynthRecovery(RecoveryArgs),
    /// Completion versus mean-rating Kendall tau on item-response data.
    SynthIrt(IrtArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Ratings file (voter_id, item_id, rating), or an `aggregate` output directory for `rank`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Field delimiter of the ratings file: a single character, or `tab`.
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
}

#[derive(Args)]
struct ModelArgs {
    /// Aggregation method: am, gm, bc, sb or lo.
    #[arg(long, default_value = "am")]
    method: Method,
    /// Drop users with fewer ratings before aggregating.
    #[arg(long, default_value_t = 0)]
    min_user_ratings: usize,
}

#[derive(Args)]
struct SolverArgs {
    /// Target rank (even).
    #[arg(long = "rank", default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rank: self.rank,
            step_length: self.eta,
            tolerance: self.tol,
            max_iterations: self.max_iters,
            svd: SvdOptions {
                seed: self.seed,
                ..Default::default()
            },
        }
    }
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    io: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    io: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Discard pairwise entries supported by fewer voters.
    #[arg(long, default_value_t = 0)]
    min_support: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Confidence parameter of the coherence sample bound.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Exit with status 5 when the solver does not reach the tolerance.
    #[arg(long)]
    strict: bool,
    /// Number of ranked items printed.
    #[arg(long, default_value_t = 20)]
    top: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Output directory of a `rank` run.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Also solve the same constraints at this rank and report its residuals.
    #[arg(long)]
    compare_rank: Option<usize>,
}

#[derive(Args)]
struct RecoveryArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Sample counts as multiples of n ln n (oriented entries).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
    multipliers: Vec<f64>,
    /// Explicit sample counts; overrides --multipliers.
    #[arg(long, value_delimiter = ',')]
    samples: Vec<usize>,
    /// Noise levels to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    eps: Vec<f64>,
    /// uniform_random or uniform_spaced; defaults to uniform_random when noiseless
    /// and uniform_spaced otherwise.
    #[arg(long)]
    score_model: Option<ScoreModel>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct IrtArgs {
    #[arg(long, default_value_t = 1000)]
    users: usize,
    #[arg(long, default_value_t = 100)]
    items: usize,
    /// Average ratings per user; one sweep per value.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    ratings_per_user: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one byte or `tab`, got {s:?}")),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Parse { .. } | Error::Io { .. } | Error::Csv(_) => EXIT_INPUT,
        Error::Domain(_) | Error::DimensionMismatch { .. } | Error::EmptyConstraints { .. } => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Aggregate(a) => aggregate(a),
        Command::Rank(a) => rank(a),
        Command::Analyze(a) => analyze(a),
        Command::SynthRecovery(a) => synth_recovery(a),
        Command::SynthIrt(a) => synth_irt(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run_config(io: InputArgs, model: ModelArgs, min_support: usize, solver: SolverConfig, beta: f64) -> RunConfig {
    RunConfig {
        model: ModelCode {
            method: model.method,
            min_user_ratings: model.min_user_ratings,
            min_support,
        },
        solver,
        beta,
        delimiter: io.delimiter,
        input: io.input,
        output_dir: io.output_dir,
    }
}

fn aggregate(args: AggregateArgs) -> skewrank::Result<u8> {
    let config = run_config(args.io, args.model, 0, SolverConfig::default(), 1.0);
    let agg = run_aggregate(&config)?;
    print!("{}", agg.metadata.to_text());
    Ok(0)
}

fn rank(args: RankArgs) -> skewrank::Result<u8> {
    let (strict, top) = (args.strict, args.top);
    let config = run_config(args.io, args.model, args.min_support, args.solver.config(), args.beta);
    let run = run_rank(&config)?;
    print!("{}", run.metadata.to_text());
    println!();
    println!("rank,item_id,score");
    for item in run.ranking.items.iter().take(top) {
        println!("{},{},{}", item.rank, item.id, item.score);
    }
    if !run.outcome.converged {
        eprintln!(
            "warning: solver stopped after {} iterations at relative residual {} (tolerance {})",
            run.outcome.iterations,
            run.outcome.final_residual(),
            config.solver.tolerance
        );
        if strict {
            return Ok(EXIT_NOT_CONVERGED);
        }
    }
    Ok(0)
}

fn analyze(args: AnalyzeArgs) -> skewrank::Result<u8> {
    if !(args.beta > 0.0 && args.beta.is_finite()) {
        return Err(Error::Config(format!("beta must be positive, got {}", args.beta)));
    }
    let report = run_analyze(&args.input, args.beta, args.compare_rank, args.output_dir.as_deref())?;
    print!("{}", report.metadata.to_text());
    Ok(0)
}

fn write_outputs(dir: Option<&Path>, files: &[(&str, &str)]) -> skewrank::Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

fn solver_meta(meta: &mut Metadata, s: &SolverArgs) {
    meta.push("rank", s.rank);
    meta.push("eta", s.eta);
    meta.push("tol", s.tol);
    meta.push("max_iters", s.max_iters);
    meta.push("seed", s.seed);
}

fn synth_recovery(args: RecoveryArgs) -> skewrank::Result<u8> {
    let solver = args.solver.config();
    let counts: Vec<(String, usize)> = if args.samples.is_empty() {
        args.multipliers
            .iter()
            .map(|&m| (m.to_string(), nlogn_samples(args.n, m)))
            .collect()
    } else {
        args.samples.iter().map(|&m| ("-".to_string(), m)).collect()
    };

    let mut trials = String::from("eps,multiplier,num_samples,trial,status,relative_error,tau,converged,iterations,final_residual\n");
    let mut summary = String::from(
        "eps,multiplier,num_samples,trials,recovered,failed,not_converged,success_fraction,mean_nu\n",
    );
    for &eps in &args.eps {
        let score_model = args.score_model.unwrap_or(if eps == 0.0 {
            ScoreModel::UniformRandom
        } else {
            ScoreModel::UniformSpaced
        });
        for (mult, m) in &counts {
            let spec = RecoveryTrialSpec {
                n: args.n,
                num_samples: *m,
                noise_eps: eps,
                score_model,
                seed: args.solver.seed,
                trials: args.trials,
            };
            let report = recovery_trial(&spec, &solver)?;
            for t in &report.trials {
                writeln!(
                    trials,
                    "{eps},{mult},{m},{},{},{},{},{},{},{}",
                    t.trial,
                    t.status.as_str(),
                    t.relative_error,
                    t.tau,
                    t.converged,
                    t.iterations,
                    t.final_residual
                )
                .unwrap();
            }
            let nu = mean_nu(&spec);
            writeln!(
                summary,
                "{eps},{mult},{m},{},{},{},{},{},{nu}",
                report.trials.len(),
                report.successes(),
                report.count(TrialStatus::Failed),
                report.count(TrialStatus::NotConverged),
                report.success_fraction()
            )
            .unwrap();
        }
    }
    print!("{summary}");

    let mut meta = Metadata::default();
    meta.push("format", FORMAT_VERSION);
    meta.push("command", "synth-recovery");
    meta.push("n", args.n);
    meta.push("trials", args.trials);
    meta.push("sample_unit", "oriented entries; num_samples/2 unordered pairs are drawn and skew-closed");
    meta.push("noise", "eps*(E - E^T)/2, per-entry sd eps/sqrt(2)");
    solver_meta(&mut meta, &args.solver);
    write_outputs(
        args.output_dir.as_deref(),
        &[("trials.csv", &trials), ("summary.csv", &summary), ("meta.txt", &meta.to_text())],
    )?;
    Ok(0)
}

/// Mean coherence parameter of the score vectors the trials of `spec` draw.
fn mean_nu(spec: &RecoveryTrialSpec) -> f64 {
    use skewrank::experiments::{scores_from_model, trial_rng};
    let total: f64 = (0..spec.trials)
        .map(|t| {
            let s = scores_from_model(spec.score_model, spec.n, &mut trial_rng(spec.seed, t));
            coherence(ScoreVector::centered(&s).scores(), 1.0).map_or(f64::NAN, |c| c.nu)
        })
        .sum();
    total / spec.trials as f64
}

fn synth_irt(args: IrtArgs) -> skewrank::Result<u8> {
    let solver = args.solver.config();
    let mut trials = String::from("ratings_per_user,eps,trial,tau_nn,tau_mean,unrated_items,converged,iterations\n");
    let mut summary = String::from(
        "ratings_per_user,eps,trials,nn_q25,nn_median,nn_q75,mean_q25,mean_median,mean_q75\n",
    );
    let mut warnings = 0;
    for &avg in &args.ratings_per_user {
        for &eps in &args.eps {
            let spec = IrtSpec {
                num_users: args.users,
                num_items: args.items,
                avg_ratings_per_user: avg,
                noise_eps: eps,
                seed: args.solver.seed,
                trials: args.trials,
            };
            let report = irt_comparison(&spec, &solver)?;
            for t in &report.trials {
                writeln!(
                    trials,
                    "{avg},{eps},{},{},{},{},{},{}",
                    t.trial, t.tau_nn, t.tau_mean, t.unrated_items, t.converged, t.iterations
                )
                .unwrap();
            }
            let (nn, mean) = (report.nn, report.mean);
            writeln!(
                summary,
                "{avg},{eps},{},{},{},{},{},{},{}",
                report.trials.len(),
                nn.q25,
                nn.median,
                nn.q75,
                mean.q25,
                mean.median,
                mean.q75
            )
            .unwrap();
            warnings += report.warnings.len();
        }
    }
    print!("{summary}");
    if warnings > 0 {
        eprintln!("warning: {warnings} trials had unrated items excluded from the mean-rating baseline");
    }

    let mut meta = Metadata::default();
    meta.push("format", FORMAT_VERSION);
    meta.push("command", "synth-irt");
    meta.push("users", args.users);
    meta.push("items", args.items);
    meta.push("trials", args.trials);
    meta.push("method", Method::ArithmeticMean);
    meta.push("min_support", 0);
    meta.push("presence", "each cell rated independently with probability ratings_per_user/items");
    solver_meta(&mut meta, &args.solver);
    write_outputs(
        args.output_dir.as_deref(),
        &[("trials.csv", &trials), ("summary.csv", &summary), ("meta.txt", &meta.to_text())],
    )?;
    Ok(0)
}
