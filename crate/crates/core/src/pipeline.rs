//! End-to-end runs: ratings file to pairwise matrix to ranked list, with
//! run metadata written next to every output.
//!
//! An aggregate directory holds `items.csv`, `pairwise.coo`,
//! `pairwise.support` and `meta.txt`. A rank directory additionally holds
//! `samples.coo` (the filtered constraints the solver saw), `ranking.csv`,
//! the three factor files and `residuals.csv` (one row per iterate).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::aggregation::{aggregate, filter_support, support_histogram, Method, PairwiseMatrix};
use crate::analysis::{coherence, CoherenceReport};
use crate::error::{Error, Result};
use crate::io::{self, Metadata, RatingsTable};
use crate::ratings::Labels;
use crate::sample::SampleSet;
use crate::scoring::{extract_scores, rank_items, score_residual, solver_residual, RankedList, Residual, ScoreVector};
use crate::solver::{svp_complete, SolverConfig, SvpOutcome};
use crate::svd::{LowRankFactors, SvdBackend};

pub const FORMAT_VERSION: &str = "skewrank-run v1";

/// `<method> <min-user-ratings> <min-support>`, e.g. `am 6 30`.
/// A minimum of zero user ratings is written `all`, as in `sb all 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCode {
    pub method: Method,
    pub min_user_ratings: usize,
    pub min_support: usize,
}

impl fmt::Display for ModelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.min_user_ratings {
            0 => write!(f, "{} all {}", self.method, self.min_support),
            m => write!(f, "{} {m} {}", self.method, self.min_support),
        }
    }
}

impl FromStr for ModelCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [method, users, support] = parts[..] else {
            return Err(Error::config(format!(
                "model code {s:?} must look like \"am 6 30\""
            )));
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::config(format!("bad count {v:?} in model code {s:?}")))
        };
        Ok(Self {
            method: method.parse()?,
            min_user_ratings: if users == "all" { 0 } else { count(users)? },
            min_support: count(support)?,
        })
    }
}

/// Configuration shared by the data commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelCode,
    pub solver: SolverConfig,
    /// Confidence parameter of the coherence bound.
    pub beta: f64,
    pub delimiter: u8,
    pub input: PathBuf,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, method: Method) -> Self {
        Self {
            model: ModelCode {
                method,
                min_user_ratings: 0,
                min_support: 0,
            },
            solver: SolverConfig::default(),
            beta: 1.0,
            delimiter: b',',
            input: input.into(),
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::config("input path is empty"));
        }
        if matches!(&self.output_dir, Some(p) if p.as_os_str().is_empty()) {
            return Err(Error::config("output directory is empty"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {}", self.beta)));
        }
        self.solver.validate()
    }
}

fn backend_name(b: SvdBackend) -> &'static str {
    match b {
        SvdBackend::Auto => "auto",
        SvdBackend::Dense => "dense",
        SvdBackend::Iterative => "iterative",
    }
}

/// The aggregate matrix of a (filtered) ratings table and its provenance.
#[derive(Debug, Clone)]
pub struct Aggregated {
    pub method: Method,
    pub min_user_ratings: usize,
    pub items: Labels,
    pub pairwise: PairwiseMatrix,
    pub metadata: Metadata,
}

impl Aggregated {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_items(&dir.join("items.csv"), &self.items)?;
        io::write_pairwise(
            &dir.join("pairwise"),
            &self.pairwise,
            &[
                ("method", self.method.to_string()),
                ("min_user_ratings", self.min_user_ratings.to_string()),
            ],
        )?;
        self.metadata.write(&dir.join("meta.txt"))
    }

    /// Reads a directory written by [`Aggregated::write`].
    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.txt");
        let metadata = Metadata::read(&meta_path)?;
        let method: Method = metadata.require("method", &meta_path)?;
        let min_user_ratings = metadata.require("min_user_ratings", &meta_path)?;
        let items = io::read_items(&dir.join("items.csv"))?;
        let pairwise = io::read_pairwise(&dir.join("pairwise"))?;
        if pairwise.num_items() != items.len() {
            return Err(Error::DimensionMismatch {
                expected: items.len(),
                got: pairwise.num_items(),
            });
        }
        Ok(Self {
            method,
            min_user_ratings,
            items,
            pairwise,
            metadata,
        })
    }
}

/// Drops light users, checks the method's domain against the original
/// records, and aggregates.
pub fn aggregate_table(
    table: &RatingsTable,
    source: &Path,
    method: Method,
    min_user_ratings: usize,
) -> Result<Aggregated> {
    let counts = table.ratings.ratings_per_voter();
    let kept = |voter: usize| counts[voter] >= min_user_ratings;
    if method == Method::GeometricMean {
        let bad = table
            .ratings
            .entries()
            .iter()
            .enumerate()
            .find(|(_, r)| kept(r.voter) && r.value <= 0.0);
        if let Some((k, r)) = bad {
            return Err(Error::Domain(format!(
                "{}:{}: geometric mean needs positive ratings; voter {:?} rated item {:?} as {}",
                source.display(),
                table.line_of(k),
                table.voters.id(r.voter),
                table.items.id(r.item),
                r.value
            )));
        }
    }
    let ratings = table.ratings.with_min_voter_ratings(min_user_ratings);
    let pairwise = aggregate(&ratings, method)?;
    let hist = support_histogram(&pairwise, &[])?;

    let mut metadata = Metadata::default();
    metadata.push("format", FORMAT_VERSION);
    metadata.push("input", source.display());
    metadata.push("method", method);
    metadata.push("min_user_ratings", min_user_ratings);
    metadata.push("num_voters", table.voters.len());
    metadata.push("num_voters_kept", counts.iter().filter(|&&c| c > 0 && c >= min_user_ratings).count());
    metadata.push("num_ratings", table.ratings.len());
    metadata.push("num_ratings_kept", ratings.len());
    metadata.push("num_items", table.items.len());
    metadata.push("pairs_present", hist.pairs_present);
    metadata.push("pair_coverage", hist.coverage());
    Ok(Aggregated {
        method,
        min_user_ratings,
        items: table.items.clone(),
        pairwise,
        metadata,
    })
}

/// Everything a rank run produces.
#[derive(Debug, Clone)]
pub struct RankRun {
    pub model: ModelCode,
    pub solver: SolverConfig,
    pub items: Labels,
    pub pairwise: PairwiseMatrix,
    pub samples: SampleSet,
    pub outcome: SvpOutcome,
    pub scores: ScoreVector,
    pub ranking: RankedList,
    pub solver_residual: Residual,
    pub score_residual: Residual,
    /// `Err` holds the reason coherence is undefined (zero scores).
    pub coherence: std::result::Result<CoherenceReport, String>,
    pub metadata: Metadata,
}

fn push_residual(meta: &mut Metadata, name: &str, r: Residual) {
    meta.push(name, r.value);
    meta.push(format!("{name}_relative"), r.relative);
}

fn push_coherence(meta: &mut Metadata, c: &std::result::Result<CoherenceReport, String>) {
    match c {
        Ok(report) => meta.extend(report.to_records()),
        Err(reason) => meta.push("coherence_undefined", reason),
    }
}

/// Filters, completes, extracts and ranks.
pub fn rank_aggregated(
    agg: &Aggregated,
    min_support: usize,
    solver: &SolverConfig,
    beta: f64,
) -> Result<RankRun> {
    solver.validate()?;
    let model = ModelCode {
        method: agg.method,
        min_user_ratings: agg.min_user_ratings,
        min_support,
    };
    let samples = filter_support(&agg.pairwise, min_support).samples;
    if samples.is_empty() {
        return Err(Error::EmptyConstraints { min_support });
    }
    let outcome = svp_complete(&samples, solver)?;
    let scores = extract_scores(&outcome.factors);
    let ranking = rank_items(&scores, agg.items.ids())?;
    let solver_res = solver_residual(&samples, &outcome.factors)?;
    let score_res = score_residual(&samples, &scores)?;
    let coh = coherence(scores.scores(), beta).map_err(|e| e.to_string());

    let mut meta = Metadata::default();
    meta.push("format", FORMAT_VERSION);
    meta.push("command", "rank");
    meta.push("model", model);
    meta.push("input", agg.metadata.get("input").unwrap_or("-"));
    meta.push("method", model.method);
    meta.push("min_user_ratings", model.min_user_ratings);
    meta.push("min_support", model.min_support);
    meta.push("rank", solver.rank);
    meta.push("eta", solver.step_length);
    meta.push("tol", solver.tolerance);
    meta.push("max_iters", solver.max_iterations);
    meta.push("seed", solver.svd.seed);
    meta.push("svd_backend", backend_name(solver.svd.backend));
    meta.push("num_items", samples.num_items());
    meta.push("num_samples", samples.len());
    meta.push("iterations", outcome.iterations);
    meta.push("converged", outcome.converged);
    meta.push("gap_violated", outcome.gap_violated);
    meta.push("inexact_svds", outcome.inexact_svds);
    push_residual(&mut meta, "solver_residual", solver_res);
    push_residual(&mut meta, "score_residual", score_res);
    push_coherence(&mut meta, &coh);

    Ok(RankRun {
        model,
        solver: solver.clone(),
        items: agg.items.clone(),
        pairwise: agg.pairwise.clone(),
        samples,
        outcome,
        scores,
        ranking,
        solver_residual: solver_res,
        score_residual: score_res,
        coherence: coh,
        metadata: meta,
    })
}

impl RankRun {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_items(&dir.join("items.csv"), &self.items)?;
        io::write_pairwise(
            &dir.join("pairwise"),
            &self.pairwise,
            &[
                ("method", self.model.method.to_string()),
                ("min_user_ratings", self.model.min_user_ratings.to_string()),
            ],
        )?;
        io::write_samples(&dir.join("samples.coo"), &self.samples)?;
        io::write_ranking(&dir.join("ranking.csv"), &self.ranking)?;
        io::write_factors(dir, &self.outcome.factors)?;
        let mut history = String::from("iteration,residual\n");
        for (t, r) in self.outcome.residual_history.iter().enumerate() {
            history.push_str(&format!("{t},{r}\n"));
        }
        let path = dir.join("residuals.csv");
        fs::write(&path, history).map_err(|e| Error::io(&path, e))?;
        self.metadata.write(&dir.join("meta.txt"))
    }
}

fn load_input(config: &RunConfig) -> Result<Aggregated> {
    if config.input.is_dir() {
        let agg = Aggregated::load(&config.input)?;
        if agg.method != config.model.method || agg.min_user_ratings != config.model.min_user_ratings {
            return Err(Error::config(format!(
                "{} was aggregated as \"{} {}\" but the run asks for \"{} {}\"",
                config.input.display(),
                agg.method,
                agg.min_user_ratings,
                config.model.method,
                config.model.min_user_ratings
            )));
        }
        Ok(agg)
    } else {
        let table = io::read_ratings(&config.input, config.delimiter)?;
        aggregate_table(&table, &config.input, config.model.method, config.model.min_user_ratings)
    }
}

pub fn run_aggregate(config: &RunConfig) -> Result<Aggregated> {
    config.validate()?;
    let table = io::read_ratings(&config.input, config.delimiter)?;
    let mut agg = aggregate_table(&table, &config.input, config.model.method, config.model.min_user_ratings)?;
    agg.metadata.push("command", "aggregate");
    if let Some(dir) = &config.output_dir {
        agg.write(dir)?;
    }
    Ok(agg)
}

/// Ranks from a ratings file or from a directory written by [`run_aggregate`].
pub fn run_rank(config: &RunConfig) -> Result<RankRun> {
    config.validate()?;
    let agg = load_input(config)?;
    let run = rank_aggregated(&agg, config.model.min_support, &config.solver, config.beta)?;
    if let Some(dir) = &config.output_dir {
        run.write(dir)?;
    }
    Ok(run)
}

/// Residuals and coherence recomputed from a rank directory.
#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub solver_residual: Residual,
    pub score_residual: Residual,
    /// Stored values rendered in the run's metadata.
    pub stored_solver_residual: Option<String>,
    pub stored_score_residual: Option<String>,
    pub coherence: std::result::Result<CoherenceReport, String>,
    /// `(rank, solver residual, score residual)` for a re-solve at another rank.
    pub comparison: Option<(usize, Residual, Residual)>,
    pub metadata: Metadata,
}

impl AnalyzeReport {
    /// Recomputed residuals reproduce the stored ones exactly.
    pub fn reproduces_stored(&self) -> bool {
        self.stored_solver_residual.as_deref() == Some(&self.solver_residual.value.to_string())
            && self.stored_score_residual.as_deref() == Some(&self.score_residual.value.to_string())
    }
}

/// Re-derives the diagnostics of a rank directory. With `compare_rank`, the
/// same constraints are solved again at that rank using the stored solver
/// settings.
pub fn run_analyze(dir: &Path, beta: f64, compare_rank: Option<usize>, output_dir: Option<&Path>) -> Result<AnalyzeReport> {
    let meta_path = dir.join("meta.txt");
    let stored = Metadata::read(&meta_path)?;
    let samples = io::read_samples(&dir.join("samples.coo"))?;
    let factors: LowRankFactors = io::read_factors(dir)?;
    let scores = extract_scores(&factors);
    let solver_res = solver_residual(&samples, &factors)?;
    let score_res = score_residual(&samples, &scores)?;
    let coh = coherence(scores.scores(), beta).map_err(|e| e.to_string());

    let comparison = match compare_rank {
        None => None,
        Some(k) => {
            let solver = SolverConfig {
                rank: k,
                step_length: stored.require("eta", &meta_path)?,
                tolerance: stored.require("tol", &meta_path)?,
                max_iterations: stored.require("max_iters", &meta_path)?,
                svd: crate::svd::SvdOptions {
                    seed: stored.require("seed", &meta_path)?,
                    ..Default::default()
                },
            };
            let outcome = svp_complete(&samples, &solver)?;
            let s = extract_scores(&outcome.factors);
            Some((
                k,
                solver_residual(&samples, &outcome.factors)?,
                score_residual(&samples, &s)?,
            ))
        }
    };

    let mut meta = Metadata::default();
    meta.push("format", FORMAT_VERSION);
    meta.push("command", "analyze");
    meta.push("run", dir.display());
    for key in ["model", "rank", "eta", "tol", "max_iters", "seed"] {
        if let Some(v) = stored.get(key) {
            meta.push(key, v);
        }
    }
    push_residual(&mut meta, "solver_residual", solver_res);
    push_residual(&mut meta, "score_residual", score_res);
    if let Some((k, sr, cr)) = comparison {
        meta.push("compare_rank", k);
        push_residual(&mut meta, "compare_solver_residual", sr);
        push_residual(&mut meta, "compare_score_residual", cr);
    }
    push_coherence(&mut meta, &coh);

    let mut report = AnalyzeReport {
        solver_residual: solver_res,
        score_residual: score_res,
        stored_solver_residual: stored.get("solver_residual").map(str::to_owned),
        stored_score_residual: stored.get("score_residual").map(str::to_owned),
        coherence: coh,
        comparison,
        metadata: meta,
    };
    let matches = report.reproduces_stored();
    report.metadata.push("reproduces_stored", matches);
    if let Some(out) = output_dir {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        report.metadata.write(&out.join("analysis.txt"))?;
    }
    Ok(report)
}
