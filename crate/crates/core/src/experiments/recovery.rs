use super::generators::{gen_pairwise_from_scores, sample_entries, scores_from_model};
use super::{kendall_tau, map_trials, trial_rng};
use crate::error::{Error, Result};
use crate::scoring::{extract_scores, ScoreVector};
use crate::solver::{svp_complete, SolverConfig};

/// Relative 2-norm error below which a noiseless trial counts as recovered.
pub const RECOVERY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreModel {
    /// i.i.d. uniform scores on `[0, 1]`.
    UniformRandom,
    /// Evenly spaced scores from 0 to 1.
    UniformSpaced,
}

impl std::str::FromStr for ScoreModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" | "random" => Ok(ScoreModel::UniformRandom),
            "uniform_spaced" | "spaced" => Ok(ScoreModel::UniformSpaced),
            other => Err(Error::config(format!(
                "unknown score model {other:?}; expected uniform_random or uniform_spaced"
            ))),
        }
    }
}

impl std::fmt::Display for ScoreModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreModel::UniformRandom => "uniform_random",
            ScoreModel::UniformSpaced => "uniform_spaced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTrialSpec {
    pub n: usize,
    /// Observed oriented entries `|Omega|`; `num_samples / 2` unordered pairs
    /// are drawn and skew-closed.
    pub num_samples: usize,
    pub noise_eps: f64,
    pub score_model: ScoreModel,
    pub seed: u64,
    pub trials: usize,
}

impl RecoveryTrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("recovery trials need at least two items"));
        }
        if self.num_samples > self.n * (self.n - 1) {
            return Err(Error::config(format!(
                "{} samples exceed the {} off-diagonal entries",
                self.num_samples,
                self.n * (self.n - 1)
            )));
        }
        if self.num_samples < 2 {
            return Err(Error::config("need at least one sampled pair (2 oriented entries)"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if !(self.noise_eps >= 0.0 && self.noise_eps.is_finite()) {
            return Err(Error::config(format!("noise level must be >= 0, got {}", self.noise_eps)));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_eps == 0.0
    }
}

/// `round(multiplier * n ln n)`, capped at `n (n - 1)`.
pub fn nlogn_samples(n: usize, multiplier: f64) -> usize {
    let nf = n as f64;
    ((multiplier * nf * nf.ln()).round() as usize).min(n * n.saturating_sub(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Recovered,
    Failed,
    /// Noiseless trial whose solver hit the iteration limit.
    NotConverged,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Recovered => "recovered",
            TrialStatus::Failed => "failed",
            TrialStatus::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTrial {
    pub trial: usize,
    /// `||s_hat - s|| / ||s||` against the centered true scores.
    pub relative_error: f64,
    /// Kendall tau between recovered and true scores (NaN if undefined).
    pub tau: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub spec: RecoveryTrialSpec,
    pub trials: Vec<RecoveryTrial>,
}

impl RecoveryReport {
    pub fn successes(&self) -> usize {
        self.count(TrialStatus::Recovered)
    }

    pub fn success_fraction(&self) -> f64 {
        self.successes() as f64 / self.trials.len() as f64
    }

    pub fn count(&self, status: TrialStatus) -> usize {
        self.trials.iter().filter(|t| t.status == status).count()
    }
}

/// One trial: draw scores, build `Y`, sample, complete, extract, compare.
pub fn run_recovery(spec: &RecoveryTrialSpec, solver: &SolverConfig, trial: usize) -> Result<RecoveryTrial> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, trial);
    let truth = scores_from_model(spec.score_model, spec.n, &mut rng);
    let y = gen_pairwise_from_scores(&truth, spec.noise_eps, &mut rng)?;
    let samples = sample_entries(&y, spec.num_samples / 2, &mut rng)?;
    let outcome = svp_complete(&samples, solver)?;
    let recovered = extract_scores(&outcome.factors);

    let truth_c = ScoreVector::centered(&truth);
    let diff: f64 = recovered
        .scores()
        .iter()
        .zip(truth_c.scores())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let relative_error = diff / truth_c.norm();
    let tau = kendall_tau(recovered.scores(), &truth).unwrap_or(f64::NAN);

    let status = if spec.is_noiseless() {
        if !outcome.converged {
            TrialStatus::NotConverged
        } else if relative_error < RECOVERY_TOLERANCE {
            TrialStatus::Recovered
        } else {
            TrialStatus::Failed
        }
    } else if tau == 1.0 {
        TrialStatus::Recovered
    } else {
        TrialStatus::Failed
    };
    Ok(RecoveryTrial {
        trial,
        relative_error,
        tau,
        converged: outcome.converged,
        iterations: outcome.iterations,
        final_residual: outcome.final_residual(),
        status,
    })
}

/// Runs every trial of `spec`. Noiseless trials succeed on relative score
/// error below [`RECOVERY_TOLERANCE`]; noisy trials succeed when the recovered
/// order equals the true order exactly.
pub fn recovery_trial(spec: &RecoveryTrialSpec, solver: &SolverConfig) -> Result<RecoveryReport> {
    spec.validate()?;
    solver.validate()?;
    let trials = map_trials(spec.trials, |t| run_recovery(spec, solver, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryReport {
        spec: spec.clone(),
        trials,
    })
}
