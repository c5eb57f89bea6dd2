use super::generators::gen_irt_ratings;
use super::{kendall_tau, map_trials, quantile, trial_rng};
use crate::aggregation::{aggregate, filter_support, Method};
use crate::error::{Error, Result};
use crate::ratings::RatingsMatrix;
use crate::scoring::extract_scores;
use crate::solver::{svp_complete, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct IrtSpec {
    pub num_users: usize,
    pub num_items: usize,
    pub avg_ratings_per_user: f64,
    pub noise_eps: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for IrtSpec {
    fn default() -> Self {
        Self {
            num_users: 1000,
            num_items: 100,
            avg_ratings_per_user: 5.0,
            noise_eps: 0.0,
            seed: 0,
            trials: 50,
        }
    }
}

impl IrtSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_items < 2 || self.num_users == 0 {
            return Err(Error::config("need at least one user and two items"));
        }
        if !(self.avg_ratings_per_user > 0.0 && self.avg_ratings_per_user <= self.num_items as f64) {
            return Err(Error::config(format!(
                "average ratings per user must be in (0, {}], got {}",
                self.num_items, self.avg_ratings_per_user
            )));
        }
        if !(self.noise_eps >= 0.0 && self.noise_eps.is_finite()) {
            return Err(Error::config(format!("noise level must be >= 0, got {}", self.noise_eps)));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrtTrial {
    pub trial: usize,
    /// Kendall tau of the completion scores against the true item quality.
    pub tau_nn: f64,
    /// Kendall tau of the per-item mean rating against the true item quality.
    pub tau_mean: f64,
    /// Items with no rating at all, left out of `tau_mean`.
    pub unrated_items: usize,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Quartiles {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        v.sort_by(f64::total_cmp);
        Self {
            q25: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q75: quantile(&v, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrtReport {
    pub spec: IrtSpec,
    pub trials: Vec<IrtTrial>,
    pub nn: Quartiles,
    pub mean: Quartiles,
    pub warnings: Vec<String>,
}

/// Kendall tau between completion scores from `ratings` and `truth`.
///
/// Runs the full pipeline: aggregate with `method`, keep every entry, complete
/// at the configured rank, extract scores. A constant score vector has no
/// order information and scores 0.
pub fn completion_tau(
    ratings: &RatingsMatrix,
    truth: &[f64],
    method: Method,
    solver: &SolverConfig,
) -> Result<(f64, bool, usize)> {
    let y = aggregate(ratings, method)?;
    let samples = filter_support(&y, 0).samples;
    if samples.is_empty() {
        return Ok((0.0, false, 0));
    }
    let outcome = svp_complete(&samples, solver)?;
    let scores = extract_scores(&outcome.factors);
    let tau = kendall_tau(scores.scores(), truth).unwrap_or(0.0);
    Ok((tau, outcome.converged, outcome.iterations))
}

/// Kendall tau of per-item mean ratings against `truth`, over rated items only.
/// Returns the tau and the number of unrated items left out.
pub fn mean_rating_tau(ratings: &RatingsMatrix, truth: &[f64]) -> (f64, usize) {
    let mut sums = vec![0.0; ratings.num_items()];
    let mut counts = vec![0usize; ratings.num_items()];
    for r in ratings.entries() {
        sums[r.item] += r.value;
        counts[r.item] += 1;
    }
    let (means, kept): (Vec<f64>, Vec<f64>) = (0..ratings.num_items())
        .filter(|&i| counts[i] > 0)
        .map(|i| (sums[i] / counts[i] as f64, truth[i]))
        .unzip();
    let unrated = ratings.num_items() - means.len();
    (kendall_tau(&means, &kept).unwrap_or(0.0), unrated)
}

pub fn irt_trial(spec: &IrtSpec, solver: &SolverConfig, trial: usize) -> Result<IrtTrial> {
    let mut rng = trial_rng(spec.seed, trial);
    let data = gen_irt_ratings(spec, &mut rng)?;
    let (tau_nn, converged, iterations) =
        completion_tau(&data.ratings, &data.item_quality, Method::ArithmeticMean, solver)?;
    let (tau_mean, unrated_items) = mean_rating_tau(&data.ratings, &data.item_quality);
    Ok(IrtTrial {
        trial,
        tau_nn,
        tau_mean,
        unrated_items,
        converged,
        iterations,
    })
}

/// Completion (arithmetic-mean aggregation, no support filter) against the
/// mean-rating baseline over `spec.trials` independent draws.
pub fn irt_comparison(spec: &IrtSpec, solver: &SolverConfig) -> Result<IrtReport> {
    spec.validate()?;
    solver.validate()?;
    let trials = map_trials(spec.trials, |t| irt_trial(spec, solver, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let warnings = trials
        .iter()
        .filter(|t| t.unrated_items > 0)
        .map(|t| {
            format!(
                "trial {}: {} unrated items excluded from the mean-rating baseline",
                t.trial, t.unrated_items
            )
        })
        .collect();
    Ok(IrtReport {
        spec: spec.clone(),
        nn: Quartiles::of(trials.iter().map(|t| t.tau_nn)),
        mean: Quartiles::of(trials.iter().map(|t| t.tau_mean)),
        trials,
        warnings,
    })
}
