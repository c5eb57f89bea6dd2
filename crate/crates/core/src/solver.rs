//! Singular value projection for the fixed-rank completion problem
//!
//! ```text
//! minimise ||Omega(X) - b||_2  subject to  rank(X) <= k
//! ```
//!
//! Starting from `X = 0`, each step forms `X - eta * P_Omega(X - b)` (the
//! current iterate with its sampled entries pulled towards the targets) and
//! projects it back onto rank-k matrices with a truncated SVD.
//!
//! When the sample set is skew-closed and `k` is even, every iterate stays
//! skew-symmetric: the step preserves skew-symmetry, and the rank-k truncation
//! of a skew matrix whose singular pairs are separated at `k` is again skew.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, SparseMatrix};
use crate::sample::SampleSet;
use crate::svd::{truncated_svd, LowRankFactors, SvdOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target rank; even and at least 2.
    pub rank: usize,
    pub step_length: f64,
    /// Stop once `||Omega(X) - b|| / ||b|| <= tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub svd: SvdOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: 2,
            step_length: 1.0,
            tolerance: 1e-4,
            max_iterations: 500,
            svd: SvdOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 || self.rank % 2 != 0 {
            return Err(Error::config(format!(
                "target rank must be even and at least 2, got {}",
                self.rank
            )));
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(Error::config(format!(
                "step length must be positive, got {}",
                self.step_length
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SvpOutcome {
    pub factors: LowRankFactors,
    /// Relative residual of every iterate, `X^(0) = 0` first. Absolute when `b = 0`.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Some truncation had `sigma_k` within the gap tolerance of `sigma_{k+1}`.
    pub gap_violated: bool,
    /// Truncated SVDs that stopped at the sweep limit before meeting their tolerance.
    pub inexact_svds: usize,
}

impl SvpOutcome {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }
}

pub fn svp_complete(samples: &SampleSet, config: &SolverConfig) -> Result<SvpOutcome> {
    svp_complete_observed(samples, config, |_, _| {})
}

/// Like [`svp_complete`], calling `observer(t, X^(t))` for every iterate
/// including `X^(0) = 0`.
pub fn svp_complete_observed(
    samples: &SampleSet,
    config: &SolverConfig,
    mut observer: impl FnMut(usize, &LowRankFactors),
) -> Result<SvpOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::domain("sample set is empty"));
    }
    let n = samples.num_items();
    if config.rank > n {
        return Err(Error::config(format!(
            "target rank {} exceeds the number of items {n}",
            config.rank
        )));
    }

    let scale = match samples.target_norm() {
        0.0 => 1.0,
        norm => norm,
    };
    let mut x = LowRankFactors::zeros(n, config.rank);
    let mut history = Vec::new();
    let mut gap_violated = false;
    let mut inexact_svds = 0;
    let mut converged = false;
    let mut t = 0;

    loop {
        observer(t, &x);
        let misfit: Vec<f64> = samples.iter().map(|(r, c, b)| x.entry(r, c) - b).collect();
        let residual = misfit.iter().map(|d| d * d).sum::<f64>().sqrt() / scale;
        history.push(residual);
        if residual <= config.tolerance {
            converged = true;
            break;
        }
        if t >= config.max_iterations {
            break;
        }

        // Built from the skew part of X so the next SVD input is exactly skew.
        let correction: Vec<f64> = samples
            .iter()
            .map(|(r, c, b)| -config.step_length * ((x.entry(r, c) - x.entry(c, r)) / 2.0 - b))
            .collect();
        let step = SvpStep {
            iterate: &x,
            correction: SparseMatrix::new(n, samples.pairs(), &correction)?,
        };
        let warm = (t > 0).then_some(&x.v);
        let svd = truncated_svd(&step, config.rank, &config.svd, warm)?;
        gap_violated |= svd.gap_violated();
        if !svd.converged {
            inexact_svds += 1;
        }
        x = svd.factors;
        t += 1;
    }

    Ok(SvpOutcome {
        factors: x,
        residual_history: history,
        iterations: t,
        converged,
        gap_violated,
        inexact_svds,
    })
}

/// `X - eta * P_Omega(X - b)` as a low-rank plus sparse operator, with `X`
/// replaced by its skew part `(X - X^T) / 2`. The two agree in exact
/// arithmetic; without the projection, rounding in `X` is amplified whenever
/// two singular pairs nearly coincide.
struct SvpStep<'a> {
    iterate: &'a LowRankFactors,
    correction: SparseMatrix,
}

impl LinearOperator for SvpStep<'_> {
    fn dim(&self) -> usize {
        self.iterate.n()
    }

    fn apply(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = (self.iterate.apply(q) - self.iterate.apply_transpose(q)) * 0.5;
        self.correction.accumulate(q, &mut out, 1.0, false);
        out
    }

    fn apply_transpose(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = (self.iterate.apply_transpose(q) - self.iterate.apply(q)) * 0.5;
        self.correction.accumulate(q, &mut out, 1.0, true);
        out
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let x = self.iterate.to_dense();
        let mut out = (&x - x.transpose()) * 0.5;
        for (r, c, v) in self.correction.triplets() {
            out[(r, c)] += v;
        }
        out
    }
}
