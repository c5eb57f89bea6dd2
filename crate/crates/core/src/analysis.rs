//! Coherence diagnostics for recovering a score vector by matrix completion.
//!
//! For a centered score vector `s` (`s^T e = 0`) the comparison matrix
//! `Y = s e^T - e s^T` lifts to the Hermitian `iY`, whose coherence against
//! the operator basis `H = S u K u D` (symmetric, skew and diagonal unit
//! elements) reduces to two scalars:
//!
//! ```text
//! theta = max_i s_i^2 / (s^T s)
//! rho   = (max_i s_i - min_i s_i) / ||s||
//! nu    = max((n theta + 1) / 4, n rho^2)
//! ```
//!
//! The projector traces against the symmetric and diagonal elements are
//! bounded by `1/n + theta`, and the squared sign traces against the skew
//! elements by `(2/n) rho^2`; those bounds are what produce `nu`. Exact
//! recovery then holds with probability `1 - n^-beta` once `|Omega|` is of
//! order `2 n nu (1 + beta) (log n)^2`. The order constant is unknown, so
//! [`CoherenceReport::sample_bound`] is the bare product with the natural log.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    pub n: usize,
    pub theta: f64,
    pub rho: f64,
    pub nu: f64,
    pub beta: f64,
    /// `2 n nu (1 + beta) (ln n)^2`.
    pub sample_bound: f64,
}

impl CoherenceReport {
    /// Key-value lines, one per field.
    pub fn to_records(&self) -> Vec<(String, String)> {
        vec![
            ("coherence_n".into(), self.n.to_string()),
            ("coherence_theta".into(), self.theta.to_string()),
            ("coherence_rho".into(), self.rho.to_string()),
            ("coherence_nu".into(), self.nu.to_string()),
            ("coherence_beta".into(), self.beta.to_string()),
            ("coherence_sample_bound".into(), self.sample_bound.to_string()),
            ("coherence_log_base".into(), "e".into()),
        ]
    }
}

impl fmt::Display for CoherenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_records() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Evaluates `theta`, `rho`, `nu` and the sample bound for a centered, nonzero `s`.
pub fn coherence(s: &[f64], beta: f64) -> Result<CoherenceReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let n = s.len();
    let sq: f64 = s.iter().map(|x| x * x).sum();
    if n == 0 || sq == 0.0 {
        return Err(Error::domain("coherence is undefined for a zero score vector"));
    }
    let max_abs = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sum: f64 = s.iter().sum();
    if sum.abs() > 1e-10 * n as f64 * max_abs {
        return Err(Error::domain(format!(
            "score vector must be centered (sum is {sum})"
        )));
    }

    let (lo, hi) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let nf = n as f64;
    let theta = s.iter().map(|x| x * x).fold(0.0, f64::max) / sq;
    let rho = (hi - lo) / sq.sqrt();
    let nu = ((nf * theta + 1.0) / 4.0).max(nf * rho * rho);
    let log_n = nf.ln();
    Ok(CoherenceReport {
        n,
        theta,
        rho,
        nu,
        beta,
        sample_bound: 2.0 * nf * nu * (1.0 + beta) * log_n * log_n,
    })
}
