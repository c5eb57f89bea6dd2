use crate::error::{Error, Result};

/// Kendall's tau-a: `(concordant - discordant) / (n (n - 1) / 2)`.
///
/// A pair tied in either vector counts as neither concordant nor discordant
/// but still sits in the denominator.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::domain("kendall tau needs at least two observations"));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::domain("kendall tau is undefined for a constant vector"));
    }
    let mut score: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            let p = dx * dy;
            if p > 0.0 {
                score += 1;
            } else if p < 0.0 {
                score -= 1;
            }
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}
