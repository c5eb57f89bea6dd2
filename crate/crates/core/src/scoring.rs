//! Score extraction from completed factors, diagnostic residuals and the
//! final ranked list.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sample::SampleSet;
use crate::svd::LowRankFactors;

/// Per-item quality scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
    centered: bool,
}

impl ScoreVector {
    /// Wraps raw scores; `centered` is detected numerically.
    pub fn new(scores: Vec<f64>) -> Self {
        let centered = is_centered(&scores);
        Self { scores, centered }
    }

    /// Subtracts the mean.
    pub fn centered(scores: &[f64]) -> Self {
        let n = scores.len().max(1) as f64;
        let mean = scores.iter().sum::<f64>() / n;
        Self::new(scores.iter().map(|s| s - mean).collect())
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn norm(&self) -> f64 {
        self.scores.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Affine map onto `[0, 1]` for display. Constant vectors map to all zeros.
    pub fn unit_interval(&self) -> Vec<f64> {
        let (lo, hi) = self
            .scores
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        let span = hi - lo;
        self.scores
            .iter()
            .map(|&s| if span > 0.0 { (s - lo) / span } else { 0.0 })
            .collect()
    }
}

fn is_centered(scores: &[f64]) -> bool {
    let sum: f64 = scores.iter().sum();
    let max = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    sum.abs() <= 1e-10 * scores.len() as f64 * max
}

/// `s = (1/n) U diag(S) V^T e`, evaluated factor by factor.
///
/// For a completed matrix `X` this is the least-squares fit of
/// `X ~ s e^T - e s^T`, and it is centered whenever `X` is skew-symmetric.
pub fn extract_scores(factors: &LowRankFactors) -> ScoreVector {
    let n = factors.n();
    if n == 0 {
        return ScoreVector::new(Vec::new());
    }
    let ones = DMatrix::from_element(n, 1, 1.0);
    let s = factors.apply(&ones) / n as f64;
    ScoreVector::new(s.iter().copied().collect())
}

/// `||Omega(X) - b|| / ||b||` for `X` given by factors.
pub fn solver_residual(samples: &SampleSet, factors: &LowRankFactors) -> Result<Residual> {
    if factors.n() != samples.num_items() {
        return Err(Error::DimensionMismatch {
            expected: samples.num_items(),
            got: factors.n(),
        });
    }
    Ok(Residual::of(samples, |r, c| factors.entry(r, c)))
}

/// A residual norm, relative to `||b||` unless `b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub relative: bool,
}

impl Residual {
    fn of(samples: &SampleSet, entry: impl Fn(usize, usize) -> f64) -> Self {
        let misfit = samples.misfit(entry);
        match samples.target_norm() {
            0.0 => Self {
                value: misfit,
                relative: false,
            },
            norm => Self {
                value: misfit / norm,
                relative: true,
            },
        }
    }
}

/// `||Omega(s e^T - e s^T) - b|| / ||b||`.
pub fn score_residual(samples: &SampleSet, scores: &ScoreVector) -> Result<Residual> {
    if scores.len() != samples.num_items() {
        return Err(Error::DimensionMismatch {
            expected: samples.num_items(),
            got: scores.len(),
        });
    }
    let s = scores.scores();
    Ok(Residual::of(samples, |r, c| s[r] - s[c]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    /// 1-based position.
    pub rank: usize,
    pub index: usize,
    pub id: String,
    pub score: f64,
}

/// Items ordered best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub items: Vec<RankedItem>,
}

impl RankedList {
    pub fn order(&self) -> Vec<usize> {
        self.items.iter().map(|r| r.index).collect()
    }
}

/// Descending by score; ties keep ascending original index.
pub fn rank_items(scores: &ScoreVector, ids: &[String]) -> Result<RankedList> {
    if ids.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: ids.len(),
        });
    }
    let s = scores.scores();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    Ok(RankedList {
        items: order
            .into_iter()
            .enumerate()
            .map(|(pos, index)| RankedItem {
                rank: pos + 1,
                index,
                id: ids[index].clone(),
                score: s[index],
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::{truncated_svd, SvdOptions};
    use nalgebra::DVector;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn factors_of(a: &DMatrix<f64>, k: usize) -> LowRankFactors {
        truncated_svd(a, k, &SvdOptions::default(), None).unwrap().factors
    }

    #[test]
    fn extracts_centered_generating_scores() {
        let s0 = [1.0, 2.0, 3.0];
        let y = DMatrix::from_fn(3, 3, |i, j| s0[i] - s0[j]);
        let s = extract_scores(&factors_of(&y, 2));
        for (got, want) in s.scores().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(s.is_centered());
    }

    #[test]
    fn zero_factors_give_zero_scores() {
        let s = extract_scores(&LowRankFactors::zeros(4, 2));
        assert_eq!(s.scores(), &[0.0; 4]);
        assert!(s.is_centered());
    }

    #[test]
    fn score_residual_cases() {
        let s = ScoreVector::new(vec![0.5, -0.25, 1.0]);
        let exact = SampleSet::from_upper(3, [(0, 1, 0.75), (1, 2, -1.25)]).unwrap();
        assert_eq!(score_residual(&exact, &s).unwrap().value, 0.0);

        let zero = ScoreVector::new(vec![0.0; 3]);
        let r = score_residual(&exact, &zero).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.relative);

        let flat = SampleSet::from_upper(3, [(0, 1, 0.0)]).unwrap();
        let r = score_residual(&flat, &s).unwrap();
        assert!(!r.relative);
        assert!((r.value - (2.0 * 0.75f64 * 0.75).sqrt()).abs() < 1e-15);

        assert!(score_residual(&flat, &ScoreVector::new(vec![0.0; 2])).is_err());
    }

    #[test]
    fn solver_residual_of_exact_factors_is_zero() {
        let s0 = [0.0, 1.0, 4.0, 2.0];
        let y = DMatrix::from_fn(4, 4, |i, j| s0[i] - s0[j]);
        let samples = SampleSet::from_upper(4, [(0, 2, -4.0), (1, 3, -1.0)]).unwrap();
        let r = solver_residual(&samples, &factors_of(&y, 2)).unwrap();
        assert!(r.value < 1e-14);
    }

    #[test]
    fn ranking_orders_and_breaks_ties_by_index() {
        let r = rank_items(&ScoreVector::new(vec![-1.0, 0.0, 1.0]), &ids(3)).unwrap();
        assert_eq!(r.order(), vec![2, 1, 0]);
        assert_eq!(r.items[0].rank, 1);

        let r = rank_items(&ScoreVector::new(vec![0.3; 4]), &ids(4)).unwrap();
        assert_eq!(r.order(), vec![0, 1, 2, 3]);

        let r = rank_items(&ScoreVector::new(vec![0.5, 0.5, -1.0]), &ids(3)).unwrap();
        assert_eq!(r.order(), vec![0, 1, 2]);

        assert!(rank_items(&ScoreVector::new(vec![0.0]), &ids(2)).is_err());
    }

    #[test]
    fn unit_interval_is_affine() {
        let s = ScoreVector::new(vec![-2.0, 0.0, 2.0]);
        assert_eq!(s.unit_interval(), vec![0.0, 0.5, 1.0]);
        assert_eq!(ScoreVector::new(vec![1.0, 1.0]).unit_interval(), vec![0.0, 0.0]);
    }

    #[test]
    fn explicit_factors_extract() {
        // X = u v^T - v u^T with u = e/sqrt(3), v = s: s e^T - e s^T scaled.
        let n = 3;
        let e = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let s = DVector::from_vec(vec![-1.0, 0.0, 1.0]);
        let sn = s.norm();
        let su: DVector<f64> = &s / sn;
        let u = DMatrix::from_columns(&[su.clone(), e.clone()]);
        let v = DMatrix::from_columns(&[e.clone(), -su]);
        let sigma = sn * (n as f64).sqrt();
        let f = LowRankFactors::new(u, DVector::from_vec(vec![sigma, sigma]), v).unwrap();
        let got = extract_scores(&f);
        for (g, w) in got.scores().iter().zip(s.iter()) {
            assert!((g - w).abs() < 1e-14);
        }
    }
}
