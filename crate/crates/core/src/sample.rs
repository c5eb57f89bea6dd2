use std::collections::HashMap;

use crate::error::{Error, Result};

/// Index set of observed entries with their target values, the affine
/// constraints `A(X) = b` of the completion problem.
///
/// Always skew-closed: `(r, c, v)` is present exactly when `(c, r, -v)` is.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    num_items: usize,
    pairs: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl SampleSet {
    /// Validates an explicit list of oriented pairs.
    pub fn new(num_items: usize, pairs: Vec<(usize, usize)>, values: Vec<f64>) -> Result<Self> {
        if pairs.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                got: values.len(),
            });
        }
        let mut seen = HashMap::with_capacity(pairs.len());
        for (&(r, c), &v) in pairs.iter().zip(&values) {
            if r >= num_items || c >= num_items {
                return Err(Error::domain(format!(
                    "pair ({r}, {c}) out of range for {num_items} items"
                )));
            }
            if r == c {
                return Err(Error::domain(format!("diagonal pair ({r}, {r})")));
            }
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite value at ({r}, {c})")));
            }
            if seen.insert((r, c), v).is_some() {
                return Err(Error::domain(format!("duplicate pair ({r}, {c})")));
            }
        }
        for (&(r, c), &v) in &seen {
            match seen.get(&(c, r)) {
                Some(&w) if w == -v => {}
                Some(&w) => {
                    return Err(Error::domain(format!(
                        "pair ({r}, {c}) = {v} but ({c}, {r}) = {w}; sample sets must be skew-closed"
                    )))
                }
                None => {
                    return Err(Error::domain(format!(
                        "pair ({r}, {c}) present without ({c}, {r}); sample sets must be skew-closed"
                    )))
                }
            }
        }
        Ok(Self {
            num_items,
            pairs,
            values,
        })
    }

    /// Builds the skew closure of `(i, j, value)` triples given once per
    /// unordered pair. Both orientations are emitted adjacently, `(i, j)` first.
    pub fn from_upper(
        num_items: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut values = Vec::new();
        for (i, j, v) in entries {
            pairs.push((i, j));
            values.push(v);
            pairs.push((j, i));
            values.push(-v);
        }
        Self::new(num_items, pairs, values)
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// Number of oriented pairs, `|Omega|`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().zip(&self.values).map(|(&(r, c), &v)| (r, c, v))
    }

    /// Entries with `r < c`, one per unordered pair.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.iter().filter(|&(r, c, _)| r < c)
    }

    pub fn target_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||Omega(X) - b||_2` for `X` given entrywise by `entry`.
    pub fn misfit(&self, entry: impl Fn(usize, usize) -> f64) -> f64 {
        self.iter()
            .map(|(r, c, b)| {
                let d = entry(r, c) - b;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}
