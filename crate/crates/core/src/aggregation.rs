//! Aggregate pairwise comparisons from voter-by-item ratings.
//!
//! Every method produces a skew-symmetric matrix `Y` where `Y[i][j] > 0`
//! means item `i` is preferred to item `j`. With `R_ai` the rating of voter
//! `a` on item `i`, and averages taken over the voters who rated both items:
//!
//! | code | method                  | `Y[i][j]`                                     |
//! |------|-------------------------|-----------------------------------------------|
//! | `am` | arithmetic mean         | `mean(R_ai - R_aj)`                            |
//! | `gm` | geometric mean (log)    | `mean(log(R_ai / R_aj))`, ratings must be > 0  |
//! | `bc` | binary comparison       | `P(R_ai > R_aj) - P(R_ai < R_aj)`              |
//! | `sb` | strict binary           | as `bc`, ties dropped from the average         |
//! | `lo` | log odds                | `log(P(R_ai >= R_aj) / P(R_ai <= R_aj))`       |
//!
//! `am` is invariant to translating all ratings, `gm` to scaling them, and
//! `bc`, `sb`, `lo` to any strictly increasing transformation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ratings::RatingsMatrix;
use crate::sample::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ArithmeticMean,
    GeometricMean,
    Binary,
    StrictBinary,
    LogOdds,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ArithmeticMean,
        Method::GeometricMean,
        Method::Binary,
        Method::StrictBinary,
        Method::LogOdds,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Method::ArithmeticMean => "am",
            Method::GeometricMean => "gm",
            Method::Binary => "bc",
            Method::StrictBinary => "sb",
            Method::LogOdds => "lo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or_else(|| Error::config(format!("unknown method code {s:?}; expected am, gm, bc, sb or lo")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub support: usize,
}

/// Sparse skew-symmetric comparison matrix with per-entry support counts.
///
/// Stored once per unordered pair (`i < j`); the `(j, i)` entry is `-value`
/// with the same support.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    num_items: usize,
    upper: Vec<PairwiseEntry>,
}

impl PairwiseMatrix {
    /// Entries may be given in either orientation, at most once per unordered pair.
    pub fn new(num_items: usize, entries: impl IntoIterator<Item = PairwiseEntry>) -> Result<Self> {
        let mut upper: Vec<PairwiseEntry> = entries
            .into_iter()
            .map(|e| {
                if e.i < e.j {
                    e
                } else {
                    PairwiseEntry {
                        i: e.j,
                        j: e.i,
                        value: -e.value,
                        support: e.support,
                    }
                }
            })
            .collect();
        for e in &upper {
            if e.i == e.j {
                return Err(Error::domain(format!("diagonal entry ({}, {})", e.i, e.i)));
            }
            if e.j >= num_items {
                return Err(Error::domain(format!(
                    "entry ({}, {}) out of range for {num_items} items",
                    e.i, e.j
                )));
            }
            if e.support == 0 {
                return Err(Error::domain(format!("entry ({}, {}) has zero support", e.i, e.j)));
            }
            if !e.value.is_finite() {
                return Err(Error::domain(format!("entry ({}, {}) is not finite", e.i, e.j)));
            }
        }
        upper.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = upper.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::domain(format!("duplicate entry ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Self { num_items, upper })
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// One entry per unordered pair, `i < j`, sorted.
    pub fn upper(&self) -> &[PairwiseEntry] {
        &self.upper
    }

    /// Both orientations of every stored pair.
    pub fn entries(&self) -> impl Iterator<Item = PairwiseEntry> + '_ {
        self.upper.iter().flat_map(|e| {
            [
                *e,
                PairwiseEntry {
                    i: e.j,
                    j: e.i,
                    value: -e.value,
                    support: e.support,
                },
            ]
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<PairwiseEntry> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let idx = self.upper.binary_search_by_key(&(a, b), |e| (e.i, e.j)).ok()?;
        let e = self.upper[idx];
        Some(if i < j {
            e
        } else {
            PairwiseEntry {
                i,
                j,
                value: -e.value,
                support: e.support,
            }
        })
    }

    /// Number of unordered pairs present.
    pub fn num_pairs(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairCounts {
    co_raters: usize,
    sum_diff: f64,
    sum_log_ratio: f64,
    greater: usize,
    less: usize,
}

/// Builds the aggregate comparison matrix of `ratings` under `method`.
pub fn aggregate(ratings: &RatingsMatrix, method: Method) -> Result<PairwiseMatrix> {
    if method == Method::GeometricMean {
        if let Some(r) = ratings.entries().iter().find(|r| r.value <= 0.0) {
            return Err(Error::domain(format!(
                "geometric mean needs positive ratings; voter {} rated item {} as {}",
                r.voter, r.item, r.value
            )));
        }
    }

    let mut pairs: HashMap<(usize, usize), PairCounts> = HashMap::new();
    for row in ratings.by_voter() {
        for (a, &(i, ri)) in row.iter().enumerate() {
            for &(j, rj) in &row[a + 1..] {
                let c = pairs.entry((i, j)).or_default();
                c.co_raters += 1;
                match method {
                    Method::ArithmeticMean => c.sum_diff += ri - rj,
                    Method::GeometricMean => c.sum_log_ratio += (ri / rj).ln(),
                    _ => {}
                }
                if ri > rj {
                    c.greater += 1;
                } else if ri < rj {
                    c.less += 1;
                }
            }
        }
    }

    let entries = pairs.into_iter().filter_map(|((i, j), c)| {
        let n = c.co_raters as f64;
        let (value, support) = match method {
            Method::ArithmeticMean => (c.sum_diff / n, c.co_raters),
            Method::GeometricMean => (c.sum_log_ratio / n, c.co_raters),
            Method::Binary => ((c.greater as f64 - c.less as f64) / n, c.co_raters),
            Method::StrictBinary => {
                let strict = c.greater + c.less;
                if strict == 0 {
                    return None;
                }
                ((c.greater as f64 - c.less as f64) / strict as f64, strict)
            }
            Method::LogOdds => {
                let at_least = c.co_raters - c.less;
                let at_most = c.co_raters - c.greater;
                if at_least == 0 || at_most == 0 {
                    return None;
                }
                ((at_least as f64 / at_most as f64).ln(), c.co_raters)
            }
        };
        Some(PairwiseEntry { i, j, value, support })
    });
    PairwiseMatrix::new(ratings.num_items(), entries)
}

/// Result of dropping low-support entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFilter {
    pub samples: SampleSet,
    /// Set when nothing survived the filter.
    pub warning: Option<String>,
}

/// Keeps the entries of `y` with support of at least `min_support`, in both orientations.
pub fn filter_support(y: &PairwiseMatrix, min_support: usize) -> SupportFilter {
    let samples = SampleSet::from_upper(
        y.num_items(),
        y.upper()
            .iter()
            .filter(|e| e.support >= min_support)
            .map(|e| (e.i, e.j, e.value)),
    )
    .expect("pairwise matrix entries are valid samples");
    let warning = samples.is_empty().then(|| {
        format!(
            "no pairwise entries have support >= {min_support} ({} pairs present)",
            y.num_pairs()
        )
    });
    SupportFilter { samples, warning }
}

/// Counts of unordered pairs by support.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportHistogram {
    /// Lower bin edges; bin `b` holds supports in `[edges[b], edges[b + 1])`,
    /// the last bin is open-ended.
    pub edges: Vec<usize>,
    pub counts: Vec<usize>,
    /// Pairs with support below the first edge.
    pub below: usize,
    pub pairs_present: usize,
    pub possible_pairs: usize,
    supports: Vec<usize>,
}

impl SupportHistogram {
    /// Fraction of all `n(n-1)/2` pairs that have at least one comparison.
    pub fn coverage(&self) -> f64 {
        if self.possible_pairs == 0 {
            0.0
        } else {
            self.pairs_present as f64 / self.possible_pairs as f64
        }
    }

    /// Number of pairs with support strictly greater than `threshold`.
    pub fn pairs_above(&self, threshold: usize) -> usize {
        self.supports.iter().filter(|&&s| s > threshold).count()
    }

    /// Fraction of all possible pairs with support strictly greater than `threshold`.
    pub fn fraction_above(&self, threshold: usize) -> f64 {
        if self.possible_pairs == 0 {
            0.0
        } else {
            self.pairs_above(threshold) as f64 / self.possible_pairs as f64
        }
    }
}

pub fn support_histogram(y: &PairwiseMatrix, bin_edges: &[usize]) -> Result<SupportHistogram> {
    if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("histogram bin edges must be strictly increasing"));
    }
    let mut counts = vec![0; bin_edges.len()];
    let mut below = 0;
    let supports: Vec<usize> = y.upper().iter().map(|e| e.support).collect();
    for &s in &supports {
        match bin_edges.partition_point(|&edge| edge <= s) {
            0 => below += 1,
            b => counts[b - 1] += 1,
        }
    }
    let n = y.num_items();
    Ok(SupportHistogram {
        edges: bin_edges.to_vec(),
        counts,
        below,
        pairs_present: supports.len(),
        possible_pairs: n * n.saturating_sub(1) / 2,
        supports,
    })
}
