use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub voter: usize,
    pub item: usize,
    pub value: f64,
}

/// Sparse voter-by-item cardinal ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    num_voters: usize,
    num_items: usize,
    entries: Vec<Rating>,
}

impl RatingsMatrix {
    pub fn new(num_voters: usize, num_items: usize, entries: Vec<Rating>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for r in &entries {
            if r.voter >= num_voters || r.item >= num_items {
                return Err(Error::domain(format!(
                    "rating (voter {}, item {}) out of range for {num_voters} voters x {num_items} items",
                    r.voter, r.item
                )));
            }
            if !r.value.is_finite() {
                return Err(Error::domain(format!(
                    "non-finite rating for voter {} item {}",
                    r.voter, r.item
                )));
            }
            if !seen.insert((r.voter, r.item)) {
                return Err(Error::domain(format!(
                    "voter {} rated item {} more than once",
                    r.voter, r.item
                )));
            }
        }
        Ok(Self {
            num_voters,
            num_items,
            entries,
        })
    }

    /// Convenience constructor from a dense table where `None` marks a missing rating.
    pub fn from_dense(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let num_items = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (voter, row) in rows.iter().enumerate() {
            if row.len() != num_items {
                return Err(Error::DimensionMismatch {
                    expected: num_items,
                    got: row.len(),
                });
            }
            entries.extend(row.iter().enumerate().filter_map(|(item, v)| {
                v.map(|value| Rating { voter, item, value })
            }));
        }
        Self::new(rows.len(), num_items, entries)
    }

    pub fn num_voters(&self) -> usize {
        self.num_voters
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Each voter's `(item, rating)` list, sorted by item.
    pub fn by_voter(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.num_voters];
        for r in &self.entries {
            rows[r.voter].push((r.item, r.value));
        }
        for row in &mut rows {
            row.sort_by_key(|&(item, _)| item);
        }
        rows
    }

    pub fn ratings_per_voter(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_voters];
        for r in &self.entries {
            counts[r.voter] += 1;
        }
        counts
    }

    /// Drops every rating of voters with fewer than `min_ratings` ratings.
    /// Voter and item indices are unchanged.
    pub fn with_min_voter_ratings(&self, min_ratings: usize) -> Self {
        let counts = self.ratings_per_voter();
        Self {
            num_voters: self.num_voters,
            num_items: self.num_items,
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|r| counts[r.voter] >= min_ratings)
                .collect(),
        }
    }

    /// Applies `f` to every rating value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|r| Rating {
                value: f(r.value),
                ..*r
            })
            .collect();
        Self::new(self.num_voters, self.num_items, entries)
    }
}

/// Dense index assignment for arbitrary string identifiers, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids(ids: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut labels = Self::new();
        for id in ids {
            let before = labels.len();
            if labels.intern(&id) != before {
                return Err(Error::domain(format!("duplicate identifier {id:?}")));
            }
        }
        Ok(labels)
    }

    /// Sequential labels `"0"`, `"1"`, ...
    pub fn sequential(n: usize) -> Self {
        Self::from_ids((0..n).map(|i| i.to_string())).expect("distinct")
    }

    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_range_and_nan() {
        let r = |voter, item, value| Rating { voter, item, value };
        assert!(RatingsMatrix::new(1, 2, vec![r(0, 0, 1.0), r(0, 0, 2.0)]).is_err());
        assert!(RatingsMatrix::new(1, 2, vec![r(0, 2, 1.0)]).is_err());
        assert!(RatingsMatrix::new(1, 2, vec![r(1, 0, 1.0)]).is_err());
        assert!(RatingsMatrix::new(1, 2, vec![r(0, 0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn min_voter_filter_drops_light_voters() {
        let m = RatingsMatrix::from_dense(&[
            vec![Some(1.0), Some(2.0), None],
            vec![None, Some(3.0), None],
        ])
        .unwrap();
        let f = m.with_min_voter_ratings(2);
        assert_eq!(f.len(), 2);
        assert!(f.entries().iter().all(|r| r.voter == 0));
        assert_eq!(m.with_min_voter_ratings(0), m);
    }

    #[test]
    fn labels_intern_in_first_appearance_order() {
        let mut l = Labels::new();
        assert_eq!(l.intern("b"), 0);
        assert_eq!(l.intern("a"), 1);
        assert_eq!(l.intern("b"), 0);
        assert_eq!(l.id(1), "a");
        assert!(Labels::from_ids(["x".into(), "x".into()]).is_err());
    }
}
