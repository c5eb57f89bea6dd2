//! Small linear-algebra layer: square linear operators, a coordinate-format
//! sparse matrix, and skew-symmetric helpers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A square `n x n` real operator that can be applied to blocks of vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Returns `A * q` for an `n x b` block `q`.
    fn apply(&self, q: &DMatrix<f64>) -> DMatrix<f64>;

    /// Returns `A^T * q` for an `n x b` block `q`.
    fn apply_transpose(&self, q: &DMatrix<f64>) -> DMatrix<f64>;

    fn to_dense(&self) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        self * q
    }

    fn apply_transpose(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(q)
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// Square sparse matrix in coordinate format. Duplicate coordinates are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(n: usize, pairs: &[(usize, usize)], values: &[f64]) -> Result<Self> {
        if pairs.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                got: values.len(),
            });
        }
        if let Some(&(r, c)) = pairs.iter().find(|&&(r, c)| r >= n || c >= n) {
            return Err(Error::domain(format!(
                "sparse entry ({r}, {c}) out of range for a {n}x{n} matrix"
            )));
        }
        Ok(Self {
            n,
            rows: pairs.iter().map(|p| p.0).collect(),
            cols: pairs.iter().map(|p| p.1).collect(),
            values: values.to_vec(),
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// Adds `scale * self` into a dense block product accumulator:
    /// `out += scale * A * q` (or `A^T * q` when `transpose`).
    pub(crate) fn accumulate(
        &self,
        q: &DMatrix<f64>,
        out: &mut DMatrix<f64>,
        scale: f64,
        transpose: bool,
    ) {
        for j in 0..q.ncols() {
            let src = q.column(j);
            let mut dst = out.column_mut(j);
            for (r, c, v) in self.triplets() {
                let (to, from) = if transpose { (c, r) } else { (r, c) };
                dst[to] += scale * v * src[from];
            }
        }
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, q.ncols());
        self.accumulate(q, &mut out, 1.0, false);
        out
    }

    fn apply_transpose(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, q.ncols());
        self.accumulate(q, &mut out, 1.0, true);
        out
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            out[(r, c)] += v;
        }
        out
    }
}

/// The closest skew-symmetric matrix to `b` in any unitarily invariant norm,
/// `(B - B^T) / 2`.
pub fn closest_skew(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !b.is_square() {
        return Err(Error::domain(format!(
            "closest_skew needs a square matrix, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    Ok((b - b.transpose()) * 0.5)
}

/// `||A + A^T||_F`, the distance of `a` from the skew-symmetric subspace (times two).
pub fn skew_defect(a: &DMatrix<f64>) -> f64 {
    (a + a.transpose()).norm()
}

/// Orthonormal basis for the column span of `w` (Householder QR, thin `Q`).
pub(crate) fn orthonormalize(w: DMatrix<f64>) -> DMatrix<f64> {
    w.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn closest_skew_examples() {
        let b = dmatrix![1.0, 2.0; 0.0, 1.0];
        assert_eq!(closest_skew(&b).unwrap(), dmatrix![0.0, 1.0; -1.0, 0.0]);

        let skew = dmatrix![0.0, 3.0, -1.0; -3.0, 0.0, 2.5; 1.0, -2.5, 0.0];
        assert_eq!(closest_skew(&skew).unwrap(), skew);

        let sym = dmatrix![1.0, 2.0; 2.0, 5.0];
        assert_eq!(closest_skew(&sym).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn closest_skew_rejects_rectangular() {
        assert!(closest_skew(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let pairs = [(0, 1), (1, 0), (2, 0), (2, 0)];
        let vals = [1.5, -1.5, 2.0, 0.5];
        let a = SparseMatrix::new(3, &pairs, &vals).unwrap();
        let dense = a.to_dense();
        assert_eq!(dense[(2, 0)], 2.5);
        let q = DMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.0);
        assert_eq!(a.apply(&q), &dense * &q);
        assert_eq!(a.apply_transpose(&q), dense.transpose() * &q);
    }

    #[test]
    fn sparse_rejects_out_of_range() {
        assert!(SparseMatrix::new(2, &[(0, 2)], &[1.0]).is_err());
        assert!(SparseMatrix::new(2, &[(0, 1)], &[]).is_err());
    }
}
