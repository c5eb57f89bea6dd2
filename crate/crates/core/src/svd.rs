//! Rank-k truncated SVD of square operators.
//!
//! Two backends sit behind [`truncated_svd`]:
//!
//! * `Dense` materialises the operator and runs a one-sided Jacobi SVD.
//!   Accurate to working precision, `O(n^3)` per sweep.
//! * `Iterative` is block subspace iteration with a Rayleigh-Ritz step. It only
//!   touches the operator through block products and accepts a warm-start
//!   basis, which is what makes repeated SVDs inside the completion solver
//!   cheap: consecutive iterates share almost the same dominant subspace.
//!
//! For a skew-symmetric input the singular values come in equal pairs
//! `(l1, l1, l2, l2, ...)`, and whenever the kept block ends on a pair boundary
//! with a gap to the next value, the rank-k truncation is skew-symmetric too.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, LinearOperator, SparseMatrix};

/// Orders at or below this size use the dense backend under [`SvdBackend::Auto`].
pub const DENSE_CROSSOVER: usize = 64;

/// Relative gap used to decide that `sigma_k` and `sigma_{k+1}` are separated.
pub const GAP_RELATIVE_TOLERANCE: f64 = 1e-6;

/// Thin factors `U diag(S) V^T` of an `n x n` matrix of rank at most `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl LowRankFactors {
    /// Zero matrix with identity-padded orthonormal factors.
    pub fn zeros(n: usize, k: usize) -> Self {
        let basis = DMatrix::identity(n, k);
        Self {
            u: basis.clone(),
            s: DVector::zeros(k),
            v: basis,
        }
    }

    pub fn new(u: DMatrix<f64>, s: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let k = s.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: u.ncols().max(v.ncols()),
            });
        }
        if u.nrows() != v.nrows() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                got: v.nrows(),
            });
        }
        Ok(Self { u, s, v })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Entry `(i, j)` of `U diag(S) V^T` without forming the matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (0..self.rank())
            .map(|l| self.u[(i, l)] * self.s[l] * self.v[(j, l)])
            .sum()
    }

    /// `U diag(S) V^T q` for a block `q`.
    pub fn apply(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut inner = self.v.tr_mul(q);
        for (mut row, &s) in inner.row_iter_mut().zip(self.s.iter()) {
            row *= s;
        }
        &self.u * inner
    }

    /// `V diag(S) U^T q` for a block `q`.
    pub fn apply_transpose(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut inner = self.u.tr_mul(q);
        for (mut row, &s) in inner.row_iter_mut().zip(self.s.iter()) {
            row *= s;
        }
        &self.v * inner
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (mut col, &s) in us.column_iter_mut().zip(self.s.iter()) {
            col *= s;
        }
        us * self.v.transpose()
    }

    /// Largest spectral-norm deviation of `U^T U` and `V^T V` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.rank();
        let eye = DMatrix::<f64>::identity(k, k);
        let du = (self.u.tr_mul(&self.u) - &eye).symmetric_eigenvalues().amax();
        let dv = (self.v.tr_mul(&self.v) - &eye).symmetric_eigenvalues().amax();
        if k == 0 {
            0.0
        } else {
            du.max(dv)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdBackend {
    /// Dense for `n <= DENSE_CROSSOVER`, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdOptions {
    pub backend: SvdBackend,
    /// Iterative backend stops once `||A v_i - s_i u_i|| <= tol * s_1` for all kept triplets.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Extra basis vectors carried beyond `k` by the iterative backend.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            backend: SvdBackend::Auto,
            tolerance: 1e-11,
            max_sweeps: 1000,
            oversample: 6,
            seed: 0x5eed_5bd0,
        }
    }
}

/// Result of a truncated SVD plus the diagnostics the solver needs.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub factors: LowRankFactors,
    /// Estimate of `sigma_{k+1}` when available (always for dense, for the
    /// iterative backend when the basis is wider than `k`).
    pub next_singular_value: Option<f64>,
    /// Iterative backend met its residual tolerance (always true for dense).
    pub converged: bool,
    pub sweeps: usize,
}

impl TruncatedSvd {
    /// `sigma_k <= sigma_{k+1} (1 + GAP_RELATIVE_TOLERANCE)` with `sigma_{k+1} > 0`:
    /// the rank-k truncation is not unique.
    pub fn gap_violated(&self) -> bool {
        match (self.next_singular_value, self.factors.s.iter().last()) {
            (Some(next), Some(&last)) => {
                next > 0.0 && last <= next * (1.0 + GAP_RELATIVE_TOLERANCE)
            }
            _ => false,
        }
    }
}

/// Top-`k` singular triplets of the sparse `n x n` matrix with the given
/// coordinates and values.
pub fn sparse_truncated_svd(
    n: usize,
    pairs: &[(usize, usize)],
    values: &[f64],
    k: usize,
) -> Result<LowRankFactors> {
    let a = SparseMatrix::new(n, pairs, values)?;
    Ok(truncated_svd(&a, k, &SvdOptions::default(), None)?.factors)
}

/// Top-`k` singular triplets of `op`. `warm_start` (an `n x m` block, typically
/// the previous right singular vectors) seeds the iterative backend.
pub fn truncated_svd<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    options: &SvdOptions,
    warm_start: Option<&DMatrix<f64>>,
) -> Result<TruncatedSvd> {
    let n = op.dim();
    if k > n {
        return Err(Error::domain(format!(
            "requested rank {k} exceeds matrix order {n}"
        )));
    }
    if k == 0 {
        return Ok(TruncatedSvd {
            factors: LowRankFactors::zeros(n, 0),
            next_singular_value: None,
            converged: true,
            sweeps: 0,
        });
    }
    let dense = match options.backend {
        SvdBackend::Dense => true,
        SvdBackend::Iterative => false,
        SvdBackend::Auto => n <= DENSE_CROSSOVER,
    };
    if dense {
        Ok(dense_truncated_svd(&op.to_dense(), k))
    } else {
        Ok(iterative_truncated_svd(op, k, options, warm_start))
    }
}

fn dense_truncated_svd(a: &DMatrix<f64>, k: usize) -> TruncatedSvd {
    let (u, s, v, next) = jacobi_svd(a, k);
    TruncatedSvd {
        factors: LowRankFactors { u, s, v },
        next_singular_value: next,
        converged: true,
        sweeps: 0,
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Applies the plane rotation `(x, y) <- (c x - s y, s x + c y)` to columns `p < q`.
fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.nrows();
    let (head, tail) = m.as_mut_slice().split_at_mut(q * rows);
    let x = &mut head[p * rows..(p + 1) * rows];
    let y = &mut tail[..rows];
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix, truncated to the top
/// `k` triplets. Returns `(U, S, V, sigma_{k+1})`.
///
/// Columns of `A V` are orthogonalised by plane rotations until every pair is
/// orthogonal to working precision; their norms are the singular values. The
/// kept left vectors are re-orthonormalised by QR, which only moves columns
/// belonging to negligible singular values.
fn jacobi_svd(a: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, Option<f64>) {
    let n = a.ncols();
    let rows = a.nrows();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (w.column(p), w.column(q));
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                rotate_columns(&mut w, p, q, c, c * t);
                rotate_columns(&mut v, p, q, c, c * t);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let mut u = DMatrix::zeros(rows, k);
    let mut vk = DMatrix::zeros(n, k);
    let mut s = DVector::zeros(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        if sigma[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / sigma[src]));
        }
        vk.set_column(dst, &v.column(src));
        s[dst] = sigma[src];
    }
    let qr = u.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    for j in 0..k {
        let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        u.set_column(j, &(q.column(j) * sign));
    }
    (u, s, vk, order.get(k).map(|&i| sigma[i]))
}

fn iterative_truncated_svd<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    options: &SvdOptions,
    warm_start: Option<&DMatrix<f64>>,
) -> TruncatedSvd {
    let n = op.dim();
    let width = (k + options.oversample.max(2)).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut start = DMatrix::from_fn(n, width, |_, _| rng.random::<f64>() - 0.5);
    if let Some(w) = warm_start {
        let m = w.ncols().min(width);
        start.columns_mut(0, m).copy_from(&w.columns(0, m));
    }
    let mut q = orthonormalize(start);

    let mut best = None;
    for sweep in 1..=options.max_sweeps.max(1) {
        let p = orthonormalize(op.apply(&q));
        let z = op.apply_transpose(&p);
        q = orthonormalize(z.clone());

        // Rayleigh-Ritz on the pair of subspaces: B = P^T A Q = Z^T Q.
        let b = z.tr_mul(&q);
        let (ub_k, s, vb_k, next) = jacobi_svd(&b, k);
        let u = &p * ub_k;
        let v = &q * vb_k;

        let top = s[0];
        let converged = if top == 0.0 {
            true
        } else {
            let av = op.apply(&v);
            (0..k).all(|i| {
                let r = av.column(i) - u.column(i) * s[i];
                r.norm() <= options.tolerance * top
            })
        };
        let result = TruncatedSvd {
            factors: LowRankFactors { u, s, v },
            next_singular_value: next,
            converged,
            sweeps: sweep,
        };
        if converged {
            if top == 0.0 {
                return TruncatedSvd {
                    factors: LowRankFactors::zeros(n, k),
                    ..result
                };
            }
            return result;
        }
        best = Some(result);
    }
    best.expect("at least one sweep")
}
