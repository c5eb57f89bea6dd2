//! Test-only oracles, written without the library's linear algebra.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

/// Singular values from the symmetric eigenproblem of `[[0, A], [A^T, 0]]`,
/// whose eigenvalues are `+-sigma_i`. Descending.
pub fn oracle_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(a);
    h.view_mut((n, 0), (n, n)).copy_from(&a.transpose());
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(n);
    ev.into_iter().map(|x| x.max(0.0)).collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    x
}

/// Centered minimiser of `||X - (s e^T - e s^T)||_F` from the normal
/// equations, with `e e^T` added to pin the null direction `e`.
pub fn least_squares_scores(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    let mut normal = vec![vec![1.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // Row of the design matrix: +1 at i, -1 at j.
            normal[i][i] += 1.0;
            normal[j][j] += 1.0;
            normal[i][j] -= 1.0;
            normal[j][i] -= 1.0;
            rhs[i] += x[(i, j)];
            rhs[j] -= x[(i, j)];
        }
    }
    gauss_solve(normal, rhs)
}

pub fn random_skew(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&b - b.transpose()) / 2.0
}

/// `s e^T - e s^T`.
pub fn difference_matrix(s: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), s.len(), |i, j| s[i] - s[j])
}

pub fn centered(s: &[f64]) -> Vec<f64> {
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter().map(|x| x - mean).collect()
}
