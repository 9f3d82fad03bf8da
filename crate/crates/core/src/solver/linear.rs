//! Sparse direct solves through faer's supernodal LU.
//!
//! Our matrices are stored by rows. Read as compressed columns the same
//! arrays describe `Jᵀ`, so we factor `Jᵀ` and apply the transposed solve.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};

/// LU solver that keeps the symbolic analysis of the last pattern seen.
#[derive(Default)]
pub struct LinearSolver {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `a x = b`.
    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.n();
        if b.len() != n {
            return Err(Error::Contract(format!(
                "rhs has length {}, matrix is {n}x{n}",
                b.len()
            )));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let structure = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let reuse = matches!(&self.symbolic, Some((rp, ci, _)) if rp == a.row_ptr() && ci == a.col_idx());
        if !reuse {
            let sym = SymbolicLu::try_new(structure).map_err(|e| Error::LinearSolver {
                pivot: 0,
                message: format!("symbolic analysis failed: {e:?}"),
            })?;
            self.symbolic = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), sym));
        }
        let sym = self
            .symbolic
            .as_ref()
            .map(|s| s.2.clone())
            .expect("symbolic analysis present");
        let at = SparseColMatRef::new(structure, a.values());
        let lu = Lu::try_new_with_symbolic(sym, at).map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::LinearSolver {
                pivot: index,
                message: "matrix is singular".into(),
            },
            LuError::Generic(e) => Error::LinearSolver {
                pivot: 0,
                message: format!("{e:?}"),
            },
        })?;
        let mut x = b.to_vec();
        lu.solve_transpose_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolver {
                pivot: k,
                message: "solution is not finite (numerically singular matrix)".into(),
            });
        }
        Ok(x)
    }
}

/// One-shot sparse solve.
pub fn solve_sparse(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new().solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gaussian elimination with partial pivoting, as an independent oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn identity_and_small_system() {
        let x = solve_sparse(&SparseMatrix::identity(3), &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
        // nonsymmetric, so a transposed solve would be caught
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![2.0, 3.0]]);
        let x = solve_sparse(&a, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(x[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(x[1], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn agrees_with_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 30;
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            d[i][i] = 4.0 + rng.gen::<f64>();
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    d[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_sparse(&SparseMatrix::from_dense(&d), &b).unwrap();
        let y = dense_solve(d, b);
        for (u, v) in x.iter().zip(&y) {
            assert_relative_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn cached_symbolic_handles_new_values() {
        let mut s = LinearSolver::new();
        let mut a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        s.solve(&a, &[3.0, 3.0]).unwrap();
        a.values_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        let x = s.solve(&a, &[5.0, 11.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseMatrix::from_rows(2, vec![vec![0, 1], vec![0, 1]]);
        assert!(matches!(solve_sparse(&a, &[1.0, 1.0]), Err(Error::LinearSolver { .. })));
    }

    #[test]
    fn wrong_rhs_length() {
        assert!(matches!(
            solve_sparse(&SparseMatrix::identity(2), &[1.0]),
            Err(Error::Contract(_))
        ));
    }
}
