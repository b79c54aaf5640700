//! Small dense linear algebra: pivoted elimination for rank tests, basis
//! solves, and the Newton systems of the dual solver.
//!
//! Everything here targets desk-scale systems (tens of rows/columns), so the
//! implementations favor clarity and numerical safety over asymptotics.

// index-based loops mirror the usual elimination notation
#![allow(clippy::needless_range_loop)]

/// Relative pivot threshold used by rank computation and basis solves.
/// A pivot is treated as zero when its magnitude is below this fraction of
/// the largest entry of the original matrix.
pub const PIVOT_REL_TOL: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from nested rows; panics if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>())
            .collect()
    }

    /// y = A^T x
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let xr = x[r];
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.get(r, c) * xr;
            }
        }
        out
    }

    /// Numerical rank by Gaussian elimination with partial pivoting.
    /// Pivots below `PIVOT_REL_TOL * max_abs(original)` count as zero.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        let threshold = PIVOT_REL_TOL * work.max_abs().max(1e-300);
        let mut rank = 0;
        let mut pivot_row = 0;
        for col in 0..work.cols {
            // largest remaining pivot in this column
            let mut best = pivot_row;
            for r in pivot_row + 1..work.rows {
                if work.get(r, col).abs() > work.get(best, col).abs() {
                    best = r;
                }
            }
            if pivot_row >= work.rows || work.get(best, col).abs() <= threshold {
                continue;
            }
            work.swap_rows(pivot_row, best);
            let pivot = work.get(pivot_row, col);
            for r in pivot_row + 1..work.rows {
                let factor = work.get(r, col) / pivot;
                if factor != 0.0 {
                    for c in col..work.cols {
                        let v = work.get(r, c) - factor * work.get(pivot_row, c);
                        work.set(r, c, v);
                    }
                }
            }
            rank += 1;
            pivot_row += 1;
            if pivot_row == work.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let ta = self.get(a, c);
            let tb = self.get(b, c);
            self.set(a, c, tb);
            self.set(b, c, ta);
        }
    }
}

/// Outcome of an overdetermined basis solve.
pub enum BasisSolve {
    /// Unique solution of `A x = b` (A has full column rank, b in the span).
    Solution(Vec<f64>),
    /// The selected columns are linearly dependent: not a basis.
    Singular,
    /// Full column rank but `b` is not in the column span.
    Inconsistent,
}

/// Solve `A x = b` for a (possibly tall) matrix `A` with `rows >= cols`,
/// expecting full column rank. Used for basis solves in vertex enumeration,
/// where `A` stacks the basic columns of the constraint matrix.
///
/// `consistency_tol` bounds the residual allowed in eliminated rows; rows that
/// reduce to `0 = r` with `|r| > consistency_tol` mark the system infeasible.
pub fn solve_basis_system(a: &Mat, b: &[f64], consistency_tol: f64) -> BasisSolve {
    let m = a.rows();
    let k = a.cols();
    assert_eq!(b.len(), m);
    assert!(m >= k);

    // augmented [A | b]
    let mut aug = Mat::zeros(m, k + 1);
    for r in 0..m {
        for c in 0..k {
            aug.set(r, c, a.get(r, c));
        }
        aug.set(r, k, b[r]);
    }
    let threshold = PIVOT_REL_TOL * a.max_abs().max(1e-300);

    for col in 0..k {
        let mut best = col;
        for r in col + 1..m {
            if aug.get(r, col).abs() > aug.get(best, col).abs() {
                best = r;
            }
        }
        if aug.get(best, col).abs() <= threshold {
            return BasisSolve::Singular;
        }
        aug.swap_rows(col, best);
        let pivot = aug.get(col, col);
        for r in col + 1..m {
            let factor = aug.get(r, col) / pivot;
            if factor != 0.0 {
                for c in col..=k {
                    let v = aug.get(r, c) - factor * aug.get(col, c);
                    aug.set(r, c, v);
                }
            }
        }
    }

    // rows below the triangle must have vanished
    for r in k..m {
        if aug.get(r, k).abs() > consistency_tol {
            return BasisSolve::Inconsistent;
        }
    }

    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = aug.get(col, k);
        for c in col + 1..k {
            acc -= aug.get(col, c) * x[c];
        }
        x[col] = acc / aug.get(col, col);
    }
    BasisSolve::Solution(x)
}

/// Solve a square system `A x = b` by LU with partial pivoting, with an
/// explicit relative pivot threshold. Ridge-regularized systems pass a
/// threshold below their ridge so the regularized directions are not
/// mistaken for exact singularity.
pub fn solve_square_with_tol(a: &Mat, b: &[f64], rel_tol: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut aug = Mat::zeros(n, n + 1);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, a.get(r, c));
        }
        aug.set(r, n, b[r]);
    }
    let threshold = rel_tol * a.max_abs().max(1e-300);
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if aug.get(r, col).abs() > aug.get(best, col).abs() {
                best = r;
            }
        }
        if aug.get(best, col).abs() <= threshold {
            return None;
        }
        aug.swap_rows(col, best);
        let pivot = aug.get(col, col);
        for r in col + 1..n {
            let factor = aug.get(r, col) / pivot;
            if factor != 0.0 {
                for c in col..=n {
                    let v = aug.get(r, c) - factor * aug.get(col, c);
                    aug.set(r, c, v);
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = aug.get(col, n);
        for c in col + 1..n {
            acc -= aug.get(col, c) * x[c];
        }
        x[col] = acc / aug.get(col, col);
    }
    Some(x)
}

/// Least-squares fit of dual multipliers: minimize `||A^T y - r||_2` via
/// ridge-regularized normal equations `(A A^T + lambda I) y = A r`.
///
/// The ridge keeps rank-deficient constraint matrices (row-sum/column-sum
/// systems) solvable; it perturbs the fit well below the tolerances any
/// caller checks against.
pub fn fit_multipliers(a: &Mat, r: &[f64]) -> Vec<f64> {
    let m = a.rows();
    assert_eq!(r.len(), a.cols());
    let mut gram = Mat::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let dot = a
                .row(i)
                .iter()
                .zip(a.row(j))
                .map(|(x, y)| x * y)
                .sum::<f64>();
            gram.set(i, j, dot);
            gram.set(j, i, dot);
        }
    }
    let scale = gram.max_abs().max(1.0);
    for i in 0..m {
        gram.set(i, i, gram.get(i, i) + 1e-12 * scale);
    }
    let rhs = a.mul_vec(r);
    solve_square_with_tol(&gram, &rhs, 1e-15).expect("ridge-regularized Gram matrix is nonsingular")
}

/// Max-norm of a vector.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Max-norm of the difference of two equally sized vectors.
pub fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_birkhoff_constraints() {
        // row-sum + column-sum constraints of the 3x3 Birkhoff polytope
        let n = 3;
        let mut rows = vec![vec![0.0; n * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                rows[i][i * n + j] = 1.0;
                rows[n + j][i * n + j] = 1.0;
            }
        }
        let a = Mat::from_rows(&rows);
        assert_eq!(a.rank(), 2 * n - 1);
    }

    #[test]
    fn rank_detects_dependent_rows() {
        let a = Mat::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn basis_solve_consistent_tall_system() {
        // x = (2, 1) satisfies all three rows
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let b = vec![2.0, 1.0, 3.0];
        match solve_basis_system(&a, &b, 1e-9) {
            BasisSolve::Solution(x) => {
                assert!((x[0] - 2.0).abs() < 1e-12);
                assert!((x[1] - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected a solution"),
        }
    }

    #[test]
    fn basis_solve_flags_inconsistency() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let b = vec![2.0, 1.0, 4.0];
        assert!(matches!(
            solve_basis_system(&a, &b, 1e-9),
            BasisSolve::Inconsistent
        ));
    }

    #[test]
    fn basis_solve_flags_singular_columns() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let b = vec![1.0, 2.0, 3.0];
        assert!(matches!(
            solve_basis_system(&a, &b, 1e-9),
            BasisSolve::Singular
        ));
    }

    #[test]
    fn square_solve_roundtrip() {
        let a = Mat::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let x_true = vec![1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = solve_square_with_tol(&a, &b, PIVOT_REL_TOL).unwrap();
        assert!(inf_norm_diff(&x, &x_true) < 1e-12);

        let singular = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(solve_square_with_tol(&singular, &[1.0, 2.0], PIVOT_REL_TOL).is_none());
    }

    #[test]
    fn multiplier_fit_recovers_exact_decomposition() {
        let a = Mat::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let y_true = vec![0.7, -0.3];
        let r = a.mul_transpose_vec(&y_true);
        let y = fit_multipliers(&a, &r);
        let residual = inf_norm_diff(&a.mul_transpose_vec(&y), &r);
        assert!(residual < 1e-9, "residual {residual}");
    }
}
