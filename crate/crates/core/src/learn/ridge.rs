//! Tikhonov-regularised least squares, `(AᵀA/m + λI) w = Aᵀy/m`.
//!
//! [`RidgeSystem`] grows the system one column at a time through an
//! appendable Cholesky factor; [`ridge_solve`] solves from scratch by
//! Gaussian elimination.

use super::model::dot;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor that can be extended by one row/column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cholesky {
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Extends the factored matrix by a new last row/column, given the
    /// off-diagonal entries `cross` and the new diagonal entry.
    pub fn append(&mut self, cross: &[f64], diag: f64) -> Result<()> {
        if cross.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: cross.len(),
            });
        }
        let u = self.forward(cross);
        let pivot_sq = diag - dot(&u, &u);
        if !(pivot_sq > 0.0 && pivot_sq.is_finite()) {
            return Err(Error::Numeric(format!(
                "matrix not positive definite (pivot² = {pivot_sq})"
            )));
        }
        self.append_row(u, pivot_sq.sqrt());
        Ok(())
    }

    /// Appends a precomputed row `[u, pivot]` (`u = L⁻¹·cross`).
    pub(crate) fn append_row(&mut self, mut u: Vec<f64>, pivot: f64) {
        debug_assert_eq!(u.len(), self.len());
        u.push(pivot);
        self.rows.push(u);
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate() {
            z.push((b[i] - dot(&row[..i], &z)) / row[i]);
        }
        z
    }

    /// Solves `Lᵀ w = z`.
    pub fn backward(&self, z: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut w = z.to_vec();
        for i in (0..n).rev() {
            w[i] /= self.rows[i][i];
            let wi = w[i];
            for (j, l) in self.rows[i][..i].iter().enumerate() {
                w[j] -= l * wi;
            }
        }
        w
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("non-finite value in {what}")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "ridge lambda must be positive, got {lambda}"
        )))
    }
}

/// Ridge system over a growing set of columns.
#[derive(Debug, Clone)]
pub struct RidgeSystem {
    lambda: f64,
    targets: Vec<f64>,
    columns: Vec<Vec<f64>>,
    chol: Cholesky,
    rhs: Vec<f64>,
}

impl RidgeSystem {
    pub fn new(targets: Vec<f64>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_finite(&targets, "targets")?;
        if targets.is_empty() {
            return Err(Error::config("ridge system needs at least one row"));
        }
        Ok(Self {
            lambda,
            targets,
            columns: Vec::new(),
            chol: Cholesky::default(),
            rhs: Vec::new(),
        })
    }

    fn m(&self) -> f64 {
        self.targets.len() as f64
    }

    pub fn add_column(&mut self, column: Vec<f64>) -> Result<()> {
        if column.len() != self.targets.len() {
            return Err(Error::Dimension {
                expected: self.targets.len(),
                got: column.len(),
            });
        }
        check_finite(&column, "column")?;
        let m = self.m();
        let cross: Vec<f64> = self.columns.iter().map(|c| dot(c, &column) / m).collect();
        let diag = dot(&column, &column) / m + self.lambda;
        self.chol.append(&cross, diag)?;
        self.rhs.push(dot(&column, &self.targets) / m);
        self.columns.push(column);
        Ok(())
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn solve(&self) -> Vec<f64> {
        self.chol.solve(&self.rhs)
    }

    /// `(1/m)‖y − Aw‖² + λ‖w‖²`.
    pub fn objective(&self, w: &[f64]) -> f64 {
        regularized_mse(&self.columns, &self.targets, w, self.lambda)
    }
}

pub(crate) fn regularized_mse(
    columns: &[Vec<f64>],
    targets: &[f64],
    w: &[f64],
    lambda: f64,
) -> f64 {
    let m = targets.len() as f64;
    let mut sse = 0.0;
    for (i, y) in targets.iter().enumerate() {
        let pred: f64 = columns.iter().zip(w).map(|(c, wj)| c[i] * wj).sum();
        sse += (pred - y).powi(2);
    }
    sse / m + lambda * dot(w, w)
}

/// Solves the ridge system for column-major `columns` from scratch.
pub fn ridge_solve(columns: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_finite(targets, "targets")?;
    let m = targets.len();
    if m == 0 {
        return Err(Error::config("ridge system needs at least one row"));
    }
    for c in columns {
        if c.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: c.len(),
            });
        }
        check_finite(c, "column")?;
    }
    let p = columns.len();
    let mf = m as f64;
    // Augmented matrix [G | b].
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut row: Vec<f64> = (0..p).map(|j| dot(&columns[i], &columns[j]) / mf).collect();
            row[i] += lambda;
            row.push(dot(&columns[i], targets) / mf);
            row
        })
        .collect();
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Numeric("singular ridge system".into()));
        }
        a.swap(col, piv);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut w = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * w[j]).sum();
        w[i] = (a[i][p] - s) / a[i][i];
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_column_small_lambda() {
        let mut col = vec![0.0; 8];
        col[0] = 1.0;
        let w = ridge_solve(&[col.clone()], &col, 1e-12).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let cols = vec![vec![1.0, -1.0, 0.5], vec![0.3, 0.2, 0.1]];
        let w = ridge_solve(&cols, &[1.0, -1.0, 1.0], 1e12).unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn rejects_non_finite_and_bad_lambda() {
        assert!(matches!(
            ridge_solve(&[vec![f64::NAN]], &[1.0], 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            ridge_solve(&[vec![1.0]], &[f64::INFINITY], 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            ridge_solve(&[vec![1.0]], &[1.0], 0.0),
            Err(Error::Config(_))
        ));
        let mut sys = RidgeSystem::new(vec![1.0, 2.0], 0.1).unwrap();
        assert!(matches!(
            sys.add_column(vec![1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            sys.add_column(vec![1.0]),
            Err(Error::Dimension { .. })
        ));
    }

    // Independent route: normal equations solved by nalgebra's LU.
    fn dense_reference(cols: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
        let m = y.len();
        let a = DMatrix::from_fn(m, cols.len(), |i, j| cols[j][i]);
        let g = a.transpose() * &a / m as f64 + DMatrix::identity(cols.len(), cols.len()) * lambda;
        let b = a.transpose() * DVector::from_column_slice(y) / m as f64;
        g.lu().solve(&b).unwrap().iter().copied().collect()
    }

    #[test]
    fn random_10x3_matches_dense_solver() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..10).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..10)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let want = dense_reference(&cols, &y, 0.05);
        let got = ridge_solve(&cols, &y, 0.05).unwrap();
        let mut sys = RidgeSystem::new(y.clone(), 0.05).unwrap();
        cols.iter().for_each(|c| sys.add_column(c.clone()).unwrap());
        let inc = sys.solve();
        for i in 0..3 {
            assert!((got[i] - want[i]).abs() < 1e-10);
            assert!((inc[i] - want[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_solution_is_stationary() {
        let cols = [vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 1.0, 1.0, 1.0]];
        let y = [1.0, -1.0, 1.0, 1.0];
        let mut sys = RidgeSystem::new(y.to_vec(), 0.3).unwrap();
        cols.iter().for_each(|c| sys.add_column(c.clone()).unwrap());
        let w = sys.solve();
        let base = sys.objective(&w);
        for j in 0..2 {
            for h in [-1e-4, 1e-4] {
                let mut v = w.clone();
                v[j] += h;
                assert!(sys.objective(&v) >= base);
            }
        }
    }
}
