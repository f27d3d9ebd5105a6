//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Eigen-decompositions are normalized so that results are reproducible:
//! eigenvalues ascending, and each eigenvector signed so that its
//! largest-magnitude coordinate is positive (first such index on ties).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vector,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Mat,
}

pub fn sym_eigen(m: &Mat) -> SortedEigen {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen {
            values: Vector::zeros(0),
            vectors: Mat::zeros(0, 0),
        };
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrized(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() * (1.0 + 1e-12) {
                pivot = r;
            }
        }
        if v[pivot] < 0.0 {
            v = -v;
        }
        vectors.set_column(col, &v);
    }
    SortedEigen { values, vectors }
}

/// Largest absolute entry of `m - m^T`.
pub fn asymmetry(m: &Mat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrized(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Apply a scalar function to a symmetric matrix through its spectrum.
pub fn sym_function(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let eig = sym_eigen(m);
    let n = m.nrows();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let s = f(eig.values[j]);
        scaled.column_mut(j).scale_mut(s);
    }
    symmetrized(&(scaled * eig.vectors.transpose()))
}

pub fn require_spd(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::malformed(what, "matrix is not square"));
    }
    if m.nrows() == 0 {
        return Ok(());
    }
    let min = sym_eigen(m).values[0];
    if !(min > 0.0) {
        return Err(Error::NotSpd {
            what: what.to_string(),
            min_eigenvalue: min,
        });
    }
    Ok(())
}

pub fn spd_inverse(m: &Mat, what: &str) -> Result<Mat> {
    let n = m.nrows();
    let chol = nalgebra::Cholesky::new(symmetrized(m)).ok_or_else(|| Error::NotSpd {
        what: what.to_string(),
        min_eigenvalue: if n == 0 { 0.0 } else { sym_eigen(m).values[0] },
    })?;
    Ok(symmetrized(&chol.inverse()))
}

pub fn inverse(m: &Mat, what: &str) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))
}

pub fn spd_sqrt(m: &Mat) -> Mat {
    sym_function(m, |x| x.max(0.0).sqrt())
}

pub fn spd_inv_sqrt(m: &Mat) -> Mat {
    sym_function(m, |x| 1.0 / x.sqrt())
}

/// Smallest eigenvalue with its (normalized, sign-fixed) eigenvector.
pub fn min_eigenpair(m: &Mat) -> Option<(f64, Vector)> {
    if m.nrows() == 0 {
        return None;
    }
    let eig = sym_eigen(m);
    Some((eig.values[0], eig.vectors.column(0).into_owned()))
}

pub fn mat_from_rows(rows: &[Vec<f64>], field: &str) -> Result<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::malformed(field, "rows have unequal lengths"));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_is_sorted_and_sign_fixed() {
        let m = Mat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = sym_eigen(&m);
        assert_eq!(e.values.as_slice(), &[1.0, 4.0]);
        assert_eq!(e.vectors[(1, 0)], 1.0);
        assert_eq!(e.vectors[(0, 1)], 1.0);

        let m = Mat::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let e = sym_eigen(&m);
        for j in 0..2 {
            let col = e.vectors.column(j);
            let pivot = col.iamax();
            assert!(col[pivot] > 0.0);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let m = Mat::from_row_slice(3, 3, &[3.0, 1.0, 0.5, 1.0, 2.0, 0.2, 0.5, 0.2, 1.5]);
        let r = spd_sqrt(&m);
        assert!(max_abs(&(&r * &r - &m)) < 1e-13);
        let ri = spd_inv_sqrt(&m);
        assert!(max_abs(&(&ri * &r - Mat::identity(3, 3))) < 1e-13);
    }

    #[test]
    fn non_spd_is_rejected() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(require_spd(&m, "P"), Err(Error::NotSpd { .. })));
        assert!(spd_inverse(&m, "P").is_err());
    }

    #[test]
    fn op_norm_of_diagonal() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![-3.0, 2.0]));
        assert!((op_norm(&m) - 3.0).abs() < 1e-14);
    }
}
