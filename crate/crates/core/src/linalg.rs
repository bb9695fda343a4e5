//! Small dense-matrix helpers shared by the information and construction code.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative pivot floor for the symmetric factorization.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Lower Cholesky factor with a pivot floor of `PIVOT_FLOOR * trace`.
///
/// Any pivot at or below the floor is reported as singular, so a deterministic
/// relation between variables is never confused with round-off.
pub fn cholesky_floored(m: &DMatrix<f64>, block: &str) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{block}: {}x{} is not square", n, m.ncols())));
    }
    let floor = PIVOT_FLOOR * m.trace().abs().max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > floor) {
            return Err(Error::Singular { block: block.to_string() });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Natural log-determinant of a symmetric positive-definite matrix. The empty
/// matrix has determinant one.
pub fn logdet(m: &DMatrix<f64>, block: &str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let l = cholesky_floored(m, block)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Solves `m * x = b` for symmetric positive-definite `m` using the floored factor.
pub fn spd_solve(m: &DMatrix<f64>, b: &DMatrix<f64>, block: &str) -> Result<DMatrix<f64>> {
    let l = cholesky_floored(m, block)?;
    let n = l.nrows();
    let mut x = b.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Rows `rows` and columns `cols` of `m` (0-based).
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Neumaier-compensated sum; the result does not depend on how the caller
/// partitioned the work as long as the input order is fixed.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
