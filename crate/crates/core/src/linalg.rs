//! Dense least squares on top of nalgebra's QR.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Error, Result};

/// Relative size below which a diagonal entry of R counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Minimises `||y - X b||^2 + sum_j penalty_j * b_j^2`.
///
/// `design` is row-major `rows x cols`; `penalty`, when given, has one
/// non-negative weight per column.
pub fn ridge_least_squares(
    design: &[f64],
    rows: usize,
    cols: usize,
    y: &[f64],
    penalty: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if design.len() != rows * cols || y.len() != rows || cols == 0 {
        return Err(contract(format!(
            "least squares shapes: design {} for {rows}x{cols}, target {}",
            design.len(),
            y.len()
        )));
    }
    let extra = penalty.map_or(0, |p| p.iter().filter(|w| **w > 0.0).count());
    let total = rows + extra;
    if total < cols {
        return Err(Error::SingularFit(format!(
            "{rows} equations for {cols} unknowns"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(total, cols);
    let mut b = DVector::<f64>::zeros(total);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = design[i * cols + j];
        }
        b[i] = y[i];
    }
    if let Some(p) = penalty {
        let mut r = rows;
        for (j, &w) in p.iter().enumerate() {
            if w > 0.0 {
                a[(r, j)] = libm::sqrt(w);
                r += 1;
            }
        }
    }

    let qr = a.qr();
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let largest = (0..cols).map(|i| libm::fabs(r[(i, i)])).fold(0.0, f64::max);
    if largest == 0.0 || (0..cols).any(|i| libm::fabs(r[(i, i)]) <= RANK_TOL * largest) {
        return Err(Error::SingularFit("design matrix is rank deficient".into()));
    }
    let rhs = qtb.rows(0, cols).into_owned();
    let sol = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::SingularFit("triangular solve failed".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularFit("non-finite coefficients".into()));
    }
    Ok(sol.iter().copied().collect())
}

pub fn least_squares(design: &[f64], rows: usize, cols: usize, y: &[f64]) -> Result<Vec<f64>> {
    ridge_least_squares(design, rows, cols, y, None)
}

/// Solves a small square system; `None` when singular.
pub(crate) fn solve_square(matrix: &[f64], n: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    let a = DMatrix::from_row_slice(n, n, matrix);
    let b = DVector::from_column_slice(rhs);
    a.lu().solve(&b).map(|x| x.iter().copied().collect())
}

/// Moduli of the eigenvalues of the companion matrix of
/// `1 - c_1 z - ... - c_k z^k`; all below one means every root of the
/// polynomial lies outside the unit circle.
pub(crate) fn companion_moduli(coefs: &[f64]) -> Vec<f64> {
    let k = coefs.len();
    if k == 0 {
        return Vec::new();
    }
    let mut m = DMatrix::<f64>::zeros(k, k);
    for (j, c) in coefs.iter().enumerate() {
        m[(0, j)] = *c;
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues().iter().map(|z| libm::hypot(z.re, z.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_line() {
        let design = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        let b = least_squares(&design, 3, 2, &[1.0, 3.0, 5.0]).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_is_singular() {
        let design = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert!(matches!(
            least_squares(&design, 3, 2, &[1.0, 2.0, 3.0]),
            Err(Error::SingularFit(_))
        ));
    }

    #[test]
    fn penalty_shrinks_only_weighted_columns() {
        let design = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        let b = ridge_least_squares(&design, 3, 2, &[1.0, 3.0, 5.0], Some(&[0.0, 1e12])).unwrap();
        assert!(b[1].abs() < 1e-9);
        assert!((b[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn companion_roots() {
        let m = companion_moduli(&[0.5]);
        assert!((m[0] - 0.5).abs() < 1e-12);
        let m = companion_moduli(&[1.2]);
        assert!(m[0] > 1.0);
        assert!(companion_moduli(&[]).is_empty());
        let s = solve_square(&[2.0, 0.0, 0.0, 4.0], 2, &[2.0, 2.0]).unwrap();
        assert_eq!(s, vec![1.0, 0.5]);
    }
}
