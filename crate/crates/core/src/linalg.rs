//! Dense LU determinants with partial pivoting, in linear and log space.

use nalgebra::DMatrix;
use num::complex::Complex64;

use crate::error::{Error, Result};

/// LU factorization summary of a square complex matrix.
#[derive(Debug, Clone, Copy)]
pub struct DetResult {
    /// determinant (may under/overflow for large matrices; see `log_abs`)
    pub det: Complex64,
    /// `ln |det|`, accumulated pivot by pivot
    pub log_abs: f64,
    /// complex argument of the determinant
    pub arg: f64,
    /// smallest pivot magnitude encountered
    pub min_pivot: f64,
}

/// Determinant by LU with partial pivoting.
///
/// Fails with a numerical error carrying the pivot magnitude when the
/// matrix is singular to working precision.
pub fn lu_det(mut a: DMatrix<Complex64>) -> Result<DetResult> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    if n == 0 {
        return Ok(DetResult {
            det: Complex64::new(1.0, 0.0),
            log_abs: 0.0,
            arg: 0.0,
            min_pivot: f64::INFINITY,
        });
    }
    let mut swaps = 0usize;
    let mut log_abs = 0.0f64;
    let mut arg = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    let scale: f64 = a.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[(col, col)].norm();
        for row in col + 1..n {
            let mag = a[(row, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag <= scale * 1e-300 {
            return Err(Error::numerical(format!(
                "singular to working precision: pivot magnitude {pivot_mag:.3e} at column {col}"
            )));
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
            swaps += 1;
        }
        let pivot = a[(col, col)];
        min_pivot = min_pivot.min(pivot_mag);
        log_abs += pivot_mag.ln();
        arg += pivot.arg();
        for row in col + 1..n {
            let factor = a[(row, col)] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let upd = factor * a[(col, k)];
                a[(row, k)] -= upd;
            }
        }
    }
    if swaps % 2 == 1 {
        arg += std::f64::consts::PI;
    }
    let det = Complex64::from_polar(log_abs.exp(), arg);
    Ok(DetResult {
        det,
        log_abs,
        arg,
        min_pivot,
    })
}

/// Trace of a product of square matrices; the last factor is folded in
/// without forming the full product.
pub fn trace_of_product(ms: &[&DMatrix<Complex64>]) -> Complex64 {
    assert!(!ms.is_empty(), "need at least one factor");
    if ms.len() == 1 {
        return ms[0].trace();
    }
    let mut acc = ms[0].clone();
    for m in &ms[1..ms.len() - 1] {
        acc *= *m;
    }
    let last = ms[ms.len() - 1];
    let n = acc.nrows();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += acc[(i, k)] * last[(k, i)];
        }
    }
    tr
}
