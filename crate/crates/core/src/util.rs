use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Rejects non-square or asymmetric matrices. `tol` is absolute, scaled by
/// the largest entry magnitude (floored at 1) so near-zero matrices pass.
pub(crate) fn check_square_symmetric(m: &DMatrix<f64>, tol: f64, context: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{context}: matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(format!("{context}: matrix entry")));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let asym = (m[(i, j)] - m[(j, i)]).abs();
            if asym > tol * scale {
                return Err(Error::InvalidParameter(format!(
                    "{context}: matrix asymmetric at ({i},{j}) by {asym:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Trapezoid integral of `values` tabulated on `grid`.
pub(crate) fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.len().saturating_sub(1) {
        acc += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
    }
    acc
}

/// Cumulative trapezoid integral, anchored at zero on the first node.
pub(crate) fn cumulative_trapezoid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..grid.len().saturating_sub(1) {
        acc += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
        out.push(acc);
    }
    out
}

/// Trapezoid node weights: integrating f against these weights equals the
/// trapezoid rule applied to the tabulated f.
pub(crate) fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let half = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}
