use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical rank from singular values, relative to the largest one.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    let tol = 1e-10 * top * m.nrows().max(m.ncols()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

/// The complex structure on `R^{2n}` with coordinates `(x_1, y_1, ..., x_n, y_n)`:
/// `(x_j, y_j) -> (-y_j, x_j)` applied to each row.
pub fn apply_complex_structure(b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(b.nrows(), b.ncols());
    for r in 0..b.nrows() {
        for j in 0..b.ncols() / 2 {
            out[(r, 2 * j)] = -b[(r, 2 * j + 1)];
            out[(r, 2 * j + 1)] = b[(r, 2 * j)];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratingReport {
    /// Rank of the stack `[B; J B]`.
    pub rank: usize,
    /// Real ambient dimension `2n`.
    pub ambient: usize,
    /// `rank == 2n`, i.e. `T ∩ iT = {0}` for the `n`-dimensional span `T` of the rows.
    pub generating: bool,
}

/// Checks whether the row span `T` of `basis` (an `n x 2n` matrix) satisfies `T ∩ iT = {0}`.
pub fn generating_check(basis: &DMatrix<f64>) -> Result<GeneratingReport> {
    let ambient = basis.ncols();
    if ambient == 0 || !ambient.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension must be even and positive, got {ambient}"
        )));
    }
    if basis.nrows() != ambient / 2 {
        return Err(Error::Arity {
            what: "tangent vectors",
            expected: ambient / 2,
            got: basis.nrows(),
        });
    }
    let jb = apply_complex_structure(basis);
    let mut stack = DMatrix::zeros(ambient, ambient);
    stack.rows_mut(0, basis.nrows()).copy_from(basis);
    stack.rows_mut(basis.nrows(), basis.nrows()).copy_from(&jb);
    let rank = numerical_rank(&stack);
    Ok(GeneratingReport {
        rank,
        ambient,
        generating: rank == ambient,
    })
}
