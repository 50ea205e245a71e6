use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::NumError;

const SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), NumError> {
    if !m.is_square() {
        return Err(NumError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(NumError::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix; `+inf` for the empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64, NumError> {
    Ok(min_eigenpair(m)?.0)
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eigenpair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>), NumError> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok((f64::INFINITY, DVector::zeros(0)));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    Ok((val, eig.eigenvectors.column(idx).into_owned()))
}

/// Minimum eigenvalue over a block-diagonal matrix.
pub fn min_eigenvalue_blocks(blocks: &[DMatrix<f64>]) -> Result<f64, NumError> {
    blocks.iter().try_fold(f64::INFINITY, |acc, b| Ok(acc.min(min_eigenvalue(b)?)))
}
