//! Sparse storage, direct solves and condition numbers.

mod lu;
mod sparse;

pub use lu::{residual, reverse_cuthill_mckee, LuFactorization, PIVOT_TOLERANCE};
pub use sparse::{norm2, CsrMatrix, TripletBuilder};

use thiserror::Error;

/// Largest dimension for which [`condition_number`] densifies the matrix.
pub const DENSE_CONDITION_LIMIT: usize = 5000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular or near-singular matrix: pivot {pivot:e} at unknown {pivot_index} (matrix scale {scale:e})")]
    Singular {
        pivot_index: usize,
        pivot: f64,
        scale: f64,
    },
    #[error("matrix of dimension {n} exceeds the dense condition-number limit {limit}; use condition_number_estimate")]
    TooLarge { n: usize, limit: usize },
    #[error("empty matrix")]
    Empty,
}

/// Solves `A x = b` by sparse LU.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    Ok(LuFactorization::new(a)?.solve(b))
}

/// 2-norm condition number from the full singular value spectrum.
pub fn condition_number(a: &CsrMatrix) -> Result<f64, SolveError> {
    if !a.is_square() {
        return Err(SolveError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Err(SolveError::Empty);
    }
    if n > DENSE_CONDITION_LIMIT {
        return Err(SolveError::TooLarge {
            n,
            limit: DENSE_CONDITION_LIMIT,
        });
    }
    let sv = a.to_dense().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Cheaper estimate for large matrices: power iteration on `AᵀA` for the
/// largest singular value and inverse iteration (through LU factors of `A`
/// and `Aᵀ`) for the smallest. Typically accurate to a few digits only.
pub fn condition_number_estimate(a: &CsrMatrix, iterations: usize) -> Result<f64, SolveError> {
    let n = a.nrows();
    if n == 0 {
        return Err(SolveError::Empty);
    }
    let at = a.transpose();
    let start: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();

    let normalize = |v: &mut Vec<f64>| {
        let s = norm2(v);
        v.iter_mut().for_each(|x| *x /= s);
        s
    };

    let mut v = start.clone();
    normalize(&mut v);
    let mut sigma_max = 0.0;
    for _ in 0..iterations {
        let mut w = at.mul_vec(&a.mul_vec(&v));
        sigma_max = normalize(&mut w).sqrt();
        v = w;
    }

    let lu = LuFactorization::new(a)?;
    let lut = LuFactorization::new(&at)?;
    let mut v = start;
    normalize(&mut v);
    let mut inv_sigma_min = 0.0;
    for _ in 0..iterations {
        let mut w = lu.solve(&lut.solve(&v));
        inv_sigma_min = normalize(&mut w).sqrt();
        v = w;
    }
    Ok(sigma_max * inv_sigma_min)
}
