//! Exact permanents of small complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Largest order computed exactly.
pub const MAX_ORDER: usize = 8;

/// Permanent by Ryser's formula with Gray-code subset enumeration,
/// O(2ⁿ·n).
pub fn permanent(matrix: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Setup(format!(
            "permanent of non-square {}x{} matrix",
            n,
            matrix.ncols()
        )));
    }
    if n > MAX_ORDER {
        return Err(Error::Capacity {
            what: "permanent order",
            requested: n,
            cap: MAX_ORDER,
        });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_subset = vec![false; n];
    let mut total = Complex64::new(0.0, 0.0);
    for k in 1u32..(1u32 << n) {
        let j = k.trailing_zeros() as usize;
        let sign = if in_subset[j] { -1.0 } else { 1.0 };
        in_subset[j] = !in_subset[j];
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += sign * matrix[(i, j)];
        }
        let prod = row_sums
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s);
        // Gray code k has popcount parity of k ^ (k >> 1).
        let size = (k ^ (k >> 1)).count_ones() as usize;
        if size % 2 == n % 2 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}
