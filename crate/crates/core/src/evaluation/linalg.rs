//! Dense exact Gaussian elimination.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Solve `a x = b` for square, nonsingular `a`.
pub fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Result<Vec<Rat>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("linear system is not square".into()));
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidArgument("singular linear system".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rat::one() / &a[col][col];
        for v in a[col][col..].iter_mut() {
            *v *= &inv;
        }
        b[col] *= &inv;
        let pivot_row = a[col].clone();
        let pivot_b = b[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            b[r] -= &f * &pivot_b;
        }
    }
    Ok(b)
}
