use num::Zero;

use crate::rational::Rational;

/// Solves the square system `a · x = b` by Gauss–Jordan elimination.
/// Returns `None` when `a` is singular or not square.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for entry in a[col].iter_mut() {
            *entry *= &inv;
        }
        b[col] *= &inv;
        let pivot_row = a[col].clone();
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for (x, p) in a[row].iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
            let delta = &factor * &b[col];
            b[row] -= delta;
        }
    }
    Some(b)
}
