//! Thin wrappers over nalgebra for the dense complex systems that appear in
//! pairings, B-matrices and Jacobians.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// 2-norm condition number; infinite when singular.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if sv.is_empty() {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    singular_values(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

pub fn solve(m: &CMat, rhs: &[C64]) -> Result<Vec<C64>> {
    let b = nalgebra::DVector::from_column_slice(rhs);
    m.clone()
        .lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::RankDeficient("linear system is singular".into()))
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("matrix is singular".into()))
}

pub fn determinant(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().determinant()
}

/// Largest entry modulus of `a - b`.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}
