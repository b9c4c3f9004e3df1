//! Dense linear-algebra helpers shared by the graph, extension and spectral modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type RMatrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Singular values of a real matrix, sorted in descending order.
pub fn singular_values(a: &RMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Singular values of a complex matrix, sorted in descending order.
pub fn singular_values_complex(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Default numerical-rank threshold `max(rows, cols) * eps * sigma_max`.
pub fn default_rank_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Numerical rank of a (possibly rectangular) real matrix.
pub fn numerical_rank(a: &RMatrix, tol: Option<f64>) -> usize {
    let sv = singular_values(a);
    let Some(&smax) = sv.first() else {
        return 0;
    };
    let tol = tol.unwrap_or_else(|| default_rank_tol(a.nrows(), a.ncols(), smax));
    sv.iter().filter(|&&s| s > tol).count()
}

/// Operator 2-norm.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values_complex(a).first().copied().unwrap_or(0.0)
}

/// Operator 2-norm of a real matrix.
pub fn spectral_norm_real(a: &RMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number `sigma_max / sigma_min`; infinite for a singular matrix.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values_complex(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Inverse of a complex square matrix, refusing numerically singular input.
pub fn invert(a: &CMatrix) -> Option<CMatrix> {
    if !a.is_square() {
        return None;
    }
    let sv = singular_values_complex(a);
    let hi = sv.first().copied().unwrap_or(0.0);
    let lo = sv.last().copied().unwrap_or(0.0);
    if hi == 0.0 || lo <= default_rank_tol(a.nrows(), a.ncols(), hi) {
        return None;
    }
    a.clone().try_inverse()
}

/// Euclidean norm of a complex slice.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact determinant of a small integer matrix (fraction-free Bareiss elimination).
///
/// Intermediate values are bounded by minors of the input, so `i128` is exact for
/// 0/1/2-valued matrices well beyond n = 16.
pub fn integer_determinant(a: &[Vec<i64>]) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "integer_determinant needs a square matrix");
            row.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}
