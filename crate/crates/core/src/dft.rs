//! Unitary discrete Fourier matrices.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// `exp(sign * 2 pi i * k / n)` with the exponent reduced mod `n` first.
pub fn root_of_unity(k: usize, n: usize, sign: f64) -> Complex64 {
    let k = k % n;
    Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64)
}

/// Unitary DFT, `F[k][l] = exp(-2 pi i k l / n) / sqrt(n)`.
pub fn unitary_dft(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |k, l| root_of_unity(k * l, n, -1.0) * s)
}

/// Inverse (= adjoint) of [`unitary_dft`]; its columns are the DFT harmonics.
pub fn unitary_idft(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |l, k| root_of_unity(k * l, n, 1.0) * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_is_unitary() {
        for n in [1, 2, 5, 16] {
            let f = unitary_dft(n);
            let prod = &f * unitary_idft(n);
            assert!((prod - CMatrix::identity(n, n)).norm() < 1e-13);
            assert!((unitary_idft(n) - f.adjoint()).norm() < 1e-15);
        }
    }
}
