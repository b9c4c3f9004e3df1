//! Closed forms for the line digraph closed into a cycle by an edge of weight `w`.

use num_complex::Complex64;

use super::{EigenSystem, GftBasis, Normalization, SpectralError};
use crate::dft;
use crate::linalg::{CMatrix, RMatrix};

/// `C_w`: backward shift plus `w` in the bottom-left corner.
pub fn weighted_cycle_adjacency(n: usize, w: f64) -> RMatrix {
    let mut a = RMatrix::zeros(n, n);
    for i in 1..n {
        a[(i - 1, i)] = 1.0;
    }
    if n > 0 {
        a[(n - 1, 0)] += w;
    }
    a
}

/// Closed-form eigenbasis of `C_w`.
///
/// `lambda_k = w^(1/n) exp(2 pi i k / n)` and `V_w = E_w F^-1` with
/// `E_w = diag(1, w^(1/n), ..., w^((n-1)/n))`, so `V_w[l][k] = lambda_k^l / sqrt(n)`.
/// The forward transform is `F E_w^-1`, exact rather than numerically inverted.
pub fn weighted_cycle_basis(n: usize, w: f64) -> Result<GftBasis, SpectralError> {
    if n < 2 {
        return Err(SpectralError::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!(
            "weight must be positive, got {w}"
        )));
    }
    let root = w.powf(1.0 / n as f64);
    let e: Vec<f64> = (0..n).map(|l| w.powf(l as f64 / n as f64)).collect();
    let values: Vec<Complex64> = (0..n)
        .map(|k| dft::root_of_unity(k, n, 1.0) * root)
        .collect();
    let idft = dft::unitary_idft(n);
    let vectors = CMatrix::from_fn(n, n, |l, k| idft[(l, k)] * e[l]);
    let fwd = dft::unitary_dft(n);
    let forward = CMatrix::from_fn(n, n, |k, l| fwd[(k, l)] / e[l]);
    let eigen = EigenSystem {
        values,
        vectors,
        normalization: Normalization::ClosedForm,
    };
    Ok(GftBasis::with_forward(eigen, forward))
}
