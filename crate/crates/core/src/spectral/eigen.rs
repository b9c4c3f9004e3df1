//! Dense non-symmetric eigendecomposition.
//!
//! A complex Schur form `A = Q T Q*` is computed first; eigenvectors of the
//! triangular factor come from back-substitution and are mapped back by `Q`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::schur::complex_schur;
use super::{AdmissibilityTolerances, SpectralError, Verdict};
use crate::linalg::{self, CMatrix, ZERO};

/// How the eigenvector columns were scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Unit 2-norm, largest-magnitude entry real and positive.
    UnitPhase,
    /// Closed-form basis supplied by the caller (e.g. the weighted cycle).
    ClosedForm,
    /// A basis of either kind multiplied by a positive scalar.
    Scaled(f64),
}

/// Eigenvalues and right eigenvectors, `A w_k = lambda_k w_k`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
    pub normalization: Normalization,
}

// Entries within this relative distance of the largest magnitude count as ties
// when choosing the phase pivot; the first such index wins.
const PHASE_TIE: f64 = 1e-8;
const MAG_QUANTUM: f64 = 1e9;

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `||A w_k - lambda_k w_k||` over all eigenpairs.
    pub fn max_residual(&self, a: &CMatrix) -> f64 {
        let av = a * &self.vectors;
        (0..self.n())
            .map(|k| {
                let r = av.column(k) - self.vectors.column(k) * self.values[k];
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Condition number of the eigenvector matrix.
    pub fn condition(&self) -> f64 {
        linalg::condition_number(&self.vectors)
    }

    /// Classify the spectrum; see [`Verdict`].
    pub fn verdict(&self, tol: &AdmissibilityTolerances) -> Verdict {
        is_admissible(self, tol)
    }
}

/// Full eigendecomposition of a general square matrix.
///
/// Eigenvalues are ordered by descending magnitude, then ascending argument in
/// `[0, 2 pi)`; every column has unit norm and a positive real pivot.
pub fn eigendecompose(a: &CMatrix) -> Result<EigenSystem, SpectralError> {
    if !a.is_square() {
        return Err(SpectralError::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
            normalization: Normalization::UnitPhase,
        });
    }
    let (q, t) = complex_schur(a).ok_or(SpectralError::NonConvergence { n })?;
    let y = triangular_eigenvectors(&t);
    let mut v = q * y;
    let mut values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    for k in 0..n {
        let mut col = v.column_mut(k);
        let norm = col.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(SpectralError::NonConvergence { n });
        }
        col /= Complex64::new(norm, 0.0);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max * (1.0 - PHASE_TIE))
            .expect("non-empty column");
        let p = col[pivot];
        col *= p.conj() / p.norm();
        col[pivot] = Complex64::new(col[pivot].norm(), 0.0);
    }

    let order = spectral_order(&values);
    values = order.iter().map(|&k| values[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    v = vectors;
    Ok(EigenSystem {
        values,
        vectors: v,
        normalization: Normalization::UnitPhase,
    })
}

/// Real-matrix convenience wrapper.
pub fn eigendecompose_real(a: &linalg::RMatrix) -> Result<EigenSystem, SpectralError> {
    eigendecompose(&linalg::to_complex(a))
}

/// Argument mapped into `[0, 2 pi)`, snapping values just below `2 pi` to 0.
fn unit_arg(z: Complex64) -> f64 {
    let mut a = z.im.atan2(z.re);
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU - 1e-12 {
        0.0
    } else {
        a
    }
}

/// Permutation sorting eigenvalues by (descending |lambda|, ascending arg).
pub fn spectral_order(values: &[Complex64]) -> Vec<usize> {
    let scale = values
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut keyed: Vec<(i64, f64, usize)> = values
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let mag = (z.norm() / scale * MAG_QUANTUM).round() as i64;
            (-mag, unit_arg(*z), k)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    keyed.into_iter().map(|(_, _, k)| k).collect()
}

/// Eigenvectors of an upper-triangular matrix by back-substitution.
///
/// Column `k` solves `(T - t_kk I) y = 0` with `y_k = 1`, `y_i = 0` for `i > k`.
/// Near-zero pivots are perturbed to `eps * ||T||` and the partial solution is
/// rescaled whenever it grows past `1e150`.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e10);
    let mut y = CMatrix::zeros(n, n);
    let mut buf = vec![ZERO; n];
    for k in 0..n {
        buf[..=k].iter_mut().for_each(|z| *z = ZERO);
        buf[k] = Complex64::new(1.0, 0.0);
        let lambda = t[(k, k)];
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * buf[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            buf[i] = -s / d;
            let mag = buf[i].norm();
            if mag > 1e150 {
                let inv = 1.0 / mag;
                buf[i..=k].iter_mut().for_each(|z| *z *= inv);
            }
        }
        for i in 0..=k {
            y[(i, k)] = buf[i];
        }
    }
    y
}

/// Admissibility classification (diagonalizable with distinct non-zero eigenvalues).
///
/// * `Singular` if `min |lambda| <= tol.zero * max |lambda|`;
/// * `Defective` if `cond(V) > tol.defective_cond`;
/// * `NonsingularOnly` if two eigenvalues lie within `tol.gap * max |lambda|`;
/// * otherwise `Admissible`.
pub fn is_admissible(sys: &EigenSystem, tol: &AdmissibilityTolerances) -> Verdict {
    match spectrum_verdict(&sys.values, tol) {
        Verdict::Singular => Verdict::Singular,
        _ if !(sys.condition() <= tol.defective_cond) => Verdict::Defective,
        v => v,
    }
}

/// The eigenvalue-only part of [`is_admissible`]: never returns `Defective`.
pub fn spectrum_verdict(values: &[Complex64], tol: &AdmissibilityTolerances) -> Verdict {
    let rho = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if values.is_empty() || min <= tol.zero * rho {
        return Verdict::Singular;
    }
    let gap = tol.gap * rho;
    for (i, a) in values.iter().enumerate() {
        if values[i + 1..].iter().any(|b| (a - b).norm() <= gap) {
            return Verdict::NonsingularOnly;
        }
    }
    Verdict::Admissible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft;
    use crate::graph::Digraph;
    use crate::linalg::{to_complex, RMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circulant_four() {
        let a = to_complex(&Digraph::cycle(4).unwrap().adjacency());
        let sys = eigendecompose(&a).unwrap();
        let expect = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)];
        for (got, want) in sys.values.iter().zip(expect) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        // Columns equal the DFT harmonics exactly under the phase convention.
        assert!((&sys.vectors - dft::unitary_idft(4)).norm() < 1e-12);
    }

    #[test]
    fn identity_and_diagonal() {
        let sys = eigendecompose(&CMatrix::identity(3, 3)).unwrap();
        assert!(sys.values.iter().all(|z| (z - c(1., 0.)).norm() < 1e-14));
        let d = to_complex(&RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1., 2., 3.])));
        let sys = eigendecompose(&d).unwrap();
        let vals: Vec<f64> = sys.values.iter().map(|z| z.re).collect();
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        let mut perm = CMatrix::zeros(3, 3);
        perm[(2, 0)] = c(1., 0.);
        perm[(1, 1)] = c(1., 0.);
        perm[(0, 2)] = c(1., 0.);
        assert!((&sys.vectors - perm).norm() < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let tol = AdmissibilityTolerances::default();
        for n in 2..=64 {
            let a = to_complex(&Digraph::cycle(n).unwrap().adjacency());
            assert_eq!(eigendecompose(&a).unwrap().verdict(&tol), Verdict::Admissible, "n={n}");
        }
        let id = eigendecompose(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(id.verdict(&tol), Verdict::NonsingularOnly);
        let shift = to_complex(&Digraph::line(6).unwrap().adjacency());
        assert_eq!(eigendecompose(&shift).unwrap().verdict(&tol), Verdict::Singular);
        // A 2x2 Jordan block with eigenvalue 1 is non-singular but defective.
        let jordan = to_complex(&RMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.]));
        assert_eq!(eigendecompose(&jordan).unwrap().verdict(&tol), Verdict::Defective);
    }

    #[test]
    fn residuals_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.random_range(1..=32);
            let a = CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), 0.0));
            let sys = eigendecompose(&a).unwrap();
            let anorm = linalg::spectral_norm(&a).max(1.0);
            assert!(sys.max_residual(&a) <= 1e-8 * anorm);
            for k in 0..n {
                assert!((sys.vectors.column(k).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nilpotent_block_stays_finite() {
        let a = to_complex(&Digraph::line(16).unwrap().adjacency());
        let sys = eigendecompose(&a).unwrap();
        assert!(sys.vectors.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}
