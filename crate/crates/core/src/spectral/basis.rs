use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EigenSystem, Normalization, SpectralError};
use crate::graph::Signal;
use crate::linalg::{self, CMatrix, RMatrix};

/// Graph Fourier transform built from an eigensystem: `F = V^-1`.
#[derive(Debug, Clone)]
pub struct GftBasis {
    pub eigen: EigenSystem,
    /// `F = V^-1`.
    pub forward: CMatrix,
    /// 2-norm condition number of `V`.
    pub cond: f64,
    /// `(||F V - I||, ||V F - I||)`.
    pub stability: (f64, f64),
}

impl GftBasis {
    /// Invert the eigenvector matrix; fails when it is numerically singular.
    pub fn new(eigen: EigenSystem) -> Result<Self, SpectralError> {
        let forward = linalg::invert(&eigen.vectors).ok_or(SpectralError::SingularBasis)?;
        Ok(Self::with_forward(eigen, forward))
    }

    /// Use a known inverse (closed forms) instead of a numerical one.
    pub fn with_forward(eigen: EigenSystem, forward: CMatrix) -> Self {
        let cond = linalg::condition_number(&eigen.vectors);
        let stability = stability_norms(&forward, &eigen.vectors);
        Self {
            eigen,
            forward,
            cond,
            stability,
        }
    }

    pub fn n(&self) -> usize {
        self.eigen.n()
    }

    /// `V`, whose columns are the Fourier harmonics.
    pub fn inverse(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigen.values
    }

    /// Spectral coefficients `F x`.
    pub fn analyze(&self, x: &Signal) -> Vec<Complex64> {
        let v = &self.forward * DVector::from_column_slice(x.values());
        v.iter().copied().collect()
    }

    /// Signal `V y` from spectral coefficients.
    pub fn synthesize(&self, y: &[Complex64]) -> Signal {
        let v = &self.eigen.vectors * DVector::from_column_slice(y);
        Signal(v.iter().copied().collect())
    }

    /// Serializable snapshot: interleaved re/im rows plus metadata.
    pub fn to_record(&self) -> GftRecord {
        let interleave = |m: &CMatrix| -> Vec<Vec<f64>> {
            m.row_iter()
                .map(|r| r.iter().flat_map(|z| [z.re, z.im]).collect())
                .collect()
        };
        GftRecord {
            n: self.n(),
            eigenvalues: self.eigen.values.iter().map(|z| [z.re, z.im]).collect(),
            vectors: interleave(&self.eigen.vectors),
            forward: interleave(&self.forward),
            normalization: self.eigen.normalization,
            cond: self.cond,
            stability: [self.stability.0, self.stability.1],
        }
    }
}

/// JSON form of a [`GftBasis`]. Matrix rows are `[re0, im0, re1, im1, ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GftRecord {
    pub n: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub vectors: Vec<Vec<f64>>,
    pub forward: Vec<Vec<f64>>,
    pub normalization: Normalization,
    pub cond: f64,
    pub stability: [f64; 2],
}

/// `(delta_V, Delta_V)`: largest column norm of `Q V` and its operator 2-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityIndices {
    pub delta: f64,
    pub big_delta: f64,
}

pub fn compatibility_indices(
    q: &RMatrix,
    v: &CMatrix,
) -> Result<CompatibilityIndices, SpectralError> {
    if q.ncols() != v.nrows() {
        return Err(SpectralError::DimensionMismatch(format!(
            "Q is {}x{}, V is {}x{}",
            q.nrows(),
            q.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let qv = linalg::to_complex(q) * v;
    let delta = qv
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let big_delta = linalg::spectral_norm(&qv);
    Ok(CompatibilityIndices { delta, big_delta })
}

/// `eps * V`.
pub fn scale_basis(v: &CMatrix, eps: f64) -> Result<CMatrix, SpectralError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!(
            "scale must be positive, got {eps}"
        )));
    }
    Ok(v * Complex64::new(eps, 0.0))
}

/// Operator norms of `F V - I` and `V F - I`.
pub fn stability_norms(f: &CMatrix, v: &CMatrix) -> (f64, f64) {
    let n = v.nrows();
    let id = CMatrix::identity(n, n);
    (
        linalg::spectral_norm(&(f * v - &id)),
        linalg::spectral_norm(&(v * f - &id)),
    )
}

/// Entry `(j, k)` is `|| |v1[:, j]| - |v2[:, k]| ||` with entrywise magnitudes.
pub fn compare_bases(v1: &CMatrix, v2: &CMatrix) -> Result<RMatrix, SpectralError> {
    if v1.shape() != v2.shape() {
        return Err(SpectralError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            v1.shape(),
            v2.shape()
        )));
    }
    let m1 = v1.map(|z| z.norm());
    let m2 = v2.map(|z| z.norm());
    Ok(RMatrix::from_fn(v1.ncols(), v2.ncols(), |j, k| {
        (m1.column(j) - m2.column(k)).norm()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft;
    use crate::spectral::{eigendecompose, Normalization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn line_to_cycle_indices() {
        let n = 16;
        let mut q = RMatrix::zeros(n, n);
        q[(n - 1, 0)] = 1.0;
        let idx = compatibility_indices(&q, &dft::unitary_idft(n)).unwrap();
        assert!((idx.big_delta - 1.0).abs() < 1e-12);
        assert!((idx.delta - 0.25).abs() < 1e-12);
        let zero = compatibility_indices(&RMatrix::zeros(n, n), &dft::unitary_idft(n)).unwrap();
        assert_eq!((zero.delta, zero.big_delta), (0.0, 0.0));
        assert!(compatibility_indices(&RMatrix::zeros(3, 3), &dft::unitary_idft(4)).is_err());
    }

    #[test]
    fn scaling_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..10);
            let v = random_complex(&mut rng, n, n);
            let q = RMatrix::from_fn(n, n, |_, _| f64::from(rng.random_bool(0.2) as u8));
            let eps: f64 = rng.random_range(0.01..3.0);
            let sv = scale_basis(&v, eps).unwrap();
            let a = compatibility_indices(&q, &v).unwrap();
            let b = compatibility_indices(&q, &sv).unwrap();
            assert!((b.delta - eps * a.delta).abs() <= 1e-12 * (1.0 + a.delta));
            assert!((b.big_delta - eps * a.big_delta).abs() <= 1e-12 * (1.0 + a.big_delta));
            assert!(a.delta <= a.big_delta * (1.0 + 1e-12));
            let ka = linalg::condition_number(&v);
            let kb = linalg::condition_number(&sv);
            assert!((ka - kb).abs() <= 1e-9 * ka);
        }
        let v = random_complex(&mut rng, 3, 3);
        assert_eq!(scale_basis(&v, 1.0).unwrap(), v);
        assert!(scale_basis(&v, 0.0).is_err());
    }

    #[test]
    fn dft_pair_is_stable() {
        let (l, r) = stability_norms(&dft::unitary_dft(16), &dft::unitary_idft(16));
        assert!(l <= 1e-13 && r <= 1e-13);
    }

    #[test]
    fn singular_basis_is_rejected() {
        let mut v = CMatrix::identity(3, 3);
        v[(2, 2)] = Complex64::new(0.0, 0.0);
        let sys = EigenSystem {
            values: vec![Complex64::new(1.0, 0.0); 3],
            vectors: v,
            normalization: Normalization::ClosedForm,
        };
        assert!(matches!(GftBasis::new(sys), Err(SpectralError::SingularBasis)));
    }

    #[test]
    fn compare_bases_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v1 = random_complex(&mut rng, 4, 4);
        let v2 = random_complex(&mut rng, 4, 4);
        let d = compare_bases(&v1, &v2).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for i in 0..4 {
                    s += (v1[(i, j)].norm() - v2[(i, k)].norm()).powi(2);
                }
                assert!((d[(j, k)] - s.sqrt()).abs() < 1e-14);
            }
        }
        let same = compare_bases(&v1, &v1).unwrap();
        assert!((0..4).all(|j| same[(j, j)] == 0.0));
        // Column phase rotations do not change magnitudes.
        let mut rotated = v1.clone();
        for (k, mut col) in rotated.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, 0.7 * k as f64 + 0.1);
        }
        let d = compare_bases(&v1, &rotated).unwrap();
        assert!((0..4).all(|j| d[(j, j)] < 1e-14));
        assert!(compare_bases(&v1, &random_complex(&mut rng, 4, 3)).is_err());
    }

    #[test]
    fn basis_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_complex(&mut rng, 6, 6);
        let basis = GftBasis::new(eigendecompose(&a).unwrap()).unwrap();
        let x = Signal((0..6).map(|i| Complex64::new(i as f64, 1.0)).collect());
        let back = basis.synthesize(&basis.analyze(&x));
        assert!(back.distance(&x) < 1e-10);
        let rec = basis.to_record();
        assert_eq!(rec.vectors[0].len(), 12);
        assert!(serde_json::to_string(&rec).is_ok());
    }
}
