//! Convolution on admissible digraphs.
//!
//! For a basis `V` with `F = V^-1`, the product `x * y = V (F x . F y)` satisfies
//! the convolution theorem by construction, and every system `h(A)` acts as
//! convolution with its impulse `s_h = V h(lambda)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Signal};
use crate::linalg::{CMatrix, RMatrix, ONE, ZERO};
use crate::spectral::{
    eigendecompose_real, spectrum_verdict, AdmissibilityTolerances, GftBasis, SpectralError,
    Verdict,
};

// Interpolation weights or coefficients beyond this magnitude trigger a warning.
const CONDITIONING_WARN: f64 = 1e12;

#[derive(Debug, Error)]
pub enum ConvolutionError {
    #[error("basis is not admissible ({0})")]
    NotAdmissible(Verdict),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemPolynomial {
    pub coefficients: Vec<Complex64>,
}

impl SystemPolynomial {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        Self { coefficients }
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![ZERO; k + 1];
        c[k] = ONE;
        Self::new(c)
    }

    /// Degree ignoring trailing zero coefficients; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| *c != ZERO)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Parse comma-separated coefficients, each `re` or `re:im`, ascending degree.
    pub fn parse(text: &str) -> Result<Self, String> {
        text.split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (re, im) = tok.split_once(':').unwrap_or((tok, "0"));
                let re: f64 = re.trim().parse().map_err(|_| format!("bad coefficient {tok:?}"))?;
                let im: f64 = im.trim().parse().map_err(|_| format!("bad coefficient {tok:?}"))?;
                Ok(Complex64::new(re, im))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

/// An admissible basis together with its eigenvalues.
#[derive(Debug, Clone)]
pub struct ConvolutionContext {
    basis: GftBasis,
}

impl ConvolutionContext {
    /// Wrap a basis whose eigenvalues are distinct and non-zero under `tol`.
    pub fn new(basis: GftBasis, tol: &AdmissibilityTolerances) -> Result<Self, ConvolutionError> {
        match spectrum_verdict(basis.eigenvalues(), tol) {
            Verdict::Admissible => Ok(Self { basis }),
            v => Err(ConvolutionError::NotAdmissible(v)),
        }
    }

    /// Eigendecompose an adjacency matrix and require the full admissibility test.
    pub fn from_adjacency(a: &RMatrix, tol: &AdmissibilityTolerances) -> Result<Self, ConvolutionError> {
        let eigen = eigendecompose_real(a)?;
        match eigen.verdict(tol) {
            Verdict::Admissible => Self::new(GftBasis::new(eigen)?, tol),
            v => Err(ConvolutionError::NotAdmissible(v)),
        }
    }

    pub fn basis(&self) -> &GftBasis {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        self.basis.eigenvalues()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    fn spectral(&self, x: &Signal) -> Result<Vec<Complex64>, ConvolutionError> {
        x.check_len(self.n())?;
        Ok(self.basis.analyze(x))
    }
}

/// `V (F x . F y)`.
pub fn convolve(ctx: &ConvolutionContext, x: &Signal, y: &Signal) -> Result<Signal, ConvolutionError> {
    let fx = ctx.spectral(x)?;
    let fy = ctx.spectral(y)?;
    let prod: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| a * b).collect();
    Ok(ctx.basis.synthesize(&prod))
}

/// Unit of the product: `V 1`.
pub fn identity_element(ctx: &ConvolutionContext) -> Signal {
    ctx.basis.synthesize(&vec![ONE; ctx.n()])
}

/// `s_h = V h(lambda)`, equivalently `F^-1 h(D) 1`.
pub fn impulse_of_polynomial(ctx: &ConvolutionContext, h: &SystemPolynomial) -> Signal {
    let values: Vec<Complex64> = ctx.eigenvalues().iter().map(|&l| h.eval(l)).collect();
    ctx.basis.synthesize(&values)
}

/// The polynomial of degree `< n` with `h(lambda_k) = (F x)_k`, so that
/// `impulse_of_polynomial(h) = x`.
///
/// Lagrange form expanded to monomial coefficients: `prod (z - lambda_j)` is built
/// once and each basis polynomial comes from one synthetic division.
pub fn signal_to_polynomial(ctx: &ConvolutionContext, x: &Signal) -> Result<SystemPolynomial, ConvolutionError> {
    let y = ctx.spectral(x)?;
    Ok(interpolate(ctx.eigenvalues(), &y))
}

fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> SystemPolynomial {
    let n = nodes.len();
    // master[k] is the coefficient of z^k in prod (z - lambda_j).
    let mut master = vec![ZERO; n + 1];
    master[0] = ONE;
    for (deg, &l) in nodes.iter().enumerate() {
        for k in (1..=deg + 1).rev() {
            master[k] = master[k - 1] - l * master[k];
        }
        master[0] = -l * master[0];
    }
    let mut coeffs = vec![ZERO; n];
    let mut quotient = vec![ZERO; n];
    let mut worst = 0.0f64;
    for (k, &l) in nodes.iter().enumerate() {
        let denom: Complex64 = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &m)| l - m)
            .product();
        let w = ONE / denom;
        worst = worst.max(w.norm());
        // Divide the master polynomial by (z - l).
        let mut carry = ZERO;
        for deg in (0..n).rev() {
            carry = master[deg + 1] + carry * l;
            quotient[deg] = carry;
        }
        let scale = values[k] * w;
        for (c, q) in coeffs.iter_mut().zip(&quotient) {
            *c += scale * q;
        }
    }
    let largest = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if worst > CONDITIONING_WARN || largest > CONDITIONING_WARN {
        log::warn!(
            "polynomial interpolation is ill-conditioned (weight {worst:.3e}, coefficient {largest:.3e})"
        );
    }
    SystemPolynomial::new(coeffs)
}

/// `V h(D) F x`.
pub fn apply_system(ctx: &ConvolutionContext, h: &SystemPolynomial, x: &Signal) -> Result<Signal, ConvolutionError> {
    let fx = ctx.spectral(x)?;
    let scaled: Vec<Complex64> = fx
        .iter()
        .zip(ctx.eigenvalues())
        .map(|(c, &l)| c * h.eval(l))
        .collect();
    Ok(ctx.basis.synthesize(&scaled))
}

/// Normalized circular convolution `(x * y)[n] = N^-1/2 sum_m x[m] y[(n - m) mod N]`.
pub fn cyclic_convolve(x: &Signal, y: &Signal) -> Result<Signal, ConvolutionError> {
    let n = x.len();
    y.check_len(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let out = (0..n)
        .map(|k| {
            (0..n)
                .map(|m| x.values()[m] * y.values()[(k + n - m) % n])
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(Signal(out))
}

/// `h(A)` by Horner's rule on matrices.
pub fn matrix_polynomial(h: &SystemPolynomial, a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    h.coefficients
        .iter()
        .rev()
        .fold(CMatrix::zeros(n, n), |acc, &c| &acc * a + CMatrix::identity(n, n) * c)
}

/// `h(A) x` computed directly from the matrix.
pub fn apply_matrix_polynomial(h: &SystemPolynomial, a: &CMatrix, x: &Signal) -> Signal {
    let v = matrix_polynomial(h, a) * DVector::from_column_slice(x.values());
    Signal(v.iter().copied().collect())
}
