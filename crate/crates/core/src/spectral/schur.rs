//! Complex Schur decomposition by single-shift Hessenberg QR.
//!
//! Hessenberg reduction is delegated to nalgebra; the QR sweep uses Wilkinson
//! shifts with periodic exceptional shifts, which is what lets unitary
//! Hessenberg matrices (cyclic shifts, circulants) converge.

use nalgebra::linalg::Hessenberg;
use num_complex::Complex64;

use crate::linalg::{CMatrix, ZERO};

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Givens rotation `(c, s)` with `[c s; -conj(s) c] [a; b] = [r; 0]`, `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let na = a.norm();
    let norm = na.hypot(b.norm());
    let alpha = a / na;
    (na / norm, alpha * b.conj() / norm)
}

fn wilkinson_shift(h: &CMatrix, i: usize) -> Complex64 {
    let mut t = h[(i, i)];
    let u = h[(i - 1, i)].sqrt() * h[(i, i - 1)].sqrt();
    let su = cabs1(u);
    if su != 0.0 {
        let x = (h[(i - 1, i - 1)] - t) * 0.5;
        let sx = cabs1(x);
        let s = su.max(sx);
        let mut y = ((x / s) * (x / s) + (u / s) * (u / s)).sqrt() * s;
        if sx > 0.0 {
            let xs = x / sx;
            if xs.re * y.re + xs.im * y.im < 0.0 {
                y = -y;
            }
        }
        let denom = x + y;
        if denom != ZERO {
            t -= u * (u / denom);
        }
    }
    t
}

/// `A = Z T Z*` with `T` upper triangular. `None` if the iteration stalls.
pub(crate) fn complex_schur(a: &CMatrix) -> Option<(CMatrix, CMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Some((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    let (mut z, mut h) = Hessenberg::new(a.clone()).unpack();
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = ZERO;
        }
    }
    if n == 1 {
        return Some((z, h));
    }

    let eps = f64::EPSILON;
    let safe_min = f64::MIN_POSITIVE;
    let small = safe_min * (n as f64 / eps);
    let itmax = 30 * n.max(10);
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    let mut i = n - 1;
    loop {
        let mut l = 0;
        let mut converged = false;
        for its in 0..=itmax {
            // Locate the lowest negligible subdiagonal entry in rows l+1..=i.
            let mut k = i;
            while k > l {
                let sub = cabs1(h[(k, k - 1)]);
                if sub <= small {
                    break;
                }
                let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
                if tst == 0.0 {
                    if k >= 2 {
                        tst += h[(k - 1, k - 2)].re.abs();
                    }
                    if k + 1 < n {
                        tst += h[(k + 1, k)].re.abs();
                    }
                }
                if sub <= eps * tst {
                    break;
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                h[(l, l - 1)] = ZERO;
            }
            if l >= i {
                converged = true;
                break;
            }

            let shift = if its > 0 && its % 20 == 10 {
                h[(l, l)] + 0.75 * h[(l + 1, l)].re.abs()
            } else if its > 0 && its % 20 == 0 {
                h[(i, i)] + 0.75 * h[(i, i - 1)].re.abs()
            } else {
                wilkinson_shift(&h, i)
            };

            // Shifted QR on the active window, then RQ, unshift.
            for k in l..=i {
                h[(k, k)] -= shift;
            }
            rot.clear();
            for k in l..i {
                let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
                for j in k..n {
                    let x = h[(k, j)];
                    let y = h[(k + 1, j)];
                    h[(k, j)] = x * c + s * y;
                    h[(k + 1, j)] = -s.conj() * x + y * c;
                }
                h[(k + 1, k)] = ZERO;
                rot.push((c, s));
            }
            for (idx, &(c, s)) in rot.iter().enumerate() {
                let k = l + idx;
                for r in 0..=(k + 1) {
                    let x = h[(r, k)];
                    let y = h[(r, k + 1)];
                    h[(r, k)] = x * c + y * s.conj();
                    h[(r, k + 1)] = -x * s + y * c;
                }
                for r in 0..n {
                    let x = z[(r, k)];
                    let y = z[(r, k + 1)];
                    z[(r, k)] = x * c + y * s.conj();
                    z[(r, k + 1)] = -x * s + y * c;
                }
            }
            for k in l..=i {
                h[(k, k)] += shift;
            }
        }
        if !converged {
            return None;
        }
        if l == 0 {
            break;
        }
        i = l - 1;
        if i == 0 {
            break;
        }
    }
    for j in 0..n {
        for r in j + 1..n {
            h[(r, j)] = ZERO;
        }
    }
    Some((z, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use crate::linalg::to_complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(a: &CMatrix) {
        let (z, t) = complex_schur(a).expect("converges");
        let n = a.nrows();
        let scale = a.norm().max(1.0);
        assert!((&z * &t * z.adjoint() - a).norm() < 1e-12 * scale * n as f64);
        assert!((z.adjoint() * &z - CMatrix::identity(n, n)).norm() < 1e-12 * n as f64);
        for j in 0..n {
            for i in j + 1..n {
                assert_eq!(t[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn cyclic_shifts_converge() {
        for n in 1..=70 {
            check(&to_complex(&Digraph::cycle(n).unwrap().adjacency()));
        }
    }

    #[test]
    fn random_sparse_and_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let n = rng.random_range(1..=70);
            let p = rng.random_range(0.02..0.6);
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(if rng.random_bool(p) { 1.0 } else { 0.0 }, 0.0)
            });
            check(&a);
        }
        for _ in 0..10 {
            let n = rng.random_range(1..=40);
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            check(&a);
        }
    }

    #[test]
    fn zero_and_nilpotent() {
        check(&CMatrix::zeros(5, 5));
        check(&to_complex(&Digraph::line(20).unwrap().adjacency()));
    }
}
