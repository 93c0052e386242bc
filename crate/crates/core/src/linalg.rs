//! Small dense complex linear algebra for per-subband precoding.
//!
//! Matrices are square, row-major `Vec<Complex64>`; sizes are the number of
//! transmit antennas, so everything here is O(n³) with tiny n.

use num_complex::Complex64;

/// Inner product `⟨a, b⟩ = Σ aᵢ · conj(bᵢ)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Solves `A x = b` for Hermitian positive-definite `A` (n × n) via Cholesky.
/// Returns `None` if `A` is not numerically positive definite.
pub fn solve_hpd(a: &[Complex64], b: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // A = L Lᴴ
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                let d = s.re;
                if !(d > 0.0) {
                    return None;
                }
                l[i * n + i] = Complex64::new(d.sqrt(), 0.0);
            } else {
                l[i * n + j] = s / l[j * n + j].re;
            }
        }
    }
    // L y = b
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    // Lᴴ x = y
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * x[k];
        }
        x[i] = s / l[i * n + i].re;
    }
    Some(x)
}

/// `M v` for a row-major n × n matrix.
pub fn mat_vec(m: &[Complex64], v: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

pub fn normalize(v: &mut [Complex64]) -> bool {
    let n = norm_sqr(v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}
