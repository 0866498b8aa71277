//! Small helpers on complex vectors; the dimensions here are tiny (antenna
//! counts), so plain slices beat a linear algebra dependency.

use num_complex::Complex64;

/// Hermitian inner product `x^H y` (conjugates the first argument).
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Squared Euclidean norm.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Returns `x / ||x||`. The caller must pass a non-zero vector.
pub fn normalized(x: &[Complex64]) -> Vec<Complex64> {
    let n = norm_sqr(x).sqrt();
    debug_assert!(n > 0.0);
    x.iter().map(|z| z / n).collect()
}
