//! Roots of the lag polynomials used by ARMA factors.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Roots of `1 - c_1 z - ... - c_p z^p` (AR convention).
///
/// Computed as reciprocals of the companion-matrix eigenvalues of the
/// reversed polynomial; a vanishing eigenvalue corresponds to a root at
/// infinity and is omitted.
pub fn ar_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let p = trimmed_len(coeffs);
    if p == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, c) in coeffs[..p].iter().enumerate() {
        companion[(0, j)] = *c;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|l| l.norm() > 0.0)
        .map(|l| Complex64::new(1.0, 0.0) / *l)
        .collect()
}

/// Roots of `1 + c_1 z + ... + c_q z^q` (MA convention).
pub fn ma_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    ar_roots(&negated)
}

fn trimmed_len(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1)
}
