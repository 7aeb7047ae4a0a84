//! Riemann zeta function on the real line.

// B_{2k} / (2k)! for k = 1..=8.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

/// ζ(s) for real `s ≠ 1`, by Euler–Maclaurin summation.
///
/// Accurate to roughly machine precision for `s` in (−4, 8), which covers
/// every use in this crate (pole exponents lie in (−1, 1)).
pub fn zeta(s: f64) -> f64 {
    assert!(s != 1.0, "zeta has a pole at s = 1");
    const N: usize = 12;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}.
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            npow /= n * n;
        }
        sum += coeff * rising * npow;
    }
    sum
}
