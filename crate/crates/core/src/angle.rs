//! Frequencies stored as an exact rational multiple of 2π plus a small
//! floating-point offset.
//!
//! Spectral factors such as |sin(zω/2)| vanish at rational multiples of 2π.
//! Evaluating them from a rounded `f64` frequency loses all relative accuracy
//! within ~1e-12 of a pole; keeping the rational part exact avoids that, which
//! matters for quadrature nodes placed very close to poles.

use std::f64::consts::PI;

use crate::numeric::gcd;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    num: i64,
    den: i64,
    offset: f64,
}

impl Angle {
    /// A plain frequency in radians.
    pub fn radians(omega: f64) -> Self {
        Angle { num: 0, den: 1, offset: omega }
    }

    /// The frequency 2π·num/den.
    pub fn rational(num: i64, den: i64) -> Self {
        assert!(den > 0, "denominator must be positive");
        let g = gcd(num.abs(), den).max(1);
        Angle { num: num / g, den: den / g, offset: 0.0 }
    }

    /// 2π·num/den + offset.
    pub fn near(num: i64, den: i64, offset: f64) -> Self {
        let mut a = Self::rational(num, den);
        a.offset = offset;
        a
    }

    pub fn value(&self) -> f64 {
        2.0 * PI * self.num as f64 / self.den as f64 + self.offset
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The angle −ω.
    pub fn negate(&self) -> Self {
        Angle { num: -self.num, den: self.den, offset: -self.offset }
    }

    /// |sin(z·ω/2)|, accurate near its zeros.
    pub fn abs_sin_half(&self, z: i64) -> f64 {
        // z·ω/2 = π·z·num/den + z·offset/2; reduce z·num modulo den to the
        // nearest integer multiple of den so the residual angle is small.
        let den = self.den as i128;
        let mut rem = ((z as i128) * (self.num as i128)).rem_euclid(den);
        if 2 * rem > den {
            rem -= den;
        }
        let theta = PI * (rem as f64) / self.den as f64 + 0.5 * z as f64 * self.offset;
        theta.sin().abs()
    }

    /// |ω + 2πk|.
    pub fn abs_shift(&self, k: i64) -> f64 {
        let n = self.num as i128 + (k as i128) * (self.den as i128);
        if n == 0 {
            self.offset.abs()
        } else {
            (2.0 * PI * n as f64 / self.den as f64 + self.offset).abs()
        }
    }

    /// (ω + 2πk)/m as an angle.
    pub fn shift_div(&self, k: i64, m: i64) -> Self {
        // Left unreduced: only sines and values are taken from the result.
        Angle { num: self.num + k * self.den, den: self.den * m, offset: self.offset / m as f64 }
    }

    /// ω + 2π·num/den.
    pub fn plus(&self, num: i64, den: i64) -> Self {
        let mut a = Self::rational(self.num * den + num * self.den, self.den * den);
        a.offset = self.offset;
        a
    }

    /// Exact rational part as (num, den) of 2π·num/den.
    pub fn rational_part(&self) -> (i64, i64) {
        (self.num, self.den)
    }

    /// z·ω as an angle.
    pub fn scale(&self, z: i64) -> Self {
        let mut a = Self::rational((self.num * z).rem_euclid(self.den), self.den);
        a.offset = self.offset * z as f64;
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_round_trip() {
        let a = Angle::near(1, 10, 1e-3);
        assert!((a.value() - (2.0 * PI / 10.0 + 1e-3)).abs() < 1e-15);
        assert_eq!(Angle::rational(2, 20), Angle::rational(1, 10));
    }

    #[test]
    fn sine_is_relatively_accurate_near_pole() {
        let eps = 1e-13;
        let a = Angle::near(1, 10, eps);
        let s = a.abs_sin_half(10);
        // sin(π + 5ε) in absolute value ≈ 5ε
        assert!((s / (5.0 * eps) - 1.0).abs() < 1e-12);
        let b = Angle::near(3, 10, -eps);
        assert!((b.abs_sin_half(10) / (5.0 * eps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_matches_float_away_from_pole() {
        for &w in &[0.1, 0.7, 2.0, 3.1] {
            let a = Angle::radians(w);
            for z in 1..5 {
                let expected = (z as f64 * w / 2.0).sin().abs();
                assert!((a.abs_sin_half(z) - expected).abs() < 1e-14);
            }
        }
        let a = Angle::near(1, 4, 0.01);
        let w = a.value();
        assert!((a.abs_sin_half(3) - (1.5 * w).sin().abs()).abs() < 1e-14);
    }

    #[test]
    fn shifts() {
        let a = Angle::near(0, 1, 1e-9);
        assert_eq!(a.abs_shift(0), 1e-9);
        assert!((a.abs_shift(-1) - (2.0 * PI - 1e-9)).abs() < 1e-15);
        let b = a.shift_div(2, 3);
        assert!((b.value() - (1e-9 + 4.0 * PI) / 3.0).abs() < 1e-15);
        let c = Angle::near(1, 3, 0.1).scale(3);
        assert!((c.value() - 0.3).abs() < 1e-15);
    }
}
