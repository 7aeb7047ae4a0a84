//! Differencing of observed series and the raw periodogram at Fourier
//! frequencies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::angle::Angle;
use crate::error::{invalid, Result};
use crate::model::{DiffOrders, SeasonalSpec};

/// An ordered sequence of real observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Self {
        Series { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len().max(1) as f64
    }

    pub fn scaled(&self, alpha: f64) -> Series {
        Series::new(self.values.iter().map(|v| alpha * v).collect())
    }
}

impl From<Vec<f64>> for Series {
    fn from(values: Vec<f64>) -> Self {
        Series::new(values)
    }
}

fn lag_difference(y: &[f64], lag: usize) -> Vec<f64> {
    (lag..y.len()).map(|t| y[t] - y[t - lag]).collect()
}

/// Applies ∇ r times, then ∇_{z_i} R_i times for each component in order.
/// The output is shorter than the input by r + Σ z_i·R_i.
pub fn seasonal_difference(y: &[f64], orders: &DiffOrders, spec: &SeasonalSpec) -> Result<Vec<f64>> {
    if orders.seasonal.len() != spec.c() {
        return invalid("differencing orders do not match the number of seasonal components");
    }
    let lags = orders.lags(spec);
    if y.len() <= lags {
        return invalid(format!("series of length {} is too short for {} differencing lags", y.len(), lags));
    }
    let mut u = y.to_vec();
    for _ in 0..orders.r {
        u = lag_difference(&u, 1);
    }
    for (&z, &rr) in spec.z().iter().zip(&orders.seasonal) {
        for _ in 0..rr {
            u = lag_difference(&u, z as usize);
        }
    }
    Ok(u)
}

/// Coefficients b_0..b_L of (1−B)^r Π(1−B^{z_i})^{R_i}.
pub fn difference_filter(orders: &DiffOrders, spec: &SeasonalSpec) -> Vec<f64> {
    let mut b = vec![1.0];
    let mut apply = |lag: usize| {
        let mut next = vec![0.0; b.len() + lag];
        for (i, &v) in b.iter().enumerate() {
            next[i] += v;
            next[i + lag] -= v;
        }
        b = next;
    };
    for _ in 0..orders.r {
        apply(1);
    }
    for (&z, &rr) in spec.z().iter().zip(&orders.seasonal) {
        for _ in 0..rr {
            apply(z as usize);
        }
    }
    b
}

/// Inverts [`seasonal_difference`]: given the differenced series `u` and the
/// first L = r + Σ z_i·R_i original values, rebuilds the original series.
pub fn undifference(u: &[f64], initial: &[f64], orders: &DiffOrders, spec: &SeasonalSpec) -> Result<Vec<f64>> {
    let b = difference_filter(orders, spec);
    let lags = b.len() - 1;
    if initial.len() != lags {
        return invalid(format!("undifferencing needs {} initial values, got {}", lags, initial.len()));
    }
    let mut y = Vec::with_capacity(lags + u.len());
    y.extend_from_slice(initial);
    for (t, &ut) in u.iter().enumerate() {
        let idx = lags + t;
        let mut v = ut;
        for (l, &bl) in b.iter().enumerate().skip(1) {
            v -= bl * y[idx - l];
        }
        y.push(v);
    }
    Ok(y)
}

/// Subtracts the sample mean.
pub fn demean(y: &[f64]) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
    y.iter().map(|v| v - mean).collect()
}

/// Periodogram ordinates I(ω_j) = |Σ_t u_t e^{itω_j}|²/(2πN) at ω_j = 2πj/N,
/// j = 1..T with T = ⌊(N−1)/2⌋.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub n: usize,
    pub freqs: Vec<f64>,
    pub ordinates: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// The Fourier frequencies as exact angles 2πj/N.
    pub fn angles(&self) -> Vec<Angle> {
        (1..=self.len()).map(|j| Angle::rational(j as i64, self.n as i64)).collect()
    }
}

/// |DFT_j|²/(2πN) for every j = 0..N−1.
pub fn transform_power(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if n > 0 {
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    }
    let scale = 1.0 / (2.0 * PI * n as f64);
    buf.iter().map(|c| c.norm_sqr() * scale).collect()
}

pub fn periodogram(u: &[f64]) -> Result<Periodogram> {
    let n = u.len();
    if n < 3 {
        return invalid(format!("periodogram needs at least 3 observations, got {n}"));
    }
    let t = (n - 1) / 2;
    let power = transform_power(u);
    Ok(Periodogram {
        n,
        freqs: (1..=t).map(|j| 2.0 * PI * j as f64 / n as f64).collect(),
        ordinates: power[1..=t].to_vec(),
    })
}
