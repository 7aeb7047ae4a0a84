//! Multi-step linear prediction from a fitted spectrum and forecast
//! efficiency curves.
//!
//! The differenced series is demeaned and predicted from its full history
//! (capped at the most recent [`ForecastConfig::cap`] values) with either the
//! Durbin–Levinson or the innovations recursions. Forecast errors are
//! written as combinations of the one-step innovations ε_{n+1..n+h}, which
//! gives exact MSEs after the differencing filter is inverted.

use crate::error::{invalid, Result};
use crate::model::{DiffOrders, SeasonalSpec, SpectrumConfig};
use crate::sample::{difference_filter, seasonal_difference};
use crate::simulate::acvf_from_spectrum;
use crate::spectra::SpectralDensity;
use crate::whittle::FitResult;

/// Default number of most recent differenced observations used.
pub const DEFAULT_CAP: usize = 4096;
/// Longest horizon accepted; error propagation costs O(h³).
pub const MAX_HORIZON: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recursion {
    DurbinLevinson,
    Innovations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub cap: usize,
    pub recursion: Recursion,
    pub spectrum: SpectrumConfig,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig { cap: DEFAULT_CAP, recursion: Recursion::DurbinLevinson, spectrum: SpectrumConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub model: String,
    /// ŷ_{N+1..N+h}.
    pub points: Vec<f64>,
    /// Mean squared error of each point forecast.
    pub mse: Vec<f64>,
}

impl ForecastResult {
    pub fn horizon(&self) -> usize {
        self.points.len()
    }
}

/// Stationary h-step predictions: point forecasts of the demeaned series,
/// innovation variances v_{n..n+h−1}, and ψ[k][i], the weight of ε_{n+i+1}
/// in the (k+1)-step error.
struct Stationary {
    points: Vec<f64>,
    v: Vec<f64>,
    psi: Vec<Vec<f64>>,
}

fn durbin_levinson(x: &[f64], gamma: &[f64], h: usize) -> Result<Stationary> {
    let n = x.len();
    let total = n + h;
    let mut phi: Vec<f64> = Vec::with_capacity(total);
    let mut v = gamma[0];
    let mut v_future = Vec::with_capacity(h);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut z = x.to_vec();
    let mut points = Vec::with_capacity(h);
    for m in 0..total {
        // phi holds φ_{m,1..m}
        if m >= n {
            let pred: f64 = phi.iter().enumerate().map(|(j, &c)| c * z[m - 1 - j]).sum();
            points.push(pred);
            z.push(pred);
            v_future.push(v);
            rows.push(phi[..(m - n).min(phi.len())].to_vec());
        }
        if m + 1 == total {
            break;
        }
        let k = m + 1;
        let acc: f64 = phi.iter().enumerate().map(|(j, &c)| c * gamma[k - 1 - j]).sum();
        let kk = (gamma[k] - acc) / v;
        let prev = phi.clone();
        for j in 0..m {
            phi[j] = prev[j] - kk * prev[m - 1 - j];
        }
        phi.push(kk);
        v *= 1.0 - kk * kk;
        if !(v > 0.0) {
            return invalid(format!("autocovariance is not positive definite at order {k}"));
        }
    }
    let mut psi: Vec<Vec<f64>> = Vec::with_capacity(h);
    for k in 0..h {
        let mut row = vec![0.0; k + 1];
        row[k] = 1.0;
        for (j, &c) in rows[k].iter().enumerate() {
            // e_{k+1} gets φ_{n+k, j+1}·e_{k−j}
            let prev: &Vec<f64> = &psi[k - 1 - j];
            for (i, &p) in prev.iter().enumerate() {
                row[i] += c * p;
            }
        }
        psi.push(row);
    }
    Ok(Stationary { points, v: v_future, psi })
}

fn innovations(x: &[f64], gamma: &[f64], h: usize) -> Result<Stationary> {
    let n = x.len();
    let total = n + h;
    // theta[m][j−1] = θ_{m,j}
    let mut theta: Vec<Vec<f64>> = vec![Vec::new()];
    let mut v = vec![gamma[0]];
    for m in 1..total {
        let mut row = vec![0.0; m];
        for k in 0..m {
            let mut acc = gamma[m - k];
            for j in 0..k {
                acc -= theta[k][k - j - 1] * row[m - j - 1] * v[j];
            }
            row[m - k - 1] = acc / v[k];
        }
        let vm = gamma[0] - (0..m).map(|j| row[m - j - 1].powi(2) * v[j]).sum::<f64>();
        if !(vm > 0.0) {
            return invalid(format!("autocovariance is not positive definite at order {m}"));
        }
        theta.push(row);
        v.push(vm);
    }
    let mut xhat = vec![0.0; n];
    for m in 1..n {
        xhat[m] = (1..=m).map(|j| theta[m][j - 1] * (x[m - j] - xhat[m - j])).sum();
    }
    let mut points = Vec::with_capacity(h);
    let mut psi = Vec::with_capacity(h);
    for k in 1..=h {
        let m = n + k - 1;
        points.push((k..=m).map(|j| theta[m][j - 1] * (x[m - j] - xhat[m - j])).sum());
        let mut row = vec![0.0; k];
        for i in 1..=k {
            row[i - 1] = if i == k { 1.0 } else { theta[m][k - i - 1] };
        }
        psi.push(row);
    }
    Ok(Stationary { points, v: v[n..total].to_vec(), psi })
}

/// Forecasts the original series `y` from a model density of its
/// differenced series (differencing orders `orders`).
pub fn predict_with_spectrum(
    y: &[f64],
    f: &dyn SpectralDensity,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    h: usize,
    cfg: &ForecastConfig,
) -> Result<ForecastResult> {
    if h == 0 {
        return invalid("forecast horizon must be at least 1");
    }
    if h > MAX_HORIZON {
        return invalid(format!("horizon {h} exceeds the limit {MAX_HORIZON}; request at most {MAX_HORIZON} steps"));
    }
    if cfg.cap == 0 {
        return invalid("history cap must be positive");
    }
    let u = seasonal_difference(y, orders, spec)?;
    let u = &u[u.len().saturating_sub(cfg.cap)..];
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let x: Vec<f64> = u.iter().map(|v| v - mean).collect();
    let gamma = acvf_from_spectrum(f, x.len() + h, &cfg.spectrum)?;
    let st = match cfg.recursion {
        Recursion::DurbinLevinson => durbin_levinson(&x, &gamma, h)?,
        Recursion::Innovations => innovations(&x, &gamma, h)?,
    };

    // invert b(B) y = u for both point forecasts and error weights
    let b = difference_filter(orders, spec);
    let mut path = y.to_vec();
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut points = Vec::with_capacity(h);
    let mut mse = Vec::with_capacity(h);
    for k in 0..h {
        let t = y.len() + k;
        let mut value = st.points[k] + mean;
        let mut w = st.psi[k].clone();
        for (l, &bl) in b.iter().enumerate().skip(1) {
            value -= bl * path[t - l];
            if l <= k {
                for (i, &p) in weights[k - l].iter().enumerate() {
                    w[i] -= bl * p;
                }
            }
        }
        path.push(value);
        points.push(value);
        mse.push(w.iter().zip(&st.v).map(|(c, v)| c * c * v).sum());
        weights.push(w);
    }
    let model = match cfg.recursion {
        Recursion::DurbinLevinson => "durbin-levinson",
        Recursion::Innovations => "innovations",
    };
    Ok(ForecastResult { model: format!("{orders} {model}"), points, mse })
}

/// h-step forecasts from a fitted model.
pub fn predict(y: &[f64], fit: &FitResult, h: usize, cfg: &ForecastConfig) -> Result<ForecastResult> {
    let f = fit.spectrum()?;
    let mut out = predict_with_spectrum(y, f.as_ref(), &fit.orders, &fit.spec, h, cfg)?;
    out.model = format!("{} {}", fit.family, out.model);
    Ok(out)
}

/// AR(1) fitted by Yule–Walker on the demeaned series: the short-memory
/// competitor in forecast comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Fit {
    pub mean: f64,
    pub phi: f64,
    pub gamma0: f64,
}

impl Ar1Fit {
    pub fn yule_walker(y: &[f64]) -> Result<Self> {
        if y.len() < 3 {
            return invalid("AR(1) fit needs at least 3 observations");
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let c0 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        if c0 == 0.0 {
            return invalid("constant series");
        }
        let c1 = y.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n;
        Ok(Ar1Fit { mean, phi: c1 / c0, gamma0: c0 })
    }

    pub fn predict(&self, y: &[f64], h: usize) -> ForecastResult {
        let last = y.last().copied().unwrap_or(self.mean) - self.mean;
        let points = (1..=h).map(|k| self.mean + self.phi.powi(k as i32) * last).collect();
        let mse = (1..=h).map(|k| self.gamma0 * (1.0 - self.phi.powi(2 * k as i32))).collect();
        ForecastResult { model: "ar1 yule-walker".into(), points, mse }
    }
}

/// ratio(h) = 100·Σ_{k≤h}|b_k − y_k| / Σ_{k≤h}|a_k − y_k|: above 100 when
/// `a` is the more accurate forecast over the first h steps.
pub fn efficiency_ratio(a: &[f64], b: &[f64], actuals: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() || a.len() != actuals.len() {
        return invalid("forecast and actual sequences must have equal length");
    }
    let mut sa = 0.0;
    let mut sb = 0.0;
    Ok(a.iter()
        .zip(b)
        .zip(actuals)
        .map(|((fa, fb), y)| {
            sa += (fa - y).abs();
            sb += (fb - y).abs();
            100.0 * sb / sa
        })
        .collect())
}
