//! Spectral densities: fine-scale SARFIMA, finite-m aggregates, the limiting
//! aggregate model with its truncated power sum, and the normalization
//! constant.
//!
//! All densities are evaluated in the log domain from an [`Angle`], which
//! keeps pole-adjacent values accurate and avoids overflow in the power sums.

use std::f64::consts::{LN_2, PI};

use crate::angle::Angle;
use crate::error::{invalid, Error, Result};
use crate::model::{ArmaPoly, DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig};
use crate::numeric::quad::{integrate_intervals, QuadOutput, Tolerance};

/// A frequency 2π·num/den in [0, π] where the density behaves like
/// |ω − p|^{−exponent}. Structural locations are listed even when the
/// current exponent is zero, since derivatives of log f remain singular there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub num: i64,
    pub den: i64,
    pub exponent: f64,
}

impl Pole {
    pub fn new(num: i64, den: i64, exponent: f64) -> Self {
        let a = Angle::rational(num, den);
        let (num, den) = a.rational_part();
        Pole { num, den, exponent }
    }

    pub fn frequency(&self) -> f64 {
        2.0 * PI * self.num as f64 / self.den as f64
    }

    pub fn angle(&self) -> Angle {
        Angle::rational(self.num, self.den)
    }

    fn cmp_freq(&self, other: &Pole) -> std::cmp::Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

/// Sorts poles by frequency and merges coincident ones, adding exponents.
pub fn merge_poles(mut poles: Vec<Pole>) -> Vec<Pole> {
    poles.sort_by(|a, b| a.cmp_freq(b));
    let mut out: Vec<Pole> = Vec::with_capacity(poles.len());
    for p in poles {
        match out.last_mut() {
            Some(last) if last.cmp_freq(&p).is_eq() => last.exponent += p.exponent,
            _ => out.push(p),
        }
    }
    out
}

/// A spectral density symmetric in ω on (−π, π].
pub trait SpectralDensity: Sync {
    /// Natural log of the density; +∞ exactly at a pole.
    fn ln_density_at(&self, w: Angle) -> f64;

    /// Pole (and structural singularity) locations in [0, π].
    fn poles(&self) -> Vec<Pole>;

    /// Density at ω ∈ (−π, π], signalling [`Error::Pole`] at a pole.
    fn density(&self, omega: f64) -> Result<f64> {
        check_frequency(omega)?;
        for p in self.poles() {
            if p.exponent > 0.0 && (omega.abs() - p.frequency()).abs() <= 1e-14 {
                return Err(Error::Pole { omega });
            }
        }
        Ok(self.ln_density_at(Angle::radians(omega)).exp())
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if !omega.is_finite() || omega.abs() > PI + 1e-12 {
        return invalid(format!("frequency {omega} outside (-pi, pi]"));
    }
    Ok(())
}

/// |θ(e^{iω})|² / |φ(e^{iω})|².
pub fn arma_transfer(ar: &[f64], ma: &[f64], omega: f64) -> Result<f64> {
    let poly = ArmaPoly::new(ar.to_vec(), ma.to_vec());
    let den = poly.ar_at(omega).norm_sqr();
    if den < 1e-24 {
        return Err(Error::Numeric(format!("AR polynomial vanishes at frequency {omega} (root on the unit circle)")));
    }
    Ok(poly.ma_at(omega).norm_sqr() / den)
}

fn ln_arma(poly: &ArmaPoly, omega: f64) -> f64 {
    if poly.is_empty() {
        return 0.0;
    }
    poly.ma_at(omega).norm_sqr().ln() - poly.ar_at(omega).norm_sqr().ln()
}

/// ln of the truncated power sum Σ_{k=−M}^{M} |ω+2kπ|^{−a} plus, when
/// enabled, the integral tail {2π(a−1)}^{−1}{(2πM−ω)^{1−a} + (2πM+ω)^{1−a}}.
pub fn ln_power_sum(w: Angle, a: f64, cfg: &SpectrumConfig) -> f64 {
    let m = cfg.truncation as i64;
    let omega = w.value();
    let x0 = -a * w.abs_shift(0).ln();
    let mut rest = 0.0;
    for k in 1..=m {
        rest += (-a * w.abs_shift(k).ln() - x0).exp();
        rest += (-a * w.abs_shift(-k).ln() - x0).exp();
    }
    if cfg.tail_correction {
        let big = 2.0 * PI * m as f64;
        let scale = -(2.0 * PI * (a - 1.0)).ln();
        rest += ((1.0 - a) * (big - omega).ln() + scale - x0).exp();
        rest += ((1.0 - a) * (big + omega).ln() + scale - x0).exp();
    }
    x0 + rest.ln_1p()
}

/// The truncated power sum h(ω) with exponent a = 2r + 2d + 2.
pub fn power_sum(omega: f64, r: u32, d: f64, cfg: &SpectrumConfig) -> Result<f64> {
    check_frequency(omega)?;
    if omega == 0.0 {
        return Err(Error::Pole { omega });
    }
    let a = 2.0 * r as f64 + 2.0 * d + 2.0;
    Ok(ln_power_sum(Angle::radians(omega), a, cfg).exp())
}

fn seasonal_poles(spec_periods: &[u64], seasonal_d: &[f64]) -> Vec<Pole> {
    let mut poles = Vec::new();
    for (&z, &dj) in spec_periods.iter().zip(seasonal_d) {
        for k in 1..=(z / 2) {
            poles.push(Pole::new(k as i64, z as i64, 2.0 * dj));
        }
    }
    poles
}

/// Limiting aggregate spectrum σ²·f̃(ω) with the truncated power sum:
/// σ²|sin(ω/2)|^{2r+2} Π|sin(z_jω/2)|^{−2D_j} Π|Θ_j/Φ_j|²(z_jω) h(ω).
#[derive(Debug, Clone)]
pub struct LimitingSpectrum {
    pub params: ModelParams,
    pub r: u32,
    pub spec: SeasonalSpec,
    pub cfg: SpectrumConfig,
}

impl LimitingSpectrum {
    pub fn new(params: ModelParams, r: u32, spec: SeasonalSpec, cfg: SpectrumConfig) -> Result<Self> {
        if params.c() != spec.c() {
            return invalid("parameter and seasonal spec component counts differ");
        }
        cfg.check()?;
        Ok(LimitingSpectrum { params, r, spec, cfg })
    }

    fn exponent_a(&self) -> f64 {
        2.0 * self.r as f64 + 2.0 * self.params.d + 2.0
    }
}

impl SpectralDensity for LimitingSpectrum {
    fn ln_density_at(&self, w: Angle) -> f64 {
        let p = &self.params;
        let mut acc = p.sigma2.ln() + (2.0 * self.r as f64 + 2.0) * w.abs_sin_half(1).ln();
        for (j, &z) in self.spec.z().iter().enumerate() {
            let dj = p.seasonal_d[j];
            if dj != 0.0 {
                acc -= 2.0 * dj * w.abs_sin_half(z as i64).ln();
            }
            acc += ln_arma(&p.seasonal_arma[j], w.scale(z as i64).value());
        }
        acc + ln_power_sum(w, self.exponent_a(), &self.cfg)
    }

    fn poles(&self) -> Vec<Pole> {
        let z: Vec<u64> = self.spec.z().iter().map(|&v| v as u64).collect();
        let mut poles = seasonal_poles(&z, &self.params.seasonal_d);
        poles.push(Pole::new(0, 1, 2.0 * self.params.total_memory()));
        merge_poles(poles)
    }
}

/// Fine-scale SARFIMA spectral density, assembled with explicit pole
/// products over ν_jk = 2πk/s_j.
#[derive(Debug, Clone)]
pub struct SarfimaSpectrum {
    pub params: ModelParams,
    pub periods: Vec<u64>,
}

impl SarfimaSpectrum {
    pub fn new(params: ModelParams, periods: Vec<u64>) -> Result<Self> {
        if params.c() != periods.len() {
            return invalid("parameter and period counts differ");
        }
        if periods.iter().any(|&s| s < 1) {
            return invalid("periods must be positive");
        }
        Ok(SarfimaSpectrum { params, periods })
    }

    /// Fine-scale periods s_j = m·z_j when `m` is set, else the aggregate
    /// periods z_j.
    pub fn for_spec(params: ModelParams, spec: &SeasonalSpec) -> Result<Self> {
        let periods = spec.fine_periods().unwrap_or_else(|| spec.z().iter().map(|&z| z as u64).collect());
        Self::new(params, periods)
    }

    /// Exponent δ_jk of the pole factor at ν_jk.
    pub fn pole_exponent(&self, j: usize, k: u64) -> f64 {
        let s = self.periods[j];
        let dj = self.params.seasonal_d[j];
        if s % 2 == 0 && k == s / 2 {
            dj / 2.0
        } else {
            dj
        }
    }
}

impl SpectralDensity for SarfimaSpectrum {
    fn ln_density_at(&self, w: Angle) -> f64 {
        let p = &self.params;
        let omega = w.value();
        let mut acc = (p.sigma2 / (2.0 * PI)).ln() + ln_arma(&p.regular_arma, omega);
        if p.total_memory() != 0.0 {
            acc -= 2.0 * p.total_memory() * (LN_2 + w.abs_sin_half(1).ln());
        }
        for (j, &s) in self.periods.iter().enumerate() {
            acc += ln_arma(&p.seasonal_arma[j], w.scale(s as i64).value());
            if p.seasonal_d[j] == 0.0 {
                continue;
            }
            for k in 1..=(s / 2) {
                let delta = self.pole_exponent(j, k);
                // |(e^{iν}−e^{iω})(e^{−iν}−e^{iω})| = |2sin((ω−ν)/2)|·|2sin((ω+ν)/2)|
                let lo = w.plus(-(k as i64), s as i64).abs_sin_half(1);
                let hi = w.plus(k as i64, s as i64).abs_sin_half(1);
                acc -= 2.0 * delta * (2.0 * LN_2 + lo.ln() + hi.ln());
            }
        }
        acc
    }

    fn poles(&self) -> Vec<Pole> {
        let mut poles = seasonal_poles(&self.periods, &self.params.seasonal_d);
        poles.push(Pole::new(0, 1, 2.0 * self.params.total_memory()));
        merge_poles(poles)
    }
}

fn summation_range(m: u32, positive: bool) -> (i64, i64) {
    let m = m as i64;
    if m % 2 == 1 {
        let h = (m - 1) / 2;
        (-h, h)
    } else {
        let h = m / 2;
        if positive {
            (-h, h - 1)
        } else {
            (-h + 1, h)
        }
    }
}

/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    fn add(&mut self, x: f64) {
        if x == f64::INFINITY {
            self.max = x;
        } else if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max.is_finite() {
            self.max + self.sum.ln()
        } else {
            self.max
        }
    }
}

/// Spectral density of the differenced m-aggregates of a SARFIMA process
/// whose seasonal periods are s_j = m·z_j.
#[derive(Debug, Clone)]
pub struct AggregateSpectrum {
    pub params: ModelParams,
    pub r: u32,
    pub m: u32,
    pub spec: SeasonalSpec,
}

impl AggregateSpectrum {
    pub fn new(params: ModelParams, r: u32, m: u32, spec: SeasonalSpec) -> Result<Self> {
        if m < 2 {
            return invalid("aggregation size must be at least 2");
        }
        if params.c() != spec.c() {
            return invalid("parameter and seasonal spec component counts differ");
        }
        Ok(AggregateSpectrum { params, r, m, spec })
    }
}

impl SpectralDensity for AggregateSpectrum {
    fn ln_density_at(&self, w: Angle) -> f64 {
        let p = &self.params;
        let a = 2.0 * self.r as f64 + 2.0 * p.d + 2.0;
        let mut acc = -(self.m as f64).ln() + (2.0 * self.r as f64 + 2.0) * (LN_2 + w.abs_sin_half(1).ln());
        for (j, &z) in self.spec.z().iter().enumerate() {
            let dj = p.seasonal_d[j];
            if dj != 0.0 {
                acc -= 2.0 * dj * (LN_2 + w.abs_sin_half(z as i64).ln());
            }
            acc += ln_arma(&p.seasonal_arma[j], w.scale(z as i64).value());
        }
        let (lo, hi) = summation_range(self.m, w.value() > 0.0);
        let ln_g0 = (p.sigma2 / (2.0 * PI)).ln();
        let mut sum = LogSum::new();
        for k in lo..=hi {
            let v = w.shift_div(k, self.m as i64);
            sum.add(-a * (LN_2 + v.abs_sin_half(1).ln()) + ln_g0 + ln_arma(&p.regular_arma, v.value()));
        }
        acc + sum.value()
    }

    fn poles(&self) -> Vec<Pole> {
        let z: Vec<u64> = self.spec.z().iter().map(|&v| v as u64).collect();
        let mut poles = seasonal_poles(&z, &self.params.seasonal_d);
        poles.push(Pole::new(0, 1, 2.0 * self.params.total_memory()));
        merge_poles(poles)
    }
}

/// The aggregate spectrum in the form used to generate Monte Carlo data:
/// σ²|sin(ω/2)|^{2r+2} Π|sin(z_jω/2)|^{−2D_j} Σ_k |2m·sin((ω+2kπ)/2m)|^{−a}
/// g((ω+2kπ)/m), with g = |θ/φ|² of the regular ARMA part and the density
/// extended to ω ≤ 0 by symmetry.
#[derive(Debug, Clone)]
pub struct SimulationSpectrum {
    pub params: ModelParams,
    pub r: u32,
    pub m: u32,
    pub spec: SeasonalSpec,
}

impl SimulationSpectrum {
    pub fn new(params: ModelParams, r: u32, m: u32, spec: SeasonalSpec) -> Result<Self> {
        if m < 2 {
            return invalid("aggregation size must be at least 2");
        }
        if params.c() != spec.c() {
            return invalid("parameter and seasonal spec component counts differ");
        }
        Ok(SimulationSpectrum { params, r, m, spec })
    }
}

impl SpectralDensity for SimulationSpectrum {
    fn ln_density_at(&self, w: Angle) -> f64 {
        let w = if w.value() > 0.0 { w } else { w.negate() };
        let p = &self.params;
        let a = 2.0 * self.r as f64 + 2.0 * p.d + 2.0;
        let mut acc = p.sigma2.ln() + (2.0 * self.r as f64 + 2.0) * w.abs_sin_half(1).ln();
        for (j, &z) in self.spec.z().iter().enumerate() {
            let dj = p.seasonal_d[j];
            if dj != 0.0 {
                acc -= 2.0 * dj * w.abs_sin_half(z as i64).ln();
            }
            acc += ln_arma(&p.seasonal_arma[j], w.scale(z as i64).value());
        }
        let (lo, hi) = summation_range(self.m, true);
        let two_m = 2.0 * self.m as f64;
        let mut sum = LogSum::new();
        for k in lo..=hi {
            let v = w.shift_div(k, self.m as i64);
            sum.add(-a * (two_m * v.abs_sin_half(1)).ln() + ln_arma(&p.regular_arma, v.value()));
        }
        acc + sum.value()
    }

    fn poles(&self) -> Vec<Pole> {
        let z: Vec<u64> = self.spec.z().iter().map(|&v| v as u64).collect();
        let mut poles = seasonal_poles(&z, &self.params.seasonal_d);
        poles.push(Pole::new(0, 1, 2.0 * self.params.total_memory()));
        merge_poles(poles)
    }
}

/// Which density [`evaluate`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    FineSarfima,
    AggregateFinite(u32),
    LimitingAggregate,
}

/// Builds the density of the requested kind.
pub fn build(
    kind: SpectrumKind,
    params: &ModelParams,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    cfg: &SpectrumConfig,
) -> Result<Box<dyn SpectralDensity>> {
    Ok(match kind {
        SpectrumKind::FineSarfima => Box::new(SarfimaSpectrum::for_spec(params.clone(), spec)?),
        SpectrumKind::AggregateFinite(m) => Box::new(AggregateSpectrum::new(params.clone(), orders.r, m, spec.clone())?),
        SpectrumKind::LimitingAggregate => {
            Box::new(LimitingSpectrum::new(params.clone(), orders.r, spec.clone(), cfg.clone())?)
        }
    })
}

/// Fine-scale SARFIMA density h(ω).
pub fn sarfima_spectrum(params: &ModelParams, spec: &SeasonalSpec, omega: f64) -> Result<f64> {
    SarfimaSpectrum::for_spec(params.clone(), spec)?.density(omega)
}

/// Limiting unnormalized density f̃(ω) (σ² not applied).
pub fn limiting_spectrum_unnorm(
    params: &ModelParams,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    omega: f64,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    let p = params.clone().with_sigma2(1.0);
    LimitingSpectrum::new(p, orders.r, spec.clone(), cfg.clone())?.density(omega)
}

/// Density of the differenced m-aggregates.
pub fn aggregate_spectrum(
    params: &ModelParams,
    orders: &DiffOrders,
    m: u32,
    spec: &SeasonalSpec,
    omega: f64,
) -> Result<f64> {
    AggregateSpectrum::new(params.clone(), orders.r, m, spec.clone())?.density(omega)
}

/// Integrates `f(ω, out)` over [0, π] with panels split at every pole.
///
/// Each panel between consecutive breakpoints is halved; each half is graded
/// towards its pole endpoint by x = L·t^q with q = max(2, 2/(1−α)), so that
/// |x|^{−α} and logarithmic singularities become smooth in t.
pub fn integrate_half_band<F>(poles: &[Pole], dim: usize, mut f: F, rel_tol: f64, max_pieces: usize) -> QuadOutput
where
    F: FnMut(Angle, &mut [f64]),
{
    let mut breaks: Vec<Pole> = poles.to_vec();
    breaks.push(Pole::new(0, 1, 0.0));
    breaks.push(Pole::new(1, 2, 0.0));
    let mut breaks = merge_poles(breaks);
    breaks.retain(|p| p.num * 2 <= p.den && p.num >= 0);
    let is_pole = |p: &Pole| poles.iter().any(|q| q.cmp_freq(p).is_eq());

    struct Half {
        anchor: Pole,
        dir: f64,
        len: f64,
        q: f64,
    }
    let mut halves = Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = 0.5 * (b.frequency() - a.frequency());
        for (anchor, dir) in [(a, 1.0), (b, -1.0)] {
            let q = if is_pole(&anchor) {
                if anchor.exponent > 0.0 && anchor.exponent < 1.0 {
                    (2.0 / (1.0 - anchor.exponent)).max(2.0)
                } else {
                    2.0
                }
            } else {
                1.0
            };
            halves.push(Half { anchor, dir, len, q });
        }
    }
    let intervals = vec![(0.0, 1.0); halves.len()];
    integrate_intervals(
        &intervals,
        dim,
        |seg, t, out| {
            let h = &halves[seg];
            let x = h.len * t.powf(h.q);
            let jac = h.len * h.q * t.powf(h.q - 1.0);
            if jac == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            f(Angle::near(h.anchor.num, h.anchor.den, h.dir * x), out);
            out.iter_mut().for_each(|o| *o *= jac);
        },
        Tolerance::relative(rel_tol),
        max_pieces,
    )
}

/// ∫_{−π}^{π} of a density, using symmetry.
pub fn integrate_density(f: &dyn SpectralDensity, rel_tol: f64) -> Result<f64> {
    let poles = f.poles();
    if let Some(p) = poles.iter().find(|p| p.exponent >= 1.0) {
        return invalid(format!("density is not integrable at frequency {} (order {})", p.frequency(), p.exponent));
    }
    let out = integrate_half_band(&poles, 1, |w, o| o[0] = f.ln_density_at(w).exp(), rel_tol, 20_000);
    if !out.converged || !out.values[0].is_finite() {
        return Err(Error::Numeric(format!(
            "spectral integral did not reach relative tolerance {rel_tol} (estimate {}, error {})",
            out.values[0], out.error
        )));
    }
    Ok(2.0 * out.values[0])
}

/// K = 1 / ∫_{−π}^{π} f̃(ω) dω for the limiting model.
pub fn normalization_constant(
    params: &ModelParams,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    cfg: &SpectrumConfig,
) -> Result<f64> {
    if params.total_memory() >= 0.5 {
        return invalid("normalization requires d + ΣD < 1/2");
    }
    let f = LimitingSpectrum::new(params.clone().with_sigma2(1.0), orders.r, spec.clone(), cfg.clone())?;
    Ok(1.0 / integrate_density(&f, 1e-8)?)
}

/// Precomputed frequency-dependent pieces of the limiting spectrum for a
/// fixed set of frequencies, so repeated evaluations (as in likelihood
/// optimization) only pay for exponentials.
#[derive(Debug, Clone)]
pub struct LimitingKernel {
    z: Vec<u32>,
    trunc: usize,
    tail: bool,
    ln_sin1: Vec<f64>,
    ln_sinz: Vec<f64>,
    zomega: Vec<f64>,
    ln_abs: Vec<f64>,
    ln_tail: Vec<(f64, f64)>,
}

impl LimitingKernel {
    pub fn new(freqs: &[Angle], spec: &SeasonalSpec, cfg: &SpectrumConfig) -> Self {
        let c = spec.c();
        let m = cfg.truncation as i64;
        let width = (2 * m + 1) as usize;
        let mut k = LimitingKernel {
            z: spec.z().to_vec(),
            trunc: m as usize,
            tail: cfg.tail_correction,
            ln_sin1: Vec::with_capacity(freqs.len()),
            ln_sinz: Vec::with_capacity(freqs.len() * c),
            zomega: Vec::with_capacity(freqs.len() * c),
            ln_abs: Vec::with_capacity(freqs.len() * width),
            ln_tail: Vec::with_capacity(freqs.len()),
        };
        let big = 2.0 * PI * m as f64;
        for w in freqs {
            k.ln_sin1.push(w.abs_sin_half(1).ln());
            for &z in spec.z() {
                k.ln_sinz.push(w.abs_sin_half(z as i64).ln());
                k.zomega.push(w.scale(z as i64).value());
            }
            for j in -m..=m {
                k.ln_abs.push(w.abs_shift(j).ln());
            }
            let omega = w.value();
            k.ln_tail.push(((big - omega).ln(), (big + omega).ln()));
        }
        k
    }

    pub fn len(&self) -> usize {
        self.ln_sin1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_sin1.is_empty()
    }

    /// ln f̃ at frequency `i` (σ² excluded).
    pub fn ln_unnorm_at(&self, i: usize, params: &ModelParams, r: u32) -> f64 {
        let c = self.z.len();
        let a = 2.0 * r as f64 + 2.0 * params.d + 2.0;
        let mut acc = (2.0 * r as f64 + 2.0) * self.ln_sin1[i];
        for j in 0..c {
            let dj = params.seasonal_d[j];
            if dj != 0.0 {
                acc -= 2.0 * dj * self.ln_sinz[i * c + j];
            }
            acc += ln_arma(&params.seasonal_arma[j], self.zomega[i * c + j]);
        }
        let width = 2 * self.trunc + 1;
        let row = &self.ln_abs[i * width..(i + 1) * width];
        let x0 = -a * row[self.trunc];
        let mut rest = 0.0;
        for (idx, &l) in row.iter().enumerate() {
            if idx != self.trunc {
                rest += (-a * l - x0).exp();
            }
        }
        if self.tail {
            let scale = -(2.0 * PI * (a - 1.0)).ln();
            let (lm, lp) = self.ln_tail[i];
            rest += ((1.0 - a) * lm + scale - x0).exp();
            rest += ((1.0 - a) * lp + scale - x0).exp();
        }
        acc + x0 + rest.ln_1p()
    }

    pub fn ln_unnorm(&self, params: &ModelParams, r: u32, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.ln_unnorm_at(i, params, r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cfg() -> SpectrumConfig {
        SpectrumConfig::default()
    }

    #[test]
    fn arma_transfer_cases() {
        assert_eq!(arma_transfer(&[], &[], 1.3).unwrap(), 1.0);
        assert!((arma_transfer(&[0.5], &[], 0.0).unwrap() - 4.0).abs() < 1e-14);
        let w = PI / 3.0;
        let phi = Complex64::new(1.0, 0.0) - 0.9 * Complex64::from_polar(1.0, w);
        let expected = 1.0 / phi.norm_sqr();
        assert!((arma_transfer(&[0.9], &[], w).unwrap() - expected).abs() < 1e-12);
        assert!(arma_transfer(&[1.0], &[], 0.0).is_err());
    }

    #[test]
    fn white_noise_sarfima_is_flat() {
        let spec = SeasonalSpec::new(vec![], None).unwrap();
        let p = ModelParams::long_memory(0.0, vec![]).with_sigma2(2.0 * PI);
        for &w in &[-3.0, -0.5, 0.1, 1.0, PI] {
            assert!((sarfima_spectrum(&p, &spec, w).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nyquist_pole_exponent_is_halved() {
        let s = SarfimaSpectrum::new(ModelParams::long_memory(0.0, vec![0.2]), vec![4]).unwrap();
        assert_eq!(s.pole_exponent(0, 1), 0.2);
        assert_eq!(s.pole_exponent(0, 2), 0.1);
        let poles = s.poles();
        // the density itself behaves like |ω−π|^{-2·2·0.1} at π
        assert!((poles.last().unwrap().exponent - 0.4).abs() < 1e-15);
    }

    /// Independent assembly of the SARFIMA density using the product
    /// identity Π_k |...|^{-2δ_jk}·|2sin(ω/2)|^{-2ΣD} = |2sin(sω/2)|^{-2D}.
    fn sarfima_oracle(p: &ModelParams, periods: &[u64], w: f64) -> f64 {
        let mut v = p.sigma2 / (2.0 * PI) * arma_transfer(&p.regular_arma.ar, &p.regular_arma.ma, w).unwrap();
        v *= (2.0 * (w / 2.0).sin()).abs().powf(-2.0 * p.d);
        for (j, &s) in periods.iter().enumerate() {
            let sw = s as f64 * w;
            v *= (2.0 * (sw / 2.0).sin()).abs().powf(-2.0 * p.seasonal_d[j]);
            v *= arma_transfer(&p.seasonal_arma[j].ar, &p.seasonal_arma[j].ma, sw).unwrap();
        }
        v
    }

    #[test]
    fn sarfima_matches_product_identity() {
        let mut p = ModelParams::long_memory(0.1, vec![0.2]);
        let spec = SeasonalSpec::new(vec![12], None).unwrap();
        let got = sarfima_spectrum(&p, &spec, 0.3).unwrap();
        assert!((got / sarfima_oracle(&p, &[12], 0.3) - 1.0).abs() < 1e-12);

        p.regular_arma = ArmaPoly::new(vec![0.5], vec![0.3]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![-0.4], vec![]);
        p.sigma2 = 1.7;
        for &w in &[-2.9, -0.01, 0.3, 1.234, 3.0] {
            let got = sarfima_spectrum(&p, &spec, w).unwrap();
            assert!((got / sarfima_oracle(&p, &[12], w) - 1.0).abs() < 1e-11, "w={w}");
        }
        let spec_odd = SeasonalSpec::new(vec![7], None).unwrap();
        let got = sarfima_spectrum(&p, &spec_odd, 2.0).unwrap();
        assert!((got / sarfima_oracle(&p, &[7], 2.0) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn pole_is_signalled() {
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let p = ModelParams::long_memory(0.1, vec![0.2]);
        let err = limiting_spectrum_unnorm(&p, &DiffOrders::zero(1), &spec, 2.0 * PI / 10.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
        assert!(matches!(sarfima_spectrum(&p, &spec, 0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn power_sum_closed_form() {
        let c = SpectrumConfig { truncation: 20_000, ..cfg() };
        assert!((power_sum(PI / 2.0, 0, 0.0, &c).unwrap() - 0.5).abs() < 1e-8);
        assert!((power_sum(PI, 0, 0.0, &c).unwrap() - 0.25).abs() < 1e-8);
    }

    #[test]
    fn power_sum_truncation_rate_without_correction() {
        let d = 0.2;
        let w = 1.0;
        let off = |m: u32| SpectrumConfig { truncation: m, tail_correction: false, ..cfg() };
        let reference = power_sum(w, 0, d, &off(100_000)).unwrap();
        let ms = [4u32, 8, 16, 32, 64];
        let x: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
        let y: Vec<f64> = ms.iter().map(|&m| (reference - power_sum(w, 0, d, &off(m)).unwrap()).abs().ln()).collect();
        let slope = crate::numeric::ols_slope(&x, &y);
        // the uncorrected remainder Σ_{|k|>M} |2πk|^{-a} decays like M^{1-a}
        assert!((slope + (2.0 * d + 1.0)).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn power_sum_truncation_rate_with_correction() {
        for &(r, d) in &[(0u32, 0.0), (0, 0.2), (1, 0.1)] {
            let on = |m: u32| SpectrumConfig { truncation: m, tail_correction: true, ..cfg() };
            let w = 1.0;
            let reference = power_sum(w, r, d, &on(100_000)).unwrap();
            let ms = [4u32, 8, 16, 32, 64];
            let x: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
            let y: Vec<f64> =
                ms.iter().map(|&m| (reference - power_sum(w, r, d, &on(m)).unwrap()).abs().ln()).collect();
            let slope = crate::numeric::ols_slope(&x, &y);
            let target = -(2.0 * r as f64 + 2.0 * d + 2.0);
            assert!((slope - target).abs() < 0.1, "r={r} d={d} slope {slope}");
        }
    }

    #[test]
    fn tail_correction_reduces_error() {
        let exact = 0.25; // Σ|π+2kπ|^{-2} = 1/(4 sin²(π/2))
        for m in [10u32, 50, 200] {
            let on = SpectrumConfig { truncation: m, tail_correction: true, ..cfg() };
            let off = SpectrumConfig { truncation: m, tail_correction: false, ..cfg() };
            let e_on = (power_sum(PI, 0, 0.0, &on).unwrap() - exact).abs();
            let e_off = (power_sum(PI, 0, 0.0, &off).unwrap() - exact).abs();
            assert!(e_on < e_off);
        }
    }

    #[test]
    fn limiting_white_noise_is_quarter() {
        let spec = SeasonalSpec::new(vec![], None).unwrap();
        let p = ModelParams::long_memory(0.0, vec![]);
        let c = SpectrumConfig { truncation: 5000, ..cfg() };
        for &w in &[0.01, 0.5, 2.0, PI] {
            let v = limiting_spectrum_unnorm(&p, &DiffOrders::zero(0), &spec, w, &c).unwrap();
            assert!((v - 0.25).abs() < 1e-8, "w={w} v={v}");
        }
    }

    #[test]
    fn symmetry_and_positivity() {
        let spec = SeasonalSpec::new(vec![10], Some(3)).unwrap();
        let mut p = ModelParams::long_memory(0.2, vec![0.25]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![0.3], vec![0.2]);
        p.regular_arma = ArmaPoly::new(vec![0.5], vec![]);
        let orders = DiffOrders::zero(1);
        for &w in &[0.05, 0.7, 1.9, 3.0] {
            let lim = limiting_spectrum_unnorm(&p, &orders, &spec, w, &cfg()).unwrap();
            assert!(lim > 0.0);
            let lim_neg = limiting_spectrum_unnorm(&p, &orders, &spec, -w, &cfg()).unwrap();
            assert!((lim / lim_neg - 1.0).abs() < 1e-12);
            let s = sarfima_spectrum(&p, &spec, w).unwrap();
            assert!((s / sarfima_spectrum(&p, &spec, -w).unwrap() - 1.0).abs() < 1e-12);
            let agg = aggregate_spectrum(&p, &orders, 4, &spec, w).unwrap();
            assert!((agg / aggregate_spectrum(&p, &orders, 4, &spec, -w).unwrap() - 1.0).abs() < 1e-12);
            let agg3 = aggregate_spectrum(&p, &orders, 3, &spec, w).unwrap();
            assert!((agg3 / aggregate_spectrum(&p, &orders, 3, &spec, -w).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_white_noise_identity() {
        let spec = SeasonalSpec::new(vec![2], None).unwrap();
        let p = ModelParams::long_memory(0.0, vec![0.0]).with_sigma2(1.3);
        for m in [2u32, 3, 6, 7] {
            for &w in &[-2.0, 0.4, PI] {
                let v = aggregate_spectrum(&p, &DiffOrders::zero(1), m, &spec, w).unwrap();
                assert!((v - m as f64 * 1.3 / (2.0 * PI)).abs() < 1e-12, "m={m} w={w} v={v}");
            }
        }
    }

    /// Aggregate AR(1) spectrum from autocovariances: sum the fine-scale
    /// autocovariances over pairs of blocks, then Fourier-sum.
    #[test]
    fn aggregate_matches_autocovariance_oracle() {
        let phi: f64 = 0.5;
        let m = 3i64;
        let w = 0.7;
        let gamma = |h: i64| phi.powi(h.unsigned_abs() as i32) / (1.0 - phi * phi);
        let agg_gamma = |lag: i64| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += gamma(lag * m + j - i);
                }
            }
            s
        };
        let mut oracle = agg_gamma(0);
        for lag in 1..200 {
            oracle += 2.0 * agg_gamma(lag) * (lag as f64 * w).cos();
        }
        oracle /= 2.0 * PI;
        let spec = SeasonalSpec::new(vec![], None).unwrap();
        let mut p = ModelParams::long_memory(0.0, vec![]);
        p.regular_arma.ar = vec![phi];
        let got = aggregate_spectrum(&p, &DiffOrders::zero(0), m as u32, &spec, w).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn simulation_spectrum_is_scaled_aggregate() {
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let mut p = ModelParams::long_memory(-0.1, vec![0.3]).with_sigma2(4.0);
        p.regular_arma.ar = vec![0.5];
        for &(m, r) in &[(60u32, 0u32), (7, 1)] {
            let sim = SimulationSpectrum::new(p.clone(), r, m, spec.clone()).unwrap();
            let agg = AggregateSpectrum::new(p.clone(), r, m, spec.clone()).unwrap();
            let scale = 2.0 * PI * 2f64.powf(2.0 * 0.3 - 2.0 * r as f64 - 2.0)
                * (m as f64).powf(-2.0 * r as f64 + 0.2 - 1.0);
            for &w in &[0.2, 1.1, 2.5, -0.4] {
                let ratio = sim.density(w).unwrap() / (scale * agg.density(w).unwrap());
                assert!((ratio - 1.0).abs() < 1e-10, "m={m} w={w} ratio={ratio}");
            }
        }
    }

    #[test]
    fn aggregate_converges_to_limit() {
        // m^{-2r-2d-1} f_m → 2^{2r+2-2ΣD}·g(0)·f̃ with g(0) = σ²/(2π)
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let p = ModelParams::long_memory(-0.1, vec![0.3]);
        let orders = DiffOrders::zero(1);
        let c = cfg();
        let w = 1.0;
        let lim = limiting_spectrum_unnorm(&p, &orders, &spec, w, &c).unwrap() * 2f64.powf(2.0 - 0.6) / (2.0 * PI);
        let mut prev = f64::INFINITY;
        for m in [60u32, 240, 720] {
            let fm = aggregate_spectrum(&p, &orders, m, &spec, w).unwrap() * (m as f64).powf(-(2.0 * -0.1 + 1.0));
            let rel = (fm / lim - 1.0).abs();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 0.01, "relative error at m=720: {prev}");
    }

    fn loglog_slope(f: &dyn SpectralDensity, centre: Angle, sign: f64) -> f64 {
        let ds = [1e-4, 1e-3, 1e-2];
        let x: Vec<f64> = ds.iter().map(|d: &f64| d.ln()).collect();
        let y: Vec<f64> = ds
            .iter()
            .map(|&d| {
                let (n, den) = centre.rational_part();
                f.ln_density_at(Angle::near(n, den, sign * d))
            })
            .collect();
        crate::numeric::ols_slope(&x, &y)
    }

    #[test]
    fn pole_orders_of_all_spectra() {
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let p = ModelParams::long_memory(0.2, vec![0.25]);
        let lim = LimitingSpectrum::new(p.clone(), 0, spec.clone(), cfg()).unwrap();
        let agg = AggregateSpectrum::new(p.clone(), 0, 60, spec.clone()).unwrap();
        let sim = SimulationSpectrum::new(p.clone(), 0, 60, spec.clone()).unwrap();
        let sar = SarfimaSpectrum::new(p.clone(), vec![10]).unwrap();
        let all: [&dyn SpectralDensity; 4] = [&lim, &agg, &sim, &sar];
        for f in all {
            let s0 = loglog_slope(f, Angle::rational(0, 1), 1.0);
            assert!((s0 + 0.9).abs() < 0.05, "slope at 0: {s0}");
            for sign in [-1.0, 1.0] {
                let s1 = loglog_slope(f, Angle::rational(1, 10), sign);
                assert!((s1 + 0.5).abs() < 0.05, "slope at 2π/10: {s1}");
            }
        }
    }

    #[test]
    fn normalization_of_white_noise() {
        let spec = SeasonalSpec::new(vec![], None).unwrap();
        let p = ModelParams::long_memory(0.0, vec![]);
        let c = SpectrumConfig { truncation: 5000, ..cfg() };
        let k = normalization_constant(&p, &DiffOrders::zero(0), &spec, &c).unwrap();
        assert!((k - 2.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn normalization_integrates_to_one() {
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let mut p = ModelParams::long_memory(0.2, vec![0.25]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![0.4], vec![]);
        let orders = DiffOrders::zero(1);
        let k = normalization_constant(&p, &orders, &spec, &cfg()).unwrap();
        let f = LimitingSpectrum::new(p.clone(), 0, spec.clone(), cfg()).unwrap();
        let total = integrate_density(&f, 1e-10).unwrap();
        assert!((k * total - 1.0).abs() < 1e-7);
    }

    /// Dense trapezoid on [0, π] (10^6 points) with the pole nodes dropped and
    /// the generalized Euler–Maclaurin correction −ζ(α)·C·h^{1−α} added on
    /// each side of every pole, C being the local power-law coefficient.
    #[test]
    fn normalization_matches_dense_trapezoid() {
        use crate::numeric::zeta;
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        let p = ModelParams::long_memory(0.2, vec![0.25]);
        let c = cfg();
        let f = LimitingSpectrum::new(p.clone(), 0, spec.clone(), c.clone()).unwrap();
        let n = 1_000_000i64;
        let h = PI / n as f64;
        let poles: Vec<(i64, Pole)> = f.poles().into_iter().map(|q| (2 * q.num * n / q.den, q)).collect();
        let mut sum = 0.0;
        for i in 0..=n {
            if poles.iter().any(|&(j, _)| j == i) {
                continue;
            }
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += wt * f.ln_density_at(Angle::near(0, 1, i as f64 * h)).exp();
        }
        sum *= h;
        let eps = 1e-9;
        for (j, q) in &poles {
            for side in [-1.0, 1.0] {
                if (*j == 0 && side < 0.0) || (*j == n && side > 0.0) {
                    continue;
                }
                let cst = f.ln_density_at(Angle::near(q.num, q.den, side * eps)).exp() * eps.powf(q.exponent);
                sum -= zeta(q.exponent) * cst * h.powf(1.0 - q.exponent);
            }
        }
        let oracle = 1.0 / (2.0 * sum);
        let k = normalization_constant(&p, &DiffOrders::zero(1), &spec, &c).unwrap();
        assert!((k / oracle - 1.0).abs() < 1e-5, "K={k} oracle={oracle}");
    }

    #[test]
    fn kernel_matches_direct_evaluation() {
        let spec = SeasonalSpec::new(vec![1, 48], None).unwrap();
        let mut p = ModelParams::long_memory(0.15, vec![0.0, 0.12]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![1.1277, -0.261], vec![-1.1788, 0.3593]);
        let freqs: Vec<Angle> = (1..50).map(|j| Angle::rational(j, 101)).collect();
        let kernel = LimitingKernel::new(&freqs, &spec, &cfg());
        let f = LimitingSpectrum::new(p.clone(), 1, spec.clone(), cfg()).unwrap();
        for (i, w) in freqs.iter().enumerate() {
            let direct = f.ln_density_at(*w);
            assert!((kernel.ln_unnorm_at(i, &p, 1) - direct).abs() < 1e-12);
        }
    }
}
