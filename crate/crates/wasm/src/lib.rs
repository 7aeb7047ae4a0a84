//! WebAssembly bindings for the browser demo: limiting spectra, simulation
//! from the aggregate model, and Whittle fitting of a pasted series.
//!
//! Every function takes plain numbers and returns `Vec<f64>` (a
//! `Float64Array` in JavaScript); failures become JavaScript exceptions.

use lmagg::model::{ModelParams, SeasonalSpec, SpectrumConfig};
use lmagg::sample::periodogram as raw_periodogram;
use lmagg::simulate::{replicate_rng, sampler_for_spectrum};
use lmagg::spectra::{LimitingSpectrum, SimulationSpectrum, SpectralDensity};
use lmagg::whittle::{fit, FitOptions};
use lmagg::Result;
use wasm_bindgen::prelude::*;

fn js(e: lmagg::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn one_season(z: u32) -> Result<SeasonalSpec> {
    SeasonalSpec::new(vec![z], None)
}

fn spectrum_grid(d: f64, big_d: f64, z: u32, truncation: u32, points: usize) -> Result<Vec<f64>> {
    let cfg = SpectrumConfig { truncation: truncation.max(1), ..Default::default() };
    let f = LimitingSpectrum::new(ModelParams::long_memory(d, vec![big_d]), 0, one_season(z)?, cfg)?;
    Ok((1..=points)
        .map(|j| {
            let omega = std::f64::consts::PI * j as f64 / points as f64;
            f.density(omega).unwrap_or(f64::INFINITY)
        })
        .collect())
}

fn simulate_series(d: f64, big_d: f64, z: u32, m: u32, n: usize, seed: u64) -> Result<Vec<f64>> {
    let spec = one_season(z)?;
    let params = ModelParams::long_memory(d, vec![big_d]);
    lmagg::model::validate(&params, &spec).into_result()?;
    let f = SimulationSpectrum::new(params, 0, m, spec)?;
    let cfg = SpectrumConfig { grid_size: 1 << 16, ..Default::default() };
    let sampler = sampler_for_spectrum(&f as &dyn SpectralDensity, n, &cfg)?;
    Ok(sampler.sample(&mut replicate_rng(seed, 0)))
}

fn fit_values(y: &[f64], z: u32, max_order: u32) -> Result<Vec<f64>> {
    let mut opts = FitOptions::new(1);
    opts.max_order = max_order;
    let out = fit(y, &one_season(z)?, &opts)?;
    Ok(vec![
        out.params.d,
        out.params.seasonal_d[0],
        out.sigma2,
        out.orders.r as f64,
        out.orders.seasonal[0] as f64,
        out.aic,
        if out.boundary { 1.0 } else { 0.0 },
    ])
}

/// Limiting spectrum f̃(ω) (σ² = 1) of a (d, D) model with one seasonal
/// period at ω_j = πj/points, j = 1..points. Poles evaluate to +∞.
#[wasm_bindgen]
pub fn limiting_spectrum(d: f64, big_d: f64, z: u32, truncation: u32, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    spectrum_grid(d, big_d, z, truncation, points).map_err(js)
}

/// n aggregates of m-blocks drawn from the finite-m simulation spectrum
/// with σ² = 1.
#[wasm_bindgen]
pub fn simulate(d: f64, big_d: f64, z: u32, m: u32, n: usize, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    simulate_series(d, big_d, z, m, n, seed).map_err(js)
}

/// Periodogram ordinates of `y` at ω_j = 2πj/N, j = 1..⌊(N−1)/2⌋.
#[wasm_bindgen]
pub fn periodogram(y: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
    Ok(raw_periodogram(y).map_err(js)?.ordinates)
}

/// Fits the limiting (d, D) model with differencing orders up to
/// `max_order`. Returns [d, D, σ², r, R, AIC, boundary (0/1)].
#[wasm_bindgen]
pub fn fit_series(y: &[f64], z: u32, max_order: u32) -> std::result::Result<Vec<f64>, JsError> {
    fit_values(y, z, max_order).map_err(js)
}
