//! Exact stationary Gaussian simulation from a spectral density and the
//! Monte Carlo harness for the aggregate-model experiments.
//!
//! Autocovariances come from a dense FFT quadrature of the spectrum whose
//! grid contains every pole; the pole nodes carry the generalized
//! Euler–Maclaurin weight −2ζ(α)h^{1−α}G, G = lim |ω−p|^α f(ω), which
//! restores the accuracy lost to the |ω−p|^{−α} singularity. Samples are
//! drawn by circulant embedding.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::angle::Angle;
use crate::error::{invalid, Error, Result};
use crate::model::{DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig};
use crate::numeric::{lcm, zeta};
use crate::sample::undifference;
use crate::spectra::{SimulationSpectrum, SpectralDensity};
use crate::whittle::{fit, FitOptions, FitResult, ModelFamily};

/// Eigenvalues above −EIGEN_TOL·λ_max are treated as rounding noise.
pub const EIGEN_TOL: f64 = 1e-8;
/// After the largest embedding, negative eigenvalues up to this fraction of
/// λ_max are clamped with a warning; anything larger is an error.
pub const EIGEN_CLAMP_LIMIT: f64 = 1e-3;
/// Largest embedding tried, as a multiple of the sample length.
pub const MAX_EMBEDDING_FACTOR: usize = 16;

/// Generator for replicate `index` of a run seeded with `seed`: one ChaCha8
/// stream per replicate, so results do not depend on scheduling.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// γ(k) = ∫_{−π}^{π} f(ω) cos(kω) dω for k = 0..=n_lags.
pub fn acvf_from_spectrum(f: &dyn SpectralDensity, n_lags: usize, cfg: &SpectrumConfig) -> Result<Vec<f64>> {
    let poles = f.poles();
    if let Some(p) = poles.iter().find(|p| p.exponent >= 1.0) {
        return invalid(format!(
            "spectrum is not integrable: pole of order {} at frequency {}",
            p.exponent,
            p.frequency()
        ));
    }
    // Grid size L: a multiple of every pole denominator, at least grid_size
    // and at least 4 points per lag.
    let base = poles.iter().fold(2i64, |acc, p| lcm(acc, p.den));
    let target = cfg.grid_size.max(4 * (n_lags + 1)).max(8) as i64;
    let mut l = base;
    while l < target {
        l *= 2;
    }
    let l = l as usize;
    let h = 2.0 * PI / l as f64;
    let half = l / 2;

    let idx: Vec<usize> = (0..=half).collect();
    let chunks: Vec<Vec<usize>> = idx.chunks(4096).map(|c| c.to_vec()).collect();
    let values: Vec<Vec<f64>> = crate::par_map(chunks, |chunk| {
        chunk
            .iter()
            .map(|&i| {
                if let Some(p) = poles.iter().find(|p| (i as i64) * p.den == p.num * l as i64) {
                    if p.exponent != 0.0 {
                        return pole_node_value(f, p.num, p.den, p.exponent, h);
                    }
                    // removable singularity: cancelling factors leave a finite limit
                    let side = if 2 * p.num == p.den { -1.0 } else { 1.0 };
                    return f.ln_density_at(Angle::near(p.num, p.den, side * 1e-9)).exp();
                }
                f.ln_density_at(Angle::rational(i as i64, l as i64)).exp()
            })
            .collect()
    });
    let values: Vec<f64> = values.into_iter().flatten().collect();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("spectrum evaluated to {v} on the autocovariance grid")));
    }
    let mut buf: Vec<Complex64> = (0..l)
        .map(|i| {
            let j = if i <= half { i } else { l - i };
            Complex64::new(values[j], 0.0)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(l).process(&mut buf);
    Ok(buf[..=n_lags].iter().map(|c| c.re * h).collect())
}

/// Effective node value at a pole so that h·value = −2ζ(α)h^{1−α}G.
fn pole_node_value(f: &dyn SpectralDensity, num: i64, den: i64, alpha: f64, h: f64) -> f64 {
    let eps = 1e-8;
    // approach from inside [0, π]
    let side = if 2 * num == den { -1.0 } else { 1.0 };
    let g = f.ln_density_at(Angle::near(num, den, side * eps)).exp() * eps.powf(alpha);
    -2.0 * zeta(alpha) * g * h.powf(-alpha)
}

/// Circulant-embedding sampler for a fixed autocovariance sequence.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    n: usize,
    /// √(λ_k / size) for the circulant of size `size`.
    scale: Vec<f64>,
    pub clamped: bool,
}

impl CirculantSampler {
    /// Builds a sampler for series of length `n`. `gamma` must extend to lag
    /// MAX_EMBEDDING_FACTOR·n when the smallest embeddings are not
    /// non-negative definite; shorter inputs limit the extension.
    pub fn new(gamma: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("sample length must be positive");
        }
        if gamma.len() < n {
            return invalid(format!("need autocovariances up to lag {}, got {}", n - 1, gamma.len()));
        }
        let mut planner = FftPlanner::<f64>::new();
        let mut factor = 1;
        loop {
            let m = (factor * n).min(gamma.len() - 1).max(1);
            let size = 2 * m;
            let mut buf: Vec<Complex64> = (0..size)
                .map(|i| Complex64::new(if i <= m { gamma[i] } else { gamma[size - i] }, 0.0))
                .collect();
            planner.plan_fft_forward(size).process(&mut buf);
            let lambda: Vec<f64> = buf.iter().map(|c| c.re).collect();
            let max = lambda.iter().copied().fold(0.0_f64, f64::max);
            let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
            let last = factor >= MAX_EMBEDDING_FACTOR || m == gamma.len() - 1;
            if min >= -EIGEN_TOL * max || last {
                let mut clamped = false;
                if min < -EIGEN_TOL * max {
                    if -min > EIGEN_CLAMP_LIMIT * max {
                        return Err(Error::Simulation(format!(
                            "circulant embedding of size {size} has eigenvalue {min:e} (max {max:e}); the autocovariance is not embeddable"
                        )));
                    }
                    log::warn!("clamping negative circulant eigenvalues (min {min:e}, max {max:e}, size {size})");
                    clamped = true;
                }
                let scale = lambda.iter().map(|&v| (v.max(0.0) / size as f64).sqrt()).collect();
                return Ok(CirculantSampler { n, scale, clamped });
            }
            factor *= 2;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let size = self.scale.len();
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(s * a, s * b)
            })
            .collect();
        FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut buf);
        buf[..self.n].iter().map(|c| c.re).collect()
    }
}

/// One exact Gaussian sample of length `n` with autocovariances `gamma`.
pub fn gaussian_sample(gamma: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = CirculantSampler::new(gamma, n)?;
    Ok(sampler.sample(&mut replicate_rng(seed, 0)))
}

/// Sampler for an arbitrary spectral density.
pub fn sampler_for_spectrum(f: &dyn SpectralDensity, n: usize, cfg: &SpectrumConfig) -> Result<CirculantSampler> {
    let gamma = acvf_from_spectrum(f, MAX_EMBEDDING_FACTOR * n, cfg)?;
    CirculantSampler::new(&gamma, n)
}

/// Monte Carlo configuration for aggregate data generated from the
/// finite-m simulation spectrum.
#[derive(Debug, Clone)]
pub struct McConfig {
    /// True d, D_j, regular AR/MA (φ) and σ².
    pub params: ModelParams,
    pub spec: SeasonalSpec,
    pub m: u32,
    /// True differencing orders; the simulated stationary part is integrated
    /// back with zero initial values.
    pub orders: DiffOrders,
    /// Observations entering the likelihood (excluding burn-in).
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub fit_limiting: bool,
    pub fit_sarfima: bool,
    pub fit: FitOptions,
    pub spectrum: SpectrumConfig,
}

impl McConfig {
    /// Data-generating setup: σ = 2, z = 10, r = R = 0, AR(1) coefficient φ_1.
    pub fn aggregate_experiment(d: f64, big_d: f64, phi1: f64, m: u32, n: usize, replicates: usize, seed: u64) -> Self {
        let spec = SeasonalSpec::new(vec![10], None).expect("valid spec");
        let mut params = ModelParams::long_memory(d, vec![big_d]).with_sigma2(4.0);
        if phi1 != 0.0 {
            params.regular_arma.ar = vec![phi1];
        }
        McConfig {
            params,
            spec,
            m,
            orders: DiffOrders::zero(1),
            n,
            replicates,
            seed,
            fit_limiting: true,
            fit_sarfima: false,
            fit: FitOptions::new(1),
            spectrum: SpectrumConfig::default(),
        }
    }

    pub fn burn_in(&self) -> usize {
        DiffOrders::burn_in(&self.spec, self.fit.max_order)
    }

    pub fn total_length(&self) -> usize {
        self.n + self.burn_in()
    }
}

/// Draws replicate series for a [`McConfig`]; the autocovariance and the
/// circulant embedding are computed once.
pub struct AggregateSimulator {
    cfg: McConfig,
    sampler: CirculantSampler,
}

impl AggregateSimulator {
    pub fn new(cfg: &McConfig) -> Result<Self> {
        let f = SimulationSpectrum::new(cfg.params.clone(), 0, cfg.m, cfg.spec.clone())?;
        let lags = cfg.orders.lags(&cfg.spec);
        let len = cfg.total_length() - lags;
        let sampler = sampler_for_spectrum(&f, len, &cfg.spectrum)?;
        Ok(AggregateSimulator { cfg: cfg.clone(), sampler })
    }

    pub fn spectrum(&self) -> Result<SimulationSpectrum> {
        SimulationSpectrum::new(self.cfg.params.clone(), 0, self.cfg.m, self.cfg.spec.clone())
    }

    /// Replicate `index`: N + burn-in observations.
    pub fn replicate(&self, index: u64) -> Vec<f64> {
        let u = self.sampler.sample(&mut replicate_rng(self.cfg.seed, index));
        let lags = self.cfg.orders.lags(&self.cfg.spec);
        if lags == 0 {
            return u;
        }
        undifference(&u, &vec![0.0; lags], &self.cfg.orders, &self.cfg.spec).expect("initial values sized by lags")
    }
}

/// One series from the simulation spectrum (replicate 0 of `cfg`).
pub fn simulate_aggregate(cfg: &McConfig) -> Result<Vec<f64>> {
    Ok(AggregateSimulator::new(cfg)?.replicate(0))
}

/// Estimates from one replicate and one fitter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFit {
    pub index: usize,
    pub family: ModelFamily,
    pub result: std::result::Result<FitResult, String>,
}

/// Mean and standard deviation of one estimated quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitterSummary {
    pub family: ModelFamily,
    pub successes: usize,
    /// Replicates whose selected differencing orders were all zero.
    pub zero_orders: usize,
    pub rows: Vec<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McTable {
    pub replicates: usize,
    pub fitters: Vec<FitterSummary>,
    pub fits: Vec<ReplicateFit>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Runs the replicate loop: simulate, fit, and tabulate d̂, D̂_j and d̂+ΣD̂.
pub fn monte_carlo_table(cfg: &McConfig) -> Result<McTable> {
    if cfg.replicates == 0 {
        return invalid("replicates must be at least 1");
    }
    crate::model::validate(&cfg.params, &cfg.spec).into_result()?;
    let sim = AggregateSimulator::new(cfg)?;
    let mut families = Vec::new();
    if cfg.fit_limiting {
        families.push(ModelFamily::Limiting);
    }
    if cfg.fit_sarfima {
        families.push(ModelFamily::Sarfima);
    }
    let jobs: Vec<usize> = (0..cfg.replicates).collect();
    let fits: Vec<Vec<ReplicateFit>> = crate::par_map(jobs, |index| {
        let y = sim.replicate(index as u64);
        families
            .iter()
            .map(|&family| {
                let mut opts = cfg.fit.clone();
                opts.family = family;
                let result = fit(&y, &cfg.spec, &opts).map_err(|e| e.to_string());
                if let Err(e) = &result {
                    log::warn!("replicate {index} ({family}) failed: {e}");
                }
                ReplicateFit { index, family, result }
            })
            .collect()
    });
    let fits: Vec<ReplicateFit> = fits.into_iter().flatten().collect();

    let c = cfg.spec.c();
    let mut summaries = Vec::new();
    for &family in &families {
        let ok: Vec<&FitResult> =
            fits.iter().filter(|f| f.family == family).filter_map(|f| f.result.as_ref().ok()).collect();
        let mut rows = Vec::new();
        let (m, s) = mean_sd(&ok.iter().map(|f| f.params.d).collect::<Vec<_>>());
        rows.push(Summary { name: "d".into(), truth: cfg.params.d, mean: m, sd: s });
        for j in 0..c {
            let (m, s) = mean_sd(&ok.iter().map(|f| f.params.seasonal_d[j]).collect::<Vec<_>>());
            rows.push(Summary { name: format!("D.{}", j + 1), truth: cfg.params.seasonal_d[j], mean: m, sd: s });
        }
        let (m, s) = mean_sd(&ok.iter().map(|f| f.params.total_memory()).collect::<Vec<_>>());
        rows.push(Summary { name: "d+sum(D)".into(), truth: cfg.params.total_memory(), mean: m, sd: s });
        summaries.push(FitterSummary {
            family,
            successes: ok.len(),
            zero_orders: ok.iter().filter(|f| f.orders.is_zero()).count(),
            rows,
        });
    }
    Ok(McTable { replicates: cfg.replicates, fitters: summaries, fits })
}
