//! Asymptotic uncertainty for Whittle estimates: the Fisher information
//! integral Γ(θ) = (1/4π)∫ ∇log f ∇log fᵀ dω over θ = (ξ, σ²), normal
//! intervals, and a frequency-domain parametric bootstrap.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::angle::Angle;
use crate::error::{invalid, Error, Result};
use crate::model::{DiffOrders, ModelParams, SeasonalSpec};
use crate::numeric::{normal_quantile, quantile_sorted};
use crate::sample::Periodogram;
use crate::simulate::replicate_rng;
use crate::spectra::{integrate_half_band, LimitingSpectrum, Pole, SarfimaSpectrum, SpectralDensity};
use crate::whittle::{FitOptions, FitResult, ModelFamily, WhittleProblem};

/// Relative finite-difference step for ∂log f.
pub const FD_STEP: f64 = 1e-5;
/// Eigenvalues below this fraction of the largest mark a null direction.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Largest tolerated fraction of failed bootstrap refits.
pub const MAX_BOOTSTRAP_FAILURES: f64 = 0.2;

/// Symmetric information matrix with named coordinates: the estimated ξ
/// coordinates in fit order, then `sigma2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl InformationMatrix {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Γ⁻¹, or [`Error::Singular`] with an orthonormal basis of the null space.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let max = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        let null_space: Vec<Vec<f64>> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= SINGULAR_TOL * max)
            .map(|(i, _)| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        if max == 0.0 || !null_space.is_empty() {
            let null_space = if max == 0.0 {
                (0..self.dim()).map(|i| (0..self.dim()).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
            } else {
                null_space
            };
            return Err(Error::Singular { null_space });
        }
        let inv_vals = eig.eigenvalues.map(|v| 1.0 / v);
        Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose())
    }

    /// Asymptotic covariance Γ⁻¹/N of the estimates from N observations.
    pub fn covariance(&self, n: usize) -> Result<Covariance> {
        Ok(Covariance { names: self.names.clone(), matrix: self.inverse()? / n as f64 })
    }

    /// Γ with coordinates reordered as `perm` (new index i takes old `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> InformationMatrix {
        let k = perm.len();
        InformationMatrix {
            names: perm.iter().map(|&i| self.names[i].clone()).collect(),
            matrix: DMatrix::from_fn(k, k, |i, j| self.matrix[(perm[i], perm[j])]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl Covariance {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn standard_error(&self, i: usize) -> f64 {
        self.matrix[(i, i)].max(0.0).sqrt()
    }

    /// Standard error of Σ w_i θ_i.
    pub fn linear_se(&self, weights: &[f64]) -> f64 {
        let w = nalgebra::DVector::from_column_slice(weights);
        (w.transpose() * &self.matrix * &w)[(0, 0)].max(0.0).sqrt()
    }
}

/// Central difference of `g` in coordinate `i` refined by one Richardson
/// step: (4D(h/2) − D(h))/3 with h = FD_STEP·max(|θ_i|, 1).
pub fn richardson_derivative<G: FnMut(&[f64]) -> f64>(g: &mut G, theta: &[f64], i: usize) -> f64 {
    let h = FD_STEP * theta[i].abs().max(1.0);
    let mut x = theta.to_vec();
    let mut central = |step: f64| {
        x[i] = theta[i] + step;
        let up = g(&x);
        x[i] = theta[i] - step;
        let down = g(&x);
        x[i] = theta[i];
        (up - down) / (2.0 * step)
    };
    let d1 = central(h);
    let d2 = central(0.5 * h);
    (4.0 * d2 - d1) / 3.0
}

/// Γ = (1/4π)∫_{−π}^{π} ∇ℓ ∇ℓᵀ dω for a symmetric log-density ℓ whose
/// gradient is supplied by `grad`. Poles of the density guide the
/// quadrature breakpoints.
pub fn information_from_gradient<G>(names: Vec<String>, poles: &[Pole], grad: G, rel_tol: f64) -> Result<InformationMatrix>
where
    G: Fn(Angle, &mut [f64]),
{
    let k = names.len();
    let mut g = vec![0.0; k];
    let out = integrate_half_band(
        poles,
        k * k,
        |w, o| {
            grad(w, &mut g);
            for i in 0..k {
                for j in 0..k {
                    o[i * k + j] = g[i] * g[j];
                }
            }
        },
        rel_tol,
        20_000,
    );
    if !out.converged || out.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "information integral did not reach relative tolerance {rel_tol} (error {})",
            out.error
        )));
    }
    // symmetric integrand: (1/4π)·2∫_0^π
    let mut matrix = DMatrix::from_fn(k, k, |i, j| out.values[i * k + j] / (2.0 * PI));
    matrix = 0.5 * (&matrix + matrix.transpose());
    Ok(InformationMatrix { names, matrix })
}

fn model_density(
    family: ModelFamily,
    params: &ModelParams,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    opts: &FitOptions,
) -> Result<Box<dyn SpectralDensity>> {
    Ok(match family {
        ModelFamily::Limiting => {
            Box::new(LimitingSpectrum::new(params.clone(), orders.r, spec.clone(), opts.spectrum.clone())?)
        }
        ModelFamily::Sarfima => {
            Box::new(SarfimaSpectrum::new(params.clone(), spec.z().iter().map(|&z| z as u64).collect())?)
        }
    })
}

/// Fisher information of the Whittle likelihood at θ = (ξ, σ²) for the
/// model family, layout and spectrum settings in `opts`. Gradients in ξ
/// are finite differences of log f; ∂log f/∂σ² = 1/σ² exactly.
pub fn fisher_information(
    params: &ModelParams,
    orders: &DiffOrders,
    spec: &SeasonalSpec,
    opts: &FitOptions,
) -> Result<InformationMatrix> {
    if !(params.sigma2 > 0.0) {
        return invalid("σ² must be positive");
    }
    if params.total_memory() >= 0.5 || params.d <= -0.5 {
        return invalid("parameters must be interior: −1/2 < d and d + ΣD < 1/2");
    }
    let layout = &opts.layout;
    let theta = layout.pack(params, spec);
    let mut names = layout.names(spec);
    names.push("sigma2".into());
    let base = model_density(opts.family, params, orders, spec, opts)?;
    let poles = base.poles();
    let inv_s2 = 1.0 / params.sigma2;
    let k = theta.len();
    information_from_gradient(
        names,
        &poles,
        |w, g| {
            let mut ln_f = |x: &[f64]| {
                let p = layout.unpack(x, params, spec);
                model_density(opts.family, &p, orders, spec, opts).map_or(f64::NAN, |f| f.ln_density_at(w))
            };
            for (i, gi) in g.iter_mut().take(k).enumerate() {
                *gi = richardson_derivative(&mut ln_f, &theta, i);
            }
            g[k] = inv_s2;
        },
        1e-8,
    )
}

/// Fisher information at a fitted model.
pub fn fisher_for_fit(fit: &FitResult) -> Result<InformationMatrix> {
    fisher_information(&fit.params, &fit.orders, &fit.spec, &fit_options(fit))
}

/// Options that reproduce the settings of a fit.
pub fn fit_options(fit: &FitResult) -> FitOptions {
    let mut opts = FitOptions::new(fit.spec.c());
    opts.family = fit.family;
    opts.layout = fit.layout.clone();
    opts.spectrum = fit.spectrum.clone();
    opts
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    /// Zero standard error: the interval collapses to a point.
    pub degenerate: bool,
}

/// estimate ± z_{(1+level)/2}·se.
pub fn normal_interval(name: &str, estimate: f64, se: f64, level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} must lie in (0, 1)"));
    }
    if !(se >= 0.0) {
        return invalid(format!("standard error {se} must be non-negative"));
    }
    let z = normal_quantile(0.5 + 0.5 * level);
    Ok(Interval {
        name: name.to_string(),
        estimate,
        se,
        lower: estimate - z * se,
        upper: estimate + z * se,
        degenerate: se == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub level: f64,
    pub n: usize,
    pub intervals: Vec<Interval>,
    pub information: InformationMatrix,
    pub warnings: Vec<String>,
}

/// Asymptotic normal intervals for every estimated coordinate, the total
/// memory d + ΣD_j, σ² and σ (delta method).
pub fn asymptotic_intervals(fit: &FitResult, level: f64) -> Result<IntervalReport> {
    let info = fisher_for_fit(fit)?;
    let cov = info.covariance(fit.n_used)?;
    let mut estimates = fit.estimates();
    estimates.push(fit.sigma2);
    let mut intervals = Vec::new();
    for (i, name) in info.names.iter().enumerate() {
        intervals.push(normal_interval(name, estimates[i], cov.standard_error(i), level)?);
    }
    let free = fit.layout.free_seasonal(&fit.spec);
    if !free.is_empty() {
        let mut w = vec![0.0; info.dim()];
        for i in 0..=free.len() {
            w[i] = 1.0;
        }
        intervals.push(normal_interval("d+sum(D)", fit.params.total_memory(), cov.linear_se(&w), level)?);
    }
    let sigma = fit.sigma2.sqrt();
    let s2 = info.dim() - 1;
    intervals.push(normal_interval("sigma", sigma, cov.standard_error(s2) / (2.0 * sigma), level)?);
    let mut warnings = Vec::new();
    if fit.boundary {
        warnings.push("estimate is on the boundary of the parameter space; normal intervals are not valid".into());
    }
    if intervals.iter().any(|iv| iv.degenerate) {
        warnings.push("some intervals are degenerate (zero variance direction)".into());
    }
    Ok(IntervalReport { level, n: fit.n_used, intervals, information: info, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub names: Vec<String>,
    pub level: f64,
    /// One row per successful replicate, columns as `names`.
    pub draws: Vec<Vec<f64>>,
    pub failures: usize,
    /// Percentile intervals (estimate = bootstrap mean, se = bootstrap SD).
    pub intervals: Vec<Interval>,
}

/// Frequency-domain parametric bootstrap: ordinates I*_j = f̂(ω_j)·E_j with
/// E_j i.i.d. standard exponential replace the periodogram of the selected
/// differencing cell, and ξ is re-estimated from the fitted values.
pub fn parametric_bootstrap(fit: &FitResult, y: &[f64], replicates: usize, seed: u64, level: f64) -> Result<BootstrapResult> {
    if replicates < 50 {
        return invalid(format!("bootstrap needs at least 50 replicates, got {replicates}"));
    }
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} must lie in (0, 1)"));
    }
    let mut opts = fit_options(fit);
    opts.starts = 1;
    let problem = WhittleProblem::from_series(y, &fit.orders, &fit.spec, fit.burn_in, &opts)?;
    let t = problem.t();
    let mut ln_g = vec![0.0; t];
    problem.ln_gtilde(&fit.params, &mut ln_g);
    let fhat: Vec<f64> = ln_g.iter().map(|l| fit.sigma2 * l.exp()).collect();
    let base = &problem.periodogram;

    let mut names = fit.names();
    let free = fit.layout.free_seasonal(&fit.spec).len();
    if free > 0 {
        names.push("d+sum(D)".into());
    }
    names.push("sigma2".into());

    let jobs: Vec<usize> = (0..replicates).collect();
    let draws: Vec<Option<Vec<f64>>> = crate::par_map(jobs, |b| {
        use rand::Rng;
        let mut rng = replicate_rng(seed, b as u64);
        let ordinates: Vec<f64> =
            fhat.iter().map(|f| f * rng.sample::<f64, _>(rand_distr::Exp1)).collect();
        let pg = Periodogram { n: base.n, freqs: base.freqs.clone(), ordinates };
        let prob = WhittleProblem::from_periodogram(pg, &fit.orders, &fit.spec, &opts).ok()?;
        let cell = prob.optimize(&opts, Some(&fit.params));
        let opt = cell.result.ok()?;
        let mut row = fit.layout.pack(&opt.params, &fit.spec);
        if free > 0 {
            row.push(opt.params.total_memory());
        }
        row.push(opt.params.sigma2);
        Some(row)
    });
    let failures = draws.iter().filter(|d| d.is_none()).count();
    if failures as f64 > MAX_BOOTSTRAP_FAILURES * replicates as f64 {
        return Err(Error::NonConvergence(format!("{failures} of {replicates} bootstrap refits failed")));
    }
    let draws: Vec<Vec<f64>> = draws.into_iter().flatten().collect();
    let alpha = 0.5 * (1.0 - level);
    let intervals = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut col: Vec<f64> = draws.iter().map(|r| r[i]).collect();
            col.sort_by(f64::total_cmp);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
            Interval {
                name: name.clone(),
                estimate: mean,
                se: sd,
                lower: quantile_sorted(&col, alpha),
                upper: quantile_sorted(&col, 1.0 - alpha),
                degenerate: sd == 0.0,
            }
        })
        .collect();
    Ok(BootstrapResult { names, level, draws, failures, intervals })
}
