//! Spectral (Whittle) maximum likelihood for the limiting aggregate model,
//! with the integer differencing orders chosen by grid search.
//!
//! Within a differencing cell the fractional orders are mapped to an open box
//! (S = d + ΣD_j = ½·logistic(u_S), D_j = ½·logistic(u_j), d = S − ΣD_j) and
//! ARMA polynomials are parameterized through partial autocorrelations, so
//! the simplex search runs unconstrained.

use std::fmt;

use crate::angle::Angle;
use crate::error::{invalid, Error, Result};
use crate::model::{ArmaPoly, DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::sample::{periodogram, seasonal_difference, Periodogram};
use crate::spectra::{LimitingKernel, LimitingSpectrum, SarfimaSpectrum, SpectralDensity};

/// Distance from a constraint boundary below which an optimum is flagged.
pub const BOUNDARY_TOL: f64 = 1e-4;

/// Spectral model fitted to the differenced series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    /// σ²·f̃ with the truncated power sum.
    Limiting,
    /// SARFIMA density with the aggregate-scale periods z_j (σ² is then the
    /// innovation variance, including the 1/(2π) factor).
    Sarfima,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFamily::Limiting => write!(f, "limiting"),
            ModelFamily::Sarfima => write!(f, "sarfima"),
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limiting" => Ok(ModelFamily::Limiting),
            "sarfima" => Ok(ModelFamily::Sarfima),
            other => invalid(format!("unknown model family {other:?} (expected limiting or sarfima)")),
        }
    }
}

/// Orders of the estimated seasonal AR/MA polynomials, per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub ar_orders: Vec<usize>,
    pub ma_orders: Vec<usize>,
}

impl ParamLayout {
    pub fn fractional_only(c: usize) -> Self {
        ParamLayout { ar_orders: vec![0; c], ma_orders: vec![0; c] }
    }

    fn check(&self, spec: &SeasonalSpec) -> Result<()> {
        if self.ar_orders.len() != spec.c() || self.ma_orders.len() != spec.c() {
            return invalid("ARMA order vectors must have one entry per seasonal component");
        }
        Ok(())
    }

    /// Indices of components whose D_j is estimated (z_j ≠ 1).
    pub fn free_seasonal(&self, spec: &SeasonalSpec) -> Vec<usize> {
        (0..spec.c()).filter(|&j| !spec.unit_period(j)).collect()
    }

    /// Names of the estimated coordinates of ξ, in the fixed order
    /// d, D.j (free j), ar.j.k, ma.j.k.
    pub fn names(&self, spec: &SeasonalSpec) -> Vec<String> {
        let mut names = vec!["d".to_string()];
        for j in self.free_seasonal(spec) {
            names.push(format!("D.{}", j + 1));
        }
        for (j, &p) in self.ar_orders.iter().enumerate() {
            for k in 0..p {
                names.push(format!("ar.{}.{}", j + 1, k + 1));
            }
        }
        for (j, &q) in self.ma_orders.iter().enumerate() {
            for k in 0..q {
                names.push(format!("ma.{}.{}", j + 1, k + 1));
            }
        }
        names
    }

    pub fn dim(&self, spec: &SeasonalSpec) -> usize {
        1 + self.free_seasonal(spec).len()
            + self.ar_orders.iter().sum::<usize>()
            + self.ma_orders.iter().sum::<usize>()
    }

    /// Estimated coordinates of ξ in [`ParamLayout::names`] order.
    pub fn pack(&self, params: &ModelParams, spec: &SeasonalSpec) -> Vec<f64> {
        let mut v = vec![params.d];
        for j in self.free_seasonal(spec) {
            v.push(params.seasonal_d[j]);
        }
        for (j, &p) in self.ar_orders.iter().enumerate() {
            v.extend((0..p).map(|k| params.seasonal_arma[j].ar.get(k).copied().unwrap_or(0.0)));
        }
        for (j, &q) in self.ma_orders.iter().enumerate() {
            v.extend((0..q).map(|k| params.seasonal_arma[j].ma.get(k).copied().unwrap_or(0.0)));
        }
        v
    }

    /// Inverse of [`ParamLayout::pack`]; σ² and regular ARMA are taken from `base`.
    pub fn unpack(&self, values: &[f64], base: &ModelParams, spec: &SeasonalSpec) -> ModelParams {
        let c = spec.c();
        let mut p = base.clone();
        p.seasonal_d = vec![0.0; c];
        p.seasonal_arma = vec![ArmaPoly::default(); c];
        let mut it = values.iter().copied();
        p.d = it.next().unwrap_or(0.0);
        for j in self.free_seasonal(spec) {
            p.seasonal_d[j] = it.next().unwrap_or(0.0);
        }
        for (j, &o) in self.ar_orders.iter().enumerate() {
            p.seasonal_arma[j].ar = (0..o).map(|_| it.next().unwrap_or(0.0)).collect();
        }
        for (j, &o) in self.ma_orders.iter().enumerate() {
            p.seasonal_arma[j].ma = (0..o).map(|_| it.next().unwrap_or(0.0)).collect();
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub family: ModelFamily,
    pub layout: ParamLayout,
    pub spectrum: SpectrumConfig,
    /// Common upper bound K of r and the R_j.
    pub max_order: u32,
    pub starts: usize,
    pub max_evaluations: usize,
    pub rel_tol: f64,
}

impl FitOptions {
    pub fn new(c: usize) -> Self {
        FitOptions {
            family: ModelFamily::Limiting,
            layout: ParamLayout::fractional_only(c),
            spectrum: SpectrumConfig::default(),
            max_order: DiffOrders::DEFAULT_MAX,
            starts: 3,
            max_evaluations: 2000,
            rel_tol: 1e-9,
        }
    }
}

/// σ̂² = (1/T)Σ I(ω_j)/g̃(ω_j).
pub fn profile_sigma2(ordinates: &[f64], gtilde: &[f64]) -> Result<f64> {
    if ordinates.len() != gtilde.len() || ordinates.is_empty() {
        return invalid("periodogram and model values must have the same non-zero length");
    }
    if let Some(g) = gtilde.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::Numeric(format!("model spectrum value {g} is not strictly positive")));
    }
    Ok(ordinates.iter().zip(gtilde).map(|(i, g)| i / g).sum::<f64>() / ordinates.len() as f64)
}

/// Σ log g̃ + T·log(Σ I/g̃) + T − T·log T, from log model values.
pub fn objective_from_log(ordinates: &[f64], ln_g: &[f64]) -> f64 {
    let t = ordinates.len() as f64;
    let mut sum_ln = 0.0;
    let mut ratio = 0.0;
    for (i, l) in ordinates.iter().zip(ln_g) {
        sum_ln += l;
        ratio += i * (-l).exp();
    }
    sum_ln + t * ratio.ln() + t - t * t.ln()
}

enum Evaluator {
    Limiting(LimitingKernel),
    Sarfima { angles: Vec<Angle>, periods: Vec<u64> },
}

/// Whittle objective for one differencing cell and fixed periodogram.
pub struct WhittleProblem {
    pub orders: DiffOrders,
    pub spec: SeasonalSpec,
    pub family: ModelFamily,
    pub layout: ParamLayout,
    pub periodogram: Periodogram,
    evaluator: Evaluator,
}

impl WhittleProblem {
    /// Differences `y` for `orders`, drops the first `burn_in` values of the
    /// original series worth of lags, and builds the periodogram of the
    /// remaining N = len(y) − burn_in values.
    pub fn from_series(
        y: &[f64],
        orders: &DiffOrders,
        spec: &SeasonalSpec,
        burn_in: usize,
        opts: &FitOptions,
    ) -> Result<Self> {
        let lags = orders.lags(spec);
        if burn_in < lags {
            return invalid(format!("burn-in {burn_in} is shorter than the {lags} differencing lags"));
        }
        if y.len() < burn_in + 3 {
            return invalid(format!("series of length {} is too short for burn-in {}", y.len(), burn_in));
        }
        let u = seasonal_difference(y, orders, spec)?;
        let u = &u[burn_in - lags..];
        Self::from_periodogram(periodogram(u)?, orders, spec, opts)
    }

    pub fn from_periodogram(
        periodogram: Periodogram,
        orders: &DiffOrders,
        spec: &SeasonalSpec,
        opts: &FitOptions,
    ) -> Result<Self> {
        opts.layout.check(spec)?;
        opts.spectrum.check()?;
        let angles = periodogram.angles();
        let n = periodogram.n as i64;
        for j in opts.layout.free_seasonal(spec) {
            let z = spec.z()[j] as i64;
            for (idx, a) in angles.iter().enumerate() {
                let (num, den) = a.rational_part();
                // 2π·num/den = 2πk/z for some integer k
                if (num * z) % den == 0 {
                    return Err(Error::Numeric(format!(
                        "Fourier frequency 2π·{}/{} coincides with a seasonal pole of period {}; change N by ±1",
                        idx + 1,
                        n,
                        z
                    )));
                }
            }
        }
        let evaluator = match opts.family {
            ModelFamily::Limiting => Evaluator::Limiting(LimitingKernel::new(&angles, spec, &opts.spectrum)),
            ModelFamily::Sarfima => {
                Evaluator::Sarfima { angles, periods: spec.z().iter().map(|&z| z as u64).collect() }
            }
        };
        Ok(WhittleProblem {
            orders: orders.clone(),
            spec: spec.clone(),
            family: opts.family,
            layout: opts.layout.clone(),
            periodogram,
            evaluator,
        })
    }

    pub fn t(&self) -> usize {
        self.periodogram.len()
    }

    pub fn n(&self) -> usize {
        self.periodogram.n
    }

    /// ln g̃(ω_j; ξ, R) at every Fourier frequency.
    pub fn ln_gtilde(&self, params: &ModelParams, out: &mut [f64]) {
        match &self.evaluator {
            Evaluator::Limiting(k) => k.ln_unnorm(params, self.orders.r, out),
            Evaluator::Sarfima { angles, periods } => {
                let f = SarfimaSpectrum { params: params.clone().with_sigma2(1.0), periods: periods.clone() };
                for (o, a) in out.iter_mut().zip(angles) {
                    *o = f.ln_density_at(*a);
                }
            }
        }
    }

    pub fn neg_objective(&self, params: &ModelParams) -> f64 {
        let mut ln_g = vec![0.0; self.t()];
        self.ln_gtilde(params, &mut ln_g);
        objective_from_log(&self.periodogram.ordinates, &ln_g)
    }

    pub fn profile_sigma2(&self, params: &ModelParams) -> Result<f64> {
        let mut ln_g = vec![0.0; self.t()];
        self.ln_gtilde(params, &mut ln_g);
        let g: Vec<f64> = ln_g.iter().map(|l| l.exp()).collect();
        profile_sigma2(&self.periodogram.ordinates, &g)
    }

    fn transform(&self) -> Reparam {
        Reparam { layout: self.layout.clone(), spec: self.spec.clone() }
    }

    /// Local minimization within this cell using multi-start simplex search.
    pub fn optimize(&self, opts: &FitOptions, init: Option<&ModelParams>) -> CellFit {
        let tr = self.transform();
        let base = ModelParams::long_memory(0.0, vec![0.0; self.spec.c()]);
        let objective = |u: &[f64]| match tr.to_params(u, &base) {
            Some(p) => self.neg_objective(&p),
            None => f64::INFINITY,
        };
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(p) = init {
            if let Some(u) = tr.from_params(p) {
                starts.push(u);
            }
        }
        let free = self.layout.free_seasonal(&self.spec).len();
        let levels: Vec<f64> = match opts.starts {
            0 => vec![],
            1 => vec![0.2],
            2 => vec![0.05, 0.4],
            3 => vec![0.05, 0.2, 0.4],
            k => (0..k).map(|i| 0.05 + 0.35 * i as f64 / (k - 1) as f64).collect(),
        };
        for s in levels {
            let share = s / (free + 1) as f64;
            let mut p = base.clone();
            p.d = share;
            for j in self.layout.free_seasonal(&self.spec) {
                p.seasonal_d[j] = share;
            }
            let packed = self.layout.pack(&p, &self.spec);
            let p = self.layout.unpack(&packed, &base, &self.spec);
            if let Some(u) = tr.from_params(&p) {
                starts.push(u);
            }
        }
        let nm = NelderMeadOptions {
            max_evaluations: opts.max_evaluations,
            f_rel_tol: opts.rel_tol,
            x_tol: 1e-6,
            initial_step: 0.5,
            restarts: 1,
        };
        let mut best: Option<(Vec<f64>, f64, bool)> = None;
        let mut evaluations = 0;
        let mut start_values = Vec::new();
        for u0 in &starts {
            let m = nelder_mead(objective, u0, &nm);
            evaluations += m.evaluations;
            start_values.push(m.f);
            if best.as_ref().map_or(true, |b| m.f < b.1) {
                best = Some((m.x, m.f, m.converged));
            }
        }
        let Some((u, f, converged)) = best.filter(|b| b.1.is_finite()) else {
            return CellFit {
                orders: self.orders.clone(),
                result: Err("objective was not finite at any start".to_string()),
                evaluations,
                start_values,
            };
        };
        let mut params = tr.to_params(&u, &base).expect("finite objective implies feasible parameters");
        let result = match self.profile_sigma2(&params) {
            Ok(s2) => {
                params.sigma2 = s2;
                Ok(CellOptimum { boundary: tr.near_boundary(&params), params, neg_loglik: f, converged })
            }
            Err(e) => Err(e.to_string()),
        };
        CellFit { orders: self.orders.clone(), result, evaluations, start_values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOptimum {
    /// Local estimate with σ² set to its profile value.
    pub params: ModelParams,
    pub neg_loglik: f64,
    pub converged: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFit {
    pub orders: DiffOrders,
    pub result: std::result::Result<CellOptimum, String>,
    pub evaluations: usize,
    /// Best objective reached from each start.
    pub start_values: Vec<f64>,
}

struct Reparam {
    layout: ParamLayout,
    spec: SeasonalSpec,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Partial autocorrelations → AR coefficients of 1 − Σφ_i x^i (stationary).
pub fn pacf_to_ar(kappa: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(kappa.len());
    for (k, &kk) in kappa.iter().enumerate() {
        let prev = phi.clone();
        for i in 0..k {
            phi[i] = prev[i] - kk * prev[k - 1 - i];
        }
        phi.push(kk);
    }
    phi
}

/// Inverse of [`pacf_to_ar`]; `None` when the polynomial is not stationary.
pub fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut kappa = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let kk = cur[k];
        if kk.abs() >= 1.0 {
            return None;
        }
        kappa[k] = kk;
        let denom = 1.0 - kk * kk;
        let prev: Vec<f64> = (0..k).map(|i| (cur[i] + kk * cur[k - 1 - i]) / denom).collect();
        cur = prev;
    }
    Some(kappa)
}

impl Reparam {
    fn to_params(&self, u: &[f64], base: &ModelParams) -> Option<ModelParams> {
        let free = self.layout.free_seasonal(&self.spec);
        let mut p = base.clone();
        p.seasonal_d = vec![0.0; self.spec.c()];
        p.seasonal_arma = vec![ArmaPoly::default(); self.spec.c()];
        let total = 0.5 * logistic(u[0]);
        let mut sum_d = 0.0;
        for (i, &j) in free.iter().enumerate() {
            let dj = 0.5 * logistic(u[1 + i]);
            p.seasonal_d[j] = dj;
            sum_d += dj;
        }
        p.d = total - sum_d;
        if p.d <= -0.5 {
            return None;
        }
        let mut idx = 1 + free.len();
        for (j, &o) in self.layout.ar_orders.iter().enumerate() {
            let kappa: Vec<f64> = u[idx..idx + o].iter().map(|v| v.tanh()).collect();
            p.seasonal_arma[j].ar = pacf_to_ar(&kappa);
            idx += o;
        }
        for (j, &o) in self.layout.ma_orders.iter().enumerate() {
            let kappa: Vec<f64> = u[idx..idx + o].iter().map(|v| v.tanh()).collect();
            p.seasonal_arma[j].ma = pacf_to_ar(&kappa).into_iter().map(|v| -v).collect();
            idx += o;
        }
        Some(p)
    }

    fn from_params(&self, p: &ModelParams) -> Option<Vec<f64>> {
        let free = self.layout.free_seasonal(&self.spec);
        let total = p.d + free.iter().map(|&j| p.seasonal_d[j]).sum::<f64>();
        let clamp = |x: f64| x.clamp(1e-6, 0.5 - 1e-6);
        let mut u = vec![logit(clamp(total) * 2.0)];
        for &j in &free {
            u.push(logit(clamp(p.seasonal_d[j]) * 2.0));
        }
        for (j, &o) in self.layout.ar_orders.iter().enumerate() {
            let mut c = p.seasonal_arma[j].ar.clone();
            c.resize(o, 0.0);
            u.extend(ar_to_pacf(&c)?.iter().map(|k| k.atanh()));
        }
        for (j, &o) in self.layout.ma_orders.iter().enumerate() {
            let mut c: Vec<f64> = p.seasonal_arma[j].ma.iter().map(|v| -v).collect();
            c.resize(o, 0.0);
            u.extend(ar_to_pacf(&c)?.iter().map(|k| k.atanh()));
        }
        Some(u)
    }

    fn near_boundary(&self, p: &ModelParams) -> bool {
        let free = self.layout.free_seasonal(&self.spec);
        let total = p.total_memory();
        let edge = |x: f64, lo: f64, hi: f64| x - lo < BOUNDARY_TOL || hi - x < BOUNDARY_TOL;
        edge(total, 0.0, 0.5) || p.d + 0.5 < BOUNDARY_TOL || free.iter().any(|&j| edge(p.seasonal_d[j], 0.0, 0.5))
    }
}

/// Per-cell summary kept in the fit result.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDiagnostics {
    pub orders: DiffOrders,
    pub neg_loglik: Option<f64>,
    pub converged: bool,
    pub boundary: bool,
    pub evaluations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// ξ̂ with σ² = σ̂².
    pub params: ModelParams,
    pub orders: DiffOrders,
    pub sigma2: f64,
    pub neg_loglik: f64,
    pub aic: f64,
    /// Number of differenced observations entering the periodogram.
    pub n_used: usize,
    pub burn_in: usize,
    pub spec: SeasonalSpec,
    pub family: ModelFamily,
    pub layout: ParamLayout,
    pub spectrum: SpectrumConfig,
    pub converged: bool,
    pub boundary: bool,
    pub cells: Vec<CellDiagnostics>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn names(&self) -> Vec<String> {
        self.layout.names(&self.spec)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.layout.pack(&self.params, &self.spec)
    }

    /// The fitted spectral density of the differenced series.
    pub fn spectrum(&self) -> Result<Box<dyn SpectralDensity>> {
        Ok(match self.family {
            ModelFamily::Limiting => Box::new(LimitingSpectrum::new(
                self.params.clone(),
                self.orders.r,
                self.spec.clone(),
                self.spectrum.clone(),
            )?),
            ModelFamily::Sarfima => Box::new(SarfimaSpectrum::new(
                self.params.clone(),
                self.spec.z().iter().map(|&z| z as u64).collect(),
            )?),
        })
    }
}

/// Fits the model over every differencing cell in {0..K}^{c+1} and returns
/// the global minimizer of the Whittle objective.
pub fn fit(y: &[f64], spec: &SeasonalSpec, opts: &FitOptions) -> Result<FitResult> {
    opts.layout.check(spec)?;
    let burn_in = DiffOrders::burn_in(spec, opts.max_order);
    if y.len() < burn_in + 3 {
        return invalid(format!(
            "series of length {} is too short: burn-in {} plus at least 3 observations required",
            y.len(),
            burn_in
        ));
    }
    let cells = DiffOrders::cells(spec.c(), opts.max_order);
    let fits: Vec<CellFit> = crate::par_map(cells, |orders| {
        match WhittleProblem::from_series(y, &orders, spec, burn_in, opts) {
            Ok(problem) => problem.optimize(opts, None),
            Err(e) => CellFit { orders, result: Err(e.to_string()), evaluations: 0, start_values: vec![] },
        }
    });
    assemble(fits, spec, opts, burn_in, y.len() - burn_in)
}

/// Fits a single differencing cell.
pub fn fit_cell(y: &[f64], spec: &SeasonalSpec, orders: &DiffOrders, opts: &FitOptions) -> Result<FitResult> {
    let burn_in = DiffOrders::burn_in(spec, opts.max_order);
    let problem = WhittleProblem::from_series(y, orders, spec, burn_in, opts)?;
    let cell = problem.optimize(opts, None);
    assemble(vec![cell], spec, opts, burn_in, y.len() - burn_in)
}

fn assemble(fits: Vec<CellFit>, spec: &SeasonalSpec, opts: &FitOptions, burn_in: usize, n_used: usize) -> Result<FitResult> {
    let mut best: Option<(usize, &CellOptimum)> = None;
    for (i, f) in fits.iter().enumerate() {
        if let Ok(opt) = &f.result {
            if best.map_or(true, |(_, b)| opt.neg_loglik < b.neg_loglik) {
                best = Some((i, opt));
            }
        }
    }
    let cells: Vec<CellDiagnostics> = fits
        .iter()
        .map(|f| match &f.result {
            Ok(o) => CellDiagnostics {
                orders: f.orders.clone(),
                neg_loglik: Some(o.neg_loglik),
                converged: o.converged,
                boundary: o.boundary,
                evaluations: f.evaluations,
                error: None,
            },
            Err(e) => CellDiagnostics {
                orders: f.orders.clone(),
                neg_loglik: None,
                converged: false,
                boundary: false,
                evaluations: f.evaluations,
                error: Some(e.clone()),
            },
        })
        .collect();
    let Some((idx, opt)) = best else {
        return Err(Error::FitFailed {
            cells: fits.iter().map(|f| format!("{}: {}", f.orders, f.result.as_ref().err().cloned().unwrap_or_default())).collect(),
        });
    };
    let orders = fits[idx].orders.clone();
    let k = opts.layout.dim(spec);
    let mut warnings = Vec::new();
    if !opt.converged {
        warnings.push(format!("optimizer did not converge in the selected cell ({orders})"));
    }
    if opt.boundary {
        warnings.push("estimate lies within 1e-4 of a constraint boundary; asymptotic intervals may be unreliable".into());
    }
    if opts.family == ModelFamily::Limiting {
        let rate = 2.0 * orders.r as f64 + 2.0 * opt.params.d + 1.0;
        // √N·M^{−(2r+2d+1)} should be small for the truncation to be negligible
        let needed = (n_used as f64).powf(0.5 / rate);
        if (opts.spectrum.truncation as f64) < needed {
            warnings.push(format!(
                "truncation M={} is below N^(1/(2(2r+2d+1))) = {:.1} at the fitted values",
                opts.spectrum.truncation, needed
            ));
        }
    }
    Ok(FitResult {
        params: opt.params.clone(),
        orders,
        sigma2: opt.params.sigma2,
        neg_loglik: opt.neg_loglik,
        aic: 2.0 * opt.neg_loglik + 2.0 * (k as f64 + 1.0),
        n_used,
        burn_in,
        spec: spec.clone(),
        family: opts.family,
        layout: opts.layout.clone(),
        spectrum: opts.spectrum.clone(),
        converged: opt.converged,
        boundary: opt.boundary,
        cells,
        warnings,
    })
}

/// The negative Whittle log-likelihood before profiling:
/// Σ {log σ² + log g̃ + I/(σ² g̃)}.
pub fn unprofiled_objective(ordinates: &[f64], gtilde: &[f64], sigma2: f64) -> f64 {
    ordinates
        .iter()
        .zip(gtilde)
        .map(|(i, g)| sigma2.ln() + g.ln() + i / (sigma2 * g))
        .sum()
}

/// Difference of [`unprofiled_objective`] between σ² = `a` and σ² = `b`,
/// accumulated term by term so that it stays accurate when a ≈ b.
pub fn unprofiled_difference(ordinates: &[f64], gtilde: &[f64], a: f64, b: f64) -> f64 {
    let log_ratio = ((a - b) / b).ln_1p();
    ordinates.iter().zip(gtilde).map(|(i, g)| log_ratio + (i / g) * (b - a) / (a * b)).sum()
}

/// Whittle objective of `params` in cell `orders` on series `y`, using the
/// burn-in implied by `opts.max_order`.
pub fn neg_objective(
    params: &ModelParams,
    orders: &DiffOrders,
    y: &[f64],
    spec: &SeasonalSpec,
    opts: &FitOptions,
) -> Result<f64> {
    let burn_in = DiffOrders::burn_in(spec, opts.max_order);
    let problem = WhittleProblem::from_series(y, orders, spec, burn_in, opts)?;
    Ok(problem.neg_objective(params))
}
