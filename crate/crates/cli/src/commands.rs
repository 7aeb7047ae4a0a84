//! Subcommand implementations. Each returns a [`Report`]; only `io::emit`
//! touches the filesystem for output.

use std::f64::consts::PI;

use lmagg::asymptotics::{asymptotic_intervals, fisher_information, parametric_bootstrap};
use lmagg::forecast::{efficiency_ratio, predict, Ar1Fit, ForecastConfig};
use lmagg::kv::KvMap;
use lmagg::model::{validate, DiffOrders, ModelParams, SeasonalSpec};
use lmagg::sample::{periodogram, seasonal_difference, undifference};
use lmagg::simulate::{monte_carlo_table, replicate_rng, sampler_for_spectrum, McConfig};
use lmagg::spectra::{
    integrate_density, AggregateSpectrum, LimitingSpectrum, SarfimaSpectrum, SimulationSpectrum, SpectralDensity,
};
use lmagg::whittle::{fit, FitResult, ModelFamily};
use lmagg::Error;

use crate::ingest::ingest;
use crate::io::{aligned, num, read_series, read_text, Body, Report};
use crate::{CliError, CliResult, Command, RunConfig};

pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Periodogram => periodogram_cmd(cfg),
        Command::Simulate => simulate(cfg),
        Command::Fit => fit_cmd(cfg),
        Command::Fisher => fisher(cfg),
        Command::Bootstrap => bootstrap(cfg),
        Command::Forecast => forecast(cfg),
        Command::Compare => compare(cfg),
        Command::McTable => mc_table(cfg),
        Command::Ingest => ingest_cmd(cfg),
    }
}

fn need_m(spec: &SeasonalSpec, kind: &str) -> CliResult<u32> {
    spec.m().ok_or_else(|| CliError::Usage(format!("spectrum kind {kind} requires the aggregation size m")))
}

fn density(cfg: &RunConfig, kind: &str) -> CliResult<Box<dyn SpectralDensity>> {
    let spec = cfg.spec()?;
    let params = cfg.params(&spec)?;
    let orders = cfg.orders(&spec)?;
    for w in validate(&params, &spec).into_result()? {
        log::warn!("{w}");
    }
    Ok(match kind {
        "limiting" => Box::new(LimitingSpectrum::new(params, orders.r, spec, cfg.spectrum()?)?),
        "aggregate" => Box::new(AggregateSpectrum::new(params, orders.r, need_m(&spec, kind)?, spec)?),
        "sarfima" => Box::new(SarfimaSpectrum::for_spec(params, &spec)?),
        "simulation" => Box::new(SimulationSpectrum::new(params, orders.r, need_m(&spec, kind)?, spec)?),
        other => {
            return Err(CliError::Usage(format!(
                "unknown spectrum kind {other:?} (expected limiting, aggregate, sarfima or simulation)"
            )))
        }
    })
}

fn spectrum(cfg: &RunConfig) -> CliResult<Report> {
    let kind: String = cfg.get("kind", "limiting".to_string())?;
    let points: usize = cfg.get("points", 1000)?;
    if points == 0 {
        return Err(CliError::Usage("points must be positive".into()));
    }
    let normalize: bool = cfg.get("normalize", false)?;
    let f = density(cfg, &kind)?;
    let scale = if normalize { 1.0 / integrate_density(f.as_ref(), 1e-10)? } else { 1.0 };
    let mut rows = Vec::with_capacity(points);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 1..=points {
        let omega = PI * j as f64 / points as f64;
        let value = match f.density(omega) {
            Ok(v) => scale * v,
            Err(Error::Pole { .. }) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        lo = lo.min(value);
        hi = hi.max(value);
        rows.push(vec![num(omega), num(value)]);
    }
    let summary = format!("{kind} spectrum at {points} frequencies in (0, pi]: min {lo:.6e}, max {hi:.6e}\n");
    Ok(Report::table(&["omega", "density"], rows, summary))
}

fn periodogram_cmd(cfg: &RunConfig) -> CliResult<Report> {
    let y = read_series(cfg.input()?)?;
    let spec = cfg.spec()?;
    let orders = cfg.orders(&spec)?;
    let u = seasonal_difference(&y, &orders, &spec)?;
    let pg = periodogram(&u)?;
    let rows = pg
        .freqs
        .iter()
        .zip(&pg.ordinates)
        .enumerate()
        .map(|(j, (w, i))| vec![(j + 1).to_string(), num(*w), num(*i)])
        .collect();
    let summary = format!("periodogram of {} differenced values ({orders}): {} ordinates\n", pg.n, pg.len());
    Ok(Report::table(&["j", "omega", "ordinate"], rows, summary))
}

fn simulate(cfg: &RunConfig) -> CliResult<Report> {
    let kind: String = cfg.get("kind", "simulation".to_string())?;
    let n: usize = cfg.get("n", 512)?;
    let spec = cfg.spec()?;
    let orders = cfg.orders(&spec)?;
    let lags = orders.lags(&spec);
    if n <= lags {
        return Err(CliError::Usage(format!("n = {n} must exceed the {lags} differencing lags")));
    }
    let f = density(cfg, &kind)?;
    let sampler = sampler_for_spectrum(f.as_ref(), n - lags, &cfg.spectrum()?)?;
    let u = sampler.sample(&mut replicate_rng(cfg.seed()?, 0));
    let y = if lags == 0 { u } else { undifference(&u, &vec![0.0; lags], &orders, &spec)? };
    let summary = format!("simulated {n} values from the {kind} spectrum ({orders})\n");
    Ok(Report { body: Body::Series(y), summary, sidecars: Vec::new() })
}

fn fitted(cfg: &RunConfig, y: &[f64]) -> CliResult<FitResult> {
    let spec = cfg.spec()?;
    let opts = cfg.fit_options(&spec)?;
    Ok(fit(y, &spec, &opts)?)
}

/// Estimates, selection diagnostics and asymptotic intervals of a fit.
fn fit_kv(fit: &FitResult, level: f64, kv: &mut KvMap) -> Vec<Vec<String>> {
    kv.insert("family", fit.family);
    fit.orders.write_kv(kv);
    for (name, v) in fit.names().iter().zip(fit.estimates()) {
        kv.insert(format!("est.{name}"), num(v));
    }
    kv.insert("est.sigma2", num(fit.sigma2));
    kv.insert("neg_loglik", num(fit.neg_loglik));
    kv.insert("aic", num(fit.aic));
    kv.insert("n_used", fit.n_used);
    kv.insert("burn_in", fit.burn_in);
    kv.insert("converged", fit.converged);
    kv.insert("boundary", fit.boundary);
    for (i, cell) in fit.cells.iter().enumerate() {
        let mut orders = vec![cell.orders.r as f64];
        orders.extend(cell.orders.seasonal.iter().map(|&v| v as f64));
        kv.insert_list(format!("cell.{i}.orders"), &orders);
        match (&cell.neg_loglik, &cell.error) {
            (Some(v), _) => kv.insert(format!("cell.{i}.neg_loglik"), num(*v)),
            (None, Some(e)) => kv.insert(format!("cell.{i}.error"), e),
            _ => {}
        }
    }
    let mut warnings = fit.warnings.clone();
    let mut rows = Vec::new();
    match asymptotic_intervals(fit, level) {
        Ok(report) => {
            kv.insert("level", level);
            for iv in &report.intervals {
                kv.insert(format!("se.{}", iv.name), num(iv.se));
                kv.insert(format!("lower.{}", iv.name), num(iv.lower));
                kv.insert(format!("upper.{}", iv.name), num(iv.upper));
                rows.push(vec![
                    iv.name.clone(),
                    format!("{:.4}", iv.estimate),
                    format!("{:.4}", iv.se),
                    format!("{:.4}", iv.lower),
                    format!("{:.4}", iv.upper),
                ]);
            }
            warnings.extend(report.warnings);
        }
        Err(e) => {
            warnings.push(format!("asymptotic intervals unavailable: {e}"));
            for (name, v) in fit.names().iter().zip(fit.estimates()) {
                rows.push(vec![name.clone(), format!("{v:.4}"), "-".into(), "-".into(), "-".into()]);
            }
        }
    }
    for (i, w) in warnings.iter().enumerate() {
        kv.insert(format!("warning.{i}"), w);
    }
    rows
}

fn fit_summary(fit: &FitResult, rows: &[Vec<String>]) -> String {
    let mut s = format!(
        "{} model, selected {} (AIC {:.3}, N = {})\n",
        fit.family, fit.orders, fit.aic, fit.n_used
    );
    s.push_str(&aligned(&["parameter", "estimate", "se", "lower", "upper"], rows));
    for w in &fit.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn fit_cmd(cfg: &RunConfig) -> CliResult<Report> {
    let y = read_series(cfg.input()?)?;
    let fit = fitted(cfg, &y)?;
    let mut kv = KvMap::new();
    let rows = fit_kv(&fit, cfg.get("level", 0.95)?, &mut kv);
    let summary = fit_summary(&fit, &rows);
    Ok(Report::kv(kv, summary))
}

fn fisher(cfg: &RunConfig) -> CliResult<Report> {
    let spec = cfg.spec()?;
    let params = cfg.params(&spec)?;
    let orders = cfg.orders(&spec)?;
    let opts = cfg.fit_options(&spec)?;
    let n: usize = cfg.get("n", 512)?;
    let info = fisher_information(&params, &orders, &spec, &opts)?;
    let cov = info.covariance(n)?;
    let mut kv = KvMap::new();
    kv.insert("n", n);
    kv.insert("names", info.names.join(","));
    let k = info.dim();
    for i in 0..k {
        for j in 0..k {
            kv.insert(format!("info.{}.{}", info.names[i], info.names[j]), num(info.matrix[(i, j)]));
        }
    }
    let mut rows = Vec::new();
    for (i, name) in info.names.iter().enumerate() {
        let se = cov.standard_error(i);
        kv.insert(format!("se.{name}"), num(se));
        rows.push(vec![name.clone(), format!("{se:.5}")]);
    }
    let free = opts.layout.free_seasonal(&spec).len();
    if free > 0 {
        let mut w = vec![0.0; k];
        w[..=free].iter_mut().for_each(|v| *v = 1.0);
        let se = cov.linear_se(&w);
        kv.insert("se.d+sum(D)", num(se));
        rows.push(vec!["d+sum(D)".into(), format!("{se:.5}")]);
    }
    let summary = format!("asymptotic standard errors at N = {n}\n{}", aligned(&["parameter", "se"], &rows));
    Ok(Report::kv(kv, summary))
}

fn bootstrap(cfg: &RunConfig) -> CliResult<Report> {
    let y = read_series(cfg.input()?)?;
    let fit = fitted(cfg, &y)?;
    let level: f64 = cfg.get("level", 0.95)?;
    let b: usize = cfg.get("replicates", 200)?;
    let boot = parametric_bootstrap(&fit, &y, b, cfg.seed()?, level)?;
    let mut kv = KvMap::new();
    fit_kv(&fit, level, &mut kv);
    kv.insert("boot.replicates", b);
    kv.insert("boot.failures", boot.failures);
    let mut rows = Vec::new();
    for iv in &boot.intervals {
        kv.insert(format!("boot.{}.mean", iv.name), num(iv.estimate));
        kv.insert(format!("boot.{}.sd", iv.name), num(iv.se));
        kv.insert(format!("boot.{}.lower", iv.name), num(iv.lower));
        kv.insert(format!("boot.{}.upper", iv.name), num(iv.upper));
        rows.push(vec![
            iv.name.clone(),
            format!("{:.4}", iv.estimate),
            format!("{:.4}", iv.se),
            format!("{:.4}", iv.lower),
            format!("{:.4}", iv.upper),
        ]);
    }
    let summary = format!(
        "parametric bootstrap, {b} replicates ({} failed), level {level}\n{}",
        boot.failures,
        aligned(&["parameter", "mean", "sd", "lower", "upper"], &rows)
    );
    Ok(Report::kv(kv, summary))
}

fn forecast_config(cfg: &RunConfig) -> CliResult<ForecastConfig> {
    Ok(ForecastConfig { cap: cfg.get("cap", lmagg::forecast::DEFAULT_CAP)?, spectrum: cfg.spectrum()?, ..Default::default() })
}

fn forecast(cfg: &RunConfig) -> CliResult<Report> {
    let y = read_series(cfg.input()?)?;
    let h: usize = cfg.get("horizon", 24)?;
    let fit = fitted(cfg, &y)?;
    let out = predict(&y, &fit, h, &forecast_config(cfg)?)?;
    let rows: Vec<Vec<String>> = (0..h).map(|k| vec![(k + 1).to_string(), num(out.points[k]), num(out.mse[k])]).collect();
    let pretty: Vec<Vec<String>> =
        (0..h).map(|k| vec![(k + 1).to_string(), format!("{:.4}", out.points[k]), format!("{:.4}", out.mse[k])]).collect();
    let summary = format!("{} ({}), {h}-step forecasts\n{}", out.model, fit.orders, aligned(&["h", "forecast", "mse"], &pretty));
    Ok(Report::table(&["h", "forecast", "mse"], rows, summary))
}

fn compare(cfg: &RunConfig) -> CliResult<Report> {
    let y = read_series(cfg.input()?)?;
    let h: usize = cfg.get("holdout", cfg.get("horizon", 24)?)?;
    if h == 0 || h >= y.len() {
        return Err(CliError::Usage(format!("holdout {h} must lie between 1 and the series length")));
    }
    let (train, test) = y.split_at(y.len() - h);
    let fcfg = forecast_config(cfg)?;
    let proposed = predict(train, &fitted(cfg, train)?, h, &fcfg)?;
    let competitor: String = cfg.get("competitor", "ar1".to_string())?;
    let other = match competitor.as_str() {
        "ar1" => Ar1Fit::yule_walker(train)?.predict(train, h),
        "sarfima" => {
            let spec = cfg.spec()?;
            let mut opts = cfg.fit_options(&spec)?;
            opts.family = ModelFamily::Sarfima;
            predict(train, &fit(train, &spec, &opts)?, h, &fcfg)?
        }
        other => return Err(CliError::Usage(format!("unknown competitor {other:?} (expected ar1 or sarfima)"))),
    };
    let ratio = efficiency_ratio(&proposed.points, &other.points, test)?;
    let rows = (0..h)
        .map(|k| vec![(k + 1).to_string(), num(test[k]), num(proposed.points[k]), num(other.points[k]), num(ratio[k])])
        .collect();
    let summary = format!(
        "cumulative MAE ratio (competitor {competitor} / proposed, %) at h = 1, {h}: {:.1}, {:.1}\n",
        ratio[0],
        ratio[h - 1]
    );
    Ok(Report::table(&["h", "actual", "proposed", "competitor", "ratio"], rows, summary))
}

fn mc_table(cfg: &RunConfig) -> CliResult<Report> {
    let spec = cfg.spec()?;
    let m = spec.m().ok_or_else(|| CliError::Usage("mc-table requires the aggregation size m".into()))?;
    let params: ModelParams = cfg.params(&spec)?;
    let orders: DiffOrders = cfg.orders(&spec)?;
    let mut fit_opts = cfg.fit_options(&spec)?;
    fit_opts.family = ModelFamily::Limiting;
    let mc = McConfig {
        params,
        spec: spec.clone(),
        m,
        orders,
        n: cfg.get("n", 512)?,
        replicates: cfg.get("replicates", 200)?,
        seed: cfg.seed()?,
        fit_limiting: true,
        fit_sarfima: cfg.get("fit_sarfima", false)?,
        fit: fit_opts,
        spectrum: cfg.spectrum()?,
    };
    let table = monte_carlo_table(&mc)?;
    let mut kv = KvMap::new();
    kv.insert("replicates", table.replicates);
    let mut rows = Vec::new();
    for f in &table.fitters {
        kv.insert(format!("{}.successes", f.family), f.successes);
        kv.insert(format!("{}.zero_orders", f.family), f.zero_orders);
        for r in &f.rows {
            kv.insert(format!("{}.{}.truth", f.family, r.name), num(r.truth));
            kv.insert(format!("{}.{}.mean", f.family, r.name), num(r.mean));
            kv.insert(format!("{}.{}.sd", f.family, r.name), num(r.sd));
            rows.push(vec![
                f.family.to_string(),
                r.name.clone(),
                format!("{:.3}", r.truth),
                format!("{:.3}", r.mean),
                format!("({:.3})", r.sd),
            ]);
        }
    }
    let mut summary = format!("{} replicates, N = {}, m = {m}\n", table.replicates, mc.n);
    summary.push_str(&aligned(&["model", "parameter", "true", "mean", "(sd)"], &rows));
    for f in &table.fitters {
        summary.push_str(&format!(
            "{}: {} fits succeeded, zero differencing orders selected in {}\n",
            f.family, f.successes, f.zero_orders
        ));
    }
    Ok(Report::kv(kv, summary))
}

fn ingest_cmd(cfg: &RunConfig) -> CliResult<Report> {
    let text = read_text(cfg.input()?)?;
    let window: f64 = cfg.get("window", 1800.0)?;
    let log_transform: bool = cfg.get("log_transform", false)?;
    let out = ingest(&text, window, log_transform)?;
    let mut meta = KvMap::new();
    meta.insert("window", num(out.window));
    meta.insert("start", num(out.start));
    meta.insert("windows", out.values.len());
    meta.insert("log_transform", log_transform);
    let summary = format!("{} windows of {} s starting at {}\n", out.values.len(), out.window, out.start);
    Ok(Report { body: Body::Series(out.values), summary, sidecars: vec![(".meta".into(), meta)] })
}
