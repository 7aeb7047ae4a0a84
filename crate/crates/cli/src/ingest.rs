//! Event timestamps to an aggregate count series.

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub values: Vec<f64>,
    /// Epoch second at which the first window starts (the earliest event).
    pub start: f64,
    pub window: f64,
}

/// ln(c + 1).
pub fn log_count(c: f64) -> f64 {
    c.ln_1p()
}

/// Counts events in consecutive windows of `window` seconds starting at the
/// earliest timestamp; empty windows count zero. With `log_transform` each
/// count c becomes ln(c + 1), which keeps empty windows finite.
pub fn ingest(text: &str, window: f64, log_transform: bool) -> CliResult<Ingested> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(CliError::Usage(format!("window must be a positive number of seconds, got {window}")));
    }
    let mut stamps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite())
            .ok_or_else(|| CliError::Usage(format!("line {}: cannot parse {line:?} as epoch seconds", i + 1)))?;
        stamps.push(t);
    }
    if stamps.is_empty() {
        return Err(CliError::Usage("timestamp file contains no events".into()));
    }
    let start = stamps.iter().copied().fold(f64::INFINITY, f64::min);
    let end = stamps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let windows = ((end - start) / window).floor() as usize + 1;
    let mut counts = vec![0.0; windows];
    for t in stamps {
        counts[(((t - start) / window).floor() as usize).min(windows - 1)] += 1.0;
    }
    if log_transform {
        for c in &mut counts {
            *c = log_count(*c);
        }
    }
    Ok(Ingested { values: counts, start, window })
}
