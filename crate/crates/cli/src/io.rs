//! Series files, report rendering and output headers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use lmagg::kv::KvMap;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Kv(KvMap),
    /// CSV with a header row.
    Table { columns: Vec<String>, rows: Vec<Vec<String>> },
    /// One value per line, readable as an input series.
    Series(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: Body,
    /// Human-readable summary printed when the body goes to a file.
    pub summary: String,
    /// Additional files written next to the output, as (suffix, body).
    pub sidecars: Vec<(String, KvMap)>,
}

impl Report {
    pub fn kv(kv: KvMap, summary: String) -> Self {
        Report { body: Body::Kv(kv), summary, sidecars: Vec::new() }
    }

    pub fn table(columns: &[&str], rows: Vec<Vec<String>>, summary: String) -> Self {
        Report {
            body: Body::Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows },
            summary,
            sidecars: Vec::new(),
        }
    }
}

/// Shortest round-trip text for a float; non-finite values as `inf`/`nan`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn header(cfg: &RunConfig) -> CliResult<String> {
    let mut h = String::new();
    writeln!(h, "# lmagg {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(h, "# command={}", cfg.command.name()).unwrap();
    writeln!(h, "# config_sha256={}", cfg.hash()).unwrap();
    writeln!(h, "# seed={}", cfg.seed()?).unwrap();
    if let Some(path) = &cfg.input {
        let bytes = read_bytes(path)?;
        writeln!(h, "# input_sha256={}", sha256_hex(&bytes)).unwrap();
    }
    Ok(h)
}

pub fn render(report: &Report) -> String {
    match &report.body {
        Body::Kv(kv) => kv.to_string(),
        Body::Table { columns, rows } => {
            let mut out = columns.join(",");
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        Body::Series(values) => values.iter().map(|v| num(*v) + "\n").collect(),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the report to `output` (with summary on stdout) or to stdout.
pub fn emit(cfg: &RunConfig, report: &Report, output: Option<&Path>) -> CliResult<()> {
    let head = header(cfg)?;
    let text = format!("{head}{}", render(report));
    match output {
        Some(path) => {
            write_file(path, &text)?;
            for (suffix, kv) in &report.sidecars {
                write_file(&sidecar_path(path, suffix), &format!("{head}{kv}"))?;
            }
            print!("{}", report.summary);
        }
        None => {
            if !report.sidecars.is_empty() {
                return Err(CliError::Usage(format!("{} requires --output", cfg.command.name())));
            }
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_bytes(path)?).map_err(|_| CliError::Usage(format!("{} is not UTF-8 text", path.display())))
}

/// Parses one value per line or `time,value` pairs (last field used);
/// blank lines and `#` comments are skipped.
pub fn parse_series(text: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::Usage(format!("line {}: cannot parse {field:?} as a number", i + 1)))?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("line {}: non-finite value", i + 1)));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Usage("series file contains no values".into()));
    }
    Ok(out)
}

pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    parse_series(&read_text(path)?).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Aligned plain-text table.
pub fn aligned(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = columns.iter().map(|c| c.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(columns.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}
