//! Run configuration: a flat key-value map assembled from `--config`,
//! `--set` entries and dedicated flags (in increasing precedence).

use std::path::PathBuf;

use lmagg::kv::{parse_list, KvMap};
use lmagg::model::{DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig};
use lmagg::whittle::{FitOptions, ModelFamily, ParamLayout};
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult, Command, Options};

/// Keys accepted in configuration files; `*` matches a component index.
const KNOWN_KEYS: &[&str] = &[
    "z", "m", "d", "D.*", "ar.*", "ma.*", "phi", "theta", "sigma2", "r", "R.*", "K", "truncation",
    "tail_correction", "grid_size", "family", "p.*", "q.*", "starts", "seed", "n", "replicates", "horizon",
    "level", "kind", "points", "normalize", "window", "log_transform", "cap", "competitor", "holdout",
    "fit_sarfima",
];

fn known(key: &str) -> bool {
    KNOWN_KEYS.iter().any(|k| match k.strip_suffix('*') {
        Some(prefix) => key.strip_prefix(prefix).is_some_and(|rest| rest.parse::<usize>().is_ok()),
        None => *k == key,
    })
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub kv: KvMap,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn load(command: Command, opts: &Options) -> CliResult<Self> {
        let mut kv = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
                KvMap::parse(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => KvMap::new(),
        };
        for entry in &opts.set {
            let Some((k, v)) = entry.split_once('=') else {
                return Err(usage(format!("--set expects KEY=VALUE, got {entry:?}")));
            };
            kv.insert(k.trim(), v.trim());
        }
        let mut flags = KvMap::new();
        if let Some(v) = &opts.z {
            flags.insert("z", v);
        }
        if let Some(v) = opts.m {
            flags.insert("m", v);
        }
        if let Some(v) = opts.d {
            flags.insert("d", v);
        }
        if let Some(v) = &opts.big_d {
            let values = parse_list(v).map_err(|e| usage(format!("--D: {e}")))?;
            for (j, dj) in values.iter().enumerate() {
                flags.insert(format!("D.{}", j + 1), dj);
            }
        }
        if let Some(v) = opts.sigma2 {
            flags.insert("sigma2", v);
        }
        if let Some(v) = &opts.phi {
            flags.insert("phi", v);
        }
        if let Some(v) = opts.seed {
            flags.insert("seed", v);
        }
        if let Some(v) = opts.n {
            flags.insert("n", v);
        }
        if let Some(v) = opts.replicates {
            flags.insert("replicates", v);
        }
        if let Some(v) = opts.horizon {
            flags.insert("horizon", v);
        }
        if let Some(v) = opts.level {
            flags.insert("level", v);
        }
        if let Some(v) = &opts.family {
            flags.insert("family", v);
        }
        if let Some(v) = opts.max_order {
            flags.insert("K", v);
        }
        if let Some(v) = opts.truncation {
            flags.insert("truncation", v);
        }
        if opts.no_tail_correction {
            flags.insert("tail_correction", false);
        }
        if let Some(v) = &opts.kind {
            flags.insert("kind", v);
        }
        if let Some(v) = opts.points {
            flags.insert("points", v);
        }
        if let Some(v) = opts.window {
            flags.insert("window", v);
        }
        if opts.log_transform {
            flags.insert("log_transform", true);
        }
        kv.merge(&flags);
        if let Some((key, _)) = kv.iter().find(|(k, _)| !known(k)) {
            return Err(usage(format!("unknown configuration key {key:?}")));
        }
        if !kv.contains("seed") {
            kv.insert("seed", 1);
        }
        Ok(RunConfig { command, kv, input: opts.input.clone(), output: opts.output.clone() })
    }

    /// SHA-256 of the canonical (sorted) configuration text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.kv.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> CliResult<u64> {
        Ok(self.kv.parse_or("seed", 1)?)
    }

    pub fn spec(&self) -> CliResult<SeasonalSpec> {
        Ok(SeasonalSpec::from_kv(&self.kv)?)
    }

    pub fn params(&self, spec: &SeasonalSpec) -> CliResult<ModelParams> {
        Ok(ModelParams::from_kv(&self.kv, spec.c())?)
    }

    pub fn orders(&self, spec: &SeasonalSpec) -> CliResult<DiffOrders> {
        Ok(DiffOrders::from_kv(&self.kv, spec.c())?)
    }

    pub fn spectrum(&self) -> CliResult<SpectrumConfig> {
        let d = SpectrumConfig::default();
        let cfg = SpectrumConfig {
            truncation: self.kv.parse_or("truncation", d.truncation)?,
            tail_correction: self.kv.parse_or("tail_correction", d.tail_correction)?,
            grid_size: self.kv.parse_or("grid_size", d.grid_size)?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn family(&self) -> CliResult<ModelFamily> {
        Ok(self.kv.parse_or("family", ModelFamily::Limiting)?)
    }

    pub fn fit_options(&self, spec: &SeasonalSpec) -> CliResult<FitOptions> {
        let c = spec.c();
        let mut opts = FitOptions::new(c);
        opts.family = self.family()?;
        opts.spectrum = self.spectrum()?;
        opts.max_order = self.kv.parse_or("K", opts.max_order)?;
        opts.starts = self.kv.parse_or("starts", opts.starts)?;
        let mut layout = ParamLayout::fractional_only(c);
        for j in 0..c {
            layout.ar_orders[j] = self.kv.parse_or(&format!("p.{}", j + 1), 0)?;
            layout.ma_orders[j] = self.kv.parse_or(&format!("q.{}", j + 1), 0)?;
        }
        opts.layout = layout;
        Ok(opts)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.kv.parse_or(key, default)?)
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.kv
            .parse_value(key)?
            .ok_or_else(|| usage(format!("{} requires the configuration key {key}", self.command.name())))
    }

    pub fn input(&self) -> CliResult<&PathBuf> {
        self.input.as_ref().ok_or_else(|| usage(format!("{} requires --input", self.command.name())))
    }
}
