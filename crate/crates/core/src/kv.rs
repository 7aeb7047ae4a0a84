//! Flat `key=value` text format shared by configuration files, parameter
//! files and machine-readable results.
//!
//! Lines are `key=value`; blank lines and lines starting with `#` are ignored.
//! Lists are written `[a,b,c]` (brackets optional on input).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = KvMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return invalid(format!("line {}: expected key=value, got {:?}", lineno + 1, line));
            };
            let key = k.trim();
            if key.is_empty() {
                return invalid(format!("line {}: empty key", lineno + 1));
            }
            map.entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(map)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn insert_list(&mut self, key: impl Into<String>, values: &[f64]) {
        self.entries.insert(key.into(), format_list(values));
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Copies every entry of `other` into `self`, replacing existing keys.
    pub fn merge(&mut self, other: &KvMap) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the value under `key`, if present.
    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .or_else(|_| invalid(format!("key {key}: cannot parse {v:?}"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse_value(key)?.unwrap_or(default))
    }

    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|e| match e {
                crate::Error::InvalidInput(msg) => crate::Error::InvalidInput(format!("key {key}: {msg}")),
                other => other,
            }),
        }
    }

    pub fn list_u32(&self, key: &str) -> Result<Option<Vec<u32>>> {
        match self.list_f64(key)? {
            None => Ok(None),
            Some(vals) => {
                let mut out = Vec::with_capacity(vals.len());
                for v in vals {
                    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                        return invalid(format!("key {key}: {v} is not a non-negative integer"));
                    }
                    out.push(v as u32);
                }
                Ok(Some(out))
            }
        }
    }
}

impl fmt::Display for KvMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

pub fn format_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>().or_else(|_| invalid(format!("cannot parse list element {p:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        let text = "# comment\nd=0.2\n\nar.1 = [0.9, -0.2]\nz=[10]\n";
        let kv = KvMap::parse(text).unwrap();
        assert_eq!(kv.get("d"), Some("0.2"));
        assert_eq!(kv.list_f64("ar.1").unwrap(), Some(vec![0.9, -0.2]));
        assert_eq!(kv.list_u32("z").unwrap(), Some(vec![10]));
        let again = KvMap::parse(&kv.to_string()).unwrap();
        assert_eq!(again.list_f64("ar.1").unwrap(), Some(vec![0.9, -0.2]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = KvMap::parse("a=1\nbogus\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn merge_overrides() {
        let mut a = KvMap::parse("x=1\ny=2").unwrap();
        a.merge(&KvMap::parse("y=3").unwrap());
        assert_eq!(a.get("y"), Some("3"));
        assert_eq!(parse_list("[]").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_list("1,2").unwrap(), vec![1.0, 2.0]);
    }
}
