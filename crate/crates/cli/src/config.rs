//! Flat `key=value` configuration: an optional config file plus command-line
//! overrides, validated against a per-command key whitelist.

use hypermcf_core::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    /// Parses `key=value` lines; `#` starts a comment, blank lines ignored.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.insert_pair(line).map_err(|e| {
                Error::Config(format!("{path}:{}: {e}", lineno + 1))
            })?;
        }
        Ok(cfg)
    }

    pub fn insert_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| {
            Error::Config(format!("expected key=value, got {pair:?}"))
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("empty key in {pair:?}")));
        }
        self.values.insert(key.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    /// Rejects any key outside the command's documented set.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.clone()
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => parse_real(v)
                .ok_or_else(|| Error::Config(format!("key {key}: cannot parse {v:?} as a real"))),
        }
    }

    pub fn get_opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => parse_real(v)
                .map(Some)
                .ok_or_else(|| Error::Config(format!("key {key}: cannot parse {v:?} as a real"))),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: cannot parse {v:?} as an integer"))),
        }
    }

    pub fn get_u32(&self, key: &str, default: u32) -> Result<u32> {
        Ok(self.get_u64(key, default as u64)? as u32)
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_u64(key, default as u64)? as usize)
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.values.get(key).map(|s| s.as_str()) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(Error::Config(format!("key {key}: cannot parse {v:?} as a bool"))),
        }
    }

    pub fn get_u32_list(&self, key: &str, default: &[u32]) -> Result<Vec<u32>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("key {key}: bad integer {s:?}")))
                })
                .collect(),
        }
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    parse_real(s.trim())
                        .ok_or_else(|| Error::Config(format!("key {key}: bad real {s:?}")))
                })
                .collect(),
        }
    }
}

/// Real-valued parser accepting plain floats plus `atanh(x)`, `asinh(x)`,
/// `pi`, and `pi/K` (radii are often most natural in those forms).
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    if s == "pi" {
        return Some(std::f64::consts::PI);
    }
    if let Some(rest) = s.strip_prefix("pi/") {
        return rest.parse::<f64>().ok().map(|d| std::f64::consts::PI / d);
    }
    for (prefix, f) in [
        ("atanh(", f64::atanh as fn(f64) -> f64),
        ("asinh(", f64::asinh as fn(f64) -> f64),
        ("acosh(", f64::acosh as fn(f64) -> f64),
    ] {
        if let Some(rest) = s.strip_prefix(prefix) {
            if let Some(inner) = rest.strip_suffix(')') {
                return inner.trim().parse::<f64>().ok().map(f);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_extended_reals() {
        assert_eq!(parse_real("0.5"), Some(0.5));
        assert_eq!(parse_real("atanh(0.5)"), Some(0.5f64.atanh()));
        assert_eq!(parse_real("pi/2"), Some(std::f64::consts::FRAC_PI_2));
        assert_eq!(parse_real("banana"), None);
        assert_eq!(parse_real("atanh(x)"), None);
    }

    #[test]
    fn rejects_unknown_keys() {
        let mut cfg = KvConfig::default();
        cfg.insert_pair("n=6").unwrap();
        cfg.insert_pair("frobnicate=1").unwrap();
        assert!(cfg.check_keys(&["n", "c"]).is_err());
    }
}
