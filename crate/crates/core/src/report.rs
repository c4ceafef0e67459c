//! Deterministic serialization: CSV traces, JSON manifests, atomic writes.
//!
//! CSV numbers are printed with 17 significant digits so every `f64`
//! round-trips exactly; JSON goes through `serde_json`, whose
//! shortest-round-trip float encoding gives the same exactness guarantee.

use crate::error::Result;
use crate::flow::{FlowTrace, TerminalStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// 17-significant-digit float formatting (round-trip exact).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes bytes to `path` atomically (temp file + rename in the same dir).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Full description of one finished run: config echo, wall times, terminal
/// summary, and per-item pass flags.
///
/// All numeric fields are reproduced bit-identically by a rerun with the
/// same config and seed; the wall-time strings are the only fields that
/// vary between reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub started_unix: String,
    pub finished_unix: String,
    pub status: Option<TerminalStatus>,
    pub extinction_time: Option<f64>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<ManifestCheck>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            artifact_version: crate::ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            config,
            started_unix: now_unix(),
            finished_unix: String::new(),
            status: None,
            extinction_time: None,
            summary: BTreeMap::new(),
            checks: Vec::new(),
            all_pass: true,
        }
    }

    pub fn push_check(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.checks.push(ManifestCheck {
            name: name.to_string(),
            value,
            threshold,
            pass,
        });
        self.all_pass &= pass;
    }

    pub fn finish(&mut self) {
        self.finished_unix = now_unix();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

fn now_unix() -> String {
    let d = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    format!("{}.{:06}", d.as_secs(), d.subsec_micros())
}

pub fn write_trace_csv(path: &Path, trace: &FlowTrace) -> Result<()> {
    write_atomic(path, trace.to_csv().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips() {
        for x in [
            0.0,
            1.0,
            -1.0 / 3.0,
            0.07229680535053876,
            1.875f64.powf(0.1),
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn atomic_write_creates_dirs() {
        let dir = std::env::temp_dir().join(format!("hypermcf-report-{}", std::process::id()));
        let path = dir.join("a/b/out.txt");
        write_atomic(&path, b"hello").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"hello");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
