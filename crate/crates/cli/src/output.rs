//! Report files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use rankone_core::format::real;

/// Pretty JSON with every float written by [`real`]; integers stay integers.
pub fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let value = serde_json::to_value(v)?;
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (_, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&real(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // flat arrays of scalars stay on one line
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (j, i) in items.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    write_value(i, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (j, i) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(i, indent + 1, out);
                out.push_str(if j + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (j, (k, i)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(i, indent + 1, out);
                out.push_str(if j + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    /// SHA-256 of the config file as read.
    pub config_hash: String,
    pub exit_code: i32,
    /// Not covered by any digest.
    pub wall_clock_seconds: f64,
    pub rows: BTreeMap<String, usize>,
    pub files: Vec<FileEntry>,
}

/// Output directory of one run; records a digest for every file written.
pub struct OutDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
    rows: BTreeMap<String, usize>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutDir {
    pub fn create(dir: &Path) -> anyhow::Result<OutDir> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), files: Vec::new(), rows: BTreeMap::new(), started: Instant::now() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        log::debug!("wrote {} ({} bytes)", path.display(), bytes.len());
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> anyhow::Result<()> {
        let text = to_json(v)?;
        self.write(name, text.as_bytes())
    }

    /// Writes a CSV produced by `f` and records its data-row count.
    pub fn csv<F>(&mut self, name: &str, f: F) -> anyhow::Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> rankone_core::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let rows = buf.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
        self.rows.insert(name.trim_end_matches(".csv").to_string(), rows);
        self.write(name, &buf)
    }

    pub fn rows(&mut self, stage: &str, n: usize) {
        self.rows.insert(stage.to_string(), n);
    }

    pub fn finish(mut self, command: &str, config_bytes: &[u8], exit_code: i32) -> anyhow::Result<()> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let m = RunManifest {
            command: command.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: sha256_hex(config_bytes),
            exit_code,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            rows: std::mem::take(&mut self.rows),
            files: std::mem::take(&mut self.files),
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, to_json(&m)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// A pass/fail line of a report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Observed value or worst-case witness.
    pub value: Option<f64>,
    pub band: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, pass: bool, value: Option<f64>, band: Option<f64>, detail: impl Into<String>) -> Self {
        CheckResult { name: name.to_string(), pass, value, band, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{}: {}", self.name, if self.pass { "pass" } else { "fail" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            n: u32,
            v: Vec<f64>,
        }
        let text = to_json(&S { a: 0.1, n: 3, v: vec![1.0, -2.5] }).unwrap();
        assert!(text.contains("\"a\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"n\": 3"));
        assert!(text.contains("[1.0000000000000000e0, -2.5000000000000000e0]"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
