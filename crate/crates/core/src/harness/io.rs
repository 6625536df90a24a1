use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::metrics::{MetricsRow, Summary};
use crate::deep_esn::DeepEsn;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub code_version: String,
    pub subcommand: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub outputs: Vec<String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn begin(subcommand: &str, config_hash: &str, seeds: &[u64]) -> Self {
        RunManifest {
            config_hash: config_hash.to_string(),
            seeds: seeds.to_vec(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            started_unix_s: unix_now(),
            finished_unix_s: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, outputs: &[&Path]) {
        self.finished_unix_s = unix_now();
        self.outputs = outputs.iter().map(|p| file_name(p)).collect();
    }
}

pub fn file_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// `dir/stem.<suffix>` next to `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Checkpoint(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Checkpoint(format!("{other:?}")),
    })?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Single-row CSV with `<metric>_mean` and `<metric>_std` columns.
pub fn write_summary(path: &Path, summary: &Summary, manifest: &str) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(Error::from)?;
    let mut header = vec!["rows".to_string()];
    let mut values = vec![summary.rows.to_string()];
    for (name, s) in &summary.stats {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_std"));
        values.push(s.mean.to_string());
        values.push(s.std.to_string());
    }
    header.push("manifest".into());
    values.push(manifest.into());
    w.write_record(&header)?;
    w.write_record(&values)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes metric rows, their one-row summary and the manifest next to `out`.
/// Returns the summary path.
pub fn write_run(out: &Path, rows: &[MetricsRow], summary: &Summary, manifest: &mut RunManifest) -> Result<PathBuf> {
    let summary_path = sibling(out, "summary.csv");
    let mpath = manifest_path(out);
    write_csv(out, rows)?;
    write_summary(&summary_path, summary, &file_name(&mpath))?;
    manifest.finish(&[out, &summary_path]);
    write_json(&mpath, manifest)?;
    Ok(summary_path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelIndex {
    pub config_hash: String,
    pub seed: u64,
    pub uav_count: usize,
}

fn model_path(dir: &Path, j: usize) -> PathBuf {
    dir.join(format!("uav_{j}.esn"))
}

pub fn save_models(dir: &Path, models: &[DeepEsn], config_hash: &str, seed: u64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (j, m) in models.iter().enumerate() {
        let p = model_path(dir, j);
        fs::write(&p, m.to_checkpoint(config_hash)?).map_err(|e| Error::io(&p, e))?;
    }
    write_json(
        &dir.join("models.json"),
        &ModelIndex {
            config_hash: config_hash.to_string(),
            seed,
            uav_count: models.len(),
        },
    )
}

/// Loads every model in `dir`. With `expected_hash` set, checkpoints written
/// under another configuration are refused.
pub fn load_models(dir: &Path, expected_hash: Option<&str>) -> Result<(Vec<DeepEsn>, ModelIndex)> {
    let index: ModelIndex = read_json(&dir.join("models.json"))?;
    if let Some(h) = expected_hash {
        if h != index.config_hash {
            return Err(Error::HashMismatch {
                expected: h.to_string(),
                found: index.config_hash,
            });
        }
    }
    let models = (0..index.uav_count)
        .map(|j| {
            let p = model_path(dir, j);
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            Ok(DeepEsn::from_checkpoint(&bytes, expected_hash)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((models, index))
}
