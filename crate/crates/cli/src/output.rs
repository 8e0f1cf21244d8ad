//! Output directory bookkeeping: JSON and CSV writers that checksum every
//! file, the run manifest and histogram emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use corrlab::stats::normal_pdf;

use crate::error::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.json";

/// Where a number came from; embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub budget: usize,
}

impl Provenance {
    pub fn with_budget(&self, budget: usize) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    fn csv_comment(&self) -> String {
        format!(
            "# corrlab {} command={} config_hash={} seed={} budget={}\n",
            self.artifact_version, self.command, self.config_hash, self.seed, self.budget
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Checksums of every deterministic output. `wall_time_seconds` is the only
/// field that differs between identical reruns, so the manifest itself is
/// not listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub artifact_version: String,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    pub wall_time_seconds: f64,
}

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// CSV with a provenance comment line before the header.
    pub fn write_csv<R: Serialize>(
        &mut self,
        name: &str,
        provenance: &Provenance,
        rows: &[R],
    ) -> Result<(), CliError> {
        let mut bytes = provenance.csv_comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        self.write_bytes(name, &bytes)
    }

    /// CSV with a fixed header and numeric rows, for tables whose columns
    /// depend on the system.
    pub fn write_table(
        &mut self,
        name: &str,
        provenance: &Provenance,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<(), CliError> {
        let mut bytes = provenance.csv_comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r.iter().map(|v| v.to_string()))?;
            }
            w.flush()?;
        }
        self.write_bytes(name, &bytes)
    }

    pub fn finish(
        self,
        provenance: &Provenance,
        wall_time_seconds: f64,
    ) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: provenance.command.clone(),
            config_hash: provenance.config_hash.clone(),
            artifact_version: provenance.artifact_version.clone(),
            seed: provenance.seed,
            files: self.files,
            wall_time_seconds,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.dir.join(MANIFEST), bytes)?;
        Ok(manifest)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
    pub normal_density_at_center: f64,
}

/// Equal-width bins over the sample range. A range of zero width is
/// widened to one unit around the value.
pub fn emit_histogram(samples: &[f64], bins: usize) -> Result<Vec<HistogramRow>, CliError> {
    if bins < 2 {
        return Err(CliError::Config {
            field: Some("bins".into()),
            message: format!("need at least 2 bins, got {bins}"),
        });
    }
    if samples.is_empty() {
        return Err(CliError::Numeric("histogram of an empty sample".into()));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(CliError::Numeric("histogram sample is not finite".into()));
    }
    let mut lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let j = (((s - lo) / width) as usize).min(bins - 1);
        counts[j] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(j, count)| {
            let left = lo + j as f64 * width;
            let right = if j + 1 == bins { hi } else { left + width };
            HistogramRow {
                bin_left: left,
                bin_right: right,
                count,
                normal_density_at_center: normal_pdf(0.5 * (left + right)),
            }
        })
        .collect())
}
