//! Output directory bookkeeping: every file a command writes goes through
//! [`OutDir`], which lists it in the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavesnn::matrix::DenseMatrix;
use wavesnn::record::write_matrix_csv;

use crate::error::CliResult;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    /// SHA-256 of the canonical config after the seed override.
    pub config_hash: String,
    pub seed: u64,
    pub start_time: f64,
    pub end_time: f64,
    pub start_step: u64,
    pub end_step: u64,
    /// Paths relative to the output directory, `/`-separated, sorted.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Err(wavesnn::SnnError::MissingArtifact(path).into());
        }
        let text = fs::read_to_string(&path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn register(&mut self, rel: &str) -> CliResult<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        if !self.artifacts.iter().any(|a| a == rel) {
            self.artifacts.push(rel.to_string());
        }
        Ok(path)
    }

    /// Write `rel` through `body`.
    pub fn write(
        &mut self,
        rel: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>,
    ) -> CliResult<()> {
        let path = self.register(rel)?;
        let mut w = BufWriter::new(File::create(path)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        self.write(rel, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn matrix(&mut self, rel: &str, m: &DenseMatrix, step: u64) -> CliResult<()> {
        self.write(rel, |w| Ok(write_matrix_csv(m, step, w)?))
    }

    /// Write the manifest; it lists every artifact written so far.
    pub fn finish(mut self, mut manifest: RunManifest) -> CliResult<RunManifest> {
        self.artifacts.sort();
        manifest.artifacts = self.artifacts;
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.root.join(MANIFEST), text + "\n")?;
        Ok(manifest)
    }
}

pub fn snapshot_name(index: usize, step: u64) -> String {
    format!("weights/w{index}_step{step:08}.csv")
}

pub fn final_name(index: usize) -> String {
    format!("weights/w{index}_final.csv")
}
