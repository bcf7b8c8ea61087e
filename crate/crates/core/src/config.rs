//! JSON experiment files.
//!
//! An experiment file holds the network (`layers`, `weights`, `plasticity`,
//! `run`) plus an optional `task` block selecting the analysis or pipeline
//! that goes with it. Unknown keys are rejected; parse errors carry the key
//! path and the line and column.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SnnError};
use crate::network::{LayerSpec, NetworkConfig, RunConfig, WeightInit};
use crate::plasticity::PlasticityParams;
use crate::tasks::pipeline::MnistSpec;
use crate::tasks::sweep::{SweepSpec, WaveCriteria};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub weights: WeightInit,
    pub plasticity: PlasticityParams,
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Waves(WaveTask),
    Pooling(PoolingTask),
    Mnist(MnistSpec),
    Sweep(SweepSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveTask {
    /// Layers to analyze; all when absent.
    #[serde(default)]
    pub layers: Option<Vec<usize>>,
    #[serde(default)]
    pub criteria: WaveCriteria,
}

fn half() -> f64 {
    0.5
}

fn default_bin_width() -> usize {
    5
}

fn default_spread_factor() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolingTask {
    /// Weight matrix to analyze (`k` maps layer `k` to `k + 1`).
    #[serde(default)]
    pub weight_index: usize,
    /// Pool membership threshold as a fraction of `w_max`.
    #[serde(default = "half")]
    pub threshold_fraction: f64,
    #[serde(default = "default_bin_width")]
    pub bin_width: usize,
    /// A pool is localized when its spread is at most this many excitation
    /// radii of the presynaptic layer.
    #[serde(default = "default_spread_factor")]
    pub spread_factor: f64,
}

impl Default for PoolingTask {
    fn default() -> Self {
        PoolingTask {
            weight_index: 0,
            threshold_fraction: half(),
            bin_width: default_bin_width(),
            spread_factor: default_spread_factor(),
        }
    }
}

impl ExperimentConfig {
    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            layers: self.layers.clone(),
            weights: self.weights,
            plasticity: self.plasticity,
            run: self.run.clone(),
        }
    }

    /// Parse JSON text; `origin` names the source in error messages.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SnnError::Config {
                path,
                message: format!("{origin}: {}", e.into_inner()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read, parse and validate a file. Relative paths inside the file
    /// (CSV geometries, MNIST data) are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(SnnError::MissingArtifact(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json_str(&text, &path.display().to_string())?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve_layer_paths(&mut self.layers, base);
        if let Some(TaskSpec::Mnist(m)) = &mut self.task {
            m.resolve_paths(base);
            if let Some(dev) = &mut m.development {
                resolve_layer_paths(&mut dev.layers, base);
            }
        }
    }

    /// Check every invariant, naming the one violated.
    pub fn validate(&self) -> Result<()> {
        self.network().validate()?;
        let n_layers = self.layers.len();
        match &self.task {
            None => Ok(()),
            Some(TaskSpec::Waves(w)) => {
                if let Some(l) = w.layers.iter().flatten().find(|&&l| l >= n_layers) {
                    return Err(SnnError::invalid(format!(
                        "WaveTask: layer {l} outside a {n_layers}-layer network"
                    )));
                }
                w.criteria.validate()
            }
            Some(TaskSpec::Pooling(p)) => {
                if p.weight_index + 1 >= n_layers {
                    return Err(SnnError::invalid(format!(
                        "PoolingTask: weight_index {} needs at least {} layers",
                        p.weight_index,
                        p.weight_index + 2
                    )));
                }
                if !(p.threshold_fraction > 0.0 && p.threshold_fraction < 1.0) {
                    return Err(SnnError::invalid(
                        "PoolingTask: threshold_fraction must lie in (0, 1)",
                    ));
                }
                if p.bin_width == 0 {
                    return Err(SnnError::invalid("PoolingTask: bin_width must be >= 1"));
                }
                Ok(())
            }
            Some(TaskSpec::Mnist(m)) => m.validate(n_layers),
            Some(TaskSpec::Sweep(s)) => {
                if s.layer >= n_layers {
                    return Err(SnnError::invalid(format!(
                        "SweepSpec: layer {} outside a {n_layers}-layer network",
                        s.layer
                    )));
                }
                s.criteria.validate()
            }
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form: every default filled in and object
    /// keys sorted, so key order and omitted defaults do not matter.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The seed actually used, after an optional override. A development
    /// network is reseeded too.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.run.seed = s;
            if let Some(TaskSpec::Mnist(m)) = &mut self.task {
                if let Some(dev) = &mut m.development {
                    dev.run.seed = s;
                }
            }
        }
        self
    }

    pub fn data_paths(&self) -> Vec<PathBuf> {
        match &self.task {
            Some(TaskSpec::Mnist(m)) => vec![
                m.train_images.clone(),
                m.train_labels.clone(),
                m.test_images.clone(),
                m.test_labels.clone(),
            ],
            _ => Vec::new(),
        }
    }
}

fn resolve_layer_paths(layers: &mut [LayerSpec], base: &Path) {
    for layer in layers {
        if let crate::network::GeometrySpec::Csv { path } = &mut layer.geometry {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}
