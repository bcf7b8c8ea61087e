//! The experiment files shipped in the repository's `configs/` directory.

use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Single-layer wave config chosen by the regime sweep.
pub const WAVES: &str = "waves.json";
/// Sweep grid around the wave config.
pub const SWEEP: &str = "sweep.json";
/// Three layers with the first layer's drive removed halfway through.
pub const THREE_LAYER: &str = "three_layer.json";
pub const POOLING: &str = "pooling.json";
pub const MNIST: &str = "mnist.json";

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::load(configs_dir().join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_parse() {
        for name in [WAVES, SWEEP, THREE_LAYER, POOLING, MNIST] {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.task.is_some(), "{name}");
        }
    }
}
