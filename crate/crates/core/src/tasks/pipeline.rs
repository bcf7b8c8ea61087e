//! Unsupervised MNIST pipeline.
//!
//! An optional development network, driven only by noise, self-organizes
//! first and hands its weights to the main network. Training digits can
//! then be streamed through the main network with learning on. Finally
//! every digit is presented to the frozen network, spike rates are read
//! out, and a linear classifier is fitted on them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::network::{Network, NetworkConfig, NetworkState, NoiseSpec};
use crate::par;
use crate::plasticity::WeightMatrix;
use crate::record::SimulationRecord;
use crate::rng::{derive_seed, DOMAIN_PRESENT};
use crate::tasks::analysis::{
    cluster_map, permutation_baseline, tuning_curves, uniform_baseline, Baseline, ClusterMap,
    TuningCurve,
};
use crate::tasks::mnist::{encode_frame, load_mnist_idx, LabeledDataset};
use crate::tasks::readout::{evaluate, train_readout, LinearClassifier, ReadoutParams};
use crate::tasks::stream::InputStream;

fn default_n_train() -> usize {
    2000
}

fn default_n_test() -> usize {
    1000
}

fn default_hold() -> f64 {
    5.0
}

fn default_one() -> f64 {
    1.0
}

fn default_passes() -> usize {
    1
}

fn default_cluster_k() -> usize {
    8
}

fn default_baseline_trials() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnistSpec {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    /// Sim-time each digit is shown.
    #[serde(default = "default_hold")]
    pub hold: f64,
    /// Sim-time of blank input between digits during self-organization.
    #[serde(default)]
    pub gap: f64,
    /// Input current of a full-intensity pixel.
    #[serde(default = "default_one")]
    pub pixel_gain: f64,
    /// Passes over the training digits with learning on, after the
    /// spontaneous phase of `run.steps` steps.
    #[serde(default = "default_passes")]
    pub passes: usize,
    /// Noise-driven network run before any digit is shown. Its final
    /// weights seed the main network, so layer sizes must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub development: Option<NetworkConfig>,
    /// Noise during the frozen presentations; none when absent.
    #[serde(default)]
    pub presentation_noise: Option<NoiseSpec>,
    /// Layer whose rates feed the readout; defaults to the last layer.
    #[serde(default)]
    pub feature_layer: Option<usize>,
    /// Layer whose units get tuning curves; defaults to layer index 1.
    #[serde(default)]
    pub tuning_layer: Option<usize>,
    #[serde(default)]
    pub readout: ReadoutParams,
    /// Neighbors per unit in the cluster-map coherence score.
    #[serde(default = "default_cluster_k")]
    pub cluster_k: usize,
    /// Monte-Carlo relabelings behind the coherence baseline.
    #[serde(default = "default_baseline_trials")]
    pub baseline_trials: usize,
}

impl MnistSpec {
    pub fn validate(&self, n_layers: usize) -> Result<()> {
        if !(self.hold > 0.0 && self.hold.is_finite()) {
            return Err(SnnError::invalid("MnistSpec: hold must be > 0"));
        }
        if !(self.gap >= 0.0 && self.pixel_gain.is_finite()) {
            return Err(SnnError::invalid("MnistSpec: gap must be >= 0 and pixel_gain finite"));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(SnnError::invalid("MnistSpec: n_train and n_test must be >= 1"));
        }
        for (name, l) in [("feature_layer", self.feature_layer), ("tuning_layer", self.tuning_layer)] {
            if l.is_some_and(|l| l >= n_layers) {
                return Err(SnnError::invalid(format!(
                    "MnistSpec: {name} outside a {n_layers}-layer network"
                )));
            }
        }
        if let Some(dev) = &self.development {
            dev.validate()?;
            if dev.layers.len() != n_layers {
                return Err(SnnError::DimensionMismatch {
                    context: "development network layer count",
                    expected: n_layers,
                    found: dev.layers.len(),
                });
            }
        }
        if self.cluster_k == 0 || self.baseline_trials < 2 {
            return Err(SnnError::invalid(
                "MnistSpec: cluster_k must be >= 1 and baseline_trials >= 2",
            ));
        }
        self.readout.validate()
    }

    pub fn feature_layer(&self, n_layers: usize) -> usize {
        self.feature_layer.unwrap_or(n_layers - 1)
    }

    pub fn tuning_layer(&self, n_layers: usize) -> usize {
        self.tuning_layer.unwrap_or(1.min(n_layers - 1))
    }

    /// Resolve relative data paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.train_images,
            &mut self.train_labels,
            &mut self.test_images,
            &mut self.test_labels,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn load_train(&self) -> Result<LabeledDataset> {
        Ok(load_mnist_idx(&self.train_images, &self.train_labels)?.slice(0, self.n_train))
    }

    pub fn load_test(&self) -> Result<LabeledDataset> {
        Ok(load_mnist_idx(&self.test_images, &self.test_labels)?.slice(0, self.n_test))
    }

    pub fn hold_steps(&self, dt: f64) -> u64 {
        (self.hold / dt).round().max(1.0) as u64
    }
}

/// Input-current frames for every image of `data`.
pub fn frames(data: &LabeledDataset, n_inputs: usize, gain: f64) -> Result<Vec<Vec<f64>>> {
    data.images
        .iter()
        .map(|img| encode_frame(img, n_inputs, gain))
        .collect()
}

/// Fresh state of `net`, or the state after the development phase when one
/// is configured (returned with its recording).
pub fn developed_state(
    net: &Network,
    spec: &MnistSpec,
) -> Result<(NetworkState, Option<SimulationRecord>)> {
    let mut state = net.initial_state()?;
    let Some(dev) = &spec.development else {
        return Ok((state, None));
    };
    let dev_net = Network::new(dev.clone())?;
    for (l, (&want, got)) in net.layer_sizes().iter().zip(dev_net.layer_sizes()).enumerate() {
        if want != got {
            return Err(SnnError::DimensionMismatch {
                context: if l == 0 {
                    "development layer 0 size"
                } else {
                    "development layer size"
                },
                expected: want,
                found: got,
            });
        }
    }
    let (dev_state, record) = dev_net.run(&InputStream::silent())?;
    state.weights = dev_state.weights;
    Ok((state, Some(record)))
}

/// Self-organize: `run.steps` steps of spontaneous (noise-driven)
/// activity, then `frames` streamed `passes` times, learning throughout.
pub fn self_organize(
    net: &Network,
    state: &mut NetworkState,
    frames: Vec<Vec<f64>>,
    spec: &MnistSpec,
) -> Result<SimulationRecord> {
    let spontaneous = net.config().run.steps;
    let mut record = net.run_from(state, &InputStream::silent(), spontaneous)?;
    if spec.passes > 0 {
        let stream = InputStream::new(
            std::iter::repeat_n(frames, spec.passes).flatten().collect(),
            spec.hold,
            spec.gap,
            net.dt(),
        )?
        .starting_at(state.step);
        let steps = stream.total_steps();
        record.append(net.run_from(state, &stream, steps)?);
    }
    Ok(record)
}

/// Spike rates of every layer for each frame shown to the frozen network.
/// `split` separates the noise streams of different image sets.
pub fn frozen_rates(
    net: &Network,
    weights: &[WeightMatrix],
    frames: &[Vec<f64>],
    hold_steps: u64,
    noise: Option<&NoiseSpec>,
    seed: u64,
    split: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let base = derive_seed(seed, DOMAIN_PRESENT, split);
    let duration = hold_steps as f64 * net.dt();
    let indexed: Vec<(usize, &Vec<f64>)> = frames.iter().enumerate().collect();
    par::map_collect(&indexed, |&(i, frame)| {
        let counts = net.present_frozen(
            weights,
            frame,
            hold_steps,
            noise,
            derive_seed(base, DOMAIN_PRESENT, i as u64),
        )?;
        Ok(counts
            .into_iter()
            .map(|c| c.into_iter().map(|k| k as f64 / duration).collect())
            .collect())
    })
    .into_iter()
    .collect()
}

/// Everything the MNIST experiment produces after self-organization.
#[derive(Debug, Clone)]
pub struct MnistOutcome {
    pub classifier: LinearClassifier,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub feature_layer: usize,
    pub tuning_layer: usize,
    /// Tuning curves of the tuning layer's units, from test presentations.
    pub curves: Vec<TuningCurve>,
    pub train_features: Vec<Vec<f64>>,
    pub test_features: Vec<Vec<f64>>,
}

impl MnistOutcome {
    /// Number of classes preferred by at least one unit.
    pub fn specialized_classes(&self) -> usize {
        let mut seen = vec![false; self.classifier.n_classes.max(10)];
        for c in self.curves.iter().filter_map(TuningCurve::peak) {
            seen[c] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Rates of the feature layer and of the tuning layer for one image set.
#[derive(Debug, Clone)]
pub struct SetResponses {
    pub features: Vec<Vec<f64>>,
    pub tuning: Vec<Vec<f64>>,
}

/// Image sets get distinct noise streams.
pub const TRAIN_SPLIT: u64 = 0;
pub const TEST_SPLIT: u64 = 1;

/// Present every image of `data` to the frozen network.
pub fn responses(
    net: &Network,
    weights: &[WeightMatrix],
    spec: &MnistSpec,
    data: &LabeledDataset,
    split: u64,
) -> Result<SetResponses> {
    let n_layers = net.n_layers();
    let (fl, tl) = (spec.feature_layer(n_layers), spec.tuning_layer(n_layers));
    let frames = frames(data, net.layer_size(0), spec.pixel_gain)?;
    let hold = spec.hold_steps(net.dt());
    let rates = frozen_rates(
        net,
        weights,
        &frames,
        hold,
        spec.presentation_noise.as_ref(),
        net.config().run.seed,
        split,
    )?;
    let mut features = Vec::with_capacity(rates.len());
    let mut tuning = Vec::with_capacity(rates.len());
    for mut r in rates {
        tuning.push(r[tl].clone());
        features.push(std::mem::take(&mut r[fl]));
    }
    Ok(SetResponses { features, tuning })
}

/// Present both image sets to the frozen network, train the readout on the
/// training rates and score it on both sets.
pub fn readout_stage(
    net: &Network,
    weights: &[WeightMatrix],
    spec: &MnistSpec,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<MnistOutcome> {
    let n_layers = net.n_layers();
    let train_r = responses(net, weights, spec, train, TRAIN_SPLIT)?;
    let test_r = responses(net, weights, spec, test, TEST_SPLIT)?;
    let classifier = train_readout(&train_r.features, &train.labels, &spec.readout)?;
    let train_accuracy = evaluate(&classifier, &train_r.features, &train.labels)?;
    let test_accuracy = evaluate(&classifier, &test_r.features, &test.labels)?;
    let curves = tuning_curves(&test_r.tuning, &test.labels, 10)?;
    Ok(MnistOutcome {
        classifier,
        train_accuracy,
        test_accuracy,
        feature_layer: spec.feature_layer(n_layers),
        tuning_layer: spec.tuning_layer(n_layers),
        curves,
        train_features: train_r.features,
        test_features: test_r.features,
    })
}

/// Cluster map of the tuning layer with its random-label baselines.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub map: ClusterMap,
    /// Labels shuffled over the responsive units.
    pub permutation: Option<Baseline>,
    /// Labels drawn uniformly over ten classes.
    pub uniform: Option<Baseline>,
}

impl ClusterReport {
    /// Standard deviations of the permutation baseline by which the
    /// observed coherence exceeds its mean.
    pub fn z_score(&self) -> Option<f64> {
        Some(self.permutation?.z_score(self.map.coherence?))
    }
}

pub fn cluster_report(net: &Network, outcome: &MnistOutcome, spec: &MnistSpec) -> Result<ClusterReport> {
    let geometry = net.geometry(outcome.tuning_layer);
    let map = cluster_map(&outcome.curves, geometry, spec.cluster_k)?;
    let seed = net.config().run.seed;
    let permutation = permutation_baseline(&map, geometry, spec.baseline_trials, seed).ok();
    let uniform = uniform_baseline(&map, geometry, 10, spec.baseline_trials, seed).ok();
    Ok(ClusterReport {
        map,
        permutation,
        uniform,
    })
}
