//! Multi-layer network: stacks layers, routes spikes through competition,
//! weights and ReLU into the next layer, and co-integrates the layer ODEs
//! with the weight dynamics one `dt` at a time.

use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Result, SnnError};
use crate::layer::{detect_spikes_and_reset, rk4_step_with_drive, LayerState, LifParams};
use crate::matrix::{support, DenseMatrix};
use crate::plasticity::{relu, Competition, PlasticityParams, WeightMatrix};
use crate::record::{ProbeTrace, SimulationRecord, WeightSnapshot};
use crate::rng::{self, DOMAIN_NOISE, DOMAIN_WEIGHTS};
use crate::tasks::stream::InputStream;
use crate::topology::{
    build_adjacency, distance_matrix, grid_geometry, line_geometry, AdjacencyMatrix, KernelParams,
    LayerGeometry,
};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Grid {
        width: usize,
        height: usize,
        #[serde(default = "one")]
        spacing: f64,
    },
    Line {
        n: usize,
        #[serde(default = "one")]
        spacing: f64,
    },
    /// Coordinates from a CSV file (`x,y[,z]` per row).
    Csv { path: PathBuf },
    Points { positions: Vec<[f64; 3]> },
}

impl GeometrySpec {
    /// Build the geometry; `wrap` makes grid and line layers toroidal.
    pub fn build(&self, wrap: bool) -> Result<LayerGeometry> {
        let g = match self {
            GeometrySpec::Grid {
                width,
                height,
                spacing,
            } => {
                let g = grid_geometry(*width, *height, *spacing)?;
                if wrap {
                    let p = [*width as f64 * spacing, *height as f64 * spacing, 0.0];
                    g.with_period(p)?
                } else {
                    g
                }
            }
            GeometrySpec::Line { n, spacing } => {
                let g = line_geometry(*n, *spacing)?;
                if wrap {
                    g.with_period([*n as f64 * spacing, 0.0, 0.0])?
                } else {
                    g
                }
            }
            GeometrySpec::Csv { path } => LayerGeometry::from_csv_path(path)?,
            GeometrySpec::Points { positions } => LayerGeometry::from_positions(positions.clone())?,
        };
        if wrap && matches!(self, GeometrySpec::Csv { .. } | GeometrySpec::Points { .. }) {
            return Err(SnnError::invalid(
                "wrap is only supported for grid and line geometries",
            ));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub geometry: GeometrySpec,
    /// Periodic boundaries instead of hard edges.
    #[serde(default)]
    pub wrap: bool,
    pub kernel: KernelParams,
    pub lif: LifParams,
    /// Gain of the spike-input matrix `S^x = gain · I`.
    #[serde(default = "one")]
    pub input_gain: f64,
    #[serde(default)]
    pub input_rule: Competition,
    #[serde(default)]
    pub output_rule: Competition,
    /// Neurons whose voltage and threshold are traced; defaults to the
    /// neuron nearest the layer center.
    #[serde(default)]
    pub probes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightInit {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for WeightInit {
    fn default() -> Self {
        WeightInit { mu: 1.0, sigma: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub amplitude: f64,
    #[serde(default)]
    pub layer: usize,
    /// Noise switches off from this step on.
    #[serde(default)]
    pub stop_step: Option<u64>,
}

fn default_snapshot_every() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub learning: bool,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// Train weight matrix `k` only during steps `[k·s, (k+1)·s)`.
    #[serde(default)]
    pub stage_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub weights: WeightInit,
    pub plasticity: PlasticityParams,
    pub run: RunConfig,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(SnnError::invalid("NetworkConfig: at least one layer required"));
        }
        for (l, spec) in self.layers.iter().enumerate() {
            let ctx = |e: SnnError| SnnError::invalid(format!("layer {l}: {e}"));
            spec.kernel.validate().map_err(ctx)?;
            spec.lif.validate().map_err(ctx)?;
            spec.input_rule.validate().map_err(ctx)?;
            spec.output_rule.validate().map_err(ctx)?;
            if !spec.input_gain.is_finite() {
                return Err(SnnError::invalid(format!("layer {l}: input_gain must be finite")));
            }
        }
        if !(self.run.dt > 0.0 && self.run.dt.is_finite()) {
            return Err(SnnError::invalid("NetworkConfig: dt must be > 0"));
        }
        if !(self.weights.sigma >= 0.0 && self.weights.mu.is_finite()) {
            return Err(SnnError::invalid("NetworkConfig: weight sigma must be >= 0"));
        }
        self.plasticity.validate()?;
        if let Some(noise) = &self.run.noise {
            if !(noise.amplitude >= 0.0 && noise.amplitude.is_finite()) {
                return Err(SnnError::invalid("noise amplitude must be >= 0"));
            }
            if noise.layer >= self.layers.len() {
                return Err(SnnError::invalid(format!(
                    "noise targets layer {} but the network has {} layers",
                    noise.layer,
                    self.layers.len()
                )));
            }
        }
        if self.run.stage_steps == Some(0) {
            return Err(SnnError::invalid("stage_steps must be >= 1"));
        }
        Ok(())
    }
}

/// i.i.d. Gaussian `(mu, sigma)` entries clamped to `[0, w_max]`.
pub fn init_weights(
    n_pre: usize,
    n_post: usize,
    mu: f64,
    sigma: f64,
    w_max: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    let raw = init_weights_unclamped(n_pre, n_post, mu, sigma, seed)?;
    let data = raw.as_slice().iter().map(|w| w.clamp(0.0, w_max)).collect();
    DenseMatrix::from_vec(n_post, n_pre, data)
}

/// The Gaussian draw behind [`init_weights`], before clamping.
pub fn init_weights_unclamped(
    n_pre: usize,
    n_post: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    let normal = Normal::new(mu, sigma)
        .map_err(|e| SnnError::invalid(format!("weight init: {e}")))?;
    let mut rng = rng::stream(seed, DOMAIN_WEIGHTS, 0);
    let data = (0..n_pre * n_post).map(|_| normal.sample(&mut rng)).collect();
    DenseMatrix::from_vec(n_post, n_pre, data)
}

/// Per-step i.i.d. uniform `[0, amplitude)` currents, a pure function of
/// `(seed, step, n)`.
pub fn noise_drive(n: usize, amplitude: f64, seed: u64, step: u64) -> Vec<f64> {
    if amplitude == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = rng::stream(seed, DOMAIN_NOISE, step);
    (0..n).map(|_| amplitude * rng.random::<f64>()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub layers: Vec<LayerState>,
    /// `weights[l]` maps layer `l` to layer `l + 1`.
    pub weights: Vec<WeightMatrix>,
    pub t: f64,
    pub step: u64,
    /// Seed of the noise stream; presentations may override it.
    pub noise_seed: u64,
}

impl NetworkState {
    pub fn layer_times_agree(&self) -> bool {
        self.layers.iter().all(|l| l.t == self.t)
    }
}

enum Weights<'a> {
    Plastic(&'a mut [WeightMatrix]),
    Frozen(&'a [WeightMatrix]),
}

impl Weights<'_> {
    fn get(&self, l: usize) -> &WeightMatrix {
        match self {
            Weights::Plastic(w) => &w[l],
            Weights::Frozen(w) => &w[l],
        }
    }
}

struct BuiltLayer {
    geometry: LayerGeometry,
    adjacency: AdjacencyMatrix,
}

/// A network with its geometry and coupling matrices built once.
pub struct Network {
    config: NetworkConfig,
    layers: Vec<BuiltLayer>,
}

/// Outputs of one step: the (competition-filtered) spike vector of every
/// layer.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub outputs: Vec<Vec<f64>>,
}

impl StepOutput {
    pub fn spiking(&self, layer: usize) -> Vec<usize> {
        support(&self.outputs[layer])
    }
}

impl Network {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let layers = config
            .layers
            .iter()
            .map(|spec| {
                let geometry = spec.geometry.build(spec.wrap)?;
                let adjacency = build_adjacency(&distance_matrix(&geometry), &spec.kernel)?;
                Ok(BuiltLayer {
                    geometry,
                    adjacency,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let net = Network { config, layers };
        for (l, spec) in net.config.layers.iter().enumerate() {
            if let Some(probes) = &spec.probes {
                if let Some(&p) = probes.iter().find(|&&p| p >= net.layer_size(l)) {
                    return Err(SnnError::invalid(format!(
                        "layer {l}: probe neuron {p} out of range"
                    )));
                }
            }
        }
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_size(&self, l: usize) -> usize {
        self.layers[l].geometry.len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        (0..self.n_layers()).map(|l| self.layer_size(l)).collect()
    }

    pub fn geometry(&self, l: usize) -> &LayerGeometry {
        &self.layers[l].geometry
    }

    pub fn adjacency(&self, l: usize) -> &AdjacencyMatrix {
        &self.layers[l].adjacency
    }

    pub fn dt(&self) -> f64 {
        self.config.run.dt
    }

    /// Resting layers and freshly initialized weights.
    pub fn initial_state(&self) -> Result<NetworkState> {
        let run = &self.config.run;
        let init = &self.config.weights;
        let mut weights = Vec::with_capacity(self.n_layers().saturating_sub(1));
        for l in 0..self.n_layers().saturating_sub(1) {
            let seed = rng::derive_seed(run.seed, DOMAIN_WEIGHTS, l as u64);
            let m = init_weights(
                self.layer_size(l),
                self.layer_size(l + 1),
                init.mu,
                init.sigma,
                self.config.plasticity.w_max,
                seed,
            )?;
            weights.push(WeightMatrix::new(m, l, l + 1)?);
        }
        Ok(NetworkState {
            layers: self.resting_layers(),
            weights,
            t: 0.0,
            step: 0,
            noise_seed: run.seed,
        })
    }

    pub fn resting_layers(&self) -> Vec<LayerState> {
        self.config
            .layers
            .iter()
            .enumerate()
            .map(|(l, spec)| LayerState::resting(self.layer_size(l), &spec.lif))
            .collect()
    }

    /// Reset all layers to rest (weights kept) and restart the clock.
    pub fn reset_layers(&self, state: &mut NetworkState) {
        state.layers = self.resting_layers();
        state.t = 0.0;
        state.step = 0;
    }

    pub fn check_state(&self, state: &NetworkState) -> Result<()> {
        ensure_len("network layer count", self.n_layers(), state.layers.len())?;
        ensure_len(
            "network weight count",
            self.n_layers().saturating_sub(1),
            state.weights.len(),
        )?;
        for (l, ls) in state.layers.iter().enumerate() {
            ensure_len("layer state size", self.layer_size(l), ls.len())?;
        }
        for (l, w) in state.weights.iter().enumerate() {
            ensure_len("weight rows (post)", self.layer_size(l + 1), w.n_post())?;
            ensure_len("weight cols (pre)", self.layer_size(l), w.n_pre())?;
        }
        Ok(())
    }

    fn noise_for(
        &self,
        noise: Option<&NoiseSpec>,
        step: u64,
        noise_seed: u64,
        layer: usize,
    ) -> Option<Vec<f64>> {
        let noise = noise?;
        if noise.layer != layer || noise.amplitude == 0.0 {
            return None;
        }
        if noise.stop_step.is_some_and(|s| step >= s) {
            return None;
        }
        Some(noise_drive(
            self.layer_size(layer),
            noise.amplitude,
            noise_seed,
            step,
        ))
    }

    fn learning_active(&self, step: u64, weight_index: usize) -> bool {
        let run = &self.config.run;
        if !run.learning || self.config.plasticity.eta == 0.0 {
            return false;
        }
        match run.stage_steps {
            None => true,
            Some(s) => step / s == weight_index as u64,
        }
    }

    /// Advance every layer and weight matrix by one `dt`.
    ///
    /// Layers are swept in ascending order; layer `l + 1` sees the input
    /// computed from layer `l`'s spikes of this same step.
    pub fn step(&self, state: &mut NetworkState, external: &[f64]) -> Result<StepOutput> {
        self.step_with(state, external, self.config.run.learning)
    }

    /// [`Network::step`] with learning forced on or off.
    pub fn step_with(
        &self,
        state: &mut NetworkState,
        external: &[f64],
        learning: bool,
    ) -> Result<StepOutput> {
        let out = self.advance(
            &mut state.layers,
            Weights::Plastic(&mut state.weights),
            state.step,
            (self.config.run.noise.as_ref(), state.noise_seed),
            external,
            learning,
        )?;
        state.t = state.layers[0].t;
        state.step += 1;
        Ok(out)
    }

    /// Hold `frame` for `steps` steps starting from rest, with `weights`
    /// frozen, and count the spikes of every neuron of every layer. The
    /// configured noise is replaced by `noise`.
    pub fn present_frozen(
        &self,
        weights: &[WeightMatrix],
        frame: &[f64],
        steps: u64,
        noise: Option<&NoiseSpec>,
        noise_seed: u64,
    ) -> Result<Vec<Vec<u32>>> {
        ensure_len(
            "network weight count",
            self.n_layers().saturating_sub(1),
            weights.len(),
        )?;
        let mut layers = self.resting_layers();
        let mut counts: Vec<Vec<u32>> = self.layer_sizes().into_iter().map(|n| vec![0; n]).collect();
        for step in 0..steps {
            let out = self.advance(&mut layers, Weights::Frozen(weights), step, (noise, noise_seed), frame, false)?;
            for (c, y) in counts.iter_mut().zip(&out.outputs) {
                for i in support(y) {
                    c[i] += 1;
                }
            }
        }
        Ok(counts)
    }

    fn advance(
        &self,
        layers: &mut [LayerState],
        mut weights: Weights<'_>,
        step: u64,
        (noise, noise_seed): (Option<&NoiseSpec>, u64),
        external: &[f64],
        learning: bool,
    ) -> Result<StepOutput> {
        ensure_len("external input", self.layer_size(0), external.len())?;
        let dt = self.dt();
        let mut input = self.config.layers[0].input_rule.apply(external)?;
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.n_layers());
        for l in 0..self.n_layers() {
            let spec = &self.config.layers[l];
            if let Some(noise) = self.noise_for(noise, step, noise_seed, l) {
                input.iter_mut().zip(noise).for_each(|(x, n)| *x += n);
            }
            let ls = &mut layers[l];
            let h: Vec<usize> = (0..ls.len()).filter(|&i| ls.spikes[i]).collect();
            let ones = vec![1.0; ls.len()];
            let mut drive = self.layers[l].adjacency.matrix().mul_sparse(&ones, &h)?;
            drive
                .iter_mut()
                .zip(&input)
                .for_each(|(d, x)| *d += spec.input_gain * x);
            rk4_step_with_drive(ls, &drive, &spec.lif, dt).map_err(|e| match e {
                SnnError::Unstable { neuron, t, dt, .. } => SnnError::Unstable {
                    layer: l,
                    neuron,
                    t,
                    dt,
                },
                other => other,
            })?;
            let spikes = detect_spikes_and_reset(ls, &spec.lif)?;
            let h_new: Vec<f64> = spikes.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
            let y = spec.output_rule.apply(&h_new)?;

            if l >= 1 && learning && self.learning_active(step, l - 1) {
                if let Weights::Plastic(w) = &mut weights {
                    self.config
                        .plasticity
                        .apply(&mut w[l - 1], &outputs[l - 1], &y, dt)?;
                }
            }
            if l + 1 < self.n_layers() {
                let z = weights.get(l).forward(&y)?;
                let a = relu(&z);
                input = self.config.layers[l + 1].input_rule.apply(&a)?;
            }
            outputs.push(y);
        }
        Ok(StepOutput { outputs })
    }

    /// Probe neurons per layer (configured, or the layer's center neuron).
    pub fn probes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (l, spec) in self.config.layers.iter().enumerate() {
            match &spec.probes {
                Some(list) => out.extend(list.iter().map(|&n| (l, n))),
                None => out.push((l, self.geometry(l).center_index())),
            }
        }
        out
    }

    /// Run `config.run.steps` steps from the initial state.
    pub fn run(&self, stream: &InputStream) -> Result<(NetworkState, SimulationRecord)> {
        let mut state = self.initial_state()?;
        let record = self.run_from(&mut state, stream, self.config.run.steps)?;
        Ok((state, record))
    }

    /// Run `steps` steps from `state`, recording spikes every step, probe
    /// traces, and weight snapshots every `snapshot_every` steps (plus the
    /// initial one).
    pub fn run_from(
        &self,
        state: &mut NetworkState,
        stream: &InputStream,
        steps: u64,
    ) -> Result<SimulationRecord> {
        self.check_state(state)?;
        stream.check_size(self.layer_size(0))?;
        let probes = self.probes();
        let mut record = SimulationRecord::new(self.dt(), self.layer_sizes());
        record.start_step = state.step;
        let mut traces: Vec<ProbeTrace> = probes
            .iter()
            .map(|&(layer, neuron)| ProbeTrace::new(layer, neuron))
            .collect();
        let sample = |state: &NetworkState, traces: &mut Vec<ProbeTrace>| {
            for tr in traces.iter_mut() {
                let ls = &state.layers[tr.layer];
                tr.push(state.step, state.t, ls.v[tr.neuron], ls.theta[tr.neuron]);
            }
        };
        sample(state, &mut traces);
        record.snapshots.extend(self.snapshot(state));
        let every = self.config.run.snapshot_every;
        let zeros = vec![0.0; self.layer_size(0)];
        for _ in 0..steps {
            let x = stream.frame_at(state.step).unwrap_or(&zeros);
            let out = self.step(state, x).map_err(|e| match e {
                SnnError::Unstable { .. } => e,
                other => SnnError::invalid(format!("step {}: {other}", state.step)),
            })?;
            record.push_step(
                out.outputs
                    .iter()
                    .map(|y| support(y).into_iter().map(|i| i as u32).collect())
                    .collect(),
            );
            sample(state, &mut traces);
            if every > 0 && state.step.is_multiple_of(every) {
                record.snapshots.extend(self.snapshot(state));
            }
        }
        record.probes = traces;
        Ok(record)
    }

    fn snapshot(&self, state: &NetworkState) -> Vec<WeightSnapshot> {
        state
            .weights
            .iter()
            .enumerate()
            .map(|(index, w)| WeightSnapshot {
                step: state.step,
                index,
                weights: w.entries().clone(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plasticity::WeightBound;

    fn lif() -> LifParams {
        LifParams {
            tau_v: 1.0,
            tau_theta: 5.0,
            v_th: 1.0,
            theta_plus: 0.5,
            v_reset: 0.0,
        }
    }

    fn layer(width: usize) -> LayerSpec {
        LayerSpec {
            name: None,
            geometry: GeometrySpec::Grid {
                width,
                height: 1,
                spacing: 1.0,
            },
            wrap: false,
            kernel: KernelParams::new(1.5, 3.0, 0.5, 0.1).unwrap(),
            lif: lif(),
            input_gain: 1.0,
            input_rule: Competition::None,
            output_rule: Competition::None,
            probes: None,
        }
    }

    fn config(widths: &[usize]) -> NetworkConfig {
        NetworkConfig {
            layers: widths.iter().map(|&w| layer(w)).collect(),
            weights: WeightInit::default(),
            plasticity: PlasticityParams {
                eta: 0.5,
                w_max: 4.0,
                bound: WeightBound::Clamp,
            },
            run: RunConfig {
                dt: 0.1,
                steps: 10,
                seed: 3,
                learning: true,
                snapshot_every: 5,
                noise: None,
                stage_steps: None,
            },
        }
    }

    #[test]
    fn init_weights_degenerate_and_seeded() {
        let w = init_weights(3, 2, 0.7, 0.0, 1.0, 1).unwrap();
        assert!(w.as_slice().iter().all(|&v| v == 0.7));
        let w = init_weights(3, 2, 5.0, 0.0, 1.0, 1).unwrap();
        assert!(w.as_slice().iter().all(|&v| v == 1.0));
        assert_eq!(
            init_weights(30, 20, 1.0, 0.5, 2.0, 9).unwrap(),
            init_weights(30, 20, 1.0, 0.5, 2.0, 9).unwrap()
        );
        assert_ne!(
            init_weights(30, 20, 1.0, 0.5, 2.0, 9).unwrap(),
            init_weights(30, 20, 1.0, 0.5, 2.0, 10).unwrap()
        );
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        assert_eq!(noise_drive(5, 0.0, 1, 1), vec![0.0; 5]);
        let a = noise_drive(50, 2.0, 1, 17);
        assert_eq!(a, noise_drive(50, 2.0, 1, 17));
        assert_ne!(a, noise_drive(50, 2.0, 1, 18));
        assert!(a.iter().all(|&x| (0.0..2.0).contains(&x)));
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let net = Network::new(config(&[4, 3])).unwrap();
        let mut state = net.initial_state().unwrap();
        let w0 = state.weights.clone();
        for _ in 0..20 {
            let out = net.step(&mut state, &[0.0; 4]).unwrap();
            assert!(out.outputs.iter().all(|y| y.iter().all(|&v| v == 0.0)));
        }
        assert_eq!(state.weights, w0);
        assert!(state.layers.iter().all(|l| l.v.iter().all(|&v| v == 0.0)));
        assert!(state.layer_times_agree());
        assert_eq!(state.step, 20);
    }

    #[test]
    fn learning_disabled_keeps_weights() {
        let mut cfg = config(&[4, 3]);
        cfg.run.learning = false;
        let net = Network::new(cfg).unwrap();
        let mut state = net.initial_state().unwrap();
        let w0 = state.weights.clone();
        for _ in 0..50 {
            net.step(&mut state, &[5.0; 4]).unwrap();
        }
        assert_eq!(state.weights, w0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(&[2]);
        cfg.layers.clear();
        assert!(Network::new(cfg).is_err());
        let mut cfg = config(&[2]);
        cfg.run.dt = 0.0;
        assert!(Network::new(cfg).is_err());
        let mut cfg = config(&[2]);
        cfg.weights.sigma = -1.0;
        assert!(Network::new(cfg).is_err());
        let mut cfg = config(&[2]);
        cfg.run.noise = Some(NoiseSpec {
            amplitude: 1.0,
            layer: 3,
            stop_step: None,
        });
        assert!(Network::new(cfg).is_err());
    }

    #[test]
    fn zero_steps_records_initial_snapshot_only() {
        let mut cfg = config(&[3, 2]);
        cfg.run.steps = 0;
        let net = Network::new(cfg).unwrap();
        let (_, rec) = net.run(&InputStream::silent()).unwrap();
        assert_eq!(rec.n_steps(), 0);
        assert_eq!(rec.snapshots.len(), 1);
        assert_eq!(rec.snapshots[0].step, 0);
        assert!(rec.probes.iter().all(|p| p.v.len() == 1));
    }

    #[test]
    fn staged_learning_trains_one_pair_at_a_time() {
        let mut cfg = config(&[2, 2, 2]);
        cfg.run.stage_steps = Some(10);
        let net = Network::new(cfg).unwrap();
        assert!(net.learning_active(0, 0));
        assert!(!net.learning_active(0, 1));
        assert!(!net.learning_active(15, 0));
        assert!(net.learning_active(15, 1));
    }
}
