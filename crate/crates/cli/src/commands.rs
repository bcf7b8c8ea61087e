//! One function per subcommand. Each writes its artifacts through an
//! [`OutDir`] and returns the manifest it wrote.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use wavesnn::config::{ExperimentConfig, PoolingTask, TaskSpec, WaveTask};
use wavesnn::network::Network;
use wavesnn::record::{load_matrix_csv, read_spikes_jsonl, SimulationRecord};
use wavesnn::tasks::analysis::{pool_report, Baseline};
use wavesnn::tasks::pipeline::{self, MnistSpec, TEST_SPLIT};
use wavesnn::tasks::readout::{evaluate as score, LinearClassifier};
use wavesnn::tasks::stream::InputStream;
use wavesnn::tasks::sweep::{regime_sweep, Regime, WaveCriteria};
use wavesnn::tasks::waves::{wave_metrics, WaveSummary};
use wavesnn::WeightMatrix;

use crate::error::{CliError, CliResult};
use crate::output::{final_name, snapshot_name, OutDir, RunManifest};

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub snapshot_every: Option<u64>,
}

impl Common {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?.with_seed(self.seed);
        if let Some(n) = self.snapshot_every {
            cfg.run.snapshot_every = n;
        }
        Ok(cfg)
    }
}

fn manifest(cfg: &ExperimentConfig, command: &str, steps: (u64, u64)) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        seed: cfg.run.seed,
        start_time: steps.0 as f64 * cfg.run.dt,
        end_time: steps.1 as f64 * cfg.run.dt,
        start_step: steps.0,
        end_step: steps.1,
        artifacts: Vec::new(),
    }
}

fn mnist_spec<'a>(cfg: &'a ExperimentConfig, command: &'static str) -> CliResult<&'a MnistSpec> {
    match &cfg.task {
        Some(TaskSpec::Mnist(m)) => Ok(m),
        _ => Err(CliError::WrongTask {
            command,
            task: "mnist",
        }),
    }
}

fn write_geometry(out: &mut OutDir, net: &Network) -> CliResult<()> {
    for l in 0..net.n_layers() {
        out.write(&format!("geometry/l{l}.csv"), |w| {
            writeln!(w, "neuron,x,y,z")?;
            for (i, p) in net.geometry(l).positions().iter().enumerate() {
                writeln!(w, "{i},{:?},{:?},{:?}", p[0], p[1], p[2])?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn write_record(out: &mut OutDir, record: &SimulationRecord, spikes: bool) -> CliResult<()> {
    if spikes && record.n_steps() > 0 {
        out.write("spikes.jsonl", |w| Ok(record.write_spikes_jsonl(w)?))?;
        out.write("probes.csv", |w| Ok(record.write_probes_csv(w)?))?;
    }
    for snap in &record.snapshots {
        out.matrix(&snapshot_name(snap.index, snap.step), &snap.weights, snap.step)?;
    }
    Ok(())
}

/// Run with learning off; exports spikes, probe traces and snapshots.
pub fn simulate(c: &Common) -> CliResult<RunManifest> {
    let mut cfg = c.load()?;
    cfg.run.learning = false;
    let net = Network::new(cfg.network())?;
    let (state, record) = net.run(&InputStream::silent())?;
    let mut out = OutDir::create(&c.out)?;
    write_record(&mut out, &record, true)?;
    if record.n_steps() > 0 {
        write_geometry(&mut out, &net)?;
    }
    out.finish(manifest(&cfg, "simulate", (0, state.step)))
}

/// Run with learning on and export the weights. MNIST configs run their
/// development network first; its clock is not counted in the manifest.
pub fn selforganize(c: &Common, spikes: bool) -> CliResult<RunManifest> {
    let mut cfg = c.load()?;
    cfg.run.learning = true;
    let net = Network::new(cfg.network())?;
    let (state, record) = match &cfg.task {
        Some(TaskSpec::Mnist(spec)) => {
            let (mut state, _) = pipeline::developed_state(&net, spec)?;
            let frames = if spec.passes > 0 {
                pipeline::frames(&spec.load_train()?, net.layer_size(0), spec.pixel_gain)?
            } else {
                Vec::new()
            };
            let record = pipeline::self_organize(&net, &mut state, frames, spec)?;
            (state, record)
        }
        _ => net.run(&InputStream::silent())?,
    };
    let mut out = OutDir::create(&c.out)?;
    write_record(&mut out, &record, spikes)?;
    for (k, w) in state.weights.iter().enumerate() {
        out.matrix(&final_name(k), w.entries(), state.step)?;
    }
    write_geometry(&mut out, &net)?;
    out.finish(manifest(&cfg, "selforganize", (0, state.step)))
}

/// Final weights of a selforganize output directory.
pub fn load_weights(net: &Network, dir: &Path) -> CliResult<Vec<WeightMatrix>> {
    let mut weights = Vec::new();
    for k in 0..net.n_layers().saturating_sub(1) {
        let (m, _) = load_matrix_csv(dir.join(final_name(k)))?;
        let (rows, cols) = (net.layer_size(k + 1), net.layer_size(k));
        if m.rows() != rows || m.cols() != cols {
            return Err(CliError::Usage(format!(
                "{}: expected a {rows}x{cols} matrix, found {}x{}",
                final_name(k),
                m.rows(),
                m.cols()
            )));
        }
        weights.push(WeightMatrix::new(m, k, k + 1)?);
    }
    Ok(weights)
}

#[derive(Serialize)]
struct ReadoutSummary {
    train_accuracy: f64,
    test_accuracy: f64,
    n_train: usize,
    n_test: usize,
    feature_layer: usize,
    tuning_layer: usize,
    specialized_classes: usize,
    coherence: Option<f64>,
    permutation_baseline: Option<Baseline>,
    uniform_baseline: Option<Baseline>,
    coherence_z: Option<f64>,
}

/// Present both image sets to the frozen network, fit the readout, and
/// export it with tuning curves and the cluster map.
pub fn train_readout(c: &Common, weights_dir: &Path) -> CliResult<RunManifest> {
    let cfg = c.load()?;
    let spec = mnist_spec(&cfg, "train-readout")?;
    let net = Network::new(cfg.network())?;
    let weights = load_weights(&net, weights_dir)?;
    let (train, test) = (spec.load_train()?, spec.load_test()?);
    let outcome = pipeline::readout_stage(&net, &weights, spec, &train, &test)?;
    let clusters = pipeline::cluster_report(&net, &outcome, spec)?;
    let mut out = OutDir::create(&c.out)?;
    out.json("classifier.json", &outcome.classifier)?;
    out.json(
        "readout.json",
        &ReadoutSummary {
            train_accuracy: outcome.train_accuracy,
            test_accuracy: outcome.test_accuracy,
            n_train: train.len(),
            n_test: test.len(),
            feature_layer: outcome.feature_layer,
            tuning_layer: outcome.tuning_layer,
            specialized_classes: outcome.specialized_classes(),
            coherence: clusters.map.coherence,
            permutation_baseline: clusters.permutation,
            uniform_baseline: clusters.uniform,
            coherence_z: clusters.z_score(),
        },
    )?;
    out.write("tuning_curves.csv", |w| {
        let header: Vec<String> = (0..10).map(|c| format!("c{c}")).collect();
        writeln!(w, "unit,{}", header.join(","))?;
        for (u, curve) in outcome.curves.iter().enumerate() {
            let vals: Vec<String> = curve.values.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{u},{}", vals.join(","))?;
        }
        Ok(())
    })?;
    out.write("cluster_map.csv", |w| {
        writeln!(w, "unit,x,y,z,label")?;
        for (u, (p, l)) in clusters.map.positions.iter().zip(&clusters.map.labels).enumerate() {
            let label = l.map(|l| l.to_string()).unwrap_or_default();
            writeln!(w, "{u},{:?},{:?},{:?},{label}", p[0], p[1], p[2])?;
        }
        Ok(())
    })?;
    out.finish(manifest(&cfg, "train-readout", (0, 0)))
}

#[derive(Serialize)]
struct Evaluation {
    test_accuracy: f64,
    n_test: usize,
}

/// Score a trained classifier on the test images.
pub fn evaluate(c: &Common, weights_dir: &Path, classifier: &Path) -> CliResult<RunManifest> {
    let cfg = c.load()?;
    let spec = mnist_spec(&cfg, "evaluate")?;
    let classifier = LinearClassifier::load(classifier)?;
    let net = Network::new(cfg.network())?;
    let weights = load_weights(&net, weights_dir)?;
    let test = spec.load_test()?;
    let r = pipeline::responses(&net, &weights, spec, &test, TEST_SPLIT)?;
    let test_accuracy = score(&classifier, &r.features, &test.labels)?;
    let mut out = OutDir::create(&c.out)?;
    out.json(
        "evaluation.json",
        &Evaluation {
            test_accuracy,
            n_test: test.len(),
        },
    )?;
    out.finish(manifest(&cfg, "evaluate", (0, 0)))
}

#[derive(Serialize)]
struct LayerWaves {
    layer: usize,
    regime: Regime,
    travels: bool,
    summary: WaveSummary,
}

#[derive(Serialize)]
struct PoolSummary {
    weight_index: usize,
    threshold: f64,
    spread_limit: f64,
    localized_fraction: f64,
    modal_bin: usize,
    modal_fraction: f64,
}

#[derive(Serialize)]
struct Analysis {
    waves: Vec<LayerWaves>,
    pools: Vec<PoolSummary>,
}

/// Wave metrics from an exported raster and pool statistics from exported
/// weights, whichever the run directory holds.
pub fn analyze(c: &Common, run_dir: &Path) -> CliResult<RunManifest> {
    let cfg = c.load()?;
    let net = Network::new(cfg.network())?;
    let run = RunManifest::load(run_dir)?;
    let has = |a: &str| run.artifacts.iter().any(|x| x == a);
    let mut out = OutDir::create(&c.out)?;
    let mut analysis = Analysis {
        waves: Vec::new(),
        pools: Vec::new(),
    };

    if has("spikes.jsonl") {
        let file = BufReader::new(File::open(run_dir.join("spikes.jsonl"))?);
        let steps = (run.end_step - run.start_step) as usize;
        let record = read_spikes_jsonl(file, net.dt(), &net.layer_sizes(), Some(steps))?;
        let task = match &cfg.task {
            Some(TaskSpec::Waves(w)) => w.clone(),
            _ => WaveTask::default(),
        };
        let criteria: WaveCriteria = task.criteria;
        let layers = task.layers.unwrap_or_else(|| (0..net.n_layers()).collect());
        for l in layers {
            let radius = cfg.layers[l].kernel.r_i;
            let metrics = wave_metrics(&record.raster(l), net.geometry(l), radius)?;
            out.write(&format!("wave_metrics_l{l}.jsonl"), |w| {
                for (k, m) in metrics.iter().enumerate() {
                    serde_json::to_writer(
                        &mut *w,
                        &serde_json::json!({
                            "step": k,
                            "active_fraction": m.active_fraction,
                            "centroid": m.centroid,
                            "components": m.components,
                        }),
                    )?;
                    writeln!(w)?;
                }
                Ok(())
            })?;
            let summary = criteria.summarize(&metrics);
            analysis.waves.push(LayerWaves {
                layer: l,
                regime: criteria.classify(&summary),
                travels: criteria.travels(&summary),
                summary,
            });
        }
    }

    let pooling = match &cfg.task {
        Some(TaskSpec::Pooling(p)) => p.clone(),
        _ => PoolingTask::default(),
    };
    for k in 0..net.n_layers().saturating_sub(1) {
        if !has(&final_name(k)) {
            continue;
        }
        let (m, _) = load_matrix_csv(run_dir.join(final_name(k)))?;
        let threshold = pooling.threshold_fraction * cfg.plasticity.w_max;
        let report = pool_report(&m, net.geometry(k), threshold, pooling.bin_width)?;
        let limit = pooling.spread_factor * cfg.layers[k].kernel.r_i;
        out.write(&format!("pool_sizes_w{k}.csv"), |w| {
            writeln!(w, "unit,size,spread")?;
            for (u, (s, r)) in report.sizes.iter().zip(&report.spreads).enumerate() {
                let r = r.map(|r| format!("{r:?}")).unwrap_or_default();
                writeln!(w, "{u},{s},{r}")?;
            }
            Ok(())
        })?;
        let hist = &report.histogram;
        out.write(&format!("pool_histogram_w{k}.csv"), |w| {
            writeln!(w, "bin_start,bin_end,count")?;
            for (b, n) in hist.counts.iter().enumerate() {
                writeln!(w, "{},{},{n}", b * hist.bin_width, (b + 1) * hist.bin_width)?;
            }
            Ok(())
        })?;
        analysis.pools.push(PoolSummary {
            weight_index: k,
            threshold,
            spread_limit: limit,
            localized_fraction: report.localized_fraction(limit),
            modal_bin: hist.modal_bin(),
            modal_fraction: hist.modal_fraction(),
        });
    }

    if analysis.waves.is_empty() && analysis.pools.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no spikes.jsonl or final weights to analyze",
            run_dir.display()
        )));
    }
    out.json("analysis.json", &analysis)?;
    out.finish(manifest(&cfg, "analyze", (run.start_step, run.end_step)))
}

/// Regime sweep; also writes the candidate cell as a runnable config.
pub fn sweep(c: &Common) -> CliResult<RunManifest> {
    let cfg = c.load()?;
    let spec = match &cfg.task {
        Some(TaskSpec::Sweep(s)) => s,
        _ => {
            return Err(CliError::WrongTask {
                command: "sweep",
                task: "sweep",
            })
        }
    };
    let base = cfg.network();
    let report = regime_sweep(&base, spec)?;
    let mut out = OutDir::create(&c.out)?;
    out.json("sweep_report.json", &report)?;
    out.write("sweep_cells.csv", |w| {
        writeln!(
            w,
            "cell,r_i,r_o,a_i,a_o,tau_v,tau_theta,theta_plus,noise,regime,robust,min_margin"
        )?;
        for (i, cell) in report.cells.iter().enumerate() {
            let p = &cell.params;
            let margin = cell
                .runs
                .iter()
                .map(|r| spec.criteria.margin(&r.summary))
                .fold(f64::INFINITY, f64::min);
            writeln!(
                w,
                "{i},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{margin:?}",
                p.r_i,
                p.r_o,
                p.a_i,
                p.a_o,
                p.tau_v,
                p.tau_theta,
                p.theta_plus,
                p.noise,
                cell.regime.as_str(),
                cell.is_robust_wave()
            )?;
        }
        Ok(())
    })?;
    if let Some(i) = report.candidate {
        let net = report.cells[i]
            .params
            .network_config(&base, spec.layer, cfg.run.seed);
        let candidate = ExperimentConfig {
            layers: net.layers,
            weights: net.weights,
            plasticity: net.plasticity,
            run: net.run,
            task: Some(TaskSpec::Waves(WaveTask {
                layers: None,
                criteria: spec.criteria,
            })),
        };
        out.write("candidate_config.json", |w| {
            writeln!(w, "{}", candidate.to_json_pretty())?;
            Ok(())
        })?;
    }
    out.finish(manifest(&cfg, "sweep", (0, cfg.run.steps)))
}
