//! Checks on the shipped configs under `configs/`.

use wavesnn::config::TaskSpec;
use wavesnn::presets;
use wavesnn::tasks::stream::InputStream;
use wavesnn::tasks::sweep::{regime_sweep, Regime, WaveCriteria};
use wavesnn::tasks::waves::wave_metrics;
use wavesnn::{Network, SimulationRecord};

fn wave_criteria(task: &Option<TaskSpec>) -> WaveCriteria {
    match task {
        Some(TaskSpec::Waves(w)) => w.criteria,
        Some(TaskSpec::Sweep(s)) => s.criteria,
        other => panic!("unexpected task {other:?}"),
    }
}

fn export(record: &SimulationRecord) -> Vec<u8> {
    let mut out = Vec::new();
    record.write_spikes_jsonl(&mut out).unwrap();
    record.write_probes_csv(&mut out).unwrap();
    out
}

#[test]
fn sweep_candidate_is_the_committed_wave_config() {
    let sweep = presets::load(presets::SWEEP).unwrap();
    let Some(TaskSpec::Sweep(spec)) = &sweep.task else {
        panic!("sweep preset has no sweep task");
    };
    let report = regime_sweep(&sweep.network(), spec).unwrap();
    let cell = &report.cells[report.candidate.expect("a robust single-wave cell")];

    let waves = presets::load(presets::WAVES).unwrap();
    let layer = &waves.layers[0];
    assert_eq!(cell.params.r_i, layer.kernel.r_i);
    assert_eq!(cell.params.r_o, layer.kernel.r_o);
    assert_eq!(cell.params.a_i, layer.kernel.a_i);
    assert_eq!(cell.params.a_o, layer.kernel.a_o);
    assert_eq!(cell.params.tau_v, layer.lif.tau_v);
    assert_eq!(cell.params.tau_theta, layer.lif.tau_theta);
    assert_eq!(cell.params.theta_plus, layer.lif.theta_plus);
    assert_eq!(Some(cell.params.noise), waves.run.noise.map(|n| n.amplitude));
}

#[test]
fn wave_config_holds_across_seeds() {
    let base = presets::load(presets::WAVES).unwrap();
    let criteria = wave_criteria(&base.task);
    let radius = base.layers[0].kernel.r_i;
    for seed in 1..=12 {
        let net = Network::new(base.clone().with_seed(Some(seed)).network()).unwrap();
        let (_, record) = net.run(&InputStream::silent()).unwrap();
        let metrics = wave_metrics(&record.raster(0), net.geometry(0), radius).unwrap();
        let s = criteria.summarize(&metrics);
        assert_eq!(criteria.classify(&s), Regime::SingleWave, "seed {seed}: {s:?}");
        assert!(criteria.travels(&s), "seed {seed}: {s:?}");
    }
}

#[test]
fn runs_are_byte_identical_per_seed() {
    let mut cfg = presets::load(presets::WAVES).unwrap();
    cfg.run.steps = 400;
    let run = |seed| {
        let net = Network::new(cfg.clone().with_seed(Some(seed)).network()).unwrap();
        export(&net.run(&InputStream::silent()).unwrap().1)
    };
    let a = run(4);
    assert!(!a.is_empty());
    assert_eq!(a, run(4));
    assert_ne!(a, run(5));
}

#[test]
fn first_layer_ignores_higher_layer_parameters() {
    let mut cfg = presets::load(presets::THREE_LAYER).unwrap();
    cfg.run.steps = 600;
    cfg.plasticity.eta = 0.0;
    let first_layer = |cfg: &wavesnn::config::ExperimentConfig| {
        let net = Network::new(cfg.network()).unwrap();
        net.run(&InputStream::silent()).unwrap().1.raster(0)
    };
    let reference = first_layer(&cfg);
    assert!(reference.iter().any(|s| !s.is_empty()));
    let mut other = cfg.clone();
    for spec in &mut other.layers[1..] {
        spec.kernel.a_i *= 3.0;
        spec.lif.theta_plus = 0.1;
        spec.input_gain *= 5.0;
    }
    assert_eq!(reference, first_layer(&other));
}
