//! Grid search over single-layer dynamics, classifying each cell's wave
//! regime and nominating the most robust single-wave cell.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::network::{Network, NetworkConfig, NoiseSpec};
use crate::par;
use crate::tasks::stream::InputStream;
use crate::tasks::waves::{summarize, wave_metrics, WaveSummary};

/// Values to try per parameter; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub r_i: Vec<f64>,
    pub r_o: Vec<f64>,
    pub a_i: Vec<f64>,
    pub a_o: Vec<f64>,
    pub tau_v: Vec<f64>,
    pub tau_theta: Vec<f64>,
    pub theta_plus: Vec<f64>,
    pub noise: Vec<f64>,
}

fn default_warmup() -> usize {
    200
}

fn default_band() -> [f64; 2] {
    [0.01, 0.30]
}

fn default_window() -> usize {
    500
}

fn default_max_variance() -> f64 {
    1.0
}

fn default_min_displacement() -> f64 {
    5.0
}

/// How a wave recording is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveCriteria {
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    /// Allowed active fraction `[low, high]` at every post-warm-up step.
    #[serde(default = "default_band")]
    pub band: [f64; 2],
    /// Window (steps) for the centroid displacement test.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Component-count variance above which waves count as split/merge.
    #[serde(default = "default_max_variance")]
    pub max_component_variance: f64,
    #[serde(default = "default_min_displacement")]
    pub min_displacement: f64,
}

impl Default for WaveCriteria {
    fn default() -> Self {
        WaveCriteria {
            warmup: default_warmup(),
            band: default_band(),
            window: default_window(),
            max_component_variance: default_max_variance(),
            min_displacement: default_min_displacement(),
        }
    }
}

impl WaveCriteria {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.band;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(SnnError::invalid(format!(
                "WaveCriteria: band must satisfy 0 <= low <= high <= 1, got [{lo}, {hi}]"
            )));
        }
        if self.window == 0 {
            return Err(SnnError::invalid("WaveCriteria: window must be >= 1"));
        }
        Ok(())
    }

    pub fn summarize(&self, metrics: &[crate::tasks::waves::WaveStepMetrics]) -> WaveSummary {
        summarize(metrics, self.warmup, (self.band[0], self.band[1]), self.window)
    }

    pub fn classify(&self, s: &WaveSummary) -> Regime {
        let [lo, hi] = self.band;
        if s.median_components > 1.0 || s.component_variance > self.max_component_variance {
            Regime::SplitMerge
        } else if s.mean_fraction < lo {
            Regime::Quiescent
        } else if s.mean_fraction > hi {
            Regime::Saturated
        } else if s.in_band == 1.0 && s.median_components == 1.0 {
            Regime::SingleWave
        } else if s.min_fraction < lo {
            Regime::Quiescent
        } else {
            Regime::Saturated
        }
    }

    /// Whether a single-wave summary also moves far enough.
    pub fn travels(&self, s: &WaveSummary) -> bool {
        s.min_window_displacement >= self.min_displacement
    }

    /// Smallest log-ratio distance of the fraction range from the band
    /// edges; larger is safer.
    pub fn margin(&self, s: &WaveSummary) -> f64 {
        let [lo, hi] = self.band;
        (s.min_fraction / lo).ln().min((hi / s.max_fraction).ln())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Base-config layer whose dynamics are swept; it is simulated alone.
    #[serde(default)]
    pub layer: usize,
    #[serde(default)]
    pub grid: SweepGrid,
    /// Seeds per cell; empty means the base config's seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub criteria: WaveCriteria,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SingleWave,
    SplitMerge,
    Quiescent,
    Saturated,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SingleWave => "single_wave",
            Regime::SplitMerge => "split_merge",
            Regime::Quiescent => "quiescent",
            Regime::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub r_i: f64,
    pub r_o: f64,
    pub a_i: f64,
    pub a_o: f64,
    pub tau_v: f64,
    pub tau_theta: f64,
    pub theta_plus: f64,
    pub noise: f64,
}

impl CellParams {
    /// Single-layer network for this cell, built from `base.layers[layer]`.
    pub fn network_config(&self, base: &NetworkConfig, layer: usize, seed: u64) -> NetworkConfig {
        let mut spec = base.layers[layer].clone();
        spec.kernel.r_i = self.r_i;
        spec.kernel.r_o = self.r_o;
        spec.kernel.a_i = self.a_i;
        spec.kernel.a_o = self.a_o;
        spec.lif.tau_v = self.tau_v;
        spec.lif.tau_theta = self.tau_theta;
        spec.lif.theta_plus = self.theta_plus;
        let mut run = base.run.clone();
        run.seed = seed;
        run.learning = false;
        run.snapshot_every = 0;
        run.stage_steps = None;
        let stop_step = base.run.noise.and_then(|n| n.stop_step);
        run.noise = Some(NoiseSpec {
            amplitude: self.noise,
            layer: 0,
            stop_step,
        });
        NetworkConfig {
            layers: vec![spec],
            weights: base.weights,
            plasticity: base.plasticity,
            run,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub regime: Regime,
    pub travels: bool,
    pub summary: WaveSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub params: CellParams,
    /// `single_wave` only if every seed is; otherwise the most frequent
    /// other regime.
    pub regime: Regime,
    pub runs: Vec<SeedResult>,
}

impl CellResult {
    /// Traveling single wave under every seed.
    pub fn is_robust_wave(&self) -> bool {
        self.regime == Regime::SingleWave && self.runs.iter().all(|r| r.travels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub cells: Vec<CellResult>,
    /// Index of the robust single-wave cell with the widest band margin.
    pub candidate: Option<usize>,
}

fn axis(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// Every grid cell, in row-major order over the axes as declared.
pub fn grid_cells(base: &NetworkConfig, spec: &SweepSpec) -> Result<Vec<CellParams>> {
    let layer = base.layers.get(spec.layer).ok_or_else(|| {
        SnnError::invalid(format!("sweep layer {} not in the base config", spec.layer))
    })?;
    let noise = base.run.noise.map(|n| n.amplitude).unwrap_or(0.0);
    let g = &spec.grid;
    let axes = [
        axis(&g.r_i, layer.kernel.r_i),
        axis(&g.r_o, layer.kernel.r_o),
        axis(&g.a_i, layer.kernel.a_i),
        axis(&g.a_o, layer.kernel.a_o),
        axis(&g.tau_v, layer.lif.tau_v),
        axis(&g.tau_theta, layer.lif.tau_theta),
        axis(&g.theta_plus, layer.lif.theta_plus),
        axis(&g.noise, noise),
    ];
    let mut cells = vec![Vec::new()];
    for values in &axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    Ok(cells
        .into_iter()
        .map(|v| CellParams {
            r_i: v[0],
            r_o: v[1],
            a_i: v[2],
            a_o: v[3],
            tau_v: v[4],
            tau_theta: v[5],
            theta_plus: v[6],
            noise: v[7],
        })
        .collect())
}

/// Simulate one cell under one seed and judge the recording.
pub fn run_cell(
    base: &NetworkConfig,
    spec: &SweepSpec,
    params: &CellParams,
    seed: u64,
) -> Result<SeedResult> {
    let cfg = params.network_config(base, spec.layer, seed);
    let radius = cfg.layers[0].kernel.r_i;
    let net = Network::new(cfg)?;
    let (_, record) = net.run(&InputStream::silent())?;
    let raster = record.raster(0);
    let metrics = if raster.is_empty() {
        Vec::new()
    } else {
        wave_metrics(&raster, net.geometry(0), radius)?
    };
    let summary = spec.criteria.summarize(&metrics);
    Ok(SeedResult {
        seed,
        regime: spec.criteria.classify(&summary),
        travels: spec.criteria.travels(&summary),
        summary,
    })
}

fn cell_regime(runs: &[SeedResult]) -> Regime {
    if runs.iter().all(|r| r.regime == Regime::SingleWave) {
        return Regime::SingleWave;
    }
    let others = [Regime::SplitMerge, Regime::Quiescent, Regime::Saturated];
    let count = |g: Regime| runs.iter().filter(|r| r.regime == g).count();
    // Ties go to the earlier entry of `others`.
    let mut best = others[0];
    for g in others {
        if count(g) > count(best) {
            best = g;
        }
    }
    best
}

pub fn regime_sweep(base: &NetworkConfig, spec: &SweepSpec) -> Result<SweepReport> {
    base.validate()?;
    spec.criteria.validate()?;
    let cells = grid_cells(base, spec)?;
    let seeds = if spec.seeds.is_empty() {
        vec![base.run.seed]
    } else {
        spec.seeds.clone()
    };
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let results = par::map_collect(&jobs, |&(c, s)| run_cell(base, spec, &cells[c], s));
    let mut results = results.into_iter();
    let mut out = Vec::with_capacity(cells.len());
    for params in cells {
        let runs = (&mut results).take(seeds.len()).collect::<Result<Vec<_>>>()?;
        out.push(CellResult {
            params,
            regime: cell_regime(&runs),
            runs,
        });
    }
    let mut candidate: Option<(usize, f64)> = None;
    for (i, cell) in out.iter().enumerate().filter(|(_, c)| c.is_robust_wave()) {
        let m = cell
            .runs
            .iter()
            .map(|r| spec.criteria.margin(&r.summary))
            .fold(f64::INFINITY, f64::min);
        if candidate.is_none_or(|(_, best)| m > best) {
            candidate = Some((i, m));
        }
    }
    Ok(SweepReport {
        cells: out,
        candidate: candidate.map(|(i, _)| i),
    })
}
