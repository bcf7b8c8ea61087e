//! Analysis of trained networks: spike-rate features, per-class tuning
//! curves, spatial cluster maps, and pool statistics of weight matrices.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::matrix::DenseMatrix;
use crate::record::SimulationRecord;
use crate::rng::{self, DOMAIN_SHUFFLE};
use crate::topology::{mean_position, LayerGeometry};

/// Per-neuron spike rate of `layer` over the recorded steps in `window`.
pub fn extract_features(
    record: &SimulationRecord,
    layer: usize,
    window: Range<usize>,
) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(SnnError::Empty("feature window"));
    }
    if window.end > record.n_steps() {
        return Err(SnnError::invalid(format!(
            "feature window ends at step {} but the record has {}",
            window.end,
            record.n_steps()
        )));
    }
    let n = *record
        .layer_sizes
        .get(layer)
        .ok_or_else(|| SnnError::invalid(format!("record has no layer {layer}")))?;
    let duration = window.len() as f64 * record.dt;
    let mut counts = vec![0.0; n];
    for step in &record.spikes[window] {
        for &i in &step[layer] {
            counts[i as usize] += 1.0;
        }
    }
    Ok(counts.into_iter().map(|c| c / duration).collect())
}

/// Mean response per class, rescaled so the strongest class is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub values: Vec<f64>,
}

impl TuningCurve {
    /// Preferred class, or `None` for a unit that never responded.
    pub fn peak(&self) -> Option<usize> {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return None;
        }
        self.values.iter().position(|&v| v == max)
    }

    fn from_means(means: Vec<f64>) -> Self {
        let max = means.iter().copied().fold(0.0, f64::max);
        let values = if max > 0.0 {
            means.into_iter().map(|m| m / max).collect()
        } else {
            vec![0.0; means.len()]
        };
        TuningCurve { values }
    }
}

fn class_counts(labels: &[u8], n_classes: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; n_classes];
    for &c in labels {
        let c = c as usize;
        if c >= n_classes {
            return Err(SnnError::invalid(format!(
                "label {c} outside {n_classes} classes"
            )));
        }
        counts[c] += 1;
    }
    if let Some(absent) = counts.iter().position(|&c| c == 0) {
        return Err(SnnError::ClassAbsent(absent));
    }
    Ok(counts)
}

/// Tuning curve of `unit`; `responses[p]` is the feature vector recorded for
/// presentation `p`, whose class is `labels[p]`.
pub fn tuning_curve(
    responses: &[Vec<f64>],
    unit: usize,
    labels: &[u8],
    n_classes: usize,
) -> Result<TuningCurve> {
    Ok(tuning_curves(responses, labels, n_classes)?.swap_remove(unit))
}

/// Tuning curves of every unit at once.
pub fn tuning_curves(
    responses: &[Vec<f64>],
    labels: &[u8],
    n_classes: usize,
) -> Result<Vec<TuningCurve>> {
    if responses.len() != labels.len() {
        return Err(SnnError::CountMismatch {
            images: responses.len(),
            labels: labels.len(),
        });
    }
    let counts = class_counts(labels, n_classes)?;
    let units = responses[0].len();
    let mut sums = DenseMatrix::zeros(units, n_classes);
    for (r, &c) in responses.iter().zip(labels) {
        if r.len() != units {
            return Err(SnnError::DimensionMismatch {
                context: "tuning responses",
                expected: units,
                found: r.len(),
            });
        }
        for (u, &x) in r.iter().enumerate() {
            let cell = sums.get(u, c as usize) + x;
            sums.set(u, c as usize, cell);
        }
    }
    Ok(sums
        .iter_rows()
        .map(|row| {
            TuningCurve::from_means(row.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect())
        })
        .collect())
}

/// Units labeled by their preferred class, with a spatial coherence score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterMap {
    pub positions: Vec<[f64; 3]>,
    /// `None` marks an unresponsive unit.
    pub labels: Vec<Option<usize>>,
    pub k: usize,
    /// Mean share of each responsive unit's `k` nearest responsive
    /// neighbors carrying the same label; absent with fewer than two
    /// responsive units.
    pub coherence: Option<f64>,
}

/// `k` nearest responsive neighbors of every responsive unit (ties broken by
/// index).
fn neighbor_lists(geometry: &LayerGeometry, responsive: &[usize], k: usize) -> Vec<Vec<usize>> {
    responsive
        .iter()
        .map(|&u| {
            let mut others: Vec<(f64, usize)> = responsive
                .iter()
                .filter(|&&v| v != u)
                .map(|&v| (geometry.distance(u, v), v))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, v)| v).collect()
        })
        .collect()
}

fn coherence_of(labels: &[Option<usize>], responsive: &[usize], neighbors: &[Vec<usize>]) -> f64 {
    let total: f64 = responsive
        .iter()
        .zip(neighbors)
        .map(|(&u, nb)| {
            let same = nb.iter().filter(|&&v| labels[v] == labels[u]).count();
            same as f64 / nb.len() as f64
        })
        .sum();
    total / responsive.len() as f64
}

pub fn cluster_map(curves: &[TuningCurve], geometry: &LayerGeometry, k: usize) -> Result<ClusterMap> {
    if curves.len() != geometry.len() {
        return Err(SnnError::DimensionMismatch {
            context: "cluster map units",
            expected: geometry.len(),
            found: curves.len(),
        });
    }
    if k == 0 {
        return Err(SnnError::invalid("cluster map needs k >= 1"));
    }
    let labels: Vec<Option<usize>> = curves.iter().map(TuningCurve::peak).collect();
    let coherence = labeled_coherence(&labels, geometry, k);
    Ok(ClusterMap {
        positions: geometry.positions().to_vec(),
        labels,
        k,
        coherence,
    })
}

/// Coherence of an arbitrary labeling (see [`ClusterMap::coherence`]).
pub fn labeled_coherence(labels: &[Option<usize>], geometry: &LayerGeometry, k: usize) -> Option<f64> {
    let responsive: Vec<usize> = (0..labels.len()).filter(|&u| labels[u].is_some()).collect();
    if responsive.len() < 2 {
        return None;
    }
    let neighbors = neighbor_lists(geometry, &responsive, k);
    Some(coherence_of(labels, &responsive, &neighbors))
}

/// Mean and standard deviation of coherence under random labelings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baseline {
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

impl Baseline {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Baseline {
            mean,
            std: var.sqrt(),
            trials: samples.len(),
        }
    }

    /// How many baseline standard deviations `score` lies above the mean.
    pub fn z_score(&self, score: f64) -> f64 {
        (score - self.mean) / self.std
    }
}

/// Monte-Carlo baseline that shuffles the map's labels over its responsive
/// units, keeping the class frequencies.
pub fn permutation_baseline(map: &ClusterMap, geometry: &LayerGeometry, trials: usize, seed: u64) -> Result<Baseline> {
    let responsive: Vec<usize> = (0..map.labels.len()).filter(|&u| map.labels[u].is_some()).collect();
    if responsive.len() < 2 || trials < 2 {
        return Err(SnnError::invalid("baseline needs two responsive units and two trials"));
    }
    let neighbors = neighbor_lists(geometry, &responsive, map.k);
    let mut pool: Vec<Option<usize>> = responsive.iter().map(|&u| map.labels[u]).collect();
    let mut rng = rng::stream(seed, DOMAIN_SHUFFLE, 0);
    let mut labels = map.labels.clone();
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            pool.shuffle(&mut rng);
            for (&u, &l) in responsive.iter().zip(&pool) {
                labels[u] = l;
            }
            coherence_of(&labels, &responsive, &neighbors)
        })
        .collect();
    Ok(Baseline::from_samples(&samples))
}

/// Monte-Carlo baseline with labels drawn uniformly over `n_classes` for
/// every responsive unit.
pub fn uniform_baseline(
    map: &ClusterMap,
    geometry: &LayerGeometry,
    n_classes: usize,
    trials: usize,
    seed: u64,
) -> Result<Baseline> {
    let responsive: Vec<usize> = (0..map.labels.len()).filter(|&u| map.labels[u].is_some()).collect();
    if responsive.len() < 2 || trials < 2 || n_classes == 0 {
        return Err(SnnError::invalid("baseline needs two responsive units, two trials and a class"));
    }
    let neighbors = neighbor_lists(geometry, &responsive, map.k);
    let mut rng = rng::stream(seed, DOMAIN_SHUFFLE, 1);
    let mut labels = map.labels.clone();
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            for &u in &responsive {
                labels[u] = Some(rng.random_range(0..n_classes));
            }
            coherence_of(&labels, &responsive, &neighbors)
        })
        .collect();
    Ok(Baseline::from_samples(&samples))
}

/// Number of presynaptic entries above `threshold`, per postsynaptic row.
pub fn pool_sizes(weights: &DenseMatrix, threshold: f64) -> Vec<usize> {
    weights
        .iter_rows()
        .map(|row| row.iter().filter(|&&w| w > threshold).count())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolHistogram {
    pub bin_width: usize,
    /// `counts[b]` units have a pool size in `[b·w, (b+1)·w)`.
    pub counts: Vec<usize>,
}

impl PoolHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Fullest bin (lowest on ties).
    pub fn modal_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    pub fn modal_fraction(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.counts[self.modal_bin()] as f64 / t as f64,
        }
    }
}

pub fn pool_histogram(weights: &DenseMatrix, threshold: f64, bin_width: usize) -> Result<PoolHistogram> {
    if bin_width == 0 {
        return Err(SnnError::invalid("pool histogram bin width must be >= 1"));
    }
    let sizes = pool_sizes(weights, threshold);
    let bins = weights.cols() / bin_width + 1;
    let mut counts = vec![0; bins];
    for s in sizes {
        counts[s / bin_width] += 1;
    }
    Ok(PoolHistogram { bin_width, counts })
}

/// Centroid of `points`; periodic axes use the circular mean.
fn periodic_centroid(points: &[[f64; 3]], period: Option<[f64; 3]>) -> Option<[f64; 3]> {
    let mut c = mean_position(points.iter().copied())?;
    if let Some(p) = period {
        for k in 0..3 {
            if p[k] > 0.0 {
                let (mut s, mut co) = (0.0, 0.0);
                for q in points {
                    let a = std::f64::consts::TAU * q[k] / p[k];
                    s += a.sin();
                    co += a.cos();
                }
                c[k] = (s.atan2(co) / std::f64::consts::TAU * p[k]).rem_euclid(p[k]);
            }
        }
    }
    Some(c)
}

/// Root-mean-square distance of a row's above-threshold presynaptic
/// positions about their centroid; `None` for an empty pool. Periodic
/// layers are measured on the torus.
pub fn pool_spread(row: &[f64], threshold: f64, pre: &LayerGeometry) -> Option<f64> {
    let members: Vec<[f64; 3]> = row
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > threshold)
        .map(|(j, _)| pre.position(j))
        .collect();
    let period = pre.period();
    let c = periodic_centroid(&members, period)?;
    let ms = members
        .iter()
        .map(|q| {
            (0..3)
                .map(|k| {
                    let mut d = (q[k] - c[k]).abs();
                    if let Some(p) = period.filter(|p| p[k] > 0.0) {
                        d = d.min(p[k] - d);
                    }
                    d * d
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        / members.len() as f64;
    Some(ms.sqrt())
}

/// Pool statistics of one weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolReport {
    pub threshold: f64,
    pub sizes: Vec<usize>,
    pub spreads: Vec<Option<f64>>,
    pub histogram: PoolHistogram,
}

impl PoolReport {
    /// Share of units with a non-empty pool whose spread is at most `limit`.
    pub fn localized_fraction(&self, limit: f64) -> f64 {
        let ok = self
            .spreads
            .iter()
            .filter(|s| s.is_some_and(|s| s <= limit))
            .count();
        ok as f64 / self.spreads.len().max(1) as f64
    }
}

pub fn pool_report(
    weights: &DenseMatrix,
    pre: &LayerGeometry,
    threshold: f64,
    bin_width: usize,
) -> Result<PoolReport> {
    if weights.cols() != pre.len() {
        return Err(SnnError::DimensionMismatch {
            context: "pool report presynaptic layer",
            expected: pre.len(),
            found: weights.cols(),
        });
    }
    Ok(PoolReport {
        threshold,
        sizes: pool_sizes(weights, threshold),
        spreads: weights
            .iter_rows()
            .map(|row| pool_spread(row, threshold, pre))
            .collect(),
        histogram: pool_histogram(weights, threshold, bin_width)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::grid_geometry;

    #[test]
    fn empty_window_is_an_error() {
        let rec = SimulationRecord::new(0.1, vec![2]);
        assert!(matches!(
            extract_features(&rec, 0, 0..0),
            Err(SnnError::Empty(_))
        ));
    }

    #[test]
    fn rate_of_always_spiking_neuron() {
        let mut rec = SimulationRecord::new(0.01, vec![2]);
        for _ in 0..100 {
            rec.push_step(vec![vec![1]]);
        }
        let f = extract_features(&rec, 0, 0..100).unwrap();
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn silent_unit_has_flat_zero_curve() {
        let responses = vec![vec![0.0], vec![0.0]];
        let c = tuning_curve(&responses, 0, &[0, 1], 2).unwrap();
        assert_eq!(c.values, vec![0.0, 0.0]);
        assert_eq!(c.peak(), None);
    }

    #[test]
    fn absent_class_is_reported() {
        let responses = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            tuning_curve(&responses, 0, &[0, 0], 2),
            Err(SnnError::ClassAbsent(1))
        ));
    }

    #[test]
    fn uniform_labels_are_fully_coherent() {
        let g = grid_geometry(4, 4, 1.0).unwrap();
        let curves = vec![TuningCurve { values: vec![1.0, 0.2] }; 16];
        let map = cluster_map(&curves, &g, 8).unwrap();
        assert_eq!(map.coherence, Some(1.0));
    }

    #[test]
    fn single_unit_has_no_coherence() {
        let g = grid_geometry(1, 1, 1.0).unwrap();
        let curves = vec![TuningCurve { values: vec![1.0] }];
        assert_eq!(cluster_map(&curves, &g, 8).unwrap().coherence, None);
    }

    #[test]
    fn block_diagonal_pools() {
        let w = DenseMatrix::from_fn(3, 12, |i, j| if j / 4 == i { 1.0 } else { 0.0 });
        let h = pool_histogram(&w, 0.5, 1).unwrap();
        assert_eq!(h.counts[4], 3);
        assert_eq!(h.modal_bin(), 4);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn spread_wraps_on_a_torus() {
        let g = grid_geometry(10, 1, 1.0).unwrap().with_period([10.0, 1.0, 0.0]).unwrap();
        let mut row = vec![0.0; 10];
        row[0] = 1.0;
        row[9] = 1.0;
        let s = pool_spread(&row, 0.5, &g).unwrap();
        assert!((s - 0.5).abs() < 1e-9, "{s}");
    }

    #[test]
    fn spread_of_a_square() {
        let g = grid_geometry(2, 2, 1.0).unwrap();
        let s = pool_spread(&[1.0, 1.0, 1.0, 1.0], 0.5, &g).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(pool_spread(&[0.0; 4], 0.5, &g), None);
    }
}
