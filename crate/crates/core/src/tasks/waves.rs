//! Quantitative proxies for wave regimes: how much of the layer is firing,
//! where the firing set is, and into how many spatially connected pieces it
//! falls.

use serde::Serialize;

use crate::error::{Result, SnnError};
use crate::topology::{mean_position, LayerGeometry};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveStepMetrics {
    pub active_fraction: f64,
    pub centroid: Option<[f64; 3]>,
    pub components: usize,
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Number of connected components of `active` when neurons closer than
/// `radius` are linked.
pub fn component_count(active: &[usize], geometry: &LayerGeometry, radius: f64) -> usize {
    let mut ds = DisjointSet::new(active.len());
    for a in 0..active.len() {
        for b in (a + 1)..active.len() {
            if geometry.distance(active[a], active[b]) < radius {
                ds.union(a, b);
            }
        }
    }
    (0..active.len()).filter(|&i| ds.find(i) == i).count()
}

pub fn step_metrics(active: &[usize], geometry: &LayerGeometry, radius: f64) -> WaveStepMetrics {
    WaveStepMetrics {
        active_fraction: active.len() as f64 / geometry.len() as f64,
        centroid: mean_position(active.iter().map(|&i| geometry.position(i))),
        components: component_count(active, geometry, radius),
    }
}

/// Per-step metrics for a raster (spiking indices per step). `radius` is the
/// linking distance, normally the layer's excitation radius.
pub fn wave_metrics(
    raster: &[Vec<usize>],
    geometry: &LayerGeometry,
    radius: f64,
) -> Result<Vec<WaveStepMetrics>> {
    if raster.is_empty() {
        return Err(SnnError::Empty("wave raster"));
    }
    if let Some(bad) = raster.iter().flatten().find(|&&i| i >= geometry.len()) {
        return Err(SnnError::invalid(format!(
            "raster neuron {bad} outside a layer of {}",
            geometry.len()
        )));
    }
    Ok(raster
        .iter()
        .map(|active| step_metrics(active, geometry, radius))
        .collect())
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

/// Summary of a metric series after discarding a warm-up prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSummary {
    pub steps: usize,
    pub mean_fraction: f64,
    pub min_fraction: f64,
    pub max_fraction: f64,
    /// Share of steps whose active fraction lies inside the band.
    pub in_band: f64,
    pub median_components: f64,
    pub component_variance: f64,
    /// Smallest, over all windows, of the largest centroid excursion from
    /// the window's first centroid.
    pub min_window_displacement: f64,
}

/// Largest distance of any centroid in `series` from the first one present.
fn window_excursion(series: &[WaveStepMetrics]) -> f64 {
    let mut iter = series.iter().filter_map(|m| m.centroid);
    match iter.next() {
        None => 0.0,
        Some(origin) => iter.map(|c| dist(origin, c)).fold(0.0, f64::max),
    }
}

pub fn summarize(
    metrics: &[WaveStepMetrics],
    warmup: usize,
    band: (f64, f64),
    window: usize,
) -> WaveSummary {
    let m = &metrics[warmup.min(metrics.len())..];
    let n = m.len().max(1) as f64;
    let fractions: Vec<f64> = m.iter().map(|s| s.active_fraction).collect();
    let mut comps: Vec<f64> = m.iter().map(|s| s.components as f64).collect();
    comps.sort_by(f64::total_cmp);
    let median = if comps.is_empty() {
        0.0
    } else if comps.len() % 2 == 1 {
        comps[comps.len() / 2]
    } else {
        0.5 * (comps[comps.len() / 2 - 1] + comps[comps.len() / 2])
    };
    let mean_c = comps.iter().sum::<f64>() / n;
    let var_c = comps.iter().map(|c| (c - mean_c).powi(2)).sum::<f64>() / n;
    let min_disp = if m.is_empty() {
        0.0
    } else if window == 0 || m.len() < window {
        window_excursion(m)
    } else {
        (0..=m.len() - window)
            .map(|s| window_excursion(&m[s..s + window]))
            .fold(f64::INFINITY, f64::min)
    };
    WaveSummary {
        steps: m.len(),
        mean_fraction: fractions.iter().sum::<f64>() / n,
        min_fraction: if fractions.is_empty() {
            0.0
        } else {
            fractions.iter().copied().fold(f64::INFINITY, f64::min)
        },
        max_fraction: fractions.iter().copied().fold(0.0, f64::max),
        in_band: fractions
            .iter()
            .filter(|&&f| f >= band.0 && f <= band.1)
            .count() as f64
            / n,
        median_components: median,
        component_variance: var_c,
        min_window_displacement: min_disp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::grid_geometry;

    #[test]
    fn empty_and_full_steps() {
        let g = grid_geometry(5, 4, 1.0).unwrap();
        let m = step_metrics(&[], &g, 1.5);
        assert_eq!(m.active_fraction, 0.0);
        assert_eq!(m.centroid, None);
        assert_eq!(m.components, 0);

        let all: Vec<usize> = (0..20).collect();
        let m = step_metrics(&all, &g, 1.5);
        assert_eq!(m.active_fraction, 1.0);
        assert_eq!(m.centroid, Some(g.centroid()));
        assert_eq!(m.components, 1);
    }

    #[test]
    fn two_blobs() {
        let g = grid_geometry(10, 10, 1.0).unwrap();
        let blob_a = [0, 1, 10, 11];
        let blob_b = [88, 89, 98, 99];
        let active: Vec<usize> = blob_a.iter().chain(&blob_b).copied().collect();
        assert_eq!(component_count(&active, &g, 2.0), 2);
        assert_eq!(component_count(&active, &g, 20.0), 1);
    }

    #[test]
    fn raster_validation() {
        let g = grid_geometry(3, 3, 1.0).unwrap();
        assert!(wave_metrics(&[], &g, 1.0).is_err());
        assert!(wave_metrics(&[vec![9]], &g, 1.0).is_err());
    }

    #[test]
    fn summary_of_moving_dot() {
        let g = grid_geometry(20, 1, 1.0).unwrap();
        let raster: Vec<Vec<usize>> = (0..20).map(|k| vec![k]).collect();
        let m = wave_metrics(&raster, &g, 1.5).unwrap();
        let s = summarize(&m, 0, (0.01, 0.3), 10);
        assert_eq!(s.median_components, 1.0);
        assert_eq!(s.component_variance, 0.0);
        assert_eq!(s.min_window_displacement, 9.0);
        assert_eq!(s.in_band, 1.0);
    }
}
