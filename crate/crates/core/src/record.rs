//! Simulation records and their on-disk export formats.
//!
//! * spikes: line-delimited JSON, one event per line, `{"t":..,"layer":..,"neuron":..}`
//! * weights: CSV with a `# rows=R cols=C step=S` header line, then `R` rows
//! * probes: CSV `step,t,layer,neuron,v,theta`
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! records always produce equal bytes.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrace {
    pub layer: usize,
    pub neuron: usize,
    pub steps: Vec<u64>,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ProbeTrace {
    pub fn new(layer: usize, neuron: usize) -> Self {
        ProbeTrace {
            layer,
            neuron,
            steps: Vec::new(),
            t: Vec::new(),
            v: Vec::new(),
            theta: Vec::new(),
        }
    }

    pub fn push(&mut self, step: u64, t: f64, v: f64, theta: f64) {
        self.steps.push(step);
        self.t.push(t);
        self.v.push(v);
        self.theta.push(theta);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSnapshot {
    pub step: u64,
    /// Weight matrix index: `index` maps layer `index` to `index + 1`.
    pub index: usize,
    pub weights: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub dt: f64,
    pub layer_sizes: Vec<usize>,
    /// Network step count when recording began.
    pub start_step: u64,
    /// `spikes[step][layer]` lists spiking neuron indices after step `step + 1`.
    pub spikes: Vec<Vec<Vec<u32>>>,
    pub probes: Vec<ProbeTrace>,
    pub snapshots: Vec<WeightSnapshot>,
}

impl SimulationRecord {
    pub fn new(dt: f64, layer_sizes: Vec<usize>) -> Self {
        SimulationRecord {
            dt,
            layer_sizes,
            start_step: 0,
            spikes: Vec::new(),
            probes: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn push_step(&mut self, per_layer: Vec<Vec<u32>>) {
        self.spikes.push(per_layer);
    }

    pub fn n_steps(&self) -> usize {
        self.spikes.len()
    }

    /// Spiking neurons of one layer, one entry per step.
    pub fn raster(&self, layer: usize) -> Vec<Vec<usize>> {
        self.spikes
            .iter()
            .map(|s| s[layer].iter().map(|&i| i as usize).collect())
            .collect()
    }

    /// Simulation time at the end of recorded step `k` (0-based).
    pub fn time_of(&self, k: usize) -> f64 {
        (self.start_step + k as u64 + 1) as f64 * self.dt
    }

    /// Extend with a record that starts where this one ends. The later
    /// record's initial probe sample and snapshots repeat this record's
    /// final ones and are dropped.
    pub fn append(&mut self, later: SimulationRecord) {
        let boundary = self.start_step + self.spikes.len() as u64;
        self.spikes.extend(later.spikes);
        for tr in later.probes {
            match self
                .probes
                .iter_mut()
                .find(|p| p.layer == tr.layer && p.neuron == tr.neuron)
            {
                Some(p) => {
                    let skip = usize::from(tr.steps.first() == Some(&boundary) && p.steps.last() == Some(&boundary));
                    p.steps.extend(&tr.steps[skip..]);
                    p.t.extend(&tr.t[skip..]);
                    p.v.extend(&tr.v[skip..]);
                    p.theta.extend(&tr.theta[skip..]);
                }
                None => self.probes.push(tr),
            }
        }
        for snap in later.snapshots {
            let dup = self
                .snapshots
                .iter()
                .any(|o| o.step == snap.step && o.index == snap.index);
            if !dup {
                self.snapshots.push(snap);
            }
        }
    }

    pub fn write_spikes_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        for (k, per_layer) in self.spikes.iter().enumerate() {
            let t = self.time_of(k);
            for (layer, ids) in per_layer.iter().enumerate() {
                for &n in ids {
                    line.clear();
                    writeln!(line, "{{\"t\":{t:?},\"layer\":{layer},\"neuron\":{n}}}")
                        .expect("write to string");
                    out.write_all(line.as_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn write_probes_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,t,layer,neuron,v,theta")?;
        for p in &self.probes {
            for k in 0..p.v.len() {
                writeln!(
                    out,
                    "{},{:?},{},{},{:?},{:?}",
                    p.steps[k], p.t[k], p.layer, p.neuron, p.v[k], p.theta[k]
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub t: f64,
    pub layer: usize,
    pub neuron: usize,
}

/// Rebuild a spike raster from exported events. Steps are recovered as
/// `round(t / dt) - 1`.
pub fn read_spikes_jsonl<R: BufRead>(
    input: R,
    dt: f64,
    layer_sizes: &[usize],
    n_steps: Option<usize>,
) -> Result<SimulationRecord> {
    let mut events = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: SpikeEvent = serde_json::from_str(&line).map_err(|e| SnnError::Config {
            path: format!("spikes line {}", lineno + 1),
            message: e.to_string(),
        })?;
        if ev.layer >= layer_sizes.len() || ev.neuron >= layer_sizes[ev.layer] {
            return Err(SnnError::invalid(format!(
                "spike event on line {} out of range",
                lineno + 1
            )));
        }
        events.push(ev);
    }
    let last = events
        .iter()
        .map(|e| ((e.t / dt).round() as usize).saturating_sub(1) + 1)
        .max()
        .unwrap_or(0);
    let steps = n_steps.unwrap_or(last).max(last);
    let mut rec = SimulationRecord::new(dt, layer_sizes.to_vec());
    rec.spikes = vec![vec![Vec::new(); layer_sizes.len()]; steps];
    for e in events {
        let k = ((e.t / dt).round() as usize).saturating_sub(1);
        rec.spikes[k][e.layer].push(e.neuron as u32);
    }
    for step in &mut rec.spikes {
        for ids in step.iter_mut() {
            ids.sort_unstable();
        }
    }
    Ok(rec)
}

pub fn write_matrix_csv<W: Write>(m: &DenseMatrix, step: u64, mut out: W) -> Result<()> {
    writeln!(out, "# rows={} cols={} step={}", m.rows(), m.cols(), step)?;
    let mut line = String::new();
    for row in m.iter_rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            write!(line, "{v:?}").expect("write to string");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parse a matrix written by [`write_matrix_csv`]; returns it with its step.
pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<(DenseMatrix, u64)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or(SnnError::Empty("matrix csv"))??;
    let field = |key: &str| -> Result<u64> {
        header
            .trim_start_matches('#')
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| SnnError::invalid(format!("matrix csv header lacks `{key}`")))
    };
    let (rows, cols, step) = (field("rows")? as usize, field("cols")? as usize, field("step")?);
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for v in line.split(',') {
            data.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| SnnError::invalid(format!("matrix csv value `{v}`: {e}")))?,
            );
        }
    }
    Ok((DenseMatrix::from_vec(rows, cols, data)?, step))
}

pub fn save_matrix_csv(path: impl AsRef<Path>, m: &DenseMatrix, step: u64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix_csv(m, step, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<(DenseMatrix, u64)> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(SnnError::MissingArtifact(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_matrix_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matrix_csv_round_trip(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>(), step in any::<u32>()) {
            let m = DenseMatrix::from_fn(rows, cols, |i, j| {
                let x = crate::rng::mix64(seed ^ (i * 31 + j) as u64);
                (x as f64 / u64::MAX as f64) * 3.0 - 1.0
            });
            let mut buf = Vec::new();
            write_matrix_csv(&m, step as u64, &mut buf).unwrap();
            let (back, s) = read_matrix_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, m);
            prop_assert_eq!(s, step as u64);
        }
    }

    #[test]
    fn spikes_round_trip() {
        let mut rec = SimulationRecord::new(0.1, vec![3, 2]);
        rec.push_step(vec![vec![0, 2], vec![]]);
        rec.push_step(vec![vec![], vec![1]]);
        rec.push_step(vec![vec![], vec![]]);
        let mut buf = Vec::new();
        rec.write_spikes_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("{\"t\":0.1,\"layer\":0,\"neuron\":0}\n"));
        let back = read_spikes_jsonl(buf.as_slice(), 0.1, &[3, 2], Some(3)).unwrap();
        assert_eq!(back.spikes, rec.spikes);
    }

    #[test]
    fn missing_matrix_file() {
        let err = load_matrix_csv("/nonexistent/w.csv").unwrap_err();
        assert!(matches!(err, SnnError::MissingArtifact(_)));
    }
}
