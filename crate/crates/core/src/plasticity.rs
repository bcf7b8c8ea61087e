//! Inter-layer weights, the Hebbian STDP rule, competition rules and the
//! ReLU activation.
//!
//! Weights are stored post × pre so the forward pass is `W · y_pre` and the
//! update is `dW/dt = eta · (y_post ⊗ y_pre)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Result, SnnError};
use crate::matrix::{support, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: DenseMatrix,
    pub pre_layer: usize,
    pub post_layer: usize,
}

impl WeightMatrix {
    pub fn new(entries: DenseMatrix, pre_layer: usize, post_layer: usize) -> Result<Self> {
        ensure_finite("weight matrix", entries.as_slice())?;
        Ok(WeightMatrix {
            entries,
            pre_layer,
            post_layer,
        })
    }

    pub fn zeros(n_post: usize, n_pre: usize, pre_layer: usize) -> Self {
        WeightMatrix {
            entries: DenseMatrix::zeros(n_post, n_pre),
            pre_layer,
            post_layer: pre_layer + 1,
        }
    }

    pub fn n_post(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_pre(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DenseMatrix {
        &mut self.entries
    }

    pub fn get(&self, post: usize, pre: usize) -> f64 {
        self.entries.get(post, pre)
    }

    /// Forward product `W · y`.
    pub fn forward(&self, y_pre: &[f64]) -> Result<Vec<f64>> {
        self.entries.mul_sparse(y_pre, &support(y_pre))
    }
}

/// How weights are kept bounded after each Hebbian increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightBound {
    /// Clamp every entry to `[0, w_max]`.
    #[default]
    Clamp,
    /// Clamp, then rescale each updated post-neuron row back to its
    /// pre-update sum. Growth at co-active synapses is paid for by every
    /// other synapse of the same post neuron, and row sums never change.
    NormalizeRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlasticityParams {
    pub eta: f64,
    pub w_max: f64,
    #[serde(default)]
    pub bound: WeightBound,
}

impl PlasticityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(SnnError::invalid("PlasticityParams: eta must be >= 0"));
        }
        if !(self.w_max > 0.0 && self.w_max.is_finite()) {
            return Err(SnnError::invalid("PlasticityParams: w_max must be > 0"));
        }
        Ok(())
    }

    /// Integrate the Hebbian rule over one step (forward Euler, exact for a
    /// right-hand side that is constant within the step).
    pub fn apply(&self, w: &mut WeightMatrix, y_pre: &[f64], y_post: &[f64], dt: f64) -> Result<()> {
        match self.bound {
            WeightBound::Clamp => stdp_update(w, y_pre, y_post, self.eta, dt, self.w_max),
            WeightBound::NormalizeRows => {
                stdp_update_normalized(w, y_pre, y_post, self.eta, dt, self.w_max)
            }
        }
    }
}

fn check_update_args(w: &WeightMatrix, y_pre: &[f64], y_post: &[f64], eta: f64, dt: f64) -> Result<()> {
    ensure_len("STDP presynaptic vector", w.n_pre(), y_pre.len())?;
    ensure_len("STDP postsynaptic vector", w.n_post(), y_post.len())?;
    ensure_finite("STDP presynaptic vector", y_pre)?;
    ensure_finite("STDP postsynaptic vector", y_post)?;
    if !(eta >= 0.0 && dt >= 0.0) {
        return Err(SnnError::invalid("STDP requires eta >= 0 and dt >= 0"));
    }
    Ok(())
}

/// `W ← clamp(W + dt · eta · (y_post ⊗ y_pre), 0, w_max)`, touching only
/// synapses where both sides are active.
pub fn stdp_update(
    w: &mut WeightMatrix,
    y_pre: &[f64],
    y_post: &[f64],
    eta: f64,
    dt: f64,
    w_max: f64,
) -> Result<()> {
    check_update_args(w, y_pre, y_post, eta, dt)?;
    let rate = dt * eta;
    if rate == 0.0 {
        return Ok(());
    }
    let pre = support(y_pre);
    for post in support(y_post) {
        let scale = rate * y_post[post];
        let row = w.entries.row_mut(post);
        for &j in &pre {
            row[j] = (row[j] + scale * y_pre[j]).clamp(0.0, w_max);
        }
    }
    Ok(())
}

/// Hebbian increment clamped to `[0, w_max]`, followed by divisive
/// normalization of each updated row to its previous sum.
pub fn stdp_update_normalized(
    w: &mut WeightMatrix,
    y_pre: &[f64],
    y_post: &[f64],
    eta: f64,
    dt: f64,
    w_max: f64,
) -> Result<()> {
    check_update_args(w, y_pre, y_post, eta, dt)?;
    let rate = dt * eta;
    if rate == 0.0 {
        return Ok(());
    }
    let pre = support(y_pre);
    if pre.is_empty() {
        return Ok(());
    }
    for post in support(y_post) {
        let scale = rate * y_post[post];
        let row = w.entries.row_mut(post);
        let before: f64 = row.iter().sum();
        for &j in &pre {
            row[j] = (row[j] + scale * y_pre[j]).clamp(0.0, w_max);
        }
        let after: f64 = row.iter().sum();
        // Increments are non-negative, so `after >= before` unless the row
        // started above `w_max`; never scale up past the ceiling.
        if after > 0.0 {
            let k = (before / after).min(1.0);
            row.iter_mut().for_each(|x| *x *= k);
        }
    }
    Ok(())
}

/// Competition rule applied to a layer's output spikes or input activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Competition {
    #[default]
    None,
    WinnerTakeAll,
    KBest(usize),
}

impl Competition {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Competition::None => Ok(x.to_vec()),
            Competition::WinnerTakeAll => winner_take_all(x),
            Competition::KBest(k) => k_best(x, k),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Competition::KBest(0) => Err(SnnError::invalid("k_best requires k >= 1")),
            _ => Ok(()),
        }
    }
}

/// Entries below the maximum become 0; entries equal to it keep it.
pub fn winner_take_all(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(SnnError::Empty("winner_take_all input"));
    }
    ensure_finite("winner_take_all input", x)?;
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(x.iter().map(|&v| if v < max { 0.0 } else { max }).collect())
}

/// Keep the `k` largest entries at their own values and zero the rest.
/// Equal values rank by lower index first.
pub fn k_best(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > x.len() {
        return Err(SnnError::invalid(format!(
            "k_best: k = {k} out of range 1..={}",
            x.len()
        )));
    }
    ensure_finite("k_best input", x)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    // Stable sort keeps ascending index order among equal values.
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut out = vec![0.0; x.len()];
    for &i in &order[..k] {
        out[i] = x[i];
    }
    Ok(out)
}

pub fn relu(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&v| v.max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stdp_single_synapse() {
        let mut w = WeightMatrix::zeros(2, 2, 0);
        stdp_update(&mut w, &[1.0, 0.0], &[0.0, 1.0], 0.1, 1.0, 10.0).unwrap();
        assert_eq!(w.entries().as_slice(), &[0.0, 0.0, 0.1, 0.0]);
    }

    #[test]
    fn stdp_zero_pre_is_identity() {
        let entries = DenseMatrix::from_fn(3, 2, |i, j| (i + j) as f64 * 0.1);
        let mut w = WeightMatrix::new(entries.clone(), 0, 1).unwrap();
        stdp_update(&mut w, &[0.0, 0.0], &[1.0, 1.0, 1.0], 0.5, 1.0, 10.0).unwrap();
        assert_eq!(w.entries(), &entries);
        stdp_update_normalized(&mut w, &[0.0, 0.0], &[1.0, 1.0, 1.0], 0.5, 1.0, 10.0).unwrap();
        assert_eq!(w.entries(), &entries);
    }

    #[test]
    fn stdp_clamps_and_checks_dims() {
        let mut w = WeightMatrix::zeros(1, 1, 0);
        for _ in 0..100 {
            stdp_update(&mut w, &[1.0], &[1.0], 1.0, 1.0, 2.5).unwrap();
        }
        assert_eq!(w.get(0, 0), 2.5);
        assert!(stdp_update(&mut w, &[1.0, 0.0], &[1.0], 1.0, 1.0, 1.0).is_err());
        assert!(stdp_update(&mut w, &[1.0], &[1.0, 1.0], 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn normalized_update_preserves_row_mass() {
        let entries = DenseMatrix::from_fn(2, 4, |_, j| 1.0 + j as f64 * 0.1);
        let mut w = WeightMatrix::new(entries, 0, 1).unwrap();
        let before: f64 = w.entries().row(0).iter().sum();
        stdp_update_normalized(&mut w, &[1.0, 0.0, 1.0, 0.0], &[1.0, 0.0], 0.5, 1.0, 100.0).unwrap();
        let after: f64 = w.entries().row(0).iter().sum();
        assert!((before - after).abs() < 1e-12);
        assert!(w.get(0, 0) > 1.0 && w.get(0, 1) < 1.1);
        // untouched row
        assert_eq!(w.get(1, 3), 1.3);
    }

    #[test]
    fn wta_cases() {
        assert_eq!(winner_take_all(&[1.0, 3.0, 2.0]).unwrap(), vec![0.0, 3.0, 0.0]);
        assert_eq!(winner_take_all(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(winner_take_all(&[2.0, 2.0, 1.0]).unwrap(), vec![2.0, 2.0, 0.0]);
        assert!(winner_take_all(&[]).is_err());
    }

    #[test]
    fn k_best_cases() {
        assert_eq!(k_best(&[1.0, 3.0, 2.0], 1).unwrap(), vec![0.0, 3.0, 0.0]);
        assert_eq!(k_best(&[1.0, 3.0, 2.0], 3).unwrap(), vec![1.0, 3.0, 2.0]);
        assert_eq!(k_best(&[5.0, 1.0, 4.0, 4.0], 2).unwrap(), vec![5.0, 0.0, 4.0, 0.0]);
        assert!(k_best(&[1.0], 0).is_err());
        assert!(k_best(&[1.0], 2).is_err());
    }

    #[test]
    fn relu_cases() {
        assert_eq!(relu(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(relu(&[0.5, 3.0]), vec![0.5, 3.0]);
    }

    #[test]
    fn competition_dispatch() {
        let x = [1.0, 4.0, 2.0, 4.0];
        assert_eq!(Competition::None.apply(&x).unwrap(), x.to_vec());
        assert_eq!(Competition::WinnerTakeAll.apply(&x).unwrap(), vec![0.0, 4.0, 0.0, 4.0]);
        assert_eq!(Competition::KBest(1).apply(&x).unwrap(), vec![0.0, 4.0, 0.0, 0.0]);
        assert!(Competition::KBest(0).validate().is_err());
    }
}
