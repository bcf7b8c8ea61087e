//! Leaky integrate-and-fire layer with a homeostatic threshold.
//!
//! Per neuron, with `h = 1` while spiking:
//!
//! ```text
//! dv/dt     = -v / tau_v + (S h)_i + (S^x x)_i
//! dtheta/dt = theta_plus                      if h = 1
//!           = -(theta - v_th) / tau_theta     otherwise
//! ```
//!
//! The spike vector is frozen at the start of a step for all four RK stages;
//! spikes are detected once at the end of the step.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Result, SnnError};
use crate::matrix::support;
use crate::topology::AdjacencyMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifParams {
    pub tau_v: f64,
    pub tau_theta: f64,
    pub v_th: f64,
    pub theta_plus: f64,
    pub v_reset: f64,
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.tau_v, self.tau_theta, self.v_th, self.theta_plus, self.v_reset];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(SnnError::invalid("LifParams: all fields must be finite"));
        }
        if self.tau_v <= 0.0 || self.tau_theta <= 0.0 {
            return Err(SnnError::invalid(
                "LifParams: tau_v and tau_theta must be > 0",
            ));
        }
        if self.theta_plus < 0.0 {
            return Err(SnnError::invalid("LifParams: theta_plus must be >= 0"));
        }
        if self.v_reset >= self.v_th {
            return Err(SnnError::invalid(format!(
                "LifParams: v_reset ({}) must be below v_th ({})",
                self.v_reset, self.v_th
            )));
        }
        Ok(())
    }

    #[inline]
    fn dv(&self, v: f64, drive: f64) -> f64 {
        -v / self.tau_v + drive
    }

    #[inline]
    fn dtheta(&self, theta: f64, spiking: bool) -> f64 {
        if spiking {
            self.theta_plus
        } else {
            -(theta - self.v_th) / self.tau_theta
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub spikes: Vec<bool>,
    pub t: f64,
}

impl LayerState {
    /// Resting state: `v = 0`, `theta = v_th`, no spikes, `t = 0`.
    pub fn resting(n: usize, params: &LifParams) -> Self {
        LayerState {
            v: vec![0.0; n],
            theta: vec![params.v_th; n],
            spikes: vec![false; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Spike flags as a 0/1 vector.
    pub fn spike_vector(&self) -> Vec<f64> {
        self.spikes.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
    }

    pub fn spike_count(&self) -> usize {
        self.spikes.iter().filter(|&&s| s).count()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_len("LayerState theta", self.v.len(), self.theta.len())?;
        ensure_len("LayerState spikes", self.v.len(), self.spikes.len())?;
        ensure_finite("LayerState v", &self.v)?;
        ensure_finite("LayerState theta", &self.theta)?;
        if !self.t.is_finite() {
            return Err(SnnError::NonFinite {
                context: "LayerState t",
                index: 0,
            });
        }
        Ok(())
    }
}

/// Right-hand side of the layer ODE at `state`.
pub fn lif_rhs(
    state: &LayerState,
    adjacency: &AdjacencyMatrix,
    spike_input: &AdjacencyMatrix,
    input: &[f64],
    params: &LifParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let drive = RhsInputs {
        adjacency,
        spike_input,
        input,
    }
    .drive(state)?;
    let dv = state
        .v
        .iter()
        .zip(&drive)
        .map(|(&v, &d)| params.dv(v, d))
        .collect();
    let dtheta = state
        .theta
        .iter()
        .zip(&state.spikes)
        .map(|(&th, &s)| params.dtheta(th, s))
        .collect();
    Ok((dv, dtheta))
}

/// Coupling matrices and input current held fixed over one step.
#[derive(Debug, Clone, Copy)]
pub struct RhsInputs<'a> {
    pub adjacency: &'a AdjacencyMatrix,
    pub spike_input: &'a AdjacencyMatrix,
    pub input: &'a [f64],
}

impl RhsInputs<'_> {
    /// `S h + S^x x` for the spike vector stored in `state`.
    pub fn drive(&self, state: &LayerState) -> Result<Vec<f64>> {
        state.validate()?;
        let n = state.len();
        ensure_len("adjacency size", n, self.adjacency.n())?;
        ensure_len("spike-input matrix size", n, self.spike_input.n())?;
        ensure_len("input current", n, self.input.len())?;
        ensure_finite("input current", self.input)?;
        let h = state.spike_vector();
        let mut drive = self.adjacency.matrix().mul_sparse(&h, &support(&h))?;
        let ext = self.spike_input.matrix().mul_vec(self.input)?;
        drive.iter_mut().zip(ext).for_each(|(d, e)| *d += e);
        Ok(drive)
    }
}

#[inline]
fn rk4_scalar(y: f64, dt: f64, f: impl Fn(f64) -> f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * dt * k1);
    let k3 = f(y + 0.5 * dt * k2);
    let k4 = f(y + dt * k3);
    y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Classical RK4 advance of `(v, theta)` by `dt` with the inputs frozen.
/// The spike flags are left as they were.
pub fn rk4_step(
    state: &LayerState,
    inputs: &RhsInputs<'_>,
    params: &LifParams,
    dt: f64,
) -> Result<LayerState> {
    let drive = inputs.drive(state)?;
    let mut next = state.clone();
    rk4_step_with_drive(&mut next, &drive, params, dt)?;
    Ok(next)
}

/// In-place RK4 step given a precomputed constant drive `S h + S^x x`.
///
/// With frozen spikes and input, the neurons decouple, so each one is
/// advanced independently.
pub fn rk4_step_with_drive(
    state: &mut LayerState,
    drive: &[f64],
    params: &LifParams,
    dt: f64,
) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SnnError::invalid(format!("dt must be > 0, got {dt}")));
    }
    ensure_len("drive", state.len(), drive.len())?;
    let LayerState { v, theta, spikes, t } = state;
    for i in 0..v.len() {
        let d = drive[i];
        v[i] = rk4_scalar(v[i], dt, |y| params.dv(y, d));
        let s = spikes[i];
        theta[i] = rk4_scalar(theta[i], dt, |y| params.dtheta(y, s));
        if !(v[i].is_finite() && theta[i].is_finite()) {
            return Err(SnnError::Unstable {
                layer: 0,
                neuron: i,
                t: *t + dt,
                dt,
            });
        }
    }
    *t += dt;
    Ok(())
}

/// Mark `v >= theta` as spiking and reset those voltages to `v_reset`.
/// Returns the fresh spike flags.
pub fn detect_spikes_and_reset<'a>(
    state: &'a mut LayerState,
    params: &LifParams,
) -> Result<&'a [bool]> {
    state.validate()?;
    for i in 0..state.len() {
        let fire = state.v[i] >= state.theta[i];
        state.spikes[i] = fire;
        if fire {
            state.v[i] = params.v_reset;
        }
    }
    Ok(&state.spikes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::topology::build_spike_input_matrix;

    fn params() -> LifParams {
        LifParams {
            tau_v: 1.0,
            tau_theta: 5.0,
            v_th: 1.0,
            theta_plus: 0.2,
            v_reset: 0.0,
        }
    }

    fn single(v: f64, theta: f64, spiking: bool) -> LayerState {
        LayerState {
            v: vec![v],
            theta: vec![theta],
            spikes: vec![spiking],
            t: 0.0,
        }
    }

    fn zero_adj(n: usize) -> AdjacencyMatrix {
        AdjacencyMatrix::new(DenseMatrix::zeros(n, n)).unwrap()
    }

    #[test]
    fn rhs_fixed_point() {
        let p = params();
        let s = LayerState::resting(4, &p);
        let (dv, dth) = lif_rhs(&s, &zero_adj(4), &build_spike_input_matrix(4, None).unwrap(), &[0.0; 4], &p)
            .unwrap();
        assert!(dv.iter().chain(&dth).all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_spiking_and_relaxing() {
        let p = params();
        let sx = build_spike_input_matrix(1, None).unwrap();
        let (dv, dth) = lif_rhs(&single(2.0, 1.0, true), &zero_adj(1), &sx, &[0.0], &p).unwrap();
        assert_eq!(dv, vec![-2.0]);
        assert!((dth[0] - 0.2).abs() < 1e-15);

        let (_, dth) = lif_rhs(&single(0.0, 2.0, false), &zero_adj(1), &sx, &[0.0], &p).unwrap();
        assert!((dth[0] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_bad_dims_and_nan() {
        let p = params();
        let s = LayerState::resting(2, &p);
        let sx = build_spike_input_matrix(2, None).unwrap();
        assert!(lif_rhs(&s, &zero_adj(3), &sx, &[0.0; 2], &p).is_err());
        assert!(lif_rhs(&s, &zero_adj(2), &sx, &[0.0; 3], &p).is_err());
        assert!(lif_rhs(&s, &zero_adj(2), &sx, &[f64::NAN, 0.0], &p).is_err());
    }

    #[test]
    fn decay_matches_exponential() {
        let p = params();
        let mut s = single(1.0, 10.0, false);
        for _ in 0..100 {
            rk4_step_with_drive(&mut s, &[0.0], &p, 0.01).unwrap();
        }
        assert!((s.t - 1.0).abs() < 1e-12);
        assert!((s.v[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = LifParams { v_th: 0.0, v_reset: -1.0, ..params() };
        let mut s = LayerState::resting(3, &p);
        for _ in 0..50 {
            rk4_step_with_drive(&mut s, &[0.0; 3], &p, 0.1).unwrap();
        }
        assert!(s.v.iter().chain(&s.theta).all(|&x| x == 0.0));
    }

    #[test]
    fn spike_detection_and_reset() {
        let p = params();
        let mut s = single(0.5, 1.0, false);
        assert_eq!(detect_spikes_and_reset(&mut s, &p).unwrap(), &[false]);
        assert_eq!(s.v, vec![0.5]);

        let mut s = single(1.5, 1.0, false);
        assert_eq!(detect_spikes_and_reset(&mut s, &p).unwrap(), &[true]);
        assert_eq!(s.v, vec![0.0]);

        let mut s = single(1.0, 1.0, false);
        assert_eq!(detect_spikes_and_reset(&mut s, &p).unwrap(), &[true]);
    }

    #[test]
    fn threshold_homeostasis() {
        let p = params();
        let mut s = single(0.0, 1.0, true);
        let mut last = s.theta[0];
        for _ in 0..10 {
            rk4_step_with_drive(&mut s, &[0.0], &p, 0.1).unwrap();
            assert!(s.theta[0] > last);
            last = s.theta[0];
        }
        s.spikes[0] = false;
        for _ in 0..200 {
            rk4_step_with_drive(&mut s, &[0.0], &p, 0.1).unwrap();
            assert!(s.theta[0] < last);
            assert!(s.theta[0] > p.v_th);
            last = s.theta[0];
        }
    }

    #[test]
    fn unstable_step_is_reported() {
        let p = params();
        let mut s = single(0.0, 1.0, false);
        let err = rk4_step_with_drive(&mut s, &[f64::INFINITY], &p, 0.1).unwrap_err();
        assert!(matches!(err, SnnError::Unstable { neuron: 0, .. }));
        assert!(err.to_string().contains("smaller time step"));
    }

    #[test]
    fn invalid_params() {
        assert!(LifParams { tau_v: 0.0, ..params() }.validate().is_err());
        assert!(LifParams { tau_theta: -1.0, ..params() }.validate().is_err());
        assert!(LifParams { theta_plus: -0.1, ..params() }.validate().is_err());
        assert!(LifParams { v_reset: 1.0, ..params() }.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
