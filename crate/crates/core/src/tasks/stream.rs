use crate::error::{ensure_len, Result, SnnError};

/// Frames presented to layer 1, each held for a fixed number of steps and
/// optionally followed by a gap of zero input. Past the last frame the
/// input is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputStream {
    frames: Vec<Vec<f64>>,
    hold_steps: u64,
    gap_steps: u64,
    /// Network step at which the first frame appears.
    offset: u64,
}

impl InputStream {
    pub fn silent() -> Self {
        InputStream::default()
    }

    /// `hold_duration` and `gap` are in simulation time and are rounded to
    /// whole steps of `dt`.
    pub fn new(frames: Vec<Vec<f64>>, hold_duration: f64, gap: f64, dt: f64) -> Result<Self> {
        if !(hold_duration > 0.0 && dt > 0.0 && gap >= 0.0) {
            return Err(SnnError::invalid(
                "input stream needs hold_duration > 0, gap >= 0 and dt > 0",
            ));
        }
        let hold_steps = (hold_duration / dt).round().max(1.0) as u64;
        let gap_steps = (gap / dt).round() as u64;
        Self::from_steps(frames, hold_steps, gap_steps)
    }

    pub fn from_steps(frames: Vec<Vec<f64>>, hold_steps: u64, gap_steps: u64) -> Result<Self> {
        if hold_steps == 0 {
            return Err(SnnError::invalid("hold must be at least one step"));
        }
        if let Some(first) = frames.first() {
            for f in &frames {
                ensure_len("input stream frame", first.len(), f.len())?;
            }
        }
        Ok(InputStream {
            frames,
            hold_steps,
            gap_steps,
            offset: 0,
        })
    }

    /// Delay the schedule so the first frame appears at network step `step`.
    pub fn starting_at(mut self, step: u64) -> Self {
        self.offset = step;
        self
    }

    /// One frame held constant for `steps` steps.
    pub fn constant(frame: Vec<f64>, steps: u64) -> Result<Self> {
        Self::from_steps(vec![frame], steps.max(1), 0)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn hold_steps(&self) -> u64 {
        self.hold_steps
    }

    pub fn period_steps(&self) -> u64 {
        self.hold_steps + self.gap_steps
    }

    pub fn total_steps(&self) -> u64 {
        self.frames.len() as u64 * self.period_steps()
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        match self.frames.first() {
            Some(f) => ensure_len("input stream frame vs layer 1", n, f.len()),
            None => Ok(()),
        }
    }

    /// Index of the frame shown at `step`, if any.
    pub fn frame_index(&self, step: u64) -> Option<usize> {
        if self.frames.is_empty() || step < self.offset {
            return None;
        }
        let step = step - self.offset;
        let period = self.period_steps();
        let idx = (step / period) as usize;
        (idx < self.frames.len() && step % period < self.hold_steps).then_some(idx)
    }

    pub fn frame_at(&self, step: u64) -> Option<&[f64]> {
        self.frame_index(step).map(|i| self.frames[i].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_with_gap() {
        let s = InputStream::new(vec![vec![1.0], vec![2.0]], 0.3, 0.2, 0.1).unwrap();
        let shown: Vec<Option<f64>> = (0..12).map(|k| s.frame_at(k).map(|f| f[0])).collect();
        assert_eq!(
            shown,
            vec![
                Some(1.0), Some(1.0), Some(1.0), None, None,
                Some(2.0), Some(2.0), Some(2.0), None, None,
                None, None
            ]
        );
        assert_eq!(s.total_steps(), 10);
    }

    #[test]
    fn rejects_bad_streams() {
        assert!(InputStream::new(vec![vec![1.0]], 0.0, 0.0, 0.1).is_err());
        assert!(InputStream::from_steps(vec![vec![1.0], vec![1.0, 2.0]], 1, 0).is_err());
        assert!(InputStream::silent().frame_at(0).is_none());
    }

    #[test]
    fn offset_delays_the_schedule() {
        let s = InputStream::from_steps(vec![vec![1.0]], 2, 0).unwrap().starting_at(3);
        let shown: Vec<bool> = (0..6).map(|k| s.frame_at(k).is_some()).collect();
        assert_eq!(shown, vec![false, false, false, true, true, false]);
    }
}
