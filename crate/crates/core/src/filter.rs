//! Causal differentiation and smoothing of sampled command signals.

use crate::quat::Vec3;

/// Three-point backward difference over the most recent samples.
///
/// Returns zero for the first sample and a two-point difference for the second.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardDifference<const N: usize> {
    history: Vec<[f64; N]>,
}

impl<const N: usize> Default for BackwardDifference<N> {
    fn default() -> Self {
        Self {
            history: Vec::with_capacity(3),
        }
    }
}

impl<const N: usize> BackwardDifference<N> {
    pub fn last(&self) -> Option<&[f64; N]> {
        self.history.last()
    }

    pub fn push(&mut self, sample: [f64; N], dt: f64) -> [f64; N] {
        if self.history.len() == 3 {
            self.history.remove(0);
        }
        self.history.push(sample);
        let h = &self.history;
        match h.len() {
            1 => [0.0; N],
            2 => std::array::from_fn(|i| (h[1][i] - h[0][i]) / dt),
            _ => std::array::from_fn(|i| (3.0 * h[2][i] - 4.0 * h[1][i] + h[0][i]) / (2.0 * dt)),
        }
    }
}

/// First-order low-pass whose input-minus-state term doubles as the output derivative.
///
/// The state starts at the first input. Each call returns the state before
/// this step's input is absorbed; the absorption happens on the next call.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPass {
    cutoff: f64,
    state: Option<Vec3>,
    pending: Option<(Vec3, f64)>,
}

impl LowPass {
    pub fn new(cutoff: f64) -> Self {
        Self {
            cutoff,
            state: None,
            pending: None,
        }
    }

    /// `(filtered, d/dt filtered)`.
    pub fn push(&mut self, raw: Vec3, dt: f64) -> (Vec3, Vec3) {
        if let (Some((prev, prev_dt)), Some(s)) = (self.pending.take(), self.state.as_mut()) {
            *s += prev_dt * self.cutoff * (prev - *s);
        }
        let filtered = *self.state.get_or_insert(raw);
        self.pending = Some((raw, dt));
        (filtered, self.cutoff * (raw - filtered))
    }
}
