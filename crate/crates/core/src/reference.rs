//! Reference trajectories for the position loop and direct attitude commands.

use crate::error::{Error, Result};
use crate::position::ReferenceSample;
use crate::quat::{UnitQuaternion, Vec3};

/// Natural cubic spline through `(t, x, y, z)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledReference {
    t: Vec<f64>,
    values: [Vec<f64>; 3],
    second: [Vec<f64>; 3],
}

impl SampledReference {
    /// Builds a spline from strictly increasing times and matching positions.
    pub fn new(t: Vec<f64>, points: &[Vec3]) -> Result<Self> {
        if t.len() != points.len() {
            return Err(Error::InvalidScenario(
                "sample times and points differ in length".into(),
            ));
        }
        if t.len() < 2 {
            return Err(Error::InvalidScenario(
                "sampled reference needs at least two samples".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidScenario(
                "sample times must be finite and strictly increasing".into(),
            ));
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidScenario(
                "sampled reference contains non-finite positions".into(),
            ));
        }
        let values: [Vec<f64>; 3] = std::array::from_fn(|a| points.iter().map(|p| p[a]).collect());
        let second = std::array::from_fn(|a| natural_second_derivatives(&t, &values[a]));
        Ok(Self { t, values, second })
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Position, velocity and acceleration at `t`, clamped to the sampled span.
    pub fn sample(&self, t: f64) -> ReferenceSample {
        let t = t.clamp(self.start(), self.end());
        let i = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            n => (n - 1).min(self.t.len() - 2),
        };
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - t) / h;
        let b = (t - self.t[i]) / h;
        let mut out = ReferenceSample::default();
        for k in 0..3 {
            let (y0, y1) = (self.values[k][i], self.values[k][i + 1]);
            let (m0, m1) = (self.second[k][i], self.second[k][i + 1]);
            out.position[k] =
                a * y0 + b * y1 + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
            out.velocity[k] = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0
                + (3.0 * b * b - 1.0) * h * m1 / 6.0;
            out.acceleration[k] = a * m0 + b * m1;
        }
        out
    }
}

fn natural_second_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = t[i] - t[i - 1];
        let h1 = t[i + 1] - t[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// What the controllers are asked to follow.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// `x = 4cos(0.1t)`, `y = 4cos(0.2t)`, `z = t/15 + 1`.
    Table2,
    Hover {
        position: Vec3,
    },
    Sampled(SampledReference),
    /// Pitch rises as `(θ_max/2)(1 − cos(πt/T))` for `t < T`, then holds `θ_max`.
    /// The position loop is bypassed and thrust is held at hover.
    PitchSweep {
        max_pitch: f64,
        rise_time: f64,
    },
    /// Constant desired attitude from `t = 0`, position loop bypassed.
    AttitudeStep {
        attitude: UnitQuaternion,
    },
}

impl Reference {
    pub fn tracks_position(&self) -> bool {
        matches!(
            self,
            Reference::Table2 | Reference::Hover { .. } | Reference::Sampled(_)
        )
    }

    /// Position reference, held at `hold` for attitude-only references.
    pub fn position_sample(&self, t: f64, hold: &Vec3) -> ReferenceSample {
        match self {
            Reference::Table2 => ReferenceSample {
                position: Vec3::new(4.0 * (0.1 * t).cos(), 4.0 * (0.2 * t).cos(), t / 15.0 + 1.0),
                velocity: Vec3::new(-0.4 * (0.1 * t).sin(), -0.8 * (0.2 * t).sin(), 1.0 / 15.0),
                acceleration: Vec3::new(-0.04 * (0.1 * t).cos(), -0.16 * (0.2 * t).cos(), 0.0),
            },
            Reference::Hover { position } => ReferenceSample {
                position: *position,
                ..Default::default()
            },
            Reference::Sampled(s) => s.sample(t),
            Reference::PitchSweep { .. } | Reference::AttitudeStep { .. } => ReferenceSample {
                position: *hold,
                ..Default::default()
            },
        }
    }

    /// Commanded attitude for attitude-only references.
    pub fn attitude_command(&self, t: f64) -> Option<UnitQuaternion> {
        match self {
            Reference::PitchSweep {
                max_pitch,
                rise_time,
            } => {
                let theta = if t < *rise_time {
                    0.5 * max_pitch * (1.0 - (std::f64::consts::PI * t / rise_time).cos())
                } else {
                    *max_pitch
                };
                let (s, c) = (0.5 * theta).sin_cos();
                Some(UnitQuaternion::from_parts_unchecked(
                    c,
                    Vec3::new(0.0, s, 0.0),
                ))
            }
            Reference::AttitudeStep { attitude } => Some(*attitude),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Reference::Hover { position } if position.iter().any(|x| !x.is_finite()) => Err(
                Error::InvalidScenario("hover position must be finite".into()),
            ),
            Reference::PitchSweep {
                max_pitch,
                rise_time,
            } if !(max_pitch.is_finite() && *rise_time > 0.0) => Err(Error::InvalidScenario(
                "pitch sweep needs a finite angle and positive rise time".into(),
            )),
            _ => Ok(()),
        }
    }
}
