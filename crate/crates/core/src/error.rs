use thiserror::Error;

/// Errors raised by the controllers, the plant model and the simulation loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate quaternion (norm {norm:e})")]
    DegenerateQuaternion { norm: f64 },

    #[error("thrust {thrust:e} N is at or below the division guard")]
    ThrustDegenerate { thrust: f64 },

    #[error("desired attitude degenerate: q0d = {q0d:e} (inverted-thrust corner)")]
    AttitudeDegenerate { q0d: f64 },

    #[error("desired attitude rate map singular: |det| = {det:e}")]
    DegenerateDesiredAttitude { det: f64 },

    #[error("invalid reaching-time bound arguments: {0}")]
    InvalidBound(&'static str),

    #[error("unrealizable rotor command: negative squared speed on rotors {rotors:?}")]
    UnrealizableCommand {
        rotors: Vec<usize>,
        omega_sq: [f64; 4],
    },

    #[error("gimbal singular: |cos(theta)| = {cos_theta:e}")]
    GimbalSingular { cos_theta: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("at t = {t:.6} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any timestamp wrapper removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
