//! Adaptive backstepping translation controller.
//!
//! Produces the virtual control `U`, the total thrust and the desired
//! quaternion. The thrust and desired-attitude maps are such that a vehicle
//! holding `Q = Q_d` with that thrust accelerates at `V̇ = −U`; the virtual
//! control is therefore the negated commanded acceleration
//!
//! ```text
//! a = −m∘ė_p − e_p − n̂∘e_v + Ẍ_d,   ė_p = e_v − m∘e_p,   U = −a
//! ```
//!
//! which gives `V̇_tot = −Σ m_i e_pi² − Σ n̂_i e_vi² (+ adaptation terms) ≤ 0`.

use crate::dynamics::{RigidBodyState, VehicleParams};
use crate::error::{Error, Result};
use crate::quat::{UnitQuaternion, Vec3};

/// Thrust below which the desired attitude is undefined, N.
pub const THRUST_GUARD: f64 = 1e-6;
/// Smallest admissible `q0d`.
pub const Q0D_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGains {
    /// `(m_xp, m_yp, m_zp)`, 1/s.
    pub m: Vec3,
    /// `(η1, η2, η3)`
    pub eta: Vec3,
}

impl PositionGains {
    pub fn table2() -> Self {
        Self {
            m: Vec3::new(0.3, 0.5, 0.6),
            eta: Vec3::new(0.01, 0.01, 0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PositionCtlState {
    /// Adaptive estimates `(n̂x2, n̂y2, n̂z2)`.
    pub n_hat: Vec3,
    pub last_virtual: Vec3,
    pub last_thrust: f64,
}

/// Desired position and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl ReferenceSample {
    pub fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.velocity.iter())
            .chain(self.acceleration.iter())
            .all(|v| v.is_finite())
    }
}

/// `(e_p, e_v)` with `v_d = −m∘e_p + Ẋ_d`.
pub fn position_errors(
    state: &RigidBodyState,
    reference: &ReferenceSample,
    gains: &PositionGains,
) -> (Vec3, Vec3) {
    let e_p = state.position - reference.position;
    let v_d = -gains.m.component_mul(&e_p) + reference.velocity;
    (e_p, state.velocity - v_d)
}

/// Commanded translational acceleration.
pub fn commanded_acceleration(
    e_p: &Vec3,
    e_v: &Vec3,
    ctl: &PositionCtlState,
    reference: &ReferenceSample,
    gains: &PositionGains,
) -> Vec3 {
    let e_p_dot = e_v - gains.m.component_mul(e_p);
    -gains.m.component_mul(&e_p_dot) - e_p - ctl.n_hat.component_mul(e_v) + reference.acceleration
}

/// Virtual controls `(U_x, U_y, U_z)`.
pub fn virtual_controls(
    e_p: &Vec3,
    e_v: &Vec3,
    ctl: &PositionCtlState,
    reference: &ReferenceSample,
    gains: &PositionGains,
) -> Vec3 {
    -commanded_acceleration(e_p, e_v, ctl, reference, gains)
}

/// Explicit-Euler step of `n̂̇ = η∘e_v²`.
pub fn update_adaptation(
    ctl: &PositionCtlState,
    e_v: &Vec3,
    gains: &PositionGains,
    dt: f64,
) -> PositionCtlState {
    PositionCtlState {
        n_hat: ctl.n_hat + gains.eta.component_mul(&e_v.component_mul(e_v)) * dt,
        ..*ctl
    }
}

/// `F_th = m √(U_x² + U_y² + (U_z + g)²)`.
pub fn thrust_from_virtual(u: &Vec3, params: &VehicleParams) -> f64 {
    let z = u.z + params.gravity;
    params.mass * (u.x * u.x + u.y * u.y + z * z).sqrt()
}

/// Desired quaternion with `q3d = 0`.
pub fn desired_attitude(u: &Vec3, thrust: f64, params: &VehicleParams) -> Result<UnitQuaternion> {
    if !(thrust > THRUST_GUARD) {
        return Err(Error::ThrustDegenerate { thrust });
    }
    let m = params.mass;
    let radicand = m * (params.gravity + u.z) / (2.0 * thrust) + 0.5;
    let q0d = radicand.max(0.0).sqrt();
    if !(q0d > Q0D_GUARD) {
        return Err(Error::AttitudeDegenerate { q0d });
    }
    let q1d = -m * u.y / (2.0 * thrust * q0d);
    let q2d = m * u.x / (2.0 * thrust * q0d);
    Ok(UnitQuaternion::from_parts_unchecked(
        q0d,
        Vec3::new(q1d, q2d, 0.0),
    ))
}

/// The position-loop Lyapunov function without the parameter-error term.
pub fn tracking_energy(e_p: &Vec3, e_v: &Vec3) -> f64 {
    0.5 * (e_p.norm_squared() + e_v.norm_squared())
}
