//! Euler-angle sliding-mode attitude controller used as a comparison arm.
//!
//! Z-Y-X angles `η = (φ, θ, ψ)` with body rates `Ω = W(φ, θ)·η̇`. The surface
//! is linear, `s = ė + γ₁e`, and the reaching law matches the quaternion
//! controller's `−μ₁s − K∘smooth(s)` with the gain held at `k̂(0)`.

use crate::attitude::AttitudeGains;
use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::filter::{BackwardDifference, LowPass};
use crate::quat::{Mat3, UnitQuaternion, Vec3};

/// `|cos θ|` at or below which `W` is treated as singular.
pub const GIMBAL_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub gimbal_proximity: bool,
}

impl EulerState {
    pub fn angles(&self) -> Vec3 {
        Vec3::new(self.phi, self.theta, self.psi)
    }

    pub fn rate_matrix(&self) -> Mat3 {
        rate_matrix(self.phi, self.theta)
    }
}

pub fn euler_from_quat(q: &UnitQuaternion) -> EulerState {
    let r = q.to_rotation();
    let r = r.matrix();
    let theta = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
    EulerState {
        phi: r[(2, 1)].atan2(r[(2, 2)]),
        theta,
        psi: r[(1, 0)].atan2(r[(0, 0)]),
        gimbal_proximity: theta.cos().abs() <= GIMBAL_GUARD,
    }
}

/// `Rz(ψ)·Ry(θ)·Rx(φ)` as a quaternion.
pub fn quat_from_euler(angles: &Vec3) -> UnitQuaternion {
    let (sr, cr) = (0.5 * angles.x).sin_cos();
    let (sp, cp) = (0.5 * angles.y).sin_cos();
    let (sy, cy) = (0.5 * angles.z).sin_cos();
    UnitQuaternion::from_parts_unchecked(
        cr * cp * cy + sr * sp * sy,
        Vec3::new(
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        ),
    )
}

/// `W` with `Ω = W·η̇`.
pub fn rate_matrix(phi: f64, theta: f64) -> Mat3 {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    #[rustfmt::skip]
    let w = Mat3::new(
        1.0, 0.0, -st,
        0.0, cf,  sf * ct,
        0.0, -sf, cf * ct,
    );
    w
}

pub fn rate_matrix_inverse(phi: f64, theta: f64) -> Result<Mat3> {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    if ct.abs() <= GIMBAL_GUARD {
        return Err(Error::GimbalSingular { cos_theta: ct });
    }
    let tt = st / ct;
    #[rustfmt::skip]
    let w = Mat3::new(
        1.0, sf * tt,  cf * tt,
        0.0, cf,       -sf,
        0.0, sf / ct,  cf / ct,
    );
    Ok(w)
}

/// `Ẇ` along `(φ̇, θ̇)`.
pub fn rate_matrix_derivative(phi: f64, theta: f64, phi_dot: f64, theta_dot: f64) -> Mat3 {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    #[rustfmt::skip]
    let w = Mat3::new(
        0.0, 0.0,            -ct * theta_dot,
        0.0, -sf * phi_dot,  cf * ct * phi_dot - sf * st * theta_dot,
        0.0, -cf * phi_dot,  -sf * ct * phi_dot - cf * st * theta_dot,
    );
    w
}

/// Wraps to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let y = x - two_pi * (x / two_pi).round();
    if y <= -std::f64::consts::PI {
        y + two_pi
    } else {
        y
    }
}

/// Desired angles and their first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerReference {
    pub angles: Vec3,
    pub rates: Vec3,
    pub accels: Vec3,
}

/// Unwraps the desired angles from successive desired attitudes and
/// differentiates them the same way as the quaternion arm's rate estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerReferenceEstimator {
    unwrapped: Option<Vec3>,
    diff: BackwardDifference<3>,
    filter: LowPass,
}

impl EulerReferenceEstimator {
    pub fn new(cutoff: f64) -> Self {
        Self {
            unwrapped: None,
            diff: BackwardDifference::default(),
            filter: LowPass::new(cutoff),
        }
    }

    pub fn update(&mut self, qd: &UnitQuaternion, dt: f64) -> EulerReference {
        let raw = euler_from_quat(qd).angles();
        let angles = match self.unwrapped {
            None => raw,
            Some(prev) => prev + Vec3::from_fn(|i, _| wrap_angle(raw[i] - prev[i])),
        };
        self.unwrapped = Some(angles);
        let d = self.diff.push([angles.x, angles.y, angles.z], dt);
        let (rates, accels) = self.filter.push(Vec3::from(d), dt);
        EulerReference {
            angles,
            rates,
            accels,
        }
    }
}

/// Angle and angle-rate errors for the current state.
pub fn euler_errors(
    state: &EulerState,
    omega_b: &Vec3,
    reference: &EulerReference,
) -> Result<(Vec3, Vec3, Vec3)> {
    let w_inv = rate_matrix_inverse(state.phi, state.theta)?;
    let eta_dot = w_inv * omega_b;
    let e = Vec3::from_fn(|i, _| wrap_angle(state.angles()[i] - reference.angles[i]));
    Ok((e, eta_dot - reference.rates, eta_dot))
}

/// Body torque from the linear-surface reaching law.
pub fn euler_smc_torque(
    state: &EulerState,
    omega_b: &Vec3,
    reference: &EulerReference,
    gains: &AttitudeGains,
    params: &VehicleParams,
) -> Result<(Vec3, Vec3)> {
    let (e, e_dot, eta_dot) = euler_errors(state, omega_b, reference)?;
    let s = e_dot + gains.gamma1 * e;
    let eta_ddot = reference.accels
        - gains.gamma1 * e_dot
        - gains.mu1 * s
        - gains.k_hat0 * gains.smoothing.apply_vec(&s);
    let w = state.rate_matrix();
    let w_dot = rate_matrix_derivative(state.phi, state.theta, eta_dot.x, eta_dot.y);
    let j = Mat3::from_diagonal(&params.inertia());
    let omega_dot = w * eta_ddot + w_dot * eta_dot;
    Ok((j * omega_dot - (j * omega_b).cross(omega_b), s))
}
