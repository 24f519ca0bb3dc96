//! Quadrotor rigid-body plant.
//!
//! Translation has gravity on the third inertial axis and thrust along the
//! negative body z axis; attitude is propagated in quaternion form with body
//! rates. Parametric uncertainty is applied here only; controllers always see
//! the nominal [`VehicleParams`].

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::quat::{UnitQuaternion, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// Principal inertias, kg·m².
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    /// m/s²
    pub gravity: f64,
    pub drag_coeff: f64,
    /// m
    pub arm_length: f64,
    pub thrust_factor: f64,
}

impl VehicleParams {
    /// Table II vehicle; the rotor coefficients are placeholders.
    pub fn table2() -> Self {
        Self {
            mass: 3.0,
            ixx: 1.5,
            iyy: 1.5,
            izz: 3.0,
            gravity: 9.8,
            drag_coeff: 0.1,
            arm_length: 0.2,
            thrust_factor: 5e-5,
        }
    }

    pub fn inertia(&self) -> Vec3 {
        Vec3::new(self.ixx, self.iyy, self.izz)
    }

    /// Returns the name of the first parameter that is not strictly positive and finite.
    pub fn invalid_field(&self) -> Option<&'static str> {
        [
            ("m", self.mass),
            ("ixx", self.ixx),
            ("iyy", self.iyy),
            ("izz", self.izz),
            ("g", self.gravity),
            ("c_d", self.drag_coeff),
            ("l_d", self.arm_length),
            ("b_d", self.thrust_factor),
        ]
        .into_iter()
        .find(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: UnitQuaternion,
    pub body_rates: Vec3,
}

impl RigidBodyState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            attitude: UnitQuaternion::IDENTITY,
            body_rates: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.attitude.to_array().iter().all(|v| v.is_finite())
            && self.body_rates.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    /// Total thrust, N.
    pub thrust: f64,
    /// Body torque, N·m.
    pub torque: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertainParam {
    Mass,
    Ixx,
    Iyy,
    Izz,
}

impl UncertainParam {
    pub fn name(&self) -> &'static str {
        match self {
            UncertainParam::Mass => "m",
            UncertainParam::Ixx => "ixx",
            UncertainParam::Iyy => "iyy",
            UncertainParam::Izz => "izz",
        }
    }
}

/// Multiplicative perturbation `p (1 + amplitude sin(frequency t + phase))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintySignal {
    pub target: UncertainParam,
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    /// rad
    pub phase: f64,
}

impl UncertaintySignal {
    pub fn factor(&self, t: f64) -> f64 {
        1.0 + self.amplitude * (self.frequency * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UncertaintySchedule {
    pub signals: Vec<UncertaintySignal>,
}

impl UncertaintySchedule {
    /// The four sinusoids of the robustness experiment applied to m, Ixx, Iyy, Izz in that order.
    pub fn table2_sinusoids() -> Self {
        let s = |target, amplitude, frequency, phase| UncertaintySignal {
            target,
            amplitude,
            frequency,
            phase,
        };
        Self {
            signals: vec![
                s(UncertainParam::Mass, 0.025, 0.03, 0.3),
                s(UncertainParam::Ixx, 0.03, 0.02, 0.25),
                s(UncertainParam::Iyy, 0.04, 0.04, 0.35),
                s(UncertainParam::Izz, 0.035, 0.015, 0.4),
            ],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.signals.iter().enumerate() {
            if !(s.amplitude.abs() < 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "uncertainty.signals[{i}].amplitude must satisfy |a| < 1"
                )));
            }
        }
        Ok(())
    }
}

/// Plant parameters at time `t` under the schedule.
pub fn params_at(t: f64, nominal: &VehicleParams, sched: &UncertaintySchedule) -> VehicleParams {
    let mut p = *nominal;
    for s in &sched.signals {
        let f = s.factor(t);
        match s.target {
            UncertainParam::Mass => p.mass *= f,
            UncertainParam::Ixx => p.ixx *= f,
            UncertainParam::Iyy => p.iyy *= f,
            UncertainParam::Izz => p.izz *= f,
        }
    }
    p
}

fn translation_raw(v: &Vec3, q: &[f64; 4], u: &ControlInput, p: &VehicleParams) -> (Vec3, Vec3) {
    let [q0, q1, q2, q3] = *q;
    let f = u.thrust / p.mass;
    let acc = Vec3::new(
        -2.0 * f * (q0 * q2 + q1 * q3),
        -2.0 * f * (q2 * q3 - q0 * q1),
        -f * (q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3) + p.gravity,
    );
    (*v, acc)
}

fn rotation_raw(w: &Vec3, u: &ControlInput, p: &VehicleParams) -> Vec3 {
    let (pv, qv, rv) = (w.x, w.y, w.z);
    Vec3::new(
        ((p.iyy - p.izz) * qv * rv + u.torque.x) / p.ixx,
        ((p.izz - p.ixx) * rv * pv + u.torque.y) / p.iyy,
        ((p.ixx - p.iyy) * pv * qv + u.torque.z) / p.izz,
    )
}

fn kinematics_raw(q: &[f64; 4], w: &Vec3) -> [f64; 4] {
    let [q0, q1, q2, q3] = *q;
    let (p, qv, r) = (w.x, w.y, w.z);
    [
        -0.5 * (q1 * p + q2 * qv + q3 * r),
        0.5 * (q0 * p - q3 * qv + q2 * r),
        0.5 * (q3 * p + q0 * qv - q1 * r),
        0.5 * (-q2 * p + q1 * qv + q0 * r),
    ]
}

/// `(Ẋ, V̇)` of the translational subsystem.
pub fn translation_rhs(
    state: &RigidBodyState,
    u: &ControlInput,
    params: &VehicleParams,
) -> (Vec3, Vec3) {
    translation_raw(&state.velocity, &state.attitude.to_array(), u, params)
}

/// Body angular acceleration from Euler's rigid-body equations.
pub fn rotation_rhs(state: &RigidBodyState, u: &ControlInput, params: &VehicleParams) -> Vec3 {
    rotation_raw(&state.body_rates, u, params)
}

/// Quaternion derivative `½ Q ⊗ (0, Ω_B)`.
pub fn quat_kinematics_rhs(state: &RigidBodyState) -> [f64; 4] {
    kinematics_raw(&state.attitude.to_array(), &state.body_rates)
}

type Packed = SVector<f64, 13>;

fn pack(s: &RigidBodyState) -> Packed {
    let q = s.attitude.to_array();
    let mut x = Packed::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&s.position);
    x.fixed_rows_mut::<3>(3).copy_from(&s.velocity);
    for (i, c) in q.iter().enumerate() {
        x[6 + i] = *c;
    }
    x.fixed_rows_mut::<3>(10).copy_from(&s.body_rates);
    x
}

fn packed_rhs(x: &Packed, u: &ControlInput, p: &VehicleParams) -> Packed {
    let v = Vec3::new(x[3], x[4], x[5]);
    let q = [x[6], x[7], x[8], x[9]];
    let w = Vec3::new(x[10], x[11], x[12]);
    let (xd, vd) = translation_raw(&v, &q, u, p);
    let qd = kinematics_raw(&q, &w);
    let wd = rotation_raw(&w, u, p);
    let mut d = Packed::zeros();
    d.fixed_rows_mut::<3>(0).copy_from(&xd);
    d.fixed_rows_mut::<3>(3).copy_from(&vd);
    for (i, c) in qd.iter().enumerate() {
        d[6 + i] = *c;
    }
    d.fixed_rows_mut::<3>(10).copy_from(&wd);
    d
}

/// Result of one integrator macro-step before renormalization.
#[derive(Debug, Clone, Copy)]
pub struct PlantStep {
    pub state: RigidBodyState,
    /// `‖Q‖ - 1` accumulated over the step, before renormalization.
    pub norm_drift: f64,
}

/// Integrates the plant over `[t, t + dt]` with `substeps` RK4 steps and a
/// zero-order-hold input, then renormalizes the quaternion once.
pub fn integrate_rk4(
    state: &RigidBodyState,
    u: &ControlInput,
    t: f64,
    dt: f64,
    substeps: usize,
    nominal: &VehicleParams,
    sched: &UncertaintySchedule,
) -> Result<PlantStep> {
    let n = substeps.max(1);
    let h = dt / n as f64;
    let mut x = pack(state);
    let params = |tau: f64| params_at(tau, nominal, sched);
    for i in 0..n {
        let ti = t + i as f64 * h;
        let k1 = packed_rhs(&x, u, &params(ti));
        let k2 = packed_rhs(&(x + k1 * (h / 2.0)), u, &params(ti + h / 2.0));
        let k3 = packed_rhs(&(x + k2 * (h / 2.0)), u, &params(ti + h / 2.0));
        let k4 = packed_rhs(&(x + k3 * h), u, &params(ti + h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("plant state"));
    }
    let q = [x[6], x[7], x[8], x[9]];
    let raw_norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    let attitude = crate::quat::normalize(q)?;
    Ok(PlantStep {
        state: RigidBodyState {
            position: Vec3::new(x[0], x[1], x[2]),
            velocity: Vec3::new(x[3], x[4], x[5]),
            attitude,
            body_rates: Vec3::new(x[10], x[11], x[12]),
        },
        norm_drift: raw_norm - 1.0,
    })
}
