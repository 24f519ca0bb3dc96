//! Adaptive fast terminal sliding-mode attitude controller.
//!
//! The torque is chosen so that the surface obeys `ṡ = −μ₁s − K̂∘smooth(s)`
//! exactly when the model is known, with
//! `M = γ₃I + ½(e₀I + [e]×)` multiplying `Ω̇_e` in `ṡ`.

use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::filter::{BackwardDifference, LowPass};
use crate::quat::{error_product, skew, Mat3, RotationMatrix, UnitQuaternion, Vec3};

/// Guard on `|det(q0d·I + [q_d]×)|`.
pub const RATE_MAP_GUARD: f64 = 1e-6;

/// Replacement for `sign(·)` in the reaching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    Sign,
    Tanh { beta: f64 },
}

impl Smoothing {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Smoothing::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Smoothing::Tanh { beta } => (beta * x).tanh(),
        }
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        v.map(|x| self.apply(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeGains {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    /// Numerator of the terminal exponent, odd.
    pub n: u32,
    /// Denominator of the terminal exponent, odd.
    pub l: u32,
    pub epsilon: f64,
    pub mu1: f64,
    pub lambda: f64,
    pub smoothing: Smoothing,
    pub k_hat0: f64,
    /// Low-pass cutoff applied to the desired body rate, rad/s.
    pub rate_cutoff: f64,
}

impl AttitudeGains {
    pub fn table2() -> Self {
        Self {
            gamma1: 10.0,
            gamma2: 30.0,
            gamma3: 1.0,
            n: 3,
            l: 5,
            epsilon: 1e-3,
            mu1: 5.0,
            lambda: 30.0,
            smoothing: Smoothing::Tanh { beta: 10.0 },
            k_hat0: 0.1,
            rate_cutoff: 50.0,
        }
    }

    pub fn exponent(&self) -> f64 {
        f64::from(self.n) / f64::from(self.l)
    }

    /// Name of the first gain that breaks its invariant.
    pub fn invalid_field(&self) -> Option<&'static str> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.gamma1) {
            return Some("gamma1");
        }
        if !positive(self.gamma2) {
            return Some("gamma2");
        }
        if !positive(self.gamma3) {
            return Some("gamma3");
        }
        if self.n == 0 || self.n.is_multiple_of(2) {
            return Some("n");
        }
        if self.l.is_multiple_of(2) || self.n >= self.l {
            return Some("l");
        }
        if !positive(self.epsilon) {
            return Some("epsilon");
        }
        if !positive(self.mu1) {
            return Some("mu1");
        }
        if !positive(self.lambda) {
            return Some("lambda");
        }
        if let Smoothing::Tanh { beta } = self.smoothing {
            if !positive(beta) {
                return Some("beta");
            }
        }
        if !(self.k_hat0.is_finite() && self.k_hat0 >= 0.0) {
            return Some("k_hat0");
        }
        if !positive(self.rate_cutoff) {
            return Some("rate_cutoff");
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeCtlState {
    pub k_hat: Vec3,
    /// Surface value from the previous control step.
    pub s: Option<Vec3>,
    pub last_torque: Vec3,
}

impl AttitudeCtlState {
    pub fn new(gains: &AttitudeGains) -> Self {
        Self {
            k_hat: Vec3::repeat(gains.k_hat0),
            s: None,
            last_torque: Vec3::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeError {
    pub e0: f64,
    pub e: Vec3,
    /// Desired body frame to body frame.
    pub r_e: RotationMatrix,
    pub omega_e: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesiredRates {
    pub omega_d: Vec3,
    pub omega_d_dot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub e0_dot: f64,
    pub e_dot: Vec3,
}

pub fn attitude_error(
    q: &UnitQuaternion,
    qd: &UnitQuaternion,
    omega_b: &Vec3,
    rates: &DesiredRates,
) -> AttitudeError {
    let err = error_product(q, qd);
    let r_e = q.to_rotation().transpose().compose(&qd.to_rotation());
    AttitudeError {
        e0: err.scalar(),
        e: err.vector(),
        omega_e: omega_b - r_e.apply(&rates.omega_d),
        r_e,
    }
}

pub fn error_rates(err: &AttitudeError) -> ErrorRates {
    ErrorRates {
        e0_dot: -0.5 * err.e.dot(&err.omega_e),
        e_dot: 0.5 * (err.e0 * err.omega_e + err.e.cross(&err.omega_e)),
    }
}

/// `sign(x)·|x|^a`.
pub fn sgnpow(x: f64, a: f64) -> f64 {
    x.signum() * x.abs().powf(a)
}

fn fractional_branch(e: f64, s_prev: Option<f64>, gains: &AttitudeGains) -> bool {
    s_prev == Some(0.0) || e.abs() > gains.epsilon
}

/// Switched terminal term for one axis.
pub fn delta(e: f64, s_prev: Option<f64>, gains: &AttitudeGains) -> f64 {
    if fractional_branch(e, s_prev, gains) {
        sgnpow(e, gains.exponent())
    } else {
        e
    }
}

/// `∂Δ/∂e` on the branch selected by [`delta`]. Zero at `e = 0` on the fractional branch.
pub fn delta_slope(e: f64, s_prev: Option<f64>, gains: &AttitudeGains) -> f64 {
    if !fractional_branch(e, s_prev, gains) {
        return 1.0;
    }
    if e == 0.0 {
        return 0.0;
    }
    let a = gains.exponent();
    a * e.abs().powf(a - 1.0)
}

fn per_axis(e: &Vec3, s_prev: Option<&Vec3>, f: impl Fn(f64, Option<f64>) -> f64) -> Vec3 {
    Vec3::from_fn(|i, _| f(e[i], s_prev.map(|s| s[i])))
}

/// `s = ė + γ₁e + γ₂Δ(e) + γ₃Ω_e`.
pub fn sliding_surface(
    err: &AttitudeError,
    e_dot: &Vec3,
    gains: &AttitudeGains,
    s_prev: Option<&Vec3>,
) -> Vec3 {
    let d = per_axis(&err.e, s_prev, |e, s| delta(e, s, gains));
    e_dot + gains.gamma1 * err.e + gains.gamma2 * d + gains.gamma3 * err.omega_e
}

/// `M = γ₃I + ½(e₀I + [e]×)`.
pub fn surface_rate_matrix(err: &AttitudeError, gains: &AttitudeGains) -> Mat3 {
    Mat3::identity() * (gains.gamma3 + 0.5 * err.e0) + 0.5 * skew(&err.e)
}

/// Body torque realizing the reaching law.
#[allow(clippy::too_many_arguments)]
pub fn torque_command(
    err: &AttitudeError,
    rates: &ErrorRates,
    s: &Vec3,
    ctl: &AttitudeCtlState,
    desired: &DesiredRates,
    omega_b: &Vec3,
    params: &VehicleParams,
    gains: &AttitudeGains,
) -> Vec3 {
    let j = Mat3::from_diagonal(&params.inertia());
    let slope = per_axis(&err.e, ctl.s.as_ref(), |e, sp| delta_slope(e, sp, gains));
    let e_dot = rates.e_dot;
    let reach = -gains.mu1 * s - ctl.k_hat.component_mul(&gains.smoothing.apply_vec(s));
    let inner = reach
        - 0.5 * rates.e0_dot * err.omega_e
        - 0.5 * e_dot.cross(&err.omega_e)
        - gains.gamma1 * e_dot
        - gains.gamma2 * slope.component_mul(&e_dot);
    let m = surface_rate_matrix(err, gains);
    let m_inv_inner = m
        .lu()
        .solve(&inner)
        .unwrap_or_else(|| Vec3::repeat(f64::NAN));
    let rd = err.r_e.apply(&desired.omega_d);
    j * (m_inv_inner - err.omega_e.cross(&rd) + err.r_e.apply(&desired.omega_d_dot))
        - (j * omega_b).cross(omega_b)
}

/// Explicit-Euler step of `k̂̇ᵢ = λ‖s‖`.
pub fn update_gain_adaptation(
    ctl: &AttitudeCtlState,
    s: &Vec3,
    gains: &AttitudeGains,
    dt: f64,
) -> AttitudeCtlState {
    AttitudeCtlState {
        k_hat: ctl.k_hat.add_scalar(gains.lambda * s.norm() * dt),
        ..*ctl
    }
}

/// Upper bound on the time to reach `s = 0` from `V(0) = V0`.
pub fn reaching_time_bound(v0: f64, mu1: f64, mu2: f64) -> Result<f64> {
    if !(mu2 > 0.0) {
        return Err(Error::InvalidBound("mu2 must be positive"));
    }
    if !(mu1 > 0.0) {
        return Err(Error::InvalidBound("mu1 must be positive"));
    }
    if !(v0 >= 0.0) {
        return Err(Error::InvalidBound("V0 must be non-negative"));
    }
    let rho = mu2 * std::f64::consts::SQRT_2;
    Ok(2.0 / mu1 * ((mu1 * v0.sqrt() + rho) / rho).ln())
}

/// Body rate `Ω` with `q̇_vec = ½(q0·I + [q]×)Ω`.
pub fn body_rate_from_derivative(q: &UnitQuaternion, q_dot: &[f64; 4]) -> Result<Vec3> {
    let w = q.scalar();
    let v = q.vector();
    let det = w * (w * w + v.norm_squared());
    if !(det.abs() > RATE_MAP_GUARD) {
        return Err(Error::DegenerateDesiredAttitude { det });
    }
    let a = Mat3::identity() * w + skew(&v);
    let rhs = 2.0 * Vec3::new(q_dot[1], q_dot[2], q_dot[3]);
    a.lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateDesiredAttitude { det })
}

/// Causal estimate of `Ω_d` and `Ω̇_d` from the stream of desired attitudes.
///
/// Backward differences over the last three samples (two at the second
/// sample, none at the first), followed by a first-order low-pass whose
/// derivative supplies `Ω̇_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredRateEstimator {
    diff: BackwardDifference<4>,
    filter: LowPass,
}

impl DesiredRateEstimator {
    pub fn new(cutoff: f64) -> Self {
        Self {
            diff: BackwardDifference::default(),
            filter: LowPass::new(cutoff),
        }
    }

    /// Feeds the desired attitude of the current control step.
    pub fn update(&mut self, qd: &UnitQuaternion, dt: f64) -> Result<DesiredRates> {
        let mut sample = qd.to_array();
        if let Some(last) = self.diff.last() {
            let dot: f64 = last.iter().zip(&sample).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                sample = sample.map(|x| -x);
            }
        }
        let q_dot = self.diff.push(sample, dt);
        let oriented = UnitQuaternion::from_parts_unchecked(
            sample[0],
            Vec3::new(sample[1], sample[2], sample[3]),
        );
        let raw = body_rate_from_derivative(&oriented, &q_dot)?;
        let (omega_d, omega_d_dot) = self.filter.push(raw, dt);
        Ok(DesiredRates {
            omega_d,
            omega_d_dot,
        })
    }
}

/// Runs [`DesiredRateEstimator`] over a recorded desired-attitude trace.
pub fn desired_rates(trace: &[UnitQuaternion], dt: f64, cutoff: f64) -> Result<Vec<DesiredRates>> {
    let mut est = DesiredRateEstimator::new(cutoff);
    trace.iter().map(|q| est.update(q, dt)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_quat() -> impl Strategy<Value = UnitQuaternion> {
        prop::array::uniform4(-1.0f64..1.0)
            .prop_filter("non-degenerate", |a| {
                a.iter().map(|x| x * x).sum::<f64>() > 1e-3
            })
            .prop_map(|a| crate::quat::normalize(a).unwrap())
    }

    fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-r..r).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
    }

    #[test]
    fn zero_error() {
        let q = UnitQuaternion::from_axis_angle(&Vec3::new(1.0, 2.0, 0.5), 0.7).unwrap();
        let rates = DesiredRates {
            omega_d: Vec3::new(0.1, -0.2, 0.3),
            omega_d_dot: Vec3::zeros(),
        };
        let err = attitude_error(&q, &q, &rates.omega_d, &rates);
        assert_abs_diff_eq!(err.e0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(err.e, Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(err.omega_e, Vec3::zeros(), epsilon = 1e-15);
        assert!(err.r_e.orthogonality_defect() < 1e-12);
    }

    #[test]
    fn half_turn_about_z() {
        let qd = UnitQuaternion::from_parts_unchecked(0.0, Vec3::new(0.0, 0.0, 1.0));
        let err = attitude_error(
            &UnitQuaternion::IDENTITY,
            &qd,
            &Vec3::zeros(),
            &DesiredRates::default(),
        );
        assert_eq!(err.e0, 0.0);
        assert_eq!(err.e, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn terminal_power_examples() {
        let g = AttitudeGains::table2();
        assert_abs_diff_eq!(
            delta(0.5, None, &g),
            0.659_753_955_386_447_1,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            delta(-0.5, None, &g),
            -0.659_753_955_386_447_1,
            epsilon = 1e-12
        );
        // inside the threshold the term is linear unless the surface was exactly zero
        assert_eq!(delta(5e-4, Some(0.2), &g), 5e-4);
        assert_abs_diff_eq!(
            delta(5e-4, Some(0.0), &g),
            5e-4f64.powf(0.6),
            epsilon = 1e-15
        );
        assert_eq!(delta_slope(5e-4, Some(0.2), &g), 1.0);
        assert_eq!(delta_slope(0.0, Some(0.0), &g), 0.0);
    }

    #[test]
    fn surface_vanishes_at_zero_error() {
        let g = AttitudeGains::table2();
        let err = attitude_error(
            &UnitQuaternion::IDENTITY,
            &UnitQuaternion::IDENTITY,
            &Vec3::zeros(),
            &DesiredRates::default(),
        );
        let r = error_rates(&err);
        assert_eq!(sliding_surface(&err, &r.e_dot, &g, None), Vec3::zeros());
    }

    #[test]
    fn equilibrium_torque_is_zero() {
        let g = AttitudeGains::table2();
        let p = VehicleParams::table2();
        let rates = DesiredRates::default();
        let err = attitude_error(
            &UnitQuaternion::IDENTITY,
            &UnitQuaternion::IDENTITY,
            &Vec3::zeros(),
            &rates,
        );
        let r = error_rates(&err);
        let ctl = AttitudeCtlState::new(&g);
        let t = torque_command(
            &err,
            &r,
            &Vec3::zeros(),
            &ctl,
            &rates,
            &Vec3::zeros(),
            &p,
            &g,
        );
        assert_eq!(t, Vec3::zeros());
    }

    #[test]
    fn rate_matrix_at_identity_error() {
        let g = AttitudeGains::table2();
        let err = attitude_error(
            &UnitQuaternion::IDENTITY,
            &UnitQuaternion::IDENTITY,
            &Vec3::zeros(),
            &DesiredRates::default(),
        );
        let m = surface_rate_matrix(&err, &g);
        assert_abs_diff_eq!(m, Mat3::identity() * 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            m.try_inverse().unwrap(),
            Mat3::identity() * (2.0 / 3.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gain_adaptation_examples() {
        let g = AttitudeGains::table2();
        let ctl = AttitudeCtlState::new(&g);
        assert_eq!(update_gain_adaptation(&ctl, &Vec3::zeros(), &g, 1e-3), ctl);
        let next = update_gain_adaptation(&ctl, &Vec3::new(0.06, 0.0, 0.08), &g, 1e-3);
        assert_abs_diff_eq!(next.k_hat, Vec3::repeat(0.1 + 3e-3), epsilon = 1e-15);
        assert_eq!(next.k_hat.x, next.k_hat.y);
        assert_eq!(next.k_hat.y, next.k_hat.z);
    }

    #[test]
    fn reaching_time_examples() {
        assert_eq!(reaching_time_bound(0.0, 5.0, 0.1).unwrap(), 0.0);
        assert_abs_diff_eq!(
            reaching_time_bound(2.0, 2.0, 1.0).unwrap(),
            3f64.ln(),
            epsilon = 1e-12
        );
        assert!(matches!(
            reaching_time_bound(1.0, 2.0, 0.0),
            Err(Error::InvalidBound(_))
        ));
        assert!(matches!(
            reaching_time_bound(1.0, 2.0, -1.0),
            Err(Error::InvalidBound(_))
        ));
    }

    #[test]
    fn constant_desired_attitude_has_zero_rates() {
        let q = UnitQuaternion::from_axis_angle(&Vec3::new(0.3, -0.2, 0.0), 0.4).unwrap();
        let out = desired_rates(&[q; 20], 1e-3, 50.0).unwrap();
        for r in out {
            assert_abs_diff_eq!(r.omega_d, Vec3::zeros(), epsilon = 1e-12);
            assert_abs_diff_eq!(r.omega_d_dot, Vec3::zeros(), epsilon = 1e-9);
        }
    }

    #[test]
    fn uniform_yaw_rotation_recovers_rate() {
        let omega = 0.8;
        let dt = 1e-3;
        let trace: Vec<_> = (0..2000)
            .map(|k| UnitQuaternion::from_axis_angle(&Vec3::z(), omega * k as f64 * dt).unwrap())
            .collect();
        let out = desired_rates(&trace, dt, 50.0).unwrap();
        for r in &out[400..] {
            assert_abs_diff_eq!(
                r.omega_d,
                Vec3::new(0.0, 0.0, omega),
                epsilon = 1e-3 * omega
            );
            assert_abs_diff_eq!(r.omega_d_dot, Vec3::zeros(), epsilon = 1e-3);
        }
    }

    #[test]
    fn tilted_uniform_rotation_recovers_body_rate() {
        // Q_d(t) = Q0 ⊗ exp(ωt/2 · axis): constant body rate ω·axis
        let q0 = UnitQuaternion::from_axis_angle(&Vec3::new(1.0, 1.0, 0.0), 0.5).unwrap();
        let axis = Vec3::new(0.0, 1.0, 0.0);
        let omega = 0.6;
        let dt = 1e-3;
        let trace: Vec<_> = (0..1000)
            .map(|k| q0 * UnitQuaternion::from_axis_angle(&axis, omega * k as f64 * dt).unwrap())
            .collect();
        let out = desired_rates(&trace, dt, 50.0).unwrap();
        assert_abs_diff_eq!(out[999].omega_d, axis * omega, epsilon = 1e-3 * omega);
    }

    #[test]
    fn rate_map_determinant_is_scalar_part() {
        let q = UnitQuaternion::from_axis_angle(&Vec3::new(0.2, -0.7, 0.4), 1.3).unwrap();
        let a = Mat3::identity() * q.scalar() + skew(&q.vector());
        assert_abs_diff_eq!(a.determinant(), q.scalar(), epsilon = 1e-12);
    }

    #[test]
    fn rate_map_guard_trips_at_half_turn() {
        let q = UnitQuaternion::from_parts_unchecked(0.0, Vec3::new(1.0, 0.0, 0.0));
        assert!(matches!(
            body_rate_from_derivative(&q, &[0.0, 0.0, 0.1, 0.0]),
            Err(Error::DegenerateDesiredAttitude { .. })
        ));
    }

    #[test]
    fn smoothing_modes() {
        assert_eq!(Smoothing::Sign.apply(-3.0), -1.0);
        assert_eq!(Smoothing::Sign.apply(0.0), 0.0);
        assert_abs_diff_eq!(
            Smoothing::Tanh { beta: 10.0 }.apply(0.05),
            0.5f64.tanh(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gains_validation() {
        assert_eq!(AttitudeGains::table2().invalid_field(), None);
        let g = AttitudeGains {
            l: 3,
            ..AttitudeGains::table2()
        };
        assert_eq!(g.invalid_field(), Some("l"));
        let g = AttitudeGains {
            mu1: 0.0,
            ..AttitudeGains::table2()
        };
        assert_eq!(g.invalid_field(), Some("mu1"));
    }

    proptest! {
        #[test]
        fn error_is_unit(q in unit_quat(), qd in unit_quat()) {
            let err = attitude_error(&q, &qd, &Vec3::zeros(), &DesiredRates::default());
            prop_assert!((err.e0 * err.e0 + err.e.norm_squared() - 1.0).abs() <= 1e-12);
            prop_assert!(err.r_e.orthogonality_defect() <= 1e-9);
        }

        #[test]
        fn error_rotation_matches_error_quaternion(q in unit_quat(), qd in unit_quat()) {
            let err = attitude_error(&q, &qd, &Vec3::zeros(), &DesiredRates::default());
            let eq = UnitQuaternion::from_parts_unchecked(err.e0, err.e);
            let diff = eq.to_rotation().transpose().matrix() - err.r_e.matrix();
            prop_assert!(diff.abs().max() <= 1e-12);
        }

        #[test]
        fn rate_matrix_well_conditioned(q in unit_quat()) {
            let g = AttitudeGains::table2();
            let err = attitude_error(&q, &UnitQuaternion::IDENTITY, &Vec3::zeros(), &DesiredRates::default());
            let sv = surface_rate_matrix(&err, &g).singular_values();
            prop_assert!(sv.max() / sv.min() <= 10.0);
        }

        #[test]
        fn delta_slope_matches_finite_difference(e in prop_oneof![-0.9f64..-0.01, 0.01f64..0.9]) {
            let g = AttitudeGains::table2();
            let h = 1e-6;
            let fd = (delta(e + h, None, &g) - delta(e - h, None, &g)) / (2.0 * h);
            let an = delta_slope(e, None, &g);
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs());
        }

        #[test]
        fn delta_is_odd(e in -1.0f64..1.0) {
            let g = AttitudeGains::table2();
            prop_assert_eq!(delta(-e, None, &g), -delta(e, None, &g));
        }

        #[test]
        fn reaching_bound_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(reaching_time_bound(lo, 5.0, 0.1).unwrap() <= reaching_time_bound(hi, 5.0, 0.1).unwrap());
        }

        #[test]
        fn error_kinematics_match_finite_difference(q in unit_quat(), qd in unit_quat(), w in vec3(2.0)) {
            // desired attitude held fixed, body rotating at w
            let h = 1e-6;
            let step = |sign: f64| {
                let dq = UnitQuaternion::from_axis_angle(&w, sign * h * w.norm()).unwrap_or_default();
                error_product(&(q * dq), &qd)
            };
            let (plus, minus) = (step(1.0), step(-1.0));
            let err = attitude_error(&q, &qd, &w, &DesiredRates::default());
            let r = error_rates(&err);
            let fd = (plus.vector() - minus.vector()) / (2.0 * h);
            let fd0 = (plus.scalar() - minus.scalar()) / (2.0 * h);
            prop_assert!((fd - r.e_dot).abs().max() <= 1e-6);
            prop_assert!((fd0 - r.e0_dot).abs() <= 1e-6);
        }
    }
}
