//! Fixed-step closed loop: position loop, attitude loop, allocation, plant.

use crate::allocator::solve_mix;
use crate::attitude::{
    attitude_error, error_rates, sliding_surface, torque_command, update_gain_adaptation,
    AttitudeCtlState, AttitudeGains, DesiredRateEstimator,
};
use crate::baseline::{euler_from_quat, euler_smc_torque, EulerReferenceEstimator};
use crate::dynamics::{
    integrate_rk4, ControlInput, RigidBodyState, UncertaintySchedule, VehicleParams,
};
use crate::error::{Error, Result};
use crate::position::{
    desired_attitude, position_errors, thrust_from_virtual, tracking_energy, update_adaptation,
    virtual_controls, PositionCtlState, PositionGains, ReferenceSample,
};
use crate::quat::{error_product, UnitQuaternion, Vec3};
use crate::reference::Reference;

/// Bits of [`TraceRow::flags`].
pub mod flags {
    /// Some rotor needs a negative squared speed.
    pub const UNREALIZABLE: u32 = 1;
    /// `|cos θ|` of the plant attitude is at or below the gimbal guard.
    pub const GIMBAL_PROXIMITY: u32 = 2;
    /// Thrust above the configured limit.
    pub const THRUST_LIMIT: u32 = 4;
    /// Torque norm above the divergence threshold.
    pub const TORQUE_DIVERGENCE: u32 = 8;
    /// At least one surface axis uses the linear branch.
    pub const LINEAR_BRANCH: u32 = 16;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Controller {
    #[default]
    Quaternion,
    Euler,
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Quaternion => "quaternion",
            Controller::Euler => "euler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub dt: f64,
    pub duration: f64,
    /// RK4 substeps per control period.
    pub substeps: usize,
    /// Length of the final window used for RMSE metrics, s.
    pub metrics_window: f64,
    /// Initial interval excluded from the Lyapunov checks, s.
    pub transient_window: f64,
    pub position_threshold: f64,
    pub attitude_threshold: f64,
    pub reaching_threshold: f64,
    /// Torque norm counted as divergence, N·m.
    pub torque_limit: f64,
    pub thrust_limit: Option<f64>,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 60.0,
            substeps: 1,
            metrics_window: 20.0,
            transient_window: 1.0,
            position_threshold: 0.05,
            attitude_threshold: 0.01,
            reaching_threshold: 1e-3,
            torque_limit: 500.0,
            thrust_limit: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DebugHooks {
    /// Negates the x virtual control.
    pub flip_virtual_x: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vehicle: VehicleParams,
    pub pos_gains: PositionGains,
    pub att_gains: AttitudeGains,
    pub reference: Reference,
    pub uncertainty: UncertaintySchedule,
    pub init: RigidBodyState,
    pub controller: Controller,
    pub sim: SimSettings,
    pub debug: DebugHooks,
}

impl Scenario {
    /// The tracking experiment, starting `(2, −1, 0.5)` m off the reference.
    pub fn table2() -> Self {
        let reference = Reference::Table2;
        let start =
            reference.position_sample(0.0, &Vec3::zeros()).position + Vec3::new(2.0, -1.0, 0.5);
        Self {
            vehicle: VehicleParams::table2(),
            pos_gains: PositionGains::table2(),
            att_gains: AttitudeGains::table2(),
            reference,
            uncertainty: UncertaintySchedule::default(),
            init: RigidBodyState::at_rest(start),
            controller: Controller::Quaternion,
            sim: SimSettings::default(),
            debug: DebugHooks::default(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.sim.duration / self.sim.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidScenario(what));
        if let Some(f) = self.vehicle.invalid_field() {
            return bad(format!("vehicle.{f} must be positive"));
        }
        if self
            .pos_gains
            .m
            .iter()
            .any(|x| !(x.is_finite() && *x > 0.0))
        {
            return bad("position gains m must be positive".into());
        }
        if self
            .pos_gains
            .eta
            .iter()
            .any(|x| !(x.is_finite() && *x > 0.0))
        {
            return bad("position adaptation rates must be positive".into());
        }
        if let Some(f) = self.att_gains.invalid_field() {
            return bad(format!("attitude gain {f} is out of range"));
        }
        self.uncertainty.validate()?;
        self.reference.validate()?;
        let s = &self.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return bad("sim.dt must be positive".into());
        }
        if !(s.duration.is_finite() && s.duration >= 0.0) {
            return bad("sim.duration must be non-negative".into());
        }
        if s.duration > 0.0 && s.duration < s.dt {
            return bad("sim.duration must be zero or at least one step".into());
        }
        if s.substeps == 0 {
            return bad("sim.substeps must be at least 1".into());
        }
        if !self.init.is_finite() {
            return bad("initial state must be finite".into());
        }
        Ok(())
    }
}

/// One control step: the state at `t`, the commands held over `[t, t + dt]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub position: Vec3,
    pub reference: ReferenceSample,
    pub velocity: Vec3,
    pub attitude: UnitQuaternion,
    pub desired_attitude: UnitQuaternion,
    pub body_rates: Vec3,
    pub thrust: f64,
    pub torque: Vec3,
    pub s: Vec3,
    pub n_hat: Vec3,
    pub k_hat: Vec3,
    pub e0: f64,
    pub e_norm: f64,
    pub omega_sq: [f64; 4],
    pub flags: u32,
    pub e_p: Vec3,
    pub e_v: Vec3,
    pub virtual_control: Vec3,
    /// `−μ₁s − K̂∘smooth(s)`, the surface rate the torque asks for.
    pub reaching_target: Vec3,
    /// Per-axis surface branch, bit `i` set when axis `i` is fractional.
    pub branch: u8,
}

impl TraceRow {
    /// Position-loop Lyapunov function without the parameter term.
    pub fn tracking_energy(&self) -> f64 {
        tracking_energy(&self.e_p, &self.e_v)
    }
}

/// Closed-loop simulator advancing one control period at a time.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    state: RigidBodyState,
    pos: PositionCtlState,
    att: AttitudeCtlState,
    rates: DesiredRateEstimator,
    euler_ref: EulerReferenceEstimator,
    k: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario,
            state: scenario.init,
            pos: PositionCtlState::default(),
            att: AttitudeCtlState::new(&scenario.att_gains),
            rates: DesiredRateEstimator::new(scenario.att_gains.rate_cutoff),
            euler_ref: EulerReferenceEstimator::new(scenario.att_gains.rate_cutoff),
            k: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.scenario.sim.dt
    }

    pub fn state(&self) -> &RigidBodyState {
        &self.state
    }

    pub fn position_ctl(&self) -> &PositionCtlState {
        &self.pos
    }

    pub fn attitude_ctl(&self) -> &AttitudeCtlState {
        &self.att
    }

    /// Computes the commands for the current state and advances the controller states.
    pub fn control(&mut self) -> Result<(ControlInput, TraceRow)> {
        let t = self.time();
        self.control_at(t).map_err(|e| e.at(t))
    }

    fn control_at(&mut self, t: f64) -> Result<(ControlInput, TraceRow)> {
        let sc = self.scenario;
        let dt = sc.sim.dt;
        let params = &sc.vehicle;
        let gains = &sc.att_gains;
        let state = self.state;
        let reference = sc.reference.position_sample(t, &sc.init.position);
        let (e_p, e_v) = position_errors(&state, &reference, &sc.pos_gains);

        let (u, thrust, qd) = match sc.reference.attitude_command(t) {
            Some(qd) => (Vec3::zeros(), params.mass * params.gravity, qd),
            None => {
                let mut u = virtual_controls(&e_p, &e_v, &self.pos, &reference, &sc.pos_gains);
                if sc.debug.flip_virtual_x {
                    u.x = -u.x;
                }
                let thrust = thrust_from_virtual(&u, params);
                (u, thrust, desired_attitude(&u, thrust, params)?)
            }
        };

        let e_q = error_product(&state.attitude, &qd);
        let mut flags = 0;
        let (torque, s, reaching_target, branch) = match sc.controller {
            Controller::Quaternion => {
                let desired = self.rates.update(&qd, dt)?;
                let err = attitude_error(&state.attitude, &qd, &state.body_rates, &desired);
                let er = error_rates(&err);
                let s = sliding_surface(&err, &er.e_dot, gains, self.att.s.as_ref());
                let torque = torque_command(
                    &err,
                    &er,
                    &s,
                    &self.att,
                    &desired,
                    &state.body_rates,
                    params,
                    gains,
                );
                let target =
                    -gains.mu1 * s - self.att.k_hat.component_mul(&gains.smoothing.apply_vec(&s));
                let branch = (0..3).fold(0u8, |acc, i| {
                    let frac =
                        self.att.s.map(|p| p[i]) == Some(0.0) || err.e[i].abs() > gains.epsilon;
                    acc | (u8::from(frac) << i)
                });
                (torque, s, target, branch)
            }
            Controller::Euler => {
                let eref = self.euler_ref.update(&qd, dt);
                let es = euler_from_quat(&state.attitude);
                if es.gimbal_proximity {
                    flags |= flags::GIMBAL_PROXIMITY;
                }
                let (torque, s) = euler_smc_torque(&es, &state.body_rates, &eref, gains, params)?;
                let target = -gains.mu1 * s - gains.k_hat0 * gains.smoothing.apply_vec(&s);
                (torque, s, target, 0)
            }
        };
        if torque.iter().any(|x| !x.is_finite()) || !thrust.is_finite() {
            return Err(Error::NonFinite("control command"));
        }
        if branch != 0b111 && sc.controller == Controller::Quaternion {
            flags |= flags::LINEAR_BRANCH;
        }
        if torque.norm() > sc.sim.torque_limit {
            flags |= flags::TORQUE_DIVERGENCE;
        }
        if sc.sim.thrust_limit.is_some_and(|lim| thrust > lim) {
            flags |= flags::THRUST_LIMIT;
        }
        let rotors = solve_mix(&torque, thrust, params)?;
        if !rotors.is_realizable() {
            flags |= flags::UNREALIZABLE;
        }

        let row = TraceRow {
            t,
            position: state.position,
            reference,
            velocity: state.velocity,
            attitude: state.attitude,
            desired_attitude: qd,
            body_rates: state.body_rates,
            thrust,
            torque,
            s,
            n_hat: self.pos.n_hat,
            k_hat: self.att.k_hat,
            e0: e_q.scalar(),
            e_norm: e_q.vector().norm(),
            omega_sq: rotors.omega_sq,
            flags,
            e_p,
            e_v,
            virtual_control: u,
            reaching_target,
            branch,
        };

        if sc.reference.tracks_position() {
            self.pos = update_adaptation(&self.pos, &e_v, &sc.pos_gains, dt);
        }
        self.pos.last_virtual = u;
        self.pos.last_thrust = thrust;
        if sc.controller == Controller::Quaternion {
            self.att = update_gain_adaptation(&self.att, &s, gains, dt);
        }
        self.att.s = Some(s);
        self.att.last_torque = torque;
        Ok((ControlInput { thrust, torque }, row))
    }

    /// Integrates the plant over one control period with `input` held.
    pub fn advance(&mut self, input: &ControlInput) -> Result<()> {
        let sc = self.scenario;
        let t = self.time();
        let next = integrate_rk4(
            &self.state,
            input,
            t,
            sc.sim.dt,
            sc.sim.substeps,
            &sc.vehicle,
            &sc.uncertainty,
        )
        .map_err(|e| e.at(t))?;
        self.state = next.state;
        self.k += 1;
        Ok(())
    }

    /// Control, record, integrate.
    pub fn step(&mut self) -> Result<TraceRow> {
        let (input, row) = self.control()?;
        self.advance(&input)?;
        Ok(row)
    }
}

/// A finished or aborted run. On abort the trace holds every completed row.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Vec<TraceRow>,
    pub error: Option<Error>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs the scenario for its full duration. Fails only on an invalid scenario.
pub fn run(scenario: &Scenario) -> Result<RunOutcome> {
    let mut sim = Simulator::new(scenario)?;
    let n = scenario.steps();
    let mut trace = Vec::with_capacity(n + 1);
    for _ in 0..n {
        match sim.step() {
            Ok(row) => trace.push(row),
            Err(e) => {
                return Ok(RunOutcome {
                    trace,
                    error: Some(e),
                })
            }
        }
    }
    let error = match sim.control() {
        Ok((_, row)) => {
            trace.push(row);
            None
        }
        Err(e) => Some(e),
    };
    Ok(RunOutcome { trace, error })
}
