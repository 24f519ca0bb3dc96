//! Scalar summaries of a closed-loop trace.

use crate::attitude::reaching_time_bound;
use crate::error::Error;
use crate::sim::{flags, Scenario, TraceRow};

/// Absolute part of the tolerance below which a Lyapunov increase counts as rounding.
pub const LYAPUNOV_ABS_FLOOR: f64 = 1e-12;
/// Relative part of the same tolerance.
pub const LYAPUNOV_REL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub samples: usize,
    pub completed: bool,
    pub final_time: f64,
    /// Per axis, over the final window. `None` without a position reference.
    pub rmse_position: Option<[f64; 3]>,
    /// RMS of `‖e‖` over the final window.
    pub rmse_attitude: f64,
    /// Mean of `‖e‖` over the final window.
    pub mean_attitude_error: f64,
    pub convergence_time_position: Option<f64>,
    pub convergence_time_attitude: Option<f64>,
    /// Total variation of each torque component, N·m.
    pub chattering_index: [f64; 3],
    pub max_thrust: f64,
    pub max_torque: [f64; 3],
    pub max_torque_norm: f64,
    pub lyapunov_violations_position: usize,
    pub lyapunov_violations_attitude: usize,
    pub max_lyapunov_increase_position: f64,
    pub max_lyapunov_increase_attitude: f64,
    pub reaching_time_measured: Option<f64>,
    pub reaching_time_bound: Option<f64>,
    /// Largest relative reaching-law residual away from the switching band.
    pub reaching_residual_max: Option<f64>,
    pub singular_events: usize,
    pub unrealizable_steps: usize,
    pub thrust_limit_steps: usize,
    pub final_n_hat: [f64; 3],
    pub final_k_hat: [f64; 3],
}

/// First sample time after which `values` stays at or below `threshold`.
pub fn convergence_time(t: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    match values.iter().rposition(|v| !(*v <= threshold)) {
        None => t.first().copied(),
        Some(i) if i + 1 < t.len() => Some(t[i + 1]),
        Some(_) => None,
    }
}

/// `Σ |x[i+1] − x[i]|`.
pub fn total_variation(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Root mean square.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

/// Sampled increases of a Lyapunov function beyond rounding, and the largest increase.
pub fn lyapunov_increases(v: &[f64]) -> (usize, f64) {
    let mut count = 0;
    let mut worst = 0.0f64;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        worst = worst.max(d);
        if d > LYAPUNOV_ABS_FLOOR + LYAPUNOV_REL_FLOOR * w[0].abs() {
            count += 1;
        }
    }
    (count, worst)
}

/// Position-loop Lyapunov samples with the final `n̂` as the reference estimate.
pub fn position_lyapunov(trace: &[TraceRow]) -> Vec<f64> {
    let Some(last) = trace.last() else {
        return Vec::new();
    };
    trace
        .iter()
        .map(|r| r.tracking_energy() + 0.5 * (r.n_hat - last.n_hat).norm_squared())
        .collect()
}

/// Attitude-loop Lyapunov samples with the final `K̂` as the reference gain.
pub fn attitude_lyapunov(trace: &[TraceRow], lambda: f64) -> Vec<f64> {
    let Some(last) = trace.last() else {
        return Vec::new();
    };
    trace
        .iter()
        .map(|r| 0.5 * r.s.norm_squared() + (r.k_hat - last.k_hat).norm_squared() / (2.0 * lambda))
        .collect()
}

/// Relative residual of the finite-difference surface rate against the reaching law.
///
/// Pairs of rows whose surface branch changes or whose surface lies inside
/// the smoothing band are skipped. Without smoothing, sign changes are skipped too.
pub fn reaching_residuals(trace: &[TraceRow], scenario: &Scenario) -> Vec<(f64, f64)> {
    let g = &scenario.att_gains;
    let band = match g.smoothing {
        crate::attitude::Smoothing::Tanh { beta } => 1.0 / beta,
        crate::attitude::Smoothing::Sign => 0.0,
    };
    let dt = scenario.sim.dt;
    trace
        .windows(2)
        .filter(|w| w[0].branch == w[1].branch)
        .filter(|w| w[0].s.norm() > band)
        .filter(|w| band > 0.0 || (0..3).all(|i| w[0].s[i].signum() == w[1].s[i].signum()))
        .map(|w| {
            let fd = (w[1].s - w[0].s) / dt;
            let scale = (g.mu1 * w[0].s).norm() + w[0].k_hat.norm();
            (w[0].t, (fd - w[0].reaching_target).norm() / scale)
        })
        .collect()
}

pub fn compute_metrics(
    trace: &[TraceRow],
    scenario: &Scenario,
    error: Option<&Error>,
) -> RunMetrics {
    let mut m = RunMetrics {
        samples: trace.len(),
        completed: error.is_none(),
        ..Default::default()
    };
    let is_singular = |e: &Error| {
        matches!(
            e.root(),
            Error::GimbalSingular { .. }
                | Error::DegenerateDesiredAttitude { .. }
                | Error::AttitudeDegenerate { .. }
                | Error::ThrustDegenerate { .. }
        )
    };
    m.singular_events = trace
        .iter()
        .filter(|r| r.flags & (flags::GIMBAL_PROXIMITY | flags::TORQUE_DIVERGENCE) != 0)
        .count()
        + usize::from(error.is_some_and(is_singular));
    m.unrealizable_steps = trace
        .iter()
        .filter(|r| r.flags & flags::UNREALIZABLE != 0)
        .count();
    m.thrust_limit_steps = trace
        .iter()
        .filter(|r| r.flags & flags::THRUST_LIMIT != 0)
        .count();
    let Some(last) = trace.last() else { return m };
    m.final_time = last.t;
    m.final_n_hat = last.n_hat.into();
    m.final_k_hat = last.k_hat.into();
    m.max_thrust = trace.iter().map(|r| r.thrust).fold(0.0, f64::max);
    m.max_torque =
        std::array::from_fn(|i| trace.iter().map(|r| r.torque[i].abs()).fold(0.0, f64::max));
    m.max_torque_norm = trace.iter().map(|r| r.torque.norm()).fold(0.0, f64::max);
    if trace.len() < 2 {
        return m;
    }

    let t: Vec<f64> = trace.iter().map(|r| r.t).collect();
    let window_start = last.t - scenario.sim.metrics_window;
    let window: Vec<&TraceRow> = trace
        .iter()
        .filter(|r| r.t >= window_start - 1e-9)
        .collect();
    let tracks = scenario.reference.tracks_position();
    if tracks {
        m.rmse_position = Some(std::array::from_fn(|i| {
            rms(&window
                .iter()
                .map(|r| r.position[i] - r.reference.position[i])
                .collect::<Vec<_>>())
        }));
        let ep: Vec<f64> = trace.iter().map(|r| r.e_p.norm()).collect();
        m.convergence_time_position = convergence_time(&t, &ep, scenario.sim.position_threshold);
    }
    let en: Vec<f64> = window.iter().map(|r| r.e_norm).collect();
    m.rmse_attitude = rms(&en);
    m.mean_attitude_error = en.iter().sum::<f64>() / en.len() as f64;
    let en_all: Vec<f64> = trace.iter().map(|r| r.e_norm).collect();
    m.convergence_time_attitude = convergence_time(&t, &en_all, scenario.sim.attitude_threshold);
    m.chattering_index = std::array::from_fn(|i| {
        total_variation(&trace.iter().map(|r| r.torque[i]).collect::<Vec<_>>())
    });

    let after = trace
        .iter()
        .position(|r| r.t >= scenario.sim.transient_window - 1e-9)
        .unwrap_or(trace.len());
    if tracks {
        let v = position_lyapunov(trace);
        (
            m.lyapunov_violations_position,
            m.max_lyapunov_increase_position,
        ) = lyapunov_increases(&v[after..]);
    }
    let lambda = scenario.att_gains.lambda;
    let vs = attitude_lyapunov(trace, lambda);
    (
        m.lyapunov_violations_attitude,
        m.max_lyapunov_increase_attitude,
    ) = lyapunov_increases(&vs[after..]);

    let sn: Vec<f64> = trace.iter().map(|r| r.s.norm()).collect();
    m.reaching_time_measured = convergence_time(&t, &sn, scenario.sim.reaching_threshold);
    let g = &scenario.att_gains;
    m.reaching_time_bound = reaching_time_bound(0.5 * sn[0] * sn[0], g.mu1, g.k_hat0).ok();
    m.reaching_residual_max = reaching_residuals(trace, scenario)
        .into_iter()
        .map(|(_, r)| r)
        .reduce(f64::max);
    m
}
