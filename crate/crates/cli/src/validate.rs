//! Fast invariant suite behind `qsmc validate`.

use qsmc_core::allocator::{mix_forward, solve_mix};
use qsmc_core::attitude::{attitude_error, surface_rate_matrix, DesiredRates};
use qsmc_core::dynamics::RigidBodyState;
use qsmc_core::position::desired_attitude;
use qsmc_core::quat::{normalize, UnitQuaternion, Vec3};
use qsmc_core::reference::Reference;
use qsmc_core::sim::Simulator;
use qsmc_core::{compute_metrics, run, Scenario};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ALGEBRA_TOL: f64 = 1e-10;
pub const UNIT_NORM_TOL: f64 = 1e-12;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const CONDITION_LIMIT: f64 = 10.0;
pub const HOVER_TOL: f64 = 1e-9;
pub const RESIDUAL_LIMIT: f64 = 0.05;
/// Horizon of the closed-loop checks, s.
pub const SHORT_RUN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity compared against the limit.
    pub value: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self::measured(name, passed, f64::NAN, detail)
    }

    fn measured(name: &'static str, passed: bool, value: f64, detail: String) -> Self {
        Self {
            name,
            passed,
            value,
            detail,
        }
    }
}

pub fn random_quaternion(rng: &mut impl Rng) -> UnitQuaternion {
    loop {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = c.iter().map(|x| x * x).sum();
        if (1e-4..=1.0).contains(&n2) {
            return normalize(c).expect("norm bounded away from zero");
        }
    }
}

fn random_vec(rng: &mut impl Rng, half_width: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.gen_range(-half_width..half_width))
}

/// Products stay unit, the product is associative, rotations are orthonormal and compose.
pub fn quaternion_algebra(rng: &mut impl Rng, samples: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (a, b, c) = (
            random_quaternion(rng),
            random_quaternion(rng),
            random_quaternion(rng),
        );
        let ab = a * b;
        let assoc = (ab * c).as_vector4() - (a * (b * c)).as_vector4();
        let ra = a.to_rotation();
        let compose = ab.to_rotation().matrix() - ra.compose(&b.to_rotation()).matrix();
        worst = worst
            .max((ab.norm() - 1.0).abs())
            .max(assoc.amax())
            .max(ra.orthogonality_defect())
            .max((ra.det() - 1.0).abs())
            .max(compose.amax());
    }
    Check::measured(
        "quaternion algebra",
        worst <= ALGEBRA_TOL,
        worst,
        format!("worst defect {worst:.3e}"),
    )
}

/// The desired quaternion built from random virtual controls has unit norm.
pub fn desired_attitude_norm(rng: &mut impl Rng, sc: &Scenario, samples: usize) -> Check {
    let mut worst = 0.0f64;
    let g = sc.vehicle.gravity;
    for _ in 0..samples {
        let mut u = random_vec(rng, 2.0 * g);
        u.z = rng.gen_range(-0.9 * g..2.0 * g);
        let thrust = qsmc_core::position::thrust_from_virtual(&u, &sc.vehicle);
        match desired_attitude(&u, thrust, &sc.vehicle) {
            Ok(q) => worst = worst.max((q.norm() - 1.0).abs()),
            Err(e) => return Check::new("desired attitude unit norm", false, e.to_string()),
        }
    }
    Check::measured(
        "desired attitude unit norm",
        worst <= UNIT_NORM_TOL,
        worst,
        format!("worst |‖Q_d‖ − 1| {worst:.3e}"),
    )
}

/// Mixing then forward-mixing returns the commanded torque and thrust.
pub fn allocator_round_trip(rng: &mut impl Rng, sc: &Scenario, samples: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let torque = random_vec(rng, 20.0);
        let thrust = rng.gen_range(0.0..100.0);
        let cmd = match solve_mix(&torque, thrust, &sc.vehicle) {
            Ok(c) => c,
            Err(e) => return Check::new("allocator round trip", false, e.to_string()),
        };
        let (t, f) = mix_forward(&cmd, &sc.vehicle);
        let scale = 1.0 + torque.norm() + thrust;
        worst = worst
            .max((t - torque).amax() / scale)
            .max((f - thrust).abs() / scale);
    }
    Check::measured(
        "allocator round trip",
        worst <= ROUND_TRIP_TOL,
        worst,
        format!("worst relative error {worst:.3e}"),
    )
}

/// Largest condition number of the surface-rate matrix over random unit errors.
pub fn surface_matrix_condition(rng: &mut impl Rng, sc: &Scenario, samples: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let q = random_quaternion(rng);
        let err = attitude_error(
            &q,
            &UnitQuaternion::IDENTITY,
            &Vec3::zeros(),
            &DesiredRates::default(),
        );
        let sv = surface_rate_matrix(&err, &sc.att_gains).singular_values();
        worst = worst.max(sv.max() / sv.min());
    }
    Check::measured(
        "surface matrix conditioning",
        worst <= CONDITION_LIMIT,
        worst,
        format!("max cond(M) {worst:.4}"),
    )
}

/// A vehicle at rest on a hover reference stays put for 1000 steps.
pub fn hover_equilibrium(sc: &Scenario) -> Check {
    let mut hover = sc.clone();
    hover.uncertainty = Default::default();
    hover.debug = Default::default();
    let p = sc.init.position;
    hover.reference = Reference::Hover { position: p };
    hover.init = RigidBodyState::at_rest(p);
    let name = "hover equilibrium";
    let mut sim = match Simulator::new(&hover) {
        Ok(s) => s,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        if let Err(e) = sim.step() {
            return Check::new(name, false, e.to_string());
        }
        let s = sim.state();
        worst = worst
            .max((s.position - p).amax())
            .max(s.velocity.amax())
            .max(s.body_rates.amax())
            .max(
                (s.attitude.canonical().as_vector4() - UnitQuaternion::IDENTITY.as_vector4())
                    .amax(),
            );
    }
    Check::measured(
        name,
        worst <= HOVER_TOL,
        worst,
        format!("max state drift {worst:.3e}"),
    )
}

/// Reaching-law residual and Lyapunov decrease on a short run of the configured scenario.
pub fn short_run_checks(sc: &Scenario) -> [Check; 2] {
    let mut short = sc.clone();
    short.sim.duration = short.sim.duration.min(SHORT_RUN);
    let out = match run(&short) {
        Ok(o) => o,
        Err(e) => {
            return [
                Check::new("reaching-law residual", false, e.to_string()),
                Check::new("position Lyapunov decrease", false, e.to_string()),
            ]
        }
    };
    let m = compute_metrics(&out.trace, &short, out.error.as_ref());
    let residual = match (&out.error, m.reaching_residual_max) {
        (Some(e), _) => Check::new("reaching-law residual", false, format!("run aborted: {e}")),
        (None, Some(r)) => Check::measured(
            "reaching-law residual",
            r <= RESIDUAL_LIMIT,
            r,
            format!("max relative residual {r:.3e}"),
        ),
        (None, None) => Check::new(
            "reaching-law residual",
            true,
            "surface stayed inside the band".into(),
        ),
    };
    let name = "position Lyapunov decrease";
    let lyapunov = match &out.error {
        Some(e) => Check::new(name, false, format!("run aborted: {e}")),
        None if !short.reference.tracks_position() => {
            Check::new(name, true, "position loop bypassed".into())
        }
        None => {
            let n = m.lyapunov_violations_position;
            Check::measured(
                name,
                n == 0,
                n as f64,
                format!("increases after transient: {n}"),
            )
        }
    };
    [residual, lyapunov]
}

/// Every property of the suite, with the random samples seeded from the scenario.
pub fn run_suite(sc: &Scenario) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.sim.seed);
    let mut checks = vec![
        quaternion_algebra(&mut rng, 2000),
        desired_attitude_norm(&mut rng, sc, 2000),
        allocator_round_trip(&mut rng, sc, 2000),
        surface_matrix_condition(&mut rng, sc, 10_000),
        hover_equilibrium(sc),
    ];
    checks.extend(short_run_checks(sc));
    checks
}
