//! Scenario files: TOML parsing, dotted overrides and validation.

use std::path::{Path, PathBuf};

use qsmc_core::attitude::{AttitudeGains, Smoothing};
use qsmc_core::dynamics::{
    RigidBodyState, UncertainParam, UncertaintySchedule, UncertaintySignal, VehicleParams,
};
use qsmc_core::position::PositionGains;
use qsmc_core::quat::{normalize, UnitQuaternion, Vec3};
use qsmc_core::reference::{Reference, SampledReference};
use qsmc_core::sim::{DebugHooks, SimSettings};
use qsmc_core::{Controller, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// The bundled Table II scenario, used when no config file is given.
pub const TABLE2_TOML: &str = include_str!("../scenarios/table2.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControllerName {
    #[default]
    Quaternion,
    Euler,
}

impl From<ControllerName> for Controller {
    fn from(c: ControllerName) -> Self {
        match c {
            ControllerName::Quaternion => Controller::Quaternion,
            ControllerName::Euler => Controller::Euler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingName {
    Sign,
    #[default]
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Table2,
    Hover,
    Sampled,
    PitchSweep,
    AttitudeStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub controller: ControllerName,
    pub vehicle: VehicleConfig,
    pub gains: GainsConfig,
    pub reference: ReferenceConfig,
    pub uncertainty: UncertaintyConfig,
    pub init: InitConfig,
    pub sim: SimConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub debug: DebugConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            controller: ControllerName::Quaternion,
            vehicle: VehicleConfig::default(),
            gains: GainsConfig::default(),
            reference: ReferenceConfig::default(),
            uncertainty: UncertaintyConfig::default(),
            init: InitConfig::default(),
            sim: SimConfig::default(),
            output: OutputConfig::default(),
            sweep: SweepConfig::default(),
            debug: DebugConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    /// kg
    pub m: f64,
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    pub g: f64,
    /// Rotor drag coefficient.
    pub c_d: f64,
    /// Arm length, m.
    pub l_d: f64,
    /// Rotor thrust coefficient.
    pub b_d: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        let v = VehicleParams::table2();
        Self {
            m: v.mass,
            ixx: v.ixx,
            iyy: v.iyy,
            izz: v.izz,
            g: v.gravity,
            c_d: v.drag_coeff,
            l_d: v.arm_length,
            b_d: v.thrust_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GainsConfig {
    pub position: PositionGainsConfig,
    pub attitude: AttitudeGainsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PositionGainsConfig {
    pub m_xp: f64,
    pub m_yp: f64,
    pub m_zp: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl Default for PositionGainsConfig {
    fn default() -> Self {
        let g = PositionGains::table2();
        Self {
            m_xp: g.m.x,
            m_yp: g.m.y,
            m_zp: g.m.z,
            eta1: g.eta.x,
            eta2: g.eta.y,
            eta3: g.eta.z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttitudeGainsConfig {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub n: u32,
    pub l: u32,
    pub epsilon: f64,
    pub mu1: f64,
    pub lambda: f64,
    pub smoothing: SmoothingName,
    /// tanh sharpness, ignored under `sign`.
    pub beta: f64,
    pub k_hat0: f64,
    /// rad/s
    pub rate_cutoff: f64,
}

impl Default for AttitudeGainsConfig {
    fn default() -> Self {
        let g = AttitudeGains::table2();
        let beta = match g.smoothing {
            Smoothing::Tanh { beta } => beta,
            Smoothing::Sign => 10.0,
        };
        Self {
            gamma1: g.gamma1,
            gamma2: g.gamma2,
            gamma3: g.gamma3,
            n: g.n,
            l: g.l,
            epsilon: g.epsilon,
            mu1: g.mu1,
            lambda: g.lambda,
            smoothing: SmoothingName::Tanh,
            beta,
            k_hat0: g.k_hat0,
            rate_cutoff: g.rate_cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceConfig {
    pub preset: Preset,
    /// Hover point, m.
    pub position: [f64; 3],
    /// CSV with header `t,x,y,z`, relative to the config file.
    pub samples: String,
    pub max_pitch_deg: f64,
    /// s
    pub rise_time: f64,
    pub axis: [f64; 3],
    pub angle_deg: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Table2,
            position: [0.0, 0.0, 1.0],
            samples: String::new(),
            max_pitch_deg: 90.0,
            rise_time: 4.0,
            axis: [1.0, 0.0, 0.0],
            angle_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintyConfig {
    pub enabled: bool,
    pub signals: Vec<SignalConfig>,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            signals: UncertaintySchedule::table2_sinusoids()
                .signals
                .iter()
                .map(|s| SignalConfig {
                    target: s.target.name().to_string(),
                    amplitude: s.amplitude,
                    frequency: s.frequency,
                    phase: s.phase,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    /// One of `m`, `ixx`, `iyy`, `izz`.
    pub target: String,
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    /// rad
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Scalar first; normalized on load.
    pub attitude: [f64; 4],
    pub body_rates: [f64; 3],
}

impl Default for InitConfig {
    fn default() -> Self {
        let p = Scenario::table2().init.position;
        Self {
            position: p.into(),
            velocity: [0.0; 3],
            attitude: [1.0, 0.0, 0.0, 0.0],
            body_rates: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub substeps: usize,
    pub metrics_window: f64,
    pub transient_window: f64,
    pub position_threshold: f64,
    pub attitude_threshold: f64,
    pub reaching_threshold: f64,
    pub torque_limit: f64,
    /// `inf` disables the check.
    pub thrust_limit: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let s = SimSettings::default();
        Self {
            dt: s.dt,
            duration: s.duration,
            substeps: s.substeps,
            metrics_window: s.metrics_window,
            transient_window: s.transient_window,
            position_threshold: s.position_threshold,
            attitude_threshold: s.attitude_threshold,
            reaching_threshold: s.reaching_threshold,
            torque_limit: s.torque_limit,
            thrust_limit: s.thrust_limit.unwrap_or(f64::INFINITY),
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub trace: String,
    pub metrics: String,
    pub plot: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace: "trace.csv".into(),
            metrics: "metrics.json".into(),
            plot: "plot.gp".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub runs: usize,
    /// Half-width of the uniform initial-position offset per axis, m.
    pub max_offset: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            runs: 8,
            max_offset: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DebugConfig {
    pub flip_virtual_x: bool,
}

/// A loaded scenario together with the settings that only the front end uses.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
}

/// Parses TOML text, reporting the line and key of the first error.
pub fn parse_config(text: &str, origin: &Path) -> Result<ScenarioConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        let (line, key) = locate(text, offset);
        ConfigError::Parse {
            path: origin.to_path_buf(),
            line,
            key,
            message: e.message().to_string(),
        }
    })
}

fn locate(text: &str, offset: usize) -> (usize, String) {
    let offset = offset.min(text.len());
    let line = text[..offset].matches('\n').count() + 1;
    let mut section = String::new();
    let mut key = String::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('[') {
            section = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = l.split_once('=') {
            if !l.starts_with('#') {
                key = k.trim().to_string();
            }
        }
        if i + 1 == line {
            if !l.contains('=') && !l.starts_with('[') {
                key.clear();
            }
            break;
        }
    }
    let full = match (section.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => section,
        (false, false) => format!("{section}.{key}"),
    };
    (line, full)
}

/// Applies `key=value` overrides; every key must already exist in the tree.
pub fn apply_overrides(
    config: &ScenarioConfig,
    overrides: &[String],
) -> Result<ScenarioConfig, ConfigError> {
    if overrides.is_empty() {
        return Ok(config.clone());
    }
    let mut tree =
        toml::Value::try_from(config).map_err(|e| ConfigError::Internal(e.to_string()))?;
    for raw in overrides {
        let (key, value) = raw
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, _)| !k.is_empty())
            .ok_or_else(|| ConfigError::MalformedOverride(raw.clone()))?;
        let slot =
            lookup_mut(&mut tree, key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        *slot = parse_value(value);
        let candidate: Result<ScenarioConfig, _> = tree.clone().try_into();
        if let Err(e) = candidate {
            return Err(ConfigError::Override {
                key: key.to_string(),
                message: e.message().to_string(),
            });
        }
    }
    tree.try_into()
        .map_err(|e: toml::de::Error| ConfigError::Internal(e.to_string()))
}

fn lookup_mut<'a>(tree: &'a mut toml::Value, key: &str) -> Option<&'a mut toml::Value> {
    key.split('.').try_fold(tree, |node, part| match node {
        toml::Value::Table(t) => t.get_mut(part),
        toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
        _ => None,
    })
}

fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.into(),
        reason: reason.into(),
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn read_samples(path: &Path) -> Result<SampledReference, ConfigError> {
    let fail = |message: String| ConfigError::Samples {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let mut t = Vec::new();
    let mut points = Vec::new();
    for row in reader.deserialize::<(f64, f64, f64, f64)>() {
        let (ti, x, y, z) = row.map_err(|e| fail(e.to_string()))?;
        t.push(ti);
        points.push(Vec3::new(x, y, z));
    }
    SampledReference::new(t, &points).map_err(|e| fail(e.to_string()))
}

impl ScenarioConfig {
    /// Checks every field and builds the engine scenario.
    ///
    /// `base_dir` resolves relative sample paths.
    pub fn to_scenario(&self, base_dir: &Path) -> Result<Scenario, ConfigError> {
        let v = &self.vehicle;
        let vehicle = VehicleParams {
            mass: v.m,
            ixx: v.ixx,
            iyy: v.iyy,
            izz: v.izz,
            gravity: v.g,
            drag_coeff: v.c_d,
            arm_length: v.l_d,
            thrust_factor: v.b_d,
        };
        if let Some(f) = vehicle.invalid_field() {
            return Err(invalid(
                format!("vehicle.{f}"),
                "must be positive and finite",
            ));
        }

        let p = &self.gains.position;
        for (k, x) in [
            ("m_xp", p.m_xp),
            ("m_yp", p.m_yp),
            ("m_zp", p.m_zp),
            ("eta1", p.eta1),
            ("eta2", p.eta2),
            ("eta3", p.eta3),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(
                    format!("gains.position.{k}"),
                    "must be positive and finite",
                ));
            }
        }
        let pos_gains = PositionGains {
            m: Vec3::new(p.m_xp, p.m_yp, p.m_zp),
            eta: Vec3::new(p.eta1, p.eta2, p.eta3),
        };

        let a = &self.gains.attitude;
        let att_gains = AttitudeGains {
            gamma1: a.gamma1,
            gamma2: a.gamma2,
            gamma3: a.gamma3,
            n: a.n,
            l: a.l,
            epsilon: a.epsilon,
            mu1: a.mu1,
            lambda: a.lambda,
            smoothing: match a.smoothing {
                SmoothingName::Sign => Smoothing::Sign,
                SmoothingName::Tanh => Smoothing::Tanh { beta: a.beta },
            },
            k_hat0: a.k_hat0,
            rate_cutoff: a.rate_cutoff,
        };
        if let Some(f) = att_gains.invalid_field() {
            let reason = match f {
                "n" => "must be odd and positive",
                "l" => "must be odd and greater than n",
                "k_hat0" => "must be non-negative and finite",
                _ => "must be positive and finite",
            };
            return Err(invalid(format!("gains.attitude.{f}"), reason));
        }

        let r = &self.reference;
        let reference = match r.preset {
            Preset::Table2 => Reference::Table2,
            Preset::Hover => {
                if r.position.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("reference.position", "must be finite"));
                }
                Reference::Hover {
                    position: vec3(r.position),
                }
            }
            Preset::Sampled => {
                if r.samples.is_empty() {
                    return Err(invalid(
                        "reference.samples",
                        "a sample file is required for the sampled preset",
                    ));
                }
                Reference::Sampled(read_samples(&base_dir.join(&r.samples))?)
            }
            Preset::PitchSweep => {
                if !r.max_pitch_deg.is_finite() {
                    return Err(invalid("reference.max_pitch_deg", "must be finite"));
                }
                if !(r.rise_time.is_finite() && r.rise_time > 0.0) {
                    return Err(invalid(
                        "reference.rise_time",
                        "must be positive and finite",
                    ));
                }
                Reference::PitchSweep {
                    max_pitch: r.max_pitch_deg.to_radians(),
                    rise_time: r.rise_time,
                }
            }
            Preset::AttitudeStep => {
                if !r.angle_deg.is_finite() {
                    return Err(invalid("reference.angle_deg", "must be finite"));
                }
                let attitude =
                    UnitQuaternion::from_axis_angle(&vec3(r.axis), r.angle_deg.to_radians())
                        .map_err(|_| {
                            invalid("reference.axis", "must be a finite non-zero vector")
                        })?;
                Reference::AttitudeStep { attitude }
            }
        };

        let mut uncertainty = UncertaintySchedule::default();
        if self.uncertainty.enabled {
            for (i, s) in self.uncertainty.signals.iter().enumerate() {
                let target = match s.target.as_str() {
                    "m" => UncertainParam::Mass,
                    "ixx" => UncertainParam::Ixx,
                    "iyy" => UncertainParam::Iyy,
                    "izz" => UncertainParam::Izz,
                    _ => {
                        return Err(invalid(
                            format!("uncertainty.signals.{i}.target"),
                            "must be m, ixx, iyy or izz",
                        ))
                    }
                };
                if !(s.amplitude.is_finite() && s.amplitude.abs() < 1.0) {
                    return Err(invalid(
                        format!("uncertainty.signals.{i}.amplitude"),
                        "must satisfy |a| < 1",
                    ));
                }
                if !(s.frequency.is_finite() && s.phase.is_finite()) {
                    return Err(invalid(
                        format!("uncertainty.signals.{i}"),
                        "frequency and phase must be finite",
                    ));
                }
                uncertainty.signals.push(UncertaintySignal {
                    target,
                    amplitude: s.amplitude,
                    frequency: s.frequency,
                    phase: s.phase,
                });
            }
        }

        let i = &self.init;
        for (k, arr) in [
            ("position", &i.position),
            ("velocity", &i.velocity),
            ("body_rates", &i.body_rates),
        ] {
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("init.{k}"), "must be finite"));
            }
        }
        let attitude = normalize(i.attitude)
            .map_err(|_| invalid("init.attitude", "must be a finite non-zero quaternion"))?;
        let init = RigidBodyState {
            position: vec3(i.position),
            velocity: vec3(i.velocity),
            attitude,
            body_rates: vec3(i.body_rates),
        };

        let s = &self.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(invalid("sim.dt", "must be positive and finite"));
        }
        if !(s.duration.is_finite() && s.duration >= 0.0) {
            return Err(invalid("sim.duration", "must be non-negative and finite"));
        }
        if s.duration > 0.0 && s.duration < s.dt {
            return Err(invalid("sim.duration", "must be zero or at least one step"));
        }
        if s.substeps == 0 {
            return Err(invalid("sim.substeps", "must be at least 1"));
        }
        for (k, x) in [
            ("metrics_window", s.metrics_window),
            ("transient_window", s.transient_window),
            ("position_threshold", s.position_threshold),
            ("attitude_threshold", s.attitude_threshold),
            ("reaching_threshold", s.reaching_threshold),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(
                    format!("sim.{k}"),
                    "must be non-negative and finite",
                ));
            }
        }
        if !(s.torque_limit > 0.0) {
            return Err(invalid("sim.torque_limit", "must be positive"));
        }
        if !(s.thrust_limit > 0.0) {
            return Err(invalid(
                "sim.thrust_limit",
                "must be positive (inf disables it)",
            ));
        }
        let sim = SimSettings {
            dt: s.dt,
            duration: s.duration,
            substeps: s.substeps,
            metrics_window: s.metrics_window,
            transient_window: s.transient_window,
            position_threshold: s.position_threshold,
            attitude_threshold: s.attitude_threshold,
            reaching_threshold: s.reaching_threshold,
            torque_limit: s.torque_limit,
            thrust_limit: s.thrust_limit.is_finite().then_some(s.thrust_limit),
            seed: s.seed,
        };

        for (k, name) in [
            ("output.trace", &self.output.trace),
            ("output.metrics", &self.output.metrics),
            ("output.plot", &self.output.plot),
        ] {
            if !is_plain_file_name(name) {
                return Err(invalid(
                    k,
                    "must be a plain file name inside the output directory",
                ));
            }
        }
        if !(self.sweep.max_offset.is_finite() && self.sweep.max_offset >= 0.0) {
            return Err(invalid(
                "sweep.max_offset",
                "must be non-negative and finite",
            ));
        }

        let scenario = Scenario {
            vehicle,
            pos_gains,
            att_gains,
            reference,
            uncertainty,
            init,
            controller: self.controller.into(),
            sim,
            debug: DebugHooks {
                flip_virtual_x: self.debug.flip_virtual_x,
            },
        };
        scenario
            .validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(scenario)
    }
}

/// True for a single normal path component.
pub fn is_plain_file_name(name: &str) -> bool {
    let mut parts = Path::new(name).components();
    matches!(
        (parts.next(), parts.next()),
        (Some(std::path::Component::Normal(_)), None)
    )
}

/// Reads `path` (or the bundled Table II file), applies overrides and validates.
pub fn load_scenario(
    path: Option<&Path>,
    overrides: &[String],
) -> Result<LoadedScenario, ConfigError> {
    let (config, base_dir) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (parse_config(&text, p)?, base)
        }
        None => (
            parse_config(TABLE2_TOML, Path::new("<built-in table2.toml>"))?,
            PathBuf::new(),
        ),
    };
    let config = apply_overrides(&config, overrides)?;
    let scenario = config.to_scenario(&base_dir)?;
    Ok(LoadedScenario { scenario, config })
}
