//! Rotor mixing between `(τ₁, τ₂, τ₃, F_th)` and squared rotor speeds.

use nalgebra::{Matrix4, Vector4};

use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::quat::Vec3;

/// Squared rotor speeds, rad²/s².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorCommand {
    pub omega_sq: [f64; 4],
}

impl RotorCommand {
    pub fn is_realizable(&self) -> bool {
        self.omega_sq.iter().all(|w| *w >= 0.0)
    }

    /// Indices of rotors with negative squared speed.
    pub fn negative_rotors(&self) -> Vec<usize> {
        (0..4).filter(|&i| self.omega_sq[i] < 0.0).collect()
    }

    /// Rotor speeds, `None` when any squared speed is negative.
    pub fn speeds(&self) -> Option<[f64; 4]> {
        self.is_realizable().then(|| self.omega_sq.map(f64::sqrt))
    }
}

/// Rows map `[ω₁², …, ω₄²]` to `[τ₁, τ₂, τ₃, F_th]`.
pub fn mixing_matrix(params: &VehicleParams) -> Matrix4<f64> {
    let c = params.drag_coeff;
    let lb = params.arm_length * params.thrust_factor;
    let b = params.thrust_factor;
    #[rustfmt::skip]
    let m = Matrix4::new(
        c,   -c,  c,   -c,
        -lb, 0.0, lb,  0.0,
        0.0, -lb, 0.0, lb,
        b,   b,   b,   b,
    );
    m
}

/// 2-norm condition number of the mixing matrix.
pub fn mixing_condition(params: &VehicleParams) -> f64 {
    let sv = mixing_matrix(params).singular_values();
    sv.max() / sv.min()
}

/// Squared speeds for a wrench, without the realizability check.
pub fn solve_mix(torque: &Vec3, thrust: f64, params: &VehicleParams) -> Result<RotorCommand> {
    let rhs = Vector4::new(torque.x, torque.y, torque.z, thrust);
    let w = mixing_matrix(params)
        .lu()
        .solve(&rhs)
        .ok_or(Error::InvalidScenario("mixing matrix is singular".into()))?;
    Ok(RotorCommand {
        omega_sq: [w[0], w[1], w[2], w[3]],
    })
}

pub fn allocate(torque: &Vec3, thrust: f64, params: &VehicleParams) -> Result<RotorCommand> {
    let cmd = solve_mix(torque, thrust, params)?;
    if cmd.is_realizable() {
        Ok(cmd)
    } else {
        Err(Error::UnrealizableCommand {
            rotors: cmd.negative_rotors(),
            omega_sq: cmd.omega_sq,
        })
    }
}

pub fn mix_forward(cmd: &RotorCommand, params: &VehicleParams) -> (Vec3, f64) {
    let w = mixing_matrix(params) * Vector4::from(cmd.omega_sq);
    (Vec3::new(w[0], w[1], w[2]), w[3])
}
