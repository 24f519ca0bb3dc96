//! Unit-quaternion and small-matrix algebra.
//!
//! Quaternions are stored scalar first, `(q0, q1, q2, q3)`. The product in
//! [`UnitQuaternion::mul`] is the Hamilton product (`i ⊗ j = k`), for which
//! `R(a ⊗ b) = R(a) R(b)` with the rotation matrix of [`UnitQuaternion::to_rotation`].
//!
//! The attitude error used by the controllers is
//! `e0 = q0 q0d + q_dᵀq`, `e = q0d q − q0 q_d + [q]× q_d`, which is the Hamilton
//! product `Q_d* ⊗ Q`; see [`error_product`].

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Norm below which a 4-vector cannot be normalized.
pub const NORMALIZE_GUARD: f64 = 1e-12;

/// Skew-symmetric cross-product matrix, `skew(a) * b == a × b`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// A unit quaternion `q0 + i q1 + j q2 + k q3`. `q` and `-q` are the same rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    v: Vec3,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        v: Vector3::new(0.0, 0.0, 0.0),
    };

    /// Wraps components that are already unit norm (up to rounding).
    pub(crate) fn from_parts_unchecked(w: f64, v: Vec3) -> Self {
        Self { w, v }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n <= NORMALIZE_GUARD {
            return Err(Error::DegenerateQuaternion { norm: n });
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self {
            w: c,
            v: axis * (s / n),
        })
    }

    pub fn scalar(&self) -> f64 {
        self.w
    }

    pub fn vector(&self) -> Vec3 {
        self.v
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    pub fn as_vector4(&self) -> Vector4<f64> {
        Vector4::new(self.w, self.v.x, self.v.y, self.v.z)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.v.norm_squared()).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            v: -self.v,
        }
    }

    /// Representative with `q0 >= 0`. Only for reporting; never applied to the plant state.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 {
            Self {
                w: -self.w,
                v: -self.v,
            }
        } else {
            *self
        }
    }

    /// Renormalizes to one, e.g. after integration drift.
    pub fn renormalized(&self) -> Result<Self> {
        normalize(self.to_array())
    }

    /// Rotation matrix using the 9-entry expansion.
    pub fn to_rotation(&self) -> RotationMatrix {
        let (q0, q1, q2, q3) = (self.w, self.v.x, self.v.y, self.v.z);
        RotationMatrix(Mat3::new(
            1.0 - 2.0 * (q2 * q2 + q3 * q3),
            2.0 * (q1 * q2 - q0 * q3),
            2.0 * (q1 * q3 + q0 * q2),
            2.0 * (q2 * q1 + q0 * q3),
            1.0 - 2.0 * (q1 * q1 + q3 * q3),
            2.0 * (q2 * q3 - q0 * q1),
            2.0 * (q3 * q1 - q0 * q2),
            2.0 * (q3 * q2 + q0 * q1),
            1.0 - 2.0 * (q1 * q1 + q2 * q2),
        ))
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    /// Hamilton product.
    fn mul(self, b: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion {
            w: self.w * b.w - self.v.dot(&b.v),
            v: b.v * self.w + self.v * b.w + self.v.cross(&b.v),
        }
    }
}

/// Normalizes a raw 4-vector `(q0, q1, q2, q3)`.
pub fn normalize(q: [f64; 4]) -> Result<UnitQuaternion> {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > NORMALIZE_GUARD) {
        return Err(Error::DegenerateQuaternion { norm: n });
    }
    Ok(UnitQuaternion {
        w: q[0] / n,
        v: Vec3::new(q[1], q[2], q[3]) / n,
    })
}

/// Quaternion attitude error of `q` relative to `qd`:
/// `(q0 q0d + q_dᵀq, q0d q − q0 q_d + [q]× q_d)`, i.e. `qd* ⊗ q`.
pub fn error_product(q: &UnitQuaternion, qd: &UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion {
        w: q.w * qd.w + qd.v.dot(&q.v),
        v: q.v * qd.w - qd.v * q.w + q.v.cross(&qd.v),
    }
}

/// A proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    /// Largest entry of `R Rᵀ - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.0 * self.0.transpose() - Mat3::identity()).amax()
    }
}

/// Compact form `(q0² − qᵀq) I + 2 q qᵀ + 2 q0 [q]×`.
pub fn rotation_compact(q: &UnitQuaternion) -> Mat3 {
    let v = q.vector();
    let w = q.scalar();
    Mat3::identity() * (w * w - v.dot(&v)) + v * v.transpose() * 2.0 + skew(&v) * (2.0 * w)
}
