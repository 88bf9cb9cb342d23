use std::f64::consts::{FRAC_PI_2, PI};

use super::{FsFrame, Point3};
use crate::error::{Error, Result};

/// A proper rotation, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    pub m: [[f64; 3]; 3],
}

/// Z-Y-X intrinsic Tait-Bryan angles: R = Rz(yaw) · Ry(pitch) · Rx(roll).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

/// cos(pitch) below which the decomposition is treated as gimbal-locked.
const GIMBAL_EPSILON: f64 = 1e-9;

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(c: [Point3; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (j, col) in c.iter().enumerate() {
            let a = col.to_array();
            for i in 0..3 {
                m[i][j] = a[i];
            }
        }
        Rotation3 { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[j][i];
            }
        }
        Rotation3 { m }
    }

    pub fn mul(&self, o: &Rotation3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Rotation3 { m }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let a = p.to_array();
        let row = |i: usize| self.m[i][0] * a[0] + self.m[i][1] * a[1] + self.m[i][2] * a[2];
        Point3::new(row(0), row(1), row(2))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm of RᵀR − I.
    pub fn orthogonality_residual(&self) -> f64 {
        frobenius_distance(&self.transpose().mul(self), &Rotation3::IDENTITY)
    }

    pub fn about_x(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation3 {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    pub fn about_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation3 {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    pub fn about_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation3 {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `angle` about the unit vector `axis` (Rodrigues).
    pub fn about_axis(axis: Point3, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let [x, y, z] = axis.to_array();
        let t = 1.0 - c;
        Rotation3 {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }
}

pub fn frobenius_distance(a: &Rotation3, b: &Rotation3) -> f64 {
    let mut sum = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = a.m[i][j] - b.m[i][j];
            sum += d * d;
        }
    }
    sum.sqrt()
}

/// The rotation taking `from`'s axes onto `to`'s axes: R = M_to · M_fromᵀ.
pub fn rotation_between(from: &FsFrame, to: &FsFrame) -> Result<Rotation3> {
    if from.degenerate || to.degenerate {
        return Err(Error::Degenerate(
            "rotation between Frenet-Serret frames needs two non-degenerate frames".into(),
        ));
    }
    let m_from = Rotation3::from_columns(from.axes());
    let m_to = Rotation3::from_columns(to.axes());
    Ok(m_to.mul(&m_from.transpose()))
}

/// Wraps an angle into (−π, π].
fn wrap(a: f64) -> f64 {
    let mut a = a;
    while a <= -PI {
        a += 2.0 * PI;
    }
    while a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Z-Y-X decomposition. At gimbal lock roll is set to 0 and the remaining
/// rotation about z is reported as yaw.
pub fn decompose_ypr(r: &Rotation3) -> EulerAngles {
    let m = &r.m;
    let cos_pitch = m[0][0].hypot(m[1][0]);
    if cos_pitch < GIMBAL_EPSILON {
        let pitch = if m[2][0] < 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        return EulerAngles {
            yaw: wrap((-m[0][1]).atan2(m[1][1])),
            pitch,
            roll: 0.0,
        };
    }
    EulerAngles {
        yaw: wrap(m[1][0].atan2(m[0][0])),
        pitch: (-m[2][0]).atan2(cos_pitch),
        roll: wrap(m[2][1].atan2(m[2][2])),
    }
}

pub fn recompose(e: &EulerAngles) -> Rotation3 {
    Rotation3::about_z(e.yaw)
        .mul(&Rotation3::about_y(e.pitch))
        .mul(&Rotation3::about_x(e.roll))
}
