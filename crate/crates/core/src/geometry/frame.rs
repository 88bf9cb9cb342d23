//! Discrete derivatives and Frenet-Serret frames from three consecutive
//! samples (the current one and the two before it).

use super::{Point3, TimedPoint};
use crate::error::{invalid, Result};

/// Below this speed (m/s) the tangent is undefined.
pub const SPEED_EPSILON: f64 = 1e-4;
/// Below this curvature (1/m) the normal is undefined.
pub const CURVATURE_EPSILON: f64 = 1e-4;

/// Tangent, normal and binormal of a moving point.
///
/// When `degenerate` is set the axes are the placeholder world axes and
/// carry no information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsFrame {
    pub tangent: Point3,
    pub normal: Point3,
    pub binormal: Point3,
    pub degenerate: bool,
}

impl FsFrame {
    pub const DEGENERATE: FsFrame = FsFrame {
        tangent: Point3::X,
        normal: Point3::Y,
        binormal: Point3::Z,
        degenerate: true,
    };

    /// Largest |aᵢ·aⱼ − δᵢⱼ| over all axis pairs.
    pub fn orthonormality_residual(&self) -> f64 {
        let axes = self.axes();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((axes[i].dot(axes[j]) - delta).abs());
            }
        }
        worst
    }

    pub fn axes(&self) -> [Point3; 3] {
        [self.tangent, self.normal, self.binormal]
    }
}

/// Lagrange weights of the quadratic through three samples: first and
/// second derivative evaluated at the newest sample.
fn stencil(samples: &[TimedPoint; 3]) -> Result<([f64; 3], [f64; 3])> {
    let [t0, t1, t2] = [samples[0].t, samples[1].t, samples[2].t];
    if !(t0 < t1 && t1 < t2) {
        return invalid(format!("timestamps must be strictly increasing, got {t0}, {t1}, {t2}"));
    }
    let d01 = t0 - t1;
    let d02 = t0 - t2;
    let d12 = t1 - t2;
    let first = [
        (t2 - t1) / (d01 * d02),
        (t2 - t0) / (-d01 * d12),
        (2.0 * t2 - t0 - t1) / (d02 * d12),
    ];
    let second = [2.0 / (d01 * d02), 2.0 / (-d01 * d12), 2.0 / (d02 * d12)];
    Ok((first, second))
}

fn apply(w: [f64; 3], s: &[TimedPoint; 3]) -> Point3 {
    s[0].p * w[0] + s[1].p * w[1] + s[2].p * w[2]
}

/// Backward three-point velocity at the newest sample. Exact for motion
/// that is linear or quadratic in time.
pub fn velocity(samples: &[TimedPoint; 3]) -> Result<Point3> {
    let (first, _) = stencil(samples)?;
    Ok(apply(first, samples))
}

/// Second derivative of the interpolating quadratic.
pub fn acceleration(samples: &[TimedPoint; 3]) -> Result<Point3> {
    let (_, second) = stencil(samples)?;
    Ok(apply(second, samples))
}

/// Frenet-Serret frame anchored at the newest sample.
pub fn fs_frame(samples: &[TimedPoint; 3]) -> Result<FsFrame> {
    let (first, second) = stencil(samples)?;
    let v = apply(first, samples);
    let a = apply(second, samples);
    let speed = v.norm();
    if speed < SPEED_EPSILON {
        return Ok(FsFrame::DEGENERATE);
    }
    let va = v.cross(a);
    let curvature = va.norm() / (speed * speed * speed);
    if curvature < CURVATURE_EPSILON {
        return Ok(FsFrame::DEGENERATE);
    }
    let tangent = v / speed;
    let binormal = va / va.norm();
    // Re-orthogonalise so the frame is orthonormal to rounding.
    let normal = binormal.cross(tangent);
    let normal = normal / normal.norm();
    let binormal = tangent.cross(normal);
    Ok(FsFrame {
        tangent,
        normal,
        binormal,
        degenerate: false,
    })
}
