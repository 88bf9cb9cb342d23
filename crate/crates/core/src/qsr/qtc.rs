//! Qualitative trajectory calculus: the 2D double-cross variant with an
//! angular deadzone, and a 3D variant built on Frenet-Serret frames.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::QsrParams;
use crate::error::{invalid, Result};
use crate::geometry::{decompose_ypr, fs_frame, rotation_between, Point2, Point3, TimedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QtcSign {
    Minus,
    Zero,
    Plus,
}

impl QtcSign {
    pub const ALL: [QtcSign; 3] = [QtcSign::Minus, QtcSign::Zero, QtcSign::Plus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            QtcSign::Minus => "-",
            QtcSign::Zero => "0",
            QtcSign::Plus => "+",
        }
    }

    pub fn negate(self) -> QtcSign {
        match self {
            QtcSign::Minus => QtcSign::Plus,
            QtcSign::Zero => QtcSign::Zero,
            QtcSign::Plus => QtcSign::Minus,
        }
    }

    fn of(v: f64) -> QtcSign {
        if v > 0.0 {
            QtcSign::Plus
        } else if v < 0.0 {
            QtcSign::Minus
        } else {
            QtcSign::Zero
        }
    }
}

/// Sign of one relative-orientation angle, or `Degenerate` when either
/// Frenet-Serret frame is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleSign {
    Minus,
    Zero,
    Plus,
    Degenerate,
}

impl AngleSign {
    pub const ALL: [AngleSign; 4] = [
        AngleSign::Minus,
        AngleSign::Zero,
        AngleSign::Plus,
        AngleSign::Degenerate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            AngleSign::Minus => "-",
            AngleSign::Zero => "0",
            AngleSign::Plus => "+",
            AngleSign::Degenerate => "deg",
        }
    }

    fn quantise(angle: f64, beta: f64) -> AngleSign {
        if angle.abs() < beta {
            AngleSign::Zero
        } else if angle > 0.0 {
            AngleSign::Plus
        } else {
            AngleSign::Minus
        }
    }
}

/// Double-cross relation `(A, B, C, D)`.
///
/// A/B: − while k (resp. l) approaches the other point, + while it recedes.
/// C/D: − for motion to the left of the directed line k→l, + to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QtcC {
    pub a: QtcSign,
    pub b: QtcSign,
    pub c: QtcSign,
    pub d: QtcSign,
}

impl QtcC {
    pub const STILL: QtcC = QtcC {
        a: QtcSign::Zero,
        b: QtcSign::Zero,
        c: QtcSign::Zero,
        d: QtcSign::Zero,
    };

    pub fn slots(&self) -> [QtcSign; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// `(A, B, yaw, pitch, roll)` signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Qtc3D {
    pub a: QtcSign,
    pub b: QtcSign,
    pub yaw: AngleSign,
    pub pitch: AngleSign,
    pub roll: AngleSign,
}

impl Qtc3D {
    pub const STILL: Qtc3D = Qtc3D {
        a: QtcSign::Zero,
        b: QtcSign::Zero,
        yaw: AngleSign::Degenerate,
        pitch: AngleSign::Degenerate,
        roll: AngleSign::Degenerate,
    };

    pub fn angles(&self) -> [AngleSign; 3] {
        [self.yaw, self.pitch, self.roll]
    }
}

fn angular_distance(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

/// Radial and lateral signs of one point's displacement against the unit
/// direction `u` of the line k→l. `along_u` is the radial sign reported for
/// motion along `+u`.
fn planar_slots(disp: Point2, u: Point2, threshold: f64, beta: f64, along_u: QtcSign) -> (QtcSign, QtcSign) {
    let len = disp.norm();
    if len == 0.0 || len <= threshold {
        return (QtcSign::Zero, QtcSign::Zero);
    }
    // Angle from u to the displacement, measured clockwise, in [0, 2π).
    let alpha = (-u.cross(disp)).atan2(u.dot(disp)).rem_euclid(TAU);
    let lateral = if angular_distance(alpha, 0.0) < beta || angular_distance(alpha, PI) < beta {
        QtcSign::Zero
    } else {
        QtcSign::of(PI - alpha)
    };
    let radial = if angular_distance(alpha, FRAC_PI_2) < beta || angular_distance(alpha, 3.0 * FRAC_PI_2) < beta {
        QtcSign::Zero
    } else {
        match QtcSign::of(alpha.cos()) {
            QtcSign::Plus => along_u,
            QtcSign::Minus => along_u.negate(),
            QtcSign::Zero => QtcSign::Zero,
        }
    };
    (radial, lateral)
}

/// Double-cross relation between k and l over one time step. The reference
/// line joins the previous positions.
pub fn qtc_c(k_prev: Point2, k_curr: Point2, l_prev: Point2, l_curr: Point2, params: &QsrParams) -> Result<QtcC> {
    let kl = l_prev - k_prev;
    let dist = kl.norm();
    if !(dist > params.eps_pos) {
        return invalid("QTC reference points coincide");
    }
    let u = kl * (1.0 / dist);
    let threshold = params.theta * dist;
    let (a, c) = planar_slots(k_curr - k_prev, u, threshold, params.beta, QtcSign::Minus);
    let (b, d) = planar_slots(l_curr - l_prev, u, threshold, params.beta, QtcSign::Plus);
    Ok(QtcC { a, b, c, d })
}

fn radial_3d(disp: Point3, u: Point3, threshold: f64, beta: f64, along_u: QtcSign) -> QtcSign {
    let len = disp.norm();
    if len == 0.0 || len <= threshold {
        return QtcSign::Zero;
    }
    let cos = (disp.dot(u) / len).clamp(-1.0, 1.0);
    if angular_distance(cos.acos(), FRAC_PI_2) < beta {
        return QtcSign::Zero;
    }
    match QtcSign::of(cos) {
        QtcSign::Plus => along_u,
        QtcSign::Minus => along_u.negate(),
        QtcSign::Zero => QtcSign::Zero,
    }
}

/// Radial slots `(A, B)` of the 3D relation over one time step, with the
/// reference line joining the previous positions.
pub fn qtc_radial_3d(
    k_prev: Point3,
    k_curr: Point3,
    l_prev: Point3,
    l_curr: Point3,
    params: &QsrParams,
) -> Result<(QtcSign, QtcSign)> {
    let kl = l_prev - k_prev;
    let dist = kl.norm();
    if !(dist > params.eps_pos) {
        return invalid("QTC3D reference points coincide");
    }
    let u = kl / dist;
    let threshold = params.theta * dist;
    Ok((
        radial_3d(k_curr - k_prev, u, threshold, params.beta, QtcSign::Minus),
        radial_3d(l_curr - l_prev, u, threshold, params.beta, QtcSign::Plus),
    ))
}

/// 3D trajectory relation from the current and two previous samples of each
/// point.
pub fn qtc_3d(k_hist: &[TimedPoint; 3], l_hist: &[TimedPoint; 3], params: &QsrParams) -> Result<Qtc3D> {
    if k_hist[2].p.distance(l_hist[2].p) <= params.eps_pos {
        return invalid("QTC3D current positions coincide");
    }
    let (a, b) = qtc_radial_3d(k_hist[1].p, k_hist[2].p, l_hist[1].p, l_hist[2].p, params)?;

    let fk = fs_frame(k_hist)?;
    let fl = fs_frame(l_hist)?;
    if fk.degenerate || fl.degenerate {
        return Ok(Qtc3D {
            a,
            b,
            yaw: AngleSign::Degenerate,
            pitch: AngleSign::Degenerate,
            roll: AngleSign::Degenerate,
        });
    }
    let e = decompose_ypr(&rotation_between(&fk, &fl)?);
    Ok(Qtc3D {
        a,
        b,
        yaw: AngleSign::quantise(e.yaw, params.beta),
        pitch: AngleSign::quantise(e.pitch, params.beta),
        roll: AngleSign::quantise(e.roll, params.beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use QtcSign::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn both_static() {
        let q = qtc_c(
            p(0.0, 0.0),
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(1.0, 0.0),
            &QsrParams::default(),
        )
        .unwrap();
        assert_eq!(q, QtcC::STILL);
    }

    #[test]
    fn straight_approach() {
        let prm = QsrParams::default();
        let step = 10.0 * prm.theta * 2.0;
        let q = qtc_c(p(0.0, 0.0), p(step, 0.0), p(2.0, 0.0), p(2.0, 0.0), &prm).unwrap();
        assert_eq!(q.slots(), [Minus, Zero, Zero, Zero]);
    }

    #[test]
    fn perpendicular_left() {
        let prm = QsrParams::default();
        let q = qtc_c(p(0.0, 0.0), p(0.0, 0.5), p(2.0, 0.0), p(2.0, 0.0), &prm).unwrap();
        assert_eq!(q.slots(), [Zero, Zero, Minus, Zero]);
        let q = qtc_c(p(0.0, 0.0), p(0.0, -0.5), p(2.0, 0.0), p(2.0, 0.0), &prm).unwrap();
        assert_eq!(q.slots(), [Zero, Zero, Plus, Zero]);
    }

    #[test]
    fn l_receding_along_line() {
        let prm = QsrParams::default();
        let q = qtc_c(p(0.0, 0.0), p(0.0, 0.0), p(2.0, 0.0), p(2.5, 0.1), &prm).unwrap();
        assert_eq!(q.slots(), [Zero, Plus, Zero, Minus]);
    }

    #[test]
    fn small_motion_is_ignored() {
        let prm = QsrParams::default();
        // 0.04 < θ·|kl| = 0.05 · 1
        let q = qtc_c(p(0.0, 0.0), p(0.04, 0.0), p(1.0, 0.0), p(1.0, 0.0), &prm).unwrap();
        assert_eq!(q, QtcC::STILL);
    }

    #[test]
    fn deadzone_zeroes_near_axis_slots() {
        let prm = QsrParams::default();
        let tilt = prm.beta * 0.5;
        // Nearly straight toward l: lateral slot suppressed.
        let q = qtc_c(p(0.0, 0.0), p(tilt.cos(), tilt.sin()), p(5.0, 0.0), p(5.0, 0.0), &prm).unwrap();
        assert_eq!(q.slots(), [Minus, Zero, Zero, Zero]);
        // Nearly perpendicular: radial slot suppressed.
        let a = FRAC_PI_2 + tilt;
        let q = qtc_c(p(0.0, 0.0), p(a.cos(), a.sin()), p(5.0, 0.0), p(5.0, 0.0), &prm).unwrap();
        assert_eq!(q.slots(), [Zero, Zero, Minus, Zero]);
    }

    #[test]
    fn coincident_reference_rejected() {
        assert!(qtc_c(
            p(1.0, 1.0),
            p(0.0, 0.0),
            p(1.0, 1.0),
            p(2.0, 0.0),
            &QsrParams::default()
        )
        .is_err());
    }

    fn hist(f: impl Fn(f64) -> Point3, t: f64, dt: f64) -> [TimedPoint; 3] {
        [t - 2.0 * dt, t - dt, t].map(|s| TimedPoint::new(s, f(s)))
    }

    #[test]
    fn straight_lines_are_degenerate() {
        let prm = QsrParams {
            theta: 0.001,
            ..QsrParams::default()
        };
        let k = hist(|t| Point3::new(0.3 * t, 0.0, 0.0), 1.0, 1.0 / 24.0);
        let l = hist(|t| Point3::new(2.0, 0.2 * t, 0.0), 1.0, 1.0 / 24.0);
        let q = qtc_3d(&k, &l, &prm).unwrap();
        assert_eq!(q.angles(), [AngleSign::Degenerate; 3]);
        assert_eq!(q.a, Plus.negate()); // k approaches l
    }

    #[test]
    fn congruent_circles_have_identity_orientation() {
        let prm = QsrParams::default();
        let circle = |c: Point3| move |t: f64| c + Point3::new(0.3 * t.cos(), 0.3 * t.sin(), 0.0);
        let k = hist(circle(Point3::ZERO), 1.0, 1.0 / 24.0);
        let l = hist(circle(Point3::new(2.0, 0.0, 0.0)), 1.0, 1.0 / 24.0);
        let q = qtc_3d(&k, &l, &prm).unwrap();
        assert_eq!(q.angles(), [AngleSign::Zero; 3]);
    }

    #[test]
    fn coincident_current_positions_rejected() {
        let prm = QsrParams::default();
        let k = hist(|t| Point3::new(t, 0.0, 0.0), 1.0, 0.1);
        let l = hist(|t| Point3::new(2.0 - t, 0.0, 0.0), 1.0, 0.1);
        assert!(qtc_3d(&k, &l, &prm).is_err());
    }
}
