use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corrupt::corrupt;
use super::scenario::{ObjectKind, ScenarioSpec};
use crate::error::Result;
use crate::geometry::Point3;
use crate::labels::{Preposition, Verb};
use crate::pipeline::{Frame, Schema, Session, Span};

/// Edge length of both objects (cube side, cylinder diameter and length).
pub const OBJECT_SIZE: f64 = 0.1;
/// Hand tip to moved-object centroid distance counted as contact.
pub const CONTACT_DISTANCE: f64 = 0.05;
/// Radius of the marker circle on a cylinder's end face.
pub const CYLINDER_MARKER_RADIUS: f64 = 0.04;

const HAND_OFFSET: f64 = 0.045;
/// Fraction of the session spent reaching before the hand meets the object.
const REACH_FRACTION: f64 = 0.3;
/// Share of the displacement covered at constant speed; the rest follows a
/// minimum-jerk profile. Keeps the object moving on every frame.
const CONSTANT_SHARE: f64 = 0.6;
const SPEED_RANGE: (f64, f64) = (0.25, 0.35);
const HEADING_JITTER: f64 = 25.0 * PI / 180.0;
const SCENE_SHIFT: f64 = 0.4;
const SCENE_YAW: f64 = PI / 6.0;

/// A generated session together with the scenario that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSession {
    pub session: Session,
    pub spec: ScenarioSpec,
}

fn min_jerk(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Normalised displacement along the path at normalised time `tau`.
fn progress(tau: f64) -> f64 {
    CONSTANT_SHARE * tau.clamp(0.0, 1.0) + (1.0 - CONSTANT_SHARE) * min_jerk(tau)
}

fn planar(angle: f64) -> Point3 {
    Point3::new(angle.cos(), angle.sin(), 0.0)
}

/// Marker positions of an object given its marker centroid.
///
/// Cubes carry their markers on the top face corners, rotated by `yaw`.
/// Cylinders lie on their side with the axis horizontal and perpendicular to
/// `yaw`; markers sit on one end face at quarter turns offset by `spin`.
fn markers(kind: ObjectKind, centroid: Point3, yaw: f64, spin: f64) -> [Point3; 4] {
    match kind {
        ObjectKind::Cube => {
            let r = 0.5 * OBJECT_SIZE * 2f64.sqrt();
            std::array::from_fn(|k| centroid + planar(yaw + FRAC_PI_4 + k as f64 * FRAC_PI_2) * r)
        }
        ObjectKind::Cylinder => {
            let u = planar(yaw);
            std::array::from_fn(|k| {
                let a = spin + k as f64 * FRAC_PI_2;
                centroid + (u * a.cos() + Point3::Z * a.sin()) * CYLINDER_MARKER_RADIUS
            })
        }
    }
}

fn centroid_height(kind: ObjectKind) -> f64 {
    match kind {
        ObjectKind::Cube => OBJECT_SIZE,
        ObjectKind::Cylinder => 0.5 * OBJECT_SIZE,
    }
}

/// Scene layout in the performer's frame (performer at the origin, facing +y).
struct Layout {
    start: Point3,
    heading: f64,
    length: f64,
    reference: Point3,
    moved_yaw: f64,
    reference_yaw: f64,
    reference_spin: f64,
    spin0: f64,
    scene_yaw: f64,
    scene_shift: Point3,
    idle_phase: [f64; 2],
}

fn layout(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Layout {
    let jitter = rng.gen_range(-HEADING_JITTER..HEADING_JITTER);
    let (heading, sx, sy) = match spec.verb {
        Verb::Push => (FRAC_PI_2, rng.gen_range(-0.2..0.2), rng.gen_range(0.25..0.35)),
        Verb::Pull => (-FRAC_PI_2, rng.gen_range(-0.2..0.2), rng.gen_range(0.55..0.7)),
        _ => {
            let right = rng.gen_bool(0.5);
            let x = rng.gen_range(0.1..0.2);
            if right {
                (0.0, -x, rng.gen_range(0.3..0.5))
            } else {
                (PI, x, rng.gen_range(0.3..0.5))
            }
        }
    };
    let heading = heading + jitter;
    let start = Point3::new(sx, sy, centroid_height(spec.moved));
    let length = rng.gen_range(SPEED_RANGE.0..SPEED_RANGE.1) * spec.duration_s;
    let u = planar(heading);
    let w = planar(heading + FRAC_PI_2);
    let lateral = |rng: &mut ChaCha8Rng| w * rng.gen_range(-0.01..0.01);
    let base = match spec.preposition {
        Preposition::Toward => start + u * (length + rng.gen_range(0.12..0.2)) + lateral(rng),
        Preposition::AwayFrom => start - u * rng.gen_range(0.12..0.2) + lateral(rng),
        Preposition::Past => {
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            start + u * (length * rng.gen_range(0.35..0.65)) + w * (side * rng.gen_range(0.12..0.18))
        }
        Preposition::None => start + u * (0.5 * length) + planar(rng.gen_range(-PI..PI)) * rng.gen_range(0.6..0.9),
    };
    let reference = Point3::new(base.x, base.y, centroid_height(spec.reference));
    Layout {
        start,
        heading,
        length,
        reference,
        moved_yaw: if spec.moved == ObjectKind::Cylinder {
            heading
        } else {
            rng.gen_range(-PI..PI)
        },
        reference_yaw: rng.gen_range(-PI..PI),
        reference_spin: rng.gen_range(-PI..PI),
        spin0: rng.gen_range(-PI..PI),
        scene_yaw: rng.gen_range(-SCENE_YAW..SCENE_YAW),
        scene_shift: Point3::new(
            rng.gen_range(-SCENE_SHIFT..SCENE_SHIFT),
            rng.gen_range(-SCENE_SHIFT..SCENE_SHIFT),
            0.0,
        ),
        idle_phase: [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)],
    }
}

const SHOULDERS: [Point3; 2] = [Point3::new(-0.18, -0.05, 0.45), Point3::new(0.18, -0.05, 0.45)];
const HANDS_AT_REST: [Point3; 2] = [Point3::new(-0.2, 0.12, 0.04), Point3::new(0.2, 0.12, 0.04)];

/// Clean positions of every schema point at time `t` into a take.
fn pose(spec: &ScenarioSpec, lay: &Layout, t: f64) -> Vec<Point3> {
    let tau = t / spec.duration_s;
    let u = planar(lay.heading);
    let travelled = lay.length * progress(tau);
    let centroid = lay.start + u * travelled;
    let spin = match spec.moved {
        ObjectKind::Cylinder => lay.spin0 - travelled / (0.5 * OBJECT_SIZE),
        ObjectKind::Cube => 0.0,
    };
    let moved = markers(spec.moved, centroid, lay.moved_yaw, spin);
    let reference = markers(spec.reference, lay.reference, lay.reference_yaw, lay.reference_spin);

    let idle = |side: usize| {
        let s = 0.005 * (2.0 * PI * 0.7 * t + lay.idle_phase[side]).sin();
        HANDS_AT_REST[side] + Point3::new(0.0, 0.0, s)
    };
    let mut hands = [idle(0), idle(1)];
    let active = usize::from(lay.start.x >= 0.0);
    if spec.actor {
        let side = if spec.verb == Verb::Pull { 1.0 } else { -1.0 };
        let contact = |tau: f64| lay.start + u * (lay.length * progress(tau) + side * HAND_OFFSET);
        hands[active] = if tau >= REACH_FRACTION {
            contact(tau)
        } else {
            let from = HANDS_AT_REST[active];
            let to = contact(REACH_FRACTION);
            let lift = (from + to) * 0.5 + Point3::new(0.0, 0.0, 0.1);
            let b = min_jerk(tau / REACH_FRACTION);
            from * ((1.0 - b) * (1.0 - b)) + lift * (2.0 * b * (1.0 - b)) + to * (b * b)
        };
    }
    let lean = |side: usize| {
        let d = hands[side] - HANDS_AT_REST[side];
        let k = if side == active { 0.3 } else { 0.1 };
        SHOULDERS[side] + Point3::new(d.x * k, d.y * k, 0.0)
    };

    let mut points = vec![lean(0), lean(1), hands[0], hands[1]];
    points.extend(moved);
    points.extend(reference);
    let (c, s) = (lay.scene_yaw.cos(), lay.scene_yaw.sin());
    points
        .into_iter()
        .map(|p| Point3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z) + lay.scene_shift)
        .collect()
}

/// Synthesises a session for `spec`, then applies its noise and dropout.
pub fn generate(spec: &ScenarioSpec) -> Result<SyntheticSession> {
    generate_with_id(spec, &format!("sim_{:016x}", spec.seed))
}

pub fn generate_with_id(spec: &ScenarioSpec, id: &str) -> Result<SyntheticSession> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layouts: Vec<Layout> = (0..spec.takes).map(|_| layout(spec, &mut rng)).collect();
    let schema = Schema::blockworld();
    let n = schema.point_count();
    let frames: Vec<Frame> = (0..spec.frame_count())
        .map(|k| {
            let t = k as f64 / spec.rate_hz;
            let take = ((t / spec.duration_s + 1e-9).floor() as usize).min(spec.takes - 1);
            Frame {
                t,
                points: pose(spec, &layouts[take], t - take as f64 * spec.duration_s),
                tracked: vec![true; n],
            }
        })
        .collect();
    let end = frames.last().map_or(0.0, |f| f.t);
    let clean = Session {
        id: id.into(),
        rate_hz: spec.rate_hz,
        schema,
        frames,
        spans: vec![Span {
            start_t: 0.0,
            end_t: end,
            label: spec.label(),
        }],
    };
    let session = corrupt(&clean, spec.noise_sigma, spec.dropout, spec.seed ^ 0x6e6f_6973_65)?;
    Ok(SyntheticSession {
        session,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::pipeline::{HAND_TIP_LEFT, HAND_TIP_RIGHT, PERFORMER};
    use crate::qsr::{cardir2d, QsrParams};

    fn centroid(s: &Session, f: usize, entity: &str) -> Point3 {
        let pts: Vec<Point3> = crate::pipeline::CORNERS
            .iter()
            .map(|c| s.frames[f].points[s.schema.require(entity, c).unwrap()])
            .collect();
        Point3::centroid(&pts).unwrap()
    }

    fn distances(s: &Session) -> Vec<f64> {
        (0..s.frames.len())
            .map(|f| centroid(s, f, "O1").distance(centroid(s, f, "O2")))
            .collect()
    }

    /// Distance profiles split at take boundaries.
    fn take_distances(spec: &ScenarioSpec) -> Vec<Vec<f64>> {
        let s = generate(spec).unwrap().session;
        let d = distances(&s);
        let per = (spec.duration_s * spec.rate_hz).round() as usize;
        let mut takes: Vec<Vec<f64>> = d.chunks(per).map(<[f64]>::to_vec).collect();
        // The closing frame belongs to the last take.
        if takes.len() > spec.takes {
            let tail = takes.pop().unwrap();
            takes.last_mut().unwrap().extend(tail);
        }
        assert_eq!(takes.len(), spec.takes);
        takes
    }

    fn spec_takes(verb: Verb, prep: Preposition, seed: u64, takes: usize) -> ScenarioSpec {
        let mut s = ScenarioSpec::new(verb, prep, seed);
        s.takes = takes;
        s.rate_hz = 30.0;
        s
    }

    fn spec(verb: Verb, prep: Preposition, seed: u64) -> ScenarioSpec {
        ScenarioSpec::new(verb, prep, seed)
    }

    #[test]
    fn toward_and_away_are_monotone() {
        for seed in 0..20 {
            for verb in [Verb::Push, Verb::Pull, Verb::Slide, Verb::Roll] {
                let d = distances(&generate(&spec(verb, Preposition::Toward, seed)).unwrap().session);
                assert!(d.windows(2).all(|w| w[1] < w[0]), "{verb} toward seed {seed}: {d:?}");
                let d = distances(&generate(&spec(verb, Preposition::AwayFrom, seed)).unwrap().session);
                assert!(d.windows(2).all(|w| w[1] > w[0]), "{verb} away seed {seed}: {d:?}");
                for d in take_distances(&spec_takes(verb, Preposition::Toward, seed, 3)) {
                    assert!(d.windows(2).all(|w| w[1] < w[0]), "{verb} toward seed {seed}: {d:?}");
                }
            }
        }
    }

    #[test]
    fn past_has_one_interior_minimum() {
        for seed in 0..20 {
            for verb in [Verb::Slide, Verb::Roll, Verb::Push] {
                for d in take_distances(&spec_takes(verb, Preposition::Past, seed, 2)) {
                    let m = d.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
                    assert!(m > 0 && m + 1 < d.len(), "minimum at the boundary: {d:?}");
                    assert!(d[..=m].windows(2).all(|w| w[1] < w[0]));
                    assert!(d[m..].windows(2).all(|w| w[1] > w[0]));
                }
            }
        }
    }

    #[test]
    fn hand_touches_object_while_moving() {
        for seed in 0..10 {
            for verb in [Verb::Push, Verb::Pull] {
                let s = generate(&spec(verb, Preposition::AwayFrom, seed)).unwrap().session;
                let hands = [HAND_TIP_LEFT, HAND_TIP_RIGHT].map(|h| s.schema.require(PERFORMER, h).unwrap());
                for (f, frame) in s.frames.iter().enumerate() {
                    if frame.t / s.frames.last().unwrap().t < REACH_FRACTION + 1e-9 {
                        continue;
                    }
                    let c = centroid(&s, f, "O1");
                    let near = hands
                        .iter()
                        .map(|&h| frame.points[h].distance(c))
                        .fold(f64::MAX, f64::min);
                    assert!(near <= CONTACT_DISTANCE, "{verb} seed {seed} frame {f}: {near}");
                }
            }
        }
    }

    #[test]
    fn push_moves_away_from_rig_and_pull_toward_it() {
        for seed in 0..10 {
            for (verb, sign) in [(Verb::Push, 1.0), (Verb::Pull, -1.0)] {
                let s = generate(&spec(verb, Preposition::None, seed)).unwrap().session;
                let shoulders = |f: usize| (s.frames[f].points[0] + s.frames[f].points[1]) * 0.5;
                let last = s.frames.len() - 1;
                let d0 = centroid(&s, 0, "O1").distance(shoulders(0));
                let d1 = centroid(&s, last, "O1").distance(shoulders(last));
                assert!(sign * (d1 - d0) > 0.0, "{verb}: {d0} -> {d1}");
            }
        }
    }

    fn diagonal_symbols(s: &Session) -> Vec<String> {
        let c0 = s.schema.require("O1", "c0").unwrap();
        let c2 = s.schema.require("O1", "c2").unwrap();
        let params = QsrParams::default();
        s.frames
            .iter()
            .map(|f| {
                // Bearing in the vertical plane through the direction of travel.
                let u = (centroid(s, s.frames.len() - 1, "O1") - centroid(s, 0, "O1"))
                    .normalized()
                    .unwrap();
                let p = |q: Point3| Point2::new(q.dot(u), q.z);
                cardir2d(p(f.points[c0]), p(f.points[c2]), &params).symbol().to_string()
            })
            .collect()
    }

    #[test]
    fn rolling_markers_cycle_and_sliding_markers_do_not() {
        let mut roll = spec(Verb::Roll, Preposition::None, 3);
        roll.duration_s = 3.0 * roll.duration_s;
        roll.rate_hz = 120.0;
        let s = generate(&roll).unwrap().session;
        let symbols = diagonal_symbols(&s);
        let per_rev = 2.0 * PI * 0.5 * OBJECT_SIZE;
        let dist = centroid(&s, 0, "O1").distance(centroid(&s, s.frames.len() - 1, "O1"));
        assert!(dist > per_rev, "less than a revolution: {dist}");
        let mut distinct = symbols.clone();
        distinct.sort();
        distinct.dedup();
        assert!(distinct.len() >= 4, "{distinct:?}");
        // Every change of symbol moves to a new sector, and the sequence returns to its start.
        assert!(symbols[1..].contains(&symbols[0]));

        let slide = generate(&spec(Verb::Slide, Preposition::None, 3)).unwrap().session;
        let c0 = slide.schema.require("O1", "c0").unwrap();
        let c2 = slide.schema.require("O1", "c2").unwrap();
        let d0 = slide.frames[0].points[c2] - slide.frames[0].points[c0];
        for f in &slide.frames {
            assert!((f.points[c2] - f.points[c0] - d0).norm() < 1e-12);
        }
    }

    #[test]
    fn cylinder_markers_stay_on_the_end_face() {
        let s = generate(&spec(Verb::Roll, Preposition::Toward, 8)).unwrap().session;
        for f in 0..s.frames.len() {
            let c = centroid(&s, f, "O1");
            for corner in crate::pipeline::CORNERS {
                let p = s.frames[f].points[s.schema.require("O1", corner).unwrap()];
                assert!((p.distance(c) - CYLINDER_MARKER_RADIUS).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate(&spec(Verb::Slide, Preposition::Past, 5)).unwrap();
        assert_eq!(a, generate(&spec(Verb::Slide, Preposition::Past, 5)).unwrap());
        assert_ne!(
            a.session.frames,
            generate(&spec(Verb::Slide, Preposition::Past, 6))
                .unwrap()
                .session
                .frames
        );
    }

    #[test]
    fn takes_use_fresh_layouts() {
        let spec = spec_takes(Verb::Push, Preposition::AwayFrom, 2, 3);
        let s = generate(&spec).unwrap().session;
        let per = (spec.duration_s * spec.rate_hz).round() as usize;
        let starts: Vec<Point3> = (0..3).map(|k| centroid(&s, k * per, "O2")).collect();
        assert!(starts[0].distance(starts[1]) > 1e-6 && starts[1].distance(starts[2]) > 1e-6);
        assert_eq!(s.frames.len(), spec.frame_count());
        assert_eq!(s.spans.len(), 1);
        assert!((s.spans[0].end_t - 3.0 * spec.duration_s).abs() < 1e-9);
    }

    #[test]
    fn invalid_pairing_is_rejected() {
        let mut s = spec(Verb::Roll, Preposition::Past, 0);
        s.moved = ObjectKind::Cube;
        assert!(generate(&s).is_err());
    }
}
