//! Gap filling, rate normalisation and slicing into fixed-length segments.

use super::{Frame, Schema, Session};
use crate::error::{invalid, Error, Result};
use crate::labels::LabelTuple;

pub const SEGMENT_FRAMES: usize = 20;

/// Grid times within this distance of a source timestamp reuse that sample.
const SNAP: f64 = 1e-9;

/// Fixed-length window of a resampled session with its gold label.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub session_id: String,
    /// Position of the window within its session.
    pub index: usize,
    pub schema: Schema,
    pub frames: Vec<Frame>,
    pub label: LabelTuple,
}

impl Segment {
    pub fn dt(&self) -> f64 {
        self.frames[1].t - self.frames[0].t
    }
}

/// Replaces every untracked run by linear interpolation (in time) between
/// its tracked neighbours.
pub fn interpolate_gaps(session: &Session) -> Result<Session> {
    let mut out = session.clone();
    let n_frames = out.frames.len();
    if n_frames == 0 {
        return Ok(out);
    }
    let ids = session.schema.point_ids();
    for (pi, id) in ids.iter().enumerate() {
        if !out.frames[0].tracked[pi] || !out.frames[n_frames - 1].tracked[pi] {
            return Err(Error::BoundaryExtrapolation { point: id.clone() });
        }
        let mut last_tracked = 0;
        for fi in 1..n_frames {
            if !out.frames[fi].tracked[pi] {
                continue;
            }
            if fi > last_tracked + 1 {
                let (t0, p0) = (out.frames[last_tracked].t, out.frames[last_tracked].points[pi]);
                let (t1, p1) = (out.frames[fi].t, out.frames[fi].points[pi]);
                for gap in last_tracked + 1..fi {
                    let w = (out.frames[gap].t - t0) / (t1 - t0);
                    out.frames[gap].points[pi] = p0.lerp(p1, w);
                    out.frames[gap].tracked[pi] = true;
                }
            }
            last_tracked = fi;
        }
    }
    Ok(out)
}

/// Linear resampling onto `t0 + k / rate_hz` for every grid time inside
/// the source range.
pub fn resample(session: &Session, rate_hz: f64) -> Result<Session> {
    if session.frames.len() < 2 {
        return invalid(format!("session {}: resampling needs at least 2 frames", session.id));
    }
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return invalid(format!("resampling rate must be positive, got {rate_hz}"));
    }
    let src = &session.frames;
    let t0 = src[0].t;
    let t_end = src[src.len() - 1].t;
    let mut frames = Vec::new();
    let mut i = 0;
    for k in 0.. {
        let t = t0 + k as f64 / rate_hz;
        if t > t_end + SNAP {
            break;
        }
        while i + 2 < src.len() && src[i + 1].t <= t {
            i += 1;
        }
        let (a, b) = (&src[i], &src[i + 1]);
        let frame = if (t - a.t).abs() <= SNAP {
            Frame { t, ..a.clone() }
        } else if (t - b.t).abs() <= SNAP {
            Frame { t, ..b.clone() }
        } else {
            let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            Frame {
                t,
                points: a.points.iter().zip(&b.points).map(|(p, q)| p.lerp(*q, w)).collect(),
                tracked: a.tracked.iter().zip(&b.tracked).map(|(x, y)| *x && *y).collect(),
            }
        };
        frames.push(frame);
    }
    Ok(Session {
        rate_hz,
        frames,
        ..session.clone()
    })
}

/// Consecutive non-overlapping windows of `SEGMENT_FRAMES` frames. Each
/// window takes the label of the span containing its temporal midpoint; a
/// trailing remainder is dropped.
pub fn slice(session: &Session) -> Vec<Segment> {
    session
        .frames
        .chunks_exact(SEGMENT_FRAMES)
        .enumerate()
        .map(|(index, frames)| {
            let mid = 0.5 * (frames[0].t + frames[SEGMENT_FRAMES - 1].t);
            Segment {
                session_id: session.id.clone(),
                index,
                schema: session.schema.clone(),
                frames: frames.to_vec(),
                label: session.label_at(mid),
            }
        })
        .collect()
}

/// Gap interpolation, resampling and slicing, in that order.
pub fn prepare(session: &Session, rate_hz: f64) -> Result<Vec<Segment>> {
    session.validate()?;
    let filled = interpolate_gaps(session)?;
    let uniform = resample(&filled, rate_hz)?;
    Ok(slice(&uniform))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::pipeline::Span;

    fn line_session(n: usize, rate: f64, f: impl Fn(f64) -> Point3) -> Session {
        let schema = Schema::blockworld();
        let np = schema.point_count();
        let frames = (0..n)
            .map(|k| {
                let t = k as f64 / rate;
                Frame {
                    t,
                    points: (0..np).map(|i| f(t) + Point3::new(0.0, i as f64, 0.0)).collect(),
                    tracked: vec![true; np],
                }
            })
            .collect();
        Session {
            id: "line".into(),
            rate_hz: rate,
            schema,
            frames,
            spans: vec![],
        }
    }

    #[test]
    fn uniform_input_is_unchanged() {
        let s = line_session(50, 24.0, |t| Point3::new(t.sin(), t * t, 0.3));
        let r = resample(&s, 24.0).unwrap();
        assert_eq!(r.frames.len(), s.frames.len());
        for (a, b) in r.frames.iter().zip(&s.frames) {
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!((*p - *q).norm() <= 1e-12);
            }
        }
        assert_eq!(resample(&r, 24.0).unwrap(), r);
    }

    #[test]
    fn linear_motion_is_interpolation_exact() {
        let s = line_session(13, 12.0, |t| Point3::new(t, 0.0, 0.0));
        let r = resample(&s, 24.0).unwrap();
        assert_eq!(r.frames.len(), 25);
        for f in &r.frames {
            assert!((f.points[0].x - f.t).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_error_bound() {
        let dt: f64 = 1.0 / 12.0;
        let s = line_session(13, 12.0, |t| Point3::new(t * t, 0.0, 0.0));
        let r = resample(&s, 24.0).unwrap();
        for f in &r.frames {
            let err = (f.points[0].x - f.t * f.t).abs();
            assert!(err <= dt * dt / 4.0 + 1e-12, "{err:e} at {}", f.t);
        }
    }

    #[test]
    fn resample_needs_two_frames() {
        let s = line_session(1, 24.0, |t| Point3::new(t, 0.0, 0.0));
        assert!(resample(&s, 24.0).is_err());
    }

    #[test]
    fn gaps_filled_linearly() {
        let mut s = line_session(10, 24.0, |t| Point3::new(2.0 * t, 0.0, 0.0));
        let truth = s.clone();
        for k in 2..7 {
            s.frames[k].tracked[4] = false;
            s.frames[k].points[4] = Point3::new(99.0, 99.0, 99.0);
        }
        let filled = interpolate_gaps(&s).unwrap();
        for (a, b) in filled.frames.iter().zip(&truth.frames) {
            assert!((a.points[4] - b.points[4]).norm() < 1e-12);
            assert!(a.tracked.iter().all(|&x| x));
        }
        assert_eq!(interpolate_gaps(&truth).unwrap(), truth);
    }

    #[test]
    fn single_missing_frame_is_midpoint() {
        let mut s = line_session(3, 24.0, |_| Point3::ZERO);
        s.frames[0].points[0] = Point3::ZERO;
        s.frames[2].points[0] = Point3::new(2.0, 0.0, 0.0);
        s.frames[1].tracked[0] = false;
        let filled = interpolate_gaps(&s).unwrap();
        assert!((filled.frames[1].points[0] - Point3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn boundary_gap_is_an_error() {
        let mut s = line_session(5, 24.0, |_| Point3::ZERO);
        s.frames[4].tracked[7] = false;
        assert!(matches!(
            interpolate_gaps(&s),
            Err(Error::BoundaryExtrapolation { point }) if point == "O1/c3"
        ));
    }

    #[test]
    fn slicing_counts() {
        for (n, expected) in [(60, 3), (59, 2), (19, 0), (20, 1)] {
            let s = line_session(n, 24.0, |t| Point3::new(t, 0.0, 0.0));
            let segs = slice(&s);
            assert_eq!(segs.len(), expected, "{n} frames");
            assert!(segs.iter().all(|g| g.frames.len() == SEGMENT_FRAMES));
        }
    }

    #[test]
    fn slices_take_label_of_midpoint_span() {
        let mut s = line_session(40, 24.0, |t| Point3::new(t, 0.0, 0.0));
        let push = LabelTuple {
            verb: crate::labels::Verb::Push,
            subject: crate::labels::Entity::Performer,
            object: crate::labels::Entity::O1,
            ..LabelTuple::NONE
        };
        s.spans = vec![Span {
            start_t: 0.9,
            end_t: 2.0,
            label: push,
        }];
        let segs = slice(&s);
        assert_eq!(segs[0].label, LabelTuple::NONE);
        assert_eq!(segs[1].label, push);
    }
}
