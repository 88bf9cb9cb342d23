//! Factor models: the rig, each object, the object pair and each rig-object
//! pair, with the points, difference vectors and point pairs each one
//! contributes.

use super::session::{CORNERS, HAND_TIP_LEFT, HAND_TIP_RIGHT, OBJECTS, PERFORMER, SHOULDER_LEFT, SHOULDER_RIGHT};
use super::{Frame, Schema};
use crate::error::Result;
use crate::geometry::Point3;

/// A point derived from the raw markers of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anchor {
    ShoulderMid,
    HandLeft,
    HandRight,
    Corner { object: usize, corner: usize },
    Centroid { object: usize },
}

impl Anchor {
    pub const COUNT: usize = 13;

    pub fn slot(self) -> usize {
        match self {
            Anchor::ShoulderMid => 0,
            Anchor::HandLeft => 1,
            Anchor::HandRight => 2,
            Anchor::Corner { object, corner } => 3 + 4 * object + corner,
            Anchor::Centroid { object } => 11 + object,
        }
    }

    pub fn name(self) -> String {
        match self {
            Anchor::ShoulderMid => "mid".into(),
            Anchor::HandLeft => "hl".into(),
            Anchor::HandRight => "hr".into(),
            Anchor::Corner { object, corner } => format!("{}.{}", OBJECTS[object], CORNERS[corner]),
            Anchor::Centroid { object } => OBJECTS[object].into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Rig,
    Object(usize),
    ObjectPair,
    RigObject(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub kind: FactorKind,
    /// Points pooled for this factor's PCA embedding.
    pub members: Vec<Anchor>,
    /// Quantitative difference vectors `(from, to)`.
    pub vectors: Vec<(Anchor, Anchor)>,
    /// `(reference, target)` pairs fed to the qualitative calculi.
    pub pairs: Vec<(Anchor, Anchor)>,
}

impl FactorModel {
    pub fn name(&self) -> String {
        match self.kind {
            FactorKind::Rig => "R".into(),
            FactorKind::Object(o) => OBJECTS[o].into(),
            FactorKind::ObjectPair => format!("{}{}", OBJECTS[0], OBJECTS[1]),
            FactorKind::RigObject(o) => format!("R{}", OBJECTS[o]),
        }
    }

    pub fn parse_name(name: &str) -> Option<FactorModel> {
        factor_models().into_iter().find(|f| f.name() == name)
    }
}

/// The six factors of the event model, in feature order.
pub fn factor_models() -> Vec<FactorModel> {
    use Anchor::*;
    let rig = [ShoulderMid, HandLeft, HandRight];
    let rig_vectors = vec![(ShoulderMid, HandLeft), (ShoulderMid, HandRight), (HandLeft, HandRight)];
    let mut out = vec![FactorModel {
        kind: FactorKind::Rig,
        members: rig.to_vec(),
        vectors: rig_vectors.clone(),
        pairs: rig_vectors,
    }];
    for object in 0..2 {
        let c = |corner| Corner { object, corner };
        let diagonals = vec![(c(0), c(2)), (c(1), c(3))];
        out.push(FactorModel {
            kind: FactorKind::Object(object),
            members: (0..4).map(c).collect(),
            vectors: diagonals.clone(),
            pairs: diagonals,
        });
    }
    let centroids = (Centroid { object: 0 }, Centroid { object: 1 });
    out.push(FactorModel {
        kind: FactorKind::ObjectPair,
        members: vec![centroids.0, centroids.1],
        vectors: vec![centroids],
        pairs: vec![centroids],
    });
    for object in 0..2 {
        let centroid = Centroid { object };
        let mut members = rig.to_vec();
        members.push(centroid);
        out.push(FactorModel {
            kind: FactorKind::RigObject(object),
            members,
            vectors: rig.iter().map(|&r| (r, centroid)).collect(),
            pairs: vec![(HandLeft, centroid), (HandRight, centroid)],
        });
    }
    out
}

/// Schema indices of the raw markers behind the anchors.
#[derive(Debug, Clone)]
pub struct AnchorResolver {
    shoulders: [usize; 2],
    hands: [usize; 2],
    corners: [[usize; 4]; 2],
}

impl AnchorResolver {
    pub fn new(schema: &Schema) -> Result<AnchorResolver> {
        let corners = |o: &str| -> Result<[usize; 4]> {
            Ok([
                schema.require(o, CORNERS[0])?,
                schema.require(o, CORNERS[1])?,
                schema.require(o, CORNERS[2])?,
                schema.require(o, CORNERS[3])?,
            ])
        };
        Ok(AnchorResolver {
            shoulders: [
                schema.require(PERFORMER, SHOULDER_LEFT)?,
                schema.require(PERFORMER, SHOULDER_RIGHT)?,
            ],
            hands: [
                schema.require(PERFORMER, HAND_TIP_LEFT)?,
                schema.require(PERFORMER, HAND_TIP_RIGHT)?,
            ],
            corners: [corners(OBJECTS[0])?, corners(OBJECTS[1])?],
        })
    }

    /// All anchor positions of one frame, indexed by [`Anchor::slot`].
    pub fn resolve(&self, frame: &Frame) -> [Point3; Anchor::COUNT] {
        let p = &frame.points;
        let mut out = [Point3::ZERO; Anchor::COUNT];
        out[0] = (p[self.shoulders[0]] + p[self.shoulders[1]]) * 0.5;
        out[1] = p[self.hands[0]];
        out[2] = p[self.hands[1]];
        for o in 0..2 {
            let mut sum = Point3::ZERO;
            for c in 0..4 {
                let q = p[self.corners[o][c]];
                out[3 + 4 * o + c] = q;
                sum += q;
            }
            out[11 + o] = sum * 0.25;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_factors_with_unique_names() {
        let f = factor_models();
        let names: Vec<_> = f.iter().map(FactorModel::name).collect();
        assert_eq!(names, ["R", "O1", "O2", "O1O2", "RO1", "RO2"]);
        for m in &f {
            for (a, b) in m.vectors.iter().chain(&m.pairs) {
                assert!(m.members.contains(a) && m.members.contains(b));
            }
        }
        assert_eq!(FactorModel::parse_name("RO2").unwrap().kind, FactorKind::RigObject(1));
    }

    #[test]
    fn anchor_slots_are_dense() {
        let mut seen = [false; Anchor::COUNT];
        for m in factor_models() {
            for a in m.members {
                seen[a.slot()] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
