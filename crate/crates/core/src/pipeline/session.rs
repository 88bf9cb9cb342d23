use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;
use crate::labels::LabelTuple;

pub const PERFORMER: &str = "performer";
pub const OBJECTS: [&str; 2] = ["O1", "O2"];
pub const SHOULDER_LEFT: &str = "shoulder_left";
pub const SHOULDER_RIGHT: &str = "shoulder_right";
pub const HAND_TIP_LEFT: &str = "hand_tip_left";
pub const HAND_TIP_RIGHT: &str = "hand_tip_right";
/// Marker corners in order around the tracked face; `c0`/`c2` and `c1`/`c3`
/// are the diagonals.
pub const CORNERS: [&str; 4] = ["c0", "c1", "c2", "c3"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySchema {
    pub name: String,
    pub points: Vec<String>,
}

/// Named entities and their tracked points. Points are addressed as
/// `entity/point` and stored per frame in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub entities: Vec<EntitySchema>,
}

impl Schema {
    /// Performer rig with shoulders and hand tips plus two four-marker objects.
    pub fn blockworld() -> Schema {
        let mut entities = vec![EntitySchema {
            name: PERFORMER.into(),
            points: [SHOULDER_LEFT, SHOULDER_RIGHT, HAND_TIP_LEFT, HAND_TIP_RIGHT]
                .map(String::from)
                .to_vec(),
        }];
        for o in OBJECTS {
            entities.push(EntitySchema {
                name: o.into(),
                points: CORNERS.map(String::from).to_vec(),
            });
        }
        Schema { entities }
    }

    pub fn point_ids(&self) -> Vec<String> {
        self.entities
            .iter()
            .flat_map(|e| e.points.iter().map(move |p| format!("{}/{}", e.name, p)))
            .collect()
    }

    pub fn point_count(&self) -> usize {
        self.entities.iter().map(|e| e.points.len()).sum()
    }

    pub fn index_of(&self, entity: &str, point: &str) -> Option<usize> {
        let mut base = 0;
        for e in &self.entities {
            if e.name == entity {
                return e.points.iter().position(|p| p == point).map(|i| base + i);
            }
            base += e.points.len();
        }
        None
    }

    pub fn require(&self, entity: &str, point: &str) -> Result<usize> {
        self.index_of(entity, point)
            .ok_or_else(|| Error::InvalidInput(format!("schema has no point `{entity}/{point}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    /// Positions in schema order.
    pub points: Vec<Point3>,
    pub tracked: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start_t: f64,
    pub end_t: f64,
    pub label: LabelTuple,
}

/// One recording: timestamped positions of every schema point.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub rate_hz: f64,
    pub schema: Schema,
    pub frames: Vec<Frame>,
    pub spans: Vec<Span>,
}

impl Session {
    pub fn validate(&self) -> Result<()> {
        let n = self.schema.point_count();
        if !(self.rate_hz > 0.0) {
            return invalid(format!("session {}: rate must be positive", self.id));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.points.len() != n || f.tracked.len() != n {
                return invalid(format!("session {}: frame {i} does not match the schema", self.id));
            }
            if !(f.t.is_finite() && f.t >= 0.0) {
                return invalid(format!("session {}: frame {i} has invalid timestamp {}", self.id, f.t));
            }
            if f.points.iter().any(|p| !p.is_finite()) {
                return invalid(format!("session {}: frame {i} has non-finite coordinates", self.id));
            }
        }
        if let Some(w) = self.frames.windows(2).position(|w| w[1].t <= w[0].t) {
            return invalid(format!(
                "session {}: timestamps not strictly increasing at frame {}",
                self.id,
                w + 1
            ));
        }
        Ok(())
    }

    /// Label of the span containing `t`, or the all-`None` tuple.
    pub fn label_at(&self, t: f64) -> LabelTuple {
        self.spans
            .iter()
            .find(|s| s.start_t <= t && t <= s.end_t)
            .map(|s| s.label)
            .unwrap_or(LabelTuple::NONE)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SessionFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Session> {
        let file: SessionFile = serde_json::from_str(text)?;
        file.into_session()
    }

    pub fn load(path: &Path) -> Result<Session> {
        Session::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk layout of a session.
#[derive(Debug, Serialize, Deserialize)]
struct SessionFile {
    id: String,
    rate_hz: f64,
    schema: Schema,
    frames: Vec<FrameFile>,
    #[serde(default)]
    spans: Vec<Span>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameFile {
    t: f64,
    points: BTreeMap<String, Point3>,
    #[serde(default)]
    tracked: BTreeMap<String, bool>,
}

impl From<&Session> for SessionFile {
    fn from(s: &Session) -> Self {
        let ids = s.schema.point_ids();
        let frames = s
            .frames
            .iter()
            .map(|f| FrameFile {
                t: f.t,
                points: ids.iter().cloned().zip(f.points.iter().copied()).collect(),
                tracked: ids.iter().cloned().zip(f.tracked.iter().copied()).collect(),
            })
            .collect();
        SessionFile {
            id: s.id.clone(),
            rate_hz: s.rate_hz,
            schema: s.schema.clone(),
            frames,
            spans: s.spans.clone(),
        }
    }
}

impl SessionFile {
    fn into_session(self) -> Result<Session> {
        let ids = self.schema.point_ids();
        let mut frames = Vec::with_capacity(self.frames.len());
        for (i, f) in self.frames.into_iter().enumerate() {
            if f.points.len() != ids.len() {
                return invalid(format!(
                    "session {}: frame {i} names {} points, schema has {}",
                    self.id,
                    f.points.len(),
                    ids.len()
                ));
            }
            let mut points = Vec::with_capacity(ids.len());
            let mut tracked = Vec::with_capacity(ids.len());
            for id in &ids {
                let Some(p) = f.points.get(id) else {
                    return invalid(format!("session {}: frame {i} is missing point `{id}`", self.id));
                };
                points.push(*p);
                // Points without an explicit flag count as tracked.
                tracked.push(f.tracked.get(id).copied().unwrap_or(true));
            }
            if let Some(extra) = f.tracked.keys().find(|k| !ids.contains(k)) {
                return invalid(format!("session {}: frame {i} flags unknown point `{extra}`", self.id));
            }
            frames.push(Frame {
                t: f.t,
                points,
                tracked,
            });
        }
        let session = Session {
            id: self.id,
            rate_hz: self.rate_hz,
            schema: self.schema,
            frames,
            spans: self.spans,
        };
        session.validate()?;
        Ok(session)
    }
}
