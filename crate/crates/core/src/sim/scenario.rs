use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::error::{invalid, Error, Result};
use crate::labels::{Entity, LabelTuple, Preposition, Verb};
use crate::pipeline::{PipelineConfig, SEGMENT_FRAMES};

/// Length of one segment window at the pipeline's default rate.
pub fn segment_seconds() -> f64 {
    SEGMENT_FRAMES as f64 / PipelineConfig::default().rate_hz
}

fn is_whole(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Cube,
    Cylinder,
}

impl ObjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Cube => "cube",
            ObjectKind::Cylinder => "cylinder",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(ObjectKind::Cube),
            "cylinder" => Ok(ObjectKind::Cylinder),
            other => invalid(format!("unknown object kind `{other}` (expected cube or cylinder)")),
        }
    }
}

/// Everything needed to synthesise one session. The moved object is always
/// `O1`; `O2` stays put and serves as the locative reference.
///
/// A session holds `takes` back-to-back repetitions of the event, each with
/// a fresh scene layout and lasting `duration_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub verb: Verb,
    pub preposition: Preposition,
    /// Whether the performer is part of the description. Push and pull
    /// always involve the performer.
    pub actor: bool,
    pub moved: ObjectKind,
    pub reference: ObjectKind,
    pub takes: usize,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub noise_sigma: f64,
    pub dropout: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// A noise-free scenario with default timing and object kinds implied by the verb.
    pub fn new(verb: Verb, preposition: Preposition, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            verb,
            preposition,
            actor: true,
            moved: if verb == Verb::Roll {
                ObjectKind::Cylinder
            } else {
                ObjectKind::Cube
            },
            reference: ObjectKind::Cube,
            takes: 1,
            duration_s: segment_seconds(),
            rate_hz: 24.0,
            noise_sigma: 0.0,
            dropout: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.verb, self.moved) {
            (Verb::None, _) => return invalid("a scenario needs a verb"),
            (Verb::Roll, ObjectKind::Cube) => return invalid("a cube cannot roll; use a cylinder"),
            (Verb::Slide, ObjectKind::Cylinder) => return invalid("a cylinder cannot slide; use a cube"),
            _ => {}
        }
        if matches!(self.verb, Verb::Push | Verb::Pull) && !self.actor {
            return invalid(format!("`{}` needs the performer (actor = true)", self.verb));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return invalid(format!("duration must be positive, got {}", self.duration_s));
        }
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return invalid(format!("rate must be positive, got {}", self.rate_hz));
        }
        if self.takes == 0 {
            return invalid("a scenario needs at least one take");
        }
        if self.frame_count() < 2 {
            return invalid("duration and rate give fewer than 2 frames");
        }
        if self.takes > 1 {
            // Takes start on segment boundaries and no resampled frame straddles two takes.
            let window = segment_seconds();
            let target = PipelineConfig::default().rate_hz;
            if !is_whole(self.duration_s / window) || !is_whole(self.duration_s * self.rate_hz) || self.rate_hz < target
            {
                return invalid(format!(
                    "multi-take sessions need a take length that is a whole number of {window:.4} s windows \
                     and of native frames, at a native rate of at least {target} Hz"
                ));
            }
        }
        check_noise(self.noise_sigma, self.dropout)
    }

    pub fn frame_count(&self) -> usize {
        (self.takes as f64 * self.duration_s * self.rate_hz + 1e-9).floor() as usize + 1
    }

    /// Gold tuple of the event.
    pub fn label(&self) -> LabelTuple {
        let (subject, object) = if self.actor {
            (Entity::Performer, Entity::O1)
        } else {
            (Entity::O1, Entity::None)
        };
        let locative = if self.preposition == Preposition::None {
            Entity::None
        } else {
            Entity::O2
        };
        LabelTuple {
            subject,
            verb: self.verb,
            object,
            preposition: self.preposition,
            locative,
        }
    }

    pub fn to_manifest(&self) -> String {
        format!(
            "verb = {}\npreposition = {}\nactor = {}\nmoved = {}\nreference = {}\ntakes = {}\nduration_s = {}\nrate_hz = {}\nnoise_sigma = {}\ndropout = {}\nseed = {}\n",
            self.verb,
            self.preposition,
            self.actor,
            self.moved,
            self.reference,
            self.takes,
            self.duration_s,
            self.rate_hz,
            self.noise_sigma,
            self.dropout,
            self.seed
        )
    }

    /// Reads a manifest; missing keys fall back to [`ScenarioSpec::new`].
    pub fn from_manifest(mut kv: KeyValues) -> Result<ScenarioSpec> {
        let verb: Verb = kv
            .take("verb")?
            .ok_or_else(|| Error::InvalidInput("scenario manifest needs `verb`".into()))?;
        let preposition = kv.take("preposition")?.unwrap_or(Preposition::None);
        let seed = kv.take("seed")?.unwrap_or(0);
        let mut spec = ScenarioSpec::new(verb, preposition, seed);
        if let Some(v) = kv.take("actor")? {
            spec.actor = v;
        }
        if let Some(v) = kv.take("moved")? {
            spec.moved = v;
        }
        if let Some(v) = kv.take("reference")? {
            spec.reference = v;
        }
        if let Some(v) = kv.take("takes")? {
            spec.takes = v;
        }
        if let Some(v) = kv.take("duration_s")? {
            spec.duration_s = v;
        }
        if let Some(v) = kv.take("rate_hz")? {
            spec.rate_hz = v;
        }
        if let Some(v) = kv.take("noise_sigma")? {
            spec.noise_sigma = v;
        }
        if let Some(v) = kv.take("dropout")? {
            spec.dropout = v;
        }
        kv.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

pub(crate) fn check_noise(sigma: f64, dropout: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return invalid(format!("noise sigma must be non-negative, got {sigma}"));
    }
    if !(0.0..0.5).contains(&dropout) {
        return invalid(format!("dropout must lie in [0, 0.5), got {dropout}"));
    }
    Ok(())
}
