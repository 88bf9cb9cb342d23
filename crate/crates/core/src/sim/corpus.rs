use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::{generate_with_id, SyntheticSession};
use super::scenario::{segment_seconds, ObjectKind, ScenarioSpec};
use crate::error::{invalid, Result};
use crate::labels::{Preposition, Verb};

pub const DEFAULT_CORPUS_SIZE: usize = 30;

/// Which events a corpus draws from and how they are captured.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMix {
    pub verbs: Vec<Verb>,
    pub prepositions: Vec<Preposition>,
    /// Native capture rates, assigned round-robin.
    pub rates_hz: Vec<f64>,
    pub takes: usize,
    /// Length of each take.
    pub duration_s: f64,
    pub noise_sigma: f64,
    pub dropout: f64,
}

impl Default for CorpusMix {
    fn default() -> Self {
        CorpusMix {
            verbs: vec![Verb::Push, Verb::Pull, Verb::Slide, Verb::Roll],
            prepositions: vec![
                Preposition::Toward,
                Preposition::AwayFrom,
                Preposition::Past,
                Preposition::None,
            ],
            rates_hz: vec![30.0, 24.0, 48.0],
            takes: 3,
            duration_s: segment_seconds(),
            noise_sigma: 0.005,
            dropout: 0.05,
        }
    }
}

impl CorpusMix {
    /// Canonical `key = value` text, for manifests and hashing.
    pub fn to_kv_string(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        format!(
            "verbs = {}\nprepositions = {}\nrates_hz = {}\ntakes = {}\nduration_s = {}\nnoise_sigma = {}\ndropout = {}\n",
            join(self.verbs.iter().map(|v| v.to_string()).collect()),
            join(self.prepositions.iter().map(|p| p.to_string()).collect()),
            join(self.rates_hz.iter().map(|r| r.to_string()).collect()),
            self.takes,
            self.duration_s,
            self.noise_sigma,
            self.dropout
        )
    }
}

/// Scenario list for `n` sessions. Verb-preposition pairs cycle through the
/// full cross product so every verb occurs `n / verbs` times up to one.
pub fn plan_corpus(n: usize, mix: &CorpusMix, seed: u64) -> Result<Vec<ScenarioSpec>> {
    if n < 5 {
        return invalid(format!("a corpus needs at least 5 sessions, got {n}"));
    }
    if mix.verbs.is_empty() || mix.prepositions.is_empty() || mix.rates_hz.is_empty() {
        return invalid("corpus mix needs at least one verb, preposition and rate");
    }
    if mix.verbs.contains(&Verb::None) {
        return invalid("corpus verbs cannot include None");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = mix.verbs.len();
    let mut specs: Vec<ScenarioSpec> = (0..n)
        .map(|i| {
            let verb = mix.verbs[i % nv];
            let preposition = mix.prepositions[(i / nv) % mix.prepositions.len()];
            let mut spec = ScenarioSpec::new(verb, preposition, rng.gen());
            spec.actor = matches!(verb, Verb::Push | Verb::Pull) || rng.gen_bool(0.5);
            spec.moved = match verb {
                Verb::Roll => ObjectKind::Cylinder,
                Verb::Slide => ObjectKind::Cube,
                _ if rng.gen_bool(0.5) => ObjectKind::Cylinder,
                _ => ObjectKind::Cube,
            };
            spec.reference = if rng.gen_bool(0.5) {
                ObjectKind::Cylinder
            } else {
                ObjectKind::Cube
            };
            spec.takes = mix.takes;
            spec.duration_s = mix.duration_s;
            spec.rate_hz = mix.rates_hz[i % mix.rates_hz.len()];
            spec.noise_sigma = mix.noise_sigma;
            spec.dropout = mix.dropout;
            spec
        })
        .collect();
    specs.shuffle(&mut rng);
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// Generates a corpus of `n` sessions named `session_000`, `session_001`, ...
pub fn make_corpus(n: usize, mix: &CorpusMix, seed: u64) -> Result<Vec<SyntheticSession>> {
    plan_corpus(n, mix, seed)?
        .iter()
        .enumerate()
        .map(|(i, spec)| generate_with_id(spec, &format!("session_{i:03}")))
        .collect()
}
