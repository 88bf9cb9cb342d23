//! Synthetic block-world sessions: a performer rig moving a cube or a
//! cylinder relative to a second, static object.

mod corpus;
mod corrupt;
mod generate;
mod scenario;

pub use corpus::{make_corpus, plan_corpus, CorpusMix, DEFAULT_CORPUS_SIZE};
pub use corrupt::corrupt;
pub use generate::{
    generate, generate_with_id, SyntheticSession, CONTACT_DISTANCE, CYLINDER_MARKER_RADIUS, OBJECT_SIZE,
};
pub use scenario::{ObjectKind, ScenarioSpec};
