//! From raw tracked sessions to per-segment feature matrices.

mod config;
mod factor;
mod features;
mod output;
mod preprocess;
mod session;

pub use config::PipelineConfig;
pub use factor::{factor_models, Anchor, AnchorResolver, FactorKind, FactorModel};
pub use features::{embed_factor, extract, summarise_event, Column, FeatureKind, FeatureMatrix};
pub use output::write_feature_csv;
pub use preprocess::{interpolate_gaps, prepare, resample, slice, Segment, SEGMENT_FRAMES};
pub use session::{
    EntitySchema, Frame, Schema, Session, Span, CORNERS, HAND_TIP_LEFT, HAND_TIP_RIGHT, OBJECTS, PERFORMER,
    SHOULDER_LEFT, SHOULDER_RIGHT,
};
