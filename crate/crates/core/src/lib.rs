//! Recognising manipulation events from tracked 3D point trajectories using
//! qualitative spatial relations and a tree-structured CRF.

pub mod config;
pub mod error;
pub mod geometry;
pub mod labels;
pub mod learn;
pub mod pipeline;
pub mod qsr;
pub mod sim;

pub use error::{Error, Result};
