//! Vector geometry on tracked points: discrete derivatives, Frenet-Serret
//! frames, rotations, bounding boxes and PCA.

mod bounds;
mod frame;
mod pca;
mod rotation;
mod vector;

pub use bounds::{mbhr, Mbhr};
pub use frame::{acceleration, fs_frame, velocity, FsFrame, CURVATURE_EPSILON, SPEED_EPSILON};
pub use pca::{covariance, pca_fit, symmetric_eigen3, PcaModel};
pub use rotation::{decompose_ypr, frobenius_distance, recompose, rotation_between, EulerAngles, Rotation3};
pub use vector::{Point2, Point3, TimedPoint};
