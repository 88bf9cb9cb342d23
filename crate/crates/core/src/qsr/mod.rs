//! Per-frame qualitative spatial relations between tracked points.

mod cardir;
mod motion;
mod params;
mod qtc;

pub use cardir::{cardir2d, cardir3d, AxisSide, CardinalDir2D, CardinalDir3D, SectorEdge};
pub use motion::{argd_bin, mos, mos_from_displacement, DistanceBin, MosState};
pub use params::QsrParams;
pub use qtc::{qtc_3d, qtc_c, qtc_radial_3d, AngleSign, Qtc3D, QtcC, QtcSign};
