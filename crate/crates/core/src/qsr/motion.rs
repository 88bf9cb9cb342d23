use crate::error::{invalid, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MosState {
    Moving,
    Static,
}

impl MosState {
    pub const ALL: [MosState; 2] = [MosState::Moving, MosState::Static];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            MosState::Moving => "m",
            MosState::Static => "s",
        }
    }
}

/// Moving iff the average speed over `dt` is strictly above `v_min`.
pub fn mos_from_displacement(displacement: f64, dt: f64, v_min: f64) -> Result<MosState> {
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    Ok(if displacement / dt > v_min {
        MosState::Moving
    } else {
        MosState::Static
    })
}

pub fn mos(prev: Point3, curr: Point3, dt: f64, v_min: f64) -> Result<MosState> {
    mos_from_displacement(curr.distance(prev), dt, v_min)
}

/// Equal-width distance bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBin {
    pub index: usize,
    pub width: f64,
}

/// `min(floor(d / w), bins − 1)`; bins are half-open `[k·w, (k+1)·w)`.
pub fn argd_bin(d: f64, width: f64, bins: usize) -> Result<DistanceBin> {
    if !(d >= 0.0) {
        return invalid(format!("distance must be non-negative, got {d}"));
    }
    if !(width > 0.0) || bins == 0 {
        return invalid("bin width must be positive and at least one bin is needed");
    }
    let raw = (d / width).floor();
    let index = if raw >= (bins - 1) as f64 {
        bins - 1
    } else {
        raw as usize
    };
    Ok(DistanceBin { index, width })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mos_examples() {
        let p = Point3::new(0.2, 0.3, 0.0);
        assert_eq!(mos(p, p, 1.0 / 24.0, 0.01).unwrap(), MosState::Static);
        let q = p + Point3::new(0.1, 0.0, 0.0);
        assert_eq!(mos(p, q, 1.0 / 24.0, 0.01).unwrap(), MosState::Moving);
        // Exactly at the threshold is static.
        assert_eq!(mos_from_displacement(0.5, 0.5, 1.0).unwrap(), MosState::Static);
        assert!(mos(p, q, 0.0, 0.01).is_err());
    }

    #[test]
    fn argd_examples() {
        assert_eq!(argd_bin(0.0, 0.05, 40).unwrap().index, 0);
        assert_eq!(argd_bin(0.07, 0.05, 40).unwrap().index, 1);
        assert_eq!(argd_bin(10.0, 0.05, 40).unwrap().index, 39);
        assert_eq!(argd_bin(f64::INFINITY, 0.05, 40).unwrap().index, 39);
        assert!(argd_bin(-0.01, 0.05, 40).is_err());
        assert!(argd_bin(f64::NAN, 0.05, 40).is_err());
    }
}
