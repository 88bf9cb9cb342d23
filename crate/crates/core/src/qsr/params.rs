use std::f64::consts::FRAC_PI_4;

use super::SectorEdge;
use crate::error::{invalid, Result};

/// Thresholds shared by all calculi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsrParams {
    /// QTC quantisation factor: a displacement counts as motion only above
    /// `theta · |kl|`.
    pub theta: f64,
    /// QTC angle quantisation factor (radians).
    pub beta: f64,
    /// Speed above which a point is moving (m/s).
    pub v_min: f64,
    /// Positions closer than this coincide (m).
    pub eps_pos: f64,
    /// Distance bin width (m).
    pub argd_width: f64,
    /// Number of distance bins; the last one absorbs everything beyond.
    pub argd_bins: usize,
    pub sector_edge: SectorEdge,
}

impl Default for QsrParams {
    fn default() -> Self {
        QsrParams {
            theta: 0.05,
            beta: std::f64::consts::PI / 36.0,
            v_min: 0.01,
            eps_pos: 1e-9,
            argd_width: 0.05,
            argd_bins: 40,
            sector_edge: SectorEdge::Counterclockwise,
        }
    }
}

impl QsrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return invalid(format!("theta must be finite and >= 0, got {}", self.theta));
        }
        if !(self.beta > 0.0 && self.beta < FRAC_PI_4) {
            return invalid(format!("beta must lie in (0, π/4), got {}", self.beta));
        }
        if !(self.v_min >= 0.0 && self.v_min.is_finite()) {
            return invalid(format!("v_min must be finite and >= 0, got {}", self.v_min));
        }
        if !(self.eps_pos > 0.0) {
            return invalid("eps_pos must be positive");
        }
        if !(self.argd_width > 0.0 && self.argd_width.is_finite()) {
            return invalid(format!("argd width must be positive, got {}", self.argd_width));
        }
        if self.argd_bins == 0 {
            return invalid("argd needs at least one bin");
        }
        Ok(())
    }
}
