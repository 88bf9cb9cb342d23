use std::fmt::Write;

use crate::config::{short_hash, KeyValues};
use crate::error::Result;
use crate::qsr::{QsrParams, SectorEdge};

/// Everything that shapes feature extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub qsr: QsrParams,
    /// Target frame rate after resampling (Hz).
    pub rate_hz: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            qsr: QsrParams::default(),
            rate_hz: 24.0,
        }
    }
}

impl PipelineConfig {
    /// Reads the pipeline keys out of `kv`, leaving other keys in place.
    pub fn from_kv(kv: &mut KeyValues) -> Result<PipelineConfig> {
        let d = PipelineConfig::default();
        let sector_edge = match kv.take::<String>("cardir_sector_edge")? {
            Some(s) => SectorEdge::parse(&s)?,
            None => d.qsr.sector_edge,
        };
        let cfg = PipelineConfig {
            qsr: QsrParams {
                theta: kv.take("theta")?.unwrap_or(d.qsr.theta),
                beta: kv.take("beta")?.unwrap_or(d.qsr.beta),
                v_min: kv.take("v_min")?.unwrap_or(d.qsr.v_min),
                eps_pos: kv.take("eps_pos")?.unwrap_or(d.qsr.eps_pos),
                argd_width: kv.take("argd_width")?.unwrap_or(d.qsr.argd_width),
                argd_bins: kv.take("argd_bins")?.unwrap_or(d.qsr.argd_bins),
                sector_edge,
            },
            rate_hz: kv.take("rate_hz")?.unwrap_or(d.rate_hz),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.qsr.validate()?;
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return crate::error::invalid(format!("rate_hz must be positive, got {}", self.rate_hz));
        }
        Ok(())
    }

    /// Canonical text form; parsing it back yields the same configuration.
    pub fn to_kv_string(&self) -> String {
        let q = &self.qsr;
        let mut s = String::new();
        writeln!(s, "theta = {}", q.theta).unwrap();
        writeln!(s, "beta = {}", q.beta).unwrap();
        writeln!(s, "v_min = {}", q.v_min).unwrap();
        writeln!(s, "eps_pos = {}", q.eps_pos).unwrap();
        writeln!(s, "argd_width = {}", q.argd_width).unwrap();
        writeln!(s, "argd_bins = {}", q.argd_bins).unwrap();
        writeln!(s, "cardir_sector_edge = {}", q.sector_edge.as_str()).unwrap();
        writeln!(s, "rate_hz = {}", self.rate_hz).unwrap();
        s
    }

    pub fn hash(&self) -> String {
        short_hash(&self.to_kv_string())
    }
}
