//! Central finite-difference check of analytic gradients.

use rand::Rng;
use serde::Serialize;

use super::{rng_for, Classifier, Example};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckConfig {
    pub samples: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Fraction of coordinates that must be within tolerance.
    pub required_fraction: f64,
    pub seed: u64,
    /// Sample only tensors whose name starts with this prefix.
    pub tensor_prefix: Option<String>,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            samples: 200,
            step: 1e-5,
            tolerance: 1e-4,
            required_fraction: 0.95,
            seed: 0,
            tensor_prefix: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateCheck {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub sampled: usize,
    pub within_tolerance: usize,
    pub worst_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub coordinates: Vec<CoordinateCheck>,
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

/// Analytic gradient of the mean evaluation-mode loss over `data`.
pub fn analytic_gradient(model: &Classifier, data: &[Example]) -> Result<Classifier> {
    let refs: Vec<&Example> = data.iter().collect();
    let mut grad = model.zeros_like();
    model.loss_and_grad(&refs, None, &mut grad)?;
    Ok(grad)
}

/// Compares the analytic gradient of `model` with central differences.
pub fn gradcheck(model: &Classifier, data: &[Example], cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    let grad = analytic_gradient(model, data)?;
    compare_gradient(model, data, &grad, cfg)
}

/// Checks a supplied gradient against central differences on coordinates
/// sampled evenly across tensors.
pub fn compare_gradient(
    model: &Classifier,
    data: &[Example],
    grad: &Classifier,
    cfg: &GradcheckConfig,
) -> Result<GradcheckReport> {
    if data.is_empty() || cfg.samples == 0 {
        return invalid("gradient check needs data and at least one sample");
    }
    let refs: Vec<&Example> = data.iter().collect();
    let names: Vec<String> = model.tensors().iter().map(|(n, _)| n.clone()).collect();
    let sizes: Vec<usize> = model.tensors().iter().map(|(_, t)| t.len()).collect();
    let grads: Vec<Vec<f64>> = grad
        .tensors()
        .iter()
        .map(|(_, t)| t.iter().copied().collect())
        .collect();
    if grads.iter().map(Vec::len).ne(sizes.iter().copied()) {
        return invalid("gradient does not match the model's parameter shapes");
    }

    let eligible: Vec<usize> = (0..names.len())
        .filter(|&t| cfg.tensor_prefix.as_deref().is_none_or(|p| names[t].starts_with(p)))
        .collect();
    if eligible.is_empty() {
        return invalid(format!("no tensor matches prefix {:?}", cfg.tensor_prefix));
    }

    let mut rng = rng_for(cfg.seed, 0);
    let mut picks = Vec::with_capacity(cfg.samples);
    for k in 0..cfg.samples {
        let t = eligible[k % eligible.len()];
        picks.push((t, rng.gen_range(0..sizes[t])));
    }

    let mut probe = model.clone();
    let mut coordinates = Vec::with_capacity(picks.len());
    for (t, idx) in picks {
        let original = flat_get(&mut probe, t, idx);
        flat_set(&mut probe, t, idx, original + cfg.step);
        let plus = probe.loss(&refs)?;
        flat_set(&mut probe, t, idx, original - cfg.step);
        let minus = probe.loss(&refs)?;
        flat_set(&mut probe, t, idx, original);
        let numeric = (plus - minus) / (2.0 * cfg.step);
        let analytic = grads[t][idx];
        coordinates.push(CoordinateCheck {
            tensor: names[t].clone(),
            index: idx,
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric),
        });
    }
    let within = coordinates.iter().filter(|c| c.rel_error <= cfg.tolerance).count();
    let worst = coordinates.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(GradcheckReport {
        sampled: coordinates.len(),
        within_tolerance: within,
        worst_rel_error: worst,
        tolerance: cfg.tolerance,
        passed: within as f64 >= cfg.required_fraction * coordinates.len() as f64,
        coordinates,
    })
}

fn flat_get(model: &mut Classifier, t: usize, idx: usize) -> f64 {
    let tensors = model.tensors_mut();
    let cols = tensors[t].ncols();
    tensors[t][[idx / cols, idx % cols]]
}

fn flat_set(model: &mut Classifier, t: usize, idx: usize, v: f64) {
    let mut tensors = model.tensors_mut();
    let cols = tensors[t].ncols();
    tensors[t][[idx / cols, idx % cols]] = v;
}
