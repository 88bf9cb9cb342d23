use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ModelKind;
use crate::config::KeyValues;
use crate::error::{invalid, Result};

/// Training and architecture settings. `keep_prob` is the dropout keep
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub layers: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub keep_prob: f64,
    pub decay: f64,
    /// `None` picks 200 for the LSTM and 500 for the MLP.
    pub epochs: Option<usize>,
    pub batch_size: usize,
    pub clip_norm: f64,
    /// Width of the LSTM input projection.
    pub projection: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            layers: 1,
            hidden: 200,
            learning_rate: 0.1,
            keep_prob: 0.8,
            decay: 0.96,
            epochs: None,
            batch_size: 16,
            clip_norm: 5.0,
            projection: 64,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub fn epochs_for(&self, model: ModelKind) -> usize {
        self.epochs.unwrap_or(match model {
            ModelKind::Lstm => 200,
            ModelKind::Mlp => 500,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 || self.batch_size == 0 || self.projection == 0 {
            return invalid("layers, hidden, batch_size and projection must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            ));
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return invalid(format!("keep_prob must be in (0, 1], got {}", self.keep_prob));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return invalid(format!("decay must be in (0, 1], got {}", self.decay));
        }
        if !(self.clip_norm > 0.0) {
            return invalid(format!("clip_norm must be positive, got {}", self.clip_norm));
        }
        Ok(())
    }

    /// Reads the training keys out of `kv`, leaving other keys in place.
    pub fn from_kv(kv: &mut KeyValues) -> Result<Hyperparameters> {
        let d = Hyperparameters::default();
        let hp = Hyperparameters {
            layers: kv.take("layers")?.unwrap_or(d.layers),
            hidden: kv.take("hidden")?.unwrap_or(d.hidden),
            learning_rate: kv.take("learning_rate")?.unwrap_or(d.learning_rate),
            keep_prob: kv.take("keep_prob")?.unwrap_or(d.keep_prob),
            decay: kv.take("decay")?.unwrap_or(d.decay),
            epochs: kv.take("epochs")?.or(d.epochs),
            batch_size: kv.take("batch_size")?.unwrap_or(d.batch_size),
            clip_norm: kv.take("clip_norm")?.unwrap_or(d.clip_norm),
            projection: kv.take("projection")?.unwrap_or(d.projection),
            seed: kv.take("seed")?.unwrap_or(d.seed),
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "layers = {}", self.layers);
        let _ = writeln!(s, "hidden = {}", self.hidden);
        let _ = writeln!(s, "learning_rate = {}", self.learning_rate);
        let _ = writeln!(s, "keep_prob = {}", self.keep_prob);
        let _ = writeln!(s, "decay = {}", self.decay);
        if let Some(e) = self.epochs {
            let _ = writeln!(s, "epochs = {e}");
        }
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "clip_norm = {}", self.clip_norm);
        let _ = writeln!(s, "projection = {}", self.projection);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

/// Values searched per hyperparameter; the grid is their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpGrid {
    pub layers: Vec<usize>,
    pub hidden: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub keep_prob: Vec<f64>,
    pub decay: Vec<f64>,
}

impl HpGrid {
    pub fn full() -> HpGrid {
        HpGrid {
            layers: vec![1, 2],
            hidden: vec![200, 400],
            learning_rate: vec![0.05, 0.1, 0.2, 0.5],
            keep_prob: vec![0.5, 0.6, 0.8],
            decay: vec![0.94, 0.95, 0.96],
        }
    }

    /// Learning rates {0.1, 0.5} at hidden size 200; everything else at
    /// its default.
    pub fn reduced() -> HpGrid {
        HpGrid::reduced_from(&Hyperparameters::default())
    }

    /// Like [`HpGrid::reduced`] with the unsearched fields taken from `base`.
    pub fn reduced_from(base: &Hyperparameters) -> HpGrid {
        HpGrid {
            hidden: vec![200],
            learning_rate: vec![0.1, 0.5],
            ..HpGrid::single(base)
        }
    }

    /// A grid holding only `hp`'s values.
    pub fn single(hp: &Hyperparameters) -> HpGrid {
        HpGrid {
            layers: vec![hp.layers],
            hidden: vec![hp.hidden],
            learning_rate: vec![hp.learning_rate],
            keep_prob: vec![hp.keep_prob],
            decay: vec![hp.decay],
        }
    }

    /// Parses `full`, `reduced`, or overrides on top of `base` such as
    /// `lr=0.1,0.5;hidden=200`.
    pub fn parse(spec: &str, base: &Hyperparameters) -> Result<HpGrid> {
        match spec.trim() {
            "full" => return Ok(HpGrid::full()),
            "reduced" => return Ok(HpGrid::reduced_from(base)),
            _ => {}
        }
        let mut grid = HpGrid::single(base);
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| crate::Error::InvalidInput(format!("grid entry `{part}` is not key=values")))?;
            let values: Vec<&str> = values.split(',').map(str::trim).collect();
            fn parse_all<T: std::str::FromStr>(key: &str, v: &[&str]) -> Result<Vec<T>> {
                v.iter()
                    .map(|s| {
                        s.parse()
                            .map_err(|_| crate::Error::InvalidInput(format!("bad value `{s}` for grid key `{key}`")))
                    })
                    .collect()
            }
            match key.trim() {
                "layers" => grid.layers = parse_all(key, &values)?,
                "hidden" => grid.hidden = parse_all(key, &values)?,
                "lr" | "learning_rate" => grid.learning_rate = parse_all(key, &values)?,
                "keep_prob" => grid.keep_prob = parse_all(key, &values)?,
                "decay" => grid.decay = parse_all(key, &values)?,
                other => {
                    return invalid(format!(
                        "unknown grid key `{other}`; expected layers, hidden, lr, keep_prob or decay"
                    ))
                }
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.layers.len() * self.hidden.len() * self.learning_rate.len() * self.keep_prob.len() * self.decay.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point, with the remaining fields copied from `base`.
    pub fn points(&self, base: &Hyperparameters) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.len());
        for &layers in &self.layers {
            for &hidden in &self.hidden {
                for &learning_rate in &self.learning_rate {
                    for &keep_prob in &self.keep_prob {
                        for &decay in &self.decay {
                            out.push(Hyperparameters {
                                layers,
                                hidden,
                                learning_rate,
                                keep_prob,
                                decay,
                                ..*base
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
