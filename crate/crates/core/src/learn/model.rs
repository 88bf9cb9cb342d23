//! Emitter network plus tree CRF: the complete event classifier.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::crf::TreeCrf;
use super::lstm::{Lstm, LstmCache};
use super::mlp::{Mlp, MlpCache};
use super::{Hyperparameters, Real, Rng64};
use crate::error::{invalid, Error, Result};
use crate::labels::{LabelTuple, Slot};
use crate::pipeline::{FeatureKind, SEGMENT_FRAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Lstm,
}

impl ModelKind {
    /// Event-level features go to the MLP, frame sequences to the LSTM.
    pub fn for_features(kind: FeatureKind) -> ModelKind {
        if kind.is_event_level() {
            ModelKind::Mlp
        } else {
            ModelKind::Lstm
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Lstm => "lstm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" => Ok(ModelKind::Mlp),
            "lstm" => Ok(ModelKind::Lstm),
            other => invalid(format!("unknown model `{other}`; expected mlp or lstm")),
        }
    }
}

/// One labelled segment in a single feature representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub session_id: String,
    pub kind: FeatureKind,
    pub features: Array2<f64>,
    pub label: LabelTuple,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Emitter<F = f64> {
    Mlp(Mlp<F>),
    Lstm(Lstm<F>),
}

enum EmitterCache<F> {
    Mlp(MlpCache<F>),
    Lstm(LstmCache<F>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier<F = f64> {
    pub feature_kind: FeatureKind,
    pub hp: Hyperparameters,
    pub emitter: Emitter<F>,
    pub crf: TreeCrf<F>,
}

impl<F: Real> Classifier<F> {
    /// Zero-initialised classifier for features of `input_dim` columns.
    pub fn new(
        model: ModelKind,
        feature_kind: FeatureKind,
        input_dim: usize,
        hp: &Hyperparameters,
    ) -> Result<Classifier<F>> {
        hp.validate()?;
        let sizes = Slot::ALL.map(Slot::size);
        let emitter = match model {
            ModelKind::Mlp => {
                let mut widths = vec![input_dim];
                widths.extend(std::iter::repeat_n(hp.hidden, hp.layers));
                widths.push(Slot::total_size());
                Emitter::Mlp(Mlp::new(&widths, hp.keep_prob)?)
            }
            ModelKind::Lstm => Emitter::Lstm(Lstm::new(
                input_dim,
                hp.projection,
                hp.hidden,
                hp.layers,
                &sizes,
                SEGMENT_FRAMES,
                hp.keep_prob,
            )?),
        };
        Ok(Classifier {
            feature_kind,
            hp: *hp,
            emitter,
            crf: TreeCrf::for_labels(),
        })
    }

    pub fn model_kind(&self) -> ModelKind {
        match self.emitter {
            Emitter::Mlp(_) => ModelKind::Mlp,
            Emitter::Lstm(_) => ModelKind::Lstm,
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.emitter {
            Emitter::Mlp(m) => m.input_dim(),
            Emitter::Lstm(m) => m.input_dim(),
        }
    }

    /// Fills every parameter uniformly from [−0.1, 0.1].
    pub fn init_uniform(&mut self, rng: &mut Rng64) {
        for t in self.tensors_mut() {
            t.mapv_inplace(|_| F::of(rng.gen_range(-0.1..=0.1)));
        }
    }

    /// Same architecture with every parameter zero.
    pub fn zeros_like(&self) -> Classifier<F> {
        let mut out = self.clone();
        out.crf.mask = None;
        for t in out.tensors_mut() {
            t.fill(F::zero());
        }
        out
    }

    /// Named parameter tensors: emitter first, then the CRF tables.
    pub fn tensors(&self) -> Vec<(String, &Array2<F>)> {
        let mut out = match &self.emitter {
            Emitter::Mlp(m) => m.tensors(),
            Emitter::Lstm(m) => m.tensors(),
        };
        for (name, t) in super::crf::TABLE_NAMES.iter().zip(&self.crf.tables) {
            out.push((format!("crf.{name}"), t));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<F>> {
        let mut out = match &mut self.emitter {
            Emitter::Mlp(m) => m.tensors_mut(),
            Emitter::Lstm(m) => m.tensors_mut(),
        };
        out.extend(self.crf.tables.iter_mut());
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn check(&self, xs: &[&Example]) -> Result<()> {
        if let Some(e) = xs.iter().find(|e| e.kind != self.feature_kind) {
            return invalid(format!("model expects {} features, got {}", self.feature_kind, e.kind));
        }
        Ok(())
    }

    fn emit(&self, xs: &[&Example], rng: Option<&mut Rng64>) -> Result<(Array2<F>, EmitterCache<F>)> {
        self.check(xs)?;
        let inputs: Vec<Array2<F>> = xs.iter().map(|e| e.features.mapv(F::of)).collect();
        let views: Vec<ArrayView2<F>> = inputs.iter().map(|x| x.view()).collect();
        match &self.emitter {
            Emitter::Mlp(m) => {
                if let Some(e) = xs.iter().find(|e| e.features.nrows() != 1) {
                    return invalid(format!("MLP input must be a single row, got {}", e.features.nrows()));
                }
                let x = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::InvalidInput(e.to_string()))?;
                let (s, c) = m.forward_cached(x.view(), rng)?;
                Ok((s, EmitterCache::Mlp(c)))
            }
            Emitter::Lstm(m) => {
                let (s, c) = m.forward_cached(&views, rng)?;
                Ok((s, EmitterCache::Lstm(c)))
            }
        }
    }

    /// Per-slot scores in slot order, one row per example; deterministic
    /// (no dropout).
    pub fn scores(&self, xs: &[&Example]) -> Result<Array2<F>> {
        Ok(self.emit(xs, None)?.0)
    }

    /// Mean loss over `batch`; adds the gradient of that mean to `grad`.
    /// Dropout is active when `rng` is given.
    pub fn loss_and_grad(&self, batch: &[&Example], rng: Option<&mut Rng64>, grad: &mut Classifier<F>) -> Result<f64> {
        if batch.is_empty() {
            return invalid("empty batch");
        }
        let (scores, cache) = self.emit(batch, rng)?;
        let weight = 1.0 / batch.len() as f64;
        let mut d_scores = Array2::zeros(scores.dim());
        let mut total = 0.0;
        for (i, ex) in batch.iter().enumerate() {
            let row = scores.row(i);
            let mut d_row = d_scores.row_mut(i);
            total += self
                .crf
                .loss_and_grad(
                    row.as_slice().expect("standard layout"),
                    ex.label.indices(),
                    F::of(weight),
                    d_row.as_slice_mut().expect("standard layout"),
                    &mut grad.crf,
                )?
                .as_f64();
        }
        match (&self.emitter, cache, &mut grad.emitter) {
            (Emitter::Mlp(m), EmitterCache::Mlp(c), Emitter::Mlp(g)) => m.backward(&c, d_scores.view(), g),
            (Emitter::Lstm(m), EmitterCache::Lstm(c), Emitter::Lstm(g)) => m.backward(&c, d_scores.view(), g),
            _ => return invalid("gradient buffer does not match the model"),
        }
        Ok(total * weight)
    }

    /// Mean loss in evaluation mode.
    pub fn loss(&self, batch: &[&Example]) -> Result<f64> {
        let scores = self.scores(batch)?;
        let mut total = 0.0;
        for (i, ex) in batch.iter().enumerate() {
            let row = scores.row(i);
            total += self
                .crf
                .loss(row.as_slice().expect("standard layout"), ex.label.indices())?
                .as_f64();
        }
        Ok(total / batch.len() as f64)
    }

    pub fn predict(&self, xs: &[&Example]) -> Result<Vec<LabelTuple>> {
        let scores = self.scores(xs)?;
        scores
            .rows()
            .into_iter()
            .map(|r| Ok(self.crf.decode_labels(r.as_slice().expect("standard layout"))?.0))
            .collect()
    }
}
