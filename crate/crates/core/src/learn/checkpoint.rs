//! Versioned JSON snapshot of a trained classifier.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Classifier, Hyperparameters, ModelKind, Real};
use crate::error::{invalid, Result};
use crate::labels::Slot;
use crate::pipeline::FeatureKind;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub kind: ModelKind,
    pub feature_kind: String,
    pub input_dim: usize,
    pub hyperparameters: Hyperparameters,
    pub hard_constraints: bool,
    pub vocabularies: BTreeMap<String, Vec<String>>,
    pub weights: Vec<NamedTensor>,
}

fn vocabularies() -> BTreeMap<String, Vec<String>> {
    Slot::ALL
        .iter()
        .map(|s| {
            (
                s.name().to_string(),
                s.vocabulary().into_iter().map(String::from).collect(),
            )
        })
        .collect()
}

impl Checkpoint {
    pub fn from_model<F: Real>(model: &Classifier<F>) -> Checkpoint {
        Checkpoint {
            format_version: FORMAT_VERSION,
            kind: model.model_kind(),
            feature_kind: model.feature_kind.name().to_string(),
            input_dim: model.input_dim(),
            hyperparameters: model.hp,
            hard_constraints: model.crf.hard_constraints,
            vocabularies: vocabularies(),
            weights: model
                .tensors()
                .into_iter()
                .map(|(name, t)| NamedTensor {
                    name,
                    shape: [t.nrows(), t.ncols()],
                    data: t.iter().map(|v| v.as_f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn into_model<F: Real>(self) -> Result<Classifier<F>> {
        if self.format_version != FORMAT_VERSION {
            return invalid(format!(
                "checkpoint format {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.vocabularies != vocabularies() {
            return invalid("checkpoint vocabularies differ from this build's labels");
        }
        let feature_kind: FeatureKind = self.feature_kind.parse()?;
        let mut model = Classifier::<F>::new(self.kind, feature_kind, self.input_dim, &self.hyperparameters)?;
        model.crf.hard_constraints = self.hard_constraints;
        let names: Vec<String> = model.tensors().into_iter().map(|(n, _)| n).collect();
        if names.len() != self.weights.len() {
            return invalid(format!(
                "checkpoint has {} tensors, model expects {}",
                self.weights.len(),
                names.len()
            ));
        }
        for ((name, slot), w) in names.iter().zip(model.tensors_mut()).zip(self.weights) {
            if *name != w.name || [slot.nrows(), slot.ncols()] != w.shape {
                return invalid(format!(
                    "checkpoint tensor {} {:?} does not match {} {:?}",
                    w.name,
                    w.shape,
                    name,
                    slot.dim()
                ));
            }
            *slot = Array2::from_shape_vec((w.shape[0], w.shape[1]), w.data.into_iter().map(F::of).collect())
                .map_err(|e| crate::Error::InvalidInput(format!("tensor {}: {e}", w.name)))?;
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
