use std::fmt::Write;

use rand::seq::SliceRandom;

use super::{rng_for, Classifier, Example, Hyperparameters, ModelKind, Real};
use crate::error::{invalid, Result};

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_DROPOUT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Mean global gradient norm over the epoch's batches, before clipping.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,mean_loss,grad_norm\n");
        for e in &self.epochs {
            let _ = writeln!(s, "{},{},{}", e.epoch, e.mean_loss, e.grad_norm);
        }
        s
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mean_loss)
    }
}

fn check_dataset(data: &[Example]) -> Result<()> {
    let Some(first) = data.first() else {
        return invalid("training set is empty");
    };
    if let Some(e) = data.iter().find(|e| e.kind != first.kind) {
        return invalid(format!("training set mixes {} and {} features", first.kind, e.kind));
    }
    if let Some(e) = data.iter().find(|e| e.features.dim() != first.features.dim()) {
        return invalid(format!(
            "training examples differ in shape: {:?} vs {:?}",
            first.features.dim(),
            e.features.dim()
        ));
    }
    Ok(())
}

/// Builds a classifier for `data`, initialises it from `hp.seed` and trains it.
pub fn train<F: Real>(
    data: &[Example],
    hp: &Hyperparameters,
    model: ModelKind,
) -> Result<(Classifier<F>, TrainReport)> {
    check_dataset(data)?;
    let first = &data[0];
    let mut clf = Classifier::new(model, first.kind, first.features.ncols(), hp)?;
    clf.init_uniform(&mut rng_for(hp.seed, STREAM_INIT));
    let report = train_model(&mut clf, data)?;
    Ok((clf, report))
}

/// Mini-batch SGD on an existing classifier using its own hyperparameters:
/// seeded shuffling, dropout, global-norm clipping, and learning rate
/// `lr · decay^epoch`.
pub fn train_model<F: Real>(clf: &mut Classifier<F>, data: &[Example]) -> Result<TrainReport> {
    check_dataset(data)?;
    let hp = clf.hp;
    let epochs = hp.epochs_for(clf.model_kind());
    let mut shuffle_rng = rng_for(hp.seed, STREAM_SHUFFLE);
    let mut dropout_rng = rng_for(hp.seed, STREAM_DROPOUT);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = clf.zeros_like();
    let mut report = TrainReport::default();
    for epoch in 0..epochs {
        let lr = hp.learning_rate * hp.decay.powi(epoch as i32);
        order.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut norm_sum, mut batches) = (0.0, 0.0, 0);
        for chunk in order.chunks(hp.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &data[i]).collect();
            for t in grad.tensors_mut() {
                t.fill(F::zero());
            }
            let loss = clf.loss_and_grad(&batch, Some(&mut dropout_rng), &mut grad)?;
            let norm = global_norm(&grad);
            let scale = if norm > hp.clip_norm { hp.clip_norm / norm } else { 1.0 };
            if lr != 0.0 {
                for (p, g) in clf.tensors_mut().into_iter().zip(grad.tensors()) {
                    p.scaled_add(F::of(-lr * scale), g.1);
                }
            }
            loss_sum += loss * batch.len() as f64;
            norm_sum += norm;
            batches += 1;
        }
        report.epochs.push(EpochRecord {
            epoch,
            mean_loss: loss_sum / data.len() as f64,
            grad_norm: norm_sum / batches as f64,
        });
    }
    Ok(report)
}

pub fn global_norm<F: Real>(model: &Classifier<F>) -> f64 {
    model
        .tensors()
        .iter()
        .map(|(_, t)| t.iter().map(|v| v.as_f64().powi(2)).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}
