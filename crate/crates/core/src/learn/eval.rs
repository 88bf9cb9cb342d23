use serde::{Deserialize, Serialize};

use super::{Classifier, Example, Real};
use crate::error::{invalid, Result};
use crate::labels::{LabelTuple, Slot};

/// Precision over a set of segments. `per_slot` follows [`Slot::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub all_slot: f64,
    pub per_slot: [f64; 5],
    pub count: usize,
}

impl Metrics {
    pub fn slot(&self, slot: Slot) -> f64 {
        self.per_slot[slot as usize]
    }
}

/// A prediction counts toward `all_slot` only when every slot matches.
pub fn score_predictions(predicted: &[LabelTuple], gold: &[LabelTuple]) -> Result<Metrics> {
    if predicted.len() != gold.len() {
        return invalid(format!(
            "{} predictions for {} gold labels",
            predicted.len(),
            gold.len()
        ));
    }
    if gold.is_empty() {
        return invalid("cannot score an empty set");
    }
    let n = gold.len() as f64;
    let all = predicted.iter().zip(gold).filter(|(p, g)| p == g).count() as f64;
    let per_slot = Slot::ALL.map(|s| {
        predicted
            .iter()
            .zip(gold)
            .filter(|(p, g)| p.index(s) == g.index(s))
            .count() as f64
            / n
    });
    Ok(Metrics {
        all_slot: all / n,
        per_slot,
        count: gold.len(),
    })
}

pub fn evaluate<F: Real>(model: &Classifier<F>, data: &[Example]) -> Result<Metrics> {
    if data.is_empty() {
        return invalid("evaluation set is empty");
    }
    let mut predicted = Vec::with_capacity(data.len());
    for chunk in data.chunks(64) {
        let refs: Vec<&Example> = chunk.iter().collect();
        predicted.extend(model.predict(&refs)?);
    }
    let gold: Vec<LabelTuple> = data.iter().map(|e| e.label).collect();
    score_predictions(&predicted, &gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{Entity, Preposition, Verb};

    fn tuple(v: Verb) -> LabelTuple {
        LabelTuple {
            subject: Entity::O1,
            verb: v,
            object: Entity::None,
            preposition: Preposition::Toward,
            locative: Entity::O2,
        }
    }

    #[test]
    fn perfect_predictor() {
        let g = vec![tuple(Verb::Push), tuple(Verb::Roll)];
        let m = score_predictions(&g, &g).unwrap();
        assert_eq!(m.all_slot, 1.0);
        assert_eq!(m.per_slot, [1.0; 5]);
    }

    #[test]
    fn three_of_five() {
        let g = vec![tuple(Verb::Push); 5];
        let mut p = g.clone();
        p[1].verb = Verb::Pull;
        p[3].subject = Entity::Performer;
        let m = score_predictions(&p, &g).unwrap();
        assert!((m.all_slot - 0.6).abs() < 1e-12);
        assert!((m.slot(Slot::Verb) - 0.8).abs() < 1e-12);
        assert!(m.per_slot.iter().all(|&s| s >= m.all_slot));
    }

    #[test]
    fn empty_rejected() {
        assert!(score_predictions(&[], &[]).is_err());
    }
}
