//! Session-level k-fold cross-validation with grid search, summarised in a
//! table of per-kind precision.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate, rng_for, train, Example, HpGrid, Hyperparameters, Metrics, ModelKind};
use crate::error::{invalid, Result};
use crate::labels::Slot;
use crate::pipeline::{extract, prepare, FeatureKind, PipelineConfig, Session};

/// Examples per feature kind, grouped by session.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub session_ids: Vec<String>,
    pub examples: BTreeMap<FeatureKind, Vec<Vec<Example>>>,
}

impl Dataset {
    /// Preprocesses every session and extracts each requested kind.
    pub fn build(sessions: &[Session], kinds: &[FeatureKind], cfg: &PipelineConfig) -> Result<Dataset> {
        let per_session: Vec<Vec<Vec<Example>>> = sessions
            .par_iter()
            .map(|s| {
                let segments = prepare(s, cfg.rate_hz)?;
                kinds
                    .iter()
                    .map(|&kind| {
                        segments
                            .iter()
                            .map(|seg| {
                                Ok(Example {
                                    session_id: s.id.clone(),
                                    kind,
                                    features: extract(kind, seg, cfg)?.values,
                                    label: seg.label,
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut examples = BTreeMap::new();
        for (k, &kind) in kinds.iter().enumerate() {
            examples.insert(kind, per_session.iter().map(|s| s[k].clone()).collect());
        }
        Ok(Dataset {
            session_ids: sessions.iter().map(|s| s.id.clone()).collect(),
            examples,
        })
    }
}

/// Fold index of each session: a seeded shuffle dealt round-robin, so fold
/// sizes differ by at most one.
pub fn assign_folds(n_sessions: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return invalid("cross-validation needs at least 2 folds");
    }
    if n_sessions < folds {
        return invalid(format!("{n_sessions} sessions cannot fill {folds} folds"));
    }
    let mut order: Vec<usize> = (0..n_sessions).collect();
    order.shuffle(&mut rng_for(seed, 0));
    let mut fold_of = vec![0; n_sessions];
    for (pos, &s) in order.iter().enumerate() {
        fold_of[s] = pos % folds;
    }
    Ok(fold_of)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one training job; independent of scheduling order.
pub fn job_seed(master: u64, kind: FeatureKind, fold: usize) -> u64 {
    let k = FeatureKind::ALL.iter().position(|&x| x == kind).unwrap_or(0) as u64;
    mix(mix(mix(master) ^ k) ^ fold as u64)
}

#[derive(Debug, Clone)]
pub struct XvalConfig {
    pub kinds: Vec<FeatureKind>,
    pub grid: HpGrid,
    /// Fields not covered by the grid (epochs, batch size, clip norm, ...).
    pub base: Hyperparameters,
    pub folds: usize,
    pub seed: u64,
}

impl XvalConfig {
    pub fn new(kinds: Vec<FeatureKind>, grid: HpGrid, seed: u64) -> XvalConfig {
        XvalConfig {
            kinds,
            grid,
            base: Hyperparameters::default(),
            folds: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScore {
    pub hp: Hyperparameters,
    pub mean_all_slot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindReport {
    pub kind: FeatureKind,
    pub model: ModelKind,
    /// Grid point with the highest mean all-slot precision.
    pub best: Hyperparameters,
    pub folds: Vec<Metrics>,
    pub mean: f64,
    pub sd: f64,
    pub per_slot_mean: [f64; 5],
    pub grid: Vec<GridScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XvalReport {
    pub seed: u64,
    /// Session ids of each test fold.
    pub folds: Vec<Vec<String>>,
    pub rows: Vec<KindReport>,
}

impl Serialize for FeatureKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// One finished (kind, grid point, fold) job.
#[derive(Debug, Clone, Copy)]
pub struct JobDone {
    pub kind: FeatureKind,
    pub grid_index: usize,
    pub fold: usize,
    pub all_slot: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn cross_validate(data: &Dataset, cfg: &XvalConfig) -> Result<XvalReport> {
    cross_validate_with(data, cfg, &|_| {})
}

/// Trains every (kind, grid point, fold) job, possibly in parallel, and
/// keeps each kind's best grid point by mean test-fold precision.
pub fn cross_validate_with(data: &Dataset, cfg: &XvalConfig, on_job: &(dyn Fn(JobDone) + Sync)) -> Result<XvalReport> {
    let n = data.session_ids.len();
    if n < 5 {
        return invalid(format!("cross-validation needs at least 5 sessions, got {n}"));
    }
    if cfg.grid.is_empty() || cfg.kinds.is_empty() {
        return invalid("nothing to cross-validate: empty grid or kind list");
    }
    let fold_of = assign_folds(n, cfg.folds, cfg.seed)?;
    let points = cfg.grid.points(&cfg.base);
    for kind in &cfg.kinds {
        if !data.examples.contains_key(kind) {
            return invalid(format!("dataset has no {kind} features"));
        }
    }

    let jobs: Vec<(FeatureKind, usize, usize)> = cfg
        .kinds
        .iter()
        .flat_map(|&k| (0..points.len()).flat_map(move |g| (0..cfg.folds).map(move |f| (k, g, f))))
        .collect();
    let results: Vec<Metrics> = jobs
        .par_iter()
        .map(|&(kind, g, fold)| {
            let per_session = &data.examples[&kind];
            let mut train_set = Vec::new();
            let mut test_set = Vec::new();
            for (s, ex) in per_session.iter().enumerate() {
                if fold_of[s] == fold {
                    test_set.extend(ex.iter().cloned());
                } else {
                    train_set.extend(ex.iter().cloned());
                }
            }
            if train_set.is_empty() || test_set.is_empty() {
                return invalid(format!("fold {fold} of {kind} has no segments on one side"));
            }
            let hp = Hyperparameters {
                seed: job_seed(cfg.seed, kind, fold),
                ..points[g]
            };
            let (model, _) = train::<f32>(&train_set, &hp, ModelKind::for_features(kind))?;
            let m = evaluate(&model, &test_set)?;
            on_job(JobDone {
                kind,
                grid_index: g,
                fold,
                all_slot: m.all_slot,
            });
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let per_kind = points.len() * cfg.folds;
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        let block = &results[ki * per_kind..(ki + 1) * per_kind];
        let grid: Vec<GridScore> = points
            .iter()
            .enumerate()
            .map(|(g, hp)| {
                let fold_scores: Vec<f64> = block[g * cfg.folds..(g + 1) * cfg.folds]
                    .iter()
                    .map(|m| m.all_slot)
                    .collect();
                GridScore {
                    hp: *hp,
                    mean_all_slot: mean_sd(&fold_scores).0,
                }
            })
            .collect();
        let mut best = 0;
        for (g, s) in grid.iter().enumerate() {
            if s.mean_all_slot > grid[best].mean_all_slot {
                best = g;
            }
        }
        let folds = block[best * cfg.folds..(best + 1) * cfg.folds].to_vec();
        let (mean, sd) = mean_sd(&folds.iter().map(|m| m.all_slot).collect::<Vec<_>>());
        let per_slot_mean =
            std::array::from_fn(|s| folds.iter().map(|m| m.per_slot[s]).sum::<f64>() / folds.len() as f64);
        rows.push(KindReport {
            kind,
            model: ModelKind::for_features(kind),
            best: points[best],
            folds,
            mean,
            sd,
            per_slot_mean,
            grid,
        });
    }
    let folds = (0..cfg.folds)
        .map(|f| {
            (0..n)
                .filter(|&s| fold_of[s] == f)
                .map(|s| data.session_ids[s].clone())
                .collect()
        })
        .collect();
    Ok(XvalReport {
        seed: cfg.seed,
        folds,
        rows,
    })
}

impl XvalReport {
    pub fn row(&self, kind: FeatureKind) -> Option<&KindReport> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    /// Row with the highest mean precision (first on ties).
    pub fn best_row(&self) -> Option<&KindReport> {
        self.rows.iter().fold(None, |b: Option<&KindReport>, r| match b {
            Some(b) if b.mean >= r.mean => Some(b),
            _ => Some(r),
        })
    }

    /// Precision table as CSV, one row per kind.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,model,mean,sd,learning_rate,hidden,layers,keep_prob,decay");
        for slot in Slot::ALL {
            let _ = write!(s, ",{}", slot.name());
        }
        let k = self.folds.len();
        for f in 0..k {
            let _ = write!(s, ",fold{}", f + 1);
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(
                s,
                "{},{},{:.6},{:.6},{},{},{},{},{}",
                r.kind,
                r.model,
                r.mean,
                r.sd,
                r.best.learning_rate,
                r.best.hidden,
                r.best.layers,
                r.best.keep_prob,
                r.best.decay
            );
            for v in r.per_slot_mean {
                let _ = write!(s, ",{v:.6}");
            }
            for m in &r.folds {
                let _ = write!(s, ",{:.6}", m.all_slot);
            }
            s.push('\n');
        }
        s
    }

    /// Console rendering: mean ± sd per kind, then the per-slot breakdown
    /// of the best kind.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:<6} {:>18}  {:>6}",
            "features", "model", "all-slot precision", "lr"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:<6} {:>9.1}% ± {:>4.1}%  {:>6}",
                r.kind.name(),
                r.model.name(),
                100.0 * r.mean,
                100.0 * r.sd,
                r.best.learning_rate
            );
        }
        if let Some(best) = self.best_row() {
            let _ = writeln!(s, "\nper-slot precision for {}:", best.kind);
            for (slot, v) in Slot::ALL.iter().zip(best.per_slot_mean) {
                let _ = writeln!(s, "  {:<12} {:>5.1}%", slot.name(), 100.0 * v);
            }
            let _ = writeln!(s, "  {:<12} {:>5.1}%", "all slots", 100.0 * best.mean);
        }
        s
    }

    /// Per-slot breakdown of the best kind as CSV.
    pub fn per_slot_csv(&self) -> String {
        let mut s = String::from("kind,slot,precision\n");
        if let Some(best) = self.best_row() {
            for (slot, v) in Slot::ALL.iter().zip(best.per_slot_mean) {
                let _ = writeln!(s, "{},{},{v:.6}", best.kind, slot.name());
            }
            let _ = writeln!(s, "{},all,{:.6}", best.kind, best.mean);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_sessions_give_folds_of_six() {
        let f = assign_folds(30, 5, 11).unwrap();
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 6);
        }
        assert_eq!(f, assign_folds(30, 5, 11).unwrap());
        assert_ne!(f, assign_folds(30, 5, 12).unwrap());
    }

    #[test]
    fn uneven_folds_differ_by_one() {
        let f = assign_folds(32, 5, 1).unwrap();
        let sizes: Vec<usize> = (0..5).map(|k| f.iter().filter(|&&x| x == k).count()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(assign_folds(4, 5, 1).is_err());
    }
}
