use clap::{Args, ValueEnum};
use ndarray::Array2;
use qsrevent::labels::{LabelTuple, Slot};
use qsrevent::learn::gradcheck::{analytic_gradient, compare_gradient};
use qsrevent::learn::{rng_for, Classifier, Example, GradcheckConfig, Hyperparameters, ModelKind};
use qsrevent::pipeline::{FeatureKind, SEGMENT_FRAMES};
use rand::Rng;

use crate::{Outcome, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckedModel {
    Mlp,
    Lstm,
    /// Only the CRF pairwise tables of an MLP-CRF.
    Crf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, value_enum)]
    pub model: CheckedModel,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Negative control: perturb the analytic gradient before comparing.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

fn random_label(rng: &mut impl Rng) -> LabelTuple {
    let idx = Slot::ALL.map(|s| rng.gen_range(0..s.size()));
    LabelTuple::from_indices(idx).expect("indices drawn within vocabulary sizes")
}

/// A small random classifier with a few random examples to check it on.
fn fixture(model: CheckedModel, layers: usize, seed: u64) -> anyhow::Result<(Classifier, Vec<Example>)> {
    let (model_kind, kind, rows, cols) = match model {
        CheckedModel::Lstm => (ModelKind::Lstm, FeatureKind::Qual2D, SEGMENT_FRAMES, 7),
        CheckedModel::Mlp | CheckedModel::Crf => (ModelKind::Mlp, FeatureKind::EventQual2D, 1, 9),
    };
    let hp = Hyperparameters {
        layers,
        hidden: if model_kind == ModelKind::Lstm { 6 } else { 12 },
        projection: 5,
        seed,
        ..Default::default()
    };
    let mut clf = Classifier::new(model_kind, kind, cols, &hp)?;
    let mut rng = rng_for(seed, 4);
    for t in clf.tensors_mut() {
        t.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
    }
    let data = (0..4)
        .map(|_| Example {
            session_id: "gradcheck".into(),
            kind,
            features: Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0)),
            label: random_label(&mut rng),
        })
        .collect();
    Ok((clf, data))
}

pub fn run(args: GradcheckArgs, _settings: &Settings) -> anyhow::Result<Outcome> {
    if args.layers == 0 || args.samples == 0 {
        return crate::usage("--layers and --samples must be positive");
    }
    let (model, data) = fixture(args.model, args.layers, args.seed)?;
    let cfg = GradcheckConfig {
        samples: args.samples,
        tolerance: args.tolerance,
        seed: args.seed,
        tensor_prefix: (args.model == CheckedModel::Crf).then(|| "crf.".to_string()),
        ..Default::default()
    };
    let mut grad = analytic_gradient(&model, &data)?;
    if args.corrupt {
        for t in grad.tensors_mut() {
            t.mapv_inplace(|v| 1.5 * v + 0.01);
        }
    }
    let report = compare_gradient(&model, &data, &grad, &cfg)?;
    println!(
        "model: {:?}, layers {}, {} parameters",
        args.model,
        args.layers,
        model.parameter_count()
    );
    println!("sampled coordinates: {}", report.sampled);
    println!(
        "within {:e}: {} ({:.1}%, need {:.0}%)",
        report.tolerance,
        report.within_tolerance,
        100.0 * report.within_tolerance as f64 / report.sampled as f64,
        100.0 * cfg.required_fraction
    );
    println!("worst relative error: {:.3e}", report.worst_rel_error);
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(if report.passed {
        Outcome::Ok
    } else {
        Outcome::VerificationFailed
    })
}
