use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use qsrevent::learn::{evaluate, train, Checkpoint, Dataset, Example, ModelKind};
use qsrevent::pipeline::{FeatureKind, PipelineConfig};

use crate::manifest::{sidecar, RunManifest};
use crate::{HpArgs, Outcome, Settings};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub kind: String,
    /// Session file or directory of session files.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Checkpoint path; the loss curve goes next to it as `<out>.train.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub hp: HpArgs,
}

/// All segments of the sessions under `input` as examples of one kind.
pub fn examples(input: &Path, kind: FeatureKind, cfg: &PipelineConfig) -> anyhow::Result<Vec<Example>> {
    let sessions = super::load_sessions(input)?;
    let data = Dataset::build(&sessions, &[kind], cfg)?;
    let out: Vec<Example> = data.examples[&kind].iter().flatten().cloned().collect();
    if out.is_empty() {
        anyhow::bail!(
            "sessions under {} are too short to give a single segment",
            input.display()
        );
    }
    Ok(out)
}

pub fn run(args: TrainArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    let kinds = super::parse_kinds(&args.kind)?;
    let [kind] = kinds[..] else {
        return crate::usage("train takes exactly one feature kind");
    };
    let hp = settings.hp_with(&args.hp, args.seed)?;
    let mut manifest = RunManifest::new(
        "train",
        settings.effective_text(&hp),
        settings.effective_hash(&hp),
        hp.seed,
    );
    manifest.input(&args.input);
    let data = examples(&args.input, kind, &settings.pipeline)?;
    manifest.lap("extract");

    let model_kind = ModelKind::for_features(kind);
    let (model, report) = train::<f32>(&data, &hp, model_kind)?;
    manifest.lap("train");
    let fit = evaluate(&model, &data)?;

    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Checkpoint::from_model(&model)
        .save(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    manifest.output(&args.out)?;
    let curve = args.out.with_file_name(format!(
        "{}.train.csv",
        args.out.file_name().unwrap_or_default().to_string_lossy()
    ));
    fs::write(&curve, report.to_csv())?;
    manifest.output(&curve)?;
    manifest.write(&sidecar(&args.out))?;

    println!(
        "trained {}-{} on {} segments for {} epochs; final loss {:.4}, training all-slot precision {:.1}%",
        kind,
        model_kind.name(),
        data.len(),
        report.epochs.len(),
        report.final_loss().unwrap_or(f64::NAN),
        100.0 * fit.all_slot
    );
    Ok(Outcome::Ok)
}
