use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use qsrevent::labels::Slot;
use qsrevent::learn::{evaluate, Checkpoint, Classifier};

use crate::manifest::{sidecar, RunManifest};
use crate::{Outcome, Settings};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Session file or directory of session files.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Optional JSON file for the metrics.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict decoding to tuples that satisfy the label constraints.
    #[arg(long)]
    pub hard_constraints: bool,
}

pub fn run(args: EvalArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    let ckpt =
        Checkpoint::load(&args.model).with_context(|| format!("cannot load checkpoint {}", args.model.display()))?;
    let mut model: Classifier<f32> = ckpt.into_model()?;
    model.crf.hard_constraints |= args.hard_constraints;
    let kind = model.feature_kind;
    let data = super::train::examples(&args.input, kind, &settings.pipeline)?;
    let m = evaluate(&model, &data)?;

    println!("{} segments, features {}", m.count, kind);
    for slot in Slot::ALL {
        println!("  {:<12} {:>5.1}%", slot.name(), 100.0 * m.slot(slot));
    }
    println!("  {:<12} {:>5.1}%", "all slots", 100.0 * m.all_slot);

    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new(
            "eval",
            settings.effective_text(&model.hp),
            settings.effective_hash(&model.hp),
            model.hp.seed,
        );
        manifest.input(&args.model);
        manifest.input(&args.input);
        fs::write(out, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("cannot write {}", out.display()))?;
        manifest.output(out)?;
        manifest.lap("eval");
        manifest.write(&sidecar(out))?;
    }
    Ok(Outcome::Ok)
}
