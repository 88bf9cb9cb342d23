use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use qsrevent::sim::{make_corpus, CorpusMix, DEFAULT_CORPUS_SIZE};

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::{Outcome, Settings};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of sessions (at least 5).
    #[arg(long, default_value_t = DEFAULT_CORPUS_SIZE)]
    pub n: usize,
    /// Master seed; defaults to the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write into a non-empty directory, replacing earlier sessions.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: GenerateArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    if args.n < 5 {
        return crate::usage(format!("--n must be at least 5, got {}", args.n));
    }
    let seed = args.seed.unwrap_or(settings.hp.seed);
    super::output_dir(&args.out, args.force)?;
    let scenario_dir = args.out.join("scenarios");
    if args.force {
        clear_previous(&args.out)?;
    }
    fs::create_dir_all(&scenario_dir)?;

    let mix = CorpusMix::default();
    let config = format!("n = {}\n{}", args.n, mix.to_kv_string());
    let mut manifest = RunManifest::new("generate", config.clone(), qsrevent::config::short_hash(&config), seed);
    let corpus = make_corpus(args.n, &mix, seed)?;
    manifest.lap("generate");
    for s in &corpus {
        let path = args.out.join(format!("{}.json", s.session.id));
        s.session
            .save(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        manifest.output(&path)?;
        let spec_path = scenario_dir.join(format!("{}.txt", s.session.id));
        fs::write(&spec_path, s.spec.to_manifest())?;
        manifest.output(&spec_path)?;
    }
    manifest.lap("write");
    manifest.write(&args.out.join(MANIFEST_NAME))?;
    println!("wrote {} sessions to {}", corpus.len(), args.out.display());
    Ok(Outcome::Ok)
}

/// Removes sessions and scenarios left by an earlier run.
fn clear_previous(out: &std::path::Path) -> anyhow::Result<()> {
    for entry in fs::read_dir(out)? {
        let p = entry?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if p.is_file() && name.starts_with("session_") && name.ends_with(".json") {
            fs::remove_file(&p)?;
        }
    }
    let scenarios = out.join("scenarios");
    if scenarios.is_dir() {
        fs::remove_dir_all(&scenarios)?;
    }
    Ok(())
}
