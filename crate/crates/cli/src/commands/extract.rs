use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use qsrevent::pipeline::{extract, prepare, write_feature_csv};

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::{Outcome, Settings};

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Feature kind, a comma-separated list, or `all`.
    #[arg(long)]
    pub kind: String,
    /// Session file or directory of session files.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: ExtractArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    let kinds = super::parse_kinds(&args.kind)?;
    let sessions = super::load_sessions(&args.input)?;
    super::output_dir(&args.out, args.force)?;
    let cfg = &settings.pipeline;
    let hash = cfg.hash();
    let mut manifest = RunManifest::new("extract", cfg.to_kv_string(), hash.clone(), settings.hp.seed);
    manifest.input(&args.input);

    let mut files = 0;
    for session in &sessions {
        let segments = prepare(session, cfg.rate_hz).with_context(|| format!("session {}", session.id))?;
        for seg in &segments {
            for &kind in &kinds {
                let m =
                    extract(kind, seg, cfg).with_context(|| format!("session {} segment {}", session.id, seg.index))?;
                let path = args
                    .out
                    .join(format!("{}_seg{:03}_{}.csv", session.id, seg.index, kind));
                let mut w =
                    BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
                write_feature_csv(&mut w, &m, &hash)?;
                w.flush()?;
                manifest.output(&path)?;
                files += 1;
            }
        }
    }
    manifest.lap("extract");
    manifest.write(&args.out.join(MANIFEST_NAME))?;
    println!(
        "wrote {files} feature files ({} kinds) for {} sessions to {}",
        kinds.len(),
        sessions.len(),
        args.out.display()
    );
    Ok(Outcome::Ok)
}
