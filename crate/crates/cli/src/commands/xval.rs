use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use qsrevent::learn::{cross_validate_with, Dataset, HpGrid, JobDone, XvalConfig};
use qsrevent::pipeline::Session;
use qsrevent::sim::{make_corpus, CorpusMix, DEFAULT_CORPUS_SIZE};

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::{HpArgs, Outcome, Settings};

#[derive(Debug, Args)]
pub struct XvalArgs {
    /// Feature kinds to compare, comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    pub kinds: String,
    /// `reduced`, `full`, or overrides such as `lr=0.1,0.5;hidden=200`.
    /// Grid values take precedence over the matching training flags.
    #[arg(long, default_value = "reduced")]
    pub grid: String,
    /// Master seed for folds, corpus and training jobs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Session directory; without it a synthetic corpus is generated from the seed.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Size of the generated corpus when `--in` is absent.
    #[arg(long, default_value_t = DEFAULT_CORPUS_SIZE)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Directory for report.csv, per_slot.csv, report.json and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
    /// Suppress per-job progress on stderr.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub hp: HpArgs,
}

pub fn run(args: XvalArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    let kinds = super::parse_kinds(&args.kinds)?;
    let base = settings.hp_with(&args.hp, args.seed)?;
    let seed = base.seed;
    let grid = match HpGrid::parse(&args.grid, &base) {
        Ok(g) if !g.is_empty() => g,
        Ok(_) => return crate::usage("the grid is empty"),
        Err(e) => return crate::usage(e.to_string()),
    };
    if args.folds < 2 {
        return crate::usage("--folds must be at least 2");
    }
    if let Some(out) = &args.out {
        super::output_dir(out, args.force)?;
    }

    let config = format!(
        "{}grid = {}\nkinds = {}\nfolds = {}\n",
        settings.effective_text(&base),
        args.grid,
        kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(","),
        args.folds
    );
    let mut manifest = RunManifest::new("xval", config.clone(), qsrevent::config::short_hash(&config), seed);
    let sessions: Vec<Session> = match &args.input {
        Some(dir) => {
            manifest.input(dir);
            super::load_sessions(dir)?
        }
        None => {
            if args.n < 5 {
                return crate::usage(format!("--n must be at least 5, got {}", args.n));
            }
            manifest
                .inputs
                .push(format!("generated: n = {}, seed = {seed}", args.n));
            make_corpus(args.n, &CorpusMix::default(), seed)?
                .into_iter()
                .map(|s| s.session)
                .collect()
        }
    };
    let data = Dataset::build(&sessions, &kinds, &settings.pipeline)?;
    manifest.lap("extract");

    let mut cfg = XvalConfig::new(kinds, grid, seed);
    cfg.base = base;
    cfg.folds = args.folds;
    let jobs = cfg.kinds.len() * cfg.grid.len() * cfg.folds;
    let start = Instant::now();
    let quiet = args.quiet;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let progress = |j: JobDone| {
        let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        if !quiet {
            eprintln!(
                "[{k}/{jobs}] {} grid {} fold {}: {:.1}% ({:.0} s)",
                j.kind,
                j.grid_index,
                j.fold + 1,
                100.0 * j.all_slot,
                start.elapsed().as_secs_f64()
            );
        }
    };
    let report = cross_validate_with(&data, &cfg, &progress)?;
    manifest.lap("cross-validate");

    print!("{}", report.render());
    if let Some(out) = &args.out {
        for (name, text) in [
            ("report.csv", report.to_csv()),
            ("per_slot.csv", report.per_slot_csv()),
            ("report.json", serde_json::to_string_pretty(&report)? + "\n"),
        ] {
            let path = out.join(name);
            fs::write(&path, text)?;
            manifest.output(&path)?;
        }
        manifest.write(&out.join(MANIFEST_NAME))?;
    }
    Ok(Outcome::Ok)
}
