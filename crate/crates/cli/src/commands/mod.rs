pub mod eval;
pub mod extract;
pub mod generate;
pub mod gradcheck;
pub mod plot;
pub mod train;
pub mod xval;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use qsrevent::pipeline::{FeatureKind, Session};

use crate::manifest::MANIFEST_NAME;

/// Session files under `path`: the file itself, or every `*.json` in the
/// directory except run manifests, in name order.
pub fn session_paths(path: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).with_context(|| format!("cannot open {}", path.display()))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("cannot list {}", path.display()))? {
        let p = entry?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if p.is_file() && name.ends_with(".json") && !name.ends_with(MANIFEST_NAME) {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        anyhow::bail!("no session files in {}", path.display());
    }
    Ok(out)
}

pub fn load_sessions(path: &Path) -> anyhow::Result<Vec<Session>> {
    session_paths(path)?
        .iter()
        .map(|p| Session::load(p).with_context(|| format!("cannot load session {}", p.display())))
        .collect()
}

/// `all` or a comma-separated list of kind names.
pub fn parse_kinds(spec: &str) -> anyhow::Result<Vec<FeatureKind>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(FeatureKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.parse::<FeatureKind>() {
            Ok(k) if !kinds.contains(&k) => kinds.push(k),
            Ok(_) => {}
            Err(_) => {
                return crate::usage(format!(
                    "unknown feature kind `{part}`; valid kinds: {}, all",
                    FeatureKind::valid_names()
                ))
            }
        }
    }
    if kinds.is_empty() {
        return crate::usage(format!(
            "no feature kind given; valid kinds: {}, all",
            FeatureKind::valid_names()
        ));
    }
    Ok(kinds)
}

/// Creates `dir`, refusing to reuse a non-empty one unless `force` is set.
pub fn output_dir(dir: &Path, force: bool) -> anyhow::Result<()> {
    if dir.exists() {
        if !dir.is_dir() {
            return crate::usage(format!("{} exists and is not a directory", dir.display()));
        }
        let occupied = fs::read_dir(dir)?.next().is_some();
        if occupied && !force {
            return crate::usage(format!("{} is not empty; pass --force to write into it", dir.display()));
        }
    }
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}
