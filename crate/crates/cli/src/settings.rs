use std::path::{Path, PathBuf};

use anyhow::Context;
use qsrevent::config::{short_hash, KeyValues};
use qsrevent::learn::Hyperparameters;
use qsrevent::pipeline::PipelineConfig;

use crate::HpArgs;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "QSREVENT_CONFIG";

/// Effective configuration: defaults overlaid with the configuration file.
/// Commands overlay their own flags on top.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub hp: Hyperparameters,
    pub source: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Settings> {
        let Some(path) = path.filter(|p| !p.as_os_str().is_empty()) else {
            return Ok(Settings::default());
        };
        let mut kv = KeyValues::load(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let pipeline = PipelineConfig::from_kv(&mut kv)?;
        let hp = Hyperparameters::from_kv(&mut kv)?;
        kv.finish()?;
        Ok(Settings {
            pipeline,
            hp,
            source: Some(path.to_path_buf()),
        })
    }

    /// Hyperparameters with any flags given on the command line applied.
    pub fn hp_with(&self, flags: &HpArgs, seed: Option<u64>) -> anyhow::Result<Hyperparameters> {
        let mut hp = self.hp;
        if let Some(v) = flags.layers {
            hp.layers = v;
        }
        if let Some(v) = flags.hidden {
            hp.hidden = v;
        }
        if let Some(v) = flags.learning_rate {
            hp.learning_rate = v;
        }
        if let Some(v) = flags.keep_prob {
            hp.keep_prob = v;
        }
        if let Some(v) = flags.decay {
            hp.decay = v;
        }
        if flags.epochs.is_some() {
            hp.epochs = flags.epochs;
        }
        if let Some(v) = flags.batch_size {
            hp.batch_size = v;
        }
        if let Some(v) = flags.clip_norm {
            hp.clip_norm = v;
        }
        if let Some(s) = seed {
            hp.seed = s;
        }
        if let Err(e) = hp.validate() {
            return crate::usage(e.to_string());
        }
        Ok(hp)
    }

    /// Canonical text of the configuration actually used by a run.
    pub fn effective_text(&self, hp: &Hyperparameters) -> String {
        format!("{}{}", self.pipeline.to_kv_string(), hp.to_kv_string())
    }

    pub fn effective_hash(&self, hp: &Hyperparameters) -> String {
        short_hash(&self.effective_text(hp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        std::fs::write(&path, "learning_rate = 0.2\nhidden = 50\ntheta = 0.1\n").unwrap();
        let s = Settings::load(Some(&path)).unwrap();
        assert_eq!(s.pipeline.qsr.theta, 0.1);
        let flags = HpArgs {
            learning_rate: Some(0.5),
            ..Default::default()
        };
        let hp = s.hp_with(&flags, Some(9)).unwrap();
        assert_eq!(hp.learning_rate, 0.5);
        assert_eq!(hp.hidden, 50);
        assert_eq!(hp.decay, Hyperparameters::default().decay);
        assert_eq!(hp.seed, 9);
    }

    #[test]
    fn unknown_keys_and_missing_files_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        std::fs::write(&path, "colour = red\n").unwrap();
        assert!(Settings::load(Some(&path)).is_err());
        assert!(Settings::load(Some(&dir.path().join("missing.txt"))).is_err());
        assert!(Settings::load(None).unwrap().source.is_none());
    }
}
