//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ordered key-value pairs with line numbers kept for error messages.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<KeyValues> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    origin: origin.into(),
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    origin: origin.into(),
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KeyValues {
            origin: origin.into(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<KeyValues> {
        KeyValues::parse(&fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.into(), (0, value.to_string()));
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Removes and parses `key`, returning `None` when absent.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e: T::Err| Error::Parse {
                origin: self.origin.clone(),
                line,
                message: format!("bad value `{v}` for `{key}`: {e}"),
            }),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fails if any key was left unconsumed.
    pub fn finish(&self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::Parse {
                origin: self.origin.clone(),
                line: *line,
                message: format!("unknown key `{k}`"),
            }),
        }
    }
}

/// Lowercase hex SHA-256 of `text`, truncated to 16 characters.
pub fn short_hash(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
