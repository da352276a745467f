//! `key = value` run configuration. Blank lines and `#` comments are ignored.
//!
//! Recognised keys: `p`, `prec`, `order`, `seed`, `out`. Command-line flags
//! take precedence over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use padic_confluence::{Error, Result};

pub const OUT_ENV: &str = "PADIC_CONFLUENCE_OUT";

const KNOWN: [&str; 5] = ["p", "prec", "order", "seed", "out"];

#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    pub path: Option<PathBuf>,
    pub entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if !KNOWN.contains(&k) {
                return Err(Error::Parse(format!("config line {}: unknown key {k:?}", i + 1)));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(FileConfig { path: None, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Parse(format!("config: {key} = {v:?} is not a number"))),
        }
    }

    pub fn p(&self) -> Result<Option<u64>> {
        self.number("p")
    }

    pub fn prec(&self) -> Result<Option<i64>> {
        self.number("prec")
    }

    pub fn order(&self) -> Result<Option<usize>> {
        self.number("order")
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.number("seed")
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.entries.get("out").map(PathBuf::from)
    }
}

/// Flag, then config file, then the environment.
pub fn output_dir(flag: Option<&Path>, file: &FileConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| file.out())
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let cfg = FileConfig::parse("# run\np = 5\nprec=60  # digits\n\norder = 120\n").unwrap();
        assert_eq!(cfg.p().unwrap(), Some(5));
        assert_eq!(cfg.prec().unwrap(), Some(60));
        assert_eq!(cfg.order().unwrap(), Some(120));
        assert_eq!(cfg.seed().unwrap(), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(FileConfig::parse("p 5").is_err());
        assert!(FileConfig::parse("colour = red").is_err());
        assert!(FileConfig::parse("p = five").unwrap().p().is_err());
    }
}
