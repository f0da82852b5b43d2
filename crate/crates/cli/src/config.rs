//! `key = value` config files and the precedence rule
//! built-in default < PSIDENSITY_THREADS < config file < command-line flag.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Keys a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "set",
    "weight",
    "weights",
    "n",
    "window",
    "tol",
    "per_octave",
    "slack",
    "grid",
    "method",
    "normalization",
    "max_n",
    "rel_tail",
    "suite",
    "which",
    "x",
    "points",
    "threads",
    "format",
    "log_columns",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
    source: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in config file {}", path.display()))?;
        cfg.source = Some(path.display().to_string());
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got `{raw}`", i + 1);
            };
            let key = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{}`", i + 1, k.trim());
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values, source: None })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.resolve_with(key, flag, default, |s| {
            s.parse::<T>().map_err(|e| anyhow::anyhow!("{e}"))
        })
    }

    pub fn resolve_with<T>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => parse(s).with_context(|| {
                format!(
                    "invalid value `{s}` for `{key}` in {}",
                    self.source.as_deref().unwrap_or("config")
                )
            }),
            None => Ok(default),
        }
    }

    /// Like [`Config::resolve_with`] for values without a built-in default.
    pub fn require<T>(&self, key: &str, flag: Option<T>, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => parse(s).with_context(|| format!("invalid value `{s}` for `{key}`")),
            None => bail!("missing required `--{}`", key.replace('_', "-")),
        }
    }
}

/// Worker threads: flag, then config, then PSIDENSITY_THREADS, then the
/// machine's available parallelism.
pub fn threads(cfg: &Config, flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    let default = match env {
        Some(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .with_context(|| format!("PSIDENSITY_THREADS must be a positive integer, got `{v}`"))?,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let t = cfg.resolve("threads", flag, default)?;
    if t == 0 {
        bail!("threads must be >= 1");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let cfg = Config::parse("n = 2^10\n# comment\nwindow = 0.25  # trailing\n").unwrap();
        assert_eq!(cfg.resolve("window", None, 0.5).unwrap(), 0.25);
        assert_eq!(cfg.resolve("window", Some(0.75), 0.5).unwrap(), 0.75);
        assert_eq!(cfg.resolve("tol", None, 0.02).unwrap(), 0.02);
        assert_eq!(cfg.raw("n"), Some("2^10"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("just words").is_err());
        let cfg = Config::parse("tol = abc").unwrap();
        assert!(cfg.resolve("tol", None, 0.02f64).is_err());
    }

    #[test]
    fn thread_precedence() {
        let empty = Config::default();
        assert_eq!(threads(&empty, None, Some("3")).unwrap(), 3);
        let cfg = Config::parse("threads = 2").unwrap();
        assert_eq!(threads(&cfg, None, Some("3")).unwrap(), 2);
        assert_eq!(threads(&cfg, Some(5), Some("3")).unwrap(), 5);
        assert!(threads(&empty, None, Some("zero")).is_err());
    }
}
