//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

use crate::ConfigError;

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// Lines are `key = value`; `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::new("config", format!("line {}: expected `key = value`", no + 1)).into());
            };
            let key = k.trim().replace('-', "_");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::new(&key, format!("line {}: duplicate key", no + 1)).into());
            }
        }
        Ok(Self { values })
    }

    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::new(k, "unknown key for this command").into()),
            None => Ok(()),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick_opt(flag, key)?.unwrap_or(default))
    }

    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|e| parse_error(key, s, e)),
        }
    }

    /// Comma-separated list.
    pub fn pick_list<T>(&self, flag: Option<&str>, key: &str, default: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let text = flag.or(self.raw(key)).unwrap_or(default);
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| s.parse().map_err(|e| parse_error(key, s, e))).collect()
    }
}

fn parse_error(key: &str, value: &str, e: impl Display) -> anyhow::Error {
    let msg = e.to_string();
    let reason = if msg.contains(value) { msg } else { format!("`{value}`: {msg}") };
    ConfigError::new(key, reason).into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let s = Settings::parse("d = 12\n# comment\nseed=3 # trailing\nm = 10,20\n").unwrap();
        assert_eq!(s.pick(None, "d", 1usize).unwrap(), 12);
        assert_eq!(s.pick(Some(5usize), "d", 1).unwrap(), 5);
        assert_eq!(s.pick(None, "n", 7usize).unwrap(), 7);
        assert_eq!(s.pick_list::<usize>(None, "m", "1").unwrap(), vec![10, 20]);
        assert_eq!(s.pick_list::<usize>(Some("4"), "m", "1").unwrap(), vec![4]);
        assert!(s.reject_unknown(&["d", "seed", "m"]).is_ok());
        assert!(s.reject_unknown(&["d"]).is_err());
    }

    #[test]
    fn malformed_lines_are_config_errors() {
        for text in ["d 12", "d = 1\nd = 2"] {
            let e = Settings::parse(text).unwrap_err();
            assert!(e.downcast_ref::<ConfigError>().is_some());
        }
        let s = Settings::parse("d = ten").unwrap();
        let e = s.pick(None, "d", 1usize).unwrap_err();
        assert_eq!(e.downcast_ref::<ConfigError>().unwrap().field, "d");
    }
}
