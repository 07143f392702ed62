//! `key = value` run configuration.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, found {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    Duplicate(String),
    #[error("config key `{key}`: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// Ordered key/value pairs as read from a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pairs: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: i + 1, text: raw.to_string() });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(ConfigError::Malformed { line: i + 1, text: raw.to_string() });
            }
            if pairs.iter().any(|(key, _)| key == k) {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(Self { pairs })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        match self.pairs.iter_mut().find(|(k, _)| k == key) {
            Some(p) => p.1 = value.to_string(),
            None => self.pairs.push((key.to_string(), value.to_string())),
        }
    }

    /// First key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() }),
        }
    }

    /// Comma-separated list.
    pub fn get_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() }),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

/// Canonical form of a config text: comments and blank lines dropped,
/// whitespace around keys and values trimmed, one `key=value` per line.
pub fn normalize(text: &str) -> String {
    let mut out = String::new();
    for raw in text.lines() {
        let line = strip_comment(raw).trim();
        if let Some((k, v)) = line.split_once('=') {
            let _ = writeln!(out, "{}={}", k.trim(), v.trim());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_rejects() {
        let c = Config::parse("# header\nn = 3\n\ntheta=1.5 # trailing\n").unwrap();
        assert_eq!(c.serialize(), "n=3\ntheta=1.5\n");
        assert_eq!(c.get("n", 0u32).unwrap(), 3);
        assert_eq!(c.get("p", 3.0).unwrap(), 3.0);
        assert!(matches!(Config::parse("n 3"), Err(ConfigError::Malformed { line: 1, .. })));
        assert!(matches!(Config::parse("n=3\nn=4"), Err(ConfigError::Duplicate(_))));
        assert_eq!(c.check_keys(&["n"]), Err(ConfigError::UnknownKey("theta".into())));
        let c = Config::parse("a = 0.5, 1,2").unwrap();
        assert_eq!(c.get_list("a", &[]).unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(Config::parse("n=x").unwrap().get("n", 0u32).is_err());
    }

    fn key() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,8}"
    }

    fn value() -> impl Strategy<Value = String> {
        "[-0-9a-z.,]{0,10}"
    }

    proptest! {
        #[test]
        fn round_trip(
            entries in prop::collection::btree_map(key(), (value(), " {0,2}", " {0,2}", prop::option::of("#[ a-z]{0,6}")), 0..8),
            blanks in prop::collection::vec(prop::bool::ANY, 0..8),
        ) {
            let mut text = String::new();
            for (i, (k, (v, pad1, pad2, comment))) in entries.iter().enumerate() {
                if blanks.get(i).copied().unwrap_or(false) {
                    text.push_str("\n# note\n");
                }
                text.push_str(&format!("{pad1}{k}{pad2}={pad1}{v}{pad2}{}\n", comment.as_deref().unwrap_or("")));
            }
            let parsed = Config::parse(&text).unwrap();
            prop_assert_eq!(parsed.serialize(), normalize(&text));
            prop_assert_eq!(Config::parse(&parsed.serialize()).unwrap(), parsed);
        }
    }
}
