//! `key = value` configuration files.
//!
//! Blank lines and `#` comments are skipped. Keys are case-sensitive and
//! may appear once; later duplicates are an error.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::str::FromStr;

/// Parsed key/value pairs, kept in key order for stable echoing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {k}", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Typed lookup; a missing key yields `None`.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| v.parse().map_err(|_| Error::Parse(format!("{key}: cannot parse {v:?}")))).transpose()
    }

    /// Fail on the first key not in `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Parse(format!("unknown key {k:?}"))),
            None => Ok(()),
        }
    }

    /// Later entries win.
    pub fn merged(&self, over: &KvConfig) -> KvConfig {
        let mut entries = self.entries.clone();
        entries.extend(over.entries.clone());
        KvConfig { entries }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// `k1=v1 k2=v2 ...` on one line.
    pub fn to_line(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let c = KvConfig::parse("# header\n d1_m = 2.5 \n\nseed=7 # trailing\n").unwrap();
        assert_eq!(c.get("d1_m"), Some("2.5"));
        assert_eq!(c.get_parsed::<u64>("seed").unwrap(), Some(7));
        assert_eq!(c.get_parsed::<f64>("missing").unwrap(), None);
        assert_eq!(c.to_line(), "d1_m=2.5 seed=7");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(KvConfig::parse("novalue\n").is_err());
        assert!(KvConfig::parse("=3\n").is_err());
        assert!(KvConfig::parse("a=1\na=2\n").is_err());
        let c = KvConfig::parse("a=x").unwrap();
        assert!(c.get_parsed::<f64>("a").is_err());
        assert!(c.reject_unknown(&["b"]).is_err());
        assert!(c.reject_unknown(&["a", "b"]).is_ok());
    }

    #[test]
    fn merge_prefers_override() {
        let a = KvConfig::parse("x=1\ny=2").unwrap();
        let b = KvConfig::parse("y=3").unwrap();
        assert_eq!(a.merged(&b).to_line(), "x=1 y=3");
    }
}
