//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may not repeat.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
                what: "config",
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Format {
                    what: "config",
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if entries
                .insert(key.to_string(), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(Error::Format {
                    what: "config",
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e| Error::Format {
                what: "config",
                line: *line,
                message: format!("bad value for `{key}`: {e}"),
            }),
        }
    }

    /// Fails on the first key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            Some((k, (_, line))) => Err(Error::Format {
                what: "config",
                line: *line,
                message: format!("unknown key `{k}`"),
            }),
            None => Ok(()),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_types() {
        let kv = KeyValues::parse("# toy run\nepochs = 3\n\nlr=0.001\nmode = mixed\n").unwrap();
        assert_eq!(kv.get::<usize>("epochs").unwrap(), Some(3));
        assert_eq!(kv.get::<f64>("lr").unwrap(), Some(0.001));
        assert_eq!(kv.raw("mode"), Some("mixed"));
        assert_eq!(kv.get::<u64>("seed").unwrap(), None);
        assert!(kv.reject_unknown(&["epochs", "lr", "mode"]).is_ok());
        assert!(kv.reject_unknown(&["epochs"]).is_err());
    }

    #[test]
    fn errors_name_the_line() {
        let err = KeyValues::parse("a = 1\nnonsense\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = KeyValues::parse("a = 1\na = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let kv = KeyValues::parse("epochs = many").unwrap();
        assert!(kv.get::<usize>("epochs").is_err());
    }
}
