//! Run configuration: a flat key/value file (or one JSON object) overlaid by
//! command-line flags, with every resolved value recorded for the audit file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Raw values read from a config file, keyed by snake_case name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// `key=value` lines (blank lines and `#` comments ignored), or a single
    /// JSON object whose values are scalars or arrays of scalars. Arrays are
    /// joined with commas.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return Self::parse_json(text);
        }
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: i + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::ConfigParse {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if values
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::ConfigParse {
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ConfigFile { values })
    }

    fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse {
                line: e.line(),
                message: e.to_string(),
            })?;
        let object = value.as_object().ok_or_else(|| Error::ConfigParse {
            line: 1,
            message: "JSON config must be an object".into(),
        })?;
        let scalar = |key: &str, v: &serde_json::Value| -> Result<String> {
            match v {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) => Ok(n.to_string()),
                serde_json::Value::Bool(b) => Ok(b.to_string()),
                _ => Err(Error::ConfigParse {
                    line: 1,
                    message: format!(
                        "value of `{key}` must be a string, number, boolean or array of those"
                    ),
                }),
            }
        };
        let mut values = BTreeMap::new();
        for (key, v) in object {
            let text = match v {
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|item| scalar(key, item))
                    .collect::<Result<Vec<_>>>()?
                    .join(","),
                other => scalar(key, other)?,
            };
            values.insert(key.clone(), text);
        }
        Ok(ConfigFile { values })
    }
}

/// Comma-separated list value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',')
            .map(|part| {
                part.trim().parse().map_err(|e: T::Err| {
                    Error::InvalidConfig(format!("bad list item `{}`: {e}", part.trim()))
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Resolves each setting from flag, then file, then default, and remembers
/// the outcome in resolution order.
#[derive(Debug)]
pub struct Resolver {
    file: ConfigFile,
    seen: BTreeSet<String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Resolver {
            file,
            seen: BTreeSet::new(),
            resolved: Vec::new(),
        }
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        self.seen.insert(key.to_string());
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.values.get(key) {
                Some(text) => Some(text.parse().map_err(|e: T::Err| {
                    Error::InvalidConfig(format!("config value for `{key}`: {e}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        match self.lookup(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.push((key.to_string(), default.to_string()));
                Ok(default)
            }
        }
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        self.lookup(key, flag)?.ok_or_else(|| {
            Error::InvalidConfig(format!("missing required setting `{key}` (flag or config)"))
        })
    }

    /// Like [`Resolver::get`] for settings with no default; absent values
    /// are not recorded.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        self.lookup(key, flag)
    }

    /// Fails on file keys the command never asked about.
    pub fn finish(self) -> Result<Vec<(String, String)>> {
        if let Some(key) = self.file.values.keys().find(|k| !self.seen.contains(*k)) {
            return Err(Error::UnknownKey(key.clone()));
        }
        Ok(self.resolved)
    }
}

/// Audit file text: a header comment, then the resolved settings as
/// `key=value`, loadable again through `--config`.
pub fn render_audit(command: &str, resolved: &[(String, String)]) -> String {
    let mut out = format!("# projreg {} {command}\n", env!("CARGO_PKG_VERSION"));
    for (key, value) in resolved {
        out.push_str(&format!("{key}={value}\n"));
    }
    out
}
