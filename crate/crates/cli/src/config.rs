use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::output::num;

/// Flat `key = value` file; `#` starts a comment, `-` and `_` in keys are interchangeable.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = normalize(k.trim());
        if key.is_empty() {
            return Err(CliError::config(format!(
                "config line {}: empty key",
                i + 1
            )));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::config(format!(
                "config line {}: duplicate key {key}",
                i + 1
            )));
        }
    }
    Ok(out)
}

pub fn load_config(path: Option<&Path>) -> Result<BTreeMap<String, String>, CliError> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::config(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse_config(&text)
        }
    }
}

fn normalize(k: &str) -> String {
    k.replace('_', "-").to_ascii_lowercase()
}

/// Value lookup in the order flag, config file, default; records what was used.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    pub resolved: Map<String, Value>,
}

pub trait ToMeta {
    fn to_meta(&self) -> Value;
}

impl ToMeta for f64 {
    fn to_meta(&self) -> Value {
        num(*self)
    }
}

impl ToMeta for u64 {
    fn to_meta(&self) -> Value {
        Value::from(*self)
    }
}

impl ToMeta for usize {
    fn to_meta(&self) -> Value {
        Value::from(*self as u64)
    }
}

impl ToMeta for bool {
    fn to_meta(&self) -> Value {
        Value::from(*self)
    }
}

impl ToMeta for String {
    fn to_meta(&self) -> Value {
        Value::from(self.as_str())
    }
}

impl ToMeta for Vec<f64> {
    fn to_meta(&self) -> Value {
        Value::Array(self.iter().map(|x| num(*x)).collect())
    }
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            used: vec![],
            resolved: Map::new(),
        }
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.used.push(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|e| {
                CliError::config(format!("config key {key}: cannot parse {s:?}: {e}"))
            }),
        }
    }

    pub fn opt<T: FromStr + ToMeta + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let file = self.file_value::<T>(key)?;
        let v = flag.or(file);
        if let Some(x) = &v {
            self.resolved.insert(key.to_string(), x.to_meta());
        }
        Ok(v)
    }

    pub fn get<T: FromStr + ToMeta + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_meta());
        Ok(v)
    }

    pub fn list(
        &mut self,
        key: &str,
        flag: Option<String>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        let v = match self.opt::<String>(key, flag)? {
            None => default.to_vec(),
            Some(s) => parse_list(&s).map_err(|e| CliError::config(format!("{key}: {e}")))?,
        };
        self.resolved.insert(key.to_string(), v.to_meta());
        Ok(v)
    }

    /// Config keys that no command option consumed.
    pub fn unused(&self) -> Vec<String> {
        self.file
            .keys()
            .filter(|k| !self.used.contains(k))
            .cloned()
            .collect()
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {x:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}
