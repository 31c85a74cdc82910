//! Map selection and the declarative configuration file.
//!
//! A configuration file is TOML with a `command` key naming the subcommand;
//! every other key is the long name of one of its flags, with `_` and `-`
//! interchangeable. Arrays become comma-separated lists and `true` turns a
//! switch on, so a file holds exactly what the flags would.

use serde::{Deserialize, Serialize};
use shiftwalk_core::maps::builtin;
use shiftwalk_core::ShiftPeriodicMap;

use crate::error::{RunError, RunResult};

/// A map family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    /// Family name, one of [`builtin::FAMILIES`].
    pub family: String,
    /// Parameter values by name.
    pub params: Vec<(String, f64)>,
}

impl MapSpec {
    /// Spec from a family name and parameters.
    pub fn new(family: impl Into<String>, params: &[(&str, f64)]) -> Self {
        MapSpec { family: family.into(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    /// Parses `name=value` assignments.
    pub fn with_assignments(mut self, items: &[String]) -> RunResult<Self> {
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| RunError::Config(format!("parameter `{item}` is not of the form name=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| RunError::Config(format!("parameter `{item}` has a non-numeric value")))?;
            self.params.retain(|(n, _)| n != k.trim());
            self.params.push((k.trim().to_string(), v));
        }
        Ok(self)
    }

    /// Builds the map.
    pub fn build(&self) -> RunResult<ShiftPeriodicMap> {
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(builtin::by_name(&self.family, &params)?)
    }
}

/// Turns a configuration file into command-line arguments, without the program name.
pub fn args_from_toml(text: &str) -> RunResult<Vec<String>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| RunError::Config(e.to_string()))?;
    let command = table
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| RunError::Config("configuration needs a string `command`".into()))?;
    let mut global = Vec::new();
    let mut local = vec![command.to_string()];
    for (key, value) in &table {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let target = if matches!(key.as_str(), "threads" | "out") { &mut global } else { &mut local };
        match value {
            toml::Value::Boolean(true) => target.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) if key == "param" => {
                for item in items {
                    target.push(flag.clone());
                    target.push(scalar(item)?);
                }
            }
            toml::Value::Array(items) => {
                let parts: RunResult<Vec<String>> = items.iter().map(scalar).collect();
                target.push(flag);
                target.push(parts?.join(","));
            }
            other => {
                target.push(flag);
                target.push(scalar(other)?);
            }
        }
    }
    global.extend(local);
    Ok(global)
}

fn scalar(v: &toml::Value) -> RunResult<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        other => Err(RunError::Config(format!("unsupported value `{other}`"))),
    }
}
