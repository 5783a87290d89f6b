//! Config-file merging: file values fill flags that were not given on the command line.

use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Reads the config file, which must hold a JSON object.
pub fn load(path: Option<&Path>) -> anyhow::Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("config file {} is not valid JSON", path.display()))? {
        Value::Object(m) => Ok(m),
        _ => bail!("config file {} must contain a JSON object", path.display()),
    }
}

/// Overlays the flags given on the command line onto the file values. Unknown keys in
/// the file are rejected by the argument type.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: T, file: &Map<String, Value>) -> anyhow::Result<T> {
    let mut merged = file.clone();
    if let Value::Object(given) = serde_json::to_value(&flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).context("invalid config file")
}
