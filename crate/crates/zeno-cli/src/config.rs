//! Config files and flag overlay.
//!
//! A config file is a flat table of the same keys as the subcommand's flags
//! (snake_case, e.g. `omega_s = 0.5`). A JSON sidecar written by a previous
//! run is also accepted; its `params` table is used. Flags win over the file.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    pub params: Map<String, Value>,
    pub format: Option<Format>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
    } else {
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| CliError::Validation(e.to_string()))?
    };
    let Value::Object(mut top) = value else {
        return Err(CliError::Validation(format!(
            "{}: expected a table of settings",
            path.display()
        )));
    };
    let format = match top.remove("format") {
        Some(v) => Some(
            serde_json::from_value(v).map_err(|e| CliError::Validation(format!("format: {e}")))?,
        ),
        None => None,
    };
    top.remove("command");
    let params = match top.remove("params") {
        Some(Value::Object(p)) => p,
        Some(_) => return Err(CliError::Validation("params must be a table".into())),
        None => top,
    };
    Ok(FileConfig { params, format })
}

fn to_map<T: Serialize>(v: &T) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(v).map_err(|e| CliError::Validation(e.to_string()))? {
        Value::Object(m) => Ok(m),
        _ => Ok(Map::new()),
    }
}

/// Every non-null flag replaces the file's value for the same key. Keys the
/// subcommand does not know are rejected.
pub fn overlay<T: Serialize + DeserializeOwned + Default>(
    file: &Map<String, Value>,
    flags: &T,
) -> Result<T, CliError> {
    let known = to_map(&T::default())?;
    if let Some(k) = file.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Validation(format!("config: unknown key `{k}`")));
    }
    let mut merged = file.clone();
    {
        let flag_map = to_map(flags)?;
        for (k, v) in flag_map {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Validation(format!("config: {e}")))
}
