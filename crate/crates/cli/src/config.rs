//! Config documents: a TOML or JSON file, overridden key by key by flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{config_error, CliError};

pub type Params = Map<String, Value>;

/// Reads a config document; `.json` files are JSON, anything else TOML.
pub fn load(path: &Path) -> Result<Params, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| CliError::Internal(e.to_string()))?
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => config_error(format!("{}: expected a table of parameters", path.display())),
    }
}

/// Flag values as a parameter map; unset flags must serialize to nothing.
pub fn flags_to_params<T: Serialize>(flags: &T) -> Result<Params, CliError> {
    match serde_json::to_value(flags).map_err(|e| CliError::Internal(e.to_string()))? {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Internal("flags did not serialize to a table".into())),
    }
}

/// Strips an optional `command` key, checking it names `command`.
pub fn take_command(params: &mut Params, command: &str) -> Result<(), CliError> {
    match params.remove("command") {
        None => Ok(()),
        Some(Value::String(c)) if c == command => Ok(()),
        Some(other) => config_error(format!("config is for command {other}, not {command}")),
    }
}

pub fn parse<C: DeserializeOwned>(command: &str, params: Params) -> Result<C, CliError> {
    serde_json::from_value(Value::Object(params)).map_err(|e| CliError::Config(format!("{command}: {e}")))
}

/// Fully resolved config as echoed in output headers.
pub fn echo<C: Serialize>(command: &str, config: &C) -> Result<Value, CliError> {
    let mut map = flags_to_params(config)?;
    map.insert("command".into(), Value::String(command.into()));
    Ok(Value::Object(map))
}

/// Parses `key=value`, reading the value as JSON when possible.
pub fn parse_assignment(text: &str) -> Result<(String, Value), CliError> {
    let Some((key, raw)) = text.split_once('=') else {
        return config_error(format!("expected key=value, got {text:?}"));
    };
    Ok((key.trim().to_string(), parse_scalar(raw.trim())))
}

pub fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}
