//! `--config` files. Values from the file fill in flags that were not given
//! on the command line; keys the subcommand does not know are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("argument structs serialize to objects"),
    }
}

fn read_table(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    let bad = |e: String| CliError::Invalid(format!("{}: {e}", path.display()));
    let value = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => {
            let t: toml::Table = toml::from_str(&text).map_err(|e| bad(e.to_string()))?;
            serde_json::to_value(t).map_err(|e| bad(e.to_string()))?
        }
        Some("json") => serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?,
        _ => return Err(bad("config file must end in .toml or .json".into())),
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(bad("expected a table of settings".into())),
    }
}

/// Overlays the flags in `cli` on top of the file at `path`.
pub fn merge<T>(cli: &T, path: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default + Clone,
{
    let Some(path) = path else {
        return Ok(cli.clone());
    };
    let file = read_table(path)?;
    let known = object(&T::default());
    let mut merged = object(cli);
    for (k, v) in file {
        if !known.contains_key(&k) {
            return Err(CliError::Invalid(format!("{}: unknown key `{k}`", path.display())));
        }
        if merged.get(&k).is_none_or(Value::is_null) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// The settings of a run with unset keys dropped, in the `--config` format.
pub fn to_config_json<T: Serialize>(v: &T) -> String {
    let mut m = object(v);
    m.retain(|_, v| !v.is_null());
    let mut s = serde_json::to_string_pretty(&m).expect("settings serialize");
    s.push('\n');
    s
}
