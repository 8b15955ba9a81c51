//! Layering of config-file tables under command-line flags.

use std::fs;
use std::path::Path;

use anyhow::Context as _;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    tables: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let Value::Object(tables) = serde_json::to_value(table).map_err(anyhow::Error::from)? else {
            unreachable!("a TOML table serializes to an object")
        };
        Ok(Self { tables })
    }

    /// Values from `[section]`, overridden by every flag set on the command line.
    ///
    /// Unset options, unset switches and empty lists count as "not given".
    pub fn layer<T: Serialize + DeserializeOwned>(&self, section: &str, cli: &T) -> Result<T, CliError> {
        let mut merged = match self.tables.get(section) {
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(CliError::Usage(format!("config: `{section}` must be a table"))),
            None => Map::new(),
        };
        let Value::Object(given) = serde_json::to_value(cli).map_err(anyhow::Error::from)? else {
            unreachable!("argument structs serialize to objects")
        };
        for (k, v) in given {
            let unset = match &v {
                Value::Null | Value::Bool(false) => true,
                Value::Array(a) => a.is_empty(),
                _ => false,
            };
            if !unset {
                merged.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::Usage(format!("config `[{section}]`: {e}")))
    }
}
