//! `--config` overrides. Values in the file win over command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct Overrides {
    global: Map<String, Value>,
    sections: BTreeMap<String, Map<String, Value>>,
}

impl Overrides {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let table: toml::Table =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let mut global = Map::new();
        let mut sections = BTreeMap::new();
        for (key, value) in table {
            let value = serde_json::to_value(value)?;
            match value {
                Value::Object(section) => {
                    let section = section
                        .into_iter()
                        .map(|(k, v)| (k.replace('-', "_"), v))
                        .collect();
                    sections.insert(key.replace('_', "-"), section);
                }
                other => {
                    global.insert(key.replace('-', "_"), other);
                }
            }
        }
        Ok(Overrides { global, sections })
    }
}

/// Overlays the config values for `command` onto parsed flags.
pub fn apply<T: Serialize + DeserializeOwned>(
    overrides: Option<&Overrides>,
    command: &str,
    args: T,
) -> anyhow::Result<T> {
    let Some(overrides) = overrides else {
        return Ok(args);
    };
    let Value::Object(mut fields) = serde_json::to_value(&args)? else {
        bail!("arguments of {command} are not a record");
    };
    for (key, value) in &overrides.global {
        if let Some(slot) = fields.get_mut(key) {
            *slot = value.clone();
        }
    }
    if let Some(section) = overrides.sections.get(command) {
        for (key, value) in section {
            match fields.get_mut(key) {
                Some(slot) => *slot = value.clone(),
                None => bail!("config section [{command}] has unknown key {key:?}"),
            }
        }
    }
    serde_json::from_value(Value::Object(fields))
        .with_context(|| format!("config values for {command} have the wrong type"))
}
