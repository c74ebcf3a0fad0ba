use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

/// Values from the optional config file. Keys mirror the long flag names;
/// `vocab-size` and `vocab_size` are the same key.
#[derive(Debug, Default)]
pub struct Settings {
    values: toml::Table,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let values: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&toml::Value> {
        self.values
            .get(key)
            .or_else(|| self.values.get(&key.replace('-', "_")))
    }

    /// The flag value if given, else the config value.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    pub fn pick_or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Fractions may be written as strings (`"4/5"`, `"80%"`) or numbers.
    pub fn pick_text(&self, flag: Option<String>, key: &str) -> Result<Option<String>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        Ok(self.raw(key).map(|v| match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        }))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}
