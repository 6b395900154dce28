use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use dmusic_core::Config;
use serde_json::{Map, Value};

/// Reads a JSON object of `PipelineConfig` fields; no file means defaults.
pub fn load_object(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let file = File::open(path).with_context(|| format!("cannot open config {}", path.display()))?;
    match serde_json::from_reader(BufReader::new(file)).with_context(|| format!("config {} is not valid JSON", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => Err(anyhow!("config {} must be a JSON object", path.display())),
    }
}

/// Parses `key=value`; the value is JSON if it parses, otherwise a string.
pub fn parse_assignment(raw: &str) -> Result<(String, Value)> {
    let (key, value) = raw.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{raw}`"))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.trim().to_string(), value))
}

/// Deserializes and validates; errors name the offending field.
pub fn to_config(map: &Map<String, Value>) -> Result<Config> {
    let value = Value::Object(map.clone());
    let config: Config = serde_path_to_error::deserialize(&value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            anyhow!("malformed config: {}", e.inner())
        } else {
            anyhow!("malformed config field `{path}`: {}", e.inner())
        }
    })?;
    config.validate().map_err(|e| anyhow!("malformed config: {e}"))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_errors_name_the_field() {
        let mut map = Map::new();
        map.insert("lambda".into(), Value::String("half".into()));
        let err = to_config(&map).unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
    }

    #[test]
    fn unknown_fields_are_named() {
        let mut map = Map::new();
        map.insert("sigmaa".into(), Value::from(1e-3));
        let err = to_config(&map).unwrap_err().to_string();
        assert!(err.contains("sigmaa"), "{err}");
    }

    #[test]
    fn range_errors_name_the_field() {
        let mut map = Map::new();
        map.insert("c_msf".into(), Value::from(1.5));
        assert!(to_config(&map).unwrap_err().to_string().contains("c_msf"));
    }

    #[test]
    fn assignments_parse_json_values() {
        assert_eq!(parse_assignment("d_init=12.5").unwrap(), ("d_init".into(), Value::from(12.5)));
        assert_eq!(parse_assignment("modulated=false").unwrap().1, Value::Bool(false));
        assert!(parse_assignment("oops").is_err());
    }
}
