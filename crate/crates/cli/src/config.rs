//! JSON configuration files.
//!
//! Top-level scalar keys apply to every subcommand; an object under the
//! subcommand name overrides them; explicit flags override both.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !v.is_object() {
        return Err(CliError::Usage(format!("config {} must be a JSON object", path.display())));
    }
    Ok(v)
}

/// `args` with every unset field filled from `config`.
pub fn merge<T: Serialize + DeserializeOwned>(args: &T, config: Option<&Value>, command: &str) -> Result<T, CliError> {
    let Some(Value::Object(config)) = config else {
        return serde_json::from_value(serde_json::to_value(args).map_err(json_err)?).map_err(json_err);
    };
    let mut merged = Map::new();
    for (k, v) in config {
        if !v.is_object() {
            merged.insert(k.clone(), v.clone());
        }
    }
    if let Some(Value::Object(section)) = config.get(command) {
        for (k, v) in section {
            merged.insert(k.clone(), v.clone());
        }
    }
    let Value::Object(flags) = serde_json::to_value(args).map_err(json_err)? else {
        unreachable!("argument structs serialize to objects");
    };
    let known: Vec<String> = flags.keys().cloned().collect();
    merged.retain(|k, _| known.contains(k) || known.iter().any(|n| alias(n) == Some(k.as_str())));
    for (k, v) in flags {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("config values for {command} do not fit: {e}")))
}

fn alias(field: &str) -> Option<&'static str> {
    match field {
        "t_left" => Some("Tl"),
        "t_right" => Some("Tr"),
        _ => None,
    }
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::CurrentArgs;
    use serde_json::json;

    #[test]
    fn flags_override_section_overrides_top_level() {
        let config = json!({"alpha": "pi/2", "Tl": "3", "current": {"t_right": "1"}, "entropy": {"angles": 3}});
        let args = CurrentArgs { alpha: Some("0".into()), ..Default::default() };
        let m = merge(&args, Some(&config), "current").unwrap();
        assert_eq!(m.alpha.as_deref(), Some("0"));
        assert_eq!(m.t_left.as_deref(), Some("3"));
        assert_eq!(m.t_right.as_deref(), Some("1"));
    }

    #[test]
    fn mistyped_config_is_a_usage_error() {
        let config = json!({"current": {"alpha": 3}});
        assert!(merge(&CurrentArgs::default(), Some(&config), "current").is_err());
    }
}
