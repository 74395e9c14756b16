use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

/// Keys of a config file that belong to the top-level command rather than a
/// subcommand.
const GLOBAL_KEYS: [&str; 2] = ["config", "jobs"];

/// Load a config object. A report written by this tool is accepted too; its
/// embedded `params` are used.
pub fn load(path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut o) if o.contains_key("suite") && o.contains_key("params") => {
            o.remove("params").unwrap_or(Value::Null)
        }
        v => v,
    };
    match value {
        Value::Object(o) => Ok(o),
        _ => Err(Failure::Usage(format!("config {} must hold a JSON object", path.display()))),
    }
}

pub fn jobs(config: &Map<String, Value>) -> Result<Option<usize>, Failure> {
    match config.get("jobs") {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|j| Some(j as usize))
            .ok_or_else(|| Failure::Usage("config key `jobs` must be a positive integer".into())),
    }
}

/// Overlay the flags given on the command line onto the config file.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: &Map<String, Value>) -> Result<T, Failure> {
    let mut merged: Map<String, Value> = config
        .iter()
        .filter(|(k, _)| !GLOBAL_KEYS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let Value::Object(given) = serde_json::to_value(flags).expect("flags serialize") else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in given {
        let empty = v.is_null() || v.as_array().is_some_and(|a| a.is_empty());
        if !empty {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Usage(format!("config: {e}")))
}

/// The resolved arguments as embedded in reports, without output paths.
pub fn embed<T: Serialize>(args: &T, outputs: &[&str]) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(o) = &mut v {
        o.retain(|k, v| !outputs.contains(&k.as_str()) && !v.is_null());
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq, Default)]
    #[serde(deny_unknown_fields)]
    struct Args {
        alpha: Option<f64>,
        seed: Option<u64>,
        list: Vec<f64>,
    }

    #[test]
    fn flags_override_file() {
        let config: Map<String, Value> =
            serde_json::from_str(r#"{"alpha": 0.6, "seed": 3, "list": [1.5], "jobs": 2}"#).unwrap();
        let flags = Args {
            seed: Some(7),
            ..Default::default()
        };
        let merged = merge(&flags, &config).unwrap();
        assert_eq!(
            merged,
            Args {
                alpha: Some(0.6),
                seed: Some(7),
                list: vec![1.5]
            }
        );
        assert_eq!(jobs(&config).unwrap(), Some(2));
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let config: Map<String, Value> = serde_json::from_str(r#"{"alpah": 0.6}"#).unwrap();
        assert!(matches!(merge(&Args::default(), &config), Err(Failure::Usage(_))));
    }
}
