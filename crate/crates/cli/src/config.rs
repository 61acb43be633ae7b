use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use delayctl_core::ScenarioConfig;
use serde_json::Value;

use crate::CliError;

/// Parses `KEY=VALUE` pairs. Values are read as JSON and fall back to a
/// plain string, so `--set tau=0.07` and `--set x0=[0,1]` both work.
pub fn parse_overrides(pairs: &[String]) -> Result<BTreeMap<String, Value>, CliError> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::config(format!("--set has an empty key in `{pair}`")));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

/// Sets `value` at a dotted path such as `theta_signal.0.offset`.
fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*part)
                    .ok_or_else(|| CliError::config(format!("--set {key}: no field `{part}`")))?
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::config(format!("--set {key}: `{part}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::config(format!("--set {key}: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::config(format!("--set {key}: `{part}` is not a container"))),
        };
    }
    Ok(())
}

/// Loads the scenario from `path` (or the built-in example scenario) and
/// applies the overrides. Parse errors carry line and column.
pub fn load(path: Option<&Path>, overrides: &BTreeMap<String, Value>) -> Result<ScenarioConfig, CliError> {
    let (text, origin) = match path {
        Some(p) => (
            fs::read_to_string(p).map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        None => (
            serde_json::to_string(&ScenarioConfig::example(0.0, 0.0)).expect("preset serializes"),
            "built-in scenario".to_string(),
        ),
    };
    let located = |e: serde_json::Error| {
        if e.line() > 0 {
            CliError::config(format!("{origin}: line {}, column {}: {e}", e.line(), e.column()))
        } else {
            CliError::config(format!("{origin}: {e}"))
        }
    };
    if overrides.is_empty() {
        return serde_json::from_str(&text).map_err(located);
    }
    let mut value: Value = serde_json::from_str(&text).map_err(located)?;
    for (key, v) in overrides {
        set_path(&mut value, key, v.clone())?;
    }
    serde_json::from_value(value).map_err(|e| CliError::config(format!("{origin} (after --set): {e}")))
}
