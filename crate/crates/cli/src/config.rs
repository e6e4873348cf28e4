//! Resolution of the effective configuration: preset, then the config file,
//! then `--set` overrides and dedicated flags, deep-merged as JSON.

use std::path::Path;

use serde_json::{Map, Value};

use hcm_core::ScenarioConfig;

use crate::CliError;

/// `key=value[,value...]` from one or more `--set` arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub values: Vec<String>,
}

/// Splits `--set` arguments on commas; a token without `=` extends the
/// preceding key into a vector, as in `c1=0.5,1.5,c2=1,2`.
pub fn parse_overrides(items: &[String]) -> Result<Vec<Override>, CliError> {
    let mut out: Vec<Override> = Vec::new();
    for item in items {
        let mut current: Option<usize> = None;
        for token in item.split(',') {
            let token = token.trim();
            if token.is_empty() {
                return Err(CliError::Usage(format!(
                    "empty element in override `{item}`"
                )));
            }
            match token.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    let valid = !k.is_empty()
                        && k.split('.').all(|part| {
                            !part.is_empty()
                                && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                        });
                    if !valid || v.trim().is_empty() {
                        return Err(CliError::Usage(format!(
                            "malformed override `{token}`, expected key=value"
                        )));
                    }
                    out.retain(|o| o.key != k);
                    out.push(Override {
                        key: k.to_string(),
                        values: vec![v.trim().to_string()],
                    });
                    current = Some(out.len() - 1);
                }
                None => match current {
                    Some(i) => out[i].values.push(token.to_string()),
                    None => {
                        return Err(CliError::Usage(format!(
                            "override `{item}` must start with key=value"
                        )))
                    }
                },
            }
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!("config {} is not valid JSON: {e}", path.display()))
    })?;
    normalize(v)
}

/// Accepts `"scenario": "name"` as shorthand for `{"name": "name"}`.
pub fn normalize(v: Value) -> Result<Value, CliError> {
    let Value::Object(mut m) = v else {
        return Err(CliError::Usage("config must be a JSON object".into()));
    };
    if let Some(Value::String(name)) = m.get("scenario") {
        let name = name.clone();
        m.insert(
            "scenario".into(),
            Value::Object(Map::from_iter([("name".to_string(), Value::String(name))])),
        );
    }
    Ok(Value::Object(m))
}

/// Scenario name given in a (normalized) config file.
pub fn scenario_name(file: &Value) -> Option<String> {
    file.get("scenario")?
        .get("name")?
        .as_str()
        .map(str::to_string)
}

pub fn deep_merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_number(key: &str, s: &str) -> Result<Value, CliError> {
    let x: f64 = s
        .parse()
        .map_err(|_| CliError::Usage(format!("override {key}: `{s}` is not a number")))?;
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| CliError::Usage(format!("override {key}: `{s}` is not finite")))
}

fn parse_any(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

/// Plain keys set `params`; dotted keys address the config tree.
pub fn apply_overrides(config: &mut Value, overrides: &[Override]) -> Result<(), CliError> {
    for o in overrides {
        if o.key.contains('.') {
            let value = if o.values.len() == 1 {
                parse_any(&o.values[0])
            } else {
                Value::Array(o.values.iter().map(|s| parse_any(s)).collect())
            };
            set_path(config, &o.key, value)?;
        } else {
            let nums = o
                .values
                .iter()
                .map(|s| parse_number(&o.key, s))
                .collect::<Result<Vec<_>, _>>()?;
            let value = if nums.len() == 1 {
                nums.into_iter().next().unwrap()
            } else {
                Value::Array(nums)
            };
            set_path(config, &format!("params.{}", o.key), value)?;
        }
    }
    Ok(())
}

pub fn set_path(config: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = path.split('.').collect();
    let mut node = config;
    for part in &parts[..parts.len() - 1] {
        let Value::Object(m) = node else {
            return Err(CliError::Usage(format!(
                "cannot set `{path}`: `{part}` is not a section"
            )));
        };
        node = m
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    let Value::Object(m) = node else {
        return Err(CliError::Usage(format!("cannot set `{path}`")));
    };
    m.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Preset, file and overrides combined into a typed configuration.
pub fn resolve(
    base: &ScenarioConfig,
    file: Option<&Value>,
    overrides: &[Override],
    patches: &[(&str, Value)],
) -> Result<ScenarioConfig, CliError> {
    let mut v = serde_json::to_value(base).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(f) = file {
        deep_merge(&mut v, f.clone());
    }
    apply_overrides(&mut v, overrides)?;
    for (path, value) in patches {
        set_path(&mut v, path, value.clone())?;
    }
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}
