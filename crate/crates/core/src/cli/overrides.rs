use serde_json::Value;

use crate::experiments::ExperimentConfig;
use crate::{Error, Result};

/// One `--set key=value` pair. A value that parses as JSON is used as such,
/// anything else as a string.
#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

fn split_pair(arg: &str) -> Result<(&str, &str)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(Error::config(format!("--set expects key=value, got {arg:?}"))),
    }
}

pub fn parse_override(arg: &str) -> Result<Override> {
    let (key, value) = split_pair(arg)?;
    Ok(Override {
        key: key.to_string(),
        value: parse_value(value),
    })
}

/// Alternatives for one sweep axis: `a,b,c` splits on commas unless the whole
/// value is a JSON array or object.
pub fn parse_sweep_axis(arg: &str) -> Result<(String, Vec<Value>)> {
    let (key, value) = split_pair(arg)?;
    let values = if value.starts_with('[') || value.starts_with('{') {
        vec![parse_value(value)]
    } else {
        value.split(',').map(|v| parse_value(v.trim())).collect()
    };
    Ok((key.to_string(), values))
}

fn apply_value(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    for part in key.split('.') {
        node = match node {
            Value::Object(map) => map
                .get_mut(part)
                .ok_or_else(|| Error::config(format!("unknown config key {key:?}")))?,
            _ => return Err(Error::config(format!("unknown config key {key:?}"))),
        };
    }
    *node = value;
    Ok(())
}

/// Apply dotted-key overrides to the serialized config. Keys must already
/// exist, so typos are rejected rather than silently ignored.
pub fn apply_overrides(config: &ExperimentConfig, overrides: &[Override]) -> Result<ExperimentConfig> {
    let mut tree = serde_json::to_value(config)?;
    for o in overrides {
        apply_value(&mut tree, &o.key, o.value.clone())?;
    }
    serde_json::from_value(tree).map_err(|e| Error::config(format!("invalid override: {e}")))
}

/// Cartesian product of the sweep axes, first axis varying slowest.
pub fn cartesian(axes: &[(String, Vec<Value>)]) -> Vec<Vec<Override>> {
    let mut out: Vec<Vec<Override>> = vec![Vec::new()];
    for (key, values) in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(Override {
                        key: key.clone(),
                        value: v.clone(),
                    });
                    next
                })
            })
            .collect();
    }
    out
}
