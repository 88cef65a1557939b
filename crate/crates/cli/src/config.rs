//! `--config FILE`: a JSON object of parameter defaults merged into argv.
//!
//! Each key `name` becomes `--name value` unless the flag is already on the
//! command line. `true` becomes a bare switch and `false` is dropped. The
//! key `command` supplies the subcommand when none is given.

use std::collections::BTreeMap;

use serde_json::Value;

pub const SUBCOMMANDS: [&str; 8] = ["count", "gowers", "l4", "kernel", "coprime", "resonance", "simulate", "verify"];

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn scalar(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => items
            .iter()
            .map(|x| scalar(key, x))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.join(",")),
        _ => Err(format!("config key {key:?} must be a string, number, boolean or list")),
    }
}

pub fn parse_map(text: &str) -> Result<BTreeMap<String, String>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let Value::Object(obj) = v else {
        return Err("config must be a JSON object".into());
    };
    obj.iter().map(|(k, v)| Ok((k.clone(), scalar(k, v)?))).collect()
}

/// argv with the config's parameters appended.
pub fn merge(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let map = parse_map(&text)?;
    merge_map(args, &map)
}

pub fn merge_map(mut args: Vec<String>, map: &BTreeMap<String, String>) -> Result<Vec<String>, String> {
    let present: Vec<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    if !args.iter().skip(1).any(|a| SUBCOMMANDS.contains(&a.as_str())) {
        match map.get("command") {
            Some(c) if SUBCOMMANDS.contains(&c.as_str()) => args.insert(1.min(args.len()), c.clone()),
            Some(c) => return Err(format!("unknown command {c:?} in config")),
            None => {}
        }
    }
    for (k, v) in map {
        let key = k.replace('_', "-");
        if key == "command" || key == "config" || present.contains(&key) {
            continue;
        }
        match v.as_str() {
            "false" => {}
            "true" => args.push(format!("--{key}")),
            _ => {
                args.push(format!("--{key}"));
                args.push(v.clone());
            }
        }
    }
    Ok(args)
}
