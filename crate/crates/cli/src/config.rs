//! `--config file.json`: per-subcommand default flags.
//!
//! ```json
//! { "sample": { "n": 3, "beta": 2, "count": 100000, "m": [1, 2] },
//!   "validate": { "seed": 7 } }
//! ```
//!
//! Keys are long flag names (`_` and `-` both accepted). Flags given on the
//! command line win; the file only fills in what is missing.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

const SUBCOMMANDS: [&str; 6] = ["moment", "density", "edge-coeffs", "sample", "validate", "limit"];

pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = take_config(&mut args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not valid JSON: {e}"))?;
    let Value::Object(sections) = doc else {
        return Err(format!("config {path} must be a JSON object of subcommand sections"));
    };
    for (k, v) in &sections {
        if !SUBCOMMANDS.contains(&k.as_str()) || !v.is_object() {
            return Err(format!("config {path}: `{k}` is not a subcommand section"));
        }
    }
    let Some(pos) = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
    else {
        return Ok(args);
    };
    let sub = args[pos].to_string_lossy().into_owned();
    let Some(Value::Object(section)) = sections.get(&sub) else {
        return Ok(args);
    };
    let given: Vec<String> = args[pos + 1..]
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|s| s.strip_prefix("--"))
        .map(|s| s.split('=').next().unwrap_or(s).to_string())
        .collect();
    let mut extra: Vec<OsString> = Vec::new();
    for (key, v) in section {
        let flag = key.replace('_', "-");
        if given.contains(&flag) {
            continue;
        }
        push_flag(&mut extra, &flag, v).map_err(|e| format!("config {path}: {e}"))?;
    }
    args.splice(pos + 1..pos + 1, extra);
    Ok(args)
}

fn take_config(args: &mut Vec<OsString>) -> Result<Option<String>, String> {
    for i in 0..args.len() {
        let Some(s) = args[i].to_str() else { continue };
        if s == "--" {
            break;
        }
        if let Some(p) = s.strip_prefix("--config=") {
            let p = p.to_string();
            args.remove(i);
            return Ok(Some(p));
        }
        if s == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a path".into());
            }
            let p = args[i + 1].to_string_lossy().into_owned();
            args.drain(i..i + 2);
            return Ok(Some(p));
        }
    }
    Ok(None)
}

fn push_flag(out: &mut Vec<OsString>, flag: &str, v: &Value) -> Result<(), String> {
    match v {
        Value::Bool(true) => out.push(format!("--{flag}").into()),
        Value::Bool(false) | Value::Null => {}
        Value::Number(x) => out.push(format!("--{flag}={x}").into()),
        Value::String(s) => out.push(format!("--{flag}={s}").into()),
        Value::Array(items) => {
            for it in items {
                if it.is_array() || it.is_object() {
                    return Err(format!("`{flag}` must be a flat list"));
                }
                push_flag(out, flag, it)?;
            }
        }
        Value::Object(_) => return Err(format!("`{flag}` cannot be an object")),
    }
    Ok(())
}
