//! Flat JSON configuration files.
//!
//! Keys are flag names (`"t-end"` or `"t_end"`); values are numbers, strings,
//! booleans (for switches) or arrays (joined with commas). A key only takes
//! effect when the same flag was not given on the command line, so the order
//! of precedence is: flags, then the file, then built-in defaults. Keys that
//! belong to a different subcommand are ignored; keys no subcommand knows are
//! an error.

use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use serde_json::{Map, Value};

use crate::error::{HarnessError, Result};

pub fn read(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Map<String, Value>> {
    let bad = |message: String| HarnessError::Config { path: path.to_path_buf(), message };
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(bad("top level must be an object".into())),
        Err(e) => Err(bad(e.to_string())),
    }
}

fn from_command_line(matches: &ArgMatches, id: &str) -> bool {
    matches!(matches.try_get_raw(id), Ok(Some(_)))
        && matches!(matches.value_source(id), Some(ValueSource::CommandLine | ValueSource::EnvVariable))
}

/// Extra arguments to append after the user's own, for every config entry the
/// user did not already set. `subcommand` is the subcommand that was chosen.
pub fn extra_args(
    path: &Path,
    config: &Map<String, Value>,
    root: &Command,
    matches: &ArgMatches,
    subcommand: &str,
) -> Result<Vec<String>> {
    let bad = |message: String| HarnessError::Config { path: path.to_path_buf(), message };
    let sub = root.find_subcommand(subcommand).ok_or_else(|| bad(format!("unknown subcommand {subcommand}")))?;
    let sub_matches = matches.subcommand_matches(subcommand);
    let known_anywhere = |long: &str| {
        root.get_arguments().chain(root.get_subcommands().flat_map(|s| s.get_arguments())).any(|a| a.get_long() == Some(long))
    };
    let mut extra = Vec::new();
    for (key, value) in config {
        let long = key.replace('_', "-");
        if long == "config" {
            return Err(bad("a config file cannot name another config file".into()));
        }
        let Some(arg) = root.get_arguments().chain(sub.get_arguments()).find(|a| a.get_long() == Some(long.as_str())) else {
            if known_anywhere(&long) {
                continue;
            }
            return Err(bad(format!("unknown key {key:?}")));
        };
        let id = arg.get_id().as_str();
        if from_command_line(matches, id) || sub_matches.is_some_and(|m| from_command_line(m, id)) {
            continue;
        }
        let is_switch = arg.get_num_args().is_some_and(|n| n.max_values() == 0);
        match (value, is_switch) {
            (Value::Bool(true), true) => extra.push(format!("--{long}")),
            (Value::Bool(false), true) => {}
            (_, true) => return Err(bad(format!("{key:?} is a switch and takes true or false"))),
            (v, false) => extra.push(format!("--{long}={}", scalar(v).ok_or_else(|| bad(format!("unsupported value for {key:?}")))?)),
        }
    }
    Ok(extra)
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_objects() {
        assert!(parse(Path::new("c.json"), "[1, 2]").is_err());
        assert!(parse(Path::new("c.json"), "{").is_err());
        assert_eq!(parse(Path::new("c.json"), r#"{"n": 512}"#).unwrap().len(), 1);
    }

    #[test]
    fn arrays_join_with_commas() {
        assert_eq!(scalar(&serde_json::json!([0, 0.5, "2"])).unwrap(), "0,0.5,2");
        assert!(scalar(&serde_json::json!({"a": 1})).is_none());
    }
}
