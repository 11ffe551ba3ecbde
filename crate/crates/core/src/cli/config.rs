//! `--config FILE`: a JSON object whose keys are long flag names. Values
//! fill in flags that are absent from the command line.

use std::ffi::OsString;
use std::fs;

use clap::{ArgAction, CommandFactory, Parser};
use serde_json::Value;

use super::Cli;
use crate::error::Error;

pub(super) enum ParseFailure {
    Clap(clap::Error),
    Library(Error),
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn normalize(key: &str) -> String {
    key.trim_start_matches('-').replace('_', "-")
}

fn render(value: &Value) -> Option<String> {
    match value {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Array(items) => Some(
            items
                .iter()
                .filter_map(render)
                .collect::<Vec<_>>()
                .join(","),
        ),
        Value::Object(_) => None,
    }
}

/// Extra command-line tokens contributed by the config file.
fn config_tokens(args: &[OsString], text: &str) -> Result<Vec<OsString>, Error> {
    let json: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line() as u64, format!("config: {e}")))?;
    let Value::Object(map) = json else {
        return Err(Error::parse(1, "config: expected a JSON object"));
    };

    let root = Cli::command();
    let raw: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(sub) = raw
        .iter()
        .skip(1)
        .find_map(|a| root.get_subcommands().find(|c| c.get_name() == a))
    else {
        // let clap report the missing subcommand
        return Ok(Vec::new());
    };

    let mut tokens = Vec::new();
    for (key, value) in &map {
        let long = normalize(key);
        if long == "config" {
            continue;
        }
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()))
        else {
            let elsewhere = root.get_subcommands().any(|c| {
                c.get_arguments()
                    .any(|a| a.get_long() == Some(long.as_str()))
            });
            if elsewhere {
                continue;
            }
            return Err(Error::InvalidArgument(format!(
                "config: unknown key `{key}`"
            )));
        };
        let flag = format!("--{long}");
        let given = raw
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        let Some(rendered) = render(value) else {
            continue;
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            if value.as_bool() == Some(true) {
                tokens.push(OsString::from(flag));
            } else if value.as_bool().is_none() {
                return Err(Error::InvalidArgument(format!(
                    "config: `{key}` must be true or false"
                )));
            }
            continue;
        }
        tokens.push(OsString::from(format!("{flag}={rendered}")));
    }
    Ok(tokens)
}

pub(super) fn parse_with_config(args: &[OsString]) -> Result<Cli, ParseFailure> {
    let Some(path) = config_path(args) else {
        return Cli::try_parse_from(args).map_err(ParseFailure::Clap);
    };
    let text = fs::read_to_string(&path).map_err(|e| ParseFailure::Library(Error::Io(e)))?;
    let extra = config_tokens(args, &text).map_err(ParseFailure::Library)?;
    let mut full = args.to_vec();
    full.extend(extra);
    Cli::try_parse_from(full).map_err(ParseFailure::Clap)
}
