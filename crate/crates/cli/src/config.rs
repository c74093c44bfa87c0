//! `key = value` configuration files merged under the command line.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

/// A diagnostic tied to a line of the configuration file.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.path, self.line, self.msg)
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.strip_prefix(&format!("\"{key}\"")).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |k| k + 1)
}

fn scalar(value: &toml::Value) -> Option<String> {
    match value {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(format!("{f:e}")),
        _ => None,
    }
}

/// Command-line tokens for one config entry; `None` for a false flag.
fn tokens(arg: &clap::Arg, value: &toml::Value) -> Result<Option<Vec<String>>, String> {
    let long = format!("--{}", arg.get_long().expect("every option has a long name"));
    let is_flag = !arg.get_action().takes_values();
    if is_flag {
        return match value {
            toml::Value::Boolean(true) => Ok(Some(vec![long])),
            toml::Value::Boolean(false) => Ok(None),
            _ => Err("expected true or false".into()),
        };
    }
    let text = match value {
        toml::Value::Array(items) => items
            .iter()
            .map(scalar)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.join(","))
            .ok_or_else(|| "arrays may only hold numbers and strings".to_string())?,
        other => scalar(other).ok_or_else(|| "expected a number, string or array".to_string())?,
    };
    Ok(Some(vec![long, text]))
}

/// Appends the entries of `path` that the command line did not set. Every
/// key must name an option of the selected subcommand (or `threads`) and
/// every value must parse on its own.
pub fn merge(
    cmd: &Command,
    argv: &[OsString],
    matches: &ArgMatches,
    path: &Path,
) -> Result<Vec<OsString>, ConfigError> {
    let shown = path.display().to_string();
    let err = |line: usize, msg: String| ConfigError { path: shown.clone(), line, msg };
    let text = std::fs::read_to_string(path).map_err(|e| err(0, e.to_string()))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map_or(1, |s| line_of_offset(&text, s.start));
        err(line, e.message().trim().replace('\n', "; "))
    })?;
    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = cmd.find_subcommand(sub_name).expect("matched subcommand exists");
    let mut out = argv.to_vec();
    for (key, value) in &table {
        let line = line_of_key(&text, key);
        if let toml::Value::Table(_) = value {
            return Err(err(line, format!("sections are not supported ([{key}])")));
        }
        let id = key.replace('-', "_");
        let (arg, given) = if id == "threads" {
            let arg = cmd.get_arguments().find(|a| a.get_id() == "threads").expect("threads is defined");
            (arg, matches.value_source("threads"))
        } else if id == "config" || id == "help" || id == "version" {
            return Err(err(line, format!("key {key:?} is not allowed in a config file")));
        } else {
            match sub.get_arguments().find(|a| a.get_id() == id.as_str()) {
                Some(arg) => (arg, sub_matches.value_source(&id)),
                None => return Err(err(line, format!("unknown key {key:?} for `{sub_name}`"))),
            }
        };
        let toks = tokens(arg, value).map_err(|m| err(line, format!("{key}: {m}")))?;
        let Some(toks) = toks else { continue };
        let mut probe: Vec<OsString> = vec![argv[0].clone(), sub_name.into()];
        probe.extend(toks.iter().map(OsString::from));
        if let Err(e) = cmd.clone().try_get_matches_from(&probe) {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            return Err(err(line, format!("{key}: {first}")));
        }
        if given != Some(ValueSource::CommandLine) {
            out.extend(toks.into_iter().map(OsString::from));
        }
    }
    Ok(out)
}
