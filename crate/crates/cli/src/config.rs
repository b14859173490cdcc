//! Flat `key = value` configuration files mirroring the command-line flags.
//!
//! ```toml
//! discipline = "lcfs"
//! lambda = 0.5
//! buffer = 5
//! metrics = ["avg-aoi", "valid-rate"]
//! log = true
//! ```
//!
//! Each key is a long flag name. The file's flags are inserted before the
//! command-line flags, so flags given on the command line take precedence.

use std::ffi::OsString;
use std::path::Path;

use crate::failure::Failure;

pub fn load_flags(path: &Path) -> Result<Vec<OsString>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_flags(&text).map_err(|e| Failure::invalid(format!("config {}: {e}", path.display())))
}

pub fn parse_flags(text: &str) -> Result<Vec<OsString>, String> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match value {
            toml::Value::Boolean(true) => {
                flags.push(flag.into());
                continue;
            }
            toml::Value::Boolean(false) => continue,
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(x) => x.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(scalar)
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            other => return Err(format!("unsupported value for {key}: {other}")),
        };
        flags.push(format!("{flag}={rendered}").into());
    }
    Ok(flags)
}

fn scalar(v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        other => Err(format!("unsupported list item {other}")),
    }
}

/// Splices `--config FILE` (anywhere after the subcommand) into flags.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    if args.len() < 2 {
        return Ok(args);
    }
    let mut head = args[..2].to_vec();
    let mut rest = Vec::new();
    let mut config = None;
    let mut iter = args[2..].iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| Failure::invalid("--config needs a file path"))?;
            config = Some(path.clone());
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.into());
        } else {
            rest.push(arg.clone());
        }
    }
    if let Some(path) = config {
        head.extend(load_flags(Path::new(&path))?);
    }
    head.extend(rest);
    Ok(head)
}
