//! Flat `key = value` configuration files.
//!
//! A `--config PATH` argument is replaced by the flags listed in the file,
//! placed directly after the subcommand so that flags given on the command
//! line take precedence. `true` enables a switch, `false` omits it.

use std::ffi::OsString;

use crate::error::CliError;

/// Parses the file contents into `--key=value` arguments. Blank lines,
/// `#` / `;` comments and `[section]` headers are ignored.
pub fn parse_config(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key", lineno + 1)));
        }
        match value.trim() {
            "true" => args.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => args.push(OsString::from(format!("--{key}={v}"))),
        }
    }
    Ok(args)
}

/// Expands every `--config PATH` / `--config=PATH` in `argv`.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut paths = Vec::new();
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let path = it.next().ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            paths.push(path);
        } else if let Some(path) = s.strip_prefix("--config=") {
            paths.push(OsString::from(path));
        } else {
            rest.push(arg);
        }
    }
    if paths.is_empty() {
        return Ok(rest);
    }
    let mut injected = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
        injected.extend(parse_config(&text)?);
    }
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
