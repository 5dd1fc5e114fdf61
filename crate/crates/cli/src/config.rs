//! Flat `key = value` configuration files. Keys are long flag names; the
//! file's entries are placed before the command-line flags so that the
//! latter win.

use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut out = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value', got '{}'", i + 1, raw.trim()))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key '{key}'", i + 1));
        }
        if key == "command" {
            out.command = Some(value);
        } else if key == "config" {
            return Err(format!("line {}: config files cannot include other config files", i + 1));
        } else {
            out.entries.push((key, value));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Removes `--config PATH` / `--config=PATH` from `args`.
pub fn take_config_flag(args: &mut Vec<String>) -> Result<Option<String>, String> {
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--" {
            break;
        }
        if let Some(p) = args[i].strip_prefix("--config=") {
            found = Some(p.to_string());
            args.remove(i);
        } else if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file path".into());
            }
            found = Some(args.remove(i + 1));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

/// Inserts the file's flags right after the subcommand name.
pub fn splice(args: &mut Vec<String>, file: &ConfigFile, commands: &[&str]) -> Result<(), String> {
    let at = match args.iter().skip(1).position(|a| commands.contains(&a.as_str())) {
        Some(p) => p + 2,
        None => match &file.command {
            Some(c) => {
                args.insert(1, c.clone());
                2
            }
            None => return Ok(()),
        },
    };
    let mut flags = Vec::new();
    for (k, v) in &file.entries {
        match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" => flags.push(format!("--{k}")),
            "false" | "no" | "off" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    args.splice(at..at, flags);
    Ok(())
}
