//! Flat `key = value` configuration files. Keys are the long flag names.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: &[&str] = &[
    "window",
    "res",
    "qmax",
    "budget",
    "out",
    "workers",
    "seed",
    "synthetic",
    "no-timestamp",
    "k",
    "z",
    "all-roots",
    "inside-margin",
    "reject-threshold",
    "grow-threshold",
    "boundary-tol",
];

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax(String),
}

/// Parses `text`; `#` starts a comment, blank lines are skipped, and `_` in
/// keys is read as `-`.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key '{key}'", no + 1));
        }
        out.insert(key, value.trim().to_owned());
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    parse(&text).map_err(ConfigError::Syntax)
}

pub fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("resolution '{s}' is not of the form WxH"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in '{s}'"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err(format!("resolution '{s}' has no pixels"));
    }
    Ok((w, h))
}

pub fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split([' ', ',', '\t'])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} numbers in '{s}'"))
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("'{s}' is not a boolean")),
    }
}
