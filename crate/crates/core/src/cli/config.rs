//! Flat key-value run configs with sectioned blocks.
//!
//! ```text
//! schema = 1
//! seed = 7
//!
//! [grid]
//! rho_l = linspace(0,1,5)
//! rho_r = 0.25,0.5,0.75,1.0
//! ```
//!
//! Values are scalars, comma lists, or `linspace(a,b,n)`. Keys a command
//! does not recognize are rejected after parsing, so typos fail loudly.

use std::cell::RefCell;
use std::collections::HashSet;
use std::path::Path;

use super::{CliError, Result};

const SCHEMA_VERSION: &str = "1";

#[derive(Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug)]
pub struct ConfigFile {
    entries: Vec<Entry>,
    used: RefCell<HashSet<usize>>,
}

impl ConfigFile {
    /// Parse config text; a top-level `schema = 1` is required.
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!("line {}: unterminated section header", no + 1))
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", no + 1))
            })?;
            entries.push(Entry {
                section: section.clone(),
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                line: no + 1,
            });
        }
        let cfg = ConfigFile { entries, used: RefCell::new(HashSet::new()) };
        match cfg.get("", "schema")? {
            Some(v) if v == SCHEMA_VERSION => Ok(cfg),
            Some(v) => Err(CliError::Config(format!(
                "unsupported schema version {v:?} (expected {SCHEMA_VERSION})"
            ))),
            None => Err(CliError::Config("missing top-level `schema = 1`".into())),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ConfigFile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        Self::parse(&text)
    }

    /// Empty config (all defaults).
    pub fn empty() -> ConfigFile {
        Self::parse("schema = 1\n").expect("builtin empty config")
    }

    fn get(&self, section: &str, key: &str) -> Result<Option<&str>> {
        let mut found = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.section == section && e.key == key {
                if found.is_some() {
                    return Err(CliError::Config(format!(
                        "duplicate key {key:?} in section {section:?} (line {})",
                        e.line
                    )));
                }
                self.used.borrow_mut().insert(i);
                found = Some(e.value.as_str());
            }
        }
        Ok(found)
    }

    pub fn get_str(&self, section: &str, key: &str, default: &str) -> Result<String> {
        Ok(self.get(section, key)?.unwrap_or(default).to_string())
    }

    pub fn get_opt_str(&self, section: &str, key: &str) -> Result<Option<String>> {
        Ok(self.get(section, key)?.map(str::to_string))
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key)? {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Config(format!("{section}.{key}: not a number: {v:?}"))
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key)? {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Config(format!("{section}.{key}: not an integer: {v:?}"))
            }),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key)? {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Config(format!("{section}.{key}: not an integer: {v:?}"))
            }),
        }
    }

    /// Comma list or `linspace(a,b,n)`.
    pub fn get_f64_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(section, key)? {
            None => Ok(default.to_vec()),
            Some(v) => parse_f64_list(v).map_err(|msg| {
                CliError::Config(format!("{section}.{key}: {msg}"))
            }),
        }
    }

    /// Fail if any key was never consumed by the command's schema.
    pub fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        let mut unknown: Vec<String> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(i, _)| !used.contains(i))
            .map(|(_, e)| {
                if e.section.is_empty() {
                    format!("{} (line {})", e.key, e.line)
                } else {
                    format!("{}.{} (line {})", e.section, e.key, e.line)
                }
            })
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            unknown.sort();
            Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

fn parse_f64_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    let v = value.trim();
    if let Some(body) = v.strip_prefix("linspace(").and_then(|b| b.strip_suffix(')')) {
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("linspace needs (start,end,count), got {v:?}"));
        }
        let start: f64 = parts[0].parse().map_err(|_| format!("bad start {:?}", parts[0]))?;
        let end: f64 = parts[1].parse().map_err(|_| format!("bad end {:?}", parts[1]))?;
        let count: usize = parts[2].parse().map_err(|_| format!("bad count {:?}", parts[2]))?;
        if count < 2 {
            return Err("linspace count must be at least 2".into());
        }
        let step = (end - start) / (count - 1) as f64;
        return Ok((0..count)
            .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
            .collect());
    }
    v.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {:?}", tok.trim()))
        })
        .collect()
}
