//! Option resolution: command-line flags override an optional `key = value`
//! config file; keys mirror the long flag names. Defaults exist only for
//! plumbing parameters, never for scientifically meaningful ones (window and
//! peak factor must be given explicitly, as must the generator seed).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Parsed config file contents. Empty when no file was given.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config file {} line {}: expected `key = value`, found `{line}`",
                    path.display(),
                    idx + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")),
        }
    }
}

/// Flag value if present, else config value, else `None`.
pub fn pick<T>(flag: Option<T>, config: &FileConfig, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

/// Boolean switch: the flag turns it on; otherwise the config may.
pub fn pick_switch(flag: bool, config: &FileConfig, key: &str) -> Result<bool> {
    if flag {
        return Ok(true);
    }
    Ok(config.get::<bool>(key)?.unwrap_or(false))
}

/// Output formats requested on the command line or in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv, svg or json)")),
        }
    }
}

/// Resolve the `--format` set; defaults to csv and json.
pub fn resolve_formats(
    flag: &[String],
    config: &FileConfig,
) -> Result<std::collections::BTreeSet<Format>> {
    let tokens: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(raw) = config.raw("format") {
        raw.split(',').map(|t| t.trim().to_string()).collect()
    } else {
        vec!["csv".into(), "json".into()]
    };
    let mut set = std::collections::BTreeSet::new();
    for token in &tokens {
        set.insert(token.parse::<Format>().map_err(|e| anyhow::anyhow!(e))?);
    }
    if set.is_empty() {
        bail!("at least one output format is required");
    }
    Ok(set)
}

/// Resolve `--input`, which has no default.
pub fn resolve_input(flag: Option<PathBuf>, config: &FileConfig) -> Result<PathBuf> {
    match pick(flag, config, "input")? {
        Some(path) => Ok(path),
        None => bail!("--input is required (flag or config file)"),
    }
}

/// Resolve `--out`; defaults to the current directory.
pub fn resolve_out(flag: Option<PathBuf>, config: &FileConfig) -> Result<PathBuf> {
    Ok(pick(flag, config, "out")?.unwrap_or_else(|| PathBuf::from(".")))
}
