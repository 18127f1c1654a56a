//! Flat `key = value` configuration files.
//!
//! Recognized keys: `mu`, `r`, `sigma`, `lambda`, `c`, `x`, `M`, `mode`.
//! Blank lines and `#` comments are ignored. Command line flags override
//! anything read from a file.

use ruinkit_core::NegativeWealthMode;

use crate::error::CliError;

/// Values read from a config file; `None` where the file is silent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub mu: Option<f64>,
    pub r: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub x: Option<f64>,
    pub barrier: Option<f64>,
    pub mode: Option<NegativeWealthMode>,
}

/// Parses the text of a config file.
pub fn parse(text: &str) -> Result<FileConfig, CliError> {
    let mut out = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Spec(format!("config line {}: expected key = value", idx + 1)))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "mode" => {
                out.mode = Some(parse_mode(value)?);
            }
            "mu" | "r" | "sigma" | "lambda" | "c" | "x" | "M" => {
                let num: f64 = value.parse().map_err(|_| {
                    CliError::Spec(format!("config key {key}: `{value}` is not a number"))
                })?;
                match key {
                    "mu" => out.mu = Some(num),
                    "r" => out.r = Some(num),
                    "sigma" => out.sigma = Some(num),
                    "lambda" => out.lambda = Some(num),
                    "c" => out.c = Some(num),
                    "x" => out.x = Some(num),
                    _ => out.barrier = Some(num),
                }
            }
            _ => {
                return Err(CliError::Spec(format!(
                    "config line {}: unrecognized key `{key}`",
                    idx + 1
                )));
            }
        }
    }
    Ok(out)
}

/// Parses a negative-wealth mode name as used both in config files and on
/// the command line.
pub fn parse_mode(value: &str) -> Result<NegativeWealthMode, CliError> {
    match value {
        "welfare" => Ok(NegativeWealthMode::Welfare),
        "borrow" => Ok(NegativeWealthMode::BorrowForConsumption),
        other => Err(CliError::Spec(format!(
            "mode must be `welfare` or `borrow`, got `{other}`"
        ))),
    }
}

/// Reads and parses the file at `path`.
pub fn load(path: &std::path::Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}
