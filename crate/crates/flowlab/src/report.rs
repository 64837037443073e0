//! JSON and CSV emission. JSON floats use the shortest representation that
//! round-trips; CSV floats carry 17 significant digits. Wall-clock timings
//! live under `timing` only, so reruns differ nowhere else.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const SCHEMA: &str = "flowlab-report/1";

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub pass: bool,
    pub config: &'a RunConfig,
    pub result: &'a T,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::Io)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("serializing {name}: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// A float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of pre-formatted cells; cells containing commas or quotes are quoted.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut text = String::new();
    let line = |cells: Vec<String>| cells.join(",");
    text.push_str(&line(header.iter().map(|h| quote(h)).collect()));
    text.push('\n');
    for r in rows {
        let _ = writeln!(text, "{}", line(r.iter().map(|c| quote(c)).collect()));
    }
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}
