//! Command-line value parsing and output plumbing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use tgeo_core::{PairVector, Point, WorldFunctionSpec};

#[derive(Debug)]
pub enum CliError {
    Core(tgeo_core::Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(tgeo_core::Error::NoSolutionFound { .. }) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<tgeo_core::Error> for CliError {
    fn from(e: tgeo_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `"1,2,3"` (brackets optional).
pub fn parse_coords(s: &str) -> Result<Vec<f64>, String> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    t.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number {x:?}: {e}")))
        .collect()
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    Point::try_new(parse_coords(s)?).map_err(|e| e.to_string())
}

/// Points separated by `;`: `"0,0;1,0;0,1"`.
pub fn parse_points(s: &str) -> Result<Vec<Point>, String> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_point).collect()
}

/// `"origin;end"`.
pub fn parse_vector(s: &str) -> Result<PairVector, String> {
    let pts = parse_points(s)?;
    match <[Point; 2]>::try_from(pts) {
        Ok([a, b]) => Ok(PairVector { origin: a, end: b }),
        Err(v) => Err(format!("a vector needs 2 points, got {}", v.len())),
    }
}

/// Shorthand `kind:n[:d]`, inline JSON, or `@file.json`.
pub fn parse_spec(s: &str) -> Result<WorldFunctionSpec, String> {
    let t = s.trim();
    if let Some(path) = t.strip_prefix('@') {
        let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        return from_json(&text).map_err(|e| e.to_string());
    }
    if t.starts_with('{') {
        return from_json(t).map_err(|e| e.to_string());
    }
    t.parse().map_err(|e: tgeo_core::Error| e.to_string())
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid JSON input: {e}")))
}

/// A path, `-` for standard input, or inline JSON starting with `{`.
pub fn read_input(src: &str) -> CliResult<String> {
    let t = src.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(src.to_string());
    }
    if src == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        return Ok(s);
    }
    fs::read_to_string(src).map_err(|e| CliError::Io(format!("{src}: {e}")))
}

pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write_text(&self, text: &str) -> CliResult<()> {
        write_to(self.path.as_deref(), text)
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        self.write_text(&to_json(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_to(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                // reader went away (e.g. piped into `head`)
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_coords("[1, 2.5,-3]").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_coords("1,x").is_err());
        assert_eq!(parse_points("0,0;1,0;").unwrap().len(), 2);
        assert!(parse_vector("0,0").is_err());
        assert_eq!(parse_spec("d:4:0.01").unwrap(), WorldFunctionSpec::distorted(4, 0.01));
        assert_eq!(
            parse_spec(r#"{"kind":"euclidean","n":3}"#).unwrap(),
            WorldFunctionSpec::euclidean(3)
        );
        assert_eq!(num(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(num(0.51), "0.51");
    }
}
