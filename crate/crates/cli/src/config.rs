//! Shared flags, `key=value` config files, and map/grid construction.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Args;
use conley_core::{Domain, EdgeMode, Grid, MapError, MapInstance};

use crate::CliError;

pub const DEFAULT_ALPHA: f64 = 0.618034;
pub const DEFAULT_AMPLITUDE: f64 = 0.1;

/// Flags that take no value; in a config file they are written `key=true`.
const SWITCHES: &[&str] = &["connectivity", "timings", "require-connected"];

/// Splices the `key=value` lines of a `--config` file in front of the
/// command-line flags, so that flags given explicitly win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            return Err(CliError::Config(format!(
                "{}: nested config files are not supported",
                path.display()
            )));
        }
        if SWITCHES.contains(&key) {
            match value {
                "true" | "yes" | "1" => extra.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "{}:{}: {key} expects true or false",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        } else {
            extra.push(OsString::from(format!("--{key}")));
            extra.push(OsString::from(value));
        }
    }
    // program name and subcommand stay in front
    let split = args.len().min(2);
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

/// A decimal number or a ratio such as `2/1024`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("invalid number `{s}`"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

pub fn parse_mode(s: &str) -> Result<EdgeMode, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// identity, rotation, northsouth, cat, or `;`-separated expressions in x1, x2, ...
    #[arg(long)]
    pub map: String,
    /// Rotation angle (rotation only).
    #[arg(long, value_parser = parse_number)]
    pub alpha: Option<f64>,
    /// Amplitude (northsouth only).
    #[arg(long, value_parser = parse_number)]
    pub a: Option<f64>,
    /// Dimension of the unit torus for identity and expression maps.
    #[arg(long)]
    pub dim: Option<usize>,
}

impl MapArgs {
    pub fn build(&self) -> Result<MapInstance, CliError> {
        let name = self.map.trim();
        let only =
            |flag: &str, owner: &str| CliError::Config(format!("--{flag} applies only to --map {owner}"));
        if self.alpha.is_some() && name != "rotation" {
            return Err(only("alpha", "rotation"));
        }
        if self.a.is_some() && name != "northsouth" {
            return Err(only("a", "northsouth"));
        }
        let fixed_dim = |d: usize| match self.dim {
            Some(k) if k != d => Err(CliError::Config(format!(
                "--map {name} is {d}-dimensional, got --dim {k}"
            ))),
            _ => Ok(()),
        };
        let torus = || match self.dim.unwrap_or(1) {
            0 => Err(CliError::Config("--dim must be at least 1".into())),
            d => Ok(Domain::torus(d)),
        };
        let map = match name {
            "identity" => Ok(MapInstance::identity(torus()?)),
            "rotation" => {
                fixed_dim(1)?;
                MapInstance::rotation(self.alpha.unwrap_or(DEFAULT_ALPHA))
            }
            "northsouth" => {
                fixed_dim(1)?;
                MapInstance::northsouth(self.a.unwrap_or(DEFAULT_AMPLITUDE))
            }
            "cat" => {
                fixed_dim(2)?;
                Ok(MapInstance::cat())
            }
            text => MapInstance::custom(text, torus()?),
        };
        map.map_err(|e| match e {
            MapError::Parse(p) => CliError::Config(format!("parse error in --map at {p}")),
            other => CliError::Config(other.to_string()),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Subdivisions: one count for every axis (`1024`) or one per axis (`64x64`).
    /// Defaults to 1024 on a circle and 64 per axis otherwise.
    #[arg(long)]
    pub grid: Option<String>,
    /// Edge rule: center or outer.
    #[arg(long, default_value = "center", value_parser = parse_mode)]
    pub mode: EdgeMode,
}

impl GridArgs {
    pub fn build(&self, domain: &Domain) -> Result<Grid, CliError> {
        let dim = domain.dim();
        let subdivisions = match &self.grid {
            None => vec![if dim == 1 { 1024 } else { 64 }; dim],
            Some(text) => {
                let parts: Vec<&str> = text.split(['x', 'X']).collect();
                let counts = parts
                    .iter()
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Config(format!("invalid --grid `{text}`")))?;
                match counts.len() {
                    1 => vec![counts[0]; dim],
                    n if n == dim => counts,
                    n => {
                        return Err(CliError::Config(format!(
                            "--grid `{text}` has {n} axes, the map has {dim}"
                        )))
                    }
                }
            }
        };
        if subdivisions.iter().any(|&n| n < 2) {
            return Err(CliError::Config(
                "--grid needs at least 2 subdivisions per axis".into(),
            ));
        }
        Grid::new(domain.clone(), subdivisions).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// File of `key=value` lines mirroring the long flags; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}
