//! Config files (TOML) merged with command-line flags.

use abspectra::geometry::DomainSpec;
use abspectra::Point;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use std::f64::consts::PI;
use std::path::Path;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    MissingInput(String),
    Compute(abspectra::Error),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::MissingInput(_) => 4,
            CliError::Compute(_) => 5,
            CliError::Output(_) => 6,
        }
    }

    pub fn record(&self) -> Value {
        let (kind, code, msg) = match self {
            CliError::Usage(m) => ("usage", "usage", m.clone()),
            CliError::Config(m) => ("config", "malformed_config", m.clone()),
            CliError::MissingInput(m) => ("missing_input", "missing_input", m.clone()),
            CliError::Compute(e) => ("compute", e.code(), e.to_string()),
            CliError::Output(m) => ("output", "output", m.clone()),
        };
        serde_json::json!({ "error": kind, "code": code, "message": msg, "exit_code": self.exit_code() })
    }
}

impl From<abspectra::Error> for CliError {
    fn from(e: abspectra::Error) -> Self {
        CliError::Compute(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
}

/// Resolve a config: defaults, then the TOML file, then the flags that were given.
pub fn resolve<C: DeserializeOwned + Serialize + Default, F: Serialize>(
    file: Option<&Path>,
    flags: &F,
) -> CliResult<C> {
    let mut base = serde_json::to_value(C::default()).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(p) = file {
        let text = read_input(p)?;
        let t: toml::Value = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let v = serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))?;
        overlay(&mut base, v);
    }
    let f = serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))?;
    overlay(&mut base, f);
    serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))
}

fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                if v.is_null() {
                    continue;
                }
                match b.get_mut(&k) {
                    // Tagged enums are replaced whole rather than merged.
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => overlay(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// A real number, also accepting `pi`, `pi/4`, `2pi/3`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    if let Some(i) = t.find("pi") {
        let num = &t[..i];
        let rest = &t[i + 2..];
        let m: f64 = if num.is_empty() { 1.0 } else { num.trim_end_matches('*').parse().map_err(|_| format!("bad number {s}"))? };
        let d: f64 = if rest.is_empty() {
            1.0
        } else {
            rest.strip_prefix('/').ok_or(format!("bad number {s}"))?.parse().map_err(|_| format!("bad number {s}"))?
        };
        return Ok(m * PI / d);
    }
    Err(format!("bad number {s}"))
}

pub fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v = parse_list(s)?;
    match v[..] {
        [x, y] => Ok(Point::new(x, y)),
        _ => Err(format!("expected two coordinates, got {s}")),
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// `--domain` with its size flags.
#[derive(clap::Args, Debug, Default, Clone)]
pub struct DomainFlags {
    /// disk, half_disk, sector or rectangle
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long, value_parser = parse_real)]
    pub radius: Option<f64>,
    /// Opening of a sector (accepts pi/4)
    #[arg(long, value_parser = parse_real)]
    pub angle: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub width: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub height: Option<f64>,
}

impl DomainFlags {
    pub fn spec(&self) -> CliResult<Option<DomainSpec>> {
        let Some(name) = &self.domain else {
            return Ok(None);
        };
        let r = self.radius.unwrap_or(1.0);
        let d = match name.as_str() {
            "disk" => DomainSpec::disk(r),
            "half_disk" | "halfdisk" => DomainSpec::half_disk(r),
            "sector" => DomainSpec::sector(self.angle.unwrap_or(PI / 4.0), r),
            "rectangle" => DomainSpec::rectangle(self.width.unwrap_or(1.0), self.height.unwrap_or(1.0)),
            other => return Err(CliError::Usage(format!("unknown domain {other}"))),
        };
        Ok(Some(d))
    }
}
