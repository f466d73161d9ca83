//! Flat TOML parameters: preset defaults, overlaid by a config file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

pub const CONFIG_SCHEMA: &str = "sgch.config/1";

/// Parameter overrides shared by every preset. A flag whose key the preset
/// does not know is a usage error.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Settings {
    /// Seed, or seed base of an ensemble.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    /// Power `k` of the nonlinearity.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Sobolev index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    /// Frequencies, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u32>>,
    /// Grid points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Half length `L` of the torus `[-L, L)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_points: Option<usize>,
    /// Noise exponent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Noise amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    /// Exit radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Perturbation family: identity, sine or high-frequency.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    /// TOML file of parameters.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output root; results go to `<out>/<preset>/`.
    #[arg(long, env = "SGCH_OUT_DIR", default_value = "sgch-out")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

fn overlay(base: &mut Table, top: Table) {
    for (key, value) in top {
        let value = match (base.get(&key), value) {
            // a one-element list flag may set a scalar key
            (Some(old), Value::Array(mut items)) if !old.is_array() && items.len() == 1 => items.remove(0),
            (_, value) => value,
        };
        base.insert(key, value);
    }
}

fn read_file(path: &Path, preset: &str) -> Result<Table, ConfigError> {
    let malformed = |message: String| ConfigError::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| malformed(e.to_string()))?;
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| malformed(e.message().to_string()))?;
    match table.remove("schema") {
        None => {}
        Some(Value::String(s)) if s == CONFIG_SCHEMA => {}
        Some(other) => {
            return Err(malformed(format!(
                "unsupported schema {other}, expected \"{CONFIG_SCHEMA}\""
            )))
        }
    }
    match table.remove("preset") {
        None => {}
        Some(Value::String(s)) if s == preset => {}
        Some(other) => {
            return Err(ConfigError::Usage(format!(
                "config file {} is for preset {other}, not \"{preset}\"",
                path.display()
            )))
        }
    }
    Ok(table)
}

/// Resolves the parameters of `preset` from its defaults, the optional
/// config file and the flags.
pub fn resolve<P>(preset: &str, settings: &Settings) -> Result<P, ConfigError>
where
    P: Serialize + DeserializeOwned + Default,
{
    let mut table = Table::try_from(P::default()).map_err(|e| ConfigError::Usage(e.to_string()))?;
    if let Some(path) = &settings.config {
        overlay(&mut table, read_file(path, preset)?);
        P::deserialize(table.clone()).map_err(|e| ConfigError::Malformed {
            path: path.clone(),
            message: e.message().to_string(),
        })?;
    }
    let flags = Table::try_from(settings).map_err(|e| ConfigError::Usage(e.to_string()))?;
    overlay(&mut table, flags);
    P::deserialize(table).map_err(|e| ConfigError::Usage(format!("preset {preset}: {}", e.message())))
}

/// Config file reproducing a run when passed back through `--config`.
pub fn echo<P: Serialize>(preset: &str, params: &P) -> Result<String, toml::ser::Error> {
    let body = toml::to_string(params)?;
    Ok(format!("schema = \"{CONFIG_SCHEMA}\"\npreset = \"{preset}\"\n{body}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        dt: f64,
        b: f64,
        n: Vec<u32>,
    }

    #[test]
    fn flags_override_defaults() {
        let settings = Settings {
            dt: Some(0.5),
            b: Some(vec![2.0]),
            n: Some(vec![1, 2]),
            ..Default::default()
        };
        let p: Demo = resolve("demo", &settings).unwrap();
        assert_eq!(
            p,
            Demo {
                dt: 0.5,
                b: 2.0,
                n: vec![1, 2]
            }
        );
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let settings = Settings {
            radius: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(resolve::<Demo>("demo", &settings), Err(ConfigError::Usage(_))));
    }

    #[test]
    fn echo_round_trips() {
        let p = Demo {
            dt: 0.1,
            b: 1.0 / 3.0,
            n: vec![4],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, echo("demo", &p).unwrap()).unwrap();
        let settings = Settings {
            config: Some(path),
            ..Default::default()
        };
        assert_eq!(resolve::<Demo>("demo", &settings).unwrap(), p);
    }
}
