//! Flag structs and the optional JSON config file.
//!
//! The config file is a JSON object whose keys mirror the long flags
//! (`"t-max": 6.28`). Keys at the top level apply to every subcommand; an
//! object under a subcommand's name (`"ray-scan": {...}`) overrides them for
//! that subcommand. Flags given on the command line override both.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::{CliError, CliResult};

const SECTIONS: [&str; 5] = ["sr-geodesic", "riem-geodesic", "connect", "ray-scan", "distance-probe"];

pub fn load_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Validation("config file must hold a JSON object".into())),
        Err(e) => Err(CliError::Validation(format!("invalid config {}: {e}", path.display()))),
    }
}

fn parse<T: DeserializeOwned>(v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Validation(format!("invalid config value: {e}")))
}

pub trait Overlay: Sized + DeserializeOwned + Default {
    /// Fields set in `self` win over those in `base`.
    fn merge(self, base: Self) -> Self;

    fn overlay(self, section: Option<Value>, config: &Option<Map<String, Value>>) -> CliResult<Self> {
        let Some(config) = config else {
            return Ok(self);
        };
        let shared: Map<String, Value> = config
            .iter()
            .filter(|(k, _)| !SECTIONS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut base: Self = parse(Value::Object(shared))?;
        if let Some(section) = section {
            base = parse::<Self>(section)?.merge(base);
        }
        Ok(self.merge(base))
    }
}

macro_rules! merge_fields {
    ($t:ty { $($field:ident),* } $(flags { $($flag:ident),* })?) => {
        impl Overlay for $t {
            fn merge(self, base: Self) -> Self {
                Self {
                    $($field: self.$field.or(base.$field),)*
                    $($($flag: self.$flag || base.$flag,)*)?
                }
            }
        }
    };
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SrArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Amplitudes r_i with sum r_i^2 = 1, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Option<Vec<f64>>,
    /// Initial phases of the controls, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    #[arg(long)]
    #[serde(alias = "t_max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also integrate Hamilton's equations and add a deviation column.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(SrArgs { n, r, theta, zeta, t_max, dt, out } flags { numeric });

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct RiemArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Vertical velocity component, in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rho: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Option<Vec<f64>>,
    /// Initial X_i components of the velocity (alternative to --rho/--phi).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub u0: Option<Vec<f64>>,
    /// Initial Y_i components of the velocity.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub v0: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(alias = "t_max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(RiemArgs { n, gamma, rho, phi, u0, v0, t_max, dt, out });

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ConnectArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Target point x1,y1,...,xn,yn,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(ConnectArgs { n, target, tol, out });

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct RayScanArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Values of gamma to scan, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(alias = "gamma_grid")]
    pub gamma_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(alias = "t_step")]
    pub t_step: Option<f64>,
    /// Number of initial horizontal phases per gamma.
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(RayScanArgs { n, gamma_grid, horizon, t_step, directions, out });

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DistanceArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Height Z of the target (0, ..., 0, Z).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(DistanceArgs { n, z, out });
