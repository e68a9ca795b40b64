//! Service configuration: one JSON file plus `FOGTRACE_*` environment overrides.
//!
//! | variable                     | field                          |
//! |------------------------------|--------------------------------|
//! | `FOGTRACE_PORT`              | `port`                         |
//! | `FOGTRACE_THETA`             | `theta`                        |
//! | `FOGTRACE_TAU0_MINUTES`      | `tau0_minutes`                 |
//! | `FOGTRACE_NU0_DBM`           | `nu0_dbm`                      |
//! | `FOGTRACE_BANDS`             | `bands` as `low,avg,high`      |
//! | `FOGTRACE_SINK_URL`          | `sink` (switches to HTTP)      |
//! | `FOGTRACE_CYCLE_INTERVAL_S`  | `cycle_interval_s` (0 = off)   |

use std::path::{Path, PathBuf};

use fogtrace_core::{GuidanceTable, RiskBands, Thresholds};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::sink::{CloudSink, FileSink, HttpSink};
use crate::store::StoreSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SinkConfig {
    File { path: PathBuf },
    Http { url: String },
}

impl SinkConfig {
    pub fn build(&self) -> Result<Box<dyn CloudSink>, ServiceError> {
        Ok(match self {
            SinkConfig::File { path } => Box::new(FileSink::new(path.clone())),
            SinkConfig::Http { url } => Box::new(HttpSink::new(url.clone())?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    pub theta: f64,
    pub tau0_minutes: f64,
    pub nu0_dbm: f64,
    pub bands: RiskBands,
    pub sink: SinkConfig,
    pub cycle_interval_s: u64,
    pub snapshot_path: Option<PathBuf>,
    pub guidance_path: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            theta: 0.9,
            tau0_minutes: 2.0,
            nu0_dbm: -0.55,
            bands: RiskBands::default(),
            sink: SinkConfig::File {
                path: PathBuf::from("cloud_reports.ndjson"),
            },
            cycle_interval_s: 60,
            snapshot_path: None,
            guidance_path: None,
        }
    }
}

fn parse_env<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ServiceError> {
    value
        .trim()
        .parse()
        .map_err(|_| ServiceError::Config(format!("{key}={value:?} cannot be parsed")))
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies overrides from `lookup` (normally `std::env::var`).
    pub fn apply_env<F>(&mut self, lookup: F) -> Result<(), ServiceError>
    where
        F: Fn(&str) -> Option<String>,
    {
        if let Some(v) = lookup("FOGTRACE_PORT") {
            self.port = parse_env("FOGTRACE_PORT", &v)?;
        }
        if let Some(v) = lookup("FOGTRACE_THETA") {
            self.theta = parse_env("FOGTRACE_THETA", &v)?;
        }
        if let Some(v) = lookup("FOGTRACE_TAU0_MINUTES") {
            self.tau0_minutes = parse_env("FOGTRACE_TAU0_MINUTES", &v)?;
        }
        if let Some(v) = lookup("FOGTRACE_NU0_DBM") {
            self.nu0_dbm = parse_env("FOGTRACE_NU0_DBM", &v)?;
        }
        if let Some(v) = lookup("FOGTRACE_BANDS") {
            let parts: Vec<f64> = v
                .split(',')
                .map(|p| parse_env("FOGTRACE_BANDS", p))
                .collect::<Result<_, _>>()?;
            let [lo, avg, hi] = parts[..] else {
                return Err(ServiceError::Config(
                    "FOGTRACE_BANDS needs three comma-separated values".into(),
                ));
            };
            self.bands = RiskBands::new(lo, avg, hi)?;
        }
        if let Some(v) = lookup("FOGTRACE_SINK_URL") {
            self.sink = SinkConfig::Http { url: v };
        }
        if let Some(v) = lookup("FOGTRACE_CYCLE_INTERVAL_S") {
            self.cycle_interval_s = parse_env("FOGTRACE_CYCLE_INTERVAL_S", &v)?;
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Result<Thresholds, ServiceError> {
        Ok(Thresholds::from_minutes(
            self.theta,
            self.tau0_minutes,
            self.nu0_dbm,
        )?)
    }

    /// Validates the whole configuration and resolves store settings.
    pub fn store_settings(&self) -> Result<StoreSettings, ServiceError> {
        let thresholds = self.thresholds()?;
        self.bands.validate()?;
        let guidance = match &self.guidance_path {
            Some(path) => GuidanceTable::load(path)?,
            None => GuidanceTable::default(),
        };
        Ok(StoreSettings {
            thresholds,
            bands: self.bands,
            guidance,
        })
    }
}
