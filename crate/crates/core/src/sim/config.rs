use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{Probability, Thresholds};

/// Closed interval `[min, max]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    pub const fn new(min: f64, max: f64) -> Self {
        UniformRange { min, max }
    }

    fn validate(&self, what: &str) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(ConfigError::invalid(format!(
                "{what} bounds must be finite"
            )));
        }
        if self.min > self.max {
            return Err(ConfigError::invalid(format!(
                "{what} range is empty: min {} > max {}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Contact durations drawn for sampled meetups, seconds.
pub const DEFAULT_CONTACT_TIME_S: UniformRange = UniformRange::new(0.0, 600.0);
/// Signal strengths drawn for sampled meetups, dBm. Brackets both -0.55 and -0.50 thresholds.
pub const DEFAULT_SIGNAL_DBM: UniformRange = UniformRange::new(-0.6, 0.0);
pub const DEFAULT_POPULATION: u32 = 10_000;
pub const DEFAULT_DAYS: u32 = 15;
pub const DEFAULT_SEED: u64 = 42;

/// Every knob of one simulation run. Contact times are held in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigFile", into = "ConfigFile")]
pub struct SimulationConfig {
    pub population: u32,
    pub days: u32,
    pub thresholds: Thresholds,
    pub meetups_per_day: u32,
    pub initial_infected: u32,
    /// Per-day probability that a not-yet-infected user develops symptoms.
    pub initial_symptomatic_rate: f64,
    pub contact_time_s: UniformRange,
    pub signal_dbm: UniformRange,
    pub rng_seed: u64,
    /// Probability that an alerted user skips a meetup with an infected peer.
    pub alert_compliance: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        TableCase::get(1).expect("case 1 exists").config(0)
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()?;
        if self.population == 0 {
            return Err(ConfigError::invalid("population must be positive"));
        }
        if self.meetups_per_day == 0 {
            return Err(ConfigError::invalid("meetups_per_day must be positive"));
        }
        if self.initial_infected >= self.population {
            return Err(ConfigError::invalid(format!(
                "initial_infected ({}) must be smaller than population ({})",
                self.initial_infected, self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.initial_symptomatic_rate) {
            return Err(ConfigError::invalid(
                "initial_symptomatic_rate must lie in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.alert_compliance) {
            return Err(ConfigError::invalid("alert_compliance must lie in [0, 1]"));
        }
        self.contact_time_s.validate("contact time")?;
        if self.contact_time_s.min < 0.0 {
            return Err(ConfigError::invalid("contact time minimum must be >= 0"));
        }
        self.signal_dbm.validate("signal strength")?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// On-disk layout. The contact-time threshold is written in minutes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_population")]
    population: u32,
    #[serde(default = "default_days")]
    days: u32,
    theta: f64,
    tau0_minutes: f64,
    nu0_dbm: f64,
    meetups_per_day: u32,
    #[serde(default)]
    initial_infected: u32,
    #[serde(default)]
    initial_symptomatic_rate: f64,
    #[serde(default = "default_contact_time")]
    contact_time_s: UniformRange,
    #[serde(default = "default_signal")]
    signal_dbm: UniformRange,
    #[serde(default = "default_seed")]
    rng_seed: u64,
    #[serde(default)]
    alert_compliance: f64,
}

fn default_population() -> u32 {
    DEFAULT_POPULATION
}
fn default_days() -> u32 {
    DEFAULT_DAYS
}
fn default_contact_time() -> UniformRange {
    DEFAULT_CONTACT_TIME_S
}
fn default_signal() -> UniformRange {
    DEFAULT_SIGNAL_DBM
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl TryFrom<ConfigFile> for SimulationConfig {
    type Error = ConfigError;

    fn try_from(f: ConfigFile) -> Result<Self, Self::Error> {
        let config = SimulationConfig {
            population: f.population,
            days: f.days,
            thresholds: Thresholds::from_minutes(f.theta, f.tau0_minutes, f.nu0_dbm)?,
            meetups_per_day: f.meetups_per_day,
            initial_infected: f.initial_infected,
            initial_symptomatic_rate: f.initial_symptomatic_rate,
            contact_time_s: f.contact_time_s,
            signal_dbm: f.signal_dbm,
            rng_seed: f.rng_seed,
            alert_compliance: f.alert_compliance,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<SimulationConfig> for ConfigFile {
    fn from(c: SimulationConfig) -> Self {
        ConfigFile {
            population: c.population,
            days: c.days,
            theta: c.thresholds.theta.get(),
            tau0_minutes: c.thresholds.tau0_s / 60.0,
            nu0_dbm: c.thresholds.nu0_dbm,
            meetups_per_day: c.meetups_per_day,
            initial_infected: c.initial_infected,
            initial_symptomatic_rate: c.initial_symptomatic_rate,
            contact_time_s: c.contact_time_s,
            signal_dbm: c.signal_dbm,
            rng_seed: c.rng_seed,
            alert_compliance: c.alert_compliance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Pinal,
    Maricopa,
}

impl Dataset {
    pub fn label(self) -> &'static str {
        match self {
            Dataset::Pinal => "pinal",
            Dataset::Maricopa => "maricopa",
        }
    }

    /// Reported new cases on the first day of the comparison window.
    pub fn first_day_cases(self) -> u32 {
        match self {
            Dataset::Pinal => 10,
            Dataset::Maricopa => 8,
        }
    }
}

/// One row of the eight-case experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCase {
    pub number: u8,
    pub theta: f64,
    pub tau0_minutes: f64,
    pub nu0_dbm: f64,
    pub meetups: [u32; 2],
    pub dataset: Dataset,
}

const fn case(
    number: u8,
    tau0_minutes: f64,
    nu0_dbm: f64,
    meetups: [u32; 2],
    dataset: Dataset,
) -> TableCase {
    TableCase {
        number,
        theta: 0.9,
        tau0_minutes,
        nu0_dbm,
        meetups,
        dataset,
    }
}

pub const TABLE_CASES: [TableCase; 8] = [
    case(1, 2.0, -0.55, [1225, 1250], Dataset::Pinal),
    case(2, 2.0, -0.55, [1275, 1300], Dataset::Pinal),
    case(3, 1.0, -0.50, [1225, 1250], Dataset::Pinal),
    case(4, 1.0, -0.50, [1275, 1300], Dataset::Pinal),
    case(5, 2.0, -0.55, [2300, 2330], Dataset::Maricopa),
    case(6, 2.0, -0.55, [2345, 2360], Dataset::Maricopa),
    case(7, 1.0, -0.50, [2300, 2330], Dataset::Maricopa),
    case(8, 1.0, -0.50, [2345, 2500], Dataset::Maricopa),
];

impl TableCase {
    pub fn get(number: u8) -> Option<TableCase> {
        TABLE_CASES.iter().copied().find(|c| c.number == number)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            theta: Probability::new(self.theta).expect("preset theta in range"),
            tau0_s: self.tau0_minutes * 60.0,
            nu0_dbm: self.nu0_dbm,
        }
    }

    /// Configuration for one of the two meetup rates (`which` is 0 or 1).
    /// Initial infections equal the dataset's first-day case count.
    pub fn config(&self, which: usize) -> SimulationConfig {
        SimulationConfig {
            population: DEFAULT_POPULATION,
            days: DEFAULT_DAYS,
            thresholds: self.thresholds(),
            meetups_per_day: self.meetups[which],
            initial_infected: self.dataset.first_day_cases(),
            initial_symptomatic_rate: 0.0,
            contact_time_s: DEFAULT_CONTACT_TIME_S,
            signal_dbm: DEFAULT_SIGNAL_DBM,
            rng_seed: DEFAULT_SEED,
            alert_compliance: 0.0,
        }
    }
}
