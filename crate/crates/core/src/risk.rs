//! Four-band risk stratification and per-user report documents.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{Probability, SymptomFlag, UserState};

/// Guidance shipped with the crate, in the format read by [`GuidanceTable::parse`].
pub const DEFAULT_GUIDANCE: &str = include_str!("../data/guidance.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskLevel {
    Low,
    Moderate,
    High,
    VeryHigh,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 4] = [
        RiskLevel::Low,
        RiskLevel::Moderate,
        RiskLevel::High,
        RiskLevel::VeryHigh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Moderate => "moderate",
            RiskLevel::High => "high",
            RiskLevel::VeryHigh => "very_high",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskLevel {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace([' ', '-'], "_")
            .as_str()
        {
            "low" => Ok(RiskLevel::Low),
            "moderate" => Ok(RiskLevel::Moderate),
            "high" => Ok(RiskLevel::High),
            "very_high" | "veryhigh" => Ok(RiskLevel::VeryHigh),
            other => Err(ConfigError::invalid(format!(
                "unknown risk level {other:?}"
            ))),
        }
    }
}

/// Cut points `low < avg < high` partitioning `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBands")]
pub struct RiskBands {
    pub p_low: Probability,
    pub p_avg: Probability,
    pub p_high: Probability,
}

#[derive(Deserialize)]
struct RawBands {
    p_low: Probability,
    p_avg: Probability,
    p_high: Probability,
}

impl TryFrom<RawBands> for RiskBands {
    type Error = ConfigError;

    fn try_from(raw: RawBands) -> Result<Self, Self::Error> {
        RiskBands::new(raw.p_low.get(), raw.p_avg.get(), raw.p_high.get())
    }
}

impl Default for RiskBands {
    /// 0.3 / 0.6 / 0.9; the top cut matches the default infection threshold.
    fn default() -> Self {
        RiskBands {
            p_low: Probability::new(0.3).unwrap(),
            p_avg: Probability::new(0.6).unwrap(),
            p_high: Probability::new(0.9).unwrap(),
        }
    }
}

impl RiskBands {
    pub fn new(p_low: f64, p_avg: f64, p_high: f64) -> Result<Self, ConfigError> {
        if !(0.0 < p_low && p_low < p_avg && p_avg < p_high && p_high <= 1.0) {
            return Err(ConfigError::invalid(format!(
                "risk bands must satisfy 0 < low < avg < high <= 1, got {p_low}, {p_avg}, {p_high}"
            )));
        }
        Ok(RiskBands {
            p_low: Probability::new(p_low)?,
            p_avg: Probability::new(p_avg)?,
            p_high: Probability::new(p_high)?,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        RiskBands::new(self.p_low.get(), self.p_avg.get(), self.p_high.get()).map(|_| ())
    }
}

/// Maps a total probability onto its band. Each cut point belongs to the band above it.
pub fn infection_level(p: Probability, bands: &RiskBands) -> Result<RiskLevel, ConfigError> {
    bands.validate()?;
    let p = p.get();
    Ok(if p < bands.p_low.get() {
        RiskLevel::Low
    } else if p < bands.p_avg.get() {
        RiskLevel::Moderate
    } else if p < bands.p_high.get() {
        RiskLevel::High
    } else {
        RiskLevel::VeryHigh
    })
}

/// Guidance text for each risk level.
///
/// File format (UTF-8): one `level=text` entry per line, where `level` is one
/// of `low`, `moderate`, `high`, `very_high`. Repeating a level appends another
/// line to its block. Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceTable {
    entries: BTreeMap<RiskLevel, String>,
}

impl Default for GuidanceTable {
    fn default() -> Self {
        GuidanceTable::parse(DEFAULT_GUIDANCE).expect("bundled guidance is complete")
    }
}

impl GuidanceTable {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<RiskLevel, String> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::invalid(format!("guidance line {}: expected level=text", idx + 1))
            })?;
            let level: RiskLevel = key.parse()?;
            let block = entries.entry(level).or_default();
            if !block.is_empty() {
                block.push('\n');
            }
            block.push_str(value.trim());
        }
        let table = GuidanceTable { entries };
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        GuidanceTable::parse(&text)
    }

    pub fn from_entries(entries: BTreeMap<RiskLevel, String>) -> Result<Self, ConfigError> {
        let table = GuidanceTable { entries };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for level in RiskLevel::ALL {
            match self.entries.get(&level) {
                Some(text) if !text.trim().is_empty() => {}
                _ => {
                    return Err(ConfigError::invalid(format!(
                        "guidance table has no text for level {level}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, level: RiskLevel) -> Option<&str> {
        self.entries.get(&level).map(String::as_str)
    }
}

/// Risk report delivered to a user and uploaded to the cloud sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub user_id: String,
    pub level: RiskLevel,
    pub total_probability: Probability,
    pub symptom: SymptomFlag,
    pub traced_count: u64,
    pub guidance: String,
    /// UTC seconds since the Unix epoch.
    pub issued_at: i64,
}

pub fn build_report(
    user_id: &str,
    state: &UserState,
    level: RiskLevel,
    guidance: &GuidanceTable,
    issued_at: i64,
) -> Result<Report, ConfigError> {
    let text = guidance
        .get(level)
        .filter(|t| !t.trim().is_empty())
        .ok_or_else(|| ConfigError::invalid(format!("no guidance for level {level}")))?;
    Ok(Report {
        user_id: user_id.to_owned(),
        level,
        total_probability: state.total_probability,
        symptom: state.symptom,
        traced_count: state.traced_count,
        guidance: text.to_owned(),
        issued_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bands() -> RiskBands {
        RiskBands::new(0.3, 0.6, 0.9).unwrap()
    }

    fn level(p: f64) -> RiskLevel {
        infection_level(Probability::new(p).unwrap(), &bands()).unwrap()
    }

    /// Scans the four half-open bands and returns every one containing `p`.
    fn brute_force_bands(p: f64, b: &RiskBands) -> Vec<RiskLevel> {
        let cuts = [0.0, b.p_low.get(), b.p_avg.get(), b.p_high.get()];
        RiskLevel::ALL
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let lo = cuts[*i];
                if *i == 3 {
                    lo <= p && p <= 1.0
                } else {
                    lo <= p && p < cuts[i + 1]
                }
            })
            .map(|(_, l)| *l)
            .collect()
    }

    #[test]
    fn level_examples() {
        assert_eq!(level(0.0), RiskLevel::Low);
        assert_eq!(level(0.9), RiskLevel::VeryHigh);
        assert_eq!(level(0.6), RiskLevel::High);
        assert_eq!(brute_force_bands(0.6, &bands()), vec![RiskLevel::High]);
        assert_eq!(level(0.3), RiskLevel::Moderate);
        assert_eq!(level(1.0), RiskLevel::VeryHigh);
        assert_eq!(level(0.2999), RiskLevel::Low);
    }

    #[test]
    fn invalid_bands_rejected() {
        assert!(RiskBands::new(0.6, 0.3, 0.9).is_err());
        assert!(RiskBands::new(0.0, 0.3, 0.9).is_err());
        assert!(RiskBands::new(0.3, 0.6, 1.1).is_err());
        assert!(
            serde_json::from_str::<RiskBands>(r#"{"p_low":0.5,"p_avg":0.4,"p_high":0.9}"#).is_err()
        );
        let broken = RiskBands {
            p_low: Probability::new(0.7).unwrap(),
            ..bands()
        };
        assert!(infection_level(Probability::ZERO, &broken).is_err());
    }

    #[test]
    fn reports_use_level_guidance() {
        let g = GuidanceTable::default();
        let state = UserState {
            total_probability: Probability::new(0.95).unwrap(),
            infected: true,
            ..UserState::default()
        };
        let r = build_report("u1", &state, RiskLevel::VeryHigh, &g, 7).unwrap();
        assert_eq!(r.guidance, g.get(RiskLevel::VeryHigh).unwrap());
        assert_eq!(r.issued_at, 7);

        let r = build_report("u2", &UserState::default(), RiskLevel::Low, &g, 0).unwrap();
        assert_eq!(r.guidance, g.get(RiskLevel::Low).unwrap());

        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "user_id",
            "level",
            "total_probability",
            "symptom",
            "traced_count",
            "guidance",
            "issued_at",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["level"], "low");
    }

    #[test]
    fn symptomatic_user_at_theta_is_very_high_under_defaults() {
        let state = UserState {
            symptom: SymptomFlag::PRESENT,
            symptom_probability: Probability::new(0.9).unwrap(),
            total_probability: Probability::new(0.9).unwrap(),
            infected: true,
            ..UserState::default()
        };
        let lvl = infection_level(state.total_probability, &RiskBands::default()).unwrap();
        assert_eq!(lvl, RiskLevel::VeryHigh);
    }

    #[test]
    fn guidance_parsing() {
        let t = GuidanceTable::parse(
            "# comment\nlow=stay alert\nmoderate=limit contacts\nhigh=get tested\nhigh=avoid crowds\nvery high=isolate\n",
        )
        .unwrap();
        assert_eq!(t.get(RiskLevel::High), Some("get tested\navoid crowds"));
        assert_eq!(t.get(RiskLevel::VeryHigh), Some("isolate"));
        assert!(GuidanceTable::parse("low=a\nmoderate=b\nhigh=c\n").is_err());
        assert!(GuidanceTable::parse("low a").is_err());
        assert!(GuidanceTable::parse("extreme=x").is_err());
    }

    proptest! {
        #[test]
        fn bands_partition_unit_interval(p in 0.0f64..=1.0) {
            let b = bands();
            let hits = brute_force_bands(p, &b);
            prop_assert_eq!(hits.len(), 1);
            prop_assert_eq!(infection_level(Probability::new(p).unwrap(), &b).unwrap(), hits[0]);
        }

        #[test]
        fn level_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(level(lo) <= level(hi));
        }
    }
}
