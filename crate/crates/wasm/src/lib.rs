//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exported: scoring one user from a list of meetups,
//! a baseline versus alerted simulation, and a lockdown forecast. Each export
//! wraps a plain Rust function so the logic is testable off the browser.

use fogtrace_core::sim::{predict_future, run_detailed, run_with_alerts};
use fogtrace_core::{
    evaluate_user, infection_level, ContactRecord, Probability, RiskBands, SimulationConfig,
    SymptomFlag, TableCase, Thresholds, UserState,
};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    contact: f64,
    symptom: f64,
    total: f64,
    infected: bool,
    level: String,
}

#[wasm_bindgen]
impl Evaluation {
    #[wasm_bindgen(getter)]
    pub fn contact(&self) -> f64 {
        self.contact
    }
    #[wasm_bindgen(getter)]
    pub fn symptom(&self) -> f64 {
        self.symptom
    }
    #[wasm_bindgen(getter)]
    pub fn total(&self) -> f64 {
        self.total
    }
    #[wasm_bindgen(getter)]
    pub fn infected(&self) -> bool {
        self.infected
    }
    #[wasm_bindgen(getter)]
    pub fn level(&self) -> String {
        self.level.clone()
    }
}

/// Scores a user whose meetups are given as parallel arrays.
pub fn evaluate_arrays(
    theta: f64,
    tau0_minutes: f64,
    nu0_dbm: f64,
    symptomatic: bool,
    peer_probability: &[f64],
    contact_time_s: &[f64],
    signal_dbm: &[f64],
) -> Result<Evaluation, String> {
    let n = peer_probability.len();
    if contact_time_s.len() != n || signal_dbm.len() != n {
        return Err("meetup arrays must have equal length".into());
    }
    let thresholds =
        Thresholds::from_minutes(theta, tau0_minutes, nu0_dbm).map_err(|e| e.to_string())?;
    let records = (0..n)
        .map(|i| {
            let c = Probability::new(peer_probability[i])?;
            ContactRecord::new(c, contact_time_s[i], signal_dbm[i])
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let state = UserState {
        symptom: SymptomFlag::from(symptomatic),
        ..UserState::default()
    };
    let next = evaluate_user(&state, &records, &thresholds).map_err(|e| e.to_string())?;
    let level = infection_level(next.total_probability, &RiskBands::default())
        .map_err(|e| e.to_string())?;
    Ok(Evaluation {
        contact: next.contact_probability.get(),
        symptom: next.symptom_probability.get(),
        total: next.total_probability.get(),
        infected: next.infected,
        level: level.as_str().to_string(),
    })
}

#[wasm_bindgen]
pub fn evaluate(
    theta: f64,
    tau0_minutes: f64,
    nu0_dbm: f64,
    symptomatic: bool,
    peer_probability: Vec<f64>,
    contact_time_s: Vec<f64>,
    signal_dbm: Vec<f64>,
) -> Result<Evaluation, JsError> {
    evaluate_arrays(
        theta,
        tau0_minutes,
        nu0_dbm,
        symptomatic,
        &peer_probability,
        &contact_time_s,
        &signal_dbm,
    )
    .map_err(|e| JsError::new(&e))
}

/// Preset `case` with the demo's population and overrides applied.
pub fn demo_config(
    case: u8,
    population: u32,
    meetups_per_day: u32,
    days: u32,
    seed: u64,
) -> Result<SimulationConfig, String> {
    let preset = TableCase::get(case).ok_or_else(|| format!("no preset case {case}"))?;
    let mut cfg = preset.config(0);
    cfg.population = population;
    cfg.meetups_per_day = meetups_per_day;
    cfg.days = days;
    cfg.rng_seed = seed;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn narrow(values: &[u64]) -> Vec<u32> {
    values
        .iter()
        .map(|&v| v.min(u32::MAX as u64) as u32)
        .collect()
}

/// Daily new infections for two runs over the same meetup stream.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct AlertRun {
    baseline: Vec<u32>,
    alerted: Vec<u32>,
}

#[wasm_bindgen]
impl AlertRun {
    #[wasm_bindgen(getter)]
    pub fn baseline(&self) -> Vec<u32> {
        self.baseline.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn alerted(&self) -> Vec<u32> {
        self.alerted.clone()
    }
}

pub fn alert_run(cfg: &SimulationConfig, compliance: f64) -> Result<AlertRun, String> {
    let mut cfg = cfg.clone();
    cfg.alert_compliance = compliance;
    let cmp = run_with_alerts(&cfg).map_err(|e| e.to_string())?;
    Ok(AlertRun {
        baseline: narrow(&cmp.baseline.new_infections),
        alerted: narrow(&cmp.alerted.new_infections),
    })
}

#[wasm_bindgen]
pub fn simulate_alerts(
    case: u8,
    population: u32,
    meetups_per_day: u32,
    days: u32,
    seed: u32,
    compliance: f64,
) -> Result<AlertRun, JsError> {
    demo_config(case, population, meetups_per_day, days, seed as u64)
        .and_then(|cfg| alert_run(&cfg, compliance))
        .map_err(|e| JsError::new(&e))
}

/// Observed days followed by two continuations of the same final state.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    observed: Vec<u32>,
    current: Vec<u32>,
    lockdown: Vec<u32>,
}

#[wasm_bindgen]
impl Forecast {
    #[wasm_bindgen(getter)]
    pub fn observed(&self) -> Vec<u32> {
        self.observed.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn current(&self) -> Vec<u32> {
        self.current.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn lockdown(&self) -> Vec<u32> {
        self.lockdown.clone()
    }
}

pub fn forecast_run(
    cfg: &SimulationConfig,
    horizon: u32,
    lockdown_meetups: u32,
) -> Result<Forecast, String> {
    let (observed, state) = run_detailed(cfg).map_err(|e| e.to_string())?;
    let current =
        predict_future(&state, cfg.meetups_per_day, horizon, cfg).map_err(|e| e.to_string())?;
    let lockdown =
        predict_future(&state, lockdown_meetups, horizon, cfg).map_err(|e| e.to_string())?;
    Ok(Forecast {
        observed: narrow(&observed.new_infections),
        current: narrow(&current.new_infections),
        lockdown: narrow(&lockdown.new_infections),
    })
}

#[wasm_bindgen]
pub fn forecast(
    case: u8,
    population: u32,
    meetups_per_day: u32,
    days: u32,
    seed: u32,
    horizon: u32,
    lockdown_meetups: u32,
) -> Result<Forecast, JsError> {
    demo_config(case, population, meetups_per_day, days, seed as u64)
        .and_then(|cfg| forecast_run(&cfg, horizon, lockdown_meetups))
        .map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scoring_matches_the_kernel() {
        let e = evaluate_arrays(0.9, 2.0, -0.55, false, &[1.0], &[240.0], &[-0.55]).unwrap();
        assert_eq!(
            (e.total, e.level.as_str(), e.infected),
            (1.0, "very_high", true)
        );
        let e = evaluate_arrays(0.9, 2.0, -0.55, true, &[], &[], &[]).unwrap();
        assert_eq!((e.contact, e.symptom, e.total), (0.0, 0.9, 0.9));
        let e = evaluate_arrays(0.9, 2.0, -0.55, false, &[0.4], &[60.0], &[-0.2]).unwrap();
        assert!((e.total - 0.2).abs() < 1e-12);
        assert_eq!(e.level, "low");
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(evaluate_arrays(0.9, 2.0, -0.55, false, &[1.0], &[], &[]).is_err());
        assert!(evaluate_arrays(1.5, 2.0, -0.55, false, &[], &[], &[]).is_err());
        assert!(evaluate_arrays(0.9, 2.0, -0.55, false, &[1.2], &[1.0], &[0.0]).is_err());
        assert!(demo_config(9, 100, 10, 5, 1).is_err());
        assert!(demo_config(1, 100, 0, 5, 1).is_err());
    }

    #[test]
    fn alerts_and_forecast_behave() {
        let cfg = demo_config(1, 2000, 400, 10, 3).unwrap();
        let run = alert_run(&cfg, 1.0).unwrap();
        assert_eq!(run.baseline.len(), 10);
        let (mut a, mut b) = (0, 0);
        for (x, y) in run.alerted.iter().zip(&run.baseline) {
            a += x;
            b += y;
            assert!(a <= b);
        }
        let f = forecast_run(&cfg, 6, 200).unwrap();
        assert_eq!(
            (f.observed.len(), f.current.len(), f.lockdown.len()),
            (10, 6, 6)
        );
        assert!(f.lockdown.iter().sum::<u32>() <= f.current.iter().sum::<u32>());
    }
}
