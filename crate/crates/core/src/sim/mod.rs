//! Agent-based reproduction of the daily-meetup experiment.
//!
//! Every day a fixed number of meetups is drawn by pairing two distinct users
//! uniformly at random. Users who were infected at the start of the day pass
//! `mu * P` to the other party; all users are then re-evaluated together, so
//! an infection found on day `d` only becomes contagious on day `d + 1`.
//! Infected users are frozen: they never leave the infected set and their
//! probability no longer changes.
//!
//! Randomness comes from one ChaCha8 stream per (seed, day, purpose). Meetup
//! sampling never looks at population state, so runs that differ only in
//! alert behaviour replay the same event stream, and a lower meetup rate
//! draws a prefix of a higher rate's events.

mod config;

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{
    Dataset, SimulationConfig, TableCase, UniformRange, DEFAULT_CONTACT_TIME_S, DEFAULT_DAYS,
    DEFAULT_POPULATION, DEFAULT_SEED, DEFAULT_SIGNAL_DBM, TABLE_CASES,
};

use crate::error::{ConfigError, SimError};
use crate::model::{evaluate_user, ContactRecord, SymptomFlag, UserState};

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Meetups = 0,
    Symptoms = 1,
    Alerts = 2,
}

fn day_rng(seed: u64, day: u32, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(day) << 2) | stream as u64);
    rng
}

fn seeding_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

/// One sampled meetup between two users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeetupEvent {
    pub day: u32,
    pub user_a: u32,
    pub user_b: u32,
    pub contact_time_s: f64,
    pub signal_dbm: f64,
}

/// States of the whole population. `day` is the next day to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub states: Vec<UserState>,
    pub infected_set: BTreeSet<u32>,
    pub day: u32,
}

impl PopulationState {
    pub fn population(&self) -> u32 {
        self.states.len() as u32
    }

    pub fn infected_count(&self) -> usize {
        self.infected_set.len()
    }

    fn is_infected(&self, user: u32) -> bool {
        self.states[user as usize].infected
    }
}

/// Newly infected users per simulated day.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DailySeries {
    pub new_infections: Vec<u64>,
}

impl DailySeries {
    pub fn new(new_infections: Vec<u64>) -> Self {
        DailySeries { new_infections }
    }

    pub fn len(&self) -> usize {
        self.new_infections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_infections.is_empty()
    }

    pub fn cumulative(&self) -> Vec<u64> {
        self.new_infections
            .iter()
            .scan(0u64, |acc, &f| {
                *acc += f;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.new_infections.iter().sum()
    }
}

/// Seeds `initial_infected` distinct users with `P = 1`.
pub fn init_population(config: &SimulationConfig) -> Result<PopulationState, SimError> {
    config.validate()?;
    let n = config.population as usize;
    let mut states = vec![UserState::default(); n];
    let mut infected_set = BTreeSet::new();
    let mut rng = seeding_rng(config.rng_seed);
    for idx in rand::seq::index::sample(&mut rng, n, config.initial_infected as usize).iter() {
        states[idx] = UserState::seeded_infected();
        infected_set.insert(idx as u32);
    }
    Ok(PopulationState {
        states,
        infected_set,
        day: 0,
    })
}

/// Draws `meetups_per_day` meetups for `day`. Depends only on the config and the day.
pub fn sample_meetups(config: &SimulationConfig, day: u32) -> Result<Vec<MeetupEvent>, SimError> {
    config.validate()?;
    let n = config.population;
    if n < 2 {
        return Err(ConfigError::invalid("at least two users are needed for a meetup").into());
    }
    let tau = Uniform::new_inclusive(config.contact_time_s.min, config.contact_time_s.max);
    let nu = Uniform::new_inclusive(config.signal_dbm.min, config.signal_dbm.max);
    let mut rng = day_rng(config.rng_seed, day, Stream::Meetups);
    let events = (0..config.meetups_per_day)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            MeetupEvent {
                day,
                user_a: a,
                user_b: b,
                contact_time_s: tau.sample(&mut rng),
                signal_dbm: nu.sample(&mut rng),
            }
        })
        .collect();
    Ok(events)
}

/// Users who report symptoms on `day`, in ascending order. Empty when the rate is zero.
pub fn symptom_onsets(config: &SimulationConfig, day: u32) -> Vec<u32> {
    let rate = config.initial_symptomatic_rate;
    if rate <= 0.0 {
        return Vec::new();
    }
    let mut rng = day_rng(config.rng_seed, day, Stream::Symptoms);
    (0..config.population)
        .filter(|_| rng.gen::<f64>() < rate)
        .collect()
}

/// Drops meetups that involve a user infected at the start of the day, each
/// with probability `compliance`. One uniform draw is consumed per event.
pub fn apply_alerts(
    state: &PopulationState,
    events: &[MeetupEvent],
    compliance: f64,
    seed: u64,
) -> Vec<MeetupEvent> {
    let mut rng = day_rng(seed, state.day, Stream::Alerts);
    events
        .iter()
        .filter(|e| {
            let draw = rng.gen::<f64>();
            let risky = state.is_infected(e.user_a) || state.is_infected(e.user_b);
            !(risky && draw < compliance)
        })
        .copied()
        .collect()
}

fn validate_events(state: &PopulationState, events: &[MeetupEvent]) -> Result<(), SimError> {
    let population = state.population();
    for e in events {
        if e.day != state.day {
            return Err(SimError::WrongDay {
                event_day: e.day,
                state_day: state.day,
            });
        }
        for user in [e.user_a, e.user_b] {
            if user >= population {
                return Err(SimError::UnknownUser { user, population });
            }
        }
        if e.user_a == e.user_b {
            return Err(SimError::SelfMeetup(e.user_a));
        }
        ContactRecord {
            peer_probability: Default::default(),
            contact_time_s: e.contact_time_s,
            signal_dbm: e.signal_dbm,
        }
        .validate()?;
    }
    Ok(())
}

/// Advances `state` by one day and returns the number of users newly infected.
///
/// Contacts are read against the infected set as it stood at the start of the
/// day and the set is only updated once every user has been evaluated. On
/// error the state is left untouched.
pub fn step_day(
    state: &mut PopulationState,
    events: &[MeetupEvent],
    config: &SimulationConfig,
) -> Result<u64, SimError> {
    validate_events(state, events)?;
    let thresholds = &config.thresholds;

    let mut pending: BTreeMap<u32, Vec<ContactRecord>> = BTreeMap::new();
    for e in events {
        for (me, peer) in [(e.user_a, e.user_b), (e.user_b, e.user_a)] {
            if state.is_infected(peer) && !state.is_infected(me) {
                pending.entry(me).or_default().push(ContactRecord {
                    peer_probability: state.states[peer as usize].total_probability,
                    contact_time_s: e.contact_time_s,
                    signal_dbm: e.signal_dbm,
                });
            }
        }
    }
    for user in symptom_onsets(config, state.day) {
        if !state.is_infected(user) {
            state.states[user as usize].symptom = SymptomFlag::PRESENT;
            pending.entry(user).or_default();
        }
    }

    let mut updated = Vec::with_capacity(pending.len());
    for (user, records) in &pending {
        let next = evaluate_user(&state.states[*user as usize], records, thresholds)?;
        updated.push((*user, next));
    }

    let mut newly_infected = 0;
    for (user, next) in updated {
        if next.infected {
            newly_infected += 1;
            state.infected_set.insert(user);
        }
        state.states[user as usize] = next;
    }
    state.day += 1;
    Ok(newly_infected)
}

fn advance(
    state: &mut PopulationState,
    config: &SimulationConfig,
    days: u32,
    compliance: Option<f64>,
) -> Result<DailySeries, SimError> {
    let mut series = Vec::with_capacity(days as usize);
    for _ in 0..days {
        let mut events = sample_meetups(config, state.day)?;
        if let Some(c) = compliance {
            events = apply_alerts(state, &events, c, config.rng_seed);
        }
        series.push(step_day(state, &events, config)?);
    }
    Ok(DailySeries::new(series))
}

/// Runs `config.days` days and also returns the final population.
pub fn run_detailed(config: &SimulationConfig) -> Result<(DailySeries, PopulationState), SimError> {
    let mut state = init_population(config)?;
    let series = advance(&mut state, config, config.days, None)?;
    Ok((series, state))
}

pub fn run(config: &SimulationConfig) -> Result<DailySeries, SimError> {
    run_detailed(config).map(|(series, _)| series)
}

/// Baseline and alert-driven series over the same sampled meetups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertComparison {
    pub baseline: DailySeries,
    pub alerted: DailySeries,
}

/// Runs the configuration twice: once as-is and once with users skipping
/// meetups with infected peers at rate `config.alert_compliance`. Cancelled
/// meetups are not replaced.
pub fn run_with_alerts(config: &SimulationConfig) -> Result<AlertComparison, SimError> {
    let baseline = run(config)?;
    let mut state = init_population(config)?;
    let alerted = advance(
        &mut state,
        config,
        config.days,
        Some(config.alert_compliance),
    )?;
    Ok(AlertComparison { baseline, alerted })
}

/// Continues from `state` for `horizon` days at an assumed meetup rate.
pub fn predict_future(
    state: &PopulationState,
    assumed_meetups_per_day: u32,
    horizon: u32,
    config: &SimulationConfig,
) -> Result<DailySeries, SimError> {
    if state.population() != config.population {
        return Err(ConfigError::invalid(format!(
            "state has {} users but config expects {}",
            state.population(),
            config.population
        ))
        .into());
    }
    let assumed = SimulationConfig {
        meetups_per_day: assumed_meetups_per_day,
        ..config.clone()
    };
    assumed.validate()?;
    let mut future = state.clone();
    advance(&mut future, &assumed, horizon, None)
}
