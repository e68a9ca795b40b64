use fogtrace_core::sim::{
    init_population, predict_future, run, run_detailed, run_with_alerts, sample_meetups, step_day,
    symptom_onsets, SimulationConfig, TableCase,
};
use fogtrace_core::MeetupEvent;

/// Flat-array re-implementation of one simulated day, written directly from
/// the model definitions. Returns the number of users crossing theta.
struct Oracle {
    contact: Vec<f64>,
    total: Vec<f64>,
    symptomatic: Vec<bool>,
    infected: Vec<bool>,
}

impl Oracle {
    fn new(n: usize, seeded: impl Iterator<Item = u32>) -> Self {
        let mut o = Oracle {
            contact: vec![0.0; n],
            total: vec![0.0; n],
            symptomatic: vec![false; n],
            infected: vec![false; n],
        };
        for u in seeded {
            o.contact[u as usize] = 1.0;
            o.total[u as usize] = 1.0;
            o.infected[u as usize] = true;
        }
        o
    }

    fn day(&mut self, events: &[MeetupEvent], onsets: &[u32], cfg: &SimulationConfig) -> u64 {
        let theta = cfg.thresholds.theta.get();
        let tau0 = cfg.thresholds.tau0_s;
        let nu0 = cfg.thresholds.nu0_dbm;
        let was_infected = self.infected.clone();
        let start_total = self.total.clone();
        let mut crossed = Vec::new();
        for u in 0..self.total.len() {
            if was_infected[u] {
                continue;
            }
            let mut raw = 0.0;
            for e in events {
                let peer = if e.user_a as usize == u {
                    e.user_b as usize
                } else if e.user_b as usize == u {
                    e.user_a as usize
                } else {
                    continue;
                };
                if !was_infected[peer] {
                    continue;
                }
                let gate = if e.signal_dbm >= nu0 { 1.0 } else { 0.0 };
                let omega = if e.contact_time_s <= tau0 {
                    e.contact_time_s / tau0
                } else {
                    1.0
                };
                raw += gate * omega * start_total[peer];
            }
            if onsets.contains(&(u as u32)) {
                self.symptomatic[u] = true;
            }
            let p = (self.contact[u] + raw).min(1.0);
            let s = if self.symptomatic[u] { 1.0 } else { 0.0 };
            let mut total = p + s * (1.0 - p) * theta;
            if self.symptomatic[u] && total < theta {
                total = theta;
            }
            self.contact[u] = p;
            self.total[u] = total;
            if total >= theta {
                crossed.push(u);
            }
        }
        for &u in &crossed {
            self.infected[u] = true;
        }
        crossed.len() as u64
    }
}

fn oracle_matches(cfg: &SimulationConfig) {
    let mut state = init_population(cfg).unwrap();
    let mut oracle = Oracle::new(cfg.population as usize, state.infected_set.iter().copied());
    for day in 0..cfg.days {
        let events = sample_meetups(cfg, day).unwrap();
        let onsets = symptom_onsets(cfg, day);
        let f = step_day(&mut state, &events, cfg).unwrap();
        let f_oracle = oracle.day(&events, &onsets, cfg);
        assert_eq!(f, f_oracle, "f_d differs on day {day}");
        for (u, s) in state.states.iter().enumerate() {
            assert_eq!(
                s.total_probability.get().to_bits(),
                oracle.total[u].to_bits(),
                "user {u} day {day}"
            );
            assert_eq!(s.infected, oracle.infected[u]);
        }
    }
    let (series, _) = run_detailed(cfg).unwrap();
    assert_eq!(series.len(), cfg.days as usize);
}

fn tiny(seed: u64, meetups: u32, initial: u32, rate: f64) -> SimulationConfig {
    SimulationConfig {
        population: 10,
        days: 3,
        meetups_per_day: meetups,
        initial_infected: initial,
        initial_symptomatic_rate: rate,
        rng_seed: seed,
        ..SimulationConfig::default()
    }
}

#[test]
fn brute_force_oracle_agrees() {
    for seed in 0..25 {
        oracle_matches(&tiny(seed, 6, 1, 0.0));
        oracle_matches(&tiny(seed, 12, 2, 0.05));
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = TableCase::get(2).unwrap().config(1);
    assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    let mut other = cfg.clone();
    other.rng_seed += 1;
    assert_ne!(
        run_detailed(&cfg).unwrap().1,
        run_detailed(&other).unwrap().1
    );
}

#[test]
fn conservation_and_monotone_infection() {
    for seed in 0..6 {
        let cfg = SimulationConfig {
            population: 400,
            days: 12,
            meetups_per_day: 300,
            initial_infected: 5,
            initial_symptomatic_rate: 0.002,
            rng_seed: seed,
            ..SimulationConfig::default()
        };
        let mut state = init_population(&cfg).unwrap();
        let mut total = 0;
        for day in 0..cfg.days {
            let before = state.infected_set.clone();
            let events = sample_meetups(&cfg, day).unwrap();
            total += step_day(&mut state, &events, &cfg).unwrap();
            assert!(state.infected_set.is_superset(&before));
            let expected: std::collections::BTreeSet<u32> = state
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.total_probability >= cfg.thresholds.theta)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(state.infected_set, expected);
            for &u in &before {
                // frozen once infected
                assert!(state.states[u as usize].infected);
            }
        }
        assert!(total + cfg.initial_infected as u64 <= cfg.population as u64);
        let series = run(&cfg).unwrap();
        assert_eq!(series.total(), total);
        assert!(series.cumulative().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn full_compliance_never_exceeds_baseline() {
    for seed in 0..10 {
        let mut cfg = TableCase::get(5).unwrap().config(0);
        cfg.population = 3000;
        cfg.rng_seed = seed;
        cfg.alert_compliance = 1.0;
        cfg.initial_symptomatic_rate = 0.0005;
        let cmp = run_with_alerts(&cfg).unwrap();
        for (a, b) in cmp
            .alerted
            .cumulative()
            .iter()
            .zip(cmp.baseline.cumulative())
        {
            assert!(*a <= b);
        }
    }
}

#[test]
fn lockdown_prediction_stays_below_current_rate() {
    for seed in 0..8 {
        let mut cfg = TableCase::get(1).unwrap().config(0);
        cfg.rng_seed = seed;
        cfg.days = 7;
        let (_, state) = run_detailed(&cfg).unwrap();
        let current = predict_future(&state, cfg.meetups_per_day, 10, &cfg).unwrap();
        let lockdown = predict_future(&state, cfg.meetups_per_day / 2, 10, &cfg).unwrap();
        assert_eq!(current.len(), 10);
        for (l, c) in lockdown.cumulative().iter().zip(current.cumulative()) {
            assert!(*l <= c, "seed {seed}");
        }
    }
}

#[test]
fn prediction_continues_the_same_mechanics() {
    // continuing at the configured rate reproduces the tail of a longer run
    let mut cfg = TableCase::get(1).unwrap().config(1);
    cfg.days = 5;
    let (_, state) = run_detailed(&cfg).unwrap();
    let tail = predict_future(&state, cfg.meetups_per_day, 4, &cfg).unwrap();
    let mut longer = cfg.clone();
    longer.days = 9;
    let full = run(&longer).unwrap();
    assert_eq!(tail.new_infections, full.new_infections[5..]);
}
