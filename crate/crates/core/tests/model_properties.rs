use fogtrace_core::{
    evaluate_user, infection_transition_fraction, propagate_contacts, symptom_probability,
    total_probability, ContactRecord, Probability, SymptomFlag, Thresholds, UserState,
};
use proptest::prelude::*;

fn thresholds() -> Thresholds {
    Thresholds::new(0.9, 120.0, -0.55).unwrap()
}

/// Straight loop over the records with the gate and ratio written out inline.
fn naive_contact_probability(records: &[(f64, f64, f64)], tau0: f64, nu0: f64) -> f64 {
    let mut p = 0.0;
    for &(c, tau, nu) in records {
        let lambda = if nu >= nu0 { 1.0 } else { 0.0 };
        let omega = if tau <= tau0 { tau / tau0 } else { 1.0 };
        p += lambda * omega * c;
    }
    if p > 1.0 {
        p = 1.0;
    }
    p
}

fn to_records(raw: &[(f64, f64, f64)]) -> Vec<ContactRecord> {
    raw.iter()
        .map(|&(c, tau, nu)| ContactRecord::new(Probability::new(c).unwrap(), tau, nu).unwrap())
        .collect()
}

fn grid(steps: u32) -> impl Strategy<Value = f64> {
    (0..=steps).prop_map(move |k| k as f64 * 0.05)
}

fn record_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    // C on a 0.05 grid, tau as a 0.05 multiple of 3 * tau0, nu on a 0.05 grid in [-1, 0]
    (grid(20), grid(60), grid(20)).prop_map(|(c, t, n)| (c, t * 120.0, -n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn clamp_matches_naive_loop(raw in proptest::collection::vec(record_strategy(), 0..=20)) {
        let t = thresholds();
        let p = propagate_contacts(&to_records(&raw), &t).unwrap().get();
        prop_assert_eq!(p, naive_contact_probability(&raw, t.tau0_s, t.nu0_dbm));
    }

    #[test]
    fn outputs_stay_in_unit_interval(
        raw in proptest::collection::vec((0.0f64..=1.0, 0.0f64..1e4, -5.0f64..5.0), 0..30),
        symptomatic in any::<bool>(),
        theta in 0.01f64..=1.0,
    ) {
        let t = Thresholds::new(theta, 90.0, -0.5).unwrap();
        let records = to_records(&raw);
        for r in &records {
            let mu = infection_transition_fraction(r, &t).unwrap();
            prop_assert!((0.0..=1.0).contains(&mu));
        }
        let state = UserState { symptom: symptomatic.into(), ..UserState::default() };
        let out = evaluate_user(&state, &records, &t).unwrap();
        for p in [out.contact_probability, out.symptom_probability, out.total_probability] {
            prop_assert!((0.0..=1.0).contains(&p.get()));
        }
        prop_assert!((out.total_probability.get()
            - (out.contact_probability.get() + out.symptom_probability.get())).abs() <= 1e-12);
        prop_assert_eq!(out.infected, out.total_probability >= t.theta);
        if !symptomatic {
            prop_assert_eq!(out.symptom_probability, Probability::ZERO);
        }
    }

    #[test]
    fn mu_is_monotone_in_contact_time(a in 0.0f64..1000.0, b in 0.0f64..1000.0, nu in -0.55f64..0.0) {
        let t = thresholds();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mk = |tau| ContactRecord::new(Probability::ONE, tau, nu).unwrap();
        prop_assert!(
            infection_transition_fraction(&mk(lo), &t).unwrap()
                <= infection_transition_fraction(&mk(hi), &t).unwrap()
        );
    }

    #[test]
    fn appending_never_lowers_contact_probability(
        raw in proptest::collection::vec(record_strategy(), 0..20),
        extra in record_strategy(),
    ) {
        let t = thresholds();
        let mut records = to_records(&raw);
        let before = propagate_contacts(&records, &t).unwrap();
        records.extend(to_records(&[extra]));
        prop_assert!(propagate_contacts(&records, &t).unwrap() >= before);
    }

    #[test]
    fn weak_signal_annihilates(tau in 0.0f64..1e5, nu in -10.0f64..-0.5500001, c in 0.0f64..=1.0) {
        let t = thresholds();
        let r = ContactRecord::new(Probability::new(c).unwrap(), tau, nu).unwrap();
        prop_assert_eq!(infection_transition_fraction(&r, &t).unwrap(), 0.0);
    }

    #[test]
    fn evaluation_is_deterministic(raw in proptest::collection::vec(record_strategy(), 0..20), s in any::<bool>()) {
        let t = thresholds();
        let state = UserState { symptom: s.into(), ..UserState::default() };
        let a = evaluate_user(&state, &to_records(&raw), &t).unwrap();
        let b = evaluate_user(&state, &to_records(&raw), &t).unwrap();
        prop_assert_eq!(a.total_probability.get().to_bits(), b.total_probability.get().to_bits());
    }

    #[test]
    fn symptoms_reach_theta_without_clamping(p in 0.0f64..=1.0, theta in 1e-9f64..=1.0) {
        let p = Probability::new(p).unwrap();
        let theta = Probability::new(theta).unwrap();
        let alpha = symptom_probability(SymptomFlag::PRESENT, p, theta);
        let total = total_probability(p, alpha);
        prop_assert!(!total.clamp_fired);
        prop_assert!(total.probability.get() <= 1.0);
        prop_assert!(total.probability >= theta);
    }
}

#[test]
fn fresh_evaluation_equals_closed_form() {
    // P = sum + S * (1 - sum) * theta with sum = 0.5 * 0.6 + 1.0 * 0.3
    let t = thresholds();
    let records = to_records(&[(0.6, 60.0, -0.3), (0.3, 500.0, -0.55), (0.9, 500.0, -0.6)]);
    let sick = UserState {
        symptom: SymptomFlag::PRESENT,
        ..UserState::default()
    };
    let out = evaluate_user(&sick, &records, &t).unwrap();
    let sum = 0.5 * 0.6 + 1.0 * 0.3;
    let expected = sum + (1.0 - sum) * 0.9;
    assert!((out.total_probability.get() - expected).abs() < 1e-12);
    assert!(out.infected);
}
