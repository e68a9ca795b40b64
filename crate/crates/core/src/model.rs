//! Per-user infection probability calculus.
//!
//! A user's contact probability `p` is the clamped sum of `mu * C` over the
//! meetups they had with infected peers, where `mu = lambda * omega` combines
//! a binary signal-strength gate with a saturating contact-time ratio and `C`
//! is the peer's own probability. Symptoms add `alpha = S * (1 - p) * theta`,
//! which lifts every symptomatic user to at least `theta`. The total
//! `P = p + alpha` is compared against `theta` to decide membership in the
//! infected set.
//!
//! Some published pseudocode for the per-meetup loop multiplies the gate by
//! the signal strength rather than by the contact-time ratio. That form mixes
//! a dBm value into a probability and is not used here: `mu` is always the
//! gate times the time ratio.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self, ModelError> {
        if value.is_nan() || !(0.0..=1.0).contains(&value) {
            return Err(ModelError::ProbabilityOutOfRange(value));
        }
        Ok(Probability(value))
    }

    /// Clamps `value` into `[0, 1]`. NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = ModelError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binary symptom status. Serialized as `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct SymptomFlag(bool);

impl SymptomFlag {
    pub const ABSENT: SymptomFlag = SymptomFlag(false);
    pub const PRESENT: SymptomFlag = SymptomFlag(true);

    pub fn from_bit(bit: i64) -> Result<Self, ModelError> {
        match bit {
            0 => Ok(SymptomFlag(false)),
            1 => Ok(SymptomFlag(true)),
            other => Err(ModelError::InvalidSymptomFlag(other)),
        }
    }

    pub fn is_present(self) -> bool {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        if self.0 {
            1.0
        } else {
            0.0
        }
    }
}

impl From<bool> for SymptomFlag {
    fn from(b: bool) -> Self {
        SymptomFlag(b)
    }
}

impl TryFrom<i64> for SymptomFlag {
    type Error = ModelError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        SymptomFlag::from_bit(value)
    }
}

impl From<SymptomFlag> for u8 {
    fn from(s: SymptomFlag) -> u8 {
        s.0 as u8
    }
}

/// One traced meetup seen from one user's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactRecord {
    /// Infection probability of the peer at the time of the meetup.
    pub peer_probability: Probability,
    /// Seconds the two devices stayed connected.
    pub contact_time_s: f64,
    /// Received signal strength, dBm.
    pub signal_dbm: f64,
}

impl ContactRecord {
    pub fn new(
        peer_probability: Probability,
        contact_time_s: f64,
        signal_dbm: f64,
    ) -> Result<Self, ModelError> {
        let record = ContactRecord {
            peer_probability,
            contact_time_s,
            signal_dbm,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.contact_time_s.is_finite() {
            return Err(ModelError::NonFinite {
                name: "contact time",
                value: self.contact_time_s,
            });
        }
        if self.contact_time_s < 0.0 {
            return Err(ModelError::NegativeContactTime(self.contact_time_s));
        }
        if !self.signal_dbm.is_finite() {
            return Err(ModelError::NonFinite {
                name: "signal strength",
                value: self.signal_dbm,
            });
        }
        Probability::new(self.peer_probability.get())?;
        Ok(())
    }
}

/// Infection threshold `theta`, contact-time threshold and signal threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub theta: Probability,
    pub tau0_s: f64,
    pub nu0_dbm: f64,
}

impl Thresholds {
    pub fn new(theta: f64, tau0_s: f64, nu0_dbm: f64) -> Result<Self, ModelError> {
        let t = Thresholds {
            theta: Probability::new(theta).map_err(|_| ModelError::InvalidTheta(theta))?,
            tau0_s,
            nu0_dbm,
        };
        t.validate()?;
        Ok(t)
    }

    /// Builds thresholds from a contact-time threshold given in minutes.
    pub fn from_minutes(theta: f64, tau0_min: f64, nu0_dbm: f64) -> Result<Self, ModelError> {
        Thresholds::new(theta, tau0_min * 60.0, nu0_dbm)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let theta = self.theta.get();
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(ModelError::InvalidTheta(theta));
        }
        if !self.tau0_s.is_finite() {
            return Err(ModelError::NonFinite {
                name: "tau0",
                value: self.tau0_s,
            });
        }
        if self.tau0_s <= 0.0 {
            return Err(ModelError::NonPositiveTau0(self.tau0_s));
        }
        if !self.nu0_dbm.is_finite() {
            return Err(ModelError::NonFinite {
                name: "nu0",
                value: self.nu0_dbm,
            });
        }
        Ok(())
    }
}

/// Epidemic state of a single user.
///
/// `infected` is the hidden-state membership in the infected set and
/// `traced_count` the observed number of meetups with infected peers so far.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UserState {
    pub contact_probability: Probability,
    pub symptom: SymptomFlag,
    pub symptom_probability: Probability,
    pub total_probability: Probability,
    pub infected: bool,
    pub traced_count: u64,
}

impl UserState {
    /// A user seeded directly into the infected set with `P = 1`.
    pub fn seeded_infected() -> Self {
        UserState {
            contact_probability: Probability::ONE,
            total_probability: Probability::ONE,
            infected: true,
            ..UserState::default()
        }
    }
}

/// Signal-strength gate: 1 when `nu >= nu0`, else 0.
pub fn transmission_gate(nu_dbm: f64, nu0_dbm: f64) -> Result<u8, ModelError> {
    if !nu_dbm.is_finite() {
        return Err(ModelError::NonFinite {
            name: "signal strength",
            value: nu_dbm,
        });
    }
    if !nu0_dbm.is_finite() {
        return Err(ModelError::NonFinite {
            name: "nu0",
            value: nu0_dbm,
        });
    }
    Ok(u8::from(nu_dbm >= nu0_dbm))
}

/// Contact-time ratio `tau / tau0`, saturating at 1.
pub fn contact_fraction(tau_s: f64, tau0_s: f64) -> Result<f64, ModelError> {
    if !tau_s.is_finite() {
        return Err(ModelError::NonFinite {
            name: "contact time",
            value: tau_s,
        });
    }
    if tau_s < 0.0 {
        return Err(ModelError::NegativeContactTime(tau_s));
    }
    if !tau0_s.is_finite() || tau0_s <= 0.0 {
        return Err(ModelError::NonPositiveTau0(tau0_s));
    }
    if tau_s <= tau0_s {
        Ok(tau_s / tau0_s)
    } else {
        Ok(1.0)
    }
}

/// Infection transition fraction `mu = lambda * omega` for one meetup.
pub fn infection_transition_fraction(
    record: &ContactRecord,
    thresholds: &Thresholds,
) -> Result<f64, ModelError> {
    record.validate()?;
    let gate = transmission_gate(record.signal_dbm, thresholds.nu0_dbm)?;
    let omega = contact_fraction(record.contact_time_s, thresholds.tau0_s)?;
    Ok(f64::from(gate) * omega)
}

/// Unclamped `sum(mu_k * C_k)` in record order.
pub fn contact_sum(records: &[ContactRecord], thresholds: &Thresholds) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    for record in records {
        let mu = infection_transition_fraction(record, thresholds)?;
        sum += mu * record.peer_probability.get();
    }
    Ok(sum)
}

/// Contact probability from a full list of meetups, clamped once after summation.
pub fn propagate_contacts(
    records: &[ContactRecord],
    thresholds: &Thresholds,
) -> Result<Probability, ModelError> {
    Ok(Probability::saturating(contact_sum(records, thresholds)?))
}

/// Extra probability contributed by symptoms: `S * (1 - p) * theta`.
pub fn symptom_probability(
    symptom: SymptomFlag,
    p: Probability,
    theta: Probability,
) -> Probability {
    Probability::saturating(symptom.as_f64() * (1.0 - p.get()) * theta.get())
}

/// Result of [`total_probability`]; `clamp_fired` reports inputs whose sum left `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalProbability {
    pub probability: Probability,
    pub clamp_fired: bool,
}

/// `P = p + alpha`. With `alpha` from [`symptom_probability`] the sum never
/// exceeds 1; anything else is clamped and logged.
pub fn total_probability(p: Probability, alpha: Probability) -> TotalProbability {
    let raw = p.get() + alpha.get();
    let clamp_fired = raw > 1.0;
    if clamp_fired {
        log::warn!("total probability {raw} exceeds 1 (p={p}, alpha={alpha}); clamping");
    }
    TotalProbability {
        probability: Probability::saturating(raw),
        clamp_fired,
    }
}

/// Applies one round of observations to `state`.
///
/// `records` are the meetups with infected peers observed since the state was
/// last evaluated; they are added to the user's existing contact probability
/// before the single clamp, so evaluating a fresh state is exactly the
/// closed-form contact sum. The symptom flag is taken from `state`.
pub fn evaluate_user(
    state: &UserState,
    records: &[ContactRecord],
    thresholds: &Thresholds,
) -> Result<UserState, ModelError> {
    thresholds.validate()?;
    let raw = state.contact_probability.get() + contact_sum(records, thresholds)?;
    let p = Probability::saturating(raw);
    let theta = thresholds.theta;
    let alpha = symptom_probability(state.symptom, p, theta);
    let mut total = total_probability(p, alpha).probability;
    // p + (1 - p) * theta >= theta holds exactly; only rounding can break it.
    if state.symptom.is_present() && total < theta {
        total = theta;
    }
    Ok(UserState {
        contact_probability: p,
        symptom: state.symptom,
        symptom_probability: alpha,
        total_probability: total,
        infected: total >= theta,
        traced_count: state.traced_count + records.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thr() -> Thresholds {
        Thresholds::new(0.9, 120.0, -0.55).unwrap()
    }

    fn rec(c: f64, tau: f64, nu: f64) -> ContactRecord {
        ContactRecord::new(Probability::new(c).unwrap(), tau, nu).unwrap()
    }

    #[test]
    fn gate_table() {
        assert_eq!(transmission_gate(-0.40, -0.55).unwrap(), 1);
        assert_eq!(transmission_gate(-0.70, -0.55).unwrap(), 0);
        assert_eq!(transmission_gate(-0.55, -0.55).unwrap(), 1);
        assert!(transmission_gate(f64::NAN, -0.55).is_err());
        assert!(transmission_gate(-0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn fraction_table() {
        assert_eq!(contact_fraction(120.0, 120.0).unwrap(), 1.0);
        assert_eq!(contact_fraction(60.0, 120.0).unwrap(), 0.5);
        assert_eq!(contact_fraction(300.0, 120.0).unwrap(), 1.0);
        assert_eq!(contact_fraction(0.0, 120.0).unwrap(), 0.0);
        assert!(matches!(
            contact_fraction(10.0, 0.0),
            Err(ModelError::NonPositiveTau0(_))
        ));
        assert!(matches!(
            contact_fraction(-1.0, 120.0),
            Err(ModelError::NegativeContactTime(_))
        ));
    }

    #[test]
    fn transition_fraction_examples() {
        let t = thr();
        assert_eq!(
            infection_transition_fraction(&rec(1.0, 60.0, -0.40), &t).unwrap(),
            0.5
        );
        assert_eq!(
            infection_transition_fraction(&rec(1.0, 600.0, -0.90), &t).unwrap(),
            0.0
        );
        assert_eq!(
            infection_transition_fraction(&rec(1.0, 0.0, -0.40), &t).unwrap(),
            0.0
        );
    }

    #[test]
    fn propagate_examples() {
        let t = thr();
        assert_eq!(propagate_contacts(&[], &t).unwrap(), Probability::ZERO);
        // mu = 1.0 and mu = 0.5 records
        let saturating = [rec(0.9, 300.0, -0.4), rec(0.5, 60.0, -0.4)];
        assert_eq!(propagate_contacts(&saturating, &t).unwrap().get(), 1.0);
        let single = [rec(0.4, 60.0, -0.4)];
        let expected = 0.5 * 0.4;
        assert_eq!(propagate_contacts(&single, &t).unwrap().get(), expected);
    }

    #[test]
    fn invalid_record_is_rejected_without_partial_result() {
        let t = thr();
        let bad = ContactRecord {
            peer_probability: Probability::ONE,
            contact_time_s: -5.0,
            signal_dbm: -0.1,
        };
        assert!(propagate_contacts(&[rec(0.5, 60.0, -0.4), bad], &t).is_err());
    }

    #[test]
    fn symptom_examples() {
        let theta = Probability::new(0.9).unwrap();
        let p = |v| Probability::new(v).unwrap();
        assert_eq!(
            symptom_probability(SymptomFlag::ABSENT, p(0.7), theta).get(),
            0.0
        );
        assert_eq!(
            symptom_probability(SymptomFlag::PRESENT, p(0.0), theta).get(),
            0.9
        );
        let alpha = symptom_probability(SymptomFlag::PRESENT, p(0.4), theta).get();
        assert!((alpha - 0.54).abs() < 1e-12);
        assert!(0.4 + alpha >= 0.9);
    }

    #[test]
    fn total_examples() {
        let p = |v| Probability::new(v).unwrap();
        assert_eq!(total_probability(p(0.2), p(0.0)).probability.get(), 0.2);
        assert_eq!(total_probability(p(0.0), p(0.9)).probability.get(), 0.9);
        assert_eq!(total_probability(p(1.0), p(0.0)).probability.get(), 1.0);
        let clamped = total_probability(p(0.8), p(0.5));
        assert!(clamped.clamp_fired);
        assert_eq!(clamped.probability, Probability::ONE);
    }

    #[test]
    fn evaluate_examples() {
        let t = thr();
        let fresh = UserState::default();
        let out = evaluate_user(&fresh, &[], &t).unwrap();
        assert_eq!(out.total_probability.get(), 0.0);
        assert!(!out.infected);

        let sick = UserState {
            symptom: SymptomFlag::PRESENT,
            ..UserState::default()
        };
        let out = evaluate_user(&sick, &[], &t).unwrap();
        assert_eq!(out.total_probability.get(), 0.9);
        assert!(out.infected);

        // p = 0.5 from one half-length meetup with a certain peer
        let out = evaluate_user(&sick, &[rec(1.0, 60.0, -0.4)], &t).unwrap();
        assert_eq!(out.contact_probability.get(), 0.5);
        assert!((out.total_probability.get() - 0.95).abs() < 1e-12);
        assert!(out.infected);
        assert_eq!(out.traced_count, 1);
    }

    #[test]
    fn evaluate_accumulates_across_rounds() {
        let t = thr();
        let first = evaluate_user(&UserState::default(), &[rec(1.0, 60.0, -0.4)], &t).unwrap();
        let second = evaluate_user(&first, &[rec(1.0, 48.0, -0.4)], &t).unwrap();
        assert!((second.contact_probability.get() - 0.9).abs() < 1e-12);
        assert_eq!(second.traced_count, 2);
        assert!(second.infected);
    }

    #[test]
    fn theta_boundary_counts_as_infected() {
        let t = thr();
        // 0.9 of tau0 with a certain peer lands exactly on theta
        let out = evaluate_user(&UserState::default(), &[rec(1.0, 108.0, -0.55)], &t).unwrap();
        assert_eq!(out.total_probability.get(), 108.0 / 120.0);
        assert_eq!(out.infected, out.total_probability >= t.theta);
    }

    #[test]
    fn constructors_reject_bad_values() {
        assert!(Probability::new(1.01).is_err());
        assert!(Probability::new(-0.01).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert!(SymptomFlag::from_bit(2).is_err());
        assert!(Thresholds::new(0.0, 120.0, -0.55).is_err());
        assert!(Thresholds::new(0.9, 0.0, -0.55).is_err());
        assert_eq!(
            Thresholds::from_minutes(0.9, 2.0, -0.55).unwrap().tau0_s,
            120.0
        );
    }

    #[test]
    fn serde_shapes() {
        assert_eq!(serde_json::to_string(&SymptomFlag::PRESENT).unwrap(), "1");
        assert!(serde_json::from_str::<SymptomFlag>("2").is_err());
        assert!(serde_json::from_str::<Probability>("1.5").is_err());
    }
}
