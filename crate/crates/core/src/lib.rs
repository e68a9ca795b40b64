//! Contact-trace infection probability engine.
//!
//! * [`model`]: per-user probability calculus over traced meetups and symptoms;
//! * [`risk`]: four-band risk levels and report documents;
//! * [`sim`]: seeded agent-based simulation of daily meetups;
//! * [`compare`]: real case series ingestion, metrics and curve export.

pub mod compare;
pub mod error;
pub mod model;
pub mod risk;
pub mod sim;

pub use error::{ConfigError, DataError, ModelError, SimError};
pub use model::{
    contact_fraction, contact_sum, evaluate_user, infection_transition_fraction,
    propagate_contacts, symptom_probability, total_probability, transmission_gate, ContactRecord,
    Probability, SymptomFlag, Thresholds, TotalProbability, UserState,
};
pub use risk::{build_report, infection_level, GuidanceTable, Report, RiskBands, RiskLevel};
pub use sim::{DailySeries, MeetupEvent, PopulationState, SimulationConfig, TableCase};
