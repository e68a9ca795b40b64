//! Fog-tier contact-tracing service.
//!
//! Devices register users and upload meetups and symptom reports; the store
//! queues them, and each compute cycle re-evaluates affected users with the
//! shared probability kernel, assigns risk levels and appends reports. Reports
//! are pushed to a cloud sink at least once, and the whole store can be
//! snapshotted and restored.

pub mod config;
pub mod error;
pub mod http;
pub mod sink;
pub mod store;

pub use config::{ServiceConfig, SinkConfig};
pub use error::ServiceError;
pub use http::{open_store, router, run_service, serve, AppState};
pub use sink::{CloudSink, FileSink, HttpSink};
pub use store::{
    Clock, CycleSummary, DailyStats, FogStore, IngestEvent, IngestPayload, ManualClock, Meetup,
    MeetupAck, NewUser, StoreSettings, StoreSnapshot, SystemClock, UserProfile,
};
