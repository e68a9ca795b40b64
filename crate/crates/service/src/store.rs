//! In-memory fog store: registration, ingestion, batch cycles, reports and snapshots.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use fogtrace_core::{
    build_report, evaluate_user, infection_level, ContactRecord, GuidanceTable, Probability,
    Report, RiskBands, SymptomFlag, Thresholds, UserState,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ServiceError;
use crate::sink::CloudSink;

pub trait Clock: Send + Sync {
    /// UTC seconds since the Unix epoch.
    fn now(&self) -> i64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> i64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0)
    }
}

/// Clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(start: i64) -> Self {
        ManualClock(AtomicI64::new(start))
    }

    pub fn set(&self, t: i64) {
        self.0.store(t, Ordering::SeqCst);
    }

    pub fn advance(&self, secs: i64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> i64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub contact_number: String,
    pub location: String,
    pub age: u32,
}

/// Registration request. Without an explicit id, one is derived from the contact number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewUser {
    #[serde(default)]
    pub user_id: Option<String>,
    pub contact_number: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub age: u32,
}

/// A meetup between two registered users; the ids stand in for the exchanged device signatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meetup {
    pub user_a: String,
    pub user_b: String,
    pub contact_time_s: f64,
    pub signal_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IngestPayload {
    Meetup(Meetup),
    Symptom { user_id: String, flag: SymptomFlag },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestEvent {
    pub payload: IngestPayload,
    pub received_at: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetupAck {
    pub ok: bool,
    /// Set when either party is currently in the infected set.
    pub alert: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub cycle: u64,
    pub events_processed: usize,
    pub users_updated: usize,
    pub newly_infected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyStats {
    pub new_infections: Vec<u64>,
    pub cumulative: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSettings {
    pub thresholds: Thresholds,
    pub bands: RiskBands,
    pub guidance: GuidanceTable,
}

/// Everything persisted by a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    pub settings: StoreSettings,
    pub profiles: BTreeMap<String, UserProfile>,
    pub states: BTreeMap<String, UserState>,
    pub pending: Vec<IngestEvent>,
    pub reports: Vec<Report>,
    pub latest_report: BTreeMap<String, usize>,
    pub cycle: u64,
    pub sync_cursor: usize,
    pub daily_new_infections: Vec<u64>,
}

const SNAPSHOT_FORMAT: &str = "fogtrace-store";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotEnvelope {
    format: String,
    version: u32,
    sha256: String,
    payload: String,
}

/// Single-writer store. Callers serialize mutation (the HTTP layer holds it
/// behind a lock), so a cycle is never observed half-applied.
pub struct FogStore {
    data: StoreSnapshot,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for FogStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FogStore")
            .field("users", &self.data.profiles.len())
            .field("pending", &self.data.pending.len())
            .field("cycle", &self.data.cycle)
            .finish()
    }
}

fn derived_user_id(contact_number: &str) -> String {
    let digest = Sha256::digest(contact_number.trim().as_bytes());
    format!("u-{}", &hex::encode(digest)[..16])
}

fn check_id(id: &str) -> Result<(), ServiceError> {
    if id.is_empty() || id.len() > 128 || id.contains(['/', '?', '#']) || id.trim() != id {
        return Err(ServiceError::Invalid(format!("invalid user id {id:?}")));
    }
    Ok(())
}

impl FogStore {
    pub fn new(settings: StoreSettings, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        settings.thresholds.validate()?;
        settings.bands.validate()?;
        Ok(FogStore {
            data: StoreSnapshot {
                settings,
                profiles: BTreeMap::new(),
                states: BTreeMap::new(),
                pending: Vec::new(),
                reports: Vec::new(),
                latest_report: BTreeMap::new(),
                cycle: 0,
                sync_cursor: 0,
                daily_new_infections: Vec::new(),
            },
            clock,
        })
    }

    pub fn settings(&self) -> &StoreSettings {
        &self.data.settings
    }

    pub fn set_settings(&mut self, settings: StoreSettings) -> Result<(), ServiceError> {
        settings.thresholds.validate()?;
        settings.bands.validate()?;
        self.data.settings = settings;
        Ok(())
    }

    pub fn cycle(&self) -> u64 {
        self.data.cycle
    }

    pub fn pending_len(&self) -> usize {
        self.data.pending.len()
    }

    pub fn user_count(&self) -> usize {
        self.data.profiles.len()
    }

    pub fn user_state(&self, user_id: &str) -> Option<&UserState> {
        self.data.states.get(user_id)
    }

    pub fn report_history(&self) -> &[Report] {
        &self.data.reports
    }

    pub fn register_user(&mut self, request: NewUser) -> Result<String, ServiceError> {
        if request.contact_number.trim().is_empty() {
            return Err(ServiceError::Invalid("contact_number is required".into()));
        }
        let user_id = match request.user_id {
            Some(id) => id,
            None => derived_user_id(&request.contact_number),
        };
        check_id(&user_id)?;
        let profile = UserProfile {
            user_id: user_id.clone(),
            contact_number: request.contact_number,
            location: request.location,
            age: request.age,
        };
        match self.data.profiles.get(&user_id) {
            Some(existing) if *existing == profile => Ok(user_id),
            Some(_) => Err(ServiceError::Conflict(format!(
                "user {user_id} is already registered with a different profile"
            ))),
            None => {
                self.data.profiles.insert(user_id.clone(), profile);
                self.data
                    .states
                    .insert(user_id.clone(), UserState::default());
                Ok(user_id)
            }
        }
    }

    fn require_user(&self, user_id: &str) -> Result<&UserState, ServiceError> {
        self.data
            .states
            .get(user_id)
            .ok_or_else(|| ServiceError::NotFound(user_id.to_owned()))
    }

    pub fn ingest_meetup(&mut self, meetup: Meetup) -> Result<MeetupAck, ServiceError> {
        if meetup.user_a == meetup.user_b {
            return Err(ServiceError::Invalid(
                "a meetup needs two different users".into(),
            ));
        }
        ContactRecord::new(Probability::ZERO, meetup.contact_time_s, meetup.signal_dbm)?;
        let a = self.require_user(&meetup.user_a)?.infected;
        let b = self.require_user(&meetup.user_b)?.infected;
        self.data.pending.push(IngestEvent {
            payload: IngestPayload::Meetup(meetup),
            received_at: self.clock.now(),
        });
        Ok(MeetupAck {
            ok: true,
            alert: a || b,
        })
    }

    pub fn ingest_symptom(&mut self, user_id: &str, flag: i64) -> Result<(), ServiceError> {
        let flag = SymptomFlag::from_bit(flag)?;
        self.require_user(user_id)?;
        self.data.pending.push(IngestEvent {
            payload: IngestPayload::Symptom {
                user_id: user_id.to_owned(),
                flag,
            },
            received_at: self.clock.now(),
        });
        Ok(())
    }

    /// Drains pending events and re-evaluates every affected user.
    ///
    /// Peer probabilities and infected-set membership are read as they stood
    /// when the cycle began. Infected users are not re-evaluated.
    pub fn compute_cycle(&mut self) -> Result<CycleSummary, ServiceError> {
        let events = std::mem::take(&mut self.data.pending);
        let thresholds = self.data.settings.thresholds;
        let states = &self.data.states;

        let mut records: BTreeMap<&str, Vec<ContactRecord>> = BTreeMap::new();
        let mut symptoms: BTreeMap<&str, SymptomFlag> = BTreeMap::new();
        for event in &events {
            match &event.payload {
                IngestPayload::Meetup(m) => {
                    for (me, peer) in [(&m.user_a, &m.user_b), (&m.user_b, &m.user_a)] {
                        let (Some(me_state), Some(peer_state)) = (states.get(me), states.get(peer))
                        else {
                            continue;
                        };
                        if peer_state.infected && !me_state.infected {
                            records.entry(me).or_default().push(ContactRecord {
                                peer_probability: peer_state.total_probability,
                                contact_time_s: m.contact_time_s,
                                signal_dbm: m.signal_dbm,
                            });
                        }
                    }
                }
                IngestPayload::Symptom { user_id, flag } => {
                    symptoms.insert(user_id, *flag);
                }
            }
        }

        let mut touched: BTreeMap<&str, UserState> = BTreeMap::new();
        for (user, flag) in &symptoms {
            if let Some(state) = states.get(*user) {
                if !state.infected && state.symptom != *flag {
                    touched.insert(
                        user,
                        UserState {
                            symptom: *flag,
                            ..*state
                        },
                    );
                }
            }
        }
        for user in records.keys() {
            if !touched.contains_key(user) {
                touched.insert(user, states[*user]);
            }
        }

        let mut updated = Vec::with_capacity(touched.len());
        for (user, state) in touched {
            let recs = records.get(user).map(Vec::as_slice).unwrap_or(&[]);
            let next = evaluate_user(&state, recs, &thresholds)?;
            updated.push((user.to_owned(), next));
        }

        let now = self.clock.now();
        let mut newly_infected = 0;
        let users_updated = updated.len();
        for (user, next) in updated {
            if next.infected {
                newly_infected += 1;
            }
            self.data.states.insert(user.clone(), next);
            self.push_report(&user, now)?;
        }
        let unreported: Vec<String> = self
            .data
            .profiles
            .keys()
            .filter(|id| !self.data.latest_report.contains_key(*id))
            .cloned()
            .collect();
        for user in unreported {
            self.push_report(&user, now)?;
        }

        self.data.cycle += 1;
        self.data.daily_new_infections.push(newly_infected);
        Ok(CycleSummary {
            cycle: self.data.cycle,
            events_processed: events.len(),
            users_updated,
            newly_infected,
        })
    }

    fn make_report(&self, user_id: &str, issued_at: i64) -> Result<Report, ServiceError> {
        let state = self.require_user(user_id)?;
        let settings = &self.data.settings;
        let level = infection_level(state.total_probability, &settings.bands)?;
        Ok(build_report(
            user_id,
            state,
            level,
            &settings.guidance,
            issued_at,
        )?)
    }

    fn push_report(&mut self, user_id: &str, issued_at: i64) -> Result<(), ServiceError> {
        let report = self.make_report(user_id, issued_at)?;
        self.data.reports.push(report);
        self.data
            .latest_report
            .insert(user_id.to_owned(), self.data.reports.len() - 1);
        Ok(())
    }

    /// Latest report, or a provisional one built from the current state before the first cycle.
    pub fn get_report(&self, user_id: &str) -> Result<Report, ServiceError> {
        self.require_user(user_id)?;
        match self.data.latest_report.get(user_id) {
            Some(&idx) => Ok(self.data.reports[idx].clone()),
            None => self.make_report(user_id, self.clock.now()),
        }
    }

    pub fn daily_stats(&self) -> DailyStats {
        let new_infections = self.data.daily_new_infections.clone();
        let cumulative = new_infections
            .iter()
            .scan(0u64, |acc, &f| {
                *acc += f;
                Some(*acc)
            })
            .collect();
        DailyStats {
            new_infections,
            cumulative,
        }
    }

    /// Reports issued since the last successful sync.
    pub fn unsynced_reports(&self) -> &[Report] {
        &self.data.reports[self.data.sync_cursor..]
    }

    /// Uploads unsynced reports. The cursor moves only if the sink accepts the batch.
    pub fn sync_cloud(&mut self, sink: &mut dyn CloudSink) -> Result<usize, ServiceError> {
        let batch = self.unsynced_reports();
        if batch.is_empty() {
            return Ok(0);
        }
        let n = batch.len();
        sink.deliver(batch)?;
        self.data.sync_cursor += n;
        Ok(n)
    }

    pub fn to_snapshot(&self) -> StoreSnapshot {
        self.data.clone()
    }

    pub fn from_snapshot(data: StoreSnapshot, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let mut store = FogStore::new(data.settings.clone(), clock)?;
        if data.sync_cursor > data.reports.len()
            || data
                .latest_report
                .values()
                .any(|&i| i >= data.reports.len())
            || data.profiles.keys().ne(data.states.keys())
        {
            return Err(ServiceError::Integrity(
                "snapshot indices are inconsistent".into(),
            ));
        }
        store.data = data;
        Ok(store)
    }

    /// Writes the store atomically (temporary file + rename) with a SHA-256 checksum.
    pub fn snapshot(&self, path: &Path) -> Result<(), ServiceError> {
        let payload = serde_json::to_string(&self.data)
            .map_err(|e| ServiceError::Integrity(e.to_string()))?;
        let envelope = SnapshotEnvelope {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            sha256: hex::encode(Sha256::digest(payload.as_bytes())),
            payload,
        };
        let bytes =
            serde_json::to_vec(&envelope).map_err(|e| ServiceError::Integrity(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn restore(path: &Path, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let bytes = fs::read(path)?;
        let envelope: SnapshotEnvelope = serde_json::from_slice(&bytes)
            .map_err(|e| ServiceError::Integrity(format!("unreadable envelope: {e}")))?;
        if envelope.format != SNAPSHOT_FORMAT || envelope.version != SNAPSHOT_VERSION {
            return Err(ServiceError::Integrity(format!(
                "unsupported snapshot {} v{}",
                envelope.format, envelope.version
            )));
        }
        let digest = hex::encode(Sha256::digest(envelope.payload.as_bytes()));
        if digest != envelope.sha256 {
            return Err(ServiceError::Integrity("checksum mismatch".into()));
        }
        let data: StoreSnapshot = serde_json::from_str(&envelope.payload)
            .map_err(|e| ServiceError::Integrity(format!("unreadable payload: {e}")))?;
        FogStore::from_snapshot(data, clock)
    }
}
