//! Destinations for report uploads.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;

use fogtrace_core::Report;

use crate::error::ServiceError;

/// Receives batches of reports. A batch counts as delivered only when
/// `deliver` returns `Ok`; on error the whole batch is offered again later.
pub trait CloudSink: Send {
    fn deliver(&mut self, batch: &[Report]) -> Result<(), ServiceError>;
}

/// Appends newline-delimited JSON reports to a local file.
#[derive(Debug, Clone)]
pub struct FileSink {
    path: PathBuf,
}

impl FileSink {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileSink { path: path.into() }
    }
}

impl CloudSink for FileSink {
    fn deliver(&mut self, batch: &[Report]) -> Result<(), ServiceError> {
        let mut buf = Vec::new();
        for report in batch {
            serde_json::to_writer(&mut buf, report)
                .map_err(|e| ServiceError::Sink(e.to_string()))?;
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| ServiceError::Sink(format!("{}: {e}", self.path.display())))?;
        file.write_all(&buf)
            .and_then(|_| file.sync_data())
            .map_err(|e| ServiceError::Sink(format!("{}: {e}", self.path.display())))
    }
}

/// POSTs each batch as a JSON array; any 2xx status acknowledges it.
pub struct HttpSink {
    url: String,
    client: reqwest::blocking::Client,
}

impl HttpSink {
    pub fn new(url: impl Into<String>) -> Result<Self, ServiceError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(30))
            .build()
            .map_err(|e| ServiceError::Config(e.to_string()))?;
        Ok(HttpSink {
            url: url.into(),
            client,
        })
    }
}

impl CloudSink for HttpSink {
    fn deliver(&mut self, batch: &[Report]) -> Result<(), ServiceError> {
        let response = self
            .client
            .post(&self.url)
            .json(batch)
            .send()
            .map_err(|e| ServiceError::Sink(e.to_string()))?;
        if response.status().is_success() {
            Ok(())
        } else {
            Err(ServiceError::Sink(format!(
                "{} answered {}",
                self.url,
                response.status()
            )))
        }
    }
}
