//! Real case series ingestion, simulated-versus-real metrics and curve export.
//!
//! File formats (UTF-8, LF line endings):
//!
//! * case series: header `date,new_cases`, one row per consecutive ISO-8601 date;
//! * daily series: header `day,new_infections,cumulative`, days numbered from 1;
//! * curves: header `day,<name>,...`, one column per series; shorter series
//!   leave trailing cells empty.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::sim::DailySeries;

/// Observed new cases per day, starting at `start_date`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub label: String,
    pub start_date: NaiveDate,
    pub new_cases: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMetrics {
    pub aligned_days: usize,
    pub mean_absolute_error: f64,
    pub root_mean_square_error: f64,
    /// Simulated total minus real total over the aligned days.
    pub total_count_delta: i64,
    /// Simulated minus real, per aligned day.
    pub per_day_delta: Vec<i64>,
}

/// A named column for [`export_curves`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub values: Vec<u64>,
}

impl Curve {
    pub fn new(name: impl Into<String>, values: Vec<u64>) -> Self {
        Curve {
            name: name.into(),
            values,
        }
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> DataError {
    DataError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> DataError {
    DataError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Data rows as `(line number, fields)`.
type NumberedRows = Vec<(u64, Vec<String>)>;

/// Reads CSV records from `text`, checking the header.
fn csv_rows(
    path: &Path,
    text: &str,
    expected_header: Option<&[&str]>,
) -> Result<(Vec<String>, NumberedRows), DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(parse_err(path, 1, "empty file or missing header"));
    }
    if let Some(expected) = expected_header {
        if header != expected {
            return Err(parse_err(
                path,
                1,
                format!(
                    "expected header {:?}, found {:?}",
                    expected.join(","),
                    header.join(",")
                ),
            ));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, record.iter().map(|f| f.trim().to_owned()).collect()));
    }
    Ok((header, rows))
}

fn parse_count(path: &Path, line: u64, field: &str, what: &str) -> Result<u64, DataError> {
    let value: i64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what} {field:?} is not an integer")))?;
    u64::try_from(value).map_err(|_| parse_err(path, line, format!("negative {what} {value}")))
}

/// Loads a `date,new_cases` file. The label is the file stem.
pub fn load_case_series(path: &Path) -> Result<CaseSeries, DataError> {
    let text = read_text(path)?;
    let (_, rows) = csv_rows(path, &text, Some(&["date", "new_cases"]))?;
    if rows.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    let mut start_date = None;
    let mut prev: Option<NaiveDate> = None;
    let mut new_cases = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        let date = NaiveDate::parse_from_str(&fields[0], "%Y-%m-%d")
            .map_err(|_| parse_err(path, line, format!("invalid date {:?}", fields[0])))?;
        if let Some(p) = prev {
            if date == p {
                return Err(parse_err(path, line, format!("duplicate date {date}")));
            }
            if Some(date) != p.succ_opt() {
                return Err(parse_err(
                    path,
                    line,
                    format!("date {date} does not follow {p}; dates must be consecutive"),
                ));
            }
        }
        start_date.get_or_insert(date);
        prev = Some(date);
        new_cases.push(parse_count(path, line, &fields[1], "case count")?);
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(CaseSeries {
        label,
        start_date: start_date.expect("at least one row"),
        new_cases,
    })
}

pub fn case_series_csv(series: &CaseSeries) -> String {
    let mut out = String::from("date,new_cases\n");
    let mut date = series.start_date;
    for &n in &series.new_cases {
        out.push_str(&format!("{},{}\n", date.format("%Y-%m-%d"), n));
        date = date.succ_opt().expect("date in range");
    }
    out
}

pub fn write_case_series(series: &CaseSeries, path: &Path) -> Result<(), DataError> {
    fs::write(path, case_series_csv(series)).map_err(io_err(path))
}

pub fn daily_series_csv(series: &DailySeries) -> String {
    let mut out = String::from("day,new_infections,cumulative\n");
    for (i, (f, c)) in series
        .new_infections
        .iter()
        .zip(series.cumulative())
        .enumerate()
    {
        out.push_str(&format!("{},{},{}\n", i + 1, f, c));
    }
    out
}

pub fn write_daily_series(series: &DailySeries, path: &Path) -> Result<(), DataError> {
    fs::write(path, daily_series_csv(series)).map_err(io_err(path))
}

/// Loads a `day,new_infections,cumulative` file, checking day numbering and prefix sums.
pub fn load_daily_series(path: &Path) -> Result<DailySeries, DataError> {
    let text = read_text(path)?;
    let (_, rows) = csv_rows(path, &text, Some(&["day", "new_infections", "cumulative"]))?;
    let mut values = Vec::with_capacity(rows.len());
    let mut running = 0u64;
    for (i, (line, fields)) in rows.into_iter().enumerate() {
        let day = parse_count(path, line, &fields[0], "day")?;
        if day != i as u64 + 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected day {}, found {day}", i + 1),
            ));
        }
        let f = parse_count(path, line, &fields[1], "new infection count")?;
        let c = parse_count(path, line, &fields[2], "cumulative count")?;
        running += f;
        if c != running {
            return Err(parse_err(
                path,
                line,
                format!("cumulative {c} does not match running total {running}"),
            ));
        }
        values.push(f);
    }
    Ok(DailySeries::new(values))
}

/// Compares a simulated series with observed cases over their common days.
pub fn compare(sim: &DailySeries, real: &CaseSeries) -> Result<ComparisonMetrics, DataError> {
    let n = sim.len().min(real.new_cases.len());
    if n == 0 {
        return Err(DataError::NoOverlap);
    }
    if sim.len() != real.new_cases.len() {
        log::warn!(
            "series lengths differ (simulated {}, real {}); comparing the first {n} days",
            sim.len(),
            real.new_cases.len()
        );
    }
    let per_day_delta: Vec<i64> = sim.new_infections[..n]
        .iter()
        .zip(&real.new_cases[..n])
        .map(|(&s, &r)| s as i64 - r as i64)
        .collect();
    let abs_sum: f64 = per_day_delta.iter().map(|d| d.unsigned_abs() as f64).sum();
    let sq_sum: f64 = per_day_delta.iter().map(|&d| (d as f64) * (d as f64)).sum();
    Ok(ComparisonMetrics {
        aligned_days: n,
        mean_absolute_error: abs_sum / n as f64,
        root_mean_square_error: (sq_sum / n as f64).sqrt(),
        total_count_delta: per_day_delta.iter().sum(),
        per_day_delta,
    })
}

pub fn curves_csv(curves: &[Curve]) -> Result<String, DataError> {
    if curves.is_empty() {
        return Err(DataError::NoSeries);
    }
    let mut out = String::from("day");
    for c in curves {
        if c.name.is_empty() || c.name.contains([',', '"', '\n', '\r']) {
            return Err(DataError::Format {
                path: Default::default(),
                message: format!("curve name {:?} is not a plain CSV column name", c.name),
            });
        }
        out.push(',');
        out.push_str(&c.name);
    }
    out.push('\n');
    let rows = curves.iter().map(|c| c.values.len()).max().unwrap_or(0);
    for day in 0..rows {
        out.push_str(&(day + 1).to_string());
        for c in curves {
            out.push(',');
            if let Some(v) = c.values.get(day) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes all curves into one CSV with a leading `day` column.
pub fn export_curves(curves: &[Curve], path: &Path) -> Result<(), DataError> {
    let text = curves_csv(curves)?;
    fs::write(path, text).map_err(io_err(path))
}

/// Reads a file produced by [`export_curves`].
pub fn load_curves(path: &Path) -> Result<Vec<Curve>, DataError> {
    let text = read_text(path)?;
    let (header, rows) = csv_rows(path, &text, None)?;
    if header.first().map(String::as_str) != Some("day") || header.len() < 2 {
        return Err(parse_err(path, 1, "expected header day,<series>..."));
    }
    let mut curves: Vec<Curve> = header[1..]
        .iter()
        .map(|h| Curve::new(h.clone(), Vec::new()))
        .collect();
    let mut ended = vec![false; curves.len()];
    for (i, (line, fields)) in rows.into_iter().enumerate() {
        let day = parse_count(path, line, &fields[0], "day")?;
        if day != i as u64 + 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected day {}, found {day}", i + 1),
            ));
        }
        for (col, field) in fields[1..].iter().enumerate() {
            if field.is_empty() {
                ended[col] = true;
            } else if ended[col] {
                return Err(parse_err(
                    path,
                    line,
                    format!("column {} has a gap", curves[col].name),
                ));
            } else {
                let v = parse_count(path, line, field, "value")?;
                curves[col].values.push(v);
            }
        }
    }
    if curves.is_empty() {
        return Err(format_err(path, "no series columns"));
    }
    Ok(curves)
}
