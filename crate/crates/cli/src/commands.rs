use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fogtrace_core::compare::{self, CaseSeries, Curve};
use fogtrace_core::sim::{self, AlertComparison};
use fogtrace_core::{DailySeries, SimulationConfig, TableCase, Thresholds};
use fogtrace_service::{FogStore, ServiceConfig, ServiceError, SystemClock};
use serde::Serialize;
use thiserror::Error;

use crate::args::{CompareArgs, InspectArgs, ServeArgs, SimulateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// One simulated run as recorded in the manifest.
#[derive(Debug, Serialize)]
struct RunRecord {
    name: String,
    series: String,
    total_new_infections: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alerted_series: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alerted_total_new_infections: Option<u64>,
    config: SimulationConfig,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool_version: &'static str,
    case: Option<u8>,
    config_file: Option<PathBuf>,
    runs: Vec<RunRecord>,
    curves: String,
    real_series: Option<PathBuf>,
}

/// Resolves the base configurations (one per meetup rate) before overrides.
fn base_configs(args: &SimulateArgs) -> Result<Vec<SimulationConfig>, CliError> {
    if let Some(path) = &args.config {
        return Ok(vec![SimulationConfig::load(path).map_err(CliError::data)?]);
    }
    let case = TableCase::get(args.case.unwrap_or(1))
        .ok_or_else(|| CliError::Usage("case must be between 1 and 8".into()))?;
    Ok(vec![case.config(0), case.config(1)])
}

fn apply_overrides(
    mut cfg: SimulationConfig,
    args: &SimulateArgs,
) -> Result<SimulationConfig, CliError> {
    if let Some(v) = args.seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = args.days {
        cfg.days = v;
    }
    if let Some(v) = args.meetups {
        cfg.meetups_per_day = v;
    }
    if let Some(v) = args.population {
        cfg.population = v;
    }
    if let Some(v) = args.initial_infected {
        cfg.initial_infected = v;
    }
    if let Some(v) = args.symptom_rate {
        cfg.initial_symptomatic_rate = v;
    }
    if let Some(v) = args.compliance {
        cfg.alert_compliance = v;
    }
    if args.theta.is_some() || args.tau0_min.is_some() || args.nu0_dbm.is_some() {
        let t = cfg.thresholds;
        cfg.thresholds = Thresholds::from_minutes(
            args.theta.unwrap_or(t.theta.get()),
            args.tau0_min.unwrap_or(t.tau0_s / 60.0),
            args.nu0_dbm.unwrap_or(t.nu0_dbm),
        )
        .map_err(CliError::data)?;
    }
    cfg.validate().map_err(CliError::data)?;
    Ok(cfg)
}

enum Outcome {
    Plain(DailySeries),
    Alerted(AlertComparison),
}

impl Outcome {
    fn baseline(&self) -> &DailySeries {
        match self {
            Outcome::Plain(s) => s,
            Outcome::Alerted(c) => &c.baseline,
        }
    }
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut configs = Vec::new();
    for base in base_configs(&args)? {
        let cfg = apply_overrides(base, &args)?;
        // an explicit --meetups collapses the preset pair into one run
        if !configs.contains(&cfg) {
            configs.push(cfg);
        }
    }
    let real = args
        .real
        .as_deref()
        .map(compare::load_case_series)
        .transpose()
        .map_err(CliError::data)?;

    let outcomes: Vec<Result<Outcome, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                scope.spawn(move || {
                    if cfg.alert_compliance > 0.0 {
                        sim::run_with_alerts(cfg).map(Outcome::Alerted)
                    } else {
                        sim::run(cfg).map(Outcome::Plain)
                    }
                    .map_err(CliError::runtime)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    let mut runs = Vec::new();
    let mut curves = Vec::new();
    for (cfg, outcome) in configs.into_iter().zip(outcomes) {
        let outcome = outcome?;
        let name = format!("meetups_{}", cfg.meetups_per_day);
        let series_file = format!("series_{name}.csv");
        let baseline = outcome.baseline();
        write_file(
            &args.out.join(&series_file),
            &compare::daily_series_csv(baseline),
        )?;
        curves.push(Curve::new(name.clone(), baseline.new_infections.clone()));
        let mut record = RunRecord {
            name: name.clone(),
            series: series_file,
            total_new_infections: baseline.total(),
            alerted_series: None,
            alerted_total_new_infections: None,
            config: cfg,
        };
        if let Outcome::Alerted(cmp) = &outcome {
            let file = format!("series_{name}_alerted.csv");
            write_file(
                &args.out.join(&file),
                &compare::daily_series_csv(&cmp.alerted),
            )?;
            curves.push(Curve::new(
                format!("{name}_alerted"),
                cmp.alerted.new_infections.clone(),
            ));
            record.alerted_series = Some(file);
            record.alerted_total_new_infections = Some(cmp.alerted.total());
        }
        println!(
            "{name}: {} new infections over {} days",
            record.total_new_infections,
            baseline.len()
        );
        runs.push(record);
    }
    if let Some(real) = &real {
        curves.push(Curve::new(
            format!("real_{}", real.label),
            real.new_cases.clone(),
        ));
    }
    let curves_text = compare::curves_csv(&curves).map_err(CliError::runtime)?;
    write_file(&args.out.join("curves.csv"), &curves_text)?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        case: if args.config.is_some() {
            None
        } else {
            Some(args.case.unwrap_or(1))
        },
        config_file: args.config.clone(),
        runs,
        curves: "curves.csv".into(),
        real_series: args.real.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(CliError::runtime)?;
    write_file(&args.out.join("manifest.json"), &(text + "\n"))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareOutput<'a> {
    sim: &'a Path,
    real: &'a Path,
    metrics: compare::ComparisonMetrics,
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let sim = compare::load_daily_series(&args.sim).map_err(CliError::data)?;
    let real: CaseSeries = compare::load_case_series(&args.real).map_err(CliError::data)?;
    let metrics = compare::compare(&sim, &real).map_err(CliError::data)?;
    if let Some(out) = &args.out {
        let curves = [
            Curve::new("simulated", sim.new_infections.clone()),
            Curve::new(format!("real_{}", real.label), real.new_cases.clone()),
        ];
        let text = compare::curves_csv(&curves).map_err(CliError::runtime)?;
        write_file(out, &text)?;
    }
    let output = CompareOutput {
        sim: &args.sim,
        real: &args.real,
        metrics,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&output).map_err(CliError::runtime)?
    );
    Ok(())
}

fn service_error(e: ServiceError) -> CliError {
    match e {
        ServiceError::Config(_)
        | ServiceError::Invalid(_)
        | ServiceError::Integrity(_)
        | ServiceError::NotFound(_) => CliError::data(e),
        _ => CliError::runtime(e),
    }
}

async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("cannot listen for ctrl-c: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                log::error!("cannot listen for SIGTERM: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}

pub fn serve(args: ServeArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => ServiceConfig::load(path).map_err(service_error)?,
        None => ServiceConfig::default(),
    };
    config
        .apply_env(|k| std::env::var(k).ok())
        .map_err(service_error)?;
    if let Some(port) = args.port {
        config.port = port;
    }
    // refuse a bad configuration before touching the network
    config.store_settings().map_err(service_error)?;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::runtime)?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", config.bind, config.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::runtime)?;
        println!("listening on http://{local}");
        fogtrace_service::run_service(&config, listener, Arc::new(SystemClock), shutdown_signal())
            .await
            .map_err(service_error)
    })
}

pub fn inspect(args: InspectArgs) -> Result<(), CliError> {
    // an unreadable snapshot is bad input, whatever the cause
    let store = FogStore::restore(&args.snapshot, Arc::new(SystemClock)).map_err(CliError::data)?;
    let report = store.get_report(&args.user).map_err(service_error)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(CliError::runtime)?
    );
    Ok(())
}
