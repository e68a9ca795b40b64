use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "fogtrace",
    version,
    about = "Contact-trace infection simulator and fog service"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded simulation and write daily series, curves and a manifest.
    Simulate(SimulateArgs),
    /// Compare a simulated daily series with a real case series.
    Compare(CompareArgs),
    /// Run the fog service until interrupted.
    Serve(ServeArgs),
    /// Print the latest report for one user from a store snapshot.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config.
    #[arg(long, conflicts_with = "case")]
    pub config: Option<PathBuf>,
    /// Preset experiment case, 1 to 8. Runs both of its meetup rates.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub case: Option<u8>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub days: Option<u32>,
    /// Single meetup rate, replacing the preset pair.
    #[arg(long)]
    pub meetups: Option<u32>,
    #[arg(long)]
    pub population: Option<u32>,
    #[arg(long)]
    pub initial_infected: Option<u32>,
    #[arg(long)]
    pub symptom_rate: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "tau0-min")]
    pub tau0_min: Option<f64>,
    #[arg(long = "nu0-dbm", allow_hyphen_values = true)]
    pub nu0_dbm: Option<f64>,
    /// Alert compliance in [0, 1]; above zero an alerted run is added per rate.
    #[arg(long)]
    pub compliance: Option<f64>,
    /// Real `date,new_cases` series to include in curves.csv.
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long, default_value = "fogtrace-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Simulated `day,new_infections,cumulative` series.
    #[arg(long)]
    pub sim: PathBuf,
    /// Real `date,new_cases` series.
    #[arg(long)]
    pub real: PathBuf,
    /// Where to write the merged curve CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// JSON service config. Environment variables override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Port override, applied last. 0 picks a free port.
    #[arg(long)]
    pub port: Option<u16>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub user: String,
}
