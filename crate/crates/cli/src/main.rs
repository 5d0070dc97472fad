//! `eitcav`: command-line front end for the double-cavity simulator.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "eitcav", version, about = "Coupled double-cavity resonator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering matrix over a wavenumber grid.
    Response(ResponseArgs),
    /// Gaussian pulse through the device: intensities and energy fractions.
    Pulse(PulseArgs),
    /// Steady-state amplitudes on every internal segment.
    Intracavity(IntracavityArgs),
    /// Wave-packet absorption against mirror absorption.
    Loss(LossArgs),
    /// Interaction-free measurement fractions at resonance.
    Ifm(IfmArgs),
    /// Conditional phase shift and two-photon loss.
    Xpm(XpmArgs),
    /// Full feasibility report with every condition and margin.
    Feasibility(XpmArgs),
    /// Closed-form response against brute-force round-trip iteration.
    OracleCheck(OracleArgs),
}

#[derive(Args, Clone)]
pub struct Source {
    /// Parameter file (`key = value` lines).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Named parameter set: fig2a, fig2b, fig3, fig4 or rubidium-xpm.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output file; standard output when omitted. A manifest is written to
    /// `<out>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Clone)]
pub struct PulseWidth {
    /// Amplitude half-width τ_s in seconds.
    #[arg(long, conflicts_with = "tau_s_rel")]
    pub tau_s: Option<f64>,
    /// Amplitude half-width in units of the delay time τ_D.
    #[arg(long)]
    pub tau_s_rel: Option<f64>,
}

#[derive(Args)]
pub struct ResponseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lower wavenumber, rad/m (default k0·(1 − 1e-4)).
    #[arg(long)]
    pub kmin: Option<f64>,
    /// Upper wavenumber, rad/m (default k0·(1 + 1e-4)).
    #[arg(long)]
    pub kmax: Option<f64>,
    #[arg(long, default_value_t = 4001)]
    pub points: usize,
    /// Also run the round-trip oracle at every point and fail when it disagrees.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args)]
pub struct PulseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub width: PulseWidth,
    /// Also run the delay-line time stepping and fail when it disagrees.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args)]
pub struct IntracavityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Detuning k − k0, rad/m.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_k: f64,
    /// Cross-check against the round-trip oracle.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args)]
pub struct IfmArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Absorption of the object placed at M1; negative keeps the device as loaded.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub absorber: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// Horizontal mirrors M1 and M3.
    #[value(name = "H")]
    H,
    /// Vertical mirrors M2 and M4.
    #[value(name = "V")]
    V,
    /// Both sweeps, one after the other.
    Both,
}

#[derive(Args)]
pub struct LossArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub width: PulseWidth,
    #[arg(long, value_enum, default_value_t = Sweep::Both)]
    pub sweep: Sweep,
    #[arg(long, default_value_t = 1e-8)]
    pub amin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amax: f64,
    #[arg(long, default_value_t = 33)]
    pub points: usize,
}

#[derive(Args)]
pub struct XpmArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub width: PulseWidth,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of wavenumbers, evenly spread over k0·(1 ± 1e-4).
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, default_value_t = eitcav_core::oracle::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = eitcav_core::oracle::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Response(a) => commands::response(a),
        Command::Pulse(a) => commands::pulse(a),
        Command::Intracavity(a) => commands::intracavity(a),
        Command::Loss(a) => commands::loss(a),
        Command::Ifm(a) => commands::ifm(a),
        Command::Xpm(a) => commands::xpm(a, false),
        Command::Feasibility(a) => commands::xpm(a, true),
        Command::OracleCheck(a) => commands::oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
