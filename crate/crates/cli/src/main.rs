//! `hypvis`: simulations and verification tables for Poisson processes of
//! λ-geodesic hyperplanes in the Poincaré ball.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{
    CommonArgs, CroftonArgs, PhaseArgs, RadiiArgs, RenderCmdArgs, SheppArgs, SimulateArgs, VolumeArgs,
};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hypvis", version, about, propagate_version = true)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare the hitting-measure quadrature with its closed form on a grid.
    VerifyCrofton(CroftonArgs),
    /// Draw one truncated process and write it as JSON (or CSV, or SVG).
    Simulate(SimulateArgs),
    /// Monte-Carlo mean volume of the visible region.
    EstimateVolume(VolumeArgs),
    /// Covering fraction of the boundary circle across intensities (d = 2).
    PhaseScan(PhaseArgs),
    /// Convergence diagnostics.
    #[command(subcommand)]
    Diagnostics(Diagnostics),
    /// Render a sample in the Poincaré disc as SVG.
    Render(RenderCmdArgs),
}

#[derive(Debug, Subcommand)]
enum Diagnostics {
    /// Scaled distances n^{1/(d-1)}(1 - r_n) against their limit.
    Radii(RadiiArgs),
    /// Partial sums of Shepp's covering series at the critical intensity.
    Shepp(SheppArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    match cli.command {
        Command::VerifyCrofton(args) => commands::verify_crofton(args, common),
        Command::Simulate(args) => commands::simulate(args, common),
        Command::EstimateVolume(args) => commands::estimate_volume(args, common),
        Command::PhaseScan(args) => commands::phase_scan(args, common),
        Command::Diagnostics(Diagnostics::Radii(args)) => commands::radii(args, common),
        Command::Diagnostics(Diagnostics::Shepp(args)) => commands::shepp(args, common),
        Command::Render(args) => commands::render(args, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypvis: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
