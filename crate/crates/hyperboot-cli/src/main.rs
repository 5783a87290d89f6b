//! `hyperboot` command-line tool.
//!
//! Every flag of a subcommand can also be given in a JSON file passed with `--config`
//! (keys are the long flag names); flags on the command line win. Each run prints a JSON
//! document whose `config` member records the fully resolved settings.
//!
//! Exit codes: 0 success, 2 a check found violations, 1 usage, I/O or input errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    AsymptoticArgs, CheckArgs, ClosedFormArgs, CrossingArgs, GenerateArgs, MatrixArgs, SearchArgs, SignArgs, TableArgs,
    TblockArgs,
};

#[derive(Parser, Debug)]
#[command(name = "hyperboot", version, about = "Checks and bounds for the hyperbolic bootstrap equations")]
struct Cli {
    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum files: residual checks and fixture generation.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// λ₁ bounds from extremal functionals.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Recurrence polynomials and their certified properties.
    #[command(subcommand)]
    Recur(RecurCmd),
    /// Hypergeometric identities.
    #[command(subcommand)]
    Hyp(HypCmd),
}

#[derive(Subcommand, Debug)]
enum SpectrumCmd {
    /// Evaluate HB1–HB6 residuals on a spectrum file.
    Check(CheckArgs),
    /// Write a seeded ladder fixture.
    Generate(GenerateArgs),
}

#[derive(Subcommand, Debug)]
enum BoundCmd {
    /// The order-1 bound, root of λ² − (9k+1)λ + 12k².
    ClosedForm(ClosedFormArgs),
    /// Search higher-order functionals for a smaller certified threshold.
    Search(SearchArgs),
}

#[derive(Subcommand, Debug)]
enum RecurCmd {
    /// Coefficient table of one polynomial.
    Table(TableArgs),
    /// Grid-certify the sign law multiplier A.
    SignCertify(SignArgs),
    /// Compare the transfer-matrix product with its diagonalised form.
    MatrixCheck(MatrixArgs),
}

#[derive(Subcommand, Debug)]
enum HypCmd {
    /// Check the t-block power series against its ₂F₁ form.
    VerifyTblock(TblockArgs),
    /// Truncated crossing comparison for a spectrum file.
    Crossing(CrossingArgs),
    /// Growth of log ₂F₁ / √λ near z = 1.
    Asymptotic(AsymptoticArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let file = config::load(cli.config.as_deref())?;
    let outcome = match cli.command {
        Command::Spectrum(SpectrumCmd::Check(a)) => commands::spectrum_check(config::resolve(a, &file)?)?,
        Command::Spectrum(SpectrumCmd::Generate(a)) => commands::spectrum_generate(config::resolve(a, &file)?)?,
        Command::Bound(BoundCmd::ClosedForm(a)) => commands::bound_closed_form(config::resolve(a, &file)?)?,
        Command::Bound(BoundCmd::Search(a)) => commands::bound_search(config::resolve(a, &file)?)?,
        Command::Recur(RecurCmd::Table(a)) => commands::recur_table(config::resolve(a, &file)?)?,
        Command::Recur(RecurCmd::SignCertify(a)) => commands::recur_sign(config::resolve(a, &file)?)?,
        Command::Recur(RecurCmd::MatrixCheck(a)) => commands::recur_matrix(config::resolve(a, &file)?)?,
        Command::Hyp(HypCmd::VerifyTblock(a)) => commands::hyp_tblock(config::resolve(a, &file)?)?,
        Command::Hyp(HypCmd::Crossing(a)) => commands::hyp_crossing(config::resolve(a, &file)?)?,
        Command::Hyp(HypCmd::Asymptotic(a)) => commands::hyp_asymptotic(config::resolve(a, &file)?)?,
    };
    outcome.emit()
}
