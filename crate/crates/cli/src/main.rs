//! `fracpearson` batch front end.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, EXIT_CONFIG};

#[derive(Parser, Debug)]
#[command(
    name = "fracpearson",
    version,
    about = "Fractional reciprocal-gamma and Fisher-Snedecor diffusions"
)]
pub struct Cli {
    /// Flat key = value file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Model {
    /// rg or fs.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Time-change index in (0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transition density over an x grid.
    Density {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        n_x: Option<usize>,
        #[arg(long)]
        abs_tol: Option<f64>,
    },
    /// Simulate time-changed paths; prints per-time summary statistics.
    Paths {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        n_t: Option<usize>,
        /// Starting value, or "stationary".
        #[arg(long)]
        x0: Option<String>,
        /// Directory for one `t,value` CSV per path.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Little-endian binary dump of all paths.
        #[arg(long)]
        binary: Option<PathBuf>,
    },
    /// Autocorrelation: formula, asymptote and optional Monte Carlo estimate.
    Acf {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        s: Option<f64>,
        /// Comma-separated times; overrides t-max/n-t.
        #[arg(long)]
        t_list: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        n_t: Option<usize>,
        #[arg(long)]
        mc_paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Backward Cauchy problem for a built-in initial function.
    Cauchy {
        #[command(flatten)]
        model: Model,
        /// bump, polynomial or invariant.
        #[arg(long)]
        function: Option<String>,
        /// Comma-separated times.
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        y_min: Option<f64>,
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long)]
        n_y: Option<usize>,
        #[arg(long)]
        center: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        /// Degree of the eigenpolynomial for `polynomial`.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        abs_tol: Option<f64>,
    },
    /// Mittag-Leffler function E_alpha(-x).
    Ml {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        n_x: Option<usize>,
    },
    /// Run the acceptance suite.
    Validate {
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn report(e: &CliError) -> ExitCode {
    let mut s = String::new();
    output::write_json(&e.to_json(), &mut s);
    eprintln!("{s}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::config(e.to_string().trim().to_string());
            debug_assert_eq!(err.exit_code(), EXIT_CONFIG);
            return report(&err);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => report(&e),
    }
}
