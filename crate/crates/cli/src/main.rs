//! `invar`: variationality checks and Lagrangian construction for PDE
//! systems and phase-space flows, plus the periodic-grid field simulator.
//!
//! Exit codes: 0 on successful execution (mathematical verdicts, including
//! "not variational", are successes), 1 on usage errors, 2 on input or parse
//! errors, 3 on internal invariant violations.

mod mech_cmd;
mod problems;
mod sim_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or structurally invalid input (exit 2).
    Input(String),
    /// A broken internal contract (exit 3).
    Internal(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> CliError {
        CliError::Input(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> CliError {
        CliError::Internal(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "invar",
    about = "Inverse-problem toolkit: Helmholtz variationality checks, Lagrangian construction, and pre-symplectic field simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a PDE system is locally variational (Helmholtz test).
    Varcheck {
        /// Problem file of kind `system`.
        file: PathBuf,
        /// Emit the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Euler-Lagrange source form of a Lagrangian file.
    El {
        /// Problem file of kind `lagrangian`.
        file: PathBuf,
    },
    /// Homotopy Lagrangian of a source form.
    Tonti {
        /// Problem file of kind `system`.
        file: PathBuf,
        /// Also check that its Euler-Lagrange form reproduces the input.
        #[arg(long)]
        verify: bool,
    },
    /// Finite-dimensional mechanics: Lagrangians for phase-space flows.
    Mech {
        #[command(subcommand)]
        command: MechCommand,
    },
    /// Periodic-grid field simulation and diagnostics.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
}

#[derive(Subcommand)]
enum MechCommand {
    /// Construct the degenerate first-order Lagrangian for a flow that
    /// preserves a closed two-form; reports witnesses when it does not.
    Fode {
        /// `mech-field` problem file (the flow).
        #[arg(long)]
        field: PathBuf,
        /// `mech-form` problem file (the two-form).
        #[arg(long)]
        form: PathBuf,
    },
    /// Check the second-order hypotheses on a tangent chart (positions
    /// first, velocities second).
    SodeCheck {
        /// `mech-field` problem file over the doubled chart.
        #[arg(long)]
        field: PathBuf,
        /// `mech-form` problem file over the doubled chart.
        #[arg(long)]
        form: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Integrate the field equations and write a time-series CSV.
    Run {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Box side length (defaults to 2π).
        #[arg(long)]
        box_len: Option<f64>,
        #[arg(long)]
        steps: usize,
        /// Observation interval in steps.
        #[arg(long, default_value_t = 100)]
        every: usize,
        /// `zero` or `random:<seed>,<cutoff>`.
        #[arg(long, default_value = "zero")]
        gauge: String,
        /// `standing-wave:kx,ky,kz,amp`, `random:<seed>,<cutoff>` or `file:<path>`.
        #[arg(long)]
        init: String,
        /// CSV output path (`-` for stdout).
        #[arg(long)]
        out: String,
        /// Optional state snapshot written after the run.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Print the run summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evolve the same initial data under two gauges and compare observables.
    GaugeCompare {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        box_len: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        init: String,
        #[arg(long, default_value = "zero")]
        gauge1: String,
        #[arg(long, default_value = "random:1,2")]
        gauge2: String,
        #[arg(long)]
        json: bool,
    },
    /// Track symplectic pairings along the flow on the thickened space.
    EmbedCheck {
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        box_len: Option<f64>,
        #[arg(long, default_value = "random:2,2")]
        gauge: String,
        #[arg(long, default_value = "random:8,2")]
        init: String,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Stationarity of the discrete action under timestep halving.
    ActionCheck {
        /// Number of halvings of the base timestep.
        #[arg(long, default_value_t = 1)]
        dt_halvings: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Base timestep.
        #[arg(long, default_value_t = 4e-3)]
        dt0: f64,
        #[arg(long)]
        box_len: Option<f64>,
        /// Physical time horizon of each trajectory.
        #[arg(long, default_value_t = 0.128)]
        t_end: f64,
        #[arg(long, default_value = "random:7,2")]
        gauge: String,
        #[arg(long, default_value = "standing-wave:0,0,1,0.5")]
        init: String,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Varcheck { file, json } => problems::varcheck(&file, json),
        Command::El { file } => problems::euler_lagrange_cmd(&file),
        Command::Tonti { file, verify } => problems::tonti_cmd(&file, verify),
        Command::Mech { command } => match command {
            MechCommand::Fode { field, form } => mech_cmd::fode(&field, &form),
            MechCommand::SodeCheck { field, form } => mech_cmd::sode_check(&field, &form),
        },
        Command::Sim { command } => match command {
            SimCommand::Run {
                n,
                dt,
                box_len,
                steps,
                every,
                gauge,
                init,
                out,
                dump,
                json,
            } => sim_cmd::run(n, dt, box_len, steps, every, &gauge, &init, &out, dump, json),
            SimCommand::GaugeCompare {
                n,
                dt,
                box_len,
                steps,
                init,
                gauge1,
                gauge2,
                json,
            } => sim_cmd::gauge_compare_cmd(n, dt, box_len, steps, &init, &gauge1, &gauge2, json),
            SimCommand::EmbedCheck {
                pairs,
                steps,
                n,
                dt,
                box_len,
                gauge,
                init,
                seed,
                json,
            } => sim_cmd::embed_check(pairs, steps, n, dt, box_len, &gauge, &init, seed, json),
            SimCommand::ActionCheck {
                dt_halvings,
                n,
                dt0,
                box_len,
                t_end,
                gauge,
                init,
                json,
            } => sim_cmd::action_check(dt_halvings, n, dt0, box_len, t_end, &gauge, &init, json),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
