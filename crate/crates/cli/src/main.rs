// Copyright 2026 The qsimon Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `qsimon`: build oracles, run seeded Simon experiments over `Z_d`, and
//! tabulate repetition budgets.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;
use config::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "qsimon",
    version,
    about = "Simon's algorithm over Z_d on a dense statevector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build, check or lift oracle files.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run a seeded experiment and write a result bundle.
    Simulate(SimulateArgs),
    /// Repetition budgets and figure data.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Generate an oracle hiding the given shift.
    Gen {
        /// Hidden shift with base prefix, e.g. `d4:2031` (binary for --l).
        #[arg(long)]
        s: String,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        /// Build a random binary oracle and lift it to `d = 2^l`.
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Each fiber outputs its smallest member instead of a random label.
        #[arg(long)]
        canonical: bool,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively check the promise of an oracle file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Lift a binary oracle file to `d = 2^l`.
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    /// Hidden shift with base prefix, e.g. `d4:2031`.
    #[arg(long, conflicts_with = "oracle")]
    s: Option<String>,
    /// Oracle file instead of a shift.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_runs: Option<usize>,
    /// Number of independent solve attempts.
    #[arg(long)]
    solves: Option<usize>,
    #[arg(long)]
    no_solve: bool,
    #[arg(long)]
    canonical: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Native,
    Lifted,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Native => Mode::Native,
            ModeArg::Lifted => Mode::Lifted,
        }
    }
}

#[derive(Debug, Subcommand)]
enum AnalyzeCommand {
    /// Single-shot thresholds and qubit repetition counts.
    Table1 {
        #[arg(long, value_delimiter = ',', default_values_t = qsimon_core::analytics::TABLE1_EPSILONS)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic repetitions for failure 1/3 against d.
    Fig1 {
        #[arg(long, default_value_t = 2)]
        d_min: u64,
        #[arg(long, default_value_t = 64)]
        d_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script for the CSV (needs --out).
        #[arg(long, requires = "out")]
        gnuplot: Option<PathBuf>,
    },
    /// Real-valued repetitions over a (d, n, epsilon) grid.
    Fig2 {
        #[arg(long, default_value_t = 2)]
        d_min: u64,
        #[arg(long, default_value_t = 32)]
        d_max: u64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_values_t = qsimon_core::analytics::TABLE1_EPSILONS)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, requires = "out")]
        gnuplot: Option<PathBuf>,
    },
    /// Repetitions needed for a failure target.
    K {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long, required_unless_present = "asymptotic", conflicts_with = "asymptotic")]
        n: Option<usize>,
        #[arg(long)]
        asymptotic: bool,
    },
    /// Single-run failure bound.
    Pfail {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: usize,
    },
    /// Smallest d that succeeds in one shot with failure at most eps.
    Threshold {
        #[arg(long)]
        eps: f64,
    },
    /// Lift multiplicity reaching a failure target in one shot.
    Lift {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Exact and asymptotic budgets side by side.
    Budget {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Oracle(OracleCommand::Gen {
            s,
            d,
            n,
            l,
            seed,
            canonical,
            out,
        }) => commands::oracle_gen(&s, d, n, l, seed, canonical, out.as_deref()),
        Command::Oracle(OracleCommand::Verify { input }) => commands::oracle_verify(&input),
        Command::Oracle(OracleCommand::Lift { input, l, out }) => commands::oracle_lift(&input, l, out.as_deref()),
        Command::Simulate(args) => {
            let mut cfg = match &args.config {
                Some(path) => config::ExperimentConfig::load(path)?,
                None => config::ExperimentConfig::default(),
            };
            cfg.overlay(config::ExperimentConfig {
                mode: args.mode.map(Mode::from),
                d: args.d,
                l: args.l,
                n: args.n,
                shift: args.s,
                oracle: args.oracle,
                trials: args.trials,
                seed: args.seed,
                max_runs: args.max_runs,
                solves: args.solves,
                solve: args.no_solve.then_some(false),
                canonical: args.canonical.then_some(true),
            });
            commands::simulate(cfg, &args.out)
        }
        Command::Analyze(cmd) => match cmd {
            AnalyzeCommand::Table1 { eps, out } => commands::analyze_table1(&eps, out.as_deref()),
            AnalyzeCommand::Fig1 {
                d_min,
                d_max,
                out,
                gnuplot,
            } => commands::analyze_fig1(d_min, d_max, out.as_deref(), gnuplot.as_deref()),
            AnalyzeCommand::Fig2 {
                d_min,
                d_max,
                n_min,
                n_max,
                eps,
                out,
                gnuplot,
            } => commands::analyze_fig2((d_min, d_max), (n_min, n_max), &eps, out.as_deref(), gnuplot.as_deref()),
            AnalyzeCommand::K {
                d,
                eps,
                n,
                asymptotic: _,
            } => commands::analyze_k(d, n, eps),
            AnalyzeCommand::Pfail { d, n } => commands::analyze_pfail(d, n),
            AnalyzeCommand::Threshold { eps } => commands::analyze_threshold(eps),
            AnalyzeCommand::Lift { d, eps } => commands::analyze_lift(d, eps),
            AnalyzeCommand::Budget { d, n, eps } => commands::analyze_budget(d, n, eps),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is reserved for capacity here
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
