// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cavqed::scenario::{
    load_scenario, parse_scenario, run_fit, run_scenario, Block, RunError, ValidationErrors,
};

#[derive(Parser)]
#[command(
    name = "cavqed",
    version,
    about = "Cavity-QED scenarios for rare-earth-ion ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and write CSV, report and manifest.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a scenario file and list every problem found.
    Validate { scenario: PathBuf },
    /// Fit a model to the first two columns of a CSV file.
    Fit {
        /// exponential, biexponential, lorentzian, gaussian, linear or dit_dip
        model: String,
        csv: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Extra `key=value` settings, e.g. the cavity and coupling for dit_dip.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn invalid(e: &ValidationErrors) -> ExitCode {
    for issue in &e.0 {
        eprintln!("error[validation]: {issue}");
    }
    ExitCode::from(2)
}

fn failed(e: &RunError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run {
            scenario,
            seed,
            out,
            threads,
        } => {
            let mut s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return invalid(&e),
            };
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("error[io]: thread pool: {e}");
                    return ExitCode::from(1);
                }
            }
            match run_scenario(&s, &out) {
                Ok(r) => {
                    for (k, v) in &r.results {
                        println!("{k} = {v}");
                    }
                    eprintln!("wrote {}", r.csv.display());
                    ExitCode::SUCCESS
                }
                Err(e) => failed(&e),
            }
        }
        Cmd::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!("ok: {} ({})", s.name, s.command);
                ExitCode::SUCCESS
            }
            Err(e) => invalid(&e),
        },
        Cmd::Fit {
            model,
            csv,
            x,
            y,
            set,
        } => {
            let mut text = format!(
                "command = fit\nmodel = {model}\ninput = {}\n",
                csv.display()
            );
            for (k, v) in [("x_column", x), ("y_column", y)] {
                if let Some(v) = v {
                    text.push_str(&format!("{k} = {v}\n"));
                }
            }
            for kv in set {
                text.push_str(&kv);
                text.push('\n');
            }
            let s = match parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => return invalid(&e),
            };
            let Block::Fit(b) = &s.block else {
                unreachable!("fit scenario")
            };
            match run_fit(b, &s.base_dir) {
                Ok(r) => {
                    print!("{}", r.report());
                    ExitCode::SUCCESS
                }
                Err(e) => failed(&e),
            }
        }
    }
}
