// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rdcds::scenario::{parse_scenario, run, RunOptions};
use rdcds::VerifyDepth;

#[derive(Parser)]
#[command(name = "rdcds", version, about = "Run coded-storage scenarios and check costs against their optimum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON scenario file.
    Run {
        file: PathBuf,
        /// Overrides the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        verify: Option<Depth>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write a binary state snapshot after the last op.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Depth {
    Off,
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let Command::Run {
        file,
        seed,
        verify,
        format,
        snapshot,
    } = Cli::parse().command;

    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        seed,
        verify: verify.map(|d| match d {
            Depth::Off => VerifyDepth::Off,
            Depth::Quick => VerifyDepth::Quick,
            Depth::Full => VerifyDepth::Full,
        }),
    };
    let (report, state) = match run(&scenario, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if let Some(path) = snapshot {
        if let Err(e) = std::fs::write(&path, state.to_bytes()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
