// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Runs a JSON scenario through the library API and prints the text
//! report. Usage: `scenario_run [path]` (defaults to the bundled example).

use rdcds::scenario::{parse_scenario, run, RunOptions};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/worked_example.json").to_string());
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    };
    let (report, _) = run(&scenario, &RunOptions::default()).expect("scenario runs");
    print!("{}", report.to_text());
    std::process::exit(report.exit_code());
}
