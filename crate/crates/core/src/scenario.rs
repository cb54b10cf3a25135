// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON scenarios: parse, run against the engine, render reports.
//!
//! ```json
//! {
//!   "params": {"n": 6, "r_r": 4, "k_c": 2},
//!   "seed": 7,
//!   "q": 13,
//!   "verify": "full",
//!   "ops": [
//!     {"kind": "read", "dropouts": [6]},
//!     {"kind": "update", "dropouts": [5], "x": 1, "increment": "random"},
//!     {"kind": "update", "dropouts": [1, 2, 3], "x": 0, "expected_infeasible": true}
//!   ]
//! }
//! ```
//!
//! Server labels in scenario files and reports are 1-based. `k_c` may be an
//! integer, a decimal or a `"num/den"` string.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{verify_state, Increment, SlotKind, SlotOp, SlotReport, SystemState, Verdict, VerifyDepth};
use crate::params::SystemParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Engine(#[from] crate::error::Error),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    params: RawParams,
    seed: u64,
    q: Option<u64>,
    verify: Option<RawDepth>,
    ops: Vec<RawOp>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    n: usize,
    r_r: usize,
    k_c: RawRatio,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRatio {
    Int(u64),
    Float(f64),
    Text(String),
}

#[derive(Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawDepth {
    Off,
    Quick,
    Full,
}

impl From<RawDepth> for VerifyDepth {
    fn from(d: RawDepth) -> Self {
        match d {
            RawDepth::Off => VerifyDepth::Off,
            RawDepth::Quick => VerifyDepth::Quick,
            RawDepth::Full => VerifyDepth::Full,
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Read,
    Update,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawIncrement {
    Named(String),
    Explicit(Vec<u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOp {
    kind: RawKind,
    #[serde(default)]
    dropouts: Vec<usize>,
    x: Option<usize>,
    increment: Option<RawIncrement>,
    #[serde(default)]
    expected_infeasible: bool,
    verify: Option<RawDepth>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioOp {
    /// Dropouts inside are 0-based.
    pub op: SlotOp,
    pub expected_infeasible: bool,
    pub verify: Option<VerifyDepth>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub r_r: usize,
    pub k_c: Ratio<u64>,
    pub seed: u64,
    pub q: Option<u64>,
    pub verify: Option<VerifyDepth>,
    pub ops: Vec<ScenarioOp>,
}

impl Scenario {
    pub fn params(&self) -> Result<SystemParams, ScenarioError> {
        SystemParams::new(self.n, self.r_r, self.k_c, self.q).map_err(|e| ScenarioError::Validation(e.to_string()))
    }
}

fn parse_ratio(raw: RawRatio) -> Result<Ratio<u64>, ScenarioError> {
    let bad = |what: &str| ScenarioError::Validation(format!("params.k_c: {what}"));
    match raw {
        RawRatio::Int(v) => Ok(Ratio::from_integer(v)),
        RawRatio::Float(v) => {
            if !v.is_finite() || v < 0.0 {
                return Err(bad("must be a finite non-negative number"));
            }
            decimal_ratio(&v.to_string()).ok_or_else(|| bad("unsupported decimal"))
        }
        RawRatio::Text(s) => {
            let s = s.trim();
            if let Some((a, b)) = s.split_once('/') {
                let num: u64 = a.trim().parse().map_err(|_| bad("bad numerator"))?;
                let den: u64 = b.trim().parse().map_err(|_| bad("bad denominator"))?;
                if den == 0 {
                    return Err(bad("zero denominator"));
                }
                Ok(Ratio::new(num, den))
            } else {
                decimal_ratio(s).ok_or_else(|| bad("expected \"num/den\" or a decimal"))
            }
        }
    }
}

fn decimal_ratio(s: &str) -> Option<Ratio<u64>> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 {
        return None;
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(int.checked_mul(den)?.checked_add(frac)?, den))
}

/// Parses and validates a scenario without running it.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let k_c = parse_ratio(raw.params.k_c)?;
    let mut scenario = Scenario {
        n: raw.params.n,
        r_r: raw.params.r_r,
        k_c,
        seed: raw.seed,
        q: raw.q,
        verify: raw.verify.map(Into::into),
        ops: Vec::with_capacity(raw.ops.len()),
    };
    let p = scenario.params()?;

    for (i, op) in raw.ops.into_iter().enumerate() {
        let at = |msg: String| ScenarioError::Validation(format!("ops[{i}]: {msg}"));
        let mut dropouts = Vec::with_capacity(op.dropouts.len());
        for d in op.dropouts {
            if d == 0 || d > p.n() {
                return Err(at(format!("dropout {d} not in 1..={}", p.n())));
            }
            if dropouts.contains(&(d - 1)) {
                return Err(at(format!("dropout {d} listed twice")));
            }
            dropouts.push(d - 1);
        }
        let kind = match op.kind {
            RawKind::Read => {
                if op.x.is_some() || op.increment.is_some() {
                    return Err(at("reads take no \"x\" or \"increment\"".into()));
                }
                SlotKind::Read
            }
            RawKind::Update => {
                let increment = match op.increment {
                    None => Increment::Random,
                    Some(RawIncrement::Named(s)) if s == "random" => Increment::Random,
                    Some(RawIncrement::Named(s)) => {
                        return Err(at(format!("increment must be \"random\" or a vector, got \"{s}\"")))
                    }
                    Some(RawIncrement::Explicit(v)) => {
                        if v.len() != p.l() {
                            return Err(at(format!("increment has {} entries, expected L = {}", v.len(), p.l())));
                        }
                        Increment::Explicit(v)
                    }
                };
                SlotKind::Update {
                    x: op.x.unwrap_or(0),
                    increment,
                }
            }
        };
        scenario.ops.push(ScenarioOp {
            op: SlotOp { kind, dropouts },
            expected_infeasible: op.expected_infeasible,
            verify: op.verify.map(Into::into),
        });
    }
    Ok(scenario)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub verify: Option<VerifyDepth>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamsSummary {
    pub n: usize,
    pub r_r: usize,
    pub k_c: String,
    pub k_c_effective: usize,
    pub q: u64,
    pub l: usize,
    pub storage_per_server: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRow {
    #[serde(flatten)]
    pub report: SlotReport,
    pub expected_infeasible: bool,
    /// `None` for infeasible and clamped operations.
    pub cost_matches_bound: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub ops: usize,
    pub feasible: usize,
    pub infeasible: usize,
    /// 1-based slot numbers.
    pub cost_mismatches: Vec<u64>,
    pub unexpected_feasibility: Vec<u64>,
    pub failed_verdicts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub params: ParamsSummary,
    pub init: Vec<Verdict>,
    pub rows: Vec<RunRow>,
    pub summary: RunSummary,
}

impl RunReport {
    /// 0 when everything passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let s = &self.summary;
        let bad = s.failed_verdicts > 0 || !s.cost_mismatches.is_empty() || !s.unexpected_feasibility.is_empty();
        i32::from(bad)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "N={} R_r={} K_c={} (effective {}) q={} L={} storage/server={} seed={}",
            p.n, p.r_r, p.k_c, p.k_c_effective, p.q, p.l, p.storage_per_server, p.seed
        );
        let _ = writeln!(out, "init: {}", verdict_text(&self.init));
        let _ = writeln!(
            out,
            "{:>4}  {:<6}  {:<12}  {:>2}  {:>3}  {:>8}  {:>8}  {:<5}  verdicts",
            "slot", "kind", "dropouts", "X", "G_t", "cost", "bound", "match"
        );
        for row in &self.rows {
            let r = &row.report;
            let dropouts = format!(
                "{{{}}}",
                r.dropouts.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            );
            let dash = || "-".to_string();
            let (cost, bound) = r
                .cost
                .as_ref()
                .map(|c| (c.normalized.to_string(), c.bound.to_string()))
                .unwrap_or_else(|| (dash(), dash()));
            let matched = match (r.feasible, row.cost_matches_bound) {
                (false, _) if row.expected_infeasible => "infeasible (expected)",
                (false, _) => "INFEASIBLE",
                (true, Some(true)) => "yes",
                (true, Some(false)) => "NO",
                (true, None) => "over (clamped)",
            };
            let _ = writeln!(
                out,
                "{:>4}  {:<6}  {:<12}  {:>2}  {:>3}  {:>8}  {:>8}  {:<5}  {}",
                r.slot + 1,
                r.kind,
                dropouts,
                r.x.map(|x| x.to_string()).unwrap_or_else(dash),
                r.g_t.map(|g| g.to_string()).unwrap_or_else(dash),
                cost,
                bound,
                matched,
                verdict_text(&r.verification)
            );
            if let Some(reason) = &r.reason {
                let _ = writeln!(out, "      reason: {reason}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "summary: {} ops, {} feasible, {} infeasible, {} cost mismatches, {} unexpected feasibility, {} failed verdicts",
            s.ops,
            s.feasible,
            s.infeasible,
            s.cost_mismatches.len(),
            s.unexpected_feasibility.len(),
            s.failed_verdicts
        );
        let _ = writeln!(out, "result: {}", if self.exit_code() == 0 { "PASS" } else { "FAIL" });
        out
    }
}

fn verdict_text(verdicts: &[Verdict]) -> String {
    if verdicts.is_empty() {
        return "-".into();
    }
    let failed: Vec<String> = verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| format!("{}: {}", v.name, v.detail))
        .collect();
    if failed.is_empty() {
        format!("all {} pass", verdicts.len())
    } else {
        format!("FAIL {}", failed.join("; "))
    }
}

/// Runs every op in order. Returns the report and the final state.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<(RunReport, SystemState), ScenarioError> {
    let p = scenario.params()?;
    let seed = opts.seed.unwrap_or(scenario.seed);
    let depth = opts.verify.or(scenario.verify).unwrap_or(VerifyDepth::Quick);
    let mut state = SystemState::new(p.clone(), None, seed)?;
    let init = verify_state(&state, depth);

    let mut rows = Vec::with_capacity(scenario.ops.len());
    let mut summary = RunSummary {
        ops: scenario.ops.len(),
        feasible: 0,
        infeasible: 0,
        cost_mismatches: Vec::new(),
        unexpected_feasibility: Vec::new(),
        failed_verdicts: init.iter().filter(|v| !v.passed).count(),
    };
    for op in &scenario.ops {
        let mut report = state.step(&op.op, op.verify.unwrap_or(depth));
        for d in &mut report.dropouts {
            *d += 1;
        }
        let label = report.slot + 1;
        if report.feasible {
            summary.feasible += 1;
        } else {
            summary.infeasible += 1;
        }
        if report.feasible == op.expected_infeasible {
            summary.unexpected_feasibility.push(label);
        }
        summary.failed_verdicts += report.verification.iter().filter(|v| !v.passed).count();
        let cost_matches_bound = report
            .cost
            .as_ref()
            .filter(|c| !c.exceeds_bound)
            .map(|c| c.matches_bound());
        if cost_matches_bound == Some(false) {
            summary.cost_mismatches.push(label);
        }
        rows.push(RunRow {
            report,
            expected_infeasible: op.expected_infeasible,
            cost_matches_bound,
        });
    }

    let report = RunReport {
        params: ParamsSummary {
            n: p.n(),
            r_r: p.r_r(),
            k_c: p.k_c_raw().to_string(),
            k_c_effective: p.k_c(),
            q: p.modulus(),
            l: p.l(),
            storage_per_server: p.storage_len(),
            seed,
        },
        init,
        rows,
        summary,
    };
    Ok((report, state))
}
