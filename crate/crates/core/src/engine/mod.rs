// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Multi-slot system state.
//!
//! [`SystemState`] holds the `N` server rows together with a plaintext
//! reference (message, noise blocks and staircase matrix) that every slot
//! keeps in lockstep, so storage can always be checked against `C * M_ref`.

mod snapshot;
mod verify;

pub use snapshot::{SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use verify::verify_state;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::FieldMatrix;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::protocol::linear::{server_rows, IncrementMap, StorageMap};
use crate::protocol::{
    apply_update, build_h_blocks, coded_increment, complement, make_update_packets, plan_read, plan_update,
    read_cost, sample_secure_noise, sic_decode, update_cost, CostReport, ReadDownload,
};
use crate::staircase::{sc_add, sc_gen, StaircaseMatrix, StaircasePayload};

/// Randomness for slot `slot`. Stream 0 is reserved for initialization.
pub(crate) fn slot_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot + 1);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerState {
    pub storage: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyDepth {
    Off,
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Increment {
    Explicit(Vec<u64>),
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Read,
    Update { x: usize, increment: Increment },
}

/// One slot's operation. `dropouts` are 0-based server indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotOp {
    pub kind: SlotKind,
    pub dropouts: Vec<usize>,
}

impl SlotOp {
    pub fn read(dropouts: &[usize]) -> Self {
        Self {
            kind: SlotKind::Read,
            dropouts: dropouts.to_vec(),
        }
    }

    pub fn update(dropouts: &[usize], x: usize, increment: Increment) -> Self {
        Self {
            kind: SlotKind::Update { x, increment },
            dropouts: dropouts.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub(crate) fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    pub(crate) fn check(name: &str, result: Result<Option<String>>) -> Self {
        match result {
            Ok(None) => Self::new(name, true, "ok"),
            Ok(Some(why)) => Self::new(name, false, why),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlotReport {
    pub slot: u64,
    /// `"read"` or `"update"`.
    pub kind: String,
    pub dropouts: Vec<usize>,
    pub x: Option<usize>,
    pub feasible: bool,
    /// Why the operation was rejected, when it was.
    pub reason: Option<String>,
    pub g_t: Option<usize>,
    pub cost: Option<CostReport>,
    pub verification: Vec<Verdict>,
    pub recovered_message: Option<Vec<u64>>,
}

impl SlotReport {
    pub fn all_passed(&self) -> bool {
        self.verification.iter().all(|v| v.passed)
    }
}

/// Linear dependence of storage on every random input since initialization:
/// `(W0, Delta_1, ...)` on one side, `(Z0, Zdd_1, ...)` on the other.
#[derive(Clone, Debug)]
pub struct LinearHistory {
    message: FieldMatrix,
    noise: FieldMatrix,
}

impl LinearHistory {
    fn new(p: &SystemParams) -> Result<Self> {
        let map = StorageMap::build(p)?;
        Ok(Self {
            message: map.message().clone(),
            noise: map.noise().clone(),
        })
    }

    fn append(&mut self, map: &IncrementMap) -> Result<()> {
        let f = self.message.field();
        let rows = self.message.rows();
        self.message = FieldMatrix::hstack(f, rows, &[&self.message, map.delta()])?;
        self.noise = FieldMatrix::hstack(f, rows, &[&self.noise, map.noise()])?;
        Ok(())
    }

    pub fn message(&self) -> &FieldMatrix {
        &self.message
    }

    pub fn noise(&self) -> &FieldMatrix {
        &self.noise
    }
}

#[derive(Clone, Debug)]
pub struct SystemState {
    params: SystemParams,
    servers: Vec<ServerState>,
    ref_message: Vec<u64>,
    ref_noise: Vec<FieldMatrix>,
    ref_matrix: StaircaseMatrix,
    slot: u64,
    seed: u64,
    history: Option<LinearHistory>,
}

/// Loads the servers with `C * sc_gen(W0, Z0)` for uniform `Z0`. A missing
/// `w0` is drawn uniformly as well; both come from stream 0 of `seed`.
pub fn init_system(p: &SystemParams, w0: Option<Vec<u64>>, seed: u64) -> Result<SystemState> {
    SystemState::new(p.clone(), w0, seed)
}

impl SystemState {
    pub fn new(params: SystemParams, w0: Option<Vec<u64>>, seed: u64) -> Result<Self> {
        let f = params.field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = match w0 {
            Some(w) if w.len() != params.l() => {
                return Err(Error::LengthMismatch {
                    expected: params.l(),
                    got: w.len(),
                })
            }
            Some(w) => w.into_iter().map(|v| f.reduce(v)).collect(),
            None => (0..params.l()).map(|_| f.random(&mut rng)).collect(),
        };
        let noise = (1..=params.g())
            .map(|i| FieldMatrix::random(f, params.noise_rows(), params.gamma(i), &mut rng))
            .collect();
        Self::from_reference(params, w0, noise, seed, 0)
    }

    /// Rebuilds a state whose servers exactly hold `C * sc_gen(w, z)`.
    pub(crate) fn from_reference(
        params: SystemParams,
        ref_message: Vec<u64>,
        ref_noise: Vec<FieldMatrix>,
        seed: u64,
        slot: u64,
    ) -> Result<Self> {
        let payload = StaircasePayload {
            data: ref_message,
            noise: ref_noise,
        };
        let ref_matrix = sc_gen(&payload, &params)?;
        let coded = params.cauchy().mul(ref_matrix.assembled())?;
        let servers = (0..params.n())
            .map(|n| ServerState {
                storage: coded.row(n).to_vec(),
            })
            .collect();
        Ok(Self {
            params,
            servers,
            ref_message: payload.data,
            ref_noise: payload.noise,
            ref_matrix,
            slot,
            seed,
            history: None,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn servers(&self) -> &[ServerState] {
        &self.servers
    }

    /// Direct access to a server row, for fault injection.
    pub fn server_mut(&mut self, n: usize) -> &mut ServerState {
        &mut self.servers[n]
    }

    pub fn ref_message(&self) -> &[u64] {
        &self.ref_message
    }

    pub fn ref_noise(&self) -> &[FieldMatrix] {
        &self.ref_noise
    }

    pub fn ref_matrix(&self) -> &StaircaseMatrix {
        &self.ref_matrix
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn history(&self) -> Option<&LinearHistory> {
        self.history.as_ref()
    }

    /// Starts tracking storage as a linear map of every random input from
    /// here on. Only valid on a fresh state, whose storage depends on
    /// `(W0, Z0)` alone.
    pub fn enable_history(&mut self) -> Result<()> {
        if self.slot != 0 {
            return Err(Error::InvalidParams("history can only be enabled at slot 0".into()));
        }
        self.history = Some(LinearHistory::new(&self.params)?);
        Ok(())
    }

    /// Executes one slot. Infeasible operations are reported, leave every
    /// server and the reference untouched, and still consume the slot.
    pub fn step(&mut self, op: &SlotOp, depth: VerifyDepth) -> SlotReport {
        let slot = self.slot;
        let mut rng = slot_rng(self.seed, slot);
        let mut report = SlotReport {
            slot,
            kind: match op.kind {
                SlotKind::Read => "read".into(),
                SlotKind::Update { .. } => "update".into(),
            },
            dropouts: {
                let mut d = op.dropouts.clone();
                d.sort_unstable();
                d
            },
            x: match op.kind {
                SlotKind::Update { x, .. } => Some(x),
                SlotKind::Read => None,
            },
            feasible: true,
            reason: None,
            g_t: None,
            cost: None,
            verification: Vec::new(),
            recovered_message: None,
        };
        let outcome = match &op.kind {
            SlotKind::Read => self.run_read(op, &mut report),
            SlotKind::Update { x, increment } => self.run_update(op, *x, increment, depth, &mut rng, &mut report),
        };
        if let Err(e) = outcome {
            report.feasible = false;
            report.reason = Some(e.to_string());
            report.cost = None;
            report.g_t = None;
            report.verification.clear();
        }
        self.slot += 1;
        report.verification.extend(verify_state(self, depth));
        report
    }

    fn run_read(&self, op: &SlotOp, report: &mut SlotReport) -> Result<()> {
        let p = &self.params;
        if op.dropouts.iter().any(|&d| d >= p.n()) {
            return Err(Error::IndexOutOfRange(format!("dropout set {:?}", op.dropouts)));
        }
        let available = complement(p, &op.dropouts);
        let plan = plan_read(p, &available)?;
        let downloads = plan
            .available
            .iter()
            .map(|&s| ReadDownload::from_storage(&plan, s, &self.servers[s].storage))
            .collect::<Result<Vec<_>>>()?;
        let w = sic_decode(&downloads, &plan.available, p)?;
        report.cost = Some(read_cost(p, &plan.available)?);
        report.verification.push(Verdict::new(
            "read_recovers_message",
            w == self.ref_message,
            if w == self.ref_message { "ok" } else { "decoded message differs from reference" },
        ));
        report.recovered_message = Some(w);
        Ok(())
    }

    fn run_update(
        &mut self,
        op: &SlotOp,
        x: usize,
        increment: &Increment,
        depth: VerifyDepth,
        rng: &mut ChaCha8Rng,
        report: &mut SlotReport,
    ) -> Result<()> {
        let p = self.params.clone();
        let f = p.field();
        let plan = plan_update(&p, &op.dropouts, x)?;
        let delta: Vec<u64> = match increment {
            Increment::Explicit(v) if v.len() != p.l() => {
                return Err(Error::LengthMismatch {
                    expected: p.l(),
                    got: v.len(),
                })
            }
            Increment::Explicit(v) => v.iter().map(|&d| f.reduce(d)).collect(),
            Increment::Random => (0..p.l()).map(|_| f.random(rng)).collect(),
        };
        let zdd = sample_secure_noise(x, plan.g_t, &p, rng);
        let built = build_h_blocks(&delta, &zdd, &plan, &p)?;
        let packets = make_update_packets(&built.increment, &p, &plan)?;
        let new_rows = packets
            .iter()
            .map(|pk| apply_update(f, &self.servers[pk.server].storage, pk))
            .collect::<Result<Vec<_>>>()?;
        let new_matrix = sc_add(&self.ref_matrix, &built.increment)?;
        let map = match (&self.history, depth) {
            (Some(_), _) | (None, VerifyDepth::Full) => Some(IncrementMap::build(&p, &plan)?),
            _ => None,
        };

        // Commit.
        let before: Vec<Vec<u64>> = plan.dropouts.iter().map(|&d| self.servers[d].storage.clone()).collect();
        for (pk, row) in packets.iter().zip(new_rows) {
            self.servers[pk.server].storage = row;
        }
        for (w, d) in self.ref_message.iter_mut().zip(&delta) {
            *w = f.add(*w, *d);
        }
        for (z, dz) in self.ref_noise.iter_mut().zip(&built.noise_blocks) {
            *z = z.add(dz)?;
        }
        self.ref_matrix = new_matrix;
        if let (Some(h), Some(m)) = (self.history.as_mut(), map.as_ref()) {
            h.append(m)?;
        }

        report.g_t = Some(plan.g_t);
        report.cost = Some(update_cost(&p, &plan.available, x)?);
        if depth == VerifyDepth::Off {
            return Ok(());
        }

        let coded = coded_increment(&built.increment, &p)?;
        report.verification.push(Verdict::check("null_property", Ok(null_violation(&coded, &plan.dropouts))));
        let untouched = plan
            .dropouts
            .iter()
            .zip(&before)
            .find(|(&d, row)| self.servers[d].storage != **row);
        report.verification.push(Verdict::new(
            "dropouts_untouched",
            untouched.is_none(),
            match untouched {
                None => "ok".to_string(),
                Some((d, _)) => format!("server {} changed", d + 1),
            },
        ));
        if let Some(map) = map.filter(|_| depth == VerifyDepth::Full) {
            report.verification.push(Verdict::check("x_security", x_security_violation(&p, &map)));
            report
                .verification
                .push(Verdict::check("increment_determined", increment_violation(&p, &map, &packets, &delta)));
        }
        Ok(())
    }
}

fn null_violation(coded: &FieldMatrix, dropouts: &[usize]) -> Option<String> {
    dropouts.iter().find_map(|&d| {
        coded
            .row(d)
            .iter()
            .position(|&v| v != 0)
            .map(|c| format!("server {} column {} of the coded increment is nonzero", d + 1, c + 1))
    })
}

/// Every `X` available servers: packets carry no information on `Delta`.
pub fn x_security_violation(p: &SystemParams, map: &IncrementMap) -> Result<Option<String>> {
    let plan = map.plan();
    for set in plan.available.iter().copied().combinations(plan.x) {
        if !map.is_secure_against(p, &set)? {
            return Ok(Some(format!("servers {} learn about the increment", labels(&set))));
        }
    }
    Ok(None)
}

/// Every `R_r - |D|` available servers: their packets determine `Delta`.
pub fn increment_violation(
    p: &SystemParams,
    map: &IncrementMap,
    packets: &[crate::protocol::UpdatePacket],
    delta: &[u64],
) -> Result<Option<String>> {
    let plan = map.plan();
    let k = p.r_r() - plan.dropouts.len();
    for set in plan.available.iter().copied().combinations(k) {
        let stacked: Vec<u64> = set
            .iter()
            .flat_map(|&s| {
                packets
                    .iter()
                    .find(|pk| pk.server == s)
                    .map(|pk| pk.symbols.clone())
                    .unwrap_or_default()
            })
            .collect();
        match map.recover_delta(p, &set, &stacked)? {
            Some(d) if d == delta => {}
            Some(_) => return Ok(Some(format!("servers {} recover a wrong increment", labels(&set)))),
            None => return Ok(Some(format!("servers {} do not determine the increment", labels(&set)))),
        }
    }
    Ok(None)
}

/// Steady-state check: for every `R_r - K_c` servers, the message part of
/// the storage map lies inside the span of the noise part.
pub(crate) fn steady_state_violation(
    p: &SystemParams,
    message: &FieldMatrix,
    noise: &FieldMatrix,
) -> Result<Option<String>> {
    for set in (0..p.n()).combinations(p.noise_rows()) {
        let m = server_rows(p, message, &set)?;
        let z = server_rows(p, noise, &set)?;
        if !crate::protocol::column_space_contains(&z, &m)? {
            return Ok(Some(format!("servers {} learn about the message", labels(&set))));
        }
    }
    Ok(None)
}

/// 1-based, braces: `{2,5}`.
pub(crate) fn labels(servers: &[usize]) -> String {
    format!("{{{}}}", servers.iter().map(|s| (s + 1).to_string()).join(","))
}
