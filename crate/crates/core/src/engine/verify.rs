// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! State-level checks run at slot boundaries.

use itertools::Itertools;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::protocol::linear::StorageMap;
use crate::protocol::{plan_read, sic_decode, ReadDownload};
use crate::staircase::{sc_gen, StaircasePayload};

use super::{labels, steady_state_violation, SystemState, Verdict, VerifyDepth};

// Verification draws come from their own generator so that checking never
// perturbs the protocol's randomness.
const VERIFY_KEY: u64 = 0x5645_5249_4659;

pub fn verify_state(state: &SystemState, depth: VerifyDepth) -> Vec<Verdict> {
    if depth == VerifyDepth::Off {
        return Vec::new();
    }
    let mut out = vec![
        Verdict::check("storage_consistent", consistency(state)),
        Verdict::check("reference_structure", reference_structure(state)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(state.seed ^ VERIFY_KEY);
    rng.set_stream(state.slot);
    let servers: Vec<usize> = (0..state.params.n()).collect();
    let mut sample: Vec<usize> = servers
        .choose_multiple(&mut rng, state.params.read_threshold())
        .copied()
        .collect();
    sample.sort_unstable();
    out.push(Verdict::check("random_read", decode_from(state, &sample)));
    if depth == VerifyDepth::Full {
        out.push(Verdict::check("all_reads", all_reads(state)));
        out.push(Verdict::check("steady_state_security", steady_state(state)));
    }
    out
}

/// Every server row equals its row of `C * M_ref`.
fn consistency(state: &SystemState) -> Result<Option<String>> {
    let p = &state.params;
    let expected = p.cauchy().mul(state.ref_matrix.assembled())?;
    for (n, server) in state.servers.iter().enumerate() {
        if server.storage.len() != p.storage_len() {
            return Ok(Some(format!(
                "server {} holds {} symbols, expected {}",
                n + 1,
                server.storage.len(),
                p.storage_len()
            )));
        }
        if let Some(c) = (0..p.storage_len()).find(|&c| server.storage[c] != expected.get(n, c)) {
            return Ok(Some(format!("server {} column {} differs from the reference", n + 1, c + 1)));
        }
    }
    Ok(None)
}

fn reference_structure(state: &SystemState) -> Result<Option<String>> {
    let payload = StaircasePayload {
        data: state.ref_message.clone(),
        noise: state.ref_noise.clone(),
    };
    let rebuilt = sc_gen(&payload, &state.params)?;
    Ok((rebuilt != state.ref_matrix).then(|| "reference matrix is not sc_gen(W_ref, Z_ref)".to_string()))
}

fn decode_from(state: &SystemState, available: &[usize]) -> Result<Option<String>> {
    let p = &state.params;
    let plan = plan_read(p, available)?;
    let downloads = plan
        .available
        .iter()
        .map(|&s| ReadDownload::from_storage(&plan, s, &state.servers[s].storage))
        .collect::<Result<Vec<_>>>()?;
    let w = sic_decode(&downloads, &plan.available, p)?;
    Ok((w != state.ref_message).then(|| format!("servers {} decode a wrong message", labels(available))))
}

fn all_reads(state: &SystemState) -> Result<Option<String>> {
    for set in (0..state.params.n()).combinations(state.params.read_threshold()) {
        if let Some(why) = decode_from(state, &set)? {
            return Ok(Some(why));
        }
    }
    Ok(None)
}

fn steady_state(state: &SystemState) -> Result<Option<String>> {
    let p = &state.params;
    match &state.history {
        Some(h) => steady_state_violation(p, h.message(), h.noise()),
        None => {
            let map = StorageMap::build(p)?;
            steady_state_violation(p, map.message(), map.noise())
        }
    }
}
