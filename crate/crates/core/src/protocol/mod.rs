// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Read and update operations, cost accounting and the linear maps used to
//! check them.

pub mod cost;
pub mod linear;
pub mod read;
pub mod update;

pub use cost::{read_bound, read_cost, update_bound, update_cost, CostReport};
pub use linear::{column_space_contains, IncrementMap, StorageMap};
pub use read::{plan_read, sic_decode, sic_decode_blocks, ReadDownload, ReadPlan};
pub use update::{
    apply_update, build_h_blocks, coded_increment, make_update_packets, plan_update, sample_secure_noise,
    UpdateConstruction, UpdatePacket, UpdatePlan,
};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Sorts a server set, rejecting duplicates and indices outside `0..N`.
pub(crate) fn normalize_servers(p: &SystemParams, servers: &[usize]) -> Result<Vec<usize>> {
    let mut out = servers.to_vec();
    out.sort_unstable();
    if let Some(&s) = out.iter().find(|&&s| s >= p.n()) {
        return Err(Error::IndexOutOfRange(format!("server {s} not in 0..{}", p.n())));
    }
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::IndexOutOfRange("duplicate server in set".into()));
    }
    Ok(out)
}

/// Complement of `servers` in `0..N`.
pub fn complement(p: &SystemParams, servers: &[usize]) -> Vec<usize> {
    (0..p.n()).filter(|s| !servers.contains(s)).collect()
}
