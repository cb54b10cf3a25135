// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Normalized communication costs and their optimal values.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::params::SystemParams;

use super::read::plan_read;
use super::update::plan_update;

fn ratio_str<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport {
    /// Total symbols downloaded (read) or uploaded (update).
    pub symbols: usize,
    #[serde(serialize_with = "ratio_str")]
    pub normalized: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub bound: Ratio<u64>,
    pub read_threshold: usize,
    pub update_threshold: Option<usize>,
    /// Only set for clamped updates, where the optimum is not reached.
    pub exceeds_bound: bool,
}

impl CostReport {
    pub fn matches_bound(&self) -> bool {
        self.normalized == self.bound
    }
}

/// `(N - |D|) / (N - R_r + K_c - |D|)`.
pub fn read_bound(p: &SystemParams, dropouts: usize) -> Ratio<u64> {
    let n = (p.n() - dropouts) as u64;
    Ratio::new(n, (p.n() - p.r_r() + p.k_c() - dropouts) as u64)
}

/// `(N - |D|) / (R_r - X - |D|)`.
pub fn update_bound(p: &SystemParams, dropouts: usize, x: usize) -> Ratio<u64> {
    let n = (p.n() - dropouts) as u64;
    Ratio::new(n, (p.r_r() - x - dropouts) as u64)
}

pub fn read_cost(p: &SystemParams, available: &[usize]) -> Result<CostReport> {
    let plan = plan_read(p, available)?;
    let symbols = plan.available.len() * plan.download_len;
    Ok(CostReport {
        symbols,
        normalized: Ratio::new(symbols as u64, p.l() as u64),
        bound: read_bound(p, p.n() - plan.available.len()),
        read_threshold: p.read_threshold(),
        update_threshold: None,
        exceeds_bound: false,
    })
}

pub fn update_cost(p: &SystemParams, available: &[usize], x: usize) -> Result<CostReport> {
    let dropouts = super::complement(p, available);
    let plan = plan_update(p, &dropouts, x)?;
    let symbols = plan.available.len() * plan.upload_len(p);
    let normalized = Ratio::new(symbols as u64, p.l() as u64);
    let bound = update_bound(p, plan.dropouts.len(), x);
    Ok(CostReport {
        symbols,
        exceeds_bound: normalized > bound,
        normalized,
        bound,
        read_threshold: p.read_threshold(),
        update_threshold: Some(p.update_threshold(x)),
    })
}
