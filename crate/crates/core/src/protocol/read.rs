// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Read path: download plan and successive interference cancellation.

use crate::algebra::FieldMatrix;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::staircase::replica_coords;

use super::normalize_servers;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadPlan {
    /// Available servers, ascending.
    pub available: Vec<usize>,
    /// `J = N + 1 - |available|`: only blocks `1..=J` are downloaded.
    pub j: usize,
    /// Symbols downloaded from each available server, `lambda_J`.
    pub download_len: usize,
}

pub fn plan_read(p: &SystemParams, available: &[usize]) -> Result<ReadPlan> {
    let available = normalize_servers(p, available)?;
    if available.len() < p.read_threshold() {
        return Err(Error::ReadInfeasible {
            available: available.len(),
            threshold: p.read_threshold(),
        });
    }
    let j = p.n() + 1 - available.len();
    Ok(ReadPlan {
        download_len: p.lambda(j),
        available,
        j,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadDownload {
    pub server: usize,
    pub symbols: Vec<u64>,
}

impl ReadDownload {
    /// The first `plan.download_len` symbols of a server's storage row.
    pub fn from_storage(plan: &ReadPlan, server: usize, storage: &[u64]) -> Result<Self> {
        if storage.len() < plan.download_len {
            return Err(Error::ShapeMismatch(format!(
                "server {server} holds {} symbols, plan needs {}",
                storage.len(),
                plan.download_len
            )));
        }
        Ok(Self {
            server,
            symbols: storage[..plan.download_len].to_vec(),
        })
    }
}

/// Recovers the message from the downloads of the available servers.
pub fn sic_decode(downloads: &[ReadDownload], available: &[usize], p: &SystemParams) -> Result<Vec<u64>> {
    let blocks = sic_decode_blocks(downloads, available, p)?;
    let data = blocks[0].select_rows(&(0..p.alpha(1)).collect::<Vec<_>>())?;
    Ok(data.into_vec())
}

/// Recovers blocks `M_1..M_J` (each `N x gamma_i`, zero below `beta_i`).
///
/// Blocks are solved from `J` down to 1. For block `i`, its rows
/// `R_r+1..=R_r+J-i` are replicas already recovered from later blocks, so
/// they are subtracted as interference and the remaining `|available|`
/// rows are solved by inverting a square Cauchy submatrix.
pub fn sic_decode_blocks(
    downloads: &[ReadDownload],
    available: &[usize],
    p: &SystemParams,
) -> Result<Vec<FieldMatrix>> {
    let plan = plan_read(p, available)?;
    let k = plan.available.len();
    if downloads.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "{} downloads for {k} available servers",
            downloads.len()
        )));
    }
    let mut ordered: Vec<&ReadDownload> = downloads.iter().collect();
    ordered.sort_by_key(|d| d.server);
    for (d, &s) in ordered.iter().zip(&plan.available) {
        if d.server != s {
            return Err(Error::ShapeMismatch(format!(
                "download from server {} does not match the available set",
                d.server
            )));
        }
        if d.symbols.len() != plan.download_len {
            return Err(Error::ShapeMismatch(format!(
                "server {} sent {} symbols, expected {}",
                d.server,
                d.symbols.len(),
                plan.download_len
            )));
        }
    }

    let f = p.field();
    let c = p.cauchy();
    let j_max = plan.j;
    let mut blocks: Vec<FieldMatrix> = (1..=j_max)
        .map(|i| FieldMatrix::zeros(f, p.n(), p.gamma(i)))
        .collect();

    for i in (1..=j_max).rev() {
        let (lo, hi) = (p.lambda(i - 1), p.lambda(i));
        let mut rhs = FieldMatrix::zeros(f, k, hi - lo);
        for (r, d) in ordered.iter().enumerate() {
            rhs.row_mut(r).copy_from_slice(&d.symbols[lo..hi]);
        }

        // Redundancy rows of block i already recovered through their replicas.
        let known: Vec<usize> = (p.r_r() + 1..=p.r_r() + j_max - i).collect();
        for &row in &known {
            for coord in replica_coords(i, row, p)? {
                let t = coord.target;
                let v = blocks[t.block - 1].get(t.row - 1, t.col - 1);
                blocks[i - 1].set(row - 1, coord.source.col - 1, v);
            }
        }
        if !known.is_empty() {
            let known0: Vec<usize> = known.iter().map(|r| r - 1).collect();
            let interference = c
                .select(&plan.available, &known0)?
                .mul(&blocks[i - 1].select_rows(&known0)?)?;
            rhs = rhs.sub(&interference)?;
        }

        let unknown: Vec<usize> = (1..=p.beta(i))
            .filter(|r| !known.contains(r))
            .map(|r| r - 1)
            .collect();
        debug_assert_eq!(unknown.len(), k);
        let solved = c.select(&plan.available, &unknown)?.inverse()?.mul(&rhs)?;
        for (r, &row) in unknown.iter().enumerate() {
            blocks[i - 1].row_mut(row).copy_from_slice(solved.row(r));
        }
    }
    Ok(blocks)
}
