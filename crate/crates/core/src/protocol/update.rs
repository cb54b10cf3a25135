// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Update path: secure noise, the recursive null-space (`H`) construction,
//! coded-increment packets and their application to storage.
//!
//! For every block `i <= G_t` the increment's noise rows are
//! `[Zdd_i; H_i; 0]`: `X` rows of fresh uniform noise, then `|D|` rows solved
//! so that the dropout servers' rows of `C * Mdot_i` vanish. Blocks past
//! `G_t` are all zero, which also zeroes every coded symbol past
//! `lambda_{G_t}`.

use rand::Rng;

use crate::algebra::{FieldMatrix, PrimeField};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::staircase::{StaircaseBuilder, StaircaseMatrix};

use super::normalize_servers;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdatePlan {
    /// Dropout servers, ascending.
    pub dropouts: Vec<usize>,
    /// Available servers, ascending.
    pub available: Vec<usize>,
    pub x: usize,
    /// Number of blocks carrying increment symbols.
    pub g_t: usize,
    /// Set when `N - 2R_r + K_c + X + |D| + 1 < 1` and `G_t` was raised to 1.
    /// The upload then exceeds the optimal cost.
    pub clamped: bool,
}

impl UpdatePlan {
    /// Symbols uploaded to each available server, `lambda_{G_t}`.
    pub fn upload_len(&self, p: &SystemParams) -> usize {
        p.lambda(self.g_t)
    }
}

pub fn plan_update(p: &SystemParams, dropouts: &[usize], x: usize) -> Result<UpdatePlan> {
    let dropouts = normalize_servers(p, dropouts)?;
    if x > p.noise_rows() {
        return Err(Error::UpdateInfeasible(format!(
            "X = {x} exceeds R_r - K_c = {}",
            p.noise_rows()
        )));
    }
    let available: Vec<usize> = (0..p.n()).filter(|s| !dropouts.contains(s)).collect();
    let threshold = p.update_threshold(x);
    if available.len() < threshold {
        return Err(Error::UpdateInfeasible(format!(
            "{} servers available, X = {x} needs {threshold}",
            available.len()
        )));
    }
    let raw = (p.n() + p.k_c() + x + dropouts.len() + 1) as isize - 2 * p.r_r() as isize;
    Ok(UpdatePlan {
        g_t: raw.max(1) as usize,
        clamped: raw < 1,
        dropouts,
        available,
        x,
    })
}

/// Uniform `X x gamma_i` noise blocks for `i = 1..=G_t`, drawn in block order,
/// row-major within a block.
pub fn sample_secure_noise<R: Rng + ?Sized>(x: usize, g_t: usize, p: &SystemParams, rng: &mut R) -> Vec<FieldMatrix> {
    (1..=g_t)
        .map(|i| FieldMatrix::random(p.field(), x, p.gamma(i), rng))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateConstruction {
    /// `Zdd_1..Zdd_{G_t}`.
    pub secure_noise: Vec<FieldMatrix>,
    /// `H_1..H_{G_t}`, each `|D| x gamma_i`.
    pub h_blocks: Vec<FieldMatrix>,
    /// The increment's full noise blocks `Zdot_1..Zdot_G`.
    pub noise_blocks: Vec<FieldMatrix>,
    /// `Mdot`, the staircase matrix of the increment.
    pub increment: StaircaseMatrix,
}

pub fn build_h_blocks(
    delta: &[u64],
    secure_noise: &[FieldMatrix],
    plan: &UpdatePlan,
    p: &SystemParams,
) -> Result<UpdateConstruction> {
    let f = p.field();
    let x = plan.x;
    let nd = plan.dropouts.len();
    if nd + x > p.noise_rows() {
        return Err(Error::UpdateInfeasible(format!(
            "|D| + X = {} exceeds R_r - K_c = {}",
            nd + x,
            p.noise_rows()
        )));
    }
    if secure_noise.len() != plan.g_t {
        return Err(Error::DimensionMismatch(format!(
            "{} secure noise blocks, expected G_t = {}",
            secure_noise.len(),
            plan.g_t
        )));
    }
    for (i, z) in secure_noise.iter().enumerate() {
        if z.rows() != x || z.cols() != p.gamma(i + 1) {
            return Err(Error::DimensionMismatch(format!(
                "secure noise block {} is {}x{}, expected {x}x{}",
                i + 1,
                z.rows(),
                z.cols(),
                p.gamma(i + 1)
            )));
        }
    }

    let c_d = p.cauchy().select_rows(&plan.dropouts)?;
    let mut builder = StaircaseBuilder::new(p, delta)?;
    let mut h_blocks = Vec::with_capacity(plan.g_t);
    let mut noise_blocks = Vec::with_capacity(p.g());

    for i in 1..=p.g() {
        let gamma = p.gamma(i);
        let noise = if i <= plan.g_t {
            let alpha = p.alpha(i);
            let zdd = &secure_noise[i - 1];
            let h = if nd == 0 {
                FieldMatrix::zeros(f, 0, gamma)
            } else {
                let top = builder.next_data_rows()?;
                let cols = |lo: usize, hi: usize| -> Vec<usize> { (lo..hi).collect() };
                let known = c_d
                    .select_cols(&cols(0, alpha))?
                    .mul(&top)?
                    .add(&c_d.select_cols(&cols(alpha, alpha + x))?.mul(zdd)?)?;
                let solver = c_d.select_cols(&cols(alpha + x, alpha + x + nd))?.inverse()?;
                solver.mul(&known)?.neg()
            };
            let pad = FieldMatrix::zeros(f, p.noise_rows() - x - nd, gamma);
            let block = FieldMatrix::vstack(f, gamma, &[zdd, &h, &pad])?;
            h_blocks.push(h);
            block
        } else {
            FieldMatrix::zeros(f, p.noise_rows(), gamma)
        };
        builder.push(&noise)?;
        noise_blocks.push(noise);
    }

    Ok(UpdateConstruction {
        secure_noise: secure_noise.to_vec(),
        h_blocks,
        noise_blocks,
        increment: builder.finish()?,
    })
}

/// `C * Mdot`, the full `N x lambda_G` coded increment (including rows of
/// dropout servers and the zero tail, for verification).
pub fn coded_increment(increment: &StaircaseMatrix, p: &SystemParams) -> Result<FieldMatrix> {
    p.cauchy().mul(increment.assembled())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdatePacket {
    pub server: usize,
    pub symbols: Vec<u64>,
}

/// One packet per available server: the first `lambda_{G_t}` symbols of its
/// row of `C * Mdot`. The truncated tail is checked to be zero.
pub fn make_update_packets(
    increment: &StaircaseMatrix,
    p: &SystemParams,
    plan: &UpdatePlan,
) -> Result<Vec<UpdatePacket>> {
    let coded = p.cauchy().select_rows(&plan.available)?.mul(increment.assembled())?;
    let len = plan.upload_len(p);
    plan.available
        .iter()
        .enumerate()
        .map(|(r, &server)| {
            let row = coded.row(r);
            if let Some(col) = (len..row.len()).find(|&c| row[c] != 0) {
                return Err(Error::TailNotZero { server, col });
            }
            Ok(UpdatePacket {
                server,
                symbols: row[..len].to_vec(),
            })
        })
        .collect()
}

/// Adds a packet onto the prefix of a storage row.
pub fn apply_update(field: PrimeField, storage: &[u64], packet: &UpdatePacket) -> Result<Vec<u64>> {
    if packet.symbols.len() > storage.len() {
        return Err(Error::LengthExceeded {
            packet: packet.symbols.len(),
            storage: storage.len(),
        });
    }
    let mut out = storage.to_vec();
    for (s, &d) in out.iter_mut().zip(&packet.symbols) {
        *s = field.add(*s, d);
    }
    Ok(out)
}
