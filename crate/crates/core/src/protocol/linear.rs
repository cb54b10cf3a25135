// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Explicit matrices of the linear maps behind storage and updates.
//!
//! Both maps are materialized by evaluating the construction on unit vectors.
//! Rows are indexed `n * lambda_G + c` for server `n`, column `c`.

use crate::algebra::FieldMatrix;
use crate::error::Result;
use crate::params::SystemParams;
use crate::staircase::{sc_gen, StaircasePayload};

use super::update::{build_h_blocks, coded_increment, UpdatePlan};

/// Whether every column of `sub` lies in the column space of `space`.
pub fn column_space_contains(space: &FieldMatrix, sub: &FieldMatrix) -> Result<bool> {
    let both = FieldMatrix::hstack(space.field(), space.rows(), &[space, sub])?;
    Ok(both.rank() == space.rank())
}

fn row_indices(p: &SystemParams, servers: &[usize], prefix: usize) -> Vec<usize> {
    let width = p.storage_len();
    servers
        .iter()
        .flat_map(|&n| (0..prefix).map(move |c| n * width + c))
        .collect()
}

fn columns_to_matrix(p: &SystemParams, cols: Vec<Vec<u64>>) -> Result<FieldMatrix> {
    let rows = p.n() * p.storage_len();
    let n = cols.len();
    let data: Vec<u64> = cols.into_iter().flatten().collect();
    Ok(FieldMatrix::from_vec(p.field(), n, rows, data)?.transpose())
}

/// Splits a flat vector into `X x gamma_i` blocks, `i = 1..=g_t`, in the
/// order [`super::sample_secure_noise`] draws them.
pub fn noise_from_vec(p: &SystemParams, x: usize, g_t: usize, v: &[u64]) -> Result<Vec<FieldMatrix>> {
    let mut at = 0;
    (1..=g_t)
        .map(|i| {
            let len = x * p.gamma(i);
            let block = FieldMatrix::from_vec(p.field(), x, p.gamma(i), v[at..at + len].to_vec());
            at += len;
            block
        })
        .collect()
}

pub fn noise_to_vec(blocks: &[FieldMatrix]) -> Vec<u64> {
    blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect()
}

/// The coded increment `C * Mdot` of one update as a linear function of the
/// increment `Delta` and the secure noise `Zdd`.
#[derive(Clone, Debug)]
pub struct IncrementMap {
    plan: UpdatePlan,
    delta: FieldMatrix,
    noise: FieldMatrix,
}

impl IncrementMap {
    pub fn build(p: &SystemParams, plan: &UpdatePlan) -> Result<Self> {
        let noise_vars: usize = (1..=plan.g_t).map(|i| plan.x * p.gamma(i)).sum();
        let zero_noise = noise_from_vec(p, plan.x, plan.g_t, &vec![0; noise_vars])?;
        let eval = |delta: &[u64], noise: &[FieldMatrix]| -> Result<Vec<u64>> {
            let built = build_h_blocks(delta, noise, plan, p)?;
            Ok(coded_increment(&built.increment, p)?.into_vec())
        };

        let mut unit = vec![0; p.l()];
        let mut delta_cols = Vec::with_capacity(p.l());
        for k in 0..p.l() {
            unit[k] = 1;
            delta_cols.push(eval(&unit, &zero_noise)?);
            unit[k] = 0;
        }
        let zero_delta = vec![0; p.l()];
        let mut unit = vec![0; noise_vars];
        let mut noise_cols = Vec::with_capacity(noise_vars);
        for k in 0..noise_vars {
            unit[k] = 1;
            noise_cols.push(eval(&zero_delta, &noise_from_vec(p, plan.x, plan.g_t, &unit)?)?);
            unit[k] = 0;
        }
        Ok(Self {
            plan: plan.clone(),
            delta: columns_to_matrix(p, delta_cols)?,
            noise: columns_to_matrix(p, noise_cols)?,
        })
    }

    pub fn plan(&self) -> &UpdatePlan {
        &self.plan
    }

    /// `N * lambda_G x L`.
    pub fn delta(&self) -> &FieldMatrix {
        &self.delta
    }

    /// `N * lambda_G x (X * lambda_{G_t})`.
    pub fn noise(&self) -> &FieldMatrix {
        &self.noise
    }

    /// The maps onto the stacked packets of `servers`: `(Delta part, Zdd part)`.
    pub fn packet_maps(&self, p: &SystemParams, servers: &[usize]) -> Result<(FieldMatrix, FieldMatrix)> {
        let rows = row_indices(p, servers, self.plan.upload_len(p));
        Ok((self.delta.select_rows(&rows)?, self.noise.select_rows(&rows)?))
    }

    /// Whether the packets of `servers` reveal nothing about `Delta`.
    pub fn is_secure_against(&self, p: &SystemParams, servers: &[usize]) -> Result<bool> {
        let (d, z) = self.packet_maps(p, servers)?;
        column_space_contains(&z, &d)
    }

    /// Solves the stacked packets of `servers` for `Delta`. Returns `None`
    /// when the packets do not pin `Delta` down.
    pub fn recover_delta(&self, p: &SystemParams, servers: &[usize], packets: &[u64]) -> Result<Option<Vec<u64>>> {
        let (d, z) = self.packet_maps(p, servers)?;
        let both = FieldMatrix::hstack(p.field(), d.rows(), &[&d, &z])?;
        if both.rank() != z.rank() + p.l() {
            return Ok(None);
        }
        let rhs = FieldMatrix::from_vec(p.field(), packets.len(), 1, packets.to_vec())?;
        Ok(both
            .solve(&rhs)?
            .map(|sol| sol.as_slice()[..p.l()].to_vec()))
    }
}

/// Storage `C * sc_gen(W, Z)` as a linear function of the message `W` and the
/// noise blocks `Z` (flattened block by block, row-major).
#[derive(Clone, Debug)]
pub struct StorageMap {
    message: FieldMatrix,
    noise: FieldMatrix,
}

impl StorageMap {
    pub fn build(p: &SystemParams) -> Result<Self> {
        let eval = |payload: &StaircasePayload| -> Result<Vec<u64>> {
            Ok(p.cauchy().mul(sc_gen(payload, p)?.assembled())?.into_vec())
        };
        let mut payload = StaircasePayload::zero(p);
        let mut message = Vec::with_capacity(p.l());
        for k in 0..p.l() {
            payload.data[k] = 1;
            message.push(eval(&payload)?);
            payload.data[k] = 0;
        }
        let mut noise = Vec::new();
        for b in 0..p.g() {
            for r in 0..p.noise_rows() {
                for c in 0..p.gamma(b + 1) {
                    payload.noise[b].set(r, c, 1);
                    noise.push(eval(&payload)?);
                    payload.noise[b].set(r, c, 0);
                }
            }
        }
        Ok(Self {
            message: columns_to_matrix(p, message)?,
            noise: columns_to_matrix(p, noise)?,
        })
    }

    pub fn message(&self) -> &FieldMatrix {
        &self.message
    }

    pub fn noise(&self) -> &FieldMatrix {
        &self.noise
    }
}

/// Rows of a storage-shaped map belonging to `servers` (full rows).
pub fn server_rows(p: &SystemParams, m: &FieldMatrix, servers: &[usize]) -> Result<FieldMatrix> {
    m.select_rows(&row_indices(p, servers, p.storage_len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::protocol::update::{make_update_packets, plan_update, sample_secure_noise};
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p642() -> SystemParams {
        derive_params(6, 4, Ratio::from_integer(2)).unwrap()
    }

    #[test]
    fn containment_examples() {
        let f = crate::algebra::PrimeField::new(7).unwrap();
        let a = FieldMatrix::from_rows(f, &[vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        let inside = FieldMatrix::from_rows(f, &[vec![3], vec![5], vec![0]]).unwrap();
        let outside = FieldMatrix::from_rows(f, &[vec![0], vec![0], vec![1]]).unwrap();
        assert!(column_space_contains(&a, &inside).unwrap());
        assert!(!column_space_contains(&a, &outside).unwrap());
    }

    #[test]
    fn map_reproduces_direct_packets() {
        let p = p642();
        let plan = plan_update(&p, &[4], 1).unwrap();
        let map = IncrementMap::build(&p, &plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let delta: Vec<u64> = (0..p.l()).map(|_| p.field().random(&mut rng)).collect();
        let zdd = sample_secure_noise(plan.x, plan.g_t, &p, &mut rng);
        let built = build_h_blocks(&delta, &zdd, &plan, &p).unwrap();
        let packets = make_update_packets(&built.increment, &p, &plan).unwrap();

        let mut vars = delta.clone();
        vars.extend(noise_to_vec(&zdd));
        let v = FieldMatrix::from_vec(p.field(), vars.len(), 1, vars).unwrap();
        let both = FieldMatrix::hstack(p.field(), map.delta().rows(), &[map.delta(), map.noise()]).unwrap();
        let coded = both.mul(&v).unwrap();
        for pk in &packets {
            for (c, &s) in pk.symbols.iter().enumerate() {
                assert_eq!(coded.get(pk.server * p.storage_len() + c, 0), s);
            }
        }

        let servers = [0, 1, 2];
        let stacked: Vec<u64> = servers
            .iter()
            .flat_map(|&s| packets.iter().find(|pk| pk.server == s).unwrap().symbols.clone())
            .collect();
        assert_eq!(map.recover_delta(&p, &servers, &stacked).unwrap(), Some(delta));
        assert!(map.is_secure_against(&p, &[0]).unwrap());
    }

    #[test]
    fn no_noise_means_no_security() {
        let p = p642();
        let plan = plan_update(&p, &[], 0).unwrap();
        let map = IncrementMap::build(&p, &plan).unwrap();
        assert!(!map.is_secure_against(&p, &[0]).unwrap());
        assert!(map.is_secure_against(&p, &[]).unwrap());
    }

    #[test]
    fn storage_map_shapes() {
        let p = p642();
        let m = StorageMap::build(&p).unwrap();
        assert_eq!((m.message().rows(), m.message().cols()), (36, 12));
        assert_eq!((m.noise().rows(), m.noise().cols()), (36, 12));
        let rows = server_rows(&p, m.noise(), &[1, 4]).unwrap();
        assert_eq!(rows.rows(), 12);
    }
}
