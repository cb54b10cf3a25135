// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! The staircase matrix `M = [M_1, ..., M_G]`.
//!
//! Block `i` is `N x gamma_i`. Its first `alpha_i` rows carry data: the
//! reshaped message for `i = 1`, otherwise a copy (`D_{i-1}`) of the
//! redundancy rows `M_1(R_r+i-1,:), M_2(R_r+i-2,:), ..., M_{i-1}(R_r+1,:)`.
//! The next `R_r - K_c` rows hold the block's noise and everything below
//! `beta_i` is zero.

use crate::algebra::FieldMatrix;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Row-major reshape of `v` into a `rows x cols` matrix.
pub fn reshape(field: crate::algebra::PrimeField, v: &[u64], rows: usize, cols: usize) -> Result<FieldMatrix> {
    if v.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    FieldMatrix::from_vec(field, rows, cols, v.to_vec())
}

/// Data vector (message or increment) plus one noise block per staircase block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircasePayload {
    pub data: Vec<u64>,
    pub noise: Vec<FieldMatrix>,
}

impl StaircasePayload {
    pub fn zero(p: &SystemParams) -> Self {
        Self {
            data: vec![0; p.l()],
            noise: (1..=p.g())
                .map(|i| FieldMatrix::zeros(p.field(), p.noise_rows(), p.gamma(i)))
                .collect(),
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(p: &SystemParams, rng: &mut R) -> Self {
        let f = p.field();
        let data = (0..p.l()).map(|_| f.random(rng)).collect();
        let noise = (1..=p.g())
            .map(|i| FieldMatrix::random(f, p.noise_rows(), p.gamma(i), rng))
            .collect();
        Self { data, noise }
    }

    pub fn validate(&self, p: &SystemParams) -> Result<()> {
        if self.data.len() != p.l() {
            return Err(Error::DimensionMismatch(format!(
                "data has length {}, expected L = {}",
                self.data.len(),
                p.l()
            )));
        }
        if self.noise.len() != p.g() {
            return Err(Error::DimensionMismatch(format!(
                "{} noise blocks, expected G = {}",
                self.noise.len(),
                p.g()
            )));
        }
        for (i, z) in self.noise.iter().enumerate() {
            if z.rows() != p.noise_rows() || z.cols() != p.gamma(i + 1) || z.field() != p.field() {
                return Err(Error::DimensionMismatch(format!(
                    "noise block {} is {}x{}, expected {}x{}",
                    i + 1,
                    z.rows(),
                    z.cols(),
                    p.noise_rows(),
                    p.gamma(i + 1)
                )));
            }
        }
        Ok(())
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.data.len() != other.data.len() || self.noise.len() != other.noise.len() {
            return Err(Error::DimensionMismatch("payload shapes differ".into()));
        }
        let f = self.noise.first().map(|z| z.field());
        let data = match f {
            Some(f) => self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect(),
            None => return Err(Error::DimensionMismatch("payload without noise blocks".into())),
        };
        let noise = self
            .noise
            .iter()
            .zip(&other.noise)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self { data, noise })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseMatrix {
    blocks: Vec<FieldMatrix>,
    assembled: FieldMatrix,
}

impl StaircaseMatrix {
    fn from_blocks(p: &SystemParams, blocks: Vec<FieldMatrix>) -> Result<Self> {
        let refs: Vec<&FieldMatrix> = blocks.iter().collect();
        let assembled = FieldMatrix::hstack(p.field(), p.n(), &refs)?;
        Ok(Self { blocks, assembled })
    }

    pub fn zero(p: &SystemParams) -> Self {
        let blocks = (1..=p.g())
            .map(|i| FieldMatrix::zeros(p.field(), p.n(), p.gamma(i)))
            .collect();
        Self::from_blocks(p, blocks).expect("zero blocks have matching shapes")
    }

    /// Block `i` (1-based).
    pub fn block(&self, i: usize) -> &FieldMatrix {
        &self.blocks[i - 1]
    }

    pub fn blocks(&self) -> &[FieldMatrix] {
        &self.blocks
    }

    /// The `N x lambda_G` horizontal concatenation of all blocks.
    pub fn assembled(&self) -> &FieldMatrix {
        &self.assembled
    }

    pub fn into_assembled(self) -> FieldMatrix {
        self.assembled
    }

    /// Reads the cell at 1-based `(block, row, col)`.
    pub fn at(&self, cell: Cell) -> u64 {
        self.blocks[cell.block - 1].get(cell.row - 1, cell.col - 1)
    }
}

/// Incremental form of [`sc_gen`]: block `i`'s data rows depend only on
/// blocks `1..i`, so callers can inspect them before choosing block `i`'s
/// noise rows. This is what the update construction needs.
pub struct StaircaseBuilder<'a> {
    p: &'a SystemParams,
    data: Vec<u64>,
    blocks: Vec<FieldMatrix>,
}

impl<'a> StaircaseBuilder<'a> {
    pub fn new(p: &'a SystemParams, data: &[u64]) -> Result<Self> {
        if data.len() != p.l() {
            return Err(Error::DimensionMismatch(format!(
                "data has length {}, expected L = {}",
                data.len(),
                p.l()
            )));
        }
        Ok(Self {
            p,
            data: data.to_vec(),
            blocks: Vec::with_capacity(p.g()),
        })
    }

    /// 1-based index of the block the next `push` will create.
    pub fn next_index(&self) -> usize {
        self.blocks.len() + 1
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.len() == self.p.g()
    }

    /// The `alpha_i x gamma_i` data rows of the next block.
    pub fn next_data_rows(&self) -> Result<FieldMatrix> {
        let p = self.p;
        let i = self.next_index();
        if i > p.g() {
            return Err(Error::IndexOutOfRange(format!("block {i} of {}", p.g())));
        }
        if i == 1 {
            return reshape(p.field(), &self.data, p.alpha(1), p.gamma(1));
        }
        let mut replicas = Vec::with_capacity(p.lambda(i - 1));
        for j in 1..i {
            // M_j(R_r + i - j, :), 1-based row
            replicas.extend_from_slice(self.blocks[j - 1].row(p.r_r() + i - j - 1));
        }
        reshape(p.field(), &replicas, p.alpha(i), p.gamma(i))
    }

    /// Appends the next block with the given `(R_r - K_c) x gamma_i` noise rows.
    pub fn push(&mut self, noise: &FieldMatrix) -> Result<()> {
        let p = self.p;
        let i = self.next_index();
        let top = self.next_data_rows()?;
        if noise.rows() != p.noise_rows() || noise.cols() != p.gamma(i) {
            return Err(Error::DimensionMismatch(format!(
                "noise block {i} is {}x{}, expected {}x{}",
                noise.rows(),
                noise.cols(),
                p.noise_rows(),
                p.gamma(i)
            )));
        }
        let zeros = FieldMatrix::zeros(p.field(), p.n() - p.beta(i), p.gamma(i));
        let block = FieldMatrix::vstack(p.field(), p.gamma(i), &[&top, noise, &zeros])?;
        self.blocks.push(block);
        Ok(())
    }

    pub fn finish(self) -> Result<StaircaseMatrix> {
        if !self.is_complete() {
            return Err(Error::DimensionMismatch(format!(
                "only {} of {} blocks built",
                self.blocks.len(),
                self.p.g()
            )));
        }
        StaircaseMatrix::from_blocks(self.p, self.blocks)
    }
}

/// Builds the staircase matrix from a data vector and its noise blocks.
pub fn sc_gen(payload: &StaircasePayload, p: &SystemParams) -> Result<StaircaseMatrix> {
    payload.validate(p)?;
    let mut builder = StaircaseBuilder::new(p, &payload.data)?;
    for z in &payload.noise {
        builder.push(z)?;
    }
    builder.finish()
}

/// Entrywise sum of two staircase matrices.
pub fn sc_add(a: &StaircaseMatrix, b: &StaircaseMatrix) -> Result<StaircaseMatrix> {
    if a.blocks.len() != b.blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} blocks vs {}",
            a.blocks.len(),
            b.blocks.len()
        )));
    }
    let blocks = a
        .blocks
        .iter()
        .zip(&b.blocks)
        .map(|(x, y)| x.add(y))
        .collect::<Result<Vec<_>>>()?;
    let assembled = a.assembled.add(&b.assembled)?;
    Ok(StaircaseMatrix { blocks, assembled })
}

/// A 1-based `(block, row, column)` position inside a staircase matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReplicaCoord {
    pub source: Cell,
    pub target: Cell,
}

/// Where each entry of redundancy row `M_i(j, :)` is copied to.
///
/// Row `j = R_r + k` of block `i` lands in the data region of block `i + k`,
/// at flattened offset `lambda_{i-1} + c` of that block's `D` matrix.
pub fn replica_coords(i: usize, j: usize, p: &SystemParams) -> Result<Vec<ReplicaCoord>> {
    if i == 0 || i > p.g() {
        return Err(Error::IndexOutOfRange(format!("block {i} not in 1..={}", p.g())));
    }
    if j <= p.r_r() || j > p.beta(i) {
        return Err(Error::IndexOutOfRange(format!(
            "row {j} of block {i} not in {}..={}",
            p.r_r() + 1,
            p.beta(i)
        )));
    }
    let target_block = i + (j - p.r_r());
    let width = p.gamma(target_block);
    Ok((0..p.gamma(i))
        .map(|c| {
            let offset = p.lambda(i - 1) + c;
            ReplicaCoord {
                source: Cell {
                    block: i,
                    row: j,
                    col: c + 1,
                },
                target: Cell {
                    block: target_block,
                    row: offset / width + 1,
                    col: offset % width + 1,
                },
            }
        })
        .collect())
}
