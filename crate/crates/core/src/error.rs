// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("field modulus {0} is not a supported prime")]
    InvalidModulus(u64),
    #[error("matrix is singular (rank {rank} < {dim})")]
    Singular { rank: usize, dim: usize },
    #[error("evaluation points are not pairwise distinct: {0}")]
    DegeneratePoints(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("read infeasible: {available} servers available, read threshold is {threshold}")]
    ReadInfeasible { available: usize, threshold: usize },
    #[error("update infeasible: {0}")]
    UpdateInfeasible(String),
    #[error("download shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("coded increment of server {server} has nonzero symbol at column {col} beyond the upload prefix")]
    TailNotZero { server: usize, col: usize },
    #[error("packet of length {packet} exceeds storage row of length {storage}")]
    LengthExceeded { packet: usize, storage: usize },
    #[error("snapshot: {0}")]
    Snapshot(String),
}
