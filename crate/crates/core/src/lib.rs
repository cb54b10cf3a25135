// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Robust dynamic coded distributed storage.
//!
//! A message of `L` symbols over a prime field is stored on `N` servers as
//! the rows of `C * M`, where `C` is a Cauchy matrix and `M` a staircase
//! matrix of message, noise and replicated redundancy. Any `R_r` servers
//! serve a read, each server holds `L / K_c` symbols, and updates stay
//! secure against `X` colluding servers while tolerating dropouts. Read and
//! update communication costs meet their optimal values exactly.
//!
//! Modules, bottom up: [`algebra`] (field and matrices), [`params`],
//! [`staircase`], [`protocol`] (read, update, costs), [`engine`] (multi-slot
//! state with a reference oracle) and [`scenario`] (JSON scenarios and
//! reports).

pub mod algebra;
pub mod engine;
pub mod error;
pub mod params;
pub mod protocol;
pub mod scenario;
pub mod staircase;

pub use algebra::{cauchy_matrix, EvalPoints, FieldElement, FieldMatrix, PrimeField};
pub use engine::{init_system, Increment, SlotKind, SlotOp, SlotReport, SystemState, Verdict, VerifyDepth};
pub use error::{Error, Result};
pub use params::{derive_params, SystemParams};
pub use staircase::{sc_gen, StaircaseMatrix, StaircasePayload};
