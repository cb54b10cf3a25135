// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Scheme constants derived from `(N, R_r, K_c)`.
//!
//! Block indices `i` in the accessors below are 1-based (`1..=G`), matching
//! the way the staircase blocks are usually written; `lambda(0)` is zero.

use num_rational::Ratio;

use crate::algebra::{cauchy_matrix, next_prime, EvalPoints, FieldMatrix, PrimeField};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    n: usize,
    r_r: usize,
    k_c_raw: Ratio<u64>,
    k_c: usize,
    g: usize,
    alpha: Vec<usize>,
    beta: Vec<usize>,
    gamma: Vec<usize>,
    lambda: Vec<usize>,
    l: usize,
    field: PrimeField,
    pts: EvalPoints,
    cauchy: FieldMatrix,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Derives every scheme constant, using the smallest prime `q >= 2N` and the
/// canonical evaluation points.
pub fn derive_params(n: usize, r_r: usize, k_c_raw: Ratio<u64>) -> Result<SystemParams> {
    SystemParams::new(n, r_r, k_c_raw, None)
}

impl SystemParams {
    /// `modulus` overrides the default field size; it must be a prime large
    /// enough to hold the `2N` canonical points `1..=2N`.
    pub fn new(n: usize, r_r: usize, k_c_raw: Ratio<u64>, modulus: Option<u64>) -> Result<Self> {
        if *k_c_raw.numer() == 0 {
            return Err(Error::InvalidParams("K_c must be positive".into()));
        }
        if r_r == 0 {
            return Err(Error::InvalidParams("R_r must be positive".into()));
        }
        if r_r > n {
            return Err(Error::InvalidParams(format!("R_r exceeds N ({r_r} > {n})")));
        }
        let k_c = k_c_raw.ceil().to_integer() as usize;
        if k_c_raw > Ratio::from_integer(r_r as u64) {
            return Err(Error::InvalidParams(format!("K_c exceeds R_r ({k_c_raw} > {r_r})")));
        }

        let g = n - r_r + 1;
        let alpha: Vec<usize> = (1..=g).map(|i| n - r_r + k_c + 1 - i).collect();
        let beta: Vec<usize> = (1..=g).map(|i| n + 1 - i).collect();
        let l = alpha.iter().copied().fold(1, lcm);
        let gamma: Vec<usize> = (0..g)
            .map(|i| if i == 0 { l / alpha[0] } else { l / (alpha[i - 1] * alpha[i]) })
            .collect();
        let lambda: Vec<usize> = std::iter::once(0).chain(alpha.iter().map(|a| l / a)).collect();

        let q = modulus.unwrap_or_else(|| next_prime(2 * n as u64));
        let field = PrimeField::new(q)?;
        let pts = EvalPoints::canonical(field, n)?;
        let cauchy = cauchy_matrix(&pts)?;

        Ok(Self {
            n,
            r_r,
            k_c_raw,
            k_c,
            g,
            alpha,
            beta,
            gamma,
            lambda,
            l,
            field,
            pts,
            cauchy,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_r(&self) -> usize {
        self.r_r
    }

    /// The storage factor as supplied, before rounding up.
    pub fn k_c_raw(&self) -> Ratio<u64> {
        self.k_c_raw
    }

    /// `ceil(K_c)`; the scheme is always built for this integer.
    pub fn k_c(&self) -> usize {
        self.k_c
    }

    /// Number of staircase blocks.
    pub fn g(&self) -> usize {
        self.g
    }

    /// Message length.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Noise rows per block, `R_r - K_c`.
    pub fn noise_rows(&self) -> usize {
        self.r_r - self.k_c
    }

    pub fn alpha(&self, i: usize) -> usize {
        self.alpha[i - 1]
    }

    pub fn beta(&self, i: usize) -> usize {
        self.beta[i - 1]
    }

    pub fn gamma(&self, i: usize) -> usize {
        self.gamma[i - 1]
    }

    pub fn lambda(&self, i: usize) -> usize {
        self.lambda[i]
    }

    pub fn alphas(&self) -> &[usize] {
        &self.alpha
    }

    pub fn betas(&self) -> &[usize] {
        &self.beta
    }

    pub fn gammas(&self) -> &[usize] {
        &self.gamma
    }

    /// `lambda_0..=lambda_G`.
    pub fn lambdas(&self) -> &[usize] {
        &self.lambda
    }

    /// Symbols held by each server, `lambda_G = L / K_c`.
    pub fn storage_len(&self) -> usize {
        self.lambda[self.g]
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn points(&self) -> &EvalPoints {
        &self.pts
    }

    /// The `N x N` encoding matrix built from the evaluation points.
    pub fn cauchy(&self) -> &FieldMatrix {
        &self.cauchy
    }

    /// Minimum number of servers a read needs.
    pub fn read_threshold(&self) -> usize {
        self.r_r
    }

    /// Minimum number of available servers for an `x`-secure update,
    /// `N - R_r + K_c + X`.
    pub fn update_threshold(&self, x: usize) -> usize {
        self.n - self.r_r + self.k_c + x
    }
}

pub fn read_threshold(p: &SystemParams) -> usize {
    p.read_threshold()
}

pub fn update_threshold(p: &SystemParams, x: usize) -> usize {
    p.update_threshold(x)
}
