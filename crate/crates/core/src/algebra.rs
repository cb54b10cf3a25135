// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact arithmetic over a prime field GF(q) and the dense matrices built on it.
//!
//! Matrices store raw residues (`u64` in `[0, q)`) together with the field they
//! live in, so every entry of a matrix shares one modulus by construction.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};

/// Moduli are kept below 2^31 so that a product of two residues fits in a u64.
pub const MAX_MODULUS: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// The prime field GF(q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v % self.q
    }

    /// Maps a signed integer to its residue.
    pub fn from_i64(self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u64) -> Result<u64> {
        let a = a % self.q;
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.from_i64(t0))
    }

    pub fn elem(self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.q,
            field: self,
        }
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        rng.random_range(0..self.q)
    }
}

/// A single element of GF(q).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        fe_inv(self)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.q)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                assert_eq!(self.field, rhs.field, "field elements from different fields");
                FieldElement {
                    value: self.field.$method(self.value, rhs.value),
                    field: self.field,
                }
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }
}

/// Multiplicative inverse of a field element.
pub fn fe_inv(a: FieldElement) -> Result<FieldElement> {
    Ok(FieldElement {
        value: a.field.inv(a.value)?,
        field: a.field,
    })
}

/// Dense row-major matrix over GF(q).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FieldMatrix {}x{} over GF({}) [", self.rows, self.cols, self.field.q)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major values, reducing each one mod q.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let data = data.into_iter().map(|v| field.reduce(v)).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn elem(&self, r: usize, c: usize) -> FieldElement {
        self.field.elem(self.get(r, c))
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.field.reduce(v);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} over GF({}) vs {}x{} over GF({})",
                self.rows, self.cols, self.field.q, other.rows, other.cols, other.field.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(self.with_data(self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(self.with_data(self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect()))
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.neg(1))
    }

    pub fn scale(&self, k: u64) -> Self {
        let f = self.field;
        self.with_data(self.data.iter().map(|&a| f.mul(a, k)).collect())
    }

    fn with_data(&self, data: Vec<u64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field || self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let q = self.field.q;
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    *slot = (*slot + a * b) % q;
                }
            }
            out.row_mut(r).copy_from_slice(&acc);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Submatrix picking the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::IndexOutOfRange(format!("row {r} of {}", self.rows)));
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::IndexOutOfRange(format!("column {c} of {}", self.cols)));
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Self {
            field: self.field,
            rows: rows.len(),
            cols: cols.len(),
            data,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Result<Self> {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    /// Horizontal concatenation `[a, b, ...]`.
    pub fn hstack(field: PrimeField, rows: usize, parts: &[&Self]) -> Result<Self> {
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(field, rows, cols);
        let mut offset = 0;
        for p in parts {
            if p.rows != rows || p.field != field {
                return Err(Error::DimensionMismatch(format!(
                    "hstack part has {} rows, expected {rows}",
                    p.rows
                )));
            }
            for r in 0..rows {
                out.row_mut(r)[offset..offset + p.cols].copy_from_slice(p.row(r));
            }
            offset += p.cols;
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(field: PrimeField, cols: usize, parts: &[&Self]) -> Result<Self> {
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols || p.field != field {
                return Err(Error::DimensionMismatch(format!(
                    "vstack part has {} columns, expected {cols}",
                    p.cols
                )));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Reduces in place to reduced row echelon form and returns the pivot columns.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(found) = (pivot_row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if found != pivot_row {
                for c in 0..self.cols {
                    self.data.swap(found * self.cols + c, pivot_row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(pivot_row, col)).expect("pivot is nonzero");
            for v in self.row_mut(pivot_row) {
                *v = f.mul(*v, inv);
            }
            let pivot: Vec<u64> = self.row(pivot_row).to_vec();
            for r in 0..self.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for (v, &p) in self.row_mut(r).iter_mut().zip(&pivot) {
                    *v = f.sub(*v, f.mul(factor, p));
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        mat_rank(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        mat_inverse(self)
    }

    /// Solves `self * x = rhs` for one particular solution, or `None` when the
    /// system is inconsistent. Free variables are set to zero.
    pub fn solve(&self, rhs: &Self) -> Result<Option<Self>> {
        if rhs.rows != self.rows || rhs.field != self.field {
            return Err(Error::DimensionMismatch(format!(
                "system has {} equations, right-hand side has {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut aug = Self::hstack(self.field, self.rows, &[self, rhs])?;
        let pivots = aug.rref_in_place();
        if pivots.iter().any(|&c| c >= self.cols) {
            return Ok(None);
        }
        let mut x = Self::zeros(self.field, self.cols, rhs.cols);
        for (r, &c) in pivots.iter().enumerate() {
            x.row_mut(c).copy_from_slice(&aug.row(r)[self.cols..]);
        }
        Ok(Some(x))
    }
}

/// Rank over GF(q) by exact elimination.
pub fn mat_rank(m: &FieldMatrix) -> usize {
    m.clone().rref_in_place().len()
}

/// Inverse by Gauss-Jordan elimination on `[m | I]`.
pub fn mat_inverse(m: &FieldMatrix) -> Result<FieldMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let id = FieldMatrix::identity(m.field, n);
    let mut aug = FieldMatrix::hstack(m.field, n, &[m, &id])?;
    let pivots = aug.rref_in_place();
    let rank = pivots.iter().take_while(|&&c| c < n).count();
    if rank < n {
        return Err(Error::Singular { rank, dim: n });
    }
    let cols: Vec<usize> = (n..2 * n).collect();
    aug.select_cols(&cols)
}

/// The `2N` evaluation points `x_1..x_N, f_1..f_N` of a Cauchy matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPoints {
    field: PrimeField,
    xs: Vec<u64>,
    fs: Vec<u64>,
}

impl EvalPoints {
    pub fn new(field: PrimeField, xs: Vec<u64>, fs: Vec<u64>) -> Result<Self> {
        if xs.len() != fs.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: fs.len(),
            });
        }
        let xs: Vec<u64> = xs.into_iter().map(|v| field.reduce(v)).collect();
        let fs: Vec<u64> = fs.into_iter().map(|v| field.reduce(v)).collect();
        let mut all: Vec<u64> = xs.iter().chain(&fs).copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DegeneratePoints(format!(
                "value {} appears more than once in GF({})",
                w[0],
                field.modulus()
            )));
        }
        Ok(Self { field, xs, fs })
    }

    /// `x_n = n`, `f_n = N + n` for `n = 1..N`.
    pub fn canonical(field: PrimeField, n: usize) -> Result<Self> {
        let n = n as u64;
        Self::new(field, (1..=n).collect(), (n + 1..=2 * n).collect())
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[u64] {
        &self.xs
    }

    pub fn fs(&self) -> &[u64] {
        &self.fs
    }
}

/// The `N x N` matrix with entry `(i, j) = (x_i - f_j)^{-1}`.
pub fn cauchy_matrix(pts: &EvalPoints) -> Result<FieldMatrix> {
    let f = pts.field;
    let n = pts.len();
    let mut m = FieldMatrix::zeros(f, n, n);
    for (i, &x) in pts.xs.iter().enumerate() {
        for (j, &y) in pts.fs.iter().enumerate() {
            let d = f.sub(x, y);
            let inv = f.inv(d).map_err(|_| {
                Error::DegeneratePoints(format!("x_{} = f_{} = {x}", i + 1, j + 1))
            })?;
            m.set(i, j, inv);
        }
    }
    Ok(m)
}
