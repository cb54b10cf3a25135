// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical binary snapshot of a [`SystemState`].
//!
//! Little-endian layout:
//!
//! ```text
//! "RDCD" | version u16 | q u64 | N u32 | R_r u32 | K_c u32
//!        | K_c_raw numerator u64 | K_c_raw denominator u64 | L u64
//!        | seed u64 | slot u64
//!        | server rows, N x lambda_G u64, row-major
//!        | reference message, L u64
//!        | reference noise blocks 1..G, each (R_r - K_c) x gamma_i u64, row-major
//! ```
//!
//! Tracked history is deliberately not part of the snapshot.

use num_rational::Ratio;

use crate::algebra::FieldMatrix;
use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::{ServerState, SystemState};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"RDCD";
pub const SNAPSHOT_VERSION: u16 = 1;

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        if self.buf.len() < K {
            return Err(Error::Snapshot("truncated snapshot".into()));
        }
        let (head, rest) = self.buf.split_at(K);
        self.buf = rest;
        Ok(head.try_into().expect("length checked"))
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn symbols(&mut self, count: usize, q: u64) -> Result<Vec<u64>> {
        (0..count)
            .map(|_| {
                let v = self.u64()?;
                if v >= q {
                    return Err(Error::Snapshot(format!("symbol {v} outside GF({q})")));
                }
                Ok(v)
            })
            .collect()
    }
}

impl SystemState {
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::new();
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&p.modulus().to_le_bytes());
        for v in [p.n(), p.r_r(), p.k_c()] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        let raw = p.k_c_raw();
        for v in [*raw.numer(), *raw.denom(), p.l() as u64, self.seed, self.slot] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let symbols = self
            .servers
            .iter()
            .flat_map(|s| s.storage.iter())
            .chain(&self.ref_message)
            .chain(self.ref_noise.iter().flat_map(|z| z.as_slice()));
        for v in symbols {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes };
        if &r.take::<4>()? != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = r.u16()?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let q = r.u64()?;
        let (n, r_r, k_c) = (r.u32()?, r.u32()?, r.u32()?);
        let (num, den) = (r.u64()?, r.u64()?);
        if den == 0 {
            return Err(Error::Snapshot("zero K_c denominator".into()));
        }
        let l = r.u64()? as usize;
        let params = SystemParams::new(n, r_r, Ratio::new(num, den), Some(q))?;
        if params.k_c() != k_c || params.l() != l {
            return Err(Error::Snapshot("derived K_c or L disagrees with the header".into()));
        }
        let (seed, slot) = (r.u64()?, r.u64()?);

        let servers = (0..n)
            .map(|_| {
                Ok(ServerState {
                    storage: r.symbols(params.storage_len(), q)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ref_message = r.symbols(l, q)?;
        let ref_noise = (1..=params.g())
            .map(|i| {
                let (rows, cols) = (params.noise_rows(), params.gamma(i));
                FieldMatrix::from_vec(params.field(), rows, cols, r.symbols(rows * cols, q)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if !r.buf.is_empty() {
            return Err(Error::Snapshot(format!("{} trailing bytes", r.buf.len())));
        }

        let mut state = SystemState::from_reference(params, ref_message, ref_noise, seed, slot)?;
        state.servers = servers;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use crate::engine::{init_system, Increment, SlotOp, SystemState, VerifyDepth};
    use crate::error::Error;
    use crate::params::derive_params;
    use num_rational::Ratio;

    #[test]
    fn round_trip() {
        let p = derive_params(6, 4, Ratio::new(5, 2)).unwrap();
        let mut s = init_system(&p, None, 4).unwrap();
        s.step(&SlotOp::update(&[0], 0, Increment::Random), VerifyDepth::Off);
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"RDCD");
        let t = SystemState::from_bytes(&bytes).unwrap();
        assert_eq!(t.to_bytes(), bytes);
        assert_eq!(t.servers(), s.servers());
        assert_eq!(t.slot(), 1);
        assert_eq!(t.params().k_c_raw(), Ratio::new(5, 2));
    }

    #[test]
    fn keeps_stored_rows_verbatim() {
        let p = derive_params(4, 2, Ratio::from_integer(1)).unwrap();
        let mut s = init_system(&p, None, 4).unwrap();
        s.server_mut(1).storage[0] = (s.servers()[1].storage[0] + 1) % p.modulus();
        let t = SystemState::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(t.servers(), s.servers());
    }

    #[test]
    fn rejects_damage() {
        let p = derive_params(4, 2, Ratio::from_integer(1)).unwrap();
        let bytes = init_system(&p, None, 4).unwrap().to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(SystemState::from_bytes(&bad), Err(Error::Snapshot(_))));
        assert!(matches!(SystemState::from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Snapshot(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(SystemState::from_bytes(&long), Err(Error::Snapshot(_))));
        let mut version = bytes;
        version[4] = 9;
        assert!(matches!(SystemState::from_bytes(&version), Err(Error::Snapshot(_))));
    }
}
