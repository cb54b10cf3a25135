// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Snapshot a running system, restore it, and show that the next slot
//! produces the same report as the uninterrupted run.

use num_rational::Ratio;
use rdcds::{derive_params, Increment, SlotOp, SystemState, VerifyDepth};

fn main() -> rdcds::Result<()> {
    let p = derive_params(5, 3, Ratio::from_integer(1))?;
    let mut live = SystemState::new(p, None, 77)?;
    live.step(&SlotOp::update(&[1], 1, Increment::Random), VerifyDepth::Quick);
    live.step(&SlotOp::read(&[0, 4]), VerifyDepth::Quick);

    let bytes = live.to_bytes();
    println!("snapshot at slot {}: {} bytes, magic {:?}", live.slot(), bytes.len(), &bytes[..4]);
    let mut restored = SystemState::from_bytes(&bytes)?;

    let next = SlotOp::update(&[2], 0, Increment::Random);
    let a = serde_json::to_string(&live.step(&next, VerifyDepth::Full)).expect("serializable");
    let b = serde_json::to_string(&restored.step(&next, VerifyDepth::Full)).expect("serializable");
    println!("next-slot reports identical: {}", a == b);
    println!("{a}");
    Ok(())
}
