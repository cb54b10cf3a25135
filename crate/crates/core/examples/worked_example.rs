// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! The (N, R_r, K_c) = (6, 4, 2) system over GF(13): two reads and two
//! updates with dropouts, each at its optimal communication cost.

use num_rational::Ratio;
use rdcds::{Increment, SlotOp, SystemParams, SystemState, VerifyDepth};

fn main() -> rdcds::Result<()> {
    let p = SystemParams::new(6, 4, Ratio::from_integer(2), Some(13))?;
    println!(
        "L = {}, G = {}, alpha = {:?}, gamma = {:?}, lambda = {:?}",
        p.l(),
        p.g(),
        p.alphas(),
        p.gammas(),
        p.lambdas()
    );
    let mut state = SystemState::new(p, None, 2024)?;
    println!("W = {:?}", state.ref_message());

    let ops = [
        ("read, server 6 down", SlotOp::read(&[5])),
        ("read, servers 3 and 6 down", SlotOp::read(&[2, 5])),
        ("update, server 5 down, X = 0", SlotOp::update(&[4], 0, Increment::Random)),
        ("update, server 5 down, X = 1", SlotOp::update(&[4], 1, Increment::Random)),
    ];
    for (label, op) in ops {
        let r = state.step(&op, VerifyDepth::Full);
        let cost = r.cost.as_ref().expect("feasible");
        println!(
            "{label:<30} {} symbols, cost {} (optimum {}), checks {}",
            cost.symbols,
            cost.normalized,
            cost.bound,
            if r.all_passed() { "pass" } else { "FAIL" }
        );
        if let Some(w) = r.recovered_message {
            println!("{:<30} decoded {w:?}", "");
        }
    }
    println!("W after updates = {:?}", state.ref_message());
    Ok(())
}
