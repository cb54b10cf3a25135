// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! One X-secure update with dropouts, step by step: plan, null-space
//! blocks, packets, and the checks that the dropouts stay consistent,
//! colluding servers learn nothing, and enough servers pin the increment.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdcds::engine::{increment_violation, x_security_violation};
use rdcds::protocol::linear::IncrementMap;
use rdcds::protocol::{build_h_blocks, coded_increment, make_update_packets, plan_update, sample_secure_noise};
use rdcds::derive_params;

fn main() -> rdcds::Result<()> {
    let p = derive_params(8, 6, Ratio::from_integer(2))?;
    let (dropouts, x) = (vec![2, 6], 2);
    let plan = plan_update(&p, &dropouts, x)?;
    println!(
        "N = 8, R_r = 6, K_c = 2, dropouts {{3,7}}, X = 2: G_t = {}, {} symbols per packet",
        plan.g_t,
        plan.upload_len(&p)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let delta: Vec<u64> = (0..p.l()).map(|_| p.field().random(&mut rng)).collect();
    let zdd = sample_secure_noise(x, plan.g_t, &p, &mut rng);
    let built = build_h_blocks(&delta, &zdd, &plan, &p)?;
    for (i, h) in built.h_blocks.iter().enumerate() {
        println!("H_{} ({}x{}): {:?}", i + 1, h.rows(), h.cols(), h.as_slice());
    }

    let coded = coded_increment(&built.increment, &p)?;
    for &d in &dropouts {
        assert!(coded.row(d).iter().all(|&v| v == 0));
    }
    println!("dropout rows of the coded increment are zero");

    let packets = make_update_packets(&built.increment, &p, &plan)?;
    let total: usize = packets.iter().map(|pk| pk.symbols.len()).sum();
    println!("{} packets, {total} symbols, L = {}", packets.len(), p.l());

    let map = IncrementMap::build(&p, &plan)?;
    assert_eq!(x_security_violation(&p, &map)?, None);
    println!("every {x} available servers: packets independent of the increment");
    assert_eq!(increment_violation(&p, &map, &packets, &delta)?, None);
    println!("every {} available servers: increment recovered", p.r_r() - dropouts.len());
    Ok(())
}
