// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Encode a message, then read it back from every server subset the
//! scheme allows, downloading only the prefix each subset needs.

use itertools::Itertools;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdcds::protocol::{plan_read, read_cost, sic_decode, ReadDownload};
use rdcds::{derive_params, sc_gen, StaircasePayload};

fn main() -> rdcds::Result<()> {
    let p = derive_params(7, 4, Ratio::from_integer(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let payload = StaircasePayload::random(&p, &mut rng);
    let storage = p.cauchy().mul(sc_gen(&payload, &p)?.assembled())?;
    println!("N = 7, R_r = 4, K_c = 2: L = {}, {} symbols per server", p.l(), p.storage_len());

    for size in (p.r_r()..=p.n()).rev() {
        let mut decoded = 0;
        for avail in (0..p.n()).combinations(size) {
            let plan = plan_read(&p, &avail)?;
            let downloads = avail
                .iter()
                .map(|&s| ReadDownload::from_storage(&plan, s, storage.row(s)))
                .collect::<rdcds::Result<Vec<_>>>()?;
            assert_eq!(sic_decode(&downloads, &avail, &p)?, payload.data);
            decoded += 1;
        }
        let any: Vec<usize> = (0..size).collect();
        let plan = plan_read(&p, &any)?;
        let cost = read_cost(&p, &any)?;
        println!(
            "{size} servers up: J = {}, {} symbols each, cost {} = optimum {}, {decoded} subsets decoded",
            plan.j, plan.download_len, cost.normalized, cost.bound
        );
    }
    match plan_read(&p, &[0, 1, 2]) {
        Err(e) => println!("3 servers up: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
