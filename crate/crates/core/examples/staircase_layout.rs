// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Prints the staircase matrix with symbolic labels, so the replicated
//! redundancy rows are visible. Usage: `staircase_layout [N R_r K_c]`.

use num_rational::Ratio;
use rdcds::{sc_gen, FieldMatrix, StaircasePayload, SystemParams};

fn main() -> rdcds::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, r_r, k_c) = match args[..] {
        [n, r, k] => (n, r, k),
        _ => (4, 2, 1),
    };
    // A large prime keeps labels distinct: W_k -> k, Z_k -> 1000 + k.
    let p = SystemParams::new(n, r_r, Ratio::from_integer(k_c as u64), Some(1_000_003))?;
    let f = p.field();
    let mut next = 1000;
    let noise = (1..=p.g())
        .map(|i| {
            let vals = (0..p.noise_rows() * p.gamma(i))
                .map(|_| {
                    next += 1;
                    next
                })
                .collect();
            FieldMatrix::from_vec(f, p.noise_rows(), p.gamma(i), vals)
        })
        .collect::<rdcds::Result<Vec<_>>>()?;
    let payload = StaircasePayload {
        data: (1..=p.l() as u64).collect(),
        noise,
    };
    let m = sc_gen(&payload, &p)?;

    println!("N = {n}, R_r = {r_r}, K_c = {k_c}: gamma = {:?}, lambda = {:?}", p.gammas(), p.lambdas());
    let label = |v: u64| match v {
        0 => ".".to_string(),
        v if v > 1000 => format!("Z{}", v - 1000),
        v => format!("W{v}"),
    };
    for r in 0..p.n() {
        let mut line = String::new();
        let mut col = 0;
        for i in 1..=p.g() {
            line.push_str("| ");
            for _ in 0..p.gamma(i) {
                line.push_str(&format!("{:>4} ", label(m.assembled().get(r, col))));
                col += 1;
            }
        }
        println!("{line}|");
    }
    Ok(())
}
