// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Tabulates optimal read and update costs against the number of
//! dropouts, for a fixed system and each security level.
//! Usage: `cost_frontier [N R_r K_c]`.

use num_rational::Ratio;
use rdcds::protocol::{read_cost, update_cost};
use rdcds::derive_params;

fn main() -> rdcds::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, r_r, k_c) = match args[..] {
        [n, r, k] => (n as usize, r as usize, k),
        _ => (10, 7, 3),
    };
    let p = derive_params(n, r_r, Ratio::from_integer(k_c))?;
    println!("N = {n}, R_r = {r_r}, K_c = {k_c}, L = {}", p.l());
    println!("{:>4}  {:>8}  update X = 0, 1, ...", "|D|", "read");
    for d in 0..n {
        let avail: Vec<usize> = (d..n).collect();
        let read = read_cost(&p, &avail).map(|c| c.normalized.to_string()).unwrap_or_else(|_| "-".into());
        let updates: Vec<String> = (0..=p.noise_rows())
            .map(|x| match update_cost(&p, &avail, x) {
                Ok(c) if c.exceeds_bound => format!("{}*", c.normalized),
                Ok(c) => c.normalized.to_string(),
                Err(_) => "-".into(),
            })
            .collect();
        println!("{d:>4}  {read:>8}  {}", updates.join("  "));
    }
    println!("(* = above the optimum: the update window collapsed to one block)");
    Ok(())
}
