// Copyright (c) The rdcds Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs every criterion in order and prints one
//! `PASS`/`FAIL` line each; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdcds::engine::{increment_violation, x_security_violation};
use rdcds::protocol::linear::IncrementMap;
use rdcds::protocol::{
    build_h_blocks, coded_increment, complement, make_update_packets, plan_read, plan_update, read_bound,
    read_cost, sample_secure_noise, sic_decode, update_bound, update_cost, ReadDownload, UpdatePlan,
};
use rdcds::scenario::parse_scenario;
use rdcds::staircase::{replica_coords, sc_add, sc_gen, Cell, StaircasePayload};
use rdcds::{derive_params, Error, FieldMatrix, Increment, SlotOp, SystemParams, SystemState, VerifyDepth};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn int(k: usize) -> Ratio<u64> {
    Ratio::from_integer(k as u64)
}

/// Every `(N, R_r, K_c)` with `1 <= K_c <= R_r <= N <= max_n`.
fn param_grid(max_n: usize) -> impl Iterator<Item = SystemParams> {
    (1..=max_n).flat_map(|n| {
        (1..=n).flat_map(move |r| (1..=r).map(move |k| derive_params(n, r, int(k)).expect("valid grid point")))
    })
}

/// Every feasible `(D, X)` for `p`: `|D| <= R_r - K_c - X`.
fn feasible_updates(p: &SystemParams) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for x in 0..=p.noise_rows() {
        for size in 0..=p.noise_rows() - x {
            for d in (0..p.n()).combinations(size) {
                out.push((d, x));
            }
        }
    }
    out
}

fn random_vec(p: &SystemParams, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..p.l()).map(|_| p.field().random(rng)).collect()
}

fn encode(p: &SystemParams, payload: &StaircasePayload) -> FieldMatrix {
    p.cauchy().mul(sc_gen(payload, p).unwrap().assembled()).unwrap()
}

fn decode(p: &SystemParams, storage: &FieldMatrix, available: &[usize]) -> rdcds::Result<(Vec<u64>, usize)> {
    let plan = plan_read(p, available)?;
    let downloads = plan
        .available
        .iter()
        .map(|&s| ReadDownload::from_storage(&plan, s, storage.row(s)))
        .collect::<rdcds::Result<Vec<_>>>()?;
    let symbols = downloads.iter().map(|d| d.symbols.len()).sum();
    Ok((sic_decode(&downloads, &plan.available, p)?, symbols))
}

struct Built {
    plan: UpdatePlan,
    delta: Vec<u64>,
    uploaded: usize,
    coded: FieldMatrix,
    packets: Vec<rdcds::protocol::UpdatePacket>,
}

fn run_update(p: &SystemParams, d: &[usize], x: usize, rng: &mut ChaCha8Rng) -> rdcds::Result<Built> {
    let plan = plan_update(p, d, x)?;
    let delta = random_vec(p, rng);
    let zdd = sample_secure_noise(x, plan.g_t, p, rng);
    let built = build_h_blocks(&delta, &zdd, &plan, p)?;
    let packets = make_update_packets(&built.increment, p, &plan)?;
    Ok(Built {
        uploaded: packets.iter().map(|pk| pk.symbols.len()).sum(),
        coded: coded_increment(&built.increment, p)?,
        plan,
        delta,
        packets,
    })
}

fn criterion_1() -> Outcome {
    let p = SystemParams::new(6, 4, int(2), Some(13)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let payload = StaircasePayload::random(&p, &mut rng);
    let storage = encode(&p, &payload);

    let (w, sym) = decode(&p, &storage, &[0, 1, 2, 3, 4]).map_err(|e| e.to_string())?;
    ensure!(w == payload.data, "read D={{6}} did not recover W");
    ensure!(Ratio::new(sym as u64, 12) == Ratio::new(5, 3), "read D={{6}} cost {sym}/12");
    ensure!(read_cost(&p, &[0, 1, 2, 3, 4]).unwrap().bound == Ratio::new(5, 3), "bound D={{6}}");

    let (w, sym) = decode(&p, &storage, &[0, 1, 3, 4]).map_err(|e| e.to_string())?;
    ensure!(w == payload.data, "read D={{3,6}} did not recover W");
    ensure!(Ratio::new(sym as u64, 12) == Ratio::from_integer(2), "read D={{3,6}} cost {sym}/12");

    for (x, expected, g_t) in [(0, Ratio::new(5, 3), 2), (1, Ratio::new(5, 2), 3)] {
        let b = run_update(&p, &[4], x, &mut rng).map_err(|e| e.to_string())?;
        ensure!(b.plan.g_t == g_t, "X={x}: G_t = {}", b.plan.g_t);
        ensure!(Ratio::new(b.uploaded as u64, 12) == expected, "X={x}: cost {}/12", b.uploaded);
        ensure!(update_bound(&p, 1, x) == expected, "X={x}: bound");
    }
    Ok("costs 5/3, 2, 5/3, 5/2".into())
}

fn criterion_2_and_4() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut reads, mut updates, mut clamped, mut nulls) = (0usize, 0usize, 0usize, 0usize);
    let mut cost_err = None;
    let mut null_err = None;
    'sweep: for p in param_grid(10) {
        let payload = StaircasePayload::random(&p, &mut rng);
        let storage = encode(&p, &payload);
        for size in 0..=p.n() - p.r_r() {
            for d in (0..p.n()).combinations(size) {
                let avail = complement(&p, &d);
                let (w, sym) = match decode(&p, &storage, &avail) {
                    Ok(v) => v,
                    Err(e) => {
                        cost_err = Some(format!("{p:?}: read D={d:?}: {e}"));
                        break 'sweep;
                    }
                };
                let measured = Ratio::new(sym as u64, p.l() as u64);
                if w != payload.data || measured != read_bound(&p, d.len()) {
                    cost_err = Some(format!(
                        "({},{},{}) read D={d:?}: cost {measured}",
                        p.n(),
                        p.r_r(),
                        p.k_c()
                    ));
                    break 'sweep;
                }
                reads += 1;
            }
        }
        for (d, x) in feasible_updates(&p) {
            let b = match run_update(&p, &d, x, &mut rng) {
                Ok(b) => b,
                Err(e) => {
                    cost_err = Some(format!("({},{},{}) update D={d:?} X={x}: {e}", p.n(), p.r_r(), p.k_c()));
                    break 'sweep;
                }
            };
            if p.n() <= 8 {
                for &n in &d {
                    if b.coded.row(n).iter().any(|&v| v != 0) {
                        null_err.get_or_insert(format!(
                            "({},{},{}) D={d:?} X={x}: row {n} nonzero",
                            p.n(),
                            p.r_r(),
                            p.k_c()
                        ));
                    }
                }
                nulls += 1;
            }
            if b.plan.clamped {
                clamped += 1;
                continue;
            }
            let measured = Ratio::new(b.uploaded as u64, p.l() as u64);
            let bound = update_bound(&p, d.len(), x);
            let report = update_cost(&p, &b.plan.available, x).unwrap();
            if measured != bound || report.normalized != measured {
                cost_err = Some(format!(
                    "({},{},{}) update D={d:?} X={x}: cost {measured} bound {bound}",
                    p.n(),
                    p.r_r(),
                    p.k_c()
                ));
                break 'sweep;
            }
            updates += 1;
        }
    }
    let c2 = match cost_err {
        Some(e) => Err(e),
        None => Ok(format!(
            "{reads} reads and {updates} updates at the optimum ({clamped} clamped updates excluded)"
        )),
    };
    let c4 = match null_err {
        Some(e) => Err(e),
        None => Ok(format!("{nulls} updates with N <= 8, every dropout row of C*Mdot is zero")),
    };
    (c2, c4)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut count = 0;
    for p in param_grid(8) {
        let payload = StaircasePayload::random(&p, &mut rng);
        let storage = encode(&p, &payload);
        for size in p.r_r()..=p.n() {
            for avail in (0..p.n()).combinations(size) {
                let (w, _) = decode(&p, &storage, &avail).map_err(|e| e.to_string())?;
                ensure!(w == payload.data, "({},{},{}) avail {avail:?}", p.n(), p.r_r(), p.k_c());
                count += 1;
            }
        }
        ensure!(
            matches!(plan_read(&p, &(0..p.r_r() - 1).collect::<Vec<_>>()), Err(Error::ReadInfeasible { .. })),
            "read below threshold accepted"
        );
    }
    Ok(format!("{count} available sets decoded exactly"))
}

fn criterion_5_and_7() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut secure, mut determined) = (0usize, 0usize);
    let mut sec_err = None;
    let mut det_err = None;
    for p in param_grid(6) {
        for (d, x) in feasible_updates(&p) {
            let b = match run_update(&p, &d, x, &mut rng) {
                Ok(b) => b,
                Err(e) => return (Err(e.to_string()), Err(e.to_string())),
            };
            let map = IncrementMap::build(&p, &b.plan).expect("map");
            let tag = format!("({},{},{}) D={d:?} X={x}", p.n(), p.r_r(), p.k_c());
            match x_security_violation(&p, &map) {
                Ok(None) => secure += 1,
                Ok(Some(why)) => {
                    sec_err.get_or_insert(format!("{tag}: {why}"));
                }
                Err(e) => {
                    sec_err.get_or_insert(format!("{tag}: {e}"));
                }
            }
            match increment_violation(&p, &map, &b.packets, &b.delta) {
                Ok(None) => determined += 1,
                Ok(Some(why)) => {
                    det_err.get_or_insert(format!("{tag}: {why}"));
                }
                Err(e) => {
                    det_err.get_or_insert(format!("{tag}: {e}"));
                }
            }
        }
    }
    (
        sec_err.map_or_else(|| Ok(format!("{secure} updates, every X-subset secure")), Err),
        det_err.map_or_else(|| Ok(format!("{determined} updates, Delta recovered from every (R_r-|D|)-subset")), Err),
    )
}

fn criterion_6() -> Outcome {
    ensure!(
        matches!(SystemParams::new(3, 2, int(1), Some(5)), Err(Error::DegeneratePoints(_))),
        "GF(5) accepted 6 evaluation points"
    );
    let p = SystemParams::new(3, 2, int(1), Some(7)).map_err(|e| e.to_string())?;
    let q = p.modulus();
    let plan = plan_update(&p, &[], 1).map_err(|e| e.to_string())?;
    let noise_vars: usize = (1..=plan.g_t).map(|i| p.gamma(i)).sum();
    let all = |len: usize| (0..len).map(|_| 0..q).multi_cartesian_product().collect::<Vec<Vec<u64>>>();
    let deltas = all(p.l());
    let noises = all(noise_vars);

    let mut reference: Vec<Option<BTreeMap<Vec<u64>, usize>>> = vec![None; p.n()];
    for delta in &deltas {
        let mut hist: Vec<BTreeMap<Vec<u64>, usize>> = vec![BTreeMap::new(); p.n()];
        for z in &noises {
            let zdd = rdcds::protocol::linear::noise_from_vec(&p, 1, plan.g_t, z).unwrap();
            let built = build_h_blocks(delta, &zdd, &plan, &p).unwrap();
            for pk in make_update_packets(&built.increment, &p, &plan).unwrap() {
                *hist[pk.server].entry(pk.symbols).or_default() += 1;
            }
        }
        for (n, h) in hist.into_iter().enumerate() {
            match &reference[n] {
                None => reference[n] = Some(h),
                Some(r) => ensure!(*r == h, "server {} packet distribution depends on Delta = {delta:?}", n + 1),
            }
        }
    }
    Ok(format!(
        "q=5 rejected; at q=7, {} increments x {} noise draws give identical packet multisets",
        deltas.len(),
        noises.len()
    ))
}

fn criterion_8() -> Outcome {
    let scenario = parse_scenario(include_str!("../scenarios/mixed_twenty_slots.json")).map_err(|e| e.to_string())?;
    ensure!(scenario.ops.len() == 20, "scenario has {} ops", scenario.ops.len());
    let p = scenario.params().map_err(|e| e.to_string())?;
    let mut state = SystemState::new(p, None, scenario.seed).map_err(|e| e.to_string())?;
    state.enable_history().map_err(|e| e.to_string())?;
    let mut updates = 0;
    for op in &scenario.ops {
        let r = state.step(&op.op, VerifyDepth::Full);
        ensure!(r.feasible != op.expected_infeasible, "slot {} feasibility", r.slot + 1);
        ensure!(r.all_passed(), "slot {}: {:?}", r.slot + 1, r.verification);
        let steady = r.verification.iter().find(|v| v.name == "steady_state_security");
        ensure!(steady.is_some_and(|v| v.passed), "slot {}: steady state", r.slot + 1);
        updates += usize::from(r.feasible && r.kind == "update");
    }
    let h = state.history().expect("history enabled");
    Ok(format!(
        "{updates} updates, map over {} message and {} noise inputs, all 2-subsets contained",
        h.message().cols(),
        h.noise().cols()
    ))
}

fn random_op(p: &SystemParams, rng: &mut ChaCha8Rng) -> SlotOp {
    let size = rng.random_range(0..=p.n() - p.r_r() + 1);
    let mut d: Vec<usize> = (0..p.n()).collect();
    for i in 0..size {
        let j = rng.random_range(i..p.n());
        d.swap(i, j);
    }
    d.truncate(size);
    if rng.random_bool(0.4) {
        SlotOp::read(&d)
    } else {
        SlotOp::update(&d, rng.random_range(0..=p.noise_rows()), Increment::Random)
    }
}

fn criterion_9() -> Outcome {
    let grid = [(6, 4, 2), (4, 2, 1), (5, 3, 1), (6, 3, 2), (5, 4, 2)];
    for seed in 0..10u64 {
        let (n, r, k) = grid[seed as usize % grid.len()];
        let p = derive_params(n, r, int(k)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let ops: Vec<SlotOp> = (0..8).map(|_| random_op(&p, &mut rng)).collect();
        let k_split = rng.random_range(0..ops.len() - 1);

        let mut live = SystemState::new(p.clone(), None, seed).unwrap();
        let mut snapshot = None;
        let mut live_next = None;
        for (i, op) in ops.iter().enumerate() {
            let r = live.step(op, VerifyDepth::Full);
            if i == k_split {
                snapshot = Some(live.to_bytes());
            }
            if i == k_split + 1 {
                live_next = Some(serde_json::to_vec(&r).unwrap());
            }
        }
        let mut reloaded = SystemState::from_bytes(&snapshot.unwrap()).map_err(|e| e.to_string())?;
        let r = reloaded.step(&ops[k_split + 1], VerifyDepth::Full);
        ensure!(
            serde_json::to_vec(&r).unwrap() == live_next.unwrap(),
            "seed {seed}: report after reload differs at slot {}",
            k_split + 2
        );
    }
    Ok("10 scenarios, reports byte-identical after reload".into())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checks = 0usize;
    for p in param_grid(8) {
        let tag = format!("({},{},{})", p.n(), p.r_r(), p.k_c());
        let payload = StaircasePayload::random(&p, &mut rng);
        let m = sc_gen(&payload, &p).unwrap();

        // Replication: every redundancy row is copied exactly once, and the
        // copies tile the data region of blocks 2..G.
        let mut hits: BTreeMap<Cell, usize> = BTreeMap::new();
        for i in 1..=p.g() {
            for j in p.r_r() + 1..=p.beta(i) {
                for c in replica_coords(i, j, &p).unwrap() {
                    ensure!(m.at(c.source) == m.at(c.target), "{tag}: replica of {:?}", c.source);
                    *hits.entry(c.target).or_default() += 1;
                }
            }
        }
        let data_cells: usize = (2..=p.g()).map(|i| p.alpha(i) * p.gamma(i)).sum();
        ensure!(hits.len() == data_cells && hits.values().all(|&h| h == 1), "{tag}: replica tiling");

        // Tail vanishing: with noise confined to the top R_r-K_c-G+i rows of
        // blocks 1..i, columns past lambda_i are zero.
        let lo = (p.g() + p.k_c()).saturating_sub(p.r_r()).max(1);
        for i in lo..=p.g() {
            let keep = p.noise_rows() + i - p.g();
            let mut shaped = StaircasePayload::random(&p, &mut rng);
            for (b, z) in shaped.noise.iter_mut().enumerate() {
                for r in 0..p.noise_rows() {
                    if b + 1 > i || r >= keep {
                        z.row_mut(r).iter_mut().for_each(|v| *v = 0);
                    }
                }
            }
            let ms = sc_gen(&shaped, &p).unwrap();
            let tail_zero = (0..p.n()).all(|r| ms.assembled().row(r)[p.lambda(i)..].iter().all(|&v| v == 0));
            ensure!(tail_zero, "{tag}: tail past lambda_{i} not zero");
            checks += 1;
        }

        // Additivity of the generator, and of an update.
        let other = StaircasePayload::random(&p, &mut rng);
        let sum = sc_add(&m, &sc_gen(&other, &p).unwrap()).unwrap();
        ensure!(sum == sc_gen(&payload.add(&other).unwrap(), &p).unwrap(), "{tag}: additivity");
        for (d, x) in feasible_updates(&p).into_iter().take(6) {
            let plan = plan_update(&p, &d, x).unwrap();
            let delta = random_vec(&p, &mut rng);
            let zdd = sample_secure_noise(x, plan.g_t, &p, &mut rng);
            let built = build_h_blocks(&delta, &zdd, &plan, &p).unwrap();
            let coded = coded_increment(&built.increment, &p).unwrap();
            let tail_zero = (0..p.n()).all(|r| coded.row(r)[p.lambda(plan.g_t)..].iter().all(|&v| v == 0));
            ensure!(tail_zero, "{tag}: update D={d:?} X={x} tail");
            let next = StaircasePayload {
                data: payload.data.iter().zip(&delta).map(|(&a, &b)| p.field().add(a, b)).collect(),
                noise: payload
                    .noise
                    .iter()
                    .zip(&built.noise_blocks)
                    .map(|(a, b)| a.add(b).unwrap())
                    .collect(),
            };
            ensure!(
                sc_add(&m, &built.increment).unwrap() == sc_gen(&next, &p).unwrap(),
                "{tag}: M + Mdot != sc_gen(W + Delta, Z + Zdot) for D={d:?} X={x}"
            );
            checks += 1;
        }
        checks += 2;
    }
    Ok(format!("{checks} replication, tail and additivity checks"))
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit: Duration,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration) -> bool {
    let outcome = match outcome {
        Ok(msg) if elapsed > c.limit => Err(format!("{msg}, but took {elapsed:.2?} (limit {:?})", c.limit)),
        other => other,
    };
    let (tag, msg) = match &outcome {
        Ok(m) => ("PASS", m),
        Err(m) => ("FAIL", m),
    };
    println!("criterion {:>2} {tag} [{elapsed:>9.2?}] {}: {msg}", c.id, c.title);
    outcome.is_ok()
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    let secs = Duration::from_secs;
    let c = |id, title, limit| Criterion { id, title, limit };
    let mut ok = true;

    let t = Instant::now();
    let r = guarded(criterion_1);
    ok &= report(&c("1", "worked example costs", secs(1)), r, t.elapsed());

    let t = Instant::now();
    let (r2, r4) = catch_unwind(criterion_2_and_4).unwrap_or_else(|_| {
        let e = Err("panicked".to_string());
        (e.clone(), e)
    });
    let e = t.elapsed();
    ok &= report(&c("2", "cost optimality, N <= 10", secs(60)), r2, e);

    let t = Instant::now();
    let r = guarded(criterion_3);
    ok &= report(&c("3", "recoverability, N <= 8", secs(60)), r, t.elapsed());

    ok &= report(&c("4", "null property, N <= 8", secs(60)), r4, e);

    let t = Instant::now();
    let (r5, r7) = catch_unwind(criterion_5_and_7).unwrap_or_else(|_| {
        let e = Err("panicked".to_string());
        (e.clone(), e)
    });
    let e = t.elapsed();
    ok &= report(&c("5", "X-security rank containment, N <= 6", secs(60)), r5, e);

    let t = Instant::now();
    let r = guarded(criterion_6);
    ok &= report(&c("6", "brute-force independence (3,2,1)", secs(30)), r, t.elapsed());

    ok &= report(&c("7", "increment determined by R_r-|D| servers, N <= 6", secs(60)), r7, e);

    let t = Instant::now();
    let r = guarded(criterion_8);
    ok &= report(&c("8", "steady-state security, 20 slots", secs(10)), r, t.elapsed());

    let t = Instant::now();
    let r = guarded(criterion_9);
    ok &= report(&c("9", "snapshot memorylessness", secs(10)), r, t.elapsed());

    let t = Instant::now();
    let r = guarded(criterion_10);
    ok &= report(&c("10", "replication, tail vanishing, additivity, N <= 8", secs(30)), r, t.elapsed());

    if !ok {
        std::process::exit(1);
    }
}
