//! Seeded search for a three-slot auction on which balanced bidding cycles
//! without reaching the VCG outcome. Prints the first hit as a spec file.
//!
//! cargo run --release -p natslf --example find_m3 -- [seed]

use std::collections::HashMap;

use natslf::gsp::{
    balanced_bid, build_gsp, gsp_successor, vcg_outcome, verify, AuctionSpec, BidCases, GspState, VcgConvention,
    VerifyOptions, DEFAULT_STATE_CAP,
};
use natslf::Value;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// VCG payments on the bid grid, so that some bid profile realises them.
fn vcg_on_grid(spec: &AuctionSpec) -> bool {
    let vals = spec.valuations.iter().map(|v| v[0]).collect::<Vec<_>>();
    let vcg = vcg_outcome(spec, &vals);
    vcg.payments(spec.vcg_convention).iter().all(|&p| spec.snap(p) == p)
}

/// Plays balanced bidding from the initial state; true when the cycle it
/// enters is not the VCG outcome.
fn bb_diverges(spec: &AuctionSpec) -> bool {
    let vals = spec.valuations.iter().map(|v| v[0]).collect::<Vec<_>>();
    let vcg = vcg_outcome(spec, &vals);
    let mut q = GspState::initial(spec, vals);
    let mut seen = HashMap::new();
    let mut trace = Vec::new();
    while !seen.contains_key(&q) {
        seen.insert(q.clone(), trace.len());
        trace.push(q.clone());
        let bids: Vec<Value> = (0..spec.num_agents()).map(|a| balanced_bid(spec, &q, a, false)).collect();
        q = gsp_successor(spec, &q, &bids);
    }
    let payments = vcg.payments(spec.vcg_convention);
    trace[seen[&q]..]
        .iter()
        .any(|s| s.alloc != vcg.alloc || s.price != payments)
}

fn candidate(rng: &mut ChaCha8Rng, n: usize) -> AuctionSpec {
    let steps: i128 = *[4, 5, 6].choose(rng).unwrap();
    let inc = Value::new(1, steps);
    let mut grid: Vec<Value> = (0..=steps).map(|i| inc * Value::int(i)).collect();
    grid.shuffle(rng);
    let mut vals: Vec<Value> = grid[..n].to_vec();
    vals.sort_by(|a, b| b.cmp(a));
    let mut ctr = vec![Value::ONE];
    let tenths: Vec<i128> = {
        let mut t: Vec<i128> = (1..10).collect();
        t.shuffle(rng);
        let mut t = t[..2].to_vec();
        t.sort_by(|a, b| b.cmp(a));
        t
    };
    ctr.extend(tenths.iter().map(|&t| Value::new(t, 10)));
    AuctionSpec {
        agents: (1..=n).map(|i| i.to_string()).collect(),
        slots: 3,
        ctr,
        increment: inc,
        valuations: vals.into_iter().map(|v| vec![v]).collect(),
        public_valuations: Vec::new(),
        vcg_convention: VcgConvention::PerClick,
        bid_cases: BidCases::Swapped,
        state_cap: DEFAULT_STATE_CAP,
    }
}

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(7, |s| s.parse().expect("seed"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [3, 4] {
        for tries in 1..=5000 {
            let spec = candidate(&mut rng, n);
            if spec.validate().is_err() || !vcg_on_grid(&spec) || !bb_diverges(&spec) {
                continue;
            }
            eprintln!("n = {n}: hit after {tries} candidates");
            let gsp = build_gsp(&spec).expect("spec builds");
            for check in ["bb-diverges-m3", "rbb-converges", "bbr-converges"] {
                let out = verify(&gsp, check, &VerifyOptions::default()).expect("check runs");
                eprintln!("  {check}: {}", if out.pass { "pass" } else { "fail" });
            }
            print!("{}", spec.to_toml());
            return;
        }
        eprintln!("n = {n}: nothing found");
    }
    std::process::exit(1);
}
