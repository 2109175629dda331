//! Seed-driven property checks shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use natslf::checker::{outcome_lasso, Assignment, Checker};
use natslf::formula::Formula;
use natslf::func::Func;
use natslf::gsp::{build_gsp, gsp_successor, rank, AuctionSpec, Gsp};
use natslf::random::{
    random_letter, random_memoryless, random_model, random_path_formula, random_sentence,
    random_state_formula, random_we_inner, PROPS,
};
use natslf::regex::{consistent_direct, GuardRegex};
use natslf::strategy::{
    consistent, enumerate_strategies, match_index, Guard, GuardPool, Kind, LetterCache, NatStrategy,
    Run, Semantics,
};
use natslf::wcgs::{load_fixture, AgentId, History, StateId, Wcgs, FIXTURE_NAMES};
use natslf::we::{eval_we, WeFormula};
use natslf::Value;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub const DESK: &str = include_str!("../../specs/desk.toml");
pub const TWO_AGENT: &str = include_str!("../../specs/two_agent.toml");
pub const TWO_AGENT_PUBLIC: &str = include_str!("../../specs/two_agent_public.toml");
pub const M3: &str = include_str!("../../specs/m3.toml");

pub fn gsp(text: &str) -> Gsp {
    build_gsp(&AuctionSpec::parse_toml(text).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn model(rng: &mut ChaCha8Rng) -> Wcgs {
    random_model(rng, 6, 2, 3)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pool() -> GuardPool {
    GuardPool::new(
        "props",
        ["top", "K[$self](p)", "K[$self](neg(r))", "K[$self](max(p, r))"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    )
    .unwrap()
}

fn profile(rng: &mut ChaCha8Rng, m: &Wcgs, cache: &LetterCache) -> Vec<Arc<NatStrategy>> {
    (0..m.num_agents())
        .map(|a| Arc::new(random_memoryless(rng, m, a, cache)))
        .collect()
}

fn random_regex(rng: &mut ChaCha8Rng, m: &Wcgs, agent: AgentId, depth: usize) -> GuardRegex {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => GuardRegex::letter(WeFormula::Top),
            1 => GuardRegex::top_star(),
            _ => GuardRegex::letter(random_letter(rng, m, agent)),
        };
    }
    match rng.gen_range(0..3) {
        0 => GuardRegex::concat(random_regex(rng, m, agent, depth - 1), random_regex(rng, m, agent, depth - 1)),
        1 => GuardRegex::choice(random_regex(rng, m, agent, depth - 1), random_regex(rng, m, agent, depth - 1)),
        _ => GuardRegex::star(random_regex(rng, m, agent, depth - 1)),
    }
}

/// Recall strategy with up to three regular or state guards before `(⊤*, c)`.
fn random_recall(rng: &mut ChaCha8Rng, m: &Wcgs, agent: AgentId, cache: &LetterCache) -> NatStrategy {
    let na = m.actions().len();
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let g = if rng.gen_bool(0.8) {
            Guard::Regex(random_regex(rng, m, agent, 3))
        } else {
            Guard::State(random_letter(rng, m, agent))
        };
        pairs.push((g, rng.gen_range(0..na)));
    }
    pairs.push((Guard::Regex(GuardRegex::top_star()), rng.gen_range(0..na)));
    let name = format!("h{}_{}", m.agent_name(agent), rng.gen::<u32>());
    NatStrategy::new(m, name, agent, Kind::Recall, pairs, cache).unwrap()
}

fn random_walk(rng: &mut ChaCha8Rng, m: &Wcgs, len: usize) -> Vec<StateId> {
    let mut h = vec![rng.gen_range(0..m.num_states())];
    while h.len() < len {
        let next = *m.successors(*h.last().unwrap()).choose(rng).unwrap();
        h.push(next);
    }
    h
}

/// Direct step-by-step play of a strategy profile.
pub fn simulate(m: &Wcgs, strategies: &[Arc<NatStrategy>], mut q: StateId, n: usize) -> Vec<StateId> {
    let mut runs: Vec<Run> = strategies.iter().map(|s| s.initial_run()).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(q);
        runs = strategies.iter().zip(&runs).map(|(s, r)| s.advance(r, q)).collect();
        let actions: Vec<_> = strategies.iter().zip(&runs).map(|(s, r)| s.action_at(r, q)).collect();
        q = m.successor(q, &actions).unwrap();
    }
    out
}

fn state_value(m: &Wcgs, f: &Formula, q: StateId) -> Value {
    match f {
        Formula::Atom(p) => m.weight(q, m.prop_id(p).unwrap()),
        Formula::Fun(g, args) => {
            let vals: Vec<Value> = args.iter().map(|a| state_value(m, a, q)).collect();
            g.apply(&vals).unwrap()
        }
        other => panic!("not a state formula: {other}"),
    }
}

fn lasso_agrees(m: &Wcgs, strategies: &[Arc<NatStrategy>], q: StateId) -> Check {
    let chi = Assignment::total(m, strategies.iter().cloned());
    let l = outcome_lasso(m, &chi, q).map_err(|e| e.to_string())?;
    let n = l.prefix.len() + 3 * l.cycle.len();
    let direct = simulate(m, strategies, q, n);
    ensure(l.expand(n) == direct, || {
        format!("lasso {:?}·{:?} disagrees with play {:?}", l.prefix, l.cycle, direct)
    })
}

pub fn knowledge_lower_bound(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let phi = random_we_inner(&mut rng, 3);
    for a in m.agents() {
        let k = WeFormula::know(a.as_str(), phi.clone());
        for q in 0..m.num_states() {
            let (vk, v) = (eval_we(&m, q, &k).unwrap(), eval_we(&m, q, &phi).unwrap());
            ensure(vk <= v, || format!("{k} = {vk} exceeds {phi} = {v} at {q}"))?;
        }
    }
    Ok(())
}

fn outer_formula(rng: &mut ChaCha8Rng, m: &Wcgs, agent: AgentId, depth: usize) -> WeFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.2) {
            WeFormula::Top
        } else {
            random_letter(rng, m, agent)
        };
    }
    let f = [Func::Neg, Func::Min, Func::Max, Func::Sum, Func::Geq][rng.gen_range(0..5)];
    let args = match f {
        Func::Neg => vec![outer_formula(rng, m, agent, depth - 1)],
        _ => vec![outer_formula(rng, m, agent, depth - 1), outer_formula(rng, m, agent, depth - 1)],
    };
    WeFormula::fun(f, args)
}

fn invariant_on_classes(m: &Wcgs, a: AgentId, psi: &WeFormula) -> Check {
    for q in 0..m.num_states() {
        let v = eval_we(m, q, psi).unwrap();
        for &r in m.obs_class(a, q) {
            let w = eval_we(m, r, psi).unwrap();
            ensure(v == w, || format!("{psi}: {v} at {q} but {w} at {r}"))?;
        }
    }
    Ok(())
}

pub fn observation_invariance(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    for a in 0..m.num_agents() {
        let psi = outer_formula(&mut rng, &m, a, 3);
        invariant_on_classes(&m, a, &psi)?;
    }
    Ok(())
}

pub fn fixture_observation_invariance() -> Check {
    let inners = ["p", "win", "neg(p)", "max(p, win)", "min(p, neg(win))"];
    for name in FIXTURE_NAMES {
        let m = load_fixture(name).unwrap();
        for a in 0..m.num_agents() {
            let agent = m.agent_name(a);
            let letters: Vec<WeFormula> = inners
                .iter()
                .map(|i| natslf::we::parse_we(&format!("K[{agent}]({i})")).unwrap())
                .collect();
            for x in &letters {
                invariant_on_classes(&m, a, x)?;
                for y in &letters {
                    for f in [Func::Min, Func::Max, Func::Sub, Func::Pref] {
                        invariant_on_classes(&m, a, &WeFormula::fun(f, vec![x.clone(), y.clone()]))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_partition(m: &Wcgs) -> Check {
    for a in 0..m.num_agents() {
        for q in 0..m.num_states() {
            let c = m.obs_class(a, q);
            ensure(c.contains(&q), || format!("{q} missing from its own class"))?;
            for &r in c {
                ensure(m.indistinguishable(a, r, q), || format!("{q} ~ {r} is not symmetric"))?;
                ensure(m.obs_class(a, r) == c, || format!("classes of {q} and {r} differ"))?;
            }
        }
    }
    Ok(())
}

fn check_totality(m: &Wcgs) -> Check {
    for q in 0..m.num_states() {
        let profiles = m.legal_profiles(q);
        ensure(!profiles.is_empty(), || format!("no legal profile at {q}"))?;
        for p in profiles {
            let a = m.successor(q, &p).map_err(|e| e.to_string())?;
            let b = m.successor(q, &p).map_err(|e| e.to_string())?;
            ensure(a == b && a < m.num_states(), || format!("successor of {q} under {p:?}"))?;
        }
    }
    Ok(())
}

pub fn model_well_formed(seed: u64) -> Check {
    let m = model(&mut rng(seed));
    check_partition(&m)?;
    check_totality(&m)
}

pub fn fixtures_well_formed() -> Check {
    for name in FIXTURE_NAMES {
        let m = load_fixture(name).unwrap();
        check_partition(&m)?;
        check_totality(&m)?;
    }
    Ok(())
}

pub fn lasso_expansion(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let memoryless = profile(&mut rng, &m, &cache);
    let recall: Vec<Arc<NatStrategy>> = (0..m.num_agents())
        .map(|a| Arc::new(random_recall(&mut rng, &m, a, &cache)))
        .collect();
    for q in 0..m.num_states() {
        lasso_agrees(&m, &memoryless, q)?;
        lasso_agrees(&m, &recall, q)?;
    }
    Ok(())
}

pub fn fixture_lasso_expansion() -> Check {
    let pool = GuardPool::new("f", vec!["top".into(), "K[$self](p)".into()]).unwrap();
    let rpool = GuardPool::new("r", vec!["{top}*.{K[$self](p)}".into(), "{top}.{top}".into()]).unwrap();
    for name in FIXTURE_NAMES {
        let m = load_fixture(name).unwrap();
        let cache = LetterCache::new();
        for (p, kind, k) in [(&pool, Kind::Memoryless, 2), (&rpool, Kind::Recall, 5)] {
            let s1 = enumerate_strategies(&m, 0, k, p, kind, &cache).unwrap();
            let s2 = enumerate_strategies(&m, 1, k, p, kind, &cache).unwrap();
            for a in &s1 {
                for b in &s2 {
                    for q in 0..m.num_states() {
                        lasso_agrees(&m, &[a.clone(), b.clone()], q)?;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn until_brute_force(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let strategies = profile(&mut rng, &m, &cache);
    let (f1, f2) = (random_state_formula(&mut rng, 2), random_state_formula(&mut rng, 2));
    let until = Formula::until(f1.clone(), f2.clone());
    let chi = Assignment::total(&m, strategies.iter().cloned());
    let pool = GuardPool::top_only();
    let mut checker = Checker::new(&m, Semantics::Ir, &pool);
    for q in 0..m.num_states() {
        let got = checker.eval(&until, q, &chi).map_err(|e| e.to_string())?;
        let l = outcome_lasso(&m, &chi, q).map_err(|e| e.to_string())?;
        let path = simulate(&m, &strategies, q, l.prefix.len() + 2 * l.cycle.len());
        let mut best = Value::MINUS_ONE;
        let mut prefix_min = Value::ONE;
        for &s in &path {
            best = best.max(state_value(&m, &f2, s).min(prefix_min));
            prefix_min = prefix_min.min(state_value(&m, &f1, s));
        }
        ensure(got == best, || format!("{until} at {q}: checker {got}, brute force {best}"))?;
    }
    Ok(())
}

/// `φ = bind(1, x) bind(2, y) path` with `y` fixed in the assignment.
fn open_path(rng: &mut ChaCha8Rng, m: &Wcgs, cache: &LetterCache) -> (Formula, Assignment) {
    let path = random_path_formula(rng, &PROPS);
    let phi = Formula::bind_var("1", "x", Formula::bind_var("2", "y", path));
    let mut chi = Assignment::new(m);
    chi.set_var("y", Arc::new(random_memoryless(rng, m, 1, cache)));
    (phi, chi)
}

pub fn duality(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let (phi, chi) = open_path(&mut rng, &m, &cache);
    let pool = pool();
    let mut checker = Checker::new(&m, Semantics::Ir, &pool);
    for k in 1..=2 {
        let strategies = enumerate_strategies(&m, 0, k, &pool, Kind::Memoryless, &cache).unwrap();
        let dual = Formula::neg(Formula::exists("x", "1", k, Formula::neg(phi.clone())));
        let exists = Formula::exists("x", "1", k, phi.clone());
        for q in 0..m.num_states() {
            let mut lo = Value::ONE;
            let mut hi = Value::MINUS_ONE;
            for s in &strategies {
                let mut c = chi.clone();
                c.set_var("x", s.clone());
                let v = checker.eval(&phi, q, &c).map_err(|e| e.to_string())?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let d = checker.eval(&dual, q, &chi).map_err(|e| e.to_string())?;
            let e = checker.eval(&exists, q, &chi).map_err(|e| e.to_string())?;
            ensure(d == lo, || format!("k={k} at {q}: dual {d}, min {lo} for {phi}"))?;
            ensure(e == hi, || format!("k={k} at {q}: exists {e}, max {hi} for {phi}"))?;
        }
    }
    Ok(())
}

pub fn exists_monotone_in_k(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let (phi, chi) = open_path(&mut rng, &m, &cache);
    let pool = pool();
    let mut checker = Checker::new(&m, Semantics::Ir, &pool);
    for q in 0..m.num_states() {
        let mut prev = Value::MINUS_ONE;
        for k in 1..=3 {
            let v = checker
                .eval(&Formula::exists("x", "1", k, phi.clone()), q, &chi)
                .map_err(|e| e.to_string())?;
            ensure(v >= prev, || format!("value drops from {prev} to {v} at k={k}, state {q}"))?;
            prev = v;
        }
    }
    Ok(())
}

pub fn bind_idempotent(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let (phi, mut chi) = open_path(&mut rng, &m, &cache);
    chi.set_var("x", Arc::new(random_memoryless(&mut rng, &m, 0, &cache)));
    let twice = Formula::bind_var("1", "x", phi.clone());
    let pool = pool();
    let mut checker = Checker::new(&m, Semantics::Ir, &pool);
    for q in 0..m.num_states() {
        let a = checker.eval(&phi, q, &chi).map_err(|e| e.to_string())?;
        let b = checker.eval(&twice, q, &chi).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{a} vs {b} at {q}"))?;
    }
    Ok(())
}

pub fn sentence_stability(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let phi = random_sentence(&mut rng, m.agents(), 2, &PROPS);
    let pool = pool();
    let chis = [
        Assignment::new(&m),
        Assignment::total(&m, profile(&mut rng, &m, &cache)),
        Assignment::total(&m, profile(&mut rng, &m, &cache)),
    ];
    for q in 0..m.num_states() {
        let vals: Vec<Value> = chis
            .iter()
            .map(|chi| Checker::new(&m, Semantics::Ir, &pool).eval(&phi, q, chi))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(vals.windows(2).all(|w| w[0] == w[1]), || format!("{phi} at {q}: {vals:?}"))?;
    }
    Ok(())
}

/// First pair consistent with `h` whose action is legal, from scratch.
fn direct_match(m: &Wcgs, h: &[StateId], s: &NatStrategy) -> usize {
    let last = *h.last().unwrap();
    for (i, (g, act)) in s.pairs().iter().enumerate() {
        let fires = match g {
            Guard::State(f) => eval_we(m, last, f).unwrap() == Value::ONE,
            Guard::Regex(r) => consistent_direct(r, &|f, j| eval_we(m, h[j], f).unwrap() == Value::ONE, h.len()),
        };
        if fires && m.is_legal(s.agent(), last, *act) {
            return i + 1;
        }
    }
    panic!("no pair fires on {h:?}");
}

fn agree_on(m: &Wcgs, s: &NatStrategy, h: &[StateId]) -> Check {
    let hist = History::new(m, h.to_vec())?;
    let (inc, direct) = (match_index(&hist, s), direct_match(m, h, s));
    ensure(inc == direct, || format!("{s} on {h:?}: incremental {inc}, direct {direct}"))?;
    for (g, _) in s.pairs() {
        if let Guard::Regex(r) = g {
            let a = consistent(m, &hist, r).map_err(|e| e.to_string())?;
            let b = consistent_direct(r, &|f, j| eval_we(m, h[j], f).unwrap() == Value::ONE, h.len());
            ensure(a == b, || format!("{r} on {h:?}: automaton {a}, direct {b}"))?;
        }
    }
    Ok(())
}

pub fn incremental_agreement(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    for a in 0..m.num_agents() {
        let s = random_recall(&mut rng, &m, a, &cache);
        for _ in 0..10 {
            let len = rng.gen_range(1..=6);
            agree_on(&m, &s, &random_walk(&mut rng, &m, len))?;
        }
    }
    Ok(())
}

fn all_histories(m: &Wcgs, max_len: usize) -> Vec<Vec<StateId>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<StateId>> = (0..m.num_states()).map(|q| vec![q]).collect();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for h in &layer {
            for &r in m.successors(*h.last().unwrap()) {
                let mut g = h.clone();
                g.push(r);
                next.push(g);
            }
        }
        out.append(&mut layer);
        layer = next;
    }
    out
}

pub fn fixture_incremental_agreement() -> Check {
    let pool = GuardPool::new(
        "r",
        [
            "{top}*.{K[$self](p)}",
            "{K[$self](p)}.{top}*",
            "{top}*.{K[$self](p)}.{top}",
            "({top}.{top})*",
            "{K[$self](neg(win))}*",
            "K[$self](win)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    )
    .unwrap();
    for name in FIXTURE_NAMES {
        let m = load_fixture(name).unwrap();
        let cache = LetterCache::new();
        let histories = all_histories(&m, 6);
        for a in 0..m.num_agents() {
            for s in enumerate_strategies(&m, a, 5, &pool, Kind::Recall, &cache).unwrap() {
                for h in &histories {
                    agree_on(&m, &s, h)?;
                }
            }
        }
    }
    Ok(())
}

pub fn uniformity(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    for a in 0..m.num_agents() {
        let strategies = [
            random_memoryless(&mut rng, &m, a, &cache),
            random_recall(&mut rng, &m, a, &cache),
        ];
        for s in &strategies {
            for _ in 0..10 {
                let len = rng.gen_range(1..=6);
                let h: Vec<StateId> = (0..len).map(|_| rng.gen_range(0..m.num_states())).collect();
                let mut last_swapped = h.clone();
                *last_swapped.last_mut().unwrap() = *m.obs_class(a, h[len - 1]).choose(&mut rng).unwrap();
                let all_swapped: Vec<StateId> =
                    h.iter().map(|&q| *m.obs_class(a, q).choose(&mut rng).unwrap()).collect();
                let act = |g: &[StateId]| s.action_at(&s.run_on(g), *g.last().unwrap());
                ensure(act(&h) == act(&last_swapped), || format!("{s}: {h:?} vs {last_swapped:?}"))?;
                ensure(act(&h) == act(&all_swapped), || format!("{s}: {h:?} vs {all_swapped:?}"))?;
            }
        }
    }
    Ok(())
}

pub fn compl_monotone(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    for a in 0..m.num_agents() {
        let s = if rng.gen_bool(0.5) {
            random_recall(&mut rng, &m, a, &cache)
        } else {
            random_memoryless(&mut rng, &m, a, &cache)
        };
        for i in 0..s.len() - 1 {
            let mut pairs = s.pairs().to_vec();
            pairs.remove(i);
            let t = NatStrategy::new(&m, "t", a, s.kind(), pairs, &cache).map_err(|e| e.to_string())?;
            ensure(t.compl() <= s.compl(), || format!("removing pair {i} of {s} raises compl"))?;
        }
    }
    Ok(())
}

pub fn enumeration_unique(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = model(&mut rng);
    let cache = LetterCache::new();
    let (kind, pool) = if rng.gen_bool(0.5) {
        (Kind::Memoryless, pool())
    } else {
        let entries = ["{top}*.{K[$self](p)}", "{K[$self](r)}.{top}*", "K[$self](p)", "{top}*"];
        (Kind::Recall, GuardPool::new("r", entries.iter().map(|s| s.to_string()).collect()).unwrap())
    };
    let a = rng.gen_range(0..m.num_agents());
    let k = rng.gen_range(1..=5);
    let all = enumerate_strategies(&m, a, k, &pool, kind, &cache).map_err(|e| e.to_string())?;
    let mut seen = HashSet::new();
    for s in &all {
        ensure(s.compl() <= k, || format!("{s} exceeds k={k}"))?;
        ensure(seen.insert(s.pairs().to_vec()), || format!("{s} emitted twice"))?;
    }
    Ok(())
}

/// Conservation of agents and rank-monotone prices over all reachable states
/// and all bid profiles.
pub fn gsp_structure(text: &str) -> Check {
    let g = gsp(text);
    let n = g.spec.num_agents();
    let top = n.min(g.spec.slots);
    let bids = g.bids().to_vec();
    let mut profile = vec![0usize; n];
    for (q, st) in g.states.iter().enumerate() {
        let placed: Vec<AgentId> = st.alloc.iter().flatten().copied().collect();
        let distinct: HashSet<_> = placed.iter().collect();
        ensure(distinct.len() == placed.len(), || format!("q{q}: agent in two slots"))?;
        ensure(placed.is_empty() || placed.len() == top, || format!("q{q}: {} agents placed", placed.len()))?;
        for s in 1..st.price.len() {
            ensure(st.price[s - 1] >= st.price[s], || format!("q{q}: prices {:?}", st.price))?;
        }
        loop {
            let b: Vec<Value> = profile.iter().map(|&i| bids[i]).collect();
            let next = gsp_successor(&g.spec, st, &b);
            let want: Vec<Option<AgentId>> = rank(&b).into_iter().take(top).map(Some).collect();
            ensure(next.alloc[..top] == want[..], || format!("q{q} under {b:?}: {:?}", next.alloc))?;
            ensure(g.state_id(&next) == Some(g.successor(q, &b)), || format!("q{q}: successor not reachable"))?;
            let mut i = 0;
            while i < n {
                profile[i] += 1;
                if profile[i] < bids.len() {
                    break;
                }
                profile[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(())
}

/// Runs `check` on `cases` seeds derived from `base`, stopping at the first
/// failure.
pub fn run_seeds(base: u64, cases: u64, check: fn(u64) -> Check) -> Check {
    for i in 0..cases {
        let seed = base.wrapping_mul(1_000_003).wrapping_add(i);
        check(seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(())
}
