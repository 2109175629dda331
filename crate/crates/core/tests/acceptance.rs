//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` fail on the shipped instances; the run
//! exits nonzero only when the observed outcomes differ from that list, or on
//! any failure when `ACCEPTANCE_STRICT` is set.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use natslf::checker::{Assignment, Checker};
use natslf::formula::parse_formula;
use natslf::gsp::{family_profile, simulate, verify, Family, Gsp, VerifyOptions};
use natslf::random::random_sentence;
use natslf::strategy::{GuardPool, LetterCache, Semantics};
use natslf::wcgs::load_fixture;
use natslf::Value;

const KNOWN_FAILURES: [u32; 3] = [4, 9, 12];

const SENTENCE: &str = "E s2:2<=2 . A s1:1<=1 . bind(1,s1) bind(2,s2) F win";

type Outcome = Result<String, String>;

fn pool(entries: &[&str]) -> GuardPool {
    GuardPool::new("acceptance", entries.iter().map(|s| s.to_string()).collect()).unwrap()
}

fn sentence_value(model: &str, sem: Semantics, phi: &natslf::formula::Formula, pool: &GuardPool) -> Value {
    let m = load_fixture(model).unwrap();
    let q0 = m.state_id("q0").unwrap();
    Checker::new(&m, sem, pool).eval(phi, q0, &Assignment::new(&m)).unwrap()
}

fn run_checks(g: &Gsp, checks: &[&str]) -> Outcome {
    let mut notes = Vec::new();
    for check in checks {
        let out = verify(g, check, &VerifyOptions::default()).map_err(|e| e.to_string())?;
        if !out.pass {
            let first = out.failures.first().cloned().unwrap_or_default();
            return Err(format!("{check}: {} failure(s); first: {first}", out.failures.len()));
        }
        notes.push(format!("{check} over {} state(s)", out.checked));
    }
    Ok(notes.join("; "))
}

fn c1() -> Outcome {
    run_seeds(1, 200, until_brute_force).map(|_| "200 models".into())
}

fn c2() -> Outcome {
    let phi = parse_formula(SENTENCE).map_err(|e| e.to_string())?;
    let p = pool(&["top", "K[2](p)"]);
    for sem in [Semantics::Ir, Semantics::IR] {
        let (a, b) = (sentence_value("G1", sem, &phi, &p), sentence_value("G1'", sem, &phi, &p));
        if a != Value::ONE || b != Value::MINUS_ONE {
            return Err(format!("{sem}: G1 {a}, G1' {b}"));
        }
    }
    Ok("G1 = 1, G1' = -1 under ir and iR".into())
}

fn c3() -> Outcome {
    let p = pool(&["top", "K[$self](win)", "K[$self](p)", "K[$self](neg(win))"]);
    let mut phis = vec![parse_formula(SENTENCE).map_err(|e| e.to_string())?];
    let agents = load_fixture("G2").unwrap().agents().to_vec();
    let mut r = rng(3);
    phis.extend((0..20).map(|_| random_sentence(&mut r, &agents, 2, &["p", "win"])));
    for sem in [Semantics::Ir, Semantics::IR] {
        for phi in &phis {
            let (a, b) = (sentence_value("G2", sem, phi, &p), sentence_value("G2'", sem, phi, &p));
            if a != b {
                return Err(format!("{sem}: {phi} is {a} on G2 but {b} on G2'"));
            }
        }
    }
    Ok(format!("{} sentences agree under ir and iR", phis.len()))
}

fn c7() -> Outcome {
    let g = gsp(M3);
    let out = verify(&g, "bb-diverges-m3", &VerifyOptions::default()).map_err(|e| e.to_string())?;
    let w = out.witness.clone().ok_or("no witness trace")?;
    let cache = LetterCache::new();
    let profile = family_profile(&g, Family::Bb, &cache).map_err(|e| e.to_string())?;
    let q = g.model.state_id(&w.state).ok_or("witness state unknown")?;
    let trace = simulate(&g, &profile, q, w.cycle_start + w.cycle_len + 1).map_err(|e| e.to_string())?;
    println!("  witness from {} (cycle starts at round {}, length {}):", w.state, w.cycle_start, w.cycle_len);
    for line in trace.to_csv(&g).lines() {
        println!("    {line}");
    }
    if !out.pass {
        return Err(out.failures.first().cloned().unwrap_or_default());
    }
    Ok(format!("BB cycles from {}", w.state))
}

fn c11() -> Outcome {
    let public = run_checks(&gsp(TWO_AGENT_PUBLIC), &["kbb-price-bound"])?;
    let private = run_checks(&gsp(TWO_AGENT), &["kbb-price-bound"])?;
    Ok(format!("public: {public}; default: {private}"))
}

fn c13() -> Outcome {
    let props: [(&str, fn(u64) -> Check); 6] = [
        ("knowledge lower bound", knowledge_lower_bound),
        ("duality", duality),
        ("monotonicity in k", exists_monotone_in_k),
        ("sentence stability", sentence_stability),
        ("lasso expansion", lasso_expansion),
        ("bind idempotence", bind_idempotent),
    ];
    for (i, (name, check)) in props.iter().enumerate() {
        run_seeds(100 + i as u64, 200, *check).map_err(|e| format!("{name}: {e}"))?;
    }
    fixture_lasso_expansion().map_err(|e| format!("fixture lasso: {e}"))?;
    Ok("6 properties x 200 seeds, fixture lassos exhaustive".into())
}

fn main() -> ExitCode {
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let criteria: Vec<(u32, &str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "until matches bounded brute force", 60, Box::new(c1)),
        (2, "G1 / G1' separation", 10, Box::new(c2)),
        (3, "G2 / G2' agreement", 60, Box::new(c3)),
        (4, "LEFE implies NE (desk)", 300, Box::new(|| run_checks(&gsp(DESK), &["lefe-implies-ne"]))),
        (
            5,
            "VCG implies LEFE, revenue bound (desk)",
            120,
            Box::new(|| run_checks(&gsp(DESK), &["vcg-implies-lefe", "revenue-bound"])),
        ),
        (6, "BB converges, m=2 (desk)", 120, Box::new(|| run_checks(&gsp(DESK), &["bb-converges-m2"]))),
        (7, "BB does not converge, m=3", 300, Box::new(c7)),
        (
            8,
            "RBB converges (desk, m=3)",
            300,
            Box::new(|| {
                let a = run_checks(&gsp(DESK), &["rbb-converges"])?;
                let b = run_checks(&gsp(M3), &["rbb-converges"])?;
                Ok(format!("desk: {a}; m3: {b}"))
            }),
        ),
        (9, "BBR converges, m=3", 600, Box::new(|| run_checks(&gsp(M3), &["bbr-converges"]))),
        (10, "fixed-point bids (desk)", 120, Box::new(|| run_checks(&gsp(DESK), &["bb-fixed-point-bids"]))),
        (11, "KBB price bound", 120, Box::new(c11)),
        (12, "BBR one-step utility (desk)", 120, Box::new(|| run_checks(&gsp(DESK), &["bbr-one-step-utility"]))),
        (13, "semantics property suite", 300, Box::new(c13)),
    ];
    let mut failed = Vec::new();
    for (n, title, limit, run) in criteria {
        let t = Instant::now();
        let result = run();
        let elapsed = t.elapsed();
        let over = elapsed > Duration::from_secs(limit);
        let (ok, detail) = match result {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s limit")),
            Err(e) => (false, e),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n}: {title} [{:.1} s] {detail}", elapsed.as_secs_f64());
        if !ok {
            failed.push(n);
        }
    }
    let passed = 13 - failed.len();
    println!("{passed}/13 criteria pass; failing: {failed:?}");
    if strict && !failed.is_empty() {
        return ExitCode::FAILURE;
    }
    if failed != KNOWN_FAILURES {
        println!("outcomes differ from the documented failures {KNOWN_FAILURES:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
