//! Command-line front end: model checking, auction generation, simulation
//! and named auction checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use natslf::checker::{Checker, Predicate, Target};
use natslf::formula::parse_formula;
use natslf::gsp::{
    build_gsp, build_strategy, constant_strategy, simulate, verify, AuctionSpec, BidCases, Family, Gsp,
    VcgConvention, VerifyOptions, CHECKS,
};
use natslf::random::random_model;
use natslf::strategy::{parse_strategy_file, GuardPool, Kind, LetterCache, NatStrategy, Semantics, StrategyBundle};
use natslf::wcgs::{fixture_text, load_fixture, parse_model, Wcgs, FIXTURE_NAMES};
use natslf::Value;

#[derive(Parser)]
#[command(name = "natslf", version, about = "Quantitative NatSL[F] model checker and GSP auction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sentence on a model.
    Check(CheckArgs),
    /// Play a strategy profile on an auction and print the trace.
    Simulate(SimulateArgs),
    /// Build the game structure of an auction spec.
    GspBuild(BuildArgs),
    /// Run named checks on an auction spec.
    GspVerify(VerifyArgs),
    /// List, print or generate example models.
    Fixtures(FixtureArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Args)]
struct CheckArgs {
    /// Model file, or a fixture name (G1, G1', G2, G2').
    #[arg(long)]
    model: String,
    /// Formula file, or the formula itself.
    #[arg(long)]
    formula: String,
    /// Strategy file for named strategies.
    #[arg(long)]
    strategies: Option<PathBuf>,
    /// Guard pool file, one guard per line (default: top).
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, default_value = "ir")]
    semantics: String,
    /// State name; defaults to the minimum over initial states.
    #[arg(long, conflicts_with = "init")]
    state: Option<String>,
    #[arg(long)]
    init: bool,
    #[arg(long, default_value = "=1", allow_hyphen_values = true)]
    predicate: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Embed memoryless strategies under iR.
    #[arg(long)]
    promote: bool,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SpecArgs {
    /// Auction spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    vcg_convention: Option<String>,
    #[arg(long)]
    bid_cases: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// BB, RBB, KBB, BBR, or `const:<bid>`, or a comma list with one entry per agent.
    #[arg(long, default_value = "RBB")]
    profile: String,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    /// Start state; defaults to the first initial state.
    #[arg(long)]
    state: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Write the model text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "plain")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Check name, or `all`.
    #[arg(long)]
    check: String,
    /// Deviation pool for lefe-implies-ne.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct FixtureArgs {
    /// Print this fixture.
    #[arg(long)]
    name: Option<String>,
    /// Print a random model generated from `--seed`.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Input problems exit with 2; everything else that fails is a predicate.
struct Outcome(bool);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = std::panic::catch_unwind(|| run(cli));
    match result {
        Ok(Ok(Outcome(true))) => ExitCode::SUCCESS,
        Ok(Ok(Outcome(false))) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Check(a) => run_check(a),
        Command::Simulate(a) => run_simulate(a),
        Command::GspBuild(a) => run_build(a),
        Command::GspVerify(a) => run_verify(a),
        Command::Fixtures(a) => run_fixtures(a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn load_model(arg: &str) -> Result<Wcgs> {
    let path = Path::new(arg);
    if path.exists() {
        return parse_model(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()));
    }
    if FIXTURE_NAMES.contains(&arg) {
        return Ok(load_fixture(arg)?);
    }
    bail!("cannot read {arg}: no such file or fixture")
}

fn run_check(a: CheckArgs) -> Result<Outcome> {
    let m = load_model(&a.model)?;
    let semantics: Semantics = a.semantics.parse().map_err(|e| anyhow!("--semantics: {e}"))?;
    let formula_path = Path::new(&a.formula);
    let (text, origin) = if formula_path.is_file() {
        (read(formula_path)?, format!("{}", formula_path.display()))
    } else {
        (a.formula.clone(), "--formula".to_string())
    };
    let phi = parse_formula(text.trim()).map_err(|e| anyhow!("{origin}: {e}"))?;
    let predicate: Predicate = a.predicate.parse().map_err(|e| anyhow!("--predicate: {e}"))?;
    let cache = LetterCache::new();
    let bundle = match &a.strategies {
        Some(p) => parse_strategy_file(&read(p)?, &m, &cache).map_err(|e| anyhow!("{}: {e}", p.display()))?,
        None => StrategyBundle::new(),
    };
    let pool = match &a.pool {
        Some(p) => GuardPool::parse(p.display().to_string(), &read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))?,
        None => GuardPool::top_only(),
    };
    let target = match &a.state {
        Some(s) => Target::parse(&m, s)?,
        None => Target::Init,
    };
    let mut checker = Checker::new(&m, semantics, &pool)
        .with_bundle(&bundle)
        .with_promote(a.promote)
        .with_jobs(a.jobs.max(1));
    let mut report = checker.check(&phi, target, &predicate)?;
    if !a.timing {
        report.stats.wall_ms = None;
    }
    match a.format {
        Format::Json => println!("{}", json(&report)?),
        Format::Plain => println!(
            "{} at {}: {} ({} {})",
            report.value,
            report.state,
            if report.holds { "holds" } else { "fails" },
            report.predicate,
            report.semantics
        ),
        Format::Csv => {
            println!("state,value");
            for s in &report.per_state {
                println!("{},{}", s.state, s.value);
            }
        }
    }
    Ok(Outcome(report.holds))
}

fn load_spec(a: &SpecArgs) -> Result<AuctionSpec> {
    let mut spec = AuctionSpec::parse_toml(&read(&a.spec)?).map_err(|e| anyhow!("{}: {e}", a.spec.display()))?;
    if let Some(c) = &a.vcg_convention {
        spec.vcg_convention = c.parse::<VcgConvention>().map_err(|e| anyhow!("--vcg-convention: {e}"))?;
    }
    if let Some(c) = &a.bid_cases {
        spec.bid_cases = c.parse::<BidCases>().map_err(|e| anyhow!("--bid-cases: {e}"))?;
    }
    Ok(spec)
}

fn profile(gsp: &Gsp, text: &str, cache: &LetterCache) -> Result<Vec<Arc<NatStrategy>>> {
    let n = gsp.spec.num_agents();
    let entries: Vec<&str> = text.split(',').map(str::trim).collect();
    if entries.len() != 1 && entries.len() != n {
        bail!("--profile: expected 1 or {n} entries, got {}", entries.len());
    }
    let recall = entries.iter().any(|e| e.eq_ignore_ascii_case("BBR"));
    let kind = if recall { Kind::Recall } else { Kind::Memoryless };
    (0..n)
        .map(|a| {
            let e = if entries.len() == 1 { entries[0] } else { entries[a] };
            let s = if let Some(b) = e.strip_prefix("const:") {
                let b: Value = b.parse().map_err(|e| anyhow!("--profile: bid `{b}`: {e}"))?;
                constant_strategy(gsp, a, b, kind, cache)?
            } else {
                let fam: Family = e.parse().map_err(|e: String| anyhow!("--profile: {e}"))?;
                let s = build_strategy(gsp, fam, a, cache)?;
                if recall && s.kind() == Kind::Memoryless {
                    s.promote(&gsp.model, cache)?
                } else {
                    s
                }
            };
            Ok(Arc::new(s))
        })
        .collect()
}

fn run_simulate(a: SimulateArgs) -> Result<Outcome> {
    let spec = load_spec(&a.spec)?;
    let gsp = build_gsp(&spec)?;
    let cache = LetterCache::new();
    let p = profile(&gsp, &a.profile, &cache)?;
    let q = match &a.state {
        Some(s) => gsp.model.state_id(s).ok_or_else(|| anyhow!("unknown state `{s}`"))?,
        None => gsp.model.initial()[0],
    };
    let trace = simulate(&gsp, &p, q, a.rounds)?;
    match a.format {
        Format::Csv => print!("{}", trace.to_csv(&gsp)),
        Format::Json => println!("{}", json(&trace)?),
        Format::Plain => {
            for r in &trace.rows {
                let mark = if r.round == trace.cycle_start { " <- cycle" } else { "" };
                println!("{:>4} {}{mark}", r.round, gsp.state(r.state).describe(&gsp.spec));
            }
        }
    }
    Ok(Outcome(true))
}

#[derive(Serialize)]
struct BuildSummary<'a> {
    schema: &'static str,
    states: usize,
    initial: Vec<&'a str>,
    actions: &'a [String],
    props: &'a [String],
}

fn run_build(a: BuildArgs) -> Result<Outcome> {
    let spec = load_spec(&a.spec)?;
    let gsp = build_gsp(&spec)?;
    let text = match a.format {
        Format::Json => json(&BuildSummary {
            schema: "gsp-build/1",
            states: gsp.model.num_states(),
            initial: gsp.model.initial().iter().map(|&q| gsp.model.state_name(q)).collect(),
            actions: gsp.model.actions(),
            props: gsp.model.props(),
        })? + "\n",
        _ => gsp.model.to_model_text(),
    };
    match &a.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(Outcome(true))
}

fn run_verify(a: VerifyArgs) -> Result<Outcome> {
    let spec = load_spec(&a.spec)?;
    let names: Vec<&str> = if a.check == "all" {
        CHECKS.to_vec()
    } else {
        if !CHECKS.contains(&a.check.as_str()) {
            bail!("unknown check `{}` (expected one of: {}, all)", a.check, CHECKS.join(", "));
        }
        vec![a.check.as_str()]
    };
    let gsp = build_gsp(&spec)?;
    let opts = VerifyOptions {
        pool: match &a.pool {
            Some(p) => Some(GuardPool::parse(p.display().to_string(), &read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))?),
            None => None,
        },
        k: a.k,
        jobs: a.jobs.max(1),
    };
    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    for c in names {
        match verify(&gsp, c, &opts) {
            Ok(o) => outcomes.push(o),
            Err(natslf::gsp::GspError::NotApplicable { check, reason }) if a.check == "all" => {
                skipped.push(format!("{check}: {reason}"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let pass = outcomes.iter().all(|o| o.pass);
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Bundle<'a> {
                schema: &'static str,
                pass: bool,
                checks: &'a [natslf::gsp::CheckOutcome],
                skipped: &'a [String],
            }
            println!(
                "{}",
                json(&Bundle {
                    schema: "gsp-verify-bundle/1",
                    pass,
                    checks: &outcomes,
                    skipped: &skipped,
                })?
            );
        }
        _ => {
            for o in &outcomes {
                println!("{} {} ({} checked)", if o.pass { "PASS" } else { "FAIL" }, o.check, o.checked);
                for v in &o.values {
                    println!("  {} at {}: {}", v.profile, v.state, v.value);
                }
                for f in &o.failures {
                    println!("  {f}");
                }
                if let Some(w) = &o.witness {
                    println!("  trace from {} (cycle starts at {}, length {}):", w.state, w.cycle_start, w.cycle_len);
                    for r in &w.rounds {
                        println!("    {r}");
                    }
                }
            }
            for s in &skipped {
                println!("SKIP {s}");
            }
        }
    }
    Ok(Outcome(pass))
}

fn run_fixtures(a: FixtureArgs) -> Result<Outcome> {
    if a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        print!("{}", random_model(&mut rng, 6, 2, 3).to_model_text());
    } else if let Some(name) = &a.name {
        print!("{}", fixture_text(name)?);
    } else {
        for n in FIXTURE_NAMES {
            println!("{n}");
        }
    }
    Ok(Outcome(true))
}
