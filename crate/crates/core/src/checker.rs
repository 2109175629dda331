//! Quantitative evaluation of NatSL[F] formulas.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{BindTarget, Formula, FormulaError};
use crate::func::{Func, FuncError};
use crate::strategy::{
    enumerate_strategies, GuardPool, Kind, LetterCache, NatStrategy, Run, Semantics, StrategyBundle,
    StrategyError,
};
use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::value::Value;
use crate::wcgs::{ActionId, AgentId, PropId, StateId, Wcgs};
use crate::we::parse_number;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("no strategy named `{0}`")]
    UnresolvedStrategy(String),
    #[error("strategy `{name}` is {kind} but {semantics} evaluation needs {expected} strategies")]
    KindMismatch {
        name: String,
        kind: Kind,
        semantics: Semantics,
        expected: Kind,
    },
    #[error("strategy `{name}` belongs to agent `{owner}` but is bound to agent `{agent}`")]
    AgentMismatch {
        name: String,
        owner: String,
        agent: String,
    },
    #[error("variable `{0}` is not assigned")]
    UnboundVariable(String),
    #[error("agent `{0}` has no strategy in the assignment")]
    IncompleteAssignment(String),
    #[error("not a sentence: free names {0:?}")]
    NotASentence(Vec<String>),
    #[error("satisfaction value {0} lies outside [-1, 1]")]
    OutOfRange(Value),
    #[error("predicate: {0}")]
    Predicate(#[from] SyntaxError),
}

/// Strategies for agents and variables.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    agents: Vec<Option<Arc<NatStrategy>>>,
    vars: BTreeMap<String, Arc<NatStrategy>>,
}

impl Assignment {
    pub fn new(m: &Wcgs) -> Self {
        Assignment {
            agents: vec![None; m.num_agents()],
            vars: BTreeMap::new(),
        }
    }

    /// One strategy per agent, in any order.
    pub fn total(m: &Wcgs, strategies: impl IntoIterator<Item = Arc<NatStrategy>>) -> Self {
        let mut a = Assignment::new(m);
        for s in strategies {
            a.set_agent(s);
        }
        a
    }

    pub fn set_agent(&mut self, s: Arc<NatStrategy>) {
        let i = s.agent();
        if i >= self.agents.len() {
            self.agents.resize(i + 1, None);
        }
        self.agents[i] = Some(s);
    }

    pub fn set_var(&mut self, var: impl Into<String>, s: Arc<NatStrategy>) {
        self.vars.insert(var.into(), s);
    }

    pub fn agent(&self, a: AgentId) -> Option<&Arc<NatStrategy>> {
        self.agents.get(a).and_then(|s| s.as_ref())
    }

    pub fn var(&self, v: &str) -> Option<&Arc<NatStrategy>> {
        self.vars.get(v)
    }

    pub fn is_total(&self, m: &Wcgs) -> bool {
        (0..m.num_agents()).all(|a| self.agent(a).is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub state: StateId,
    /// Guard-automaton runs, one entry per agent.
    pub runs: Vec<Run>,
}

/// The play `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<StateId>,
    pub cycle: Vec<StateId>,
    /// Configurations at positions `0..=|prefix|+|cycle|`; the last equals
    /// the one at `|prefix|`.
    pub configs: Vec<Config>,
}

impl Lasso {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state_at(&self, i: usize) -> StateId {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn expand(&self, n: usize) -> Vec<StateId> {
        (0..n).map(|i| self.state_at(i)).collect()
    }
}

fn strategy_profile(m: &Wcgs, chi: &Assignment) -> Result<Vec<Arc<NatStrategy>>, CheckError> {
    (0..m.num_agents())
        .map(|a| {
            chi.agent(a)
                .cloned()
                .ok_or_else(|| CheckError::IncompleteAssignment(m.agent_name(a).to_string()))
        })
        .collect()
}

fn joint_step(m: &Wcgs, strategies: &[Arc<NatStrategy>], runs: &[Run], q: StateId) -> StateId {
    let profile: Vec<ActionId> = strategies
        .iter()
        .zip(runs)
        .map(|(s, r)| s.action_at(r, q))
        .collect();
    m.successor_unchecked(q, &profile)
}

/// The outcome `out(χ, q)` as a lasso, found at the first repeat of the
/// joint configuration.
pub fn outcome_lasso(m: &Wcgs, chi: &Assignment, q: StateId) -> Result<Lasso, CheckError> {
    let strategies = strategy_profile(m, chi)?;
    let mut seen: HashMap<Config, usize> = HashMap::new();
    let mut configs = Vec::new();
    let mut state = q;
    let mut runs: Vec<Run> = strategies.iter().map(|s| s.advance(&s.initial_run(), q)).collect();
    loop {
        let c = Config {
            state,
            runs: runs.clone(),
        };
        if let Some(&start) = seen.get(&c) {
            let states: Vec<StateId> = configs.iter().map(|c: &Config| c.state).collect();
            configs.push(c);
            return Ok(Lasso {
                prefix: states[..start].to_vec(),
                cycle: states[start..].to_vec(),
                configs,
            });
        }
        seen.insert(c.clone(), configs.len());
        configs.push(c);
        let next = joint_step(m, &strategies, &runs, state);
        runs = strategies.iter().zip(&runs).map(|(s, r)| s.advance(r, next)).collect();
        state = next;
    }
}

type Joint = (StateId, Vec<Run>);

fn joint_next(m: &Wcgs, strategies: &[Arc<NatStrategy>], c: &Joint) -> Joint {
    let next = joint_step(m, strategies, &c.1, c.0);
    let runs = strategies.iter().zip(&c.1).map(|(s, r)| s.advance(r, next)).collect();
    (next, runs)
}

/// Lasso states only: `(positions, cycle start)`. Stateful profiles use
/// Floyd's cycle finder so that only a few configurations are alive.
fn lasso_states(m: &Wcgs, strategies: &[Arc<NatStrategy>], q: StateId) -> (Vec<StateId>, usize) {
    let mut states = Vec::new();
    if strategies.iter().all(|s| s.is_stateless()) {
        let empty: Vec<Run> = vec![Run::default(); strategies.len()];
        let mut state = q;
        loop {
            if let Some(start) = states.iter().position(|&s| s == state) {
                return (states, start);
            }
            states.push(state);
            state = joint_step(m, strategies, &empty, state);
        }
    }
    let f = |c: &Joint| joint_next(m, strategies, c);
    let x0: Joint = (q, strategies.iter().map(|s| s.advance(&s.initial_run(), q)).collect());
    let mut tort = f(&x0);
    let mut hare = f(&tort);
    while tort != hare {
        tort = f(&tort);
        hare = f(&f(&hare));
    }
    let mut mu = 0;
    tort = x0.clone();
    while tort != hare {
        tort = f(&tort);
        hare = f(&hare);
        mu += 1;
    }
    let mut lam = 1;
    hare = f(&tort);
    while tort != hare {
        hare = f(&hare);
        lam += 1;
    }
    let mut c = x0;
    for _ in 0..mu + lam {
        states.push(c.0);
        c = f(&c);
    }
    (states, mu)
}

/// States of `out(χ, q)` up to the first repeat of the joint configuration,
/// and the index where the cycle starts.
pub fn outcome_states(m: &Wcgs, chi: &Assignment, q: StateId) -> Result<(Vec<StateId>, usize), CheckError> {
    let strategies = strategy_profile(m, chi)?;
    Ok(lasso_states(m, &strategies, q))
}

static NEXT_NODE: AtomicUsize = AtomicUsize::new(1);

fn node_id() -> usize {
    NEXT_NODE.fetch_add(1, Ordering::Relaxed)
}

enum BindSrc {
    Slot(usize),
    Named(Arc<NatStrategy>),
}

enum Node {
    Atom(PropId),
    Exists {
        id: usize,
        slot: usize,
        agent: AgentId,
        k: usize,
        /// Body values are known to lie in `[-1, 1]`.
        bounded: bool,
        body: Box<Node>,
    },
    Bind {
        agent: AgentId,
        src: BindSrc,
        body: Box<Node>,
    },
    Fun(Func, Vec<Node>),
    Next {
        id: usize,
        body: Box<Node>,
    },
    Until {
        id: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
}

fn bounded(n: &Node) -> bool {
    match n {
        Node::Atom(_) | Node::Exists { .. } => true,
        Node::Bind { body, .. } | Node::Next { body, .. } => bounded(body),
        Node::Until { left, right, .. } => bounded(left) && bounded(right),
        Node::Fun(f, args) => match f {
            Func::Top | Func::Eq | Func::Lt | Func::Gt | Func::Geq | Func::Pref => true,
            Func::Const(v) => v.in_unit_interval(),
            Func::Neg | Func::Or | Func::And | Func::Min | Func::Max => args.iter().all(bounded),
            _ => false,
        },
    }
}

/// Everything a compiled formula needs to know about the evaluation context.
struct Compiler<'c> {
    m: &'c Wcgs,
    semantics: Semantics,
    bundle: Option<&'c StrategyBundle>,
    promote: bool,
    cache: &'c LetterCache,
    /// Variable scope: name -> (slot, agent); free variables come first.
    scope: Vec<(String, usize, Option<AgentId>)>,
    slots: usize,
}

impl Compiler<'_> {
    fn agent(&self, name: &str) -> Result<AgentId, CheckError> {
        self.m
            .agent_id(name)
            .ok_or_else(|| CheckError::UnknownAgent(name.to_string()))
    }

    fn compile(&mut self, f: &Formula) -> Result<Node, CheckError> {
        Ok(match f {
            Formula::Atom(p) => Node::Atom(
                self.m
                    .prop_id(p)
                    .ok_or_else(|| CheckError::UnknownProposition(p.clone()))?,
            ),
            Formula::Exists { var, agent, k, body } => {
                let agent = self.agent(agent)?;
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((var.clone(), slot, Some(agent)));
                let body = self.compile(body);
                self.scope.pop();
                let body = body?;
                Node::Exists {
                    id: node_id(),
                    slot,
                    agent,
                    k: *k,
                    bounded: bounded(&body),
                    body: Box::new(body),
                }
            }
            Formula::Bind { agent: name, target, body } => {
                let agent = self.agent(name)?;
                let src = match target {
                    BindTarget::Var(v) => {
                        let (_, slot, owner) = self
                            .scope
                            .iter()
                            .rev()
                            .find(|(n, _, _)| n == v)
                            .ok_or_else(|| CheckError::UnboundVariable(v.clone()))?;
                        if let Some(owner) = owner {
                            if *owner != agent {
                                return Err(CheckError::AgentMismatch {
                                    name: v.clone(),
                                    owner: self.m.agent_name(*owner).to_string(),
                                    agent: name.clone(),
                                });
                            }
                        }
                        BindSrc::Slot(*slot)
                    }
                    BindTarget::Named(n) => {
                        let s = self
                            .bundle
                            .and_then(|b| b.get(n))
                            .ok_or_else(|| CheckError::UnresolvedStrategy(n.clone()))?;
                        if s.agent() != agent {
                            return Err(CheckError::AgentMismatch {
                                name: n.clone(),
                                owner: s.agent_name().to_string(),
                                agent: name.clone(),
                            });
                        }
                        BindSrc::Named(self.kinded(s)?)
                    }
                };
                Node::Bind {
                    agent,
                    src,
                    body: Box::new(self.compile(body)?),
                }
            }
            Formula::Fun(func, args) => {
                func.check_arity(args.len())?;
                Node::Fun(
                    func.clone(),
                    args.iter().map(|a| self.compile(a)).collect::<Result<_, _>>()?,
                )
            }
            Formula::Next(body) => Node::Next {
                id: node_id(),
                body: Box::new(self.compile(body)?),
            },
            Formula::Until(a, b) => Node::Until {
                id: node_id(),
                left: Box::new(self.compile(a)?),
                right: Box::new(self.compile(b)?),
            },
        })
    }

    /// The strategy as usable under the evaluation semantics.
    fn kinded(&self, s: &Arc<NatStrategy>) -> Result<Arc<NatStrategy>, CheckError> {
        check_kind(s, self.semantics, self.promote, self.m, self.cache)
    }
}

fn check_kind(
    s: &Arc<NatStrategy>,
    semantics: Semantics,
    promote: bool,
    m: &Wcgs,
    cache: &LetterCache,
) -> Result<Arc<NatStrategy>, CheckError> {
    let expected = semantics.kind();
    if s.kind() == expected {
        Ok(s.clone())
    } else if promote && expected == Kind::Recall {
        Ok(Arc::new(s.promote(m, cache)?))
    } else {
        Err(CheckError::KindMismatch {
            name: s.name().to_string(),
            kind: s.kind(),
            semantics,
            expected,
        })
    }
}

type Slots = Vec<Option<Arc<NatStrategy>>>;
type Strategies = Arc<Vec<Arc<NatStrategy>>>;

/// State shared by all workers of one checker.
struct Shared<'a> {
    m: &'a Wcgs,
    semantics: Semantics,
    pool: &'a GuardPool,
    cache: LetterCache,
    enums: Mutex<HashMap<(AgentId, usize), Strategies>>,
    visited: Vec<AtomicBool>,
    enumerated: AtomicUsize,
    vacuous: AtomicBool,
    /// `(node, state) -> index of the maximising strategy`.
    witness_node: AtomicUsize,
    witnesses: Mutex<BTreeMap<StateId, Arc<NatStrategy>>>,
}

impl Shared<'_> {
    fn strategies(&self, agent: AgentId, k: usize) -> Result<Strategies, CheckError> {
        if let Some(s) = self.enums.lock().unwrap().get(&(agent, k)) {
            return Ok(s.clone());
        }
        let list = Arc::new(enumerate_strategies(
            self.m,
            agent,
            k,
            self.pool,
            self.semantics.kind(),
            &self.cache,
        )?);
        let mut enums = self.enums.lock().unwrap();
        let entry = enums.entry((agent, k)).or_insert_with(|| {
            self.enumerated.fetch_add(list.len(), Ordering::Relaxed);
            list
        });
        Ok(entry.clone())
    }

    fn visit(&self, q: StateId) {
        self.visited[q].store(true, Ordering::Relaxed);
    }
}

type MemoKey = (usize, StateId, Vec<u64>);
type LassoKey = (StateId, Vec<u64>);

#[derive(Default)]
struct Caches {
    memo: HashMap<MemoKey, Value>,
    lassos: HashMap<LassoKey, Arc<(Vec<StateId>, usize)>>,
}

struct Worker<'s, 'a> {
    shared: &'s Shared<'a>,
    caches: Caches,
    jobs: usize,
}

fn slot_ids(slots: &Slots) -> Vec<u64> {
    slots.iter().map(|s| s.as_ref().map_or(0, |s| s.id())).collect()
}

impl<'s, 'a> Worker<'s, 'a> {
    fn agents_of(&self, slots: &Slots) -> Result<Vec<Arc<NatStrategy>>, CheckError> {
        let m = self.shared.m;
        (0..m.num_agents())
            .map(|a| {
                slots[a]
                    .clone()
                    .ok_or_else(|| CheckError::IncompleteAssignment(m.agent_name(a).to_string()))
            })
            .collect()
    }

    fn lasso(&mut self, slots: &Slots, q: StateId) -> Result<Arc<(Vec<StateId>, usize)>, CheckError> {
        let n = self.shared.m.num_agents();
        let key = (q, slot_ids(slots)[..n].to_vec());
        if let Some(l) = self.caches.lassos.get(&key) {
            return Ok(l.clone());
        }
        let strategies = self.agents_of(slots)?;
        let l = Arc::new(lasso_states(self.shared.m, &strategies, q));
        for &s in &l.0 {
            self.shared.visit(s);
        }
        self.caches.lassos.insert(key, l.clone());
        Ok(l)
    }

    fn eval(&mut self, node: &Node, slots: &mut Slots, q: StateId) -> Result<Value, CheckError> {
        match node {
            Node::Atom(p) => Ok(self.shared.m.weight(q, *p)),
            Node::Fun(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, slots, q))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(f.apply(&vals)?)
            }
            Node::Bind { agent, src, body } => {
                let s = match src {
                    BindSrc::Slot(i) => slots[*i].clone().ok_or_else(|| CheckError::UnboundVariable(format!("#{i}")))?,
                    BindSrc::Named(s) => s.clone(),
                };
                let old = slots[*agent].replace(s);
                let v = self.eval(body, slots, q);
                slots[*agent] = old;
                v
            }
            Node::Exists { id, .. } | Node::Next { id, .. } | Node::Until { id, .. } => {
                let key = (*id, q, slot_ids(slots));
                if let Some(v) = self.caches.memo.get(&key) {
                    return Ok(*v);
                }
                let v = self.eval_uncached(node, slots, q)?;
                self.caches.memo.insert(key, v);
                Ok(v)
            }
        }
    }

    fn eval_uncached(&mut self, node: &Node, slots: &mut Slots, q: StateId) -> Result<Value, CheckError> {
        match node {
            Node::Exists {
                id,
                slot,
                agent,
                k,
                bounded,
                body,
            } => {
                let strategies = self.shared.strategies(*agent, *k)?;
                if strategies.is_empty() {
                    self.shared.vacuous.store(true, Ordering::Relaxed);
                    return Ok(Value::MINUS_ONE);
                }
                let record = self.shared.witness_node.load(Ordering::Relaxed) == *id;
                let (best, at) = if self.jobs > 1 && strategies.len() > 1 {
                    let shared = self.shared;
                    let values: Vec<Result<Value, CheckError>> = strategies
                        .par_iter()
                        .map(|s| {
                            let mut w = Worker {
                                shared,
                                caches: Caches::default(),
                                jobs: 1,
                            };
                            let mut slots = slots.clone();
                            slots[*slot] = Some(s.clone());
                            w.eval(body, &mut slots, q)
                        })
                        .collect();
                    let mut best: Option<(Value, usize)> = None;
                    for (i, v) in values.into_iter().enumerate() {
                        let v = v?;
                        if best.is_none_or(|(b, _)| v > b) {
                            best = Some((v, i));
                        }
                    }
                    best.unwrap()
                } else {
                    let old = slots[*slot].take();
                    let mut best: Option<(Value, usize)> = None;
                    for (i, s) in strategies.iter().enumerate() {
                        slots[*slot] = Some(s.clone());
                        let v = match self.eval(body, slots, q) {
                            Ok(v) => v,
                            Err(e) => {
                                slots[*slot] = old;
                                return Err(e);
                            }
                        };
                        if best.is_none_or(|(b, _)| v > b) {
                            best = Some((v, i));
                        }
                        if *bounded && v == Value::ONE {
                            break;
                        }
                    }
                    slots[*slot] = old;
                    best.unwrap()
                };
                if record {
                    self.shared
                        .witnesses
                        .lock()
                        .unwrap()
                        .insert(q, strategies[at].clone());
                }
                Ok(best)
            }
            Node::Next { body, .. } => {
                let strategies = self.agents_of(slots)?;
                let runs: Vec<Run> = strategies.iter().map(|s| s.advance(&s.initial_run(), q)).collect();
                let next = joint_step(self.shared.m, &strategies, &runs, q);
                self.shared.visit(next);
                self.eval(body, slots, next)
            }
            Node::Until { left, right, .. } => {
                let lasso = self.lasso(slots, q)?;
                let mut best: Option<Value> = None;
                let mut prefix_min: Option<Value> = None;
                for &s in &lasso.0 {
                    if let (Some(b), Some(p)) = (best, prefix_min) {
                        if p <= b {
                            break;
                        }
                    }
                    let v2 = self.eval(right, slots, s)?;
                    let cand = prefix_min.map_or(v2, |p| p.min(v2));
                    best = Some(best.map_or(cand, |b| b.max(cand)));
                    let v1 = self.eval(left, slots, s)?;
                    prefix_min = Some(prefix_min.map_or(v1, |p| p.min(v1)));
                }
                Ok(best.expect("lassos are nonempty"))
            }
            _ => self.eval(node, slots, q),
        }
    }
}

/// A reusable evaluation context for one model, semantics and guard pool.
pub struct Checker<'a> {
    shared: Shared<'a>,
    caches: Caches,
    bundle: Option<&'a StrategyBundle>,
    promote: bool,
    jobs: usize,
}

impl<'a> Checker<'a> {
    pub fn new(m: &'a Wcgs, semantics: Semantics, pool: &'a GuardPool) -> Self {
        Checker {
            shared: Shared {
                m,
                semantics,
                pool,
                cache: LetterCache::new(),
                enums: Mutex::new(HashMap::new()),
                visited: (0..m.num_states()).map(|_| AtomicBool::new(false)).collect(),
                enumerated: AtomicUsize::new(0),
                vacuous: AtomicBool::new(false),
                witness_node: AtomicUsize::new(0),
                witnesses: Mutex::new(BTreeMap::new()),
            },
            caches: Caches::default(),
            bundle: None,
            promote: false,
            jobs: 1,
        }
    }

    pub fn with_bundle(mut self, bundle: &'a StrategyBundle) -> Self {
        self.bundle = Some(bundle);
        self
    }

    /// Embed memoryless named strategies into recall evaluation.
    pub fn with_promote(mut self, promote: bool) -> Self {
        self.promote = promote;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn model(&self) -> &'a Wcgs {
        self.shared.m
    }

    pub fn semantics(&self) -> Semantics {
        self.shared.semantics
    }

    /// The strategies an `∃≤k` quantifier for `agent` ranges over.
    pub fn strategies(&self, agent: AgentId, k: usize) -> Result<Strategies, CheckError> {
        self.shared.strategies(agent, k)
    }

    /// Value of `φ` at `q` under `χ`.
    pub fn eval(&mut self, phi: &Formula, q: StateId, chi: &Assignment) -> Result<Value, CheckError> {
        self.eval_many(phi, &[q], chi).map(|v| v[0])
    }

    fn compile(&self, phi: &Formula, chi: &Assignment) -> Result<(Node, Slots), CheckError> {
        let m = self.shared.m;
        let mut slots: Slots = Vec::new();
        for a in 0..m.num_agents() {
            slots.push(match chi.agent(a) {
                Some(s) => {
                    if s.agent() != a {
                        return Err(CheckError::AgentMismatch {
                            name: s.name().to_string(),
                            owner: s.agent_name().to_string(),
                            agent: m.agent_name(a).to_string(),
                        });
                    }
                    Some(check_kind(s, self.shared.semantics, self.promote, m, &self.shared.cache)?)
                }
                None => None,
            });
        }
        let mut scope = Vec::new();
        for (v, s) in &chi.vars {
            scope.push((v.clone(), slots.len(), Some(s.agent())));
            slots.push(Some(check_kind(s, self.shared.semantics, self.promote, m, &self.shared.cache)?));
        }
        let mut c = Compiler {
            m,
            semantics: self.shared.semantics,
            bundle: self.bundle,
            promote: self.promote,
            cache: &self.shared.cache,
            scope,
            slots: slots.len(),
        };
        let node = c.compile(phi)?;
        slots.resize(c.slots, None);
        Ok((node, slots))
    }

    fn eval_many(&mut self, phi: &Formula, states: &[StateId], chi: &Assignment) -> Result<Vec<Value>, CheckError> {
        let (node, mut slots) = self.compile(phi, chi)?;
        let mut top = &node;
        while let Node::Fun(Func::Neg, args) = top {
            top = &args[0];
        }
        if let Node::Exists { id, .. } = top {
            self.shared.witness_node.store(*id, Ordering::Relaxed);
        }
        let mut w = Worker {
            shared: &self.shared,
            caches: std::mem::take(&mut self.caches),
            jobs: self.jobs,
        };
        let mut out = Vec::new();
        let mut result = Ok(());
        for &q in states {
            self.shared.visit(q);
            match w.eval(&node, &mut slots, q) {
                Ok(v) => out.push(v),
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        self.caches = w.caches;
        result.map(|_| out)
    }

    pub fn stats(&self) -> Stats {
        Stats {
            states_visited: self.shared.visited.iter().filter(|v| v.load(Ordering::Relaxed)).count(),
            strategies_enumerated: self.shared.enumerated.load(Ordering::Relaxed),
            wall_ms: None,
        }
    }

    pub fn vacuous(&self) -> bool {
        self.shared.vacuous.load(Ordering::Relaxed)
    }

    /// Model checking of a sentence against a predicate.
    pub fn check(&mut self, phi: &Formula, target: Target, pred: &Predicate) -> Result<CheckReport, CheckError> {
        let start = Instant::now();
        let m = self.shared.m;
        let free: Vec<String> = phi.free_names(m.agents()).into_iter().collect();
        if !free.is_empty() {
            return Err(CheckError::NotASentence(free));
        }
        let states: Vec<StateId> = match target {
            Target::State(q) => vec![q],
            Target::Init => m.initial().to_vec(),
        };
        self.shared.witnesses.lock().unwrap().clear();
        let values = self.eval_many(phi, &states, &Assignment::new(m))?;
        for v in &values {
            if !v.in_unit_interval() {
                return Err(CheckError::OutOfRange(*v));
            }
        }
        let (pos, value) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, v)| (i, *v))
            .expect("at least one state");
        let witness = self
            .shared
            .witnesses
            .lock()
            .unwrap()
            .get(&states[pos])
            .map(|s| Witness {
                agent: s.agent_name().to_string(),
                strategy: s.to_string(),
            });
        let mut flags = Vec::new();
        if self.vacuous() {
            flags.push("vacuous-quantifier".to_string());
        }
        let mut stats = self.stats();
        stats.wall_ms = Some(start.elapsed().as_secs_f64() * 1000.0);
        Ok(CheckReport {
            schema: "natslf-check/1",
            formula: phi.to_string(),
            state: match target {
                Target::State(q) => m.state_name(q).to_string(),
                Target::Init => "init".to_string(),
            },
            value,
            predicate: pred.to_string(),
            holds: pred.holds(value),
            semantics: self.shared.semantics.to_string(),
            pool: self.shared.pool.label().to_string(),
            per_state: states
                .iter()
                .zip(&values)
                .map(|(&q, &v)| StateValue {
                    state: m.state_name(q).to_string(),
                    value: v,
                })
                .collect(),
            witness,
            flags,
            stats,
        })
    }
}

/// One-shot evaluation of `φ` at `q` under `χ`.
pub fn eval(
    m: &Wcgs,
    semantics: Semantics,
    chi: &Assignment,
    q: StateId,
    phi: &Formula,
    pool: &GuardPool,
) -> Result<Value, CheckError> {
    Checker::new(m, semantics, pool).eval(phi, q, chi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    State(StateId),
    /// Minimum over the initial states.
    Init,
}

impl Target {
    pub fn parse(m: &Wcgs, text: &str) -> Result<Target, CheckError> {
        if text == "init" {
            Ok(Target::Init)
        } else {
            m.state_id(text)
                .map(Target::State)
                .ok_or_else(|| CheckError::UnknownState(text.to_string()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ge,
    Le,
    Gt,
    Lt,
}

/// A set of satisfaction values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    Cmp(Cmp, Value),
    In(Value, Value),
}

impl Predicate {
    pub fn holds(&self, v: Value) -> bool {
        match *self {
            Predicate::Cmp(Cmp::Eq, w) => v == w,
            Predicate::Cmp(Cmp::Ge, w) => v >= w,
            Predicate::Cmp(Cmp::Le, w) => v <= w,
            Predicate::Cmp(Cmp::Gt, w) => v > w,
            Predicate::Cmp(Cmp::Lt, w) => v < w,
            Predicate::In(a, b) => a <= v && v <= b,
        }
    }
}

fn parse_signed(cur: &mut Cursor) -> Result<Value, SyntaxError> {
    let col = cur.col();
    let neg = cur.eat_sym('-');
    match cur.next() {
        Some(Tok::Number(n)) => {
            let v = parse_number(&n, col).map_err(|_| SyntaxError::new(col, format!("bad number `{n}`")))?;
            Ok(if neg { -v } else { v })
        }
        _ => Err(SyntaxError::new(col, "expected a number")),
    }
}

impl FromStr for Predicate {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cur = Cursor::new(s)?;
        let col = cur.col();
        let p = match cur.next() {
            Some(Tok::Sym('=')) => Predicate::Cmp(Cmp::Eq, parse_signed(&mut cur)?),
            Some(Tok::Ge) => Predicate::Cmp(Cmp::Ge, parse_signed(&mut cur)?),
            Some(Tok::Le) => Predicate::Cmp(Cmp::Le, parse_signed(&mut cur)?),
            Some(Tok::Sym('>')) => Predicate::Cmp(Cmp::Gt, parse_signed(&mut cur)?),
            Some(Tok::Sym('<')) => Predicate::Cmp(Cmp::Lt, parse_signed(&mut cur)?),
            Some(Tok::Ident(i)) if i == "in" => {
                cur.expect_sym('[')?;
                let a = parse_signed(&mut cur)?;
                cur.expect_sym(',')?;
                let b = parse_signed(&mut cur)?;
                cur.expect_sym(']')?;
                Predicate::In(a, b)
            }
            _ => return Err(SyntaxError::new(col, "expected `=`, `>=`, `<=`, `>`, `<` or `in`")),
        };
        cur.expect_end()?;
        Ok(p)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Cmp(c, v) => {
                let op = match c {
                    Cmp::Eq => "=",
                    Cmp::Ge => ">=",
                    Cmp::Le => "<=",
                    Cmp::Gt => ">",
                    Cmp::Lt => "<",
                };
                write!(f, "{op} {v}")
            }
            Predicate::In(a, b) => write!(f, "in [{a}, {b}]"),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Stats {
    pub states_visited: usize,
    pub strategies_enumerated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct StateValue {
    pub state: String,
    pub value: Value,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Witness {
    pub agent: String,
    pub strategy: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub schema: &'static str,
    pub formula: String,
    pub state: String,
    pub value: Value,
    pub predicate: String,
    pub holds: bool,
    pub semantics: String,
    pub pool: String,
    pub per_state: Vec<StateValue>,
    /// Maximising strategy of the outermost quantifier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub flags: Vec<String>,
    pub stats: Stats,
}
