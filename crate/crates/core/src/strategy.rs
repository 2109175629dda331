//! Natural strategies: guarded action lists, matching, complexity and
//! bounded enumeration over a guard pool.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::func::FuncError;
use crate::regex::{compile_guard, parse_regex, GuardAutomaton, GuardRegex, RegexError};
use crate::value::Value;
use crate::wcgs::{ActionId, AgentId, History, StateId, Wcgs};
use crate::we::{parse_we, WeError, WeFormula};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Memoryless,
    Recall,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Memoryless => "memoryless",
            Kind::Recall => "recall",
        })
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "memoryless" => Ok(Kind::Memoryless),
            "recall" => Ok(Kind::Recall),
            other => Err(format!("unknown strategy kind `{other}` (memoryless|recall)")),
        }
    }
}

/// `ir` (memoryless) or `iR` (perfect recall) strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Ir,
    IR,
}

impl Semantics {
    pub fn kind(self) -> Kind {
        match self {
            Semantics::Ir => Kind::Memoryless,
            Semantics::IR => Kind::Recall,
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Ir => "ir",
            Semantics::IR => "iR",
        })
    }
}

impl FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ir" => Ok(Semantics::Ir),
            "iR" => Ok(Semantics::IR),
            other => Err(format!("unknown semantics `{other}` (ir|iR)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error(transparent)]
    We(#[from] WeError),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error("guard evaluation failed: {0}")]
    Func(#[from] FuncError),
    #[error("strategy `{0}` has no guarded actions")]
    Empty(String),
    #[error("strategy `{name}`: the last guard must be {expected}")]
    BadFinalGuard { name: String, expected: &'static str },
    #[error("strategy `{0}`: memoryless strategies cannot use regular guards")]
    RegexInMemoryless(String),
    #[error("strategy `{name}`: final action `{action}` is not legal in every state")]
    FinalActionNotAlwaysLegal { name: String, action: String },
    #[error("strategy `{name}`: action `{action}` can be selected at `{state}` where it is illegal")]
    IllegalWhereFiring {
        name: String,
        action: String,
        state: String,
    },
    #[error("strategy `{name}` for agent `{agent}`: guard `{guard}` conditions on the knowledge of another agent")]
    ForeignKnowledge {
        name: String,
        agent: String,
        guard: String,
    },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("duplicate strategy name `{0}`")]
    Duplicate(String),
    #[error("guard pool is empty")]
    EmptyPool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Guard {
    /// A WE formula checked at the last state of the history.
    State(WeFormula),
    Regex(GuardRegex),
}

impl Guard {
    pub fn top() -> Self {
        Guard::State(WeFormula::Top)
    }

    pub fn size(&self) -> usize {
        match self {
            Guard::State(f) => f.size(),
            Guard::Regex(r) => r.size(),
        }
    }

    /// `⊤` or `⊤*`.
    pub fn is_catch_all(&self) -> bool {
        match self {
            Guard::State(f) => f.is_top(),
            Guard::Regex(r) => r.is_top_star(),
        }
    }

    fn letters(&self) -> Vec<&WeFormula> {
        match self {
            Guard::State(f) => vec![f],
            Guard::Regex(r) => r.letters(),
        }
    }

    /// Parses a guard: regular if it contains a braced letter, WE otherwise.
    pub fn parse(text: &str) -> Result<Guard, StrategyError> {
        if text.contains('{') {
            Ok(Guard::Regex(parse_regex(text)?))
        } else {
            Ok(Guard::State(parse_we(text)?))
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::State(w) => write!(f, "{w}"),
            Guard::Regex(r) => write!(f, "{r}"),
        }
    }
}

/// Per-model truth tables of WE letters, shared between strategies.
#[derive(Debug, Default)]
pub struct LetterCache {
    tables: Mutex<HashMap<WeFormula, Arc<Vec<bool>>>>,
}

impl LetterCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// States where `f` has value exactly 1.
    pub fn truth(&self, m: &Wcgs, f: &WeFormula) -> Result<Arc<Vec<bool>>, StrategyError> {
        if let Some(t) = self.tables.lock().unwrap().get(f) {
            return Ok(t.clone());
        }
        let bound = f.bind(m)?;
        let table = (0..m.num_states())
            .map(|q| Ok(bound.eval(m, q)? == Value::ONE))
            .collect::<Result<Vec<bool>, StrategyError>>()?;
        let table = Arc::new(table);
        self.tables.lock().unwrap().insert(f.clone(), table.clone());
        Ok(table)
    }
}

/// A guard with its automaton and per-state enabled masks.
#[derive(Debug, Clone)]
pub struct CompiledGuard {
    automaton: Option<Arc<GuardAutomaton>>,
    /// State guards: bit 0 = fires. Regular guards: enabled positions.
    masks: Arc<Vec<u64>>,
}

impl CompiledGuard {
    pub fn new(m: &Wcgs, guard: &Guard, cache: &LetterCache) -> Result<Self, StrategyError> {
        match guard {
            Guard::State(f) => {
                let t = cache.truth(m, f)?;
                Ok(CompiledGuard {
                    automaton: None,
                    masks: Arc::new(t.iter().map(|&b| u64::from(b)).collect()),
                })
            }
            Guard::Regex(r) => {
                let a = compile_guard(r)?;
                let tables = a
                    .letters()
                    .iter()
                    .map(|l| cache.truth(m, l))
                    .collect::<Result<Vec<_>, _>>()?;
                let masks = (0..m.num_states())
                    .map(|q| {
                        let letters = tables
                            .iter()
                            .enumerate()
                            .filter(|(_, t)| t[q])
                            .fold(0u64, |acc, (i, _)| acc | 1 << i);
                        a.positions_for_letters(letters)
                    })
                    .collect();
                Ok(CompiledGuard {
                    automaton: Some(Arc::new(a)),
                    masks: Arc::new(masks),
                })
            }
        }
    }

    /// States at which some consistent history can end.
    fn firing_states(&self, m: &Wcgs) -> Vec<StateId> {
        match &self.automaton {
            None => (0..m.num_states()).filter(|&q| self.masks[q] & 1 == 1).collect(),
            Some(a) => {
                let mut seen: HashSet<(u64, StateId)> = HashSet::new();
                let mut stack = Vec::new();
                for q in 0..m.num_states() {
                    let run = a.step(a.initial(), self.masks[q]);
                    if run != 0 && seen.insert((run, q)) {
                        stack.push((run, q));
                    }
                }
                let mut firing = vec![false; m.num_states()];
                while let Some((run, q)) = stack.pop() {
                    if a.accepting(run) {
                        firing[q] = true;
                    }
                    for &r in m.successors(q) {
                        let next = a.step(run, self.masks[r]);
                        if next != 0 && seen.insert((next, r)) {
                            stack.push((next, r));
                        }
                    }
                }
                (0..m.num_states()).filter(|&q| firing[q]).collect()
            }
        }
    }
}

/// Automaton runs of a strategy's regular guards.
pub type Run = Box<[u64]>;

pub struct NatStrategy {
    id: u64,
    name: String,
    agent: AgentId,
    agent_name: String,
    kind: Kind,
    pairs: Vec<(Guard, ActionId)>,
    action_names: Vec<String>,
    compiled: Vec<CompiledGuard>,
    /// Indices of pairs with regular guards, in order.
    regex_pairs: Vec<usize>,
    legal: Arc<Vec<Vec<bool>>>,
    /// Memoryless matching table: state -> pair index.
    table: OnceLock<Vec<u32>>,
}

impl fmt::Debug for NatStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self)
    }
}

impl fmt::Display for NatStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (g, _)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({g}, {})", self.action_names[i])?;
        }
        write!(f, ")")
    }
}

impl NatStrategy {
    /// Builds and validates a strategy against `m`.
    pub fn new(
        m: &Wcgs,
        name: impl Into<String>,
        agent: AgentId,
        kind: Kind,
        pairs: Vec<(Guard, ActionId)>,
        cache: &LetterCache,
    ) -> Result<Self, StrategyError> {
        let compiled = pairs
            .iter()
            .map(|(g, _)| CompiledGuard::new(m, g, cache))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_compiled(m, name.into(), agent, kind, pairs, compiled, true)
    }

    fn from_compiled(
        m: &Wcgs,
        name: String,
        agent: AgentId,
        kind: Kind,
        pairs: Vec<(Guard, ActionId)>,
        compiled: Vec<CompiledGuard>,
        validate: bool,
    ) -> Result<Self, StrategyError> {
        let agent_name = m.agent_name(agent).to_string();
        if validate {
            let (last, final_action) = pairs.last().ok_or_else(|| StrategyError::Empty(name.clone()))?;
            match kind {
                Kind::Memoryless => {
                    if pairs.iter().any(|(g, _)| matches!(g, Guard::Regex(_))) {
                        return Err(StrategyError::RegexInMemoryless(name));
                    }
                    if !last.is_catch_all() {
                        return Err(StrategyError::BadFinalGuard {
                            name,
                            expected: "`top`",
                        });
                    }
                }
                Kind::Recall => {
                    if !last.is_catch_all() {
                        return Err(StrategyError::BadFinalGuard {
                            name,
                            expected: "`{top}*` (or `top`)",
                        });
                    }
                }
            }
            for (g, _) in &pairs {
                let foreign = g
                    .letters()
                    .iter()
                    .flat_map(|l| l.outer_agents())
                    .any(|a| a != agent_name);
                if foreign {
                    return Err(StrategyError::ForeignKnowledge {
                        name,
                        agent: agent_name,
                        guard: g.to_string(),
                    });
                }
            }
            if !(0..m.num_states()).all(|q| m.is_legal(agent, q, *final_action)) {
                return Err(StrategyError::FinalActionNotAlwaysLegal {
                    name,
                    action: m.action_name(*final_action).to_string(),
                });
            }
            for ((_, a), c) in pairs.iter().zip(&compiled) {
                if (0..m.num_states()).all(|q| m.is_legal(agent, q, *a)) {
                    continue;
                }
                if let Some(q) = c.firing_states(m).into_iter().find(|&q| !m.is_legal(agent, q, *a)) {
                    return Err(StrategyError::IllegalWhereFiring {
                        name,
                        action: m.action_name(*a).to_string(),
                        state: m.state_name(q).to_string(),
                    });
                }
            }
        }
        let regex_pairs = compiled
            .iter()
            .enumerate()
            .filter(|(_, c)| c.automaton.is_some())
            .map(|(i, _)| i)
            .collect();
        let legal = (0..m.num_states())
            .map(|q| (0..m.actions().len()).map(|a| m.is_legal(agent, q, a)).collect())
            .collect();
        let action_names = pairs.iter().map(|(_, a)| m.action_name(*a).to_string()).collect();
        Ok(NatStrategy {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name,
            agent,
            agent_name,
            kind,
            pairs,
            action_names,
            compiled,
            regex_pairs,
            legal: Arc::new(legal),
            table: OnceLock::new(),
        })
    }

    /// Unique identity, used in memoization keys.
    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn agent(&self) -> AgentId {
        self.agent
    }
    pub fn agent_name(&self) -> &str {
        &self.agent_name
    }
    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn pairs(&self) -> &[(Guard, ActionId)] {
        &self.pairs
    }
    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether the choice depends only on the last state.
    pub fn is_stateless(&self) -> bool {
        self.regex_pairs.is_empty()
    }

    pub fn compl(&self) -> usize {
        self.pairs.iter().map(|(g, _)| g.size()).sum()
    }

    /// Renames, keeping identity semantics (a fresh id is assigned).
    pub fn renamed(&self, name: impl Into<String>) -> NatStrategy {
        NatStrategy {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            agent: self.agent,
            agent_name: self.agent_name.clone(),
            kind: self.kind,
            pairs: self.pairs.clone(),
            action_names: self.action_names.clone(),
            compiled: self.compiled.clone(),
            regex_pairs: self.regex_pairs.clone(),
            legal: self.legal.clone(),
            table: OnceLock::new(),
        }
    }

    /// The recall embedding of a memoryless strategy: every guard `ψ`
    /// becomes `⊤*·ψ` and the final `⊤` becomes `⊤*`.
    pub fn promote(&self, m: &Wcgs, cache: &LetterCache) -> Result<NatStrategy, StrategyError> {
        if self.kind == Kind::Recall {
            return Ok(self.renamed(self.name.clone()));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|(g, a)| {
                let g = match g {
                    Guard::State(f) if f.is_top() => Guard::Regex(GuardRegex::top_star()),
                    Guard::State(f) => Guard::Regex(GuardRegex::concat(
                        GuardRegex::top_star(),
                        GuardRegex::Letter(f.clone()),
                    )),
                    Guard::Regex(r) => Guard::Regex(r.clone()),
                };
                (g, *a)
            })
            .collect();
        NatStrategy::new(m, self.name.clone(), self.agent, Kind::Recall, pairs, cache)
    }

    pub fn initial_run(&self) -> Run {
        self.regex_pairs
            .iter()
            .map(|&i| self.compiled[i].automaton.as_ref().unwrap().initial())
            .collect()
    }

    /// Feeds state `q` to every regular guard.
    pub fn advance(&self, run: &[u64], q: StateId) -> Run {
        self.regex_pairs
            .iter()
            .zip(run)
            .map(|(&i, &r)| {
                let c = &self.compiled[i];
                c.automaton.as_ref().unwrap().step(r, c.masks[q])
            })
            .collect()
    }

    fn pair_consistent(&self, i: usize, slot: Option<usize>, run: &[u64], q: StateId) -> bool {
        let c = &self.compiled[i];
        match &c.automaton {
            None => c.masks[q] & 1 == 1,
            Some(a) => a.accepting(run[slot.unwrap()]),
        }
    }

    fn match_slow(&self, run: &[u64], q: StateId) -> usize {
        let mut slot = 0;
        for (i, c) in self.compiled.iter().enumerate() {
            let this_slot = if c.automaton.is_some() {
                slot += 1;
                Some(slot - 1)
            } else {
                None
            };
            if self.pair_consistent(i, this_slot, run, q) && self.legal[q][self.pairs[i].1] {
                return i;
            }
        }
        // The final catch-all is consistent with every history and legal everywhere.
        self.pairs.len() - 1
    }

    /// 0-based index of the matched pair, given the run after consuming `q`.
    pub fn match_at(&self, run: &[u64], q: StateId) -> usize {
        if self.is_stateless() {
            let table = self.table.get_or_init(|| {
                (0..self.legal.len())
                    .map(|q| self.match_slow(&[], q) as u32)
                    .collect()
            });
            table[q] as usize
        } else {
            self.match_slow(run, q)
        }
    }

    pub fn action_at(&self, run: &[u64], q: StateId) -> ActionId {
        self.pairs[self.match_at(run, q)].1
    }

    /// Run after consuming a whole history.
    pub fn run_on(&self, h: &[StateId]) -> Run {
        let mut run = self.initial_run();
        for &q in h {
            run = self.advance(&run, q);
        }
        run
    }
}

/// Whether `h` is consistent with `r`: some word of `L(r)` of length `|h|`
/// has every letter valued exactly 1 at the matching state.
pub fn consistent(m: &Wcgs, h: &History, r: &GuardRegex) -> Result<bool, StrategyError> {
    let cache = LetterCache::new();
    let c = CompiledGuard::new(m, &Guard::Regex(r.clone()), &cache)?;
    let a = c.automaton.as_ref().unwrap();
    let mut run = a.initial();
    for &q in h.states() {
        run = a.step(run, c.masks[q]);
    }
    Ok(a.accepting(run))
}

/// 1-based index of the first pair consistent with `h` whose action is legal
/// at `last(h)`.
pub fn match_index(h: &History, s: &NatStrategy) -> usize {
    let run = s.run_on(h.states());
    s.match_at(&run, h.last()) + 1
}

pub fn select_action(h: &History, s: &NatStrategy) -> ActionId {
    let run = s.run_on(h.states());
    s.action_at(&run, h.last())
}

pub fn compl(s: &NatStrategy) -> usize {
    s.compl()
}

/// A declared finite set of candidate guards. `$self` in an entry stands for
/// the quantified agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardPool {
    label: String,
    entries: Vec<String>,
}

impl GuardPool {
    pub fn new(label: impl Into<String>, entries: Vec<String>) -> Result<Self, StrategyError> {
        if entries.is_empty() {
            return Err(StrategyError::EmptyPool);
        }
        Ok(GuardPool {
            label: label.into(),
            entries,
        })
    }

    /// One guard per line; `#` starts a comment.
    pub fn parse(label: impl Into<String>, text: &str) -> Result<Self, StrategyError> {
        let entries: Vec<String> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        for (i, e) in entries.iter().enumerate() {
            Guard::parse(&e.replace("$self", "x")).map_err(|err| StrategyError::File {
                line: i + 1,
                msg: err.to_string(),
            })?;
        }
        GuardPool::new(label, entries)
    }

    /// The pool `{⊤}`: constant strategies only.
    pub fn top_only() -> Self {
        GuardPool {
            label: "{top}".into(),
            entries: vec!["top".into()],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// Guards usable by `agent` under `kind`, deduplicated, in pool order.
    /// Guards conditioning on another agent's knowledge are dropped, as are
    /// regular guards for memoryless strategies.
    pub fn guards_for(&self, m: &Wcgs, agent: AgentId, kind: Kind) -> Result<Vec<Guard>, StrategyError> {
        let name = m.agent_name(agent);
        let mut out: Vec<Guard> = Vec::new();
        for e in &self.entries {
            let g = Guard::parse(&e.replace("$self", name))?;
            if kind == Kind::Memoryless && matches!(g, Guard::Regex(_)) {
                continue;
            }
            for l in g.letters() {
                l.bind(m)?;
            }
            if g.letters().iter().flat_map(|l| l.outer_agents()).any(|a| a != name) {
                continue;
            }
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(out)
    }
}

/// Every strategy of `agent` with guards from `pool` and complexity at most
/// `k`, in canonical order: fewer pairs first, then pool order of the guard
/// sequence, then action order. Non-final guards are pairwise distinct and
/// never the catch-all; the final pair is `(⊤, a)` for an always-legal `a`.
pub fn enumerate_strategies(
    m: &Wcgs,
    agent: AgentId,
    k: usize,
    pool: &GuardPool,
    kind: Kind,
    cache: &LetterCache,
) -> Result<Vec<Arc<NatStrategy>>, StrategyError> {
    let guards = pool.guards_for(m, agent, kind)?;
    let finals = m.always_legal(agent);
    if k == 0 || finals.is_empty() {
        return Ok(Vec::new());
    }
    let top = Guard::top();
    let top_compiled = CompiledGuard::new(m, &top, cache)?;
    let mut candidates: Vec<(Guard, CompiledGuard, Vec<ActionId>)> = Vec::new();
    for g in guards.into_iter().filter(|g| !g.is_catch_all()) {
        if g.size() + 1 > k {
            continue;
        }
        let c = CompiledGuard::new(m, &g, cache)?;
        let firing = c.firing_states(m);
        let actions: Vec<ActionId> = (0..m.actions().len())
            .filter(|&a| {
                (0..m.num_states()).any(|q| m.is_legal(agent, q, a))
                    && firing.iter().all(|&q| m.is_legal(agent, q, a))
            })
            .collect();
        if !actions.is_empty() {
            candidates.push((g, c, actions));
        }
    }
    let mut seqs: Vec<Vec<usize>> = vec![Vec::new()];
    let mut by_len: Vec<Vec<Vec<usize>>> = Vec::new();
    // Breadth-first over sequence length keeps the canonical order.
    while !seqs.is_empty() {
        let mut next = Vec::new();
        for s in &seqs {
            let cost: usize = s.iter().map(|&i| candidates[i].0.size()).sum::<usize>() + 1;
            for (i, (g, _, _)) in candidates.iter().enumerate() {
                if !s.contains(&i) && cost + g.size() <= k {
                    let mut t = s.clone();
                    t.push(i);
                    next.push(t);
                }
            }
        }
        by_len.push(std::mem::take(&mut seqs));
        seqs = next;
    }
    let mut out = Vec::new();
    let agent_name = m.agent_name(agent).to_string();
    for seq in by_len.into_iter().flatten() {
        let mut choice = vec![0usize; seq.len() + 1];
        loop {
            let mut pairs = Vec::with_capacity(seq.len() + 1);
            let mut compiled = Vec::with_capacity(seq.len() + 1);
            for (pos, &i) in seq.iter().enumerate() {
                let (g, c, acts) = &candidates[i];
                pairs.push((g.clone(), acts[choice[pos]]));
                compiled.push(c.clone());
            }
            pairs.push((top.clone(), finals[choice[seq.len()]]));
            compiled.push(top_compiled.clone());
            let name = format!("{agent_name}#{}", out.len() + 1);
            out.push(Arc::new(NatStrategy::from_compiled(
                m, name, agent, kind, pairs, compiled, false,
            )?));
            // Odometer over action choices, last coordinate fastest.
            let mut pos = seq.len() + 1;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                let limit = if pos == seq.len() {
                    finals.len()
                } else {
                    candidates[seq[pos]].2.len()
                };
                choice[pos] += 1;
                if choice[pos] < limit {
                    break;
                }
                choice[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    Ok(out)
}

/// Named strategies from a strategy file.
#[derive(Debug, Default, Clone)]
pub struct StrategyBundle {
    order: Vec<String>,
    by_name: HashMap<String, Arc<NatStrategy>>,
}

impl StrategyBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: NatStrategy) -> Result<Arc<NatStrategy>, StrategyError> {
        if self.by_name.contains_key(s.name()) {
            return Err(StrategyError::Duplicate(s.name().to_string()));
        }
        let s = Arc::new(s);
        self.order.push(s.name().to_string());
        self.by_name.insert(s.name().to_string(), s.clone());
        Ok(s)
    }

    pub fn get(&self, name: &str) -> Option<&Arc<NatStrategy>> {
        self.by_name.get(name)
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<NatStrategy>> {
        self.order.iter().map(move |n| &self.by_name[n])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Parses a strategy file:
///
/// ```text
/// strategy win for 2 kind memoryless:
///   guard K[2](p) -> a2
///   guard top -> b2
/// ```
pub fn parse_strategy_file(text: &str, m: &Wcgs, cache: &LetterCache) -> Result<StrategyBundle, StrategyError> {
    struct Pending {
        line: usize,
        name: String,
        agent: AgentId,
        kind: Kind,
        pairs: Vec<(Guard, ActionId)>,
    }
    let mut bundle = StrategyBundle::new();
    let mut current: Option<Pending> = None;
    let finish = |p: Pending, bundle: &mut StrategyBundle| -> Result<(), StrategyError> {
        let line = p.line;
        let s = NatStrategy::new(m, p.name, p.agent, p.kind, p.pairs, cache).map_err(|e| StrategyError::File {
            line,
            msg: e.to_string(),
        })?;
        bundle.insert(s).map(|_| ())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| StrategyError::File { line, msg };
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix("strategy ") {
            if let Some(p) = current.take() {
                finish(p, &mut bundle)?;
            }
            let rest = rest
                .trim()
                .strip_suffix(':')
                .ok_or_else(|| err("header must end with `:`".into()))?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 5 || toks[1] != "for" || toks[3] != "kind" {
                return Err(err("expected `strategy <name> for <agent> kind <memoryless|recall>:`".into()));
            }
            let agent = m
                .agent_id(toks[2])
                .ok_or_else(|| err(format!("unknown agent `{}`", toks[2])))?;
            let kind: Kind = toks[4].parse().map_err(err)?;
            current = Some(Pending {
                line,
                name: toks[0].to_string(),
                agent,
                kind,
                pairs: Vec::new(),
            });
        } else if let Some(rest) = l.strip_prefix("guard ") {
            let p = current
                .as_mut()
                .ok_or_else(|| err("`guard` line outside a strategy".into()))?;
            let (g, a) = rest
                .rsplit_once("->")
                .ok_or_else(|| err("expected `guard <condition> -> <action>`".into()))?;
            let guard = Guard::parse(g.trim()).map_err(|e| err(e.to_string()))?;
            let action = m
                .action_id(a.trim())
                .ok_or_else(|| err(format!("unknown action `{}`", a.trim())))?;
            p.pairs.push((guard, action));
        } else {
            return Err(err(format!("unexpected line `{l}`")));
        }
    }
    if let Some(p) = current.take() {
        finish(p, &mut bundle)?;
    }
    Ok(bundle)
}
