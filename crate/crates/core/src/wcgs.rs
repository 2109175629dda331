//! Weighted concurrent game structures with imperfect information.
//!
//! A [`Wcgs`] is immutable once built. All identifiers are opaque strings;
//! internally everything is indexed by declaration order, which also fixes the
//! iteration order of every enumeration in the crate.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::value::Value;

pub type AgentId = usize;
pub type ActionId = usize;
pub type StateId = usize;
pub type PropId = usize;

const NO_SUCC: u32 = u32::MAX;
const MAX_TRANSITION_CELLS: usize = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("no legal actions for agent `{agent}` at state `{state}`")]
    MissingLegality { agent: String, state: String },
    #[error("non-uniform legality for agent `{agent}`: `{first}` and `{second}` are indistinguishable but offer different actions")]
    NonuniformLegality {
        agent: String,
        first: String,
        second: String,
    },
    #[error("no transition from `{state}` under legal profile ({})", profile.join(","))]
    PartialTransition { state: String, profile: Vec<String> },
    #[error("conflicting transitions from `{state}` under ({}): `{first}` vs `{second}`", profile.join(","))]
    ConflictingTransition {
        state: String,
        profile: Vec<String>,
        first: String,
        second: String,
    },
    #[error("weight {value} of `{prop}` at `{state}` is outside [-1, 1]")]
    WeightOutOfRange {
        state: String,
        prop: String,
        value: Value,
    },
    #[error("observation classes of agent `{agent}` overlap at `{state}`")]
    ObsNotPartition { agent: String, state: String },
    #[error("model has no initial state")]
    NoInitialState,
    #[error("action `{action}` is not legal for agent `{agent}` at `{state}`")]
    IllegalAction {
        agent: String,
        action: String,
        state: String,
    },
    #[error("profile has {got} actions for {expected} agents")]
    ProfileLength { expected: usize, got: usize },
    #[error("model too large: {0}")]
    TooLarge(String),
    #[error("unknown fixture `{0}` (expected one of G1, G1', G2, G2')")]
    UnknownFixture(String),
}

#[derive(Debug, Clone)]
struct Names {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Names {
    fn new(kind: &'static str, names: Vec<String>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(ModelError::Duplicate {
                    kind,
                    name: n.clone(),
                });
            }
        }
        Ok(Names { names, index })
    }
}

/// Per-agent observation partition.
#[derive(Debug, Clone)]
struct Partition {
    class_of: Vec<usize>,
    classes: Vec<Vec<StateId>>,
}

#[derive(Debug, Clone)]
pub struct Wcgs {
    agents: Names,
    actions: Names,
    states: Names,
    props: Names,
    /// `[agent][state]`, sorted action ids.
    legal: Vec<Vec<Vec<ActionId>>>,
    /// Dense table indexed by `state * radix^n + profile code`.
    trans: Vec<u32>,
    profiles_per_state: usize,
    weights: Vec<Value>,
    initial: Vec<StateId>,
    obs: Vec<Partition>,
    succ_sets: Vec<Vec<StateId>>,
}

impl Wcgs {
    pub fn agents(&self) -> &[String] {
        &self.agents.names
    }
    pub fn actions(&self) -> &[String] {
        &self.actions.names
    }
    pub fn states(&self) -> &[String] {
        &self.states.names
    }
    pub fn props(&self) -> &[String] {
        &self.props.names
    }
    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }
    pub fn num_agents(&self) -> usize {
        self.agents.names.len()
    }
    pub fn num_states(&self) -> usize {
        self.states.names.len()
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agents.index.get(name).copied()
    }
    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.index.get(name).copied()
    }
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.index.get(name).copied()
    }
    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.props.index.get(name).copied()
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agents.names[a]
    }
    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions.names[a]
    }
    pub fn state_name(&self, q: StateId) -> &str {
        &self.states.names[q]
    }

    pub fn legal(&self, agent: AgentId, q: StateId) -> &[ActionId] {
        &self.legal[agent][q]
    }

    pub fn is_legal(&self, agent: AgentId, q: StateId, action: ActionId) -> bool {
        self.legal[agent][q].binary_search(&action).is_ok()
    }

    /// Actions legal for `agent` in every state.
    pub fn always_legal(&self, agent: AgentId) -> Vec<ActionId> {
        (0..self.actions.names.len())
            .filter(|&a| (0..self.num_states()).all(|q| self.is_legal(agent, q, a)))
            .collect()
    }

    pub fn weight(&self, q: StateId, p: PropId) -> Value {
        self.weights[q * self.props.names.len() + p]
    }

    fn profile_code(&self, profile: &[ActionId]) -> usize {
        let radix = self.actions.names.len();
        profile.iter().rev().fold(0, |acc, &a| acc * radix + a)
    }

    /// Successor under a profile of legal actions, one per agent in
    /// declaration order.
    pub fn successor(&self, q: StateId, profile: &[ActionId]) -> Result<StateId, ModelError> {
        if profile.len() != self.num_agents() {
            return Err(ModelError::ProfileLength {
                expected: self.num_agents(),
                got: profile.len(),
            });
        }
        for (agent, &act) in profile.iter().enumerate() {
            if act >= self.actions.names.len() || !self.is_legal(agent, q, act) {
                return Err(ModelError::IllegalAction {
                    agent: self.agents.names[agent].clone(),
                    action: self
                        .actions
                        .names
                        .get(act)
                        .cloned()
                        .unwrap_or_else(|| format!("#{act}")),
                    state: self.states.names[q].clone(),
                });
            }
        }
        Ok(self.successor_unchecked(q, profile))
    }

    /// Successor without legality checks; the profile must be legal.
    pub fn successor_unchecked(&self, q: StateId, profile: &[ActionId]) -> StateId {
        let cell = self.trans[q * self.profiles_per_state + self.profile_code(profile)];
        debug_assert_ne!(cell, NO_SUCC);
        cell as StateId
    }

    /// Name-based successor lookup.
    pub fn successor_by_name(&self, q: &str, profile: &[&str]) -> Result<&str, ModelError> {
        let qi = self.state_id(q).ok_or_else(|| unknown("state", q))?;
        let ids = profile
            .iter()
            .map(|a| self.action_id(a).ok_or_else(|| unknown("action", a)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.state_name(self.successor(qi, &ids)?))
    }

    /// The block of `agent`'s observation partition containing `q`.
    pub fn obs_class(&self, agent: AgentId, q: StateId) -> &[StateId] {
        let part = &self.obs[agent];
        &part.classes[part.class_of[q]]
    }

    pub fn indistinguishable(&self, agent: AgentId, q: StateId, r: StateId) -> bool {
        self.obs[agent].class_of[q] == self.obs[agent].class_of[r]
    }

    /// States reachable in one step from `q` under some legal profile.
    pub fn successors(&self, q: StateId) -> &[StateId] {
        &self.succ_sets[q]
    }

    /// Every legal action profile at `q`, in lexicographic declaration order.
    pub fn legal_profiles(&self, q: StateId) -> Vec<Vec<ActionId>> {
        let mut out = vec![Vec::new()];
        for agent in 0..self.num_agents() {
            let mut next = Vec::with_capacity(out.len() * self.legal[agent][q].len());
            for prefix in &out {
                for &a in &self.legal[agent][q] {
                    let mut p = prefix.clone();
                    p.push(a);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// States reachable from the initial states.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.initial.clone();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &r in &self.succ_sets[q] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..self.num_states()).filter(|&q| seen[q]).collect()
    }

    /// Serializes into the line-oriented model format accepted by
    /// [`parse_model`]. Transitions are written out explicitly.
    pub fn to_model_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[String]| v.join(" ");
        let _ = writeln!(out, "agents: {}", join(&self.agents.names));
        let _ = writeln!(out, "actions: {}", join(&self.actions.names));
        let _ = writeln!(out, "states: {}", join(&self.states.names));
        let _ = writeln!(out, "props: {}", join(&self.props.names));
        let init: Vec<String> = self.initial.iter().map(|&q| self.state_name(q).to_string()).collect();
        let _ = writeln!(out, "init: {}", join(&init));
        for (agent, per_state) in self.legal.iter().enumerate() {
            let acts = |q: StateId| -> String {
                per_state[q]
                    .iter()
                    .map(|&a| self.action_name(a))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            if per_state.iter().all(|l| *l == per_state[0]) {
                let _ = writeln!(out, "legal: {} _ {}", self.agent_name(agent), acts(0));
            } else {
                for q in 0..self.num_states() {
                    let _ = writeln!(out, "legal: {} {} {}", self.agent_name(agent), self.state_name(q), acts(q));
                }
            }
        }
        for q in 0..self.num_states() {
            for profile in self.legal_profiles(q) {
                let names: Vec<&str> = profile.iter().map(|&a| self.action_name(a)).collect();
                let _ = writeln!(
                    out,
                    "trans: {} ({}) -> {}",
                    self.state_name(q),
                    names.join(","),
                    self.state_name(self.successor_unchecked(q, &profile))
                );
            }
        }
        for q in 0..self.num_states() {
            for (p, prop) in self.props.names.iter().enumerate() {
                let w = self.weight(q, p);
                if w != Value::MINUS_ONE {
                    let _ = writeln!(out, "weight: {} {} {}", self.state_name(q), prop, w);
                }
            }
        }
        for (agent, part) in self.obs.iter().enumerate() {
            let blocks: Vec<String> = part
                .classes
                .iter()
                .filter(|c| c.len() > 1)
                .map(|c| {
                    let names: Vec<&str> = c.iter().map(|&q| self.state_name(q)).collect();
                    format!("{{{}}}", names.join(" "))
                })
                .collect();
            if !blocks.is_empty() {
                let _ = writeln!(out, "obs: {} {}", self.agent_name(agent), blocks.join(" "));
            }
        }
        out
    }
}

fn unknown(kind: &'static str, name: &str) -> ModelError {
    ModelError::Unknown {
        kind,
        name: name.to_string(),
    }
}

/// Incremental construction of a [`Wcgs`]; [`WcgsBuilder::build`] validates
/// every structural invariant.
#[derive(Debug)]
pub struct WcgsBuilder {
    agents: Names,
    actions: Names,
    states: Names,
    props: Names,
    legal: Vec<Vec<Option<Vec<ActionId>>>>,
    trans: Vec<u32>,
    profiles_per_state: usize,
    weights: Vec<Value>,
    initial: Vec<StateId>,
    obs: Vec<Option<Vec<Vec<StateId>>>>,
}

impl WcgsBuilder {
    pub fn new(
        agents: Vec<String>,
        actions: Vec<String>,
        states: Vec<String>,
        props: Vec<String>,
    ) -> Result<Self, ModelError> {
        let agents = Names::new("agent", agents)?;
        let actions = Names::new("action", actions)?;
        let states = Names::new("state", states)?;
        let props = Names::new("proposition", props)?;
        let n = agents.names.len();
        let profiles_per_state = (0..n)
            .try_fold(1usize, |acc, _| acc.checked_mul(actions.names.len()))
            .filter(|p| p.checked_mul(states.names.len().max(1)).is_some_and(|c| c <= MAX_TRANSITION_CELLS))
            .ok_or_else(|| {
                ModelError::TooLarge(format!(
                    "{} states x {}^{} profiles exceeds the transition table limit",
                    states.names.len(),
                    actions.names.len(),
                    n
                ))
            })?;
        let ns = states.names.len();
        let np = props.names.len();
        Ok(WcgsBuilder {
            legal: vec![vec![None; ns]; n],
            trans: vec![NO_SUCC; ns * profiles_per_state],
            profiles_per_state,
            weights: vec![Value::MINUS_ONE; ns * np],
            initial: Vec::new(),
            obs: vec![None; n],
            agents,
            actions,
            states,
            props,
        })
    }

    pub fn agent_id(&self, name: &str) -> Result<AgentId, ModelError> {
        self.agents.index.get(name).copied().ok_or_else(|| unknown("agent", name))
    }
    pub fn action_id(&self, name: &str) -> Result<ActionId, ModelError> {
        self.actions.index.get(name).copied().ok_or_else(|| unknown("action", name))
    }
    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.states.index.get(name).copied().ok_or_else(|| unknown("state", name))
    }
    pub fn prop_id(&self, name: &str) -> Result<PropId, ModelError> {
        self.props.index.get(name).copied().ok_or_else(|| unknown("proposition", name))
    }
    pub fn num_states(&self) -> usize {
        self.states.names.len()
    }
    pub fn num_agents(&self) -> usize {
        self.agents.names.len()
    }

    pub fn set_legal(&mut self, agent: AgentId, q: StateId, mut actions: Vec<ActionId>) {
        actions.sort_unstable();
        actions.dedup();
        self.legal[agent][q] = Some(actions);
    }

    pub fn legal(&self, agent: AgentId, q: StateId) -> Option<&[ActionId]> {
        self.legal[agent][q].as_deref()
    }

    fn code(&self, profile: &[ActionId]) -> usize {
        let radix = self.actions.names.len();
        profile.iter().rev().fold(0, |acc, &a| acc * radix + a)
    }

    pub fn set_trans(&mut self, q: StateId, profile: &[ActionId], target: StateId) -> Result<(), ModelError> {
        if profile.len() != self.num_agents() {
            return Err(ModelError::ProfileLength {
                expected: self.num_agents(),
                got: profile.len(),
            });
        }
        let cell = q * self.profiles_per_state + self.code(profile);
        let prev = self.trans[cell];
        if prev != NO_SUCC && prev as usize != target {
            return Err(ModelError::ConflictingTransition {
                state: self.states.names[q].clone(),
                profile: profile.iter().map(|&a| self.actions.names[a].clone()).collect(),
                first: self.states.names[prev as usize].clone(),
                second: self.states.names[target].clone(),
            });
        }
        self.trans[cell] = target as u32;
        Ok(())
    }

    pub fn set_weight(&mut self, q: StateId, p: PropId, w: Value) -> Result<(), ModelError> {
        if !w.in_unit_interval() {
            return Err(ModelError::WeightOutOfRange {
                state: self.states.names[q].clone(),
                prop: self.props.names[p].clone(),
                value: w,
            });
        }
        let np = self.props.names.len();
        self.weights[q * np + p] = w;
        Ok(())
    }

    pub fn set_initial(&mut self, init: Vec<StateId>) {
        self.initial = init;
    }

    /// Observation blocks for `agent`; unlisted states become singletons.
    pub fn set_obs(&mut self, agent: AgentId, classes: Vec<Vec<StateId>>) {
        self.obs[agent] = Some(classes);
    }

    pub fn build(self) -> Result<Wcgs, ModelError> {
        let ns = self.states.names.len();
        let n = self.agents.names.len();
        if self.initial.is_empty() {
            return Err(ModelError::NoInitialState);
        }
        let mut legal = Vec::with_capacity(n);
        for (agent, per_state) in self.legal.into_iter().enumerate() {
            let mut row = Vec::with_capacity(ns);
            for (q, acts) in per_state.into_iter().enumerate() {
                match acts {
                    Some(a) if !a.is_empty() => row.push(a),
                    _ => {
                        return Err(ModelError::MissingLegality {
                            agent: self.agents.names[agent].clone(),
                            state: self.states.names[q].clone(),
                        })
                    }
                }
            }
            legal.push(row);
        }
        let mut obs = Vec::with_capacity(n);
        for (agent, classes) in self.obs.into_iter().enumerate() {
            let mut class_of = vec![usize::MAX; ns];
            let mut blocks: Vec<Vec<StateId>> = Vec::new();
            for block in classes.unwrap_or_default() {
                let mut block: Vec<StateId> = block;
                block.sort_unstable();
                block.dedup();
                if block.is_empty() {
                    continue;
                }
                for &q in &block {
                    if class_of[q] != usize::MAX {
                        return Err(ModelError::ObsNotPartition {
                            agent: self.agents.names[agent].clone(),
                            state: self.states.names[q].clone(),
                        });
                    }
                    class_of[q] = blocks.len();
                }
                blocks.push(block);
            }
            for q in 0..ns {
                if class_of[q] == usize::MAX {
                    class_of[q] = blocks.len();
                    blocks.push(vec![q]);
                }
            }
            for block in &blocks {
                for &q in &block[1..] {
                    if legal[agent][q] != legal[agent][block[0]] {
                        return Err(ModelError::NonuniformLegality {
                            agent: self.agents.names[agent].clone(),
                            first: self.states.names[block[0]].clone(),
                            second: self.states.names[q].clone(),
                        });
                    }
                }
            }
            obs.push(Partition {
                class_of,
                classes: blocks,
            });
        }
        let mut m = Wcgs {
            agents: self.agents,
            actions: self.actions,
            states: self.states,
            props: self.props,
            legal,
            trans: self.trans,
            profiles_per_state: self.profiles_per_state,
            weights: self.weights,
            initial: self.initial,
            obs,
            succ_sets: Vec::new(),
        };
        let mut succ_sets = Vec::with_capacity(ns);
        for q in 0..ns {
            let mut succ = BTreeSet::new();
            for profile in m.legal_profiles(q) {
                let cell = m.trans[q * m.profiles_per_state + m.profile_code(&profile)];
                if cell == NO_SUCC {
                    return Err(ModelError::PartialTransition {
                        state: m.states.names[q].clone(),
                        profile: profile.iter().map(|&a| m.actions.names[a].clone()).collect(),
                    });
                }
                succ.insert(cell as StateId);
            }
            succ_sets.push(succ.into_iter().collect());
        }
        m.succ_sets = succ_sets;
        Ok(m)
    }
}

/// A nonempty finite sequence of states, consecutive states connected by a
/// legal profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct History(Vec<StateId>);

impl History {
    pub fn new(m: &Wcgs, states: Vec<StateId>) -> Result<Self, String> {
        if states.is_empty() {
            return Err("a history needs at least one state".into());
        }
        if let Some(&q) = states.iter().find(|&&q| q >= m.num_states()) {
            return Err(format!("state id {q} out of range"));
        }
        for w in states.windows(2) {
            if !m.successors(w[0]).contains(&w[1]) {
                return Err(format!(
                    "no transition from `{}` to `{}`",
                    m.state_name(w[0]),
                    m.state_name(w[1])
                ));
            }
        }
        Ok(History(states))
    }

    pub fn from_names(m: &Wcgs, names: &[&str]) -> Result<Self, String> {
        let ids = names
            .iter()
            .map(|n| m.state_id(n).ok_or_else(|| format!("unknown state `{n}`")))
            .collect::<Result<Vec<_>, _>>()?;
        History::new(m, ids)
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn last(&self) -> StateId {
        *self.0.last().expect("histories are nonempty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn split_names(s: &str) -> Vec<String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses the line-oriented model format.
///
/// ```text
/// agents: 1 2
/// actions: a b
/// states: q0 q1
/// props: p
/// init: q0
/// legal: 1 _ a b          # `_` = every state
/// trans: q0 (a,_) -> q1   # `_` = any legal action of that agent
/// weight: q1 p 1/2        # unlisted weights default to -1
/// obs: 2 {q0 q1}
/// ```
pub fn parse_model(text: &str) -> Result<Wcgs, ModelError> {
    let mut sections: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: String| ModelError::Syntax { line: i + 1, msg };
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(format!("expected `<section>: ...`, found `{line}`")))?;
        let key = key.trim();
        match key {
            "agents" | "actions" | "states" | "props" | "init" | "legal" | "trans" | "weight"
            | "obs" => sections.entry(key).or_default().push((i + 1, rest.trim())),
            other => return Err(syntax(format!("unknown section `{other}`"))),
        }
    }
    let decl = |key: &str| -> Result<Vec<String>, ModelError> {
        let lines = sections.get(key).cloned().unwrap_or_default();
        if lines.is_empty() && key != "props" {
            return Err(ModelError::Syntax {
                line: 0,
                msg: format!("missing `{key}:` section"),
            });
        }
        Ok(lines.iter().flat_map(|(_, r)| split_names(r)).collect())
    };
    let mut b = WcgsBuilder::new(decl("agents")?, decl("actions")?, decl("states")?, decl("props")?)?;
    let located = |line: usize| move |e: ModelError| match e {
        ModelError::Syntax { .. } => e,
        other => ModelError::Syntax {
            line,
            msg: other.to_string(),
        },
    };

    let mut init = Vec::new();
    for (line, rest) in sections.get("init").cloned().unwrap_or_default() {
        for name in split_names(rest) {
            init.push(b.state_id(&name).map_err(located(line))?);
        }
    }
    b.set_initial(init);

    for (line, rest) in sections.get("legal").cloned().unwrap_or_default() {
        let toks = split_names(rest);
        if toks.len() < 3 {
            return Err(ModelError::Syntax {
                line,
                msg: "expected `legal: <agent> <state|_> <action>...`".into(),
            });
        }
        let agent = b.agent_id(&toks[0]).map_err(located(line))?;
        let acts = toks[2..]
            .iter()
            .map(|a| b.action_id(a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(located(line))?;
        let targets: Vec<StateId> = if toks[1] == "_" {
            (0..b.num_states()).collect()
        } else {
            vec![b.state_id(&toks[1]).map_err(located(line))?]
        };
        for q in targets {
            b.set_legal(agent, q, acts.clone());
        }
    }

    for (line, rest) in sections.get("trans").cloned().unwrap_or_default() {
        let syntax = |msg: &str| ModelError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let (lhs, target) = rest
            .split_once("->")
            .ok_or_else(|| syntax("expected `trans: <state> (<act>,...) -> <state>`"))?;
        let (src, profile) = lhs
            .trim()
            .split_once('(')
            .ok_or_else(|| syntax("missing `(` before the action profile"))?;
        let profile = profile
            .trim()
            .strip_suffix(')')
            .ok_or_else(|| syntax("missing `)` after the action profile"))?;
        let q = b.state_id(src.trim()).map_err(located(line))?;
        let target = b.state_id(target.trim()).map_err(located(line))?;
        let slots: Vec<&str> = profile.split(',').map(str::trim).collect();
        if slots.len() != b.num_agents() {
            return Err(syntax(&format!(
                "profile has {} actions, model has {} agents",
                slots.len(),
                b.num_agents()
            )));
        }
        let mut choices: Vec<Vec<ActionId>> = Vec::with_capacity(slots.len());
        for (agent, slot) in slots.iter().enumerate() {
            let legal = b.legal(agent, q).map(<[ActionId]>::to_vec).ok_or_else(|| {
                syntax(&format!(
                    "legality of agent `{}` at `{}` must be declared before its transitions",
                    b.agents.names[agent], b.states.names[q]
                ))
            })?;
            if *slot == "_" {
                choices.push(legal);
            } else {
                let a = b.action_id(slot).map_err(located(line))?;
                if !legal.contains(&a) {
                    return Err(syntax(&format!(
                        "action `{slot}` is not legal for agent `{}` at `{}`",
                        b.agents.names[agent], b.states.names[q]
                    )));
                }
                choices.push(vec![a]);
            }
        }
        let mut profiles = vec![Vec::new()];
        for c in &choices {
            profiles = profiles
                .into_iter()
                .flat_map(|p| {
                    c.iter().map(move |&a| {
                        let mut p = p.clone();
                        p.push(a);
                        p
                    })
                })
                .collect();
        }
        for p in profiles {
            b.set_trans(q, &p, target).map_err(located(line))?;
        }
    }

    for (line, rest) in sections.get("weight").cloned().unwrap_or_default() {
        let toks = split_names(rest);
        if toks.len() != 3 {
            return Err(ModelError::Syntax {
                line,
                msg: "expected `weight: <state> <prop> <rational>`".into(),
            });
        }
        let q = b.state_id(&toks[0]).map_err(located(line))?;
        let p = b.prop_id(&toks[1]).map_err(located(line))?;
        let w: Value = toks[2].parse().map_err(|e| ModelError::Syntax {
            line,
            msg: format!("{e}"),
        })?;
        // Kept unlocated so callers can match on the variant.
        b.set_weight(q, p, w)?;
    }

    for (line, rest) in sections.get("obs").cloned().unwrap_or_default() {
        let syntax = |msg: &str| ModelError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let (agent, blocks) = rest
            .trim()
            .split_once(char::is_whitespace)
            .ok_or_else(|| syntax("expected `obs: <agent> {<state>...} ...`"))?;
        let agent = b.agent_id(agent).map_err(located(line))?;
        let mut classes = Vec::new();
        let mut remaining = blocks.trim();
        while !remaining.is_empty() {
            let body = remaining
                .strip_prefix('{')
                .ok_or_else(|| syntax("observation blocks must be written `{q1 q2}`"))?;
            let (inner, after) = body
                .split_once('}')
                .ok_or_else(|| syntax("unterminated observation block"))?;
            let ids = split_names(inner)
                .iter()
                .map(|s| b.state_id(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(located(line))?;
            classes.push(ids);
            remaining = after.trim();
        }
        b.set_obs(agent, classes);
    }

    b.build()
}

const FIXTURE_G1: &str = include_str!("../fixtures/g1.wcgs");
const FIXTURE_G1_PRIME: &str = include_str!("../fixtures/g1_prime.wcgs");
const FIXTURE_G2: &str = include_str!("../fixtures/g2.wcgs");
const FIXTURE_G2_PRIME: &str = include_str!("../fixtures/g2_prime.wcgs");

pub const FIXTURE_NAMES: &[&str] = &["G1", "G1'", "G2", "G2'"];

/// Source text of a bundled expressivity model.
pub fn fixture_text(name: &str) -> Result<&'static str, ModelError> {
    match name {
        "G1" | "g1" => Ok(FIXTURE_G1),
        "G1'" | "g1'" | "G1p" | "g1_prime" => Ok(FIXTURE_G1_PRIME),
        "G2" | "g2" => Ok(FIXTURE_G2),
        "G2'" | "g2'" | "G2p" | "g2_prime" => Ok(FIXTURE_G2_PRIME),
        other => Err(ModelError::UnknownFixture(other.to_string())),
    }
}

pub fn load_fixture(name: &str) -> Result<Wcgs, ModelError> {
    parse_model(fixture_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
agents: 1
actions: a b
states: s t
props: p
init: s
legal: 1 _ a b
trans: s (a) -> t
trans: s (b) -> s
trans: t (_) -> t
weight: t p 1/2
";

    #[test]
    fn parses_small_model() {
        let m = parse_model(SMALL).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.weight(1, 0), Value::new(1, 2));
        assert_eq!(m.weight(0, 0), Value::MINUS_ONE);
        assert_eq!(m.successor_by_name("s", &["a"]).unwrap(), "t");
        assert_eq!(m.obs_class(0, 1), &[1]);
    }

    #[test]
    fn text_round_trip() {
        let m = parse_model(SMALL).unwrap();
        let again = parse_model(&m.to_model_text()).unwrap();
        assert_eq!(again.to_model_text(), m.to_model_text());
        for f in FIXTURE_NAMES {
            let m = load_fixture(f).unwrap();
            let again = parse_model(&m.to_model_text()).unwrap();
            assert_eq!(again.to_model_text(), m.to_model_text(), "fixture {f}");
        }
    }

    #[test]
    fn rejects_nonuniform_legality() {
        let text = "
agents: 1
actions: a b
states: s t
init: s
legal: 1 s a b
legal: 1 t a
trans: s (_) -> s
trans: t (_) -> t
obs: 1 {s t}
";
        assert!(matches!(
            parse_model(text),
            Err(ModelError::NonuniformLegality { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_weight() {
        let text = SMALL.replace("weight: t p 1/2", "weight: t p 3/2");
        assert!(matches!(
            parse_model(&text),
            Err(ModelError::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_partial_transition() {
        let text = SMALL.replace("trans: s (b) -> s\n", "");
        match parse_model(&text) {
            Err(ModelError::PartialTransition { state, profile }) => {
                assert_eq!(state, "s");
                assert_eq!(profile, vec!["b".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = "agents: 1\nactions: a\nstates: s\ninit: s\nlegal: 1 _ a\nbogus line\n";
        assert!(matches!(parse_model(text), Err(ModelError::Syntax { line: 6, .. })));
        let text = "agents: 1\nactions: a\nstates: s\ninit: s\nlegal: 1 _ a\ntrans: s (zz) -> s\n";
        assert!(matches!(parse_model(text), Err(ModelError::Syntax { line: 6, .. })));
    }

    #[test]
    fn successor_rejects_illegal_action() {
        let m = load_fixture("G2").unwrap();
        let q0 = m.state_id("q0").unwrap();
        let a2 = m.action_id("a2").unwrap();
        assert!(matches!(
            m.successor(q0, &[a2, a2]),
            Err(ModelError::IllegalAction { .. })
        ));
    }

    #[test]
    fn g2_transitions() {
        let m = load_fixture("G2").unwrap();
        assert_eq!(m.successor_by_name("q0", &["a1", "a2"]).unwrap(), "q1");
        assert_eq!(m.successor_by_name("q1", &["a1", "a2"]).unwrap(), "q3");
        for a1 in ["a1", "b1"] {
            for a2 in ["a2", "b2"] {
                assert_eq!(m.successor_by_name("q3", &[a1, a2]).unwrap(), "q3");
                assert_eq!(m.successor_by_name("q4", &[a1, a2]).unwrap(), "q4");
            }
        }
    }

    #[test]
    fn observation_classes_of_fixtures() {
        let g2 = load_fixture("G2").unwrap();
        let g2p = load_fixture("G2'").unwrap();
        let q1 = g2.state_id("q1").unwrap();
        let q2 = g2.state_id("q2").unwrap();
        assert_eq!(g2.obs_class(0, q1), &[q1]);
        assert_eq!(g2p.obs_class(0, q1), &[q1, q2]);
        assert_eq!(g2p.obs_class(1, q1), &[q1]);
    }

    #[test]
    fn g1_weights() {
        let g1 = load_fixture("G1").unwrap();
        let g1p = load_fixture("G1'").unwrap();
        let p = g1.prop_id("p").unwrap();
        let q = g1.state_id("q1''").unwrap();
        assert_eq!(g1.weight(q, p), Value::ONE);
        assert_eq!(g1p.weight(q, p), Value::MINUS_ONE);
        for name in ["q1", "q1'"] {
            let q = g1p.state_id(name).unwrap();
            assert_eq!(g1p.weight(q, p), Value::ONE);
        }
        let win = g1.prop_id("win").unwrap();
        assert_eq!(g1.weight(g1.state_id("q3").unwrap(), win), Value::ONE);
        assert_eq!(g1.weight(g1.state_id("q4").unwrap(), win), Value::MINUS_ONE);
    }

    #[test]
    fn g1_plays_settle_after_two_steps() {
        for name in ["G1", "G1'"] {
            let m = load_fixture(name).unwrap();
            let q0 = m.state_id("q0").unwrap();
            let sinks = [m.state_id("q3").unwrap(), m.state_id("q4").unwrap()];
            for p1 in m.legal_profiles(q0) {
                let q1 = m.successor(q0, &p1).unwrap();
                assert!(!sinks.contains(&q1));
                for p2 in m.legal_profiles(q1) {
                    let q2 = m.successor(q1, &p2).unwrap();
                    assert!(sinks.contains(&q2));
                    for p3 in m.legal_profiles(q2) {
                        assert_eq!(m.successor(q2, &p3).unwrap(), q2);
                    }
                }
            }
        }
    }

    #[test]
    fn successor_is_total_and_deterministic_on_fixtures() {
        for name in FIXTURE_NAMES {
            let m = load_fixture(name).unwrap();
            for q in 0..m.num_states() {
                for p in m.legal_profiles(q) {
                    let a = m.successor(q, &p).unwrap();
                    let b = m.successor(q, &p).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn obs_is_a_partition() {
        for name in FIXTURE_NAMES {
            let m = load_fixture(name).unwrap();
            for agent in 0..m.num_agents() {
                let mut covered = vec![0; m.num_states()];
                for q in 0..m.num_states() {
                    assert!(m.obs_class(agent, q).contains(&q));
                    for &r in m.obs_class(agent, q) {
                        assert!(m.obs_class(agent, r).contains(&q));
                        assert_eq!(m.obs_class(agent, r), m.obs_class(agent, q));
                    }
                    if m.obs_class(agent, q)[0] == q {
                        for &r in m.obs_class(agent, q) {
                            covered[r] += 1;
                        }
                    }
                }
                assert!(covered.iter().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn history_validation() {
        let m = load_fixture("G2").unwrap();
        assert!(History::from_names(&m, &["q0", "q1", "q3"]).is_ok());
        assert!(History::from_names(&m, &["q0", "q3"]).is_err());
        assert!(History::from_names(&m, &[]).is_err());
    }

    #[test]
    fn unknown_fixture() {
        assert!(matches!(load_fixture("G9"), Err(ModelError::UnknownFixture(_))));
    }
}
