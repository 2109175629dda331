//! Repeated GSP keyword auctions as weighted game structures.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{Assignment, CheckError, Checker};
use crate::formula::{parse_formula, Formula};
use crate::regex::GuardRegex;
use crate::strategy::{Guard, GuardPool, Kind, LetterCache, NatStrategy, Semantics, StrategyBundle, StrategyError};
use crate::value::{snap_to_grid, Value};
use crate::wcgs::{ActionId, AgentId, ModelError, StateId, Wcgs, WcgsBuilder};
use crate::we::{parse_we, WeFormula};

pub const DEFAULT_STATE_CAP: usize = 200_000;

#[derive(Debug, Error)]
pub enum GspError {
    #[error("invalid auction spec: {0}")]
    Spec(String),
    #[error("auction spec: {0}")]
    Toml(String),
    #[error("the auction has more than {cap} reachable states (estimate: up to {estimate})")]
    TooLarge { estimate: u128, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("rank position {x} outside 2..={n}")]
    PositionOutOfRange { x: usize, n: usize },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check `{check}` does not apply: {reason}")]
    NotApplicable { check: String, reason: String },
}

/// Dimension of the VCG payments compared against per-click prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VcgConvention {
    #[default]
    PerClick,
    Total,
}

/// Which rank positions use the recursive equilibrium-bid formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BidCases {
    /// Recursive for `x <= m`, valuation for `x > m`.
    #[default]
    Swapped,
    /// Recursive for `x >= m + 1`, valuation for `2 <= x <= m`.
    AsPrinted,
}

macro_rules! kebab_enum {
    ($t:ty, $($v:ident => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok(Self::$v),)+
                    _ => Err(format!("expected one of: {}", [$($s),+].join(", "))),
                }
            }
        }
    };
}

kebab_enum!(VcgConvention, PerClick => "per-click", Total => "total");
kebab_enum!(BidCases, Swapped => "swapped", AsPrinted => "as-printed");

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSpec {
    pub agents: Vec<String>,
    pub slots: usize,
    pub ctr: Vec<Value>,
    pub increment: Value,
    /// Possible valuations, aligned with `agents`.
    pub valuations: Vec<Vec<Value>>,
    pub public_valuations: Vec<String>,
    pub vcg_convention: VcgConvention,
    pub bid_cases: BidCases,
    pub state_cap: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    agents: Vec<String>,
    slots: usize,
    ctr: Vec<Value>,
    increment: Value,
    valuations: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    public_valuations: Vec<String>,
    #[serde(default)]
    vcg_convention: VcgConvention,
    #[serde(default)]
    bid_cases: BidCases,
    state_cap: Option<usize>,
}

impl AuctionSpec {
    pub fn parse_toml(text: &str) -> Result<AuctionSpec, GspError> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| GspError::Toml(e.to_string()))?;
        for name in raw.valuations.keys() {
            if !raw.agents.contains(name) {
                return Err(GspError::Spec(format!("valuations given for unknown agent `{name}`")));
            }
        }
        let valuations = raw
            .agents
            .iter()
            .map(|a| {
                raw.valuations
                    .get(a)
                    .cloned()
                    .ok_or_else(|| GspError::Spec(format!("no valuations for agent `{a}`")))
            })
            .collect::<Result<_, _>>()?;
        let spec = AuctionSpec {
            agents: raw.agents,
            slots: raw.slots,
            ctr: raw.ctr,
            increment: raw.increment,
            valuations,
            public_valuations: raw.public_valuations,
            vcg_convention: raw.vcg_convention,
            bid_cases: raw.bid_cases,
            state_cap: raw.state_cap.unwrap_or(DEFAULT_STATE_CAP),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        let list = |vs: &[Value]| vs.iter().map(|v| format!("\"{v}\"")).collect::<Vec<_>>().join(", ");
        let names = |ns: &[String]| ns.iter().map(|n| format!("\"{n}\"")).collect::<Vec<_>>().join(", ");
        let mut out = format!(
            "agents = [{}]\nslots = {}\nctr = [{}]\nincrement = \"{}\"\npublic_valuations = [{}]\nvcg_convention = \"{}\"\nbid_cases = \"{}\"\nstate_cap = {}\n\n[valuations]\n",
            names(&self.agents),
            self.slots,
            list(&self.ctr),
            self.increment,
            names(&self.public_valuations),
            self.vcg_convention,
            self.bid_cases,
            self.state_cap
        );
        for (a, vs) in self.agents.iter().zip(&self.valuations) {
            out.push_str(&format!("\"{a}\" = [{}]\n", list(vs)));
        }
        out
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// `θ_s` for 1-based `s`.
    pub fn theta(&self, s: usize) -> Value {
        self.ctr[s - 1]
    }

    /// The bid grid `0, inc, 2 inc, ..., 1`.
    pub fn bids(&self) -> Vec<Value> {
        let steps = (Value::ONE / self.increment).trunc_int();
        (0..=steps).map(|i| self.increment * Value::int(i)).collect()
    }

    pub fn snap(&self, x: Value) -> Value {
        snap_to_grid(x, self.increment)
    }

    pub fn validate(&self) -> Result<(), GspError> {
        let err = |m: String| Err(GspError::Spec(m));
        let n = self.agents.len();
        if n == 0 {
            return err("no agents".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if self.agents[..i].contains(a) {
                return err(format!("duplicate agent `{a}`"));
            }
            if a.is_empty() || !a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return err(format!("agent name `{a}` must be alphanumeric"));
            }
        }
        if self.slots == 0 {
            return err("at least one slot is required".into());
        }
        if self.ctr.len() != self.slots {
            return err(format!("{} click-through rates for {} slots", self.ctr.len(), self.slots));
        }
        for (s, t) in self.ctr.iter().enumerate() {
            if *t <= Value::ZERO || *t > Value::ONE {
                return err(format!("click-through rate {t} of slot {} must lie in (0, 1]", s + 1));
            }
            if s > 0 && self.ctr[s - 1] <= *t {
                return err("click-through rates must be strictly decreasing".into());
            }
        }
        let inc = self.increment;
        if inc <= Value::ZERO || inc > Value::ONE || !(Value::ONE / inc).is_integer() {
            return err(format!("increment {inc} must lie in (0, 1] with 1/increment integral"));
        }
        if self.valuations.len() != n {
            return err("one valuation set per agent is required".into());
        }
        for (a, vs) in self.agents.iter().zip(&self.valuations) {
            if vs.is_empty() {
                return err(format!("agent `{a}` has no valuations"));
            }
            for v in vs {
                if *v < Value::ZERO || *v > Value::ONE || !(*v / inc).is_integer() {
                    return err(format!("valuation {v} of agent `{a}` is not a grid point in [0, 1]"));
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                if let Some(v) = self.valuations[i].iter().find(|v| self.valuations[j].contains(v)) {
                    return err(format!(
                        "agents `{}` and `{}` share valuation {v}",
                        self.agents[j], self.agents[i]
                    ));
                }
            }
        }
        for p in &self.public_valuations {
            if !self.agents.contains(p) {
                return err(format!("public valuation for unknown agent `{p}`"));
            }
        }
        Ok(())
    }

    /// Every valuation profile, first agent varying slowest.
    pub fn valuation_profiles(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for vs in &self.valuations {
            out = out
                .into_iter()
                .flat_map(|p: Vec<Value>| {
                    vs.iter().map(move |v| {
                        let mut p = p.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Allocation, prices and valuations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GspState {
    pub alloc: Vec<Option<AgentId>>,
    pub price: Vec<Value>,
    pub val: Vec<Value>,
}

impl GspState {
    pub fn initial(spec: &AuctionSpec, val: Vec<Value>) -> Self {
        GspState {
            alloc: vec![None; spec.slots],
            price: vec![Value::ZERO; spec.slots],
            val,
        }
    }

    /// 1-based slot of `a`, if any.
    pub fn slot_of(&self, a: AgentId) -> Option<usize> {
        self.alloc.iter().position(|x| *x == Some(a)).map(|s| s + 1)
    }

    pub fn describe(&self, spec: &AuctionSpec) -> String {
        let alloc: Vec<&str> = self
            .alloc
            .iter()
            .map(|a| a.map_or("-", |a| spec.agents[a].as_str()))
            .collect();
        let join = |vs: &[Value]| vs.iter().map(Value::to_string).collect::<Vec<_>>().join(",");
        format!("alloc[{}] price[{}] val[{}]", alloc.join(","), join(&self.price), join(&self.val))
    }
}

/// Agents by descending bid, ties by declaration order.
pub fn rank(bids: &[Value]) -> Vec<AgentId> {
    let mut order: Vec<AgentId> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| bids[b].cmp(&bids[a]).then(a.cmp(&b)));
    order
}

pub fn gsp_successor(spec: &AuctionSpec, q: &GspState, bids: &[Value]) -> GspState {
    let r = rank(bids);
    let n = bids.len();
    GspState {
        alloc: (0..spec.slots).map(|s| r.get(s).copied()).collect(),
        price: (0..spec.slots)
            .map(|s| if s + 1 < n { bids[r[s + 1]] } else { Value::ZERO })
            .collect(),
        val: q.val.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcgOutcome {
    pub alloc: Vec<Option<AgentId>>,
    /// Total payments `p̂_s`.
    pub total: Vec<Value>,
    /// `p̂_s / θ_s`.
    pub per_click: Vec<Value>,
}

impl VcgOutcome {
    pub fn payments(&self, c: VcgConvention) -> &[Value] {
        match c {
            VcgConvention::PerClick => &self.per_click,
            VcgConvention::Total => &self.total,
        }
    }
}

pub fn vcg_outcome(spec: &AuctionSpec, vals: &[Value]) -> VcgOutcome {
    let m = spec.slots;
    let n = vals.len();
    let r = rank(vals);
    let mut total = vec![Value::ZERO; m];
    for s in (1..=m).rev() {
        let below = if s < n { vals[r[s]] } else { Value::ZERO };
        total[s - 1] = if s == m {
            spec.theta(m) * below
        } else {
            (spec.theta(s) - spec.theta(s + 1)) * below + total[s]
        };
    }
    let per_click = (1..=m).map(|s| total[s - 1] / spec.theta(s)).collect();
    VcgOutcome {
        alloc: (0..m).map(|s| r.get(s).copied()).collect(),
        total,
        per_click,
    }
}

/// `θ_x`, extended by 0 beyond the last slot.
fn theta_ext(spec: &AuctionSpec, x: usize) -> Value {
    if x <= spec.slots {
        spec.theta(x)
    } else {
        Value::ZERO
    }
}

/// Equilibrium bid of the agent ranked `x` by valuation, snapped to the grid.
pub fn equilibrium_bid(spec: &AuctionSpec, vals: &[Value], x: usize) -> Result<Value, GspError> {
    let n = vals.len();
    if x < 2 || x > n {
        return Err(GspError::PositionOutOfRange { x, n });
    }
    let r = rank(vals);
    let m = spec.slots;
    let recursive = |x: usize| match spec.bid_cases {
        BidCases::Swapped => x <= m,
        BidCases::AsPrinted => x > m,
    };
    // Bottom-up over positions n..=x; b_{n+1} = 0.
    let mut next = Value::ZERO;
    let mut b = Value::ZERO;
    for y in (x..=n).rev() {
        let v = vals[r[y - 1]];
        b = if recursive(y) {
            let prev = theta_ext(spec, y - 1);
            let ratio = if prev.is_zero() { Value::ZERO } else { theta_ext(spec, y) / prev };
            ratio * next + (Value::ONE - ratio) * v
        } else {
            v
        };
        next = b;
    }
    Ok(spec.snap(b))
}

/// Balanced-bidding bid computed directly: target the slot with the best
/// utility at current prices (only slots no better than the current one
/// when `restricted`) and bid to be indifferent with the slot above.
pub fn balanced_bid(spec: &AuctionSpec, q: &GspState, a: AgentId, restricted: bool) -> Value {
    let m = spec.slots;
    let v = q.val[a];
    let util = |s: usize| spec.theta(s) * (v - q.price[s - 1]);
    let lowest = if restricted { q.slot_of(a).unwrap_or(m) } else { 1 };
    let mut target = lowest;
    for s in lowest..=m {
        if util(s) > util(target) {
            target = s;
        }
    }
    if target == 1 {
        spec.snap((v + q.price[0]) / Value::int(2))
    } else {
        spec.snap(v - util(target) / spec.theta(target - 1))
    }
}

/// The auction as a game structure, restricted to states reachable from the
/// initial ones.
pub struct Gsp {
    pub spec: AuctionSpec,
    pub model: Wcgs,
    pub states: Vec<GspState>,
    bids: Vec<Value>,
    index: HashMap<GspState, StateId>,
}

impl Gsp {
    pub fn bid_value(&self, a: ActionId) -> Value {
        self.bids[a]
    }

    pub fn bid_action(&self, v: Value) -> Option<ActionId> {
        self.bids.iter().position(|b| *b == v)
    }

    pub fn bids(&self) -> &[Value] {
        &self.bids
    }

    pub fn state(&self, q: StateId) -> &GspState {
        &self.states[q]
    }

    pub fn state_id(&self, s: &GspState) -> Option<StateId> {
        self.index.get(s).copied()
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.spec.agents[a]
    }

    /// Successor under bid values.
    pub fn successor(&self, q: StateId, bids: &[Value]) -> StateId {
        self.index[&gsp_successor(&self.spec, &self.states[q], bids)]
    }
}

fn prop_alloc(a: &str, s: usize) -> String {
    format!("alloc_{a}_{s}")
}
fn prop_price(s: usize) -> String {
    format!("price_{s}")
}
fn prop_val(a: &str) -> String {
    format!("val_{a}")
}

pub fn build_gsp(spec: &AuctionSpec) -> Result<Gsp, GspError> {
    spec.validate()?;
    let n = spec.num_agents();
    let m = spec.slots;
    let bids = spec.bids();
    let nb = bids.len();
    let profiles = spec.valuation_profiles();
    let bid_profiles = (nb as u128).pow(n as u32);
    let estimate = profiles.len() as u128 * (1 + bid_profiles);
    let too_large = || GspError::TooLarge {
        estimate,
        cap: spec.state_cap,
    };
    if bid_profiles > usize::MAX as u128 / 2 {
        return Err(too_large());
    }
    let bid_profiles = bid_profiles as usize;
    let decode = |mut code: usize| -> Vec<Value> {
        (0..n)
            .map(|_| {
                let b = bids[code % nb];
                code /= nb;
                b
            })
            .collect()
    };

    // Successors do not depend on the current allocation and prices, so
    // one table per valuation profile suffices.
    let mut states: Vec<GspState> = Vec::new();
    let mut index: HashMap<GspState, StateId> = HashMap::new();
    let mut rows: Vec<Vec<StateId>> = Vec::new();
    let mut profile_of: Vec<usize> = Vec::new();
    let mut initial = Vec::new();
    let mut add = |s: GspState, pi: usize, states: &mut Vec<GspState>, profile_of: &mut Vec<usize>| -> Result<StateId, GspError> {
        if let Some(&q) = index.get(&s) {
            return Ok(q);
        }
        if states.len() >= spec.state_cap {
            return Err(too_large());
        }
        let q = states.len();
        index.insert(s.clone(), q);
        states.push(s);
        profile_of.push(pi);
        Ok(q)
    };
    for (pi, vals) in profiles.iter().enumerate() {
        let init = GspState::initial(spec, vals.clone());
        initial.push(add(init.clone(), pi, &mut states, &mut profile_of)?);
        let mut row = Vec::with_capacity(bid_profiles);
        for code in 0..bid_profiles {
            let next = gsp_successor(spec, &init, &decode(code));
            row.push(add(next, pi, &mut states, &mut profile_of)?);
        }
        rows.push(row);
    }

    let agents = spec.agents.clone();
    let actions: Vec<String> = bids.iter().map(Value::to_string).collect();
    let names: Vec<String> = (0..states.len()).map(|q| format!("q{q}")).collect();
    let mut props = Vec::new();
    for a in &agents {
        for s in 1..=m {
            props.push(prop_alloc(a, s));
        }
    }
    for s in 1..=m {
        props.push(prop_price(s));
    }
    for a in &agents {
        props.push(prop_val(a));
    }
    let mut b = WcgsBuilder::new(agents.clone(), actions, names, props)?;
    let all: Vec<ActionId> = (0..nb).collect();
    for q in 0..states.len() {
        for a in 0..n {
            b.set_legal(a, q, all.clone());
        }
    }
    for (q, st) in states.iter().enumerate() {
        let row = &rows[profile_of[q]];
        let mut profile = vec![0; n];
        for (code, &target) in row.iter().enumerate() {
            let mut c = code;
            for slot in profile.iter_mut() {
                *slot = c % nb;
                c /= nb;
            }
            b.set_trans(q, &profile, target)?;
        }
        for (a, name) in agents.iter().enumerate() {
            for s in 1..=m {
                let w = Value::from_bool(st.alloc[s - 1] == Some(a)).max(Value::ZERO);
                b.set_weight(q, b.prop_id(&prop_alloc(name, s))?, w)?;
            }
            b.set_weight(q, b.prop_id(&prop_val(name))?, st.val[a])?;
        }
        for s in 1..=m {
            b.set_weight(q, b.prop_id(&prop_price(s))?, st.price[s - 1])?;
        }
    }
    b.set_initial(initial);
    let public: Vec<AgentId> = spec
        .public_valuations
        .iter()
        .map(|p| spec.agents.iter().position(|a| a == p).unwrap())
        .collect();
    for a in 0..n {
        let mut classes: BTreeMap<(Vec<Option<AgentId>>, Vec<Value>, Vec<Value>), Vec<StateId>> = BTreeMap::new();
        for (q, st) in states.iter().enumerate() {
            let mut seen = vec![st.val[a]];
            seen.extend(public.iter().map(|&p| st.val[p]));
            classes
                .entry((st.alloc.clone(), st.price.clone(), seen))
                .or_default()
                .push(q);
        }
        b.set_obs(a, classes.into_values().collect());
    }
    let model = b.build()?;
    Ok(Gsp {
        spec: spec.clone(),
        model,
        states,
        bids,
        index,
    })
}

/// Text of the value-level expressions shared by guards and formulas.
impl Gsp {
    fn a(&self, a: AgentId) -> &str {
        &self.spec.agents[a]
    }

    /// `θ_s × (val_a − price_s)`
    pub fn util_slot_text(&self, a: AgentId, s: usize) -> String {
        format!("mul({}, sub(val_{}, price_{s}))", self.spec.theta(s), self.a(a))
    }

    /// `Σ_s alloc_{a,s} × util_{a,s}`
    pub fn util_text(&self, a: AgentId) -> String {
        let terms: Vec<String> = (1..=self.spec.slots)
            .map(|s| format!("mul(alloc_{}_{s}, {})", self.a(a), self.util_slot_text(a, s)))
            .collect();
        format!("sum({})", terms.join(", "))
    }

    /// Own slot, or the last slot when unallocated.
    fn own_slot_text(&self, a: AgentId) -> String {
        let m = self.spec.slots;
        let allocs: Vec<String> = (1..=m).map(|s| format!("alloc_{}_{s}", self.a(a))).collect();
        let weighted: Vec<String> = (1..=m).map(|s| format!("mul({s}, alloc_{}_{s})", self.a(a))).collect();
        format!("sum({}, mul({m}, sub(1, sum({}))))", weighted.join(", "), allocs.join(", "))
    }

    /// `argmax_s util_{a,s}`, over `s >= s_a` when restricted (other slots
    /// are pushed to -2, below every utility).
    fn argmax_text(&self, a: AgentId, restricted: bool) -> String {
        let own = self.own_slot_text(a);
        let terms: Vec<String> = (1..=self.spec.slots)
            .map(|s| {
                let u = self.util_slot_text(a, s);
                if restricted {
                    format!("min({u}, sub(mul(3/2, sum(geq({s}, {own}), 1)), 2))")
                } else {
                    u
                }
            })
            .collect();
        format!("argmax({})", terms.join(", "))
    }

    fn targets_text(&self, a: AgentId, s: usize, restricted: bool) -> String {
        format!("eq(rdiv(1, {}), {})", self.argmax_text(a, restricted), Value::new(1, s as i128))
    }

    /// Bid `b` for the top slot: `b = snap((val_a + price_1) / 2)`.
    fn top_text(&self, a: AgentId, b: Value, restricted: bool) -> String {
        format!(
            "and(eq({b}, snap(mul(1/2, sum(val_{}, price_1)), {})), {})",
            self.a(a),
            self.spec.increment,
            self.targets_text(a, 1, restricted)
        )
    }

    /// Bid `b` for slot `s > 1`: `util_{a,s} = θ_{s−1} × (val_a − b)`, snapped.
    fn lower_text(&self, a: AgentId, b: Value, s: usize, restricted: bool) -> String {
        format!(
            "and(eq({b}, snap(sub(val_{}, rdiv({}, {})), {})), {})",
            self.a(a),
            self.util_slot_text(a, s),
            self.spec.theta(s - 1),
            self.spec.increment,
            self.targets_text(a, s, restricted)
        )
    }

    /// Exact current prices and allocation.
    fn outcome_text(&self, alloc: &[Option<AgentId>], price: &[Value]) -> String {
        let mut parts = Vec::new();
        for s in 1..=self.spec.slots {
            parts.push(format!("eq(price_{s}, {})", price[s - 1]));
            for a in 0..self.spec.num_agents() {
                let w = if alloc[s - 1] == Some(a) { 1 } else { 0 };
                parts.push(format!("eq(alloc_{}_{s}, {w})", self.a(a)));
            }
        }
        format!("and({})", parts.join(", "))
    }

    fn know(&self, a: AgentId, inner: &str) -> Result<WeFormula, GspError> {
        Ok(parse_we(&format!("K[{}]({inner})", self.a(a))).map_err(StrategyError::from)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Bb,
    Rbb,
    Kbb,
    Bbr,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Bb, Family::Rbb, Family::Kbb, Family::Bbr];

    pub fn prefix(self) -> &'static str {
        match self {
            Family::Bb => "BB",
            Family::Rbb => "RBB",
            Family::Kbb => "KBB",
            Family::Bbr => "BBR",
        }
    }

    pub fn kind(self) -> Kind {
        match self {
            Family::Bbr => Kind::Recall,
            _ => Kind::Memoryless,
        }
    }

    pub fn semantics(self) -> Semantics {
        match self {
            Family::Bbr => Semantics::IR,
            _ => Semantics::Ir,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.prefix().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy family `{s}` (expected BB, RBB, KBB or BBR)"))
    }
}

pub fn strategy_name(gsp: &Gsp, family: Family, a: AgentId) -> String {
    format!("{}_{}", family.prefix(), gsp.agent_name(a))
}

fn balanced_pairs(gsp: &Gsp, a: AgentId, restricted: bool) -> Result<Vec<(Guard, ActionId)>, GspError> {
    let mut pairs = Vec::new();
    for (i, &b) in gsp.bids.iter().enumerate() {
        pairs.push((Guard::State(gsp.know(a, &gsp.top_text(a, b, restricted))?), i));
    }
    for s in 2..=gsp.spec.slots {
        for (i, &b) in gsp.bids.iter().enumerate() {
            pairs.push((Guard::State(gsp.know(a, &gsp.lower_text(a, b, s, restricted))?), i));
        }
    }
    Ok(pairs)
}

fn finish(
    gsp: &Gsp,
    family: Family,
    a: AgentId,
    mut pairs: Vec<(Guard, ActionId)>,
    cache: &LetterCache,
) -> Result<NatStrategy, GspError> {
    let zero = gsp.bid_action(Value::ZERO).expect("0 is a bid");
    let last = match family.kind() {
        Kind::Memoryless => Guard::top(),
        Kind::Recall => Guard::Regex(GuardRegex::top_star()),
    };
    pairs.push((last, zero));
    Ok(NatStrategy::new(
        &gsp.model,
        strategy_name(gsp, family, a),
        a,
        family.kind(),
        pairs,
        cache,
    )?)
}

pub fn build_bb(gsp: &Gsp, a: AgentId, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    finish(gsp, Family::Bb, a, balanced_pairs(gsp, a, false)?, cache)
}

pub fn build_rbb(gsp: &Gsp, a: AgentId, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    finish(gsp, Family::Rbb, a, balanced_pairs(gsp, a, true)?, cache)
}

pub fn build_kbb(gsp: &Gsp, a: AgentId, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    let n = gsp.spec.num_agents();
    let mut pairs = Vec::new();
    let grounded = |cond: String, beta: AgentId, s: usize, c: Value, b: Value| -> Result<Guard, GspError> {
        let inner = format!(
            "and({cond}, eq(alloc_{}_{s}, 1), eq({c}, min(val_{}, {b})))",
            gsp.a(beta),
            gsp.a(beta)
        );
        Ok(Guard::State(gsp.know(a, &inner)?))
    };
    for &b in &gsp.bids {
        for (ci, &c) in gsp.bids.iter().enumerate() {
            for beta in (0..n).filter(|&x| x != a) {
                pairs.push((grounded(gsp.top_text(a, b, true), beta, 1, c, b)?, ci));
            }
        }
    }
    for s in 2..=gsp.spec.slots {
        for &b in &gsp.bids {
            for (ci, &c) in gsp.bids.iter().enumerate() {
                for beta in (0..n).filter(|&x| x != a) {
                    pairs.push((grounded(gsp.lower_text(a, b, s, true), beta, s, c, b)?, ci));
                }
            }
        }
    }
    pairs.extend(balanced_pairs(gsp, a, true)?);
    finish(gsp, Family::Kbb, a, pairs, cache)
}

/// Distinct (allocation, prices) pairs over the reachable states.
pub fn reachable_outcomes(gsp: &Gsp) -> Vec<(Vec<Option<AgentId>>, Vec<Value>)> {
    let mut seen: Vec<(Vec<Option<AgentId>>, Vec<Value>)> = gsp
        .states
        .iter()
        .map(|s| (s.alloc.clone(), s.price.clone()))
        .collect();
    seen.sort();
    seen.dedup();
    seen
}

pub fn build_bbr(gsp: &Gsp, a: AgentId, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    let outcomes = reachable_outcomes(gsp);
    let psis: Vec<String> = outcomes.iter().map(|(al, pr)| gsp.outcome_text(al, pr)).collect();
    let repeated = |psi: &str, cond: String| -> Result<Guard, GspError> {
        Ok(Guard::Regex(GuardRegex::seq(vec![
            GuardRegex::top_star(),
            GuardRegex::letter(gsp.know(a, psi)?),
            GuardRegex::top_star(),
            GuardRegex::letter(gsp.know(a, &format!("and({psi}, {cond})"))?),
        ])))
    };
    let fresh = |cond: String| -> Result<Guard, GspError> {
        Ok(Guard::Regex(GuardRegex::concat(
            GuardRegex::top_star(),
            GuardRegex::letter(gsp.know(a, &cond)?),
        )))
    };
    let mut pairs = Vec::new();
    for psi in &psis {
        for (i, &b) in gsp.bids.iter().enumerate() {
            pairs.push((repeated(psi, gsp.top_text(a, b, true))?, i));
        }
    }
    for psi in &psis {
        for s in 2..=gsp.spec.slots {
            for (i, &b) in gsp.bids.iter().enumerate() {
                pairs.push((repeated(psi, gsp.lower_text(a, b, s, true))?, i));
            }
        }
    }
    for (i, &b) in gsp.bids.iter().enumerate() {
        pairs.push((fresh(gsp.top_text(a, b, false))?, i));
    }
    for s in 2..=gsp.spec.slots {
        for (i, &b) in gsp.bids.iter().enumerate() {
            pairs.push((fresh(gsp.lower_text(a, b, s, false))?, i));
        }
    }
    finish(gsp, Family::Bbr, a, pairs, cache)
}

pub fn build_strategy(gsp: &Gsp, family: Family, a: AgentId, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    match family {
        Family::Bb => build_bb(gsp, a, cache),
        Family::Rbb => build_rbb(gsp, a, cache),
        Family::Kbb => build_kbb(gsp, a, cache),
        Family::Bbr => build_bbr(gsp, a, cache),
    }
}

/// `(⊤, b)`, or `(⊤*, b)` for recall.
pub fn constant_strategy(gsp: &Gsp, a: AgentId, b: Value, kind: Kind, cache: &LetterCache) -> Result<NatStrategy, GspError> {
    let act = gsp
        .bid_action(b)
        .ok_or_else(|| GspError::Spec(format!("bid {b} is not on the grid")))?;
    let g = match kind {
        Kind::Memoryless => Guard::top(),
        Kind::Recall => Guard::Regex(GuardRegex::top_star()),
    };
    let name = format!("C{}_{}", b.to_string().replace('/', "_"), gsp.agent_name(a));
    Ok(NatStrategy::new(&gsp.model, name, a, kind, vec![(g, act)], cache)?)
}

/// Strategies of one family for every agent, in agent order.
pub fn family_profile(gsp: &Gsp, family: Family, cache: &LetterCache) -> Result<Vec<Arc<NatStrategy>>, GspError> {
    (0..gsp.spec.num_agents())
        .map(|a| build_strategy(gsp, family, a, cache).map(Arc::new))
        .collect()
}

pub fn bundle_of(profiles: &[&[Arc<NatStrategy>]]) -> Result<StrategyBundle, GspError> {
    let mut b = StrategyBundle::new();
    for p in profiles {
        for s in *p {
            b.insert(s.renamed(s.name()))?;
        }
    }
    Ok(b)
}

fn names(profile: &[Arc<NatStrategy>]) -> Vec<(String, String)> {
    profile
        .iter()
        .map(|s| (s.agent_name().to_string(), s.name().to_string()))
        .collect()
}

fn expr(text: &str) -> Formula {
    parse_formula(text).expect("generated formula text parses")
}

/// `(Ag, σ) X util_a`
fn next_util(gsp: &Gsp, profile: &[(String, String)], a: AgentId) -> Formula {
    Formula::bind_all(profile, Formula::next(expr(&gsp.util_text(a))))
}

/// `∀t ≤ k . [(Ag−a, σ−a)(a, t) X util_a ⪯ (Ag, σ) X util_a]`
pub fn ne_agent_formula(gsp: &Gsp, profile: &[Arc<NatStrategy>], a: AgentId, k: usize) -> Formula {
    let p = names(profile);
    let name = gsp.agent_name(a);
    let others: Vec<(String, String)> = p.iter().filter(|(ag, _)| ag != name).cloned().collect();
    let var = format!("t{name}");
    let deviate = Formula::bind_all(
        &others,
        Formula::bind_var(name, var.clone(), Formula::next(expr(&gsp.util_text(a)))),
    );
    Formula::forall(
        var,
        name,
        k,
        Formula::fun(crate::func::Func::Pref, vec![deviate, next_util(gsp, &p, a)]),
    )
}

/// `⋀_a ∀t ≤ k . [(Ag−a, σ−a)(a, t) X util_a ⪯ (Ag, σ) X util_a]`
pub fn ne_formula(gsp: &Gsp, profile: &[Arc<NatStrategy>], k: usize) -> Formula {
    Formula::and(
        (0..gsp.spec.num_agents())
            .map(|a| ne_agent_formula(gsp, profile, a, k))
            .collect(),
    )
}

/// Local envy-freeness of agent `a` at the current state.
fn lef_text(gsp: &Gsp, a: AgentId) -> String {
    let m = gsp.spec.slots;
    let name = gsp.agent_name(a);
    let mut parts: Vec<String> = (2..=m)
        .map(|s| {
            format!(
                "implies(eq(alloc_{name}_{s}, 1), geq({}, {}))",
                gsp.util_slot_text(a, s),
                gsp.util_slot_text(a, s - 1)
            )
        })
        .collect();
    let unallocated: Vec<String> = (1..=m).map(|s| format!("eq(alloc_{name}_{s}, 0)")).collect();
    parts.push(format!(
        "implies(and({}), geq(0, {}))",
        unallocated.join(", "),
        gsp.util_slot_text(a, m)
    ));
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("and({})", parts.join(", "))
    }
}

/// `⋀_a (Ag, σ) X [LEF^a ∧ LEFloser^a]`
pub fn lefe_formula(gsp: &Gsp, profile: &[Arc<NatStrategy>]) -> Formula {
    let p = names(profile);
    Formula::and(
        (0..gsp.spec.num_agents())
            .map(|a| Formula::bind_all(&p, Formula::next(expr(&lef_text(gsp, a)))))
            .collect(),
    )
}

/// Allocation and prices equal the truthful VCG outcome, as a state formula.
pub fn vcg_outcome_text(gsp: &Gsp) -> String {
    let spec = &gsp.spec;
    let cases: Vec<String> = spec
        .valuation_profiles()
        .iter()
        .map(|vals| {
            let vcg = vcg_outcome(spec, vals);
            let guard: Vec<String> = spec
                .agents
                .iter()
                .zip(vals)
                .map(|(a, v)| format!("eq(val_{a}, {v})"))
                .collect();
            let body = gsp.outcome_text(&vcg.alloc, vcg.payments(spec.vcg_convention));
            format!("implies(and({}), {body})", guard.join(", "))
        })
        .collect();
    if cases.len() == 1 {
        cases[0].clone()
    } else {
        format!("and({})", cases.join(", "))
    }
}

/// `(Ag, σ) X [⋀_s price_s = VCG_s(val) ∧ ⋀_a alloc_{a,s} = VCGalloc_{a,s}(val)]`
pub fn vcg_formula(gsp: &Gsp, profile: &[Arc<NatStrategy>]) -> Formula {
    Formula::bind_all(&names(profile), Formula::next(expr(&vcg_outcome_text(gsp))))
}

/// `(Ag, σ) F G inner`
pub fn convergence_formula(profile: &[Arc<NatStrategy>], inner: Formula) -> Formula {
    Formula::bind_all(&names(profile), Formula::eventually(Formula::always(inner)))
}

/// `(Ag, σ) X price_s ⪯ (Ag, σ') X price_s`
pub fn price_bound_formula(low: &[Arc<NatStrategy>], high: &[Arc<NatStrategy>], s: usize) -> Formula {
    let side = |p: &[Arc<NatStrategy>]| Formula::bind_all(&names(p), Formula::next(Formula::atom(format!("price_{s}"))));
    Formula::fun(crate::func::Func::Pref, vec![side(low), side(high)])
}

/// `(Ag, σ) X (Σ_s price_s ≥ Σ_s VCG_s)`, with per-click VCG payments.
pub fn revenue_formula(gsp: &Gsp, profile: &[Arc<NatStrategy>]) -> Formula {
    let spec = &gsp.spec;
    let prices: Vec<String> = (1..=spec.slots).map(|s| format!("price_{s}")).collect();
    let cases: Vec<String> = spec
        .valuation_profiles()
        .iter()
        .map(|vals| {
            let guard: Vec<String> = spec.agents.iter().zip(vals).map(|(a, v)| format!("eq(val_{a}, {v})")).collect();
            let total: Value = vcg_outcome(spec, vals).per_click.iter().copied().sum();
            format!("implies(and({}), geq(sum({}), {total}))", guard.join(", "), prices.join(", "))
        })
        .collect();
    Formula::bind_all(
        &names(profile),
        Formula::next(expr(&format!("and({})", cases.join(", ")))),
    )
}

/// Evaluates `φ` at every reachable state under the profile's semantics.
pub fn eval_everywhere(checker: &mut Checker, phi: &Formula) -> Result<Vec<Value>, GspError> {
    let m = checker.model();
    let chi = Assignment::new(m);
    (0..m.num_states())
        .map(|q| checker.eval(phi, q, &chi).map_err(GspError::from))
        .collect()
}

/// Plays the profile from `q` for `rounds` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub state: StateId,
    pub bids: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub cycle_start: usize,
    pub cycle_len: usize,
}

pub fn simulate(gsp: &Gsp, profile: &[Arc<NatStrategy>], q: StateId, rounds: usize) -> Result<Trace, GspError> {
    let chi = Assignment::total(&gsp.model, profile.iter().cloned());
    let (states, start) = crate::checker::outcome_states(&gsp.model, &chi, q)?;
    let mut runs: Vec<_> = profile.iter().map(|s| s.initial_run()).collect();
    let mut rows = Vec::new();
    let mut state = q;
    for round in 0..rounds {
        runs = profile.iter().zip(&runs).map(|(s, r)| s.advance(r, state)).collect();
        let acts: Vec<ActionId> = profile.iter().zip(&runs).map(|(s, r)| s.action_at(r, state)).collect();
        let bids: Vec<Value> = acts.iter().map(|&b| gsp.bid_value(b)).collect();
        rows.push(TraceRow { round, state, bids });
        state = gsp.model.successor_unchecked(state, &acts);
    }
    Ok(Trace {
        rows,
        cycle_start: start,
        cycle_len: states.len() - start,
    })
}

impl Trace {
    pub fn to_csv(&self, gsp: &Gsp) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let m = gsp.spec.slots;
        let mut header = vec!["round".to_string()];
        header.extend((1..=m).map(|s| format!("alloc_{s}")));
        header.extend((1..=m).map(|s| format!("price_{s}")));
        header.extend(gsp.spec.agents.iter().map(|a| format!("bid_{a}")));
        header.push("cycle_start".into());
        w.write_record(&header).unwrap();
        for r in &self.rows {
            let st = gsp.state(r.state);
            let mut rec = vec![r.round.to_string()];
            rec.extend(st.alloc.iter().map(|a| a.map_or("none".to_string(), |a| gsp.agent_name(a).to_string())));
            rec.extend(st.price.iter().map(Value::to_string));
            rec.extend(r.bids.iter().map(Value::to_string));
            rec.push(if r.round == self.cycle_start { "1" } else { "0" }.into());
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub const CHECKS: [&str; 10] = [
    "lefe-implies-ne",
    "vcg-implies-lefe",
    "revenue-bound",
    "bb-fixed-point-bids",
    "bb-converges-m2",
    "bb-diverges-m3",
    "rbb-converges",
    "kbb-price-bound",
    "bbr-converges",
    "bbr-one-step-utility",
];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Deviation pool for `lefe-implies-ne`; `None` uses ⊤ and `K[a](alloc_a_s)`.
    pub pool: Option<GuardPool>,
    pub k: usize,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { pool: None, k: 2, jobs: 1 }
    }
}

/// Default deviation pool: ⊤ plus "I hold slot s" for every slot.
pub fn default_pool(spec: &AuctionSpec) -> GuardPool {
    let mut entries = vec!["top".to_string()];
    entries.extend((1..=spec.slots).map(|s| format!("K[$self](alloc_$self_{s})")));
    GuardPool::new("alloc", entries).expect("default pool parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckValue {
    pub profile: String,
    pub state: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceWitness {
    pub profile: String,
    pub state: String,
    pub cycle_start: usize,
    pub cycle_len: usize,
    /// Outcome at each round up to and including one full cycle.
    pub rounds: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub schema: &'static str,
    pub check: String,
    pub pass: bool,
    /// States at which the implication or identity was tested.
    pub checked: usize,
    pub values: Vec<CheckValue>,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TraceWitness>,
}

impl CheckOutcome {
    fn new(check: &str) -> Self {
        CheckOutcome {
            schema: "gsp-verify/1",
            check: check.to_string(),
            pass: true,
            checked: 0,
            values: Vec::new(),
            failures: Vec::new(),
            witness: None,
        }
    }

    fn fail(&mut self, msg: String) {
        self.pass = false;
        if self.failures.len() < 50 {
            self.failures.push(msg);
        }
    }
}

struct Ctx<'g> {
    gsp: &'g Gsp,
    cache: LetterCache,
    opts: &'g VerifyOptions,
}

impl<'g> Ctx<'g> {
    fn family(&self, f: Family) -> Result<Vec<Arc<NatStrategy>>, GspError> {
        family_profile(self.gsp, f, &self.cache)
    }

    fn constants(&self, kind: Kind) -> Result<Vec<Vec<Arc<NatStrategy>>>, GspError> {
        let n = self.gsp.spec.num_agents();
        let per_agent: Vec<Vec<Arc<NatStrategy>>> = (0..n)
            .map(|a| {
                self.gsp
                    .bids()
                    .iter()
                    .map(|&b| constant_strategy(self.gsp, a, b, kind, &self.cache).map(Arc::new))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mut out = vec![Vec::new()];
        for options in per_agent {
            out = out
                .into_iter()
                .flat_map(|p| {
                    options.iter().map(move |s| {
                        let mut p = p.clone();
                        p.push(s.clone());
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }

    fn state_name(&self, q: StateId) -> String {
        self.gsp.model.state_name(q).to_string()
    }
}

fn profile_label(p: &[Arc<NatStrategy>]) -> String {
    let names: Vec<&str> = p.iter().map(|s| s.name()).collect();
    format!("({})", names.join(", "))
}

fn checker<'a>(gsp: &'a Gsp, sem: Semantics, pool: &'a GuardPool, bundle: &'a StrategyBundle, jobs: usize) -> Checker<'a> {
    Checker::new(&gsp.model, sem, pool)
        .with_bundle(bundle)
        .with_promote(true)
        .with_jobs(jobs)
}

pub fn verify(gsp: &Gsp, check: &str, opts: &VerifyOptions) -> Result<CheckOutcome, GspError> {
    let ctx = Ctx {
        gsp,
        cache: LetterCache::new(),
        opts,
    };
    match check {
        "lefe-implies-ne" => lefe_implies_ne(&ctx),
        "vcg-implies-lefe" => vcg_implies_lefe(&ctx),
        "revenue-bound" => revenue_bound(&ctx),
        "bb-fixed-point-bids" => fixed_point_bids(&ctx),
        "bb-converges-m2" => {
            if gsp.spec.slots != 2 {
                return Err(not_applicable(check, format!("needs 2 slots, the spec has {}", gsp.spec.slots)));
            }
            converges(&ctx, check, Family::Bb)
        }
        "bb-diverges-m3" => {
            if gsp.spec.slots < 3 {
                return Err(not_applicable(check, format!("needs at least 3 slots, the spec has {}", gsp.spec.slots)));
            }
            diverges(&ctx, check, Family::Bb)
        }
        "rbb-converges" => converges(&ctx, check, Family::Rbb),
        "kbb-price-bound" => kbb_price_bound(&ctx),
        "bbr-converges" => converges(&ctx, check, Family::Bbr),
        "bbr-one-step-utility" => bbr_one_step_utility(&ctx),
        other => Err(GspError::UnknownCheck(other.to_string())),
    }
}

fn not_applicable(check: &str, reason: String) -> GspError {
    GspError::NotApplicable {
        check: check.to_string(),
        reason,
    }
}

/// Profiles quantified over by the implication checks.
fn test_profiles(ctx: &Ctx, families: &[Family]) -> Result<Vec<Vec<Arc<NatStrategy>>>, GspError> {
    let mut out = Vec::new();
    for &f in families {
        out.push(ctx.family(f)?);
    }
    out.extend(ctx.constants(Kind::Memoryless)?);
    Ok(out)
}

fn lefe_implies_ne(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let mut out = CheckOutcome::new("lefe-implies-ne");
    let pool = ctx.opts.pool.clone().unwrap_or_else(|| default_pool(&gsp.spec));
    for profile in test_profiles(ctx, &[Family::Rbb])? {
        let bundle = bundle_of(&[&profile])?;
        let mut ch = checker(gsp, Semantics::Ir, &pool, &bundle, ctx.opts.jobs);
        let lefe = lefe_formula(gsp, &profile);
        let agents_ne: Vec<Formula> = (0..gsp.spec.num_agents())
            .map(|a| ne_agent_formula(gsp, &profile, a, ctx.opts.k))
            .collect();
        let chi = Assignment::new(&gsp.model);
        for q in 0..gsp.model.num_states() {
            if ch.eval(&lefe, q, &chi)? != Value::ONE {
                continue;
            }
            out.checked += 1;
            for (a, ne) in agents_ne.iter().enumerate() {
                let v = ch.eval(ne, q, &chi)?;
                if v != Value::ONE {
                    out.fail(format!(
                        "{} at {} ({}): LEFE = 1 but agent {} can deviate, NE = {v}",
                        profile_label(&profile),
                        ctx.state_name(q),
                        gsp.state(q).describe(&gsp.spec),
                        gsp.agent_name(a)
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn vcg_implies_lefe(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let mut out = CheckOutcome::new("vcg-implies-lefe");
    let pool = GuardPool::top_only();
    for profile in test_profiles(ctx, &[Family::Bb, Family::Rbb, Family::Kbb])? {
        let bundle = bundle_of(&[&profile])?;
        let mut ch = checker(gsp, Semantics::Ir, &pool, &bundle, 1);
        let vcg = vcg_formula(gsp, &profile);
        let lefe = lefe_formula(gsp, &profile);
        let revenue = revenue_formula(gsp, &profile);
        let chi = Assignment::new(&gsp.model);
        for q in 0..gsp.model.num_states() {
            if ch.eval(&vcg, q, &chi)? != Value::ONE {
                continue;
            }
            out.checked += 1;
            let l = ch.eval(&lefe, q, &chi)?;
            let r = ch.eval(&revenue, q, &chi)?;
            if l != Value::ONE || r != Value::ONE {
                out.fail(format!(
                    "{} at {}: φVCG = 1 but LEFE = {l}, revenue bound = {r}",
                    profile_label(&profile),
                    ctx.state_name(q)
                ));
            }
        }
    }
    Ok(out)
}

fn revenue_bound(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let mut out = CheckOutcome::new("revenue-bound");
    let pool = GuardPool::top_only();
    for profile in test_profiles(ctx, &[Family::Bb, Family::Rbb, Family::Kbb])? {
        let bundle = bundle_of(&[&profile])?;
        let mut ch = checker(gsp, Semantics::Ir, &pool, &bundle, 1);
        let lefe = lefe_formula(gsp, &profile);
        let revenue = revenue_formula(gsp, &profile);
        let chi = Assignment::new(&gsp.model);
        for q in 0..gsp.model.num_states() {
            if ch.eval(&lefe, q, &chi)? != Value::ONE {
                continue;
            }
            out.checked += 1;
            let r = ch.eval(&revenue, q, &chi)?;
            if r != Value::ONE {
                out.fail(format!(
                    "{} at {}: LEFE = 1 but Σ price < Σ VCG (value {r})",
                    profile_label(&profile),
                    ctx.state_name(q)
                ));
            }
        }
    }
    Ok(out)
}

fn matched_bid(gsp: &Gsp, s: &NatStrategy, q: StateId) -> Value {
    let run = s.advance(&s.initial_run(), q);
    gsp.bid_value(s.action_at(&run, q))
}

fn fixed_point_bids(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let spec = &gsp.spec;
    let n = spec.num_agents();
    let mut out = CheckOutcome::new("bb-fixed-point-bids");
    let pool = GuardPool::top_only();
    for fam in [Family::Bb, Family::Rbb, Family::Bbr] {
        let profile = ctx.family(fam)?;
        let bundle = bundle_of(&[&profile])?;
        let mut ch = checker(gsp, fam.semantics(), &pool, &bundle, 1);
        let vcg = vcg_formula(gsp, &profile);
        let chi = Assignment::new(&gsp.model);
        for q in 0..gsp.model.num_states() {
            if ch.eval(&vcg, q, &chi)? != Value::ONE {
                continue;
            }
            out.checked += 1;
            let st = gsp.state(q);
            let eta = rank(&st.val);
            let bid = |x: usize| matched_bid(gsp, &profile[eta[x - 1]], q);
            for x in 2..=n {
                let expected = equilibrium_bid(spec, &st.val, x)?;
                if bid(x) != expected {
                    out.fail(format!(
                        "{fam} at {}: η{x} = {} bids {} but the equilibrium bid is {expected}",
                        ctx.state_name(q),
                        gsp.agent_name(eta[x - 1]),
                        bid(x)
                    ));
                }
            }
            if n > 1 && bid(1) <= bid(2) {
                out.fail(format!(
                    "{fam} at {}: η1 = {} bids {}, not above η2's {}",
                    ctx.state_name(q),
                    gsp.agent_name(eta[0]),
                    bid(1),
                    bid(2)
                ));
            }
        }
    }
    Ok(out)
}

fn convergence_values(ctx: &Ctx, fam: Family) -> Result<(Vec<Arc<NatStrategy>>, Vec<(StateId, Value)>), GspError> {
    let gsp = ctx.gsp;
    let profile = ctx.family(fam)?;
    let bundle = bundle_of(&[&profile])?;
    let pool = GuardPool::top_only();
    let mut ch = checker(gsp, fam.semantics(), &pool, &bundle, ctx.opts.jobs);
    let phi = convergence_formula(&profile, expr(&vcg_outcome_text(gsp)));
    let chi = Assignment::new(&gsp.model);
    let mut vals = Vec::new();
    for &q in gsp.model.initial() {
        vals.push((q, ch.eval(&phi, q, &chi)?));
    }
    Ok((profile, vals))
}

pub fn trace_witness(gsp: &Gsp, profile: &[Arc<NatStrategy>], q: StateId) -> Result<TraceWitness, GspError> {
    let chi = Assignment::total(&gsp.model, profile.iter().cloned());
    let (states, start) = crate::checker::outcome_states(&gsp.model, &chi, q)?;
    Ok(TraceWitness {
        profile: profile_label(profile),
        state: gsp.model.state_name(q).to_string(),
        cycle_start: start,
        cycle_len: states.len() - start,
        rounds: states
            .iter()
            .map(|&s| format!("{}: {}", gsp.model.state_name(s), gsp.state(s).describe(&gsp.spec)))
            .collect(),
    })
}

fn converges(ctx: &Ctx, check: &str, fam: Family) -> Result<CheckOutcome, GspError> {
    let mut out = CheckOutcome::new(check);
    let (profile, vals) = convergence_values(ctx, fam)?;
    for (q, v) in vals {
        out.checked += 1;
        out.values.push(CheckValue {
            profile: profile_label(&profile),
            state: ctx.state_name(q),
            value: v,
        });
        if v != Value::ONE {
            out.fail(format!("{fam} from {}: F G φVCG = {v}", ctx.state_name(q)));
            if out.witness.is_none() {
                out.witness = Some(trace_witness(ctx.gsp, &profile, q)?);
            }
        }
    }
    Ok(out)
}

fn diverges(ctx: &Ctx, check: &str, fam: Family) -> Result<CheckOutcome, GspError> {
    let mut out = CheckOutcome::new(check);
    let (profile, vals) = convergence_values(ctx, fam)?;
    for (q, v) in vals {
        out.checked += 1;
        out.values.push(CheckValue {
            profile: profile_label(&profile),
            state: ctx.state_name(q),
            value: v,
        });
        if v != Value::ONE && out.witness.is_none() {
            out.witness = Some(trace_witness(ctx.gsp, &profile, q)?);
        }
    }
    if out.witness.is_none() {
        out.fail(format!("{fam} reaches the VCG outcome from every initial state"));
    }
    Ok(out)
}

fn kbb_price_bound(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let mut out = CheckOutcome::new("kbb-price-bound");
    let kbb = ctx.family(Family::Kbb)?;
    let rbb = ctx.family(Family::Rbb)?;
    let bundle = bundle_of(&[&kbb, &rbb])?;
    let pool = GuardPool::top_only();
    let mut ch = checker(gsp, Semantics::Ir, &pool, &bundle, 1);
    let chi = Assignment::new(&gsp.model);
    for s in 1..=gsp.spec.slots {
        let phi = price_bound_formula(&kbb, &rbb, s);
        for q in 0..gsp.model.num_states() {
            out.checked += 1;
            let v = ch.eval(&phi, q, &chi)?;
            if v != Value::ONE {
                out.fail(format!("{}: next price_{s} under KBB exceeds RBB (value {v})", ctx.state_name(q)));
            }
        }
    }
    // Without public valuations and with every valuation uncertain, no
    // agent ever knows an opponent's valuation, so KBB plays like RBB.
    if gsp.spec.public_valuations.is_empty() && gsp.spec.valuations.iter().all(|v| v.len() > 1) {
        let k = Assignment::total(&gsp.model, kbb.iter().cloned());
        let r = Assignment::total(&gsp.model, rbb.iter().cloned());
        for q in 0..gsp.model.num_states() {
            let tk = crate::checker::outcome_states(&gsp.model, &k, q)?;
            let tr = crate::checker::outcome_states(&gsp.model, &r, q)?;
            if tk != tr {
                out.fail(format!("{}: KBB and RBB traces differ without public valuations", ctx.state_name(q)));
            }
        }
    }
    Ok(out)
}

/// Bid profiles whose outcome is the allocation and prices of `q`.
fn supporting_bids(gsp: &Gsp, q: StateId) -> Vec<Vec<Value>> {
    let st = gsp.state(q);
    let n = gsp.spec.num_agents();
    let bids = gsp.bids();
    let mut out = Vec::new();
    let mut code = vec![0usize; n];
    loop {
        let b: Vec<Value> = code.iter().map(|&i| bids[i]).collect();
        let next = gsp_successor(&gsp.spec, st, &b);
        if next.alloc == st.alloc && next.price == st.price {
            out.push(b);
        }
        let mut i = 0;
        while i < n {
            code[i] += 1;
            if code[i] < bids.len() {
                break;
            }
            code[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

fn bbr_one_step_utility(ctx: &Ctx) -> Result<CheckOutcome, GspError> {
    let gsp = ctx.gsp;
    let n = gsp.spec.num_agents();
    let mut out = CheckOutcome::new("bbr-one-step-utility");
    let bbr = ctx.family(Family::Bbr)?;
    let rbb = ctx.family(Family::Rbb)?;
    let initial = gsp.model.initial();
    let mut constants: HashMap<(AgentId, Value), Arc<NatStrategy>> = HashMap::new();
    for a in 0..n {
        for &b in gsp.bids() {
            constants.insert((a, b), Arc::new(constant_strategy(gsp, a, b, Kind::Recall, &ctx.cache)?));
        }
    }
    for q in (0..gsp.model.num_states()).filter(|q| !initial.contains(q)) {
        let support = supporting_bids(gsp, q);
        for a in 0..n {
            let x = matched_bid(gsp, &bbr[a], q);
            let y = matched_bid(gsp, &rbb[a], q);
            if x == y {
                continue;
            }
            let mut seen = std::collections::HashSet::new();
            for b in &support {
                let mut others = b.clone();
                others[a] = Value::ZERO;
                if !seen.insert(others.clone()) {
                    continue;
                }
                out.checked += 1;
                let util = |own: Value| -> Value {
                    let mut bids = others.clone();
                    bids[a] = own;
                    let next = gsp_successor(&gsp.spec, gsp.state(q), &bids);
                    next.slot_of(a)
                        .map_or(Value::ZERO, |s| gsp.spec.theta(s) * (next.val[a] - next.price[s - 1]))
                };
                // Cross-check the direct computation with the checker.
                let profile_with = |own: &Arc<NatStrategy>| -> Vec<Arc<NatStrategy>> {
                    (0..n)
                        .map(|c| if c == a { own.clone() } else { constants[&(c, others[c])].clone() })
                        .collect()
                };
                let with_bbr = profile_with(&bbr[a]);
                let with_rbb = profile_with(&rbb[a]);
                let bundle = bundle_of(&[&with_bbr, &with_rbb[a..a + 1]])?;
                let pool = GuardPool::top_only();
                let mut ch = checker(gsp, Semantics::IR, &pool, &bundle, 1);
                let chi = Assignment::new(&gsp.model);
                let ub = ch.eval(&next_util(gsp, &names(&with_bbr), a), q, &chi)?;
                let ur = ch.eval(&next_util(gsp, &names(&with_rbb), a), q, &chi)?;
                debug_assert_eq!(ub, util(x));
                debug_assert_eq!(ur, util(y));
                if ub <= ur {
                    out.fail(format!(
                        "{} agent {}: BBR bids {x}, RBB bids {y}, opponents {:?}; next utility {ub} vs {ur}",
                        ctx.state_name(q),
                        gsp.agent_name(a),
                        others.iter().enumerate().filter(|(c, _)| *c != a).map(|(_, v)| v.to_string()).collect::<Vec<_>>(),
                    ));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn spec(agents: usize, slots: usize, ctr: &[&str], inc: &str, vals: &[&[&str]]) -> AuctionSpec {
        AuctionSpec {
            agents: (1..=agents).map(|i| i.to_string()).collect(),
            slots,
            ctr: ctr.iter().map(|c| v(c)).collect(),
            increment: v(inc),
            valuations: vals.iter().map(|vs| vs.iter().map(|x| v(x)).collect()).collect(),
            public_valuations: Vec::new(),
            vcg_convention: VcgConvention::PerClick,
            bid_cases: BidCases::Swapped,
            state_cap: DEFAULT_STATE_CAP,
        }
    }

    fn desk() -> Gsp {
        build_gsp(&spec(3, 2, &["1", "1/2"], "1/4", &[&["1"], &["1/2"], &["0"]])).unwrap()
    }

    #[test]
    fn action_grid() {
        let g = build_gsp(&spec(2, 1, &["1"], "1/2", &[&["3/4"], &["1/2"]]));
        // 3/4 is off the 1/2 grid
        assert!(g.is_err());
        let g = build_gsp(&spec(2, 1, &["1"], "1/2", &[&["1"], &["1/2"]])).unwrap();
        assert_eq!(g.model.actions(), ["0", "1/2", "1"]);
        assert_eq!(g.model.initial().len(), 1);
        let init = g.state(g.model.initial()[0]);
        assert_eq!(init.alloc, vec![None]);
        assert_eq!(init.price, vec![Value::ZERO]);
    }

    #[test]
    fn one_initial_state_per_profile() {
        let g = build_gsp(&spec(2, 2, &["1", "1/2"], "1/4", &[&["1", "3/4"], &["1/2", "1/4"]])).unwrap();
        assert_eq!(g.model.initial().len(), 4);
    }

    #[test]
    fn rank_breaks_ties_by_order() {
        assert_eq!(rank(&[v("0.6"), v("0.4")]), vec![0, 1]);
        assert_eq!(rank(&[v("0.4"), v("0.6")]), vec![1, 0]);
        assert_eq!(rank(&[v("0.5"), v("0.5")]), vec![0, 1]);
    }

    #[test]
    fn successor_clauses() {
        let s2 = spec(2, 2, &["1", "1/2"], "1/10", &[&["1"], &["1/2"]]);
        let q = GspState::initial(&s2, vec![v("1"), v("1/2")]);
        let next = gsp_successor(&s2, &q, &[v("0.6"), v("0.4")]);
        assert_eq!(next.alloc, vec![Some(0), Some(1)]);
        assert_eq!(next.price, vec![v("0.4"), Value::ZERO]);
        let s3 = spec(3, 2, &["1", "1/2"], "1/10", &[&["1"], &["1/2"], &["0"]]);
        let q = GspState::initial(&s3, vec![v("1"), v("1/2"), v("0")]);
        let next = gsp_successor(&s3, &q, &[v("0.6"), v("0.4"), v("0.2")]);
        assert_eq!(next.price, vec![v("0.4"), v("0.2")]);
        let s1 = spec(1, 2, &["1", "1/2"], "1/10", &[&["1"]]);
        let q = GspState::initial(&s1, vec![v("1")]);
        let next = gsp_successor(&s1, &q, &[v("0.3")]);
        assert_eq!(next.alloc, vec![Some(0), None]);
        assert_eq!(next.price, vec![Value::ZERO, Value::ZERO]);
    }

    #[test]
    fn vcg_payments() {
        let s = spec(3, 2, &["1", "1/2"], "1/10", &[&["0.8"], &["0.6"], &["0.4"]]);
        let out = vcg_outcome(&s, &[v("0.8"), v("0.6"), v("0.4")]);
        assert_eq!(out.total, vec![v("1/2"), v("1/5")]);
        assert_eq!(out.per_click, vec![v("1/2"), v("2/5")]);
        assert_eq!(out.alloc, vec![Some(0), Some(1)]);
        let s = spec(2, 2, &["1", "1/2"], "1/10", &[&["0.8"], &["0.6"]]);
        assert_eq!(vcg_outcome(&s, &[v("0.8"), v("0.6")]).total[1], Value::ZERO);
        let s = spec(2, 1, &["1/2"], "1/10", &[&["0.8"], &["0.6"]]);
        assert_eq!(vcg_outcome(&s, &[v("0.8"), v("0.6")]).total, vec![v("0.3")]);
    }

    #[test]
    fn equilibrium_bids_match_vcg() {
        let s = spec(3, 2, &["1", "1/2"], "1/10", &[&["0.8"], &["0.6"], &["0.4"]]);
        let vals = [v("0.8"), v("0.6"), v("0.4")];
        assert_eq!(equilibrium_bid(&s, &vals, 3).unwrap(), v("0.4"));
        assert_eq!(equilibrium_bid(&s, &vals, 2).unwrap(), v("1/2"));
        let vcg = vcg_outcome(&s, &vals);
        assert_eq!(vcg.per_click[0], equilibrium_bid(&s, &vals, 2).unwrap());
        assert_eq!(vcg.per_click[1], equilibrium_bid(&s, &vals, 3).unwrap());
        assert!(matches!(equilibrium_bid(&s, &vals, 1), Err(GspError::PositionOutOfRange { .. })));
        assert!(matches!(equilibrium_bid(&s, &vals, 4), Err(GspError::PositionOutOfRange { .. })));
        let s4 = spec(4, 2, &["1", "1/2"], "1/10", &[&["0.8"], &["0.6"], &["0.4"], &["0.2"]]);
        let vals4 = [v("0.8"), v("0.6"), v("0.4"), v("0.2")];
        assert_eq!(equilibrium_bid(&s4, &vals4, 4).unwrap(), v("0.2"));
    }

    #[test]
    fn final_pairs() {
        let g = desk();
        let cache = LetterCache::new();
        let zero = g.bid_action(Value::ZERO).unwrap();
        let bb = build_bb(&g, 0, &cache).unwrap();
        let (last, act) = bb.pairs().last().unwrap();
        assert!(matches!(last, Guard::State(_)) && last.is_catch_all());
        assert_eq!(*act, zero);
        let bbr = build_bbr(&g, 0, &cache).unwrap();
        let (last, act) = bbr.pairs().last().unwrap();
        assert!(matches!(last, Guard::Regex(_)) && last.is_catch_all());
        assert_eq!(*act, zero);
        assert_eq!(bbr.kind(), Kind::Recall);
        assert_eq!(bb.name(), "BB_1");
    }

    #[test]
    fn guards_agree_with_direct_bids() {
        for g in [
            desk(),
            build_gsp(&spec(2, 2, &["1", "1/2"], "1/4", &[&["1", "3/4"], &["1/2", "1/4"]])).unwrap(),
        ] {
            let cache = LetterCache::new();
            for a in 0..g.spec.num_agents() {
                let bb = build_bb(&g, a, &cache).unwrap();
                let rbb = build_rbb(&g, a, &cache).unwrap();
                for q in 0..g.model.num_states() {
                    let st = g.state(q);
                    assert_eq!(matched_bid(&g, &bb, q), balanced_bid(&g.spec, st, a, false), "BB at {q}");
                    assert_eq!(matched_bid(&g, &rbb, q), balanced_bid(&g.spec, st, a, true), "RBB at {q}");
                }
            }
        }
    }

    #[test]
    fn kbb_falls_back_without_knowledge() {
        let g = build_gsp(&spec(2, 2, &["1", "1/2"], "1/4", &[&["1", "3/4"], &["1/2", "1/4"]])).unwrap();
        let cache = LetterCache::new();
        for a in 0..2 {
            let kbb = build_kbb(&g, a, &cache).unwrap();
            let rbb = build_rbb(&g, a, &cache).unwrap();
            for q in 0..g.model.num_states() {
                assert_eq!(matched_bid(&g, &kbb, q), matched_bid(&g, &rbb, q));
            }
        }
    }

    #[test]
    fn kbb_uses_public_knowledge() {
        let mut s = spec(2, 2, &["1", "1/2"], "1/4", &[&["1", "3/4"], &["1/2", "1/4"]]);
        s.public_valuations = vec!["1".into(), "2".into()];
        let g = build_gsp(&s).unwrap();
        let cache = LetterCache::new();
        let kbb = build_kbb(&g, 1, &cache).unwrap();
        let rbb = build_rbb(&g, 1, &cache).unwrap();
        let grounded = kbb.len() - rbb.len();
        let fired = (0..g.model.num_states()).any(|q| {
            let run = kbb.advance(&kbb.initial_run(), q);
            kbb.match_at(&run, q) < grounded
        });
        assert!(fired);
    }

    #[test]
    fn spec_roundtrip_and_errors() {
        let g = desk();
        let text = g.spec.to_toml();
        assert_eq!(AuctionSpec::parse_toml(&text).unwrap(), g.spec);
        let bad = text.replace("slots = 2", "slots = 2\ncolour = 1");
        assert!(matches!(AuctionSpec::parse_toml(&bad), Err(GspError::Toml(_))));
        let mut s = g.spec.clone();
        s.ctr = vec![v("1/2"), v("1")];
        assert!(s.validate().is_err());
        s.ctr = vec![v("1"), v("0")];
        assert!(s.validate().is_err());
        let mut s = g.spec.clone();
        s.state_cap = 10;
        assert!(matches!(build_gsp(&s), Err(GspError::TooLarge { .. })));
    }

    #[test]
    fn simulate_constant_zero() {
        let g = desk();
        let cache = LetterCache::new();
        let p: Vec<Arc<NatStrategy>> = (0..3)
            .map(|a| Arc::new(constant_strategy(&g, a, Value::ZERO, Kind::Memoryless, &cache).unwrap()))
            .collect();
        let q0 = g.model.initial()[0];
        let t = simulate(&g, &p, q0, 4).unwrap();
        let after = g.state(g.model.successor_unchecked(q0, &[0, 0, 0]));
        assert_eq!(after.price, vec![Value::ZERO; 2]);
        assert_eq!(after.alloc, vec![Some(0), Some(1)]);
        assert_eq!((t.cycle_start, t.cycle_len), (1, 1));
        let csv = t.to_csv(&g);
        assert!(csv.starts_with("round,alloc_1,alloc_2,price_1,price_2,bid_1,bid_2,bid_3,cycle_start\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn simulate_matches_successor_composition() {
        let g = desk();
        let cache = LetterCache::new();
        let p = family_profile(&g, Family::Rbb, &cache).unwrap();
        let q0 = g.model.initial()[0];
        let t = simulate(&g, &p, q0, 10).unwrap();
        let mut q = q0;
        for row in &t.rows {
            assert_eq!(row.state, q);
            let bids: Vec<Value> = (0..3).map(|a| balanced_bid(&g.spec, g.state(q), a, true)).collect();
            assert_eq!(row.bids, bids);
            q = g.successor(q, &bids);
        }
        assert_eq!(t.cycle_len, 1);
    }

    #[test]
    fn lef_with_one_slot_is_loser_clause() {
        let g = build_gsp(&spec(1, 1, &["1"], "1/2", &[&["1/2"]])).unwrap();
        assert_eq!(lef_text(&g, 0), "implies(and(eq(alloc_1_1, 0)), geq(0, mul(1, sub(val_1, price_1))))");
    }

    #[test]
    fn ne_with_empty_deviation_set_is_vacuous() {
        let g = desk();
        let cache = LetterCache::new();
        let p = family_profile(&g, Family::Rbb, &cache).unwrap();
        let bundle = bundle_of(&[&p]).unwrap();
        let pool = GuardPool::top_only();
        let mut ch = checker(&g, Semantics::Ir, &pool, &bundle, 1);
        let v = ch.eval(&ne_formula(&g, &p, 0), 0, &Assignment::new(&g.model)).unwrap();
        assert_eq!(v, Value::ONE);
    }

    #[test]
    fn convergence_shape() {
        let g = desk();
        let cache = LetterCache::new();
        let p = family_profile(&g, Family::Bb, &cache).unwrap();
        let f = convergence_formula(&p, Formula::top());
        assert!(f.to_string().starts_with("bind(1, @BB_1) bind(2, @BB_2) bind(3, @BB_3) "));
        assert!(f.is_sentence(g.model.agents()));
    }

    #[test]
    fn desk_checks() {
        let g = desk();
        let opts = VerifyOptions::default();
        for c in ["rbb-converges", "bb-converges-m2", "vcg-implies-lefe", "bb-fixed-point-bids"] {
            let out = verify(&g, c, &opts).unwrap();
            assert!(out.pass, "{c}: {:?}", out.failures);
        }
        let out = verify(&g, "rbb-converges", &opts).unwrap();
        assert_eq!(out.values[0].value, Value::ONE);
        assert!(matches!(verify(&g, "nope", &opts), Err(GspError::UnknownCheck(_))));
        assert!(matches!(verify(&g, "bb-diverges-m3", &opts), Err(GspError::NotApplicable { .. })));
    }
}
