//! Regular guards over WE letters and their automata.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::we::{parse_psi, WeError, WeFormula};

/// Position sets are `u64` bitmasks; the top bit marks the start state.
pub const MAX_POSITIONS: usize = 63;
const START: u64 = 1 << 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error(transparent)]
    We(#[from] WeError),
    #[error("guard has {0} letters; at most {MAX_POSITIONS} are supported")]
    TooLong(usize),
}

impl From<SyntaxError> for RegexError {
    fn from(e: SyntaxError) -> Self {
        RegexError::We(WeError::Syntax(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardRegex {
    Letter(WeFormula),
    Concat(Box<GuardRegex>, Box<GuardRegex>),
    Choice(Box<GuardRegex>, Box<GuardRegex>),
    Star(Box<GuardRegex>),
}

impl GuardRegex {
    pub fn letter(f: WeFormula) -> Self {
        GuardRegex::Letter(f)
    }
    pub fn concat(a: GuardRegex, b: GuardRegex) -> Self {
        GuardRegex::Concat(Box::new(a), Box::new(b))
    }
    pub fn choice(a: GuardRegex, b: GuardRegex) -> Self {
        GuardRegex::Choice(Box::new(a), Box::new(b))
    }
    pub fn star(a: GuardRegex) -> Self {
        GuardRegex::Star(Box::new(a))
    }
    /// `⊤*`
    pub fn top_star() -> Self {
        GuardRegex::star(GuardRegex::Letter(WeFormula::Top))
    }
    /// Left-nested concatenation of a nonempty sequence.
    pub fn seq(parts: Vec<GuardRegex>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("nonempty sequence");
        it.fold(first, GuardRegex::concat)
    }

    pub fn is_top_star(&self) -> bool {
        matches!(self, GuardRegex::Star(inner) if matches!(**inner, GuardRegex::Letter(WeFormula::Top)))
    }

    /// Letters count their WE size, each constructor counts 1.
    pub fn size(&self) -> usize {
        match self {
            GuardRegex::Letter(f) => f.size(),
            GuardRegex::Concat(a, b) | GuardRegex::Choice(a, b) => 1 + a.size() + b.size(),
            GuardRegex::Star(a) => 1 + a.size(),
        }
    }

    pub fn letters(&self) -> Vec<&WeFormula> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a GuardRegex, out: &mut Vec<&'a WeFormula>) {
            match r {
                GuardRegex::Letter(f) => out.push(f),
                GuardRegex::Concat(a, b) | GuardRegex::Choice(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                GuardRegex::Star(a) => go(a, out),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn map_letters(&self, f: &impl Fn(&WeFormula) -> WeFormula) -> GuardRegex {
        match self {
            GuardRegex::Letter(l) => GuardRegex::Letter(f(l)),
            GuardRegex::Concat(a, b) => GuardRegex::concat(a.map_letters(f), b.map_letters(f)),
            GuardRegex::Choice(a, b) => GuardRegex::choice(a.map_letters(f), b.map_letters(f)),
            GuardRegex::Star(a) => GuardRegex::star(a.map_letters(f)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            GuardRegex::Choice(..) => 0,
            GuardRegex::Concat(..) => 1,
            GuardRegex::Star(..) | GuardRegex::Letter(_) => 2,
        }
    }
}

impl fmt::Display for GuardRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, r: &GuardRegex, min: u8| {
            if r.precedence() < min {
                write!(f, "({r})")
            } else {
                write!(f, "{r}")
            }
        };
        match self {
            GuardRegex::Letter(l) => write!(f, "{{{l}}}"),
            GuardRegex::Concat(a, b) => {
                wrap(f, a, 1)?;
                write!(f, ".")?;
                wrap(f, b, 2)
            }
            GuardRegex::Choice(a, b) => {
                wrap(f, a, 0)?;
                write!(f, "|")?;
                wrap(f, b, 1)
            }
            GuardRegex::Star(a) => {
                wrap(f, a, 2)?;
                write!(f, "*")
            }
        }
    }
}

/// Parses `.` (concatenation), `|` (choice), postfix `*`, parentheses and
/// WE letters in braces, e.g. `{top}*.{K[1](p)}`.
pub fn parse_regex(text: &str) -> Result<GuardRegex, RegexError> {
    let mut cur = Cursor::new(text)?;
    let r = parse_choice(&mut cur)?;
    cur.expect_end()?;
    Ok(r)
}

fn parse_choice(cur: &mut Cursor) -> Result<GuardRegex, RegexError> {
    let mut r = parse_concat(cur)?;
    while cur.eat_sym('|') {
        r = GuardRegex::choice(r, parse_concat(cur)?);
    }
    Ok(r)
}

fn parse_concat(cur: &mut Cursor) -> Result<GuardRegex, RegexError> {
    let mut r = parse_star(cur)?;
    while cur.eat_sym('.') {
        r = GuardRegex::concat(r, parse_star(cur)?);
    }
    Ok(r)
}

fn parse_star(cur: &mut Cursor) -> Result<GuardRegex, RegexError> {
    let mut r = match cur.peek() {
        Some(Tok::Sym('{')) => {
            cur.expect_sym('{')?;
            let f = parse_psi(cur)?;
            cur.expect_sym('}')?;
            GuardRegex::Letter(f)
        }
        Some(Tok::Sym('(')) => {
            cur.expect_sym('(')?;
            let r = parse_choice(cur)?;
            cur.expect_sym(')')?;
            r
        }
        _ => {
            return Err(cur
                .error("expected `{letter}` or `(` in a regular guard")
                .into())
        }
    };
    while cur.eat_sym('*') {
        r = GuardRegex::star(r);
    }
    Ok(r)
}

/// Position automaton of a regular guard.
///
/// Runs are sets of positions (plus the start marker), i.e. the states of the
/// determinized automaton reached lazily. Histories feed sets of enabled
/// letters, one set per state.
#[derive(Debug, Clone)]
pub struct GuardAutomaton {
    letters: Vec<WeFormula>,
    pos_letter: Vec<usize>,
    first: u64,
    last: u64,
    nullable: bool,
    follow: Vec<u64>,
}

struct Glushkov {
    first: u64,
    last: u64,
    nullable: bool,
}

pub fn compile_guard(r: &GuardRegex) -> Result<GuardAutomaton, RegexError> {
    let n = r.letters().len();
    if n > MAX_POSITIONS {
        return Err(RegexError::TooLong(n));
    }
    let mut a = GuardAutomaton {
        letters: Vec::new(),
        pos_letter: Vec::with_capacity(n),
        first: 0,
        last: 0,
        nullable: false,
        follow: vec![0; n],
    };
    let mut index: HashMap<WeFormula, usize> = HashMap::new();
    let g = a.build(r, &mut index);
    a.first = g.first;
    a.last = g.last;
    a.nullable = g.nullable;
    Ok(a)
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

impl GuardAutomaton {
    fn build(&mut self, r: &GuardRegex, index: &mut HashMap<WeFormula, usize>) -> Glushkov {
        match r {
            GuardRegex::Letter(f) => {
                let id = *index.entry(f.clone()).or_insert_with(|| {
                    self.letters.push(f.clone());
                    self.letters.len() - 1
                });
                let p = self.pos_letter.len();
                self.pos_letter.push(id);
                Glushkov {
                    first: 1 << p,
                    last: 1 << p,
                    nullable: false,
                }
            }
            GuardRegex::Concat(x, y) => {
                let a = self.build(x, index);
                let b = self.build(y, index);
                for p in bits(a.last) {
                    self.follow[p] |= b.first;
                }
                Glushkov {
                    first: if a.nullable { a.first | b.first } else { a.first },
                    last: if b.nullable { a.last | b.last } else { b.last },
                    nullable: a.nullable && b.nullable,
                }
            }
            GuardRegex::Choice(x, y) => {
                let a = self.build(x, index);
                let b = self.build(y, index);
                Glushkov {
                    first: a.first | b.first,
                    last: a.last | b.last,
                    nullable: a.nullable || b.nullable,
                }
            }
            GuardRegex::Star(x) => {
                let a = self.build(x, index);
                for p in bits(a.last) {
                    self.follow[p] |= a.first;
                }
                Glushkov {
                    first: a.first,
                    last: a.last,
                    nullable: true,
                }
            }
        }
    }

    /// Distinct letters, in order of first occurrence.
    pub fn letters(&self) -> &[WeFormula] {
        &self.letters
    }

    pub fn num_positions(&self) -> usize {
        self.pos_letter.len()
    }

    /// Position mask enabled by a set of letters (bit `i` = letter `i`).
    pub fn positions_for_letters(&self, letter_mask: u64) -> u64 {
        self.pos_letter
            .iter()
            .enumerate()
            .filter(|(_, &l)| letter_mask >> l & 1 == 1)
            .fold(0, |acc, (p, _)| acc | 1 << p)
    }

    pub const fn initial(&self) -> u64 {
        START
    }

    /// Advances a run by one history state whose enabled positions are
    /// `enabled`.
    pub fn step(&self, run: u64, enabled: u64) -> u64 {
        let mut next = if run & START != 0 { self.first } else { 0 };
        for p in bits(run & !START) {
            next |= self.follow[p];
        }
        next & enabled
    }

    pub fn accepting(&self, run: u64) -> bool {
        run & self.last != 0 || (run & START != 0 && self.nullable)
    }

    /// Whether a word of letter ids is in the language.
    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut run = START;
        for &l in word {
            run = self.step(run, self.positions_for_letters(1 << l));
        }
        self.accepting(run)
    }

    /// Minimal DFA over single letters, without the dead state.
    pub fn to_dfa(&self) -> Dfa {
        let k = self.letters.len();
        let letter_pos: Vec<u64> = (0..k).map(|l| self.positions_for_letters(1 << l)).collect();
        let mut ids: HashMap<u64, usize> = HashMap::new();
        let mut sets = vec![START];
        ids.insert(START, 0);
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut row = Vec::with_capacity(k);
            for &lp in &letter_pos {
                let t = self.step(sets[i], lp);
                let id = *ids.entry(t).or_insert_with(|| {
                    sets.push(t);
                    sets.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            i += 1;
        }
        let accepting: Vec<bool> = sets.iter().map(|&s| self.accepting(s)).collect();
        // Moore refinement.
        let mut class: Vec<usize> = accepting.iter().map(|&a| usize::from(a)).collect();
        loop {
            let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = (0..sets.len())
                .map(|s| {
                    let sig = (class[s], delta[s].iter().map(|&t| class[t]).collect());
                    let n = sig_ids.len();
                    *sig_ids.entry(sig).or_insert(n)
                })
                .collect();
            let stable = sig_ids.len() == class.iter().collect::<std::collections::HashSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let nclasses = class.iter().max().map_or(0, |m| m + 1);
        let mut cdelta = vec![vec![0; k]; nclasses];
        let mut cacc = vec![false; nclasses];
        for s in 0..sets.len() {
            for l in 0..k {
                cdelta[class[s]][l] = class[delta[s][l]];
            }
            cacc[class[s]] = accepting[s];
        }
        // Live = can reach an accepting class.
        let mut live = cacc.clone();
        loop {
            let mut changed = false;
            for c in 0..nclasses {
                if !live[c] && cdelta[c].iter().any(|&t| live[t]) {
                    live[c] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut renum = vec![usize::MAX; nclasses];
        let mut order = vec![class[0]];
        renum[class[0]] = 0;
        let mut j = 0;
        while j < order.len() {
            let c = order[j];
            for &t in &cdelta[c] {
                if live[t] && renum[t] == usize::MAX {
                    renum[t] = order.len();
                    order.push(t);
                }
            }
            j += 1;
        }
        let delta = order
            .iter()
            .map(|&c| {
                cdelta[c]
                    .iter()
                    .map(|&t| if live[t] { Some(renum[t]) } else { None })
                    .collect()
            })
            .collect();
        let accepting = order.iter().map(|&c| cacc[c]).collect();
        Dfa {
            initial_live: live[class[0]],
            delta,
            accepting,
        }
    }
}

/// A minimal DFA over letter ids; missing transitions lead to rejection.
#[derive(Debug, Clone)]
pub struct Dfa {
    initial_live: bool,
    delta: Vec<Vec<Option<usize>>>,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Number of live states (0 if the language is empty).
    pub fn num_states(&self) -> usize {
        if self.initial_live {
            self.delta.len()
        } else {
            0
        }
    }

    pub fn all_accepting(&self) -> bool {
        self.initial_live && self.accepting.iter().all(|&a| a)
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        if !self.initial_live {
            return false;
        }
        let mut s = 0;
        for &l in word {
            match self.delta[s].get(l).copied().flatten() {
                Some(t) => s = t,
                None => return false,
            }
        }
        self.accepting[s]
    }
}

/// Direct recursive check that some word of `r` of length `truth.len()` has
/// its i-th letter enabled at position i. Independent of the automaton.
pub fn consistent_direct(r: &GuardRegex, enabled: &dyn Fn(&WeFormula, usize) -> bool, len: usize) -> bool {
    fn m(
        r: &GuardRegex,
        i: usize,
        j: usize,
        enabled: &dyn Fn(&WeFormula, usize) -> bool,
        memo: &mut HashMap<(*const GuardRegex, usize, usize), bool>,
    ) -> bool {
        let key = (r as *const GuardRegex, i, j);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = match r {
            GuardRegex::Letter(f) => j == i + 1 && enabled(f, i),
            GuardRegex::Concat(a, b) => (i..=j).any(|k| m(a, i, k, enabled, memo) && m(b, k, j, enabled, memo)),
            GuardRegex::Choice(a, b) => m(a, i, j, enabled, memo) || m(b, i, j, enabled, memo),
            GuardRegex::Star(a) => {
                i == j || (i + 1..=j).any(|k| m(a, i, k, enabled, memo) && m(r, k, j, enabled, memo))
            }
        };
        memo.insert(key, v);
        v
    }
    len > 0 && m(r, 0, len, enabled, &mut HashMap::new())
}
