//! Weighted epistemic formulas: the condition language of strategy guards.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::func::{Func, FuncError};
use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::value::Value;
use crate::wcgs::{AgentId, PropId, StateId, Wcgs};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("column {col}: bare proposition `{prop}` outside any K operator")]
    GrammarLayer { col: usize, prop: String },
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WeFormula {
    Top,
    Atom(String),
    Know(String, Box<WeFormula>),
    Fun(Func, Vec<WeFormula>),
}

impl WeFormula {
    pub fn atom(p: impl Into<String>) -> Self {
        WeFormula::Atom(p.into())
    }

    pub fn know(agent: impl Into<String>, inner: WeFormula) -> Self {
        WeFormula::Know(agent.into(), Box::new(inner))
    }

    pub fn fun(f: Func, args: Vec<WeFormula>) -> Self {
        WeFormula::Fun(f, args)
    }

    pub fn konst(v: Value) -> Self {
        WeFormula::Fun(Func::Const(v), Vec::new())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, WeFormula::Top)
    }

    /// Symbol count. A K operator at the outer (ψ) layer is the mandatory
    /// wrapper of the grammar and costs nothing; a nested K costs 1.
    pub fn size(&self) -> usize {
        fn go(f: &WeFormula, nested: bool) -> usize {
            match f {
                WeFormula::Top | WeFormula::Atom(_) => 1,
                WeFormula::Know(_, inner) => usize::from(nested) + go(inner, true),
                WeFormula::Fun(_, args) if args.is_empty() => 1,
                WeFormula::Fun(_, args) => {
                    args.len() + 1 + args.iter().map(|a| go(a, nested)).sum::<usize>()
                }
            }
        }
        go(self, false)
    }

    /// Agents of the K operators at the outer layer.
    pub fn outer_agents(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        fn go<'a>(f: &'a WeFormula, out: &mut BTreeSet<&'a str>) {
            match f {
                WeFormula::Know(a, _) => {
                    out.insert(a.as_str());
                }
                WeFormula::Fun(_, args) => args.iter().for_each(|a| go(a, out)),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    /// Resolves names against `m`.
    pub fn bind(&self, m: &Wcgs) -> Result<BoundWe, WeError> {
        Ok(match self {
            WeFormula::Top => BoundWe::Top,
            WeFormula::Atom(p) => BoundWe::Atom(
                m.prop_id(p)
                    .ok_or_else(|| WeError::UnknownProposition(p.clone()))?,
            ),
            WeFormula::Know(a, inner) => BoundWe::Know(
                m.agent_id(a).ok_or_else(|| WeError::UnknownAgent(a.clone()))?,
                Box::new(inner.bind(m)?),
            ),
            WeFormula::Fun(f, args) => BoundWe::Fun(
                *f,
                args.iter().map(|a| a.bind(m)).collect::<Result<_, _>>()?,
            ),
        })
    }
}

impl fmt::Display for WeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeFormula::Top => write!(f, "top"),
            WeFormula::Atom(p) => write!(f, "{p}"),
            WeFormula::Know(a, inner) => write!(f, "K[{a}]({inner})"),
            WeFormula::Fun(func, args) if args.is_empty() => write!(f, "{}", func.name()),
            WeFormula::Fun(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A WE formula with names resolved to model indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundWe {
    Top,
    Atom(PropId),
    Know(AgentId, Box<BoundWe>),
    Fun(Func, Vec<BoundWe>),
}

impl BoundWe {
    pub fn eval(&self, m: &Wcgs, q: StateId) -> Result<Value, FuncError> {
        match self {
            BoundWe::Top => Ok(Value::ONE),
            BoundWe::Atom(p) => Ok(m.weight(q, *p)),
            BoundWe::Know(a, inner) => {
                let mut best: Option<Value> = None;
                for &r in m.obs_class(*a, q) {
                    let v = inner.eval(m, r)?;
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
                Ok(best.expect("observation classes are nonempty"))
            }
            BoundWe::Fun(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(m, q))
                    .collect::<Result<Vec<_>, _>>()?;
                f.apply(&vals)
            }
        }
    }
}

/// Evaluates `f` at `q`.
pub fn eval_we(m: &Wcgs, q: StateId, f: &WeFormula) -> Result<Value, WeError> {
    Ok(f.bind(m)?.eval(m, q)?)
}

pub fn we_size(f: &WeFormula) -> usize {
    f.size()
}

/// Parses a guard condition at the outer (ψ) layer.
pub fn parse_we(text: &str) -> Result<WeFormula, WeError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_psi(&mut cur)?;
    cur.expect_end()?;
    Ok(f)
}

/// Parses a formula of the inner (φ) layer, where bare atoms are allowed.
pub fn parse_we_inner(text: &str) -> Result<WeFormula, WeError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_layer(&mut cur, true)?;
    cur.expect_end()?;
    Ok(f)
}

pub(crate) fn parse_psi(cur: &mut Cursor) -> Result<WeFormula, WeError> {
    parse_layer(cur, false)
}

fn parse_layer(cur: &mut Cursor, inner: bool) -> Result<WeFormula, WeError> {
    let col = cur.col();
    match cur.next() {
        Some(Tok::Sym('-')) => match cur.next() {
            Some(Tok::Number(n)) => Ok(WeFormula::konst(-parse_number(&n, col)?)),
            _ => Err(SyntaxError::new(col, "expected a number after `-`").into()),
        },
        Some(Tok::Number(n)) => Ok(WeFormula::konst(parse_number(&n, col)?)),
        Some(Tok::Sym('(')) => {
            let f = parse_layer(cur, inner)?;
            cur.expect_sym(')')?;
            Ok(f)
        }
        Some(Tok::Ident(id)) if id == "K" && cur.peek() == Some(&Tok::Sym('[')) => {
            cur.expect_sym('[')?;
            let agent = cur.expect_name()?;
            cur.expect_sym(']')?;
            cur.expect_sym('(')?;
            let body = parse_layer(cur, true)?;
            cur.expect_sym(')')?;
            Ok(WeFormula::know(agent, body))
        }
        Some(Tok::Ident(id)) if id == "top" => {
            if cur.eat_sym('(') {
                cur.expect_sym(')')?;
            }
            Ok(WeFormula::Top)
        }
        Some(Tok::Ident(id)) => {
            if cur.peek() == Some(&Tok::Sym('(')) {
                let f = Func::lookup(&id).ok_or_else(|| FuncError::UnknownFunction(id.clone()))?;
                cur.expect_sym('(')?;
                let mut args = Vec::new();
                if !cur.eat_sym(')') {
                    loop {
                        args.push(parse_layer(cur, inner)?);
                        if cur.eat_sym(')') {
                            break;
                        }
                        cur.expect_sym(',')?;
                    }
                }
                f.check_arity(args.len())?;
                Ok(WeFormula::Fun(f, args))
            } else if inner {
                Ok(WeFormula::Atom(id))
            } else {
                Err(WeError::GrammarLayer { col, prop: id })
            }
        }
        Some(t) => Err(SyntaxError::new(col, format!("unexpected {t}")).into()),
        None => Err(SyntaxError::new(col, "unexpected end of input").into()),
    }
}

pub(crate) fn parse_number(n: &str, col: usize) -> Result<Value, SyntaxError> {
    n.parse::<Value>()
        .map_err(|e| SyntaxError::new(col, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wcgs::parse_model;

    fn model() -> Wcgs {
        parse_model(
            "
agents: 1 2
actions: a
states: q r s
props: p
init: q
legal: 1 _ a
legal: 2 _ a
trans: q (a,a) -> r
trans: r (a,a) -> s
trans: s (a,a) -> s
weight: q p 1/2
weight: r p -1/4
weight: s p 1
obs: 1 {q r}
",
        )
        .unwrap()
    }

    #[test]
    fn parses_documented_examples() {
        assert_eq!(
            parse_we("K[1](p)").unwrap(),
            WeFormula::know("1", WeFormula::atom("p"))
        );
        assert_eq!(
            parse_we("and(K[1](p), top)").unwrap(),
            WeFormula::fun(
                Func::And,
                vec![WeFormula::know("1", WeFormula::atom("p")), WeFormula::Top]
            )
        );
        assert!(matches!(parse_we("p"), Err(WeError::GrammarLayer { .. })));
        assert!(matches!(
            parse_we("or(p, top)"),
            Err(WeError::GrammarLayer { .. })
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_we("K[1](p"), Err(WeError::Syntax(_))));
        assert!(matches!(parse_we("frob(top)"), Err(WeError::Func(_))));
        assert!(matches!(parse_we("neg(top, top)"), Err(WeError::Func(_))));
        assert!(matches!(parse_we("top top"), Err(WeError::Syntax(_))));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "K[1](p)",
            "and(K[1](p), top)",
            "K[a](eq(snap(sum(val_a, -1/2), 1/4), K[b](q)))",
            "3/4",
        ] {
            let f = parse_we(src).unwrap();
            assert_eq!(parse_we(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(WeFormula::Top.size(), 1);
        let and_tt = WeFormula::fun(Func::And, vec![WeFormula::Top, WeFormula::Top]);
        assert_eq!(and_tt.size(), 5);
        // The outer K is the grammar's wrapper; nested ones count.
        assert_eq!(parse_we("K[1](p)").unwrap().size(), 1);
        assert_eq!(parse_we("K[1](K[2](p))").unwrap().size(), 2);
        assert_eq!(parse_we("neg(K[1](p))").unwrap().size(), 3);
        assert_eq!(parse_we("1/2").unwrap().size(), 1);
    }

    #[test]
    fn evaluation_examples() {
        let m = model();
        let q = m.state_id("q").unwrap();
        let s = m.state_id("s").unwrap();
        // Singleton class for agent 2.
        assert_eq!(eval_we(&m, q, &parse_we("K[2](p)").unwrap()).unwrap(), Value::new(1, 2));
        // Agent 1 confuses q and r.
        assert_eq!(eval_we(&m, q, &parse_we("K[1](p)").unwrap()).unwrap(), Value::new(-1, 4));
        assert_eq!(
            eval_we(&m, q, &parse_we("max(K[1](p), neg(K[1](p)))").unwrap()).unwrap(),
            Value::new(1, 4)
        );
        assert_eq!(eval_we(&m, s, &parse_we("K[1](p)").unwrap()).unwrap(), Value::ONE);
        assert!(matches!(
            eval_we(&m, q, &parse_we("K[1](zz)").unwrap()),
            Err(WeError::UnknownProposition(_))
        ));
    }

    #[test]
    fn knowledge_never_exceeds_fact() {
        let m = model();
        let k = parse_we("K[1](p)").unwrap().bind(&m).unwrap();
        let p = parse_we_inner("p").unwrap().bind(&m).unwrap();
        for q in 0..m.num_states() {
            assert!(k.eval(&m, q).unwrap() <= p.eval(&m, q).unwrap());
        }
    }
}
