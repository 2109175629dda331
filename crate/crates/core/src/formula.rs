//! NatSL[F] formulas: syntax tree, parser, printer and builders.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::func::{Func, FuncError};
use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::value::Value;
use crate::we::parse_number;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BindTarget {
    Var(String),
    /// A concrete strategy, written `@name`.
    Named(String),
}

impl fmt::Display for BindTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindTarget::Var(v) => write!(f, "{v}"),
            BindTarget::Named(n) => write!(f, "@{n}"),
        }
    }
}

/// Core syntax; all sugar is expanded by the parser and the builders.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Exists {
        var: String,
        agent: String,
        k: usize,
        body: Box<Formula>,
    },
    Bind {
        agent: String,
        target: BindTarget,
        body: Box<Formula>,
    },
    Fun(Func, Vec<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(p: impl Into<String>) -> Self {
        Formula::Atom(p.into())
    }
    pub fn top() -> Self {
        Formula::Fun(Func::Top, Vec::new())
    }
    pub fn konst(v: Value) -> Self {
        Formula::Fun(Func::Const(v), Vec::new())
    }
    pub fn fun(f: Func, args: Vec<Formula>) -> Self {
        Formula::Fun(f, args)
    }
    pub fn neg(a: Formula) -> Self {
        Formula::Fun(Func::Neg, vec![a])
    }
    pub fn or(args: Vec<Formula>) -> Self {
        Formula::Fun(Func::Or, args)
    }
    /// `¬(¬a ∨ ¬b ∨ ...)`
    pub fn and(args: Vec<Formula>) -> Self {
        Formula::neg(Formula::or(args.into_iter().map(Formula::neg).collect()))
    }
    /// `¬a ∨ b`
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(vec![Formula::neg(a), b])
    }
    pub fn next(a: Formula) -> Self {
        Formula::Next(Box::new(a))
    }
    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }
    /// `⊤ U a`
    pub fn eventually(a: Formula) -> Self {
        Formula::until(Formula::top(), a)
    }
    /// `¬F¬a`
    pub fn always(a: Formula) -> Self {
        Formula::neg(Formula::eventually(Formula::neg(a)))
    }
    pub fn exists(var: impl Into<String>, agent: impl Into<String>, k: usize, body: Formula) -> Self {
        Formula::Exists {
            var: var.into(),
            agent: agent.into(),
            k,
            body: Box::new(body),
        }
    }
    /// `¬∃¬`
    pub fn forall(var: impl Into<String>, agent: impl Into<String>, k: usize, body: Formula) -> Self {
        Formula::neg(Formula::exists(var, agent, k, Formula::neg(body)))
    }
    pub fn bind(agent: impl Into<String>, target: BindTarget, body: Formula) -> Self {
        Formula::Bind {
            agent: agent.into(),
            target,
            body: Box::new(body),
        }
    }
    pub fn bind_var(agent: impl Into<String>, var: impl Into<String>, body: Formula) -> Self {
        Formula::bind(agent, BindTarget::Var(var.into()), body)
    }
    pub fn bind_named(agent: impl Into<String>, name: impl Into<String>, body: Formula) -> Self {
        Formula::bind(agent, BindTarget::Named(name.into()), body)
    }
    /// Binds every `(agent, strategy name)` pair, outermost first.
    pub fn bind_all<S: AsRef<str>>(profile: &[(S, S)], body: Formula) -> Self {
        profile
            .iter()
            .rev()
            .fold(body, |acc, (a, s)| Formula::bind_named(a.as_ref(), s.as_ref(), acc))
    }

    /// Free variables and agents. An agent is free if a temporal operator
    /// occurs outside every binding for it.
    pub fn free_names(&self, agents: &[String]) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(
            f: &Formula,
            vars: &mut Vec<String>,
            bound: &mut Vec<String>,
            agents: &[String],
            out: &mut BTreeSet<String>,
        ) {
            match f {
                Formula::Atom(_) => {}
                Formula::Exists { var, body, .. } => {
                    vars.push(var.clone());
                    go(body, vars, bound, agents, out);
                    vars.pop();
                }
                Formula::Bind { agent, target, body } => {
                    if let BindTarget::Var(v) = target {
                        if !vars.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                    bound.push(agent.clone());
                    go(body, vars, bound, agents, out);
                    bound.pop();
                }
                Formula::Fun(_, args) => args.iter().for_each(|a| go(a, vars, bound, agents, out)),
                Formula::Next(a) => {
                    free_agents(bound, agents, out);
                    go(a, vars, bound, agents, out);
                }
                Formula::Until(a, b) => {
                    free_agents(bound, agents, out);
                    go(a, vars, bound, agents, out);
                    go(b, vars, bound, agents, out);
                }
            }
        }
        fn free_agents(bound: &[String], agents: &[String], out: &mut BTreeSet<String>) {
            for a in agents {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
        }
        go(self, &mut Vec::new(), &mut Vec::new(), agents, &mut out);
        out
    }

    pub fn is_sentence(&self, agents: &[String]) -> bool {
        self.free_names(agents).is_empty()
    }

    /// Strategy names referenced with `@`.
    pub fn named_strategies(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        fn go<'a>(f: &'a Formula, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom(_) => {}
                Formula::Exists { body, .. } | Formula::Next(body) => go(body, out),
                Formula::Bind { target, body, .. } => {
                    if let BindTarget::Named(n) = target {
                        out.insert(n);
                    }
                    go(body, out);
                }
                Formula::Fun(_, args) => args.iter().for_each(|a| go(a, out)),
                Formula::Until(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Propositions mentioned.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        fn go<'a>(f: &'a Formula, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom(p) => {
                    out.insert(p);
                }
                Formula::Exists { body, .. } | Formula::Bind { body, .. } | Formula::Next(body) => go(body, out),
                Formula::Fun(_, args) => args.iter().for_each(|a| go(a, out)),
                Formula::Until(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Exists { var, agent, k, body } => write!(f, "E {var}:{agent} <= {k} . {body}"),
            Formula::Bind { agent, target, body } => write!(f, "bind({agent}, {target}) {body}"),
            Formula::Fun(func, args) if args.is_empty() => write!(f, "{}", func.name()),
            Formula::Fun(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Next(a) => write!(f, "X {a}"),
            Formula::Until(a, b) => write!(f, "U({a}, {b})"),
        }
    }
}

/// Parses the concrete formula syntax.
///
/// ```text
/// phi ::= PROP | 'E' VAR ':' AGENT '<=' NAT '.' phi | 'A' VAR ':' AGENT '<=' NAT '.' phi
///       | 'bind' '(' AGENT ',' (VAR | '@' NAME) ')' phi | FUNC '(' phi {',' phi} ')'
///       | 'X' phi | 'U' '(' phi ',' phi ')' | 'F' phi | 'G' phi
///       | 'not' '(' phi ')' | 'implies' '(' phi ',' phi ')' | '(' phi ')'
/// ```
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_phi(&mut cur)?;
    cur.expect_end()?;
    Ok(f)
}

fn is_quantifier(cur: &Cursor) -> bool {
    matches!(cur.peek_at(1), Some(Tok::Ident(_))) && cur.peek_at(2) == Some(&Tok::Sym(':'))
}

fn parse_args(cur: &mut Cursor) -> Result<Vec<Formula>, FormulaError> {
    cur.expect_sym('(')?;
    let mut args = Vec::new();
    if cur.eat_sym(')') {
        return Ok(args);
    }
    loop {
        args.push(parse_phi(cur)?);
        if cur.eat_sym(')') {
            return Ok(args);
        }
        cur.expect_sym(',')?;
    }
}

fn parse_phi(cur: &mut Cursor) -> Result<Formula, FormulaError> {
    let col = cur.col();
    let tok = cur
        .peek()
        .cloned()
        .ok_or_else(|| SyntaxError::new(col, "unexpected end of formula"))?;
    match tok {
        Tok::Sym('(') => {
            cur.next();
            let f = parse_phi(cur)?;
            cur.expect_sym(')')?;
            Ok(f)
        }
        Tok::Sym('-') => {
            cur.next();
            match cur.next() {
                Some(Tok::Number(n)) => Ok(Formula::konst(-parse_number(&n, col)?)),
                _ => Err(SyntaxError::new(col, "expected a number after `-`").into()),
            }
        }
        Tok::Number(n) => {
            cur.next();
            Ok(Formula::konst(parse_number(&n, col)?))
        }
        Tok::Ident(id) => {
            let call = cur.peek_at(1) == Some(&Tok::Sym('('));
            match id.as_str() {
                "E" | "A" if is_quantifier(cur) => {
                    cur.next();
                    let var = cur.expect_ident()?;
                    cur.expect_sym(':')?;
                    let agent = cur.expect_name()?;
                    cur.expect_tok(Tok::Le)?;
                    let k = cur.expect_nat()?;
                    cur.expect_sym('.')?;
                    let body = parse_phi(cur)?;
                    Ok(if id == "E" {
                        Formula::exists(var, agent, k, body)
                    } else {
                        Formula::forall(var, agent, k, body)
                    })
                }
                "bind" if call => {
                    cur.next();
                    cur.expect_sym('(')?;
                    let agent = cur.expect_name()?;
                    cur.expect_sym(',')?;
                    let target = if cur.eat_sym('@') {
                        BindTarget::Named(cur.expect_name()?)
                    } else {
                        BindTarget::Var(cur.expect_ident()?)
                    };
                    cur.expect_sym(')')?;
                    let body = parse_phi(cur)?;
                    Ok(Formula::bind(agent, target, body))
                }
                "X" | "F" | "G" if !call || id == "X" => {
                    cur.next();
                    let body = parse_phi(cur)?;
                    Ok(match id.as_str() {
                        "X" => Formula::next(body),
                        "F" => Formula::eventually(body),
                        _ => Formula::always(body),
                    })
                }
                "U" if call => {
                    cur.next();
                    let args = parse_args(cur)?;
                    match <[Formula; 2]>::try_from(args) {
                        Ok([a, b]) => Ok(Formula::until(a, b)),
                        Err(args) => Err(FuncError::ArityMismatch {
                            name: "U".into(),
                            expected: crate::func::Arity::Exactly(2),
                            got: args.len(),
                        }
                        .into()),
                    }
                }
                "not" | "and" | "implies" if call => {
                    cur.next();
                    let args = parse_args(cur)?;
                    let arity = |expected: usize| -> Result<(), FormulaError> {
                        if args.len() == expected || (id == "and" && !args.is_empty()) {
                            Ok(())
                        } else {
                            Err(FuncError::ArityMismatch {
                                name: id.clone(),
                                expected: crate::func::Arity::Exactly(expected),
                                got: args.len(),
                            }
                            .into())
                        }
                    };
                    match id.as_str() {
                        "not" => {
                            arity(1)?;
                            Ok(Formula::neg(args.into_iter().next().unwrap()))
                        }
                        "and" => {
                            arity(1)?;
                            Ok(Formula::and(args))
                        }
                        _ => {
                            arity(2)?;
                            let mut it = args.into_iter();
                            Ok(Formula::implies(it.next().unwrap(), it.next().unwrap()))
                        }
                    }
                }
                "top" => {
                    cur.next();
                    if call {
                        cur.expect_sym('(')?;
                        cur.expect_sym(')')?;
                    }
                    Ok(Formula::top())
                }
                _ if call => {
                    cur.next();
                    let f = Func::lookup(&id).ok_or_else(|| FuncError::UnknownFunction(id.clone()))?;
                    let args = parse_args(cur)?;
                    f.check_arity(args.len())?;
                    Ok(Formula::Fun(f, args))
                }
                _ => {
                    cur.next();
                    Ok(Formula::Atom(id))
                }
            }
        }
        other => Err(SyntaxError::new(col, format!("unexpected {other}")).into()),
    }
}
