//! The interpreted function library shared by guards and formulas.

use std::fmt;

use thiserror::Error;

use crate::value::{snap_to_grid, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: Arity,
        got: usize,
    },
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("`snap` needs a positive increment, got {0}")]
    BadIncrement(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

/// A function of the fixed library, or a rational constant (a 0-ary function).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Top,
    Neg,
    Or,
    And,
    Sum,
    Sub,
    Mul,
    /// `rdiv(x, y) = x / y`; the slot encoding `1\s` is `rdiv(1, s)`.
    Rdiv,
    Min,
    Max,
    /// 1-based index of the largest argument, smallest index on ties.
    Argmax,
    Eq,
    Lt,
    Gt,
    Geq,
    /// `1` if `x <= y`, `-1` otherwise.
    Pref,
    /// `snap(x, inc)`: nearest multiple of `inc` in `[0, 1]`, ties toward 0.
    Snap,
    Const(Value),
}

/// Names of all library functions as written in guards and formulas.
pub const FUNC_NAMES: &[&str] = &[
    "top", "neg", "or", "and", "sum", "sub", "mul", "rdiv", "min", "max", "argmax", "eq", "lt",
    "gt", "geq", "pref", "snap",
];

impl Func {
    pub fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "top" => Func::Top,
            "neg" => Func::Neg,
            "or" => Func::Or,
            "and" => Func::And,
            "sum" => Func::Sum,
            "sub" => Func::Sub,
            "mul" => Func::Mul,
            "rdiv" => Func::Rdiv,
            "min" => Func::Min,
            "max" => Func::Max,
            "argmax" => Func::Argmax,
            "eq" => Func::Eq,
            "lt" => Func::Lt,
            "gt" => Func::Gt,
            "geq" => Func::Geq,
            "pref" => Func::Pref,
            "snap" => Func::Snap,
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Func::Top => "top".into(),
            Func::Neg => "neg".into(),
            Func::Or => "or".into(),
            Func::And => "and".into(),
            Func::Sum => "sum".into(),
            Func::Sub => "sub".into(),
            Func::Mul => "mul".into(),
            Func::Rdiv => "rdiv".into(),
            Func::Min => "min".into(),
            Func::Max => "max".into(),
            Func::Argmax => "argmax".into(),
            Func::Eq => "eq".into(),
            Func::Lt => "lt".into(),
            Func::Gt => "gt".into(),
            Func::Geq => "geq".into(),
            Func::Pref => "pref".into(),
            Func::Snap => "snap".into(),
            Func::Const(v) => v.to_string(),
        }
    }

    pub fn arity(&self) -> Arity {
        match self {
            Func::Top | Func::Const(_) => Arity::Exactly(0),
            Func::Neg => Arity::Exactly(1),
            Func::Sub | Func::Rdiv | Func::Eq | Func::Lt | Func::Gt | Func::Geq | Func::Pref
            | Func::Snap => Arity::Exactly(2),
            Func::Or | Func::And | Func::Sum | Func::Mul | Func::Min | Func::Max
            | Func::Argmax => Arity::AtLeast(1),
        }
    }

    pub fn check_arity(&self, n: usize) -> Result<(), FuncError> {
        let arity = self.arity();
        if arity.accepts(n) {
            Ok(())
        } else {
            Err(FuncError::ArityMismatch {
                name: self.name(),
                expected: arity,
                got: n,
            })
        }
    }

    pub fn apply(&self, args: &[Value]) -> Result<Value, FuncError> {
        self.check_arity(args.len())?;
        let crisp = Value::from_bool;
        Ok(match self {
            Func::Top => Value::ONE,
            Func::Const(v) => *v,
            Func::Neg => -args[0],
            Func::Or | Func::Max => *args.iter().max().unwrap(),
            Func::And | Func::Min => *args.iter().min().unwrap(),
            Func::Sum => args.iter().copied().sum(),
            Func::Mul => args.iter().fold(Value::ONE, |a, b| a * *b),
            Func::Sub => args[0] - args[1],
            Func::Rdiv => args[0]
                .checked_div(&args[1])
                .ok_or_else(|| FuncError::DivisionByZero(self.name()))?,
            Func::Argmax => {
                let mut best = 0;
                for (i, x) in args.iter().enumerate().skip(1) {
                    if *x > args[best] {
                        best = i;
                    }
                }
                Value::int(best as i128 + 1)
            }
            Func::Eq => crisp(args[0] == args[1]),
            Func::Lt => crisp(args[0] < args[1]),
            Func::Gt => crisp(args[0] > args[1]),
            Func::Geq => crisp(args[0] >= args[1]),
            Func::Pref => crisp(args[0] <= args[1]),
            Func::Snap => {
                if args[1] <= Value::ZERO {
                    return Err(FuncError::BadIncrement(args[1]));
                }
                snap_to_grid(args[0], args[1])
            }
        })
    }
}

/// Evaluates a library function by name.
pub fn apply_func(name: &str, args: &[Value]) -> Result<Value, FuncError> {
    let f = match Func::lookup(name) {
        Some(f) => f,
        None => match name.parse::<Value>() {
            Ok(v) => Func::Const(v),
            Err(_) => return Err(FuncError::UnknownFunction(name.to_string())),
        },
    };
    f.apply(args)
}
