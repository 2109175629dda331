//! Tokenizer shared by the guard, regex, formula and predicate grammars.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Raw numeric literal: `12`, `0.25` or `3/4`.
    Number(String),
    Sym(char),
    Le,
    Ge,
    Arrow,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Arrow => write!(f, "`->`"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at column {col}: {msg}")]
pub struct SyntaxError {
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(col: usize, msg: impl Into<String>) -> Self {
        SyntaxError { col, msg: msg.into() }
    }
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            } else if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Digits glued to letters form an identifier (e.g. `1st`), not a number.
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            } else {
                out.push((Tok::Number(chars[start..i].iter().collect()), col));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = match (c, next) {
            ('<', Some('=')) => {
                i += 1;
                Tok::Le
            }
            ('>', Some('=')) => {
                i += 1;
                Tok::Ge
            }
            ('-', Some('>')) => {
                i += 1;
                Tok::Arrow
            }
            ('(' | ')' | '[' | ']' | '{' | '}' | ',' | '.' | '|' | '*' | ':' | '@' | '$' | '<'
            | '>' | '=' | '-', _) => Tok::Sym(c),
            _ => return Err(SyntaxError::new(col, format!("unexpected character `{c}`"))),
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

/// Cursor over a token stream.
pub struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            pos: 0,
            end_col: src.chars().count() + 1,
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|(t, _)| t)
    }

    pub fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.col(), msg)
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".to_string(),
        }
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", self.describe_next())))
        }
    }

    pub fn expect_tok(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.describe_next())))
        }
    }

    pub fn expect_end(&self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected trailing {}", self.describe_next())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.describe_next()))),
        }
    }

    /// An agent name: an identifier or a bare natural number.
    pub fn expect_name(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Number(s))
                if !s.contains('/') && !s.contains('.') =>
            {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected a name, found {}", self.describe_next()))),
        }
    }

    pub fn expect_nat(&mut self) -> Result<usize, SyntaxError> {
        match self.peek() {
            Some(Tok::Number(s)) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let n = s
                    .parse()
                    .map_err(|_| self.error(format!("number `{s}` out of range")))?;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error(format!(
                "expected a natural number, found {}",
                self.describe_next()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_mixed_input() {
        let toks: Vec<Tok> = tokenize("E s2:2 <= 2 . K[1](p) -> 0.25 1/2 q1''")
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("E".into()),
                Tok::Ident("s2".into()),
                Tok::Sym(':'),
                Tok::Number("2".into()),
                Tok::Le,
                Tok::Number("2".into()),
                Tok::Sym('.'),
                Tok::Ident("K".into()),
                Tok::Sym('['),
                Tok::Number("1".into()),
                Tok::Sym(']'),
                Tok::Sym('('),
                Tok::Ident("p".into()),
                Tok::Sym(')'),
                Tok::Arrow,
                Tok::Number("0.25".into()),
                Tok::Number("1/2".into()),
                Tok::Ident("q1''".into()),
            ]
        );
    }

    #[test]
    fn reports_column_of_bad_char() {
        let err = tokenize("p & q").unwrap_err();
        assert_eq!(err.col, 3);
    }
}
