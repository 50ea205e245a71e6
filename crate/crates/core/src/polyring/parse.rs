//! Restricted infix grammar: `+ - * ^`, parentheses, integer, rational
//! (`3/4`) and decimal literals, and variable names.

use num_rational::BigRational;

use super::{PolyError, Polynomial, VarList};
use crate::scalar::parse_rational;

/// Parses `text` over `vars`. With `vars = None` the variables are collected
/// from the input and sorted.
pub fn parse_polynomial(text: &str, vars: Option<VarList>) -> Result<Polynomial<BigRational>, PolyError> {
    let tokens = tokenize(text)?;
    let vars = match vars {
        Some(v) => v,
        None => {
            let mut names: Vec<String> = tokens
                .iter()
                .filter_map(|(_, t)| match t {
                    Token::Ident(s) => Some(s.clone()),
                    _ => None,
                })
                .collect();
            names.sort_by(|a, b| natural_cmp(a, b));
            names.dedup();
            names.into()
        }
    };
    let mut parser = Parser { tokens, pos: 0, vars, len: text.len() };
    let p = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(p)
}

/// Orders `x2` before `x10`.
fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    let split = |s: &str| {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(cut);
        (head.to_string(), tail.parse::<u64>().ok())
    };
    split(a).cmp(&split(b)).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, PolyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            out.push((start, Token::Num(text[start..i].to_string())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
        } else if "+-*^/()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(PolyError::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    vars: VarList,
    len: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> PolyError {
        let pos = self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        PolyError::Parse { pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial<BigRational>, PolyError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_op('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial<BigRational>, PolyError> {
        let mut acc = self.unary()?;
        while self.eat_op('*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial<BigRational>, PolyError> {
        if self.eat_op('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_op('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_op('^') {
            match self.peek().cloned() {
                Some(Token::Num(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                    self.pos += 1;
                    let e: u32 = s.parse().map_err(|_| self.error("exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(self.error("expected a nonnegative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial<BigRational>, PolyError> {
        match self.peek().cloned() {
            Some(Token::Num(s)) => {
                self.pos += 1;
                let mut text = s;
                // `a/b` is only accepted between two literals
                if self.peek() == Some(&Token::Op('/')) {
                    if let Some(Token::Num(d)) = self.tokens.get(self.pos + 1).map(|t| t.1.clone()) {
                        self.pos += 2;
                        text = format!("{text}/{d}");
                    } else {
                        return Err(self.error("division is only allowed between numeric literals"));
                    }
                }
                let q = parse_rational(&text).ok_or_else(|| self.error("bad numeric literal"))?;
                Ok(Polynomial::constant(self.vars.clone(), q))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Polynomial::var(self.vars.clone(), &name)
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}
