use std::fmt;

use thiserror::Error;

use super::{Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken(String),
    UnknownIdentifier(String),
    InvalidNumber(String),
    ExpectedExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected '{t}'"),
            ParseErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier '{id}'"),
            ParseErrorKind::InvalidNumber(n) => write!(f, "invalid number '{n}'"),
            ParseErrorKind::ExpectedExponent => write!(f, "expected an integer exponent"),
        }
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

#[derive(Clone, Copy)]
enum Mode {
    Field,
    Scalar,
}

/// Parse an expression in `u`, `v` (standing for `u_x`) and `m`.
///
/// Grammar, loosest binding first:
///
/// ```text
/// expr  := term (('+' | '-') term)*
/// term  := unary (('*' | '/') unary)*
/// unary := '-' unary | power
/// power := atom ('^' int | '^' '(' int ')')?
/// atom  := number | var | func '(' expr ')' | '(' expr ')'
/// ```
///
/// so `-u^2` is `-(u^2)`. Exponents are signed integers.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    Parser::new(text, Mode::Field).run()
}

/// Parse an expression in the single variable `s`.
pub fn parse_scalar(text: &str) -> Result<Expr, ParseError> {
    Parser::new(text, Mode::Scalar).run()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    mode: Mode,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, mode: Mode) -> Self {
        Parser { src, pos: 0, tok: Tok::End, tok_start: 0, mode }
    }

    fn run(mut self) -> Result<Expr, ParseError> {
        self.advance()?;
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.unexpected());
        }
        Ok(e)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { position: self.tok_start, kind }
    }

    fn unexpected(&self) -> ParseError {
        match &self.tok {
            Tok::End => self.err(ParseErrorKind::UnexpectedEnd),
            Tok::Num(_) | Tok::Ident(_) | Tok::Op(_) => {
                let text = self.src[self.tok_start..self.pos].to_string();
                self.err(ParseErrorKind::UnexpectedToken(text))
            }
        }
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut p = self.pos + 1;
                if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                    p += 1;
                }
                if p < bytes.len() && bytes[p].is_ascii_digit() {
                    while p < bytes.len() && bytes[p].is_ascii_digit() {
                        p += 1;
                    }
                    self.pos = p;
                }
            }
            let text = &self.src[start..self.pos];
            let value = text
                .parse::<f64>()
                .map_err(|_| self.err(ParseErrorKind::InvalidNumber(text.to_string())))?;
            self.tok = Tok::Num(value);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Op(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap_or('?');
            return Err(self.err(ParseErrorKind::UnexpectedChar(ch)));
        }
        Ok(())
    }

    fn eat(&mut self, op: char) -> Result<bool, ParseError> {
        if self.tok == Tok::Op(op) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op)? {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+')? {
                lhs = Expr::Binary(super::BinOp::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-')? {
                lhs = Expr::Binary(super::BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*')? {
                lhs = Expr::Binary(super::BinOp::Mul, Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/')? {
                lhs = Expr::Binary(super::BinOp::Div, Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-')? {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^')? {
            return Ok(base);
        }
        let paren = self.eat('(')?;
        let negative = self.eat('-')?;
        let n = match self.tok {
            Tok::Num(x) if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 => x as i32,
            _ => return Err(self.err(ParseErrorKind::ExpectedExponent)),
        };
        self.advance()?;
        if paren {
            self.expect(')')?;
        }
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(x) => {
                self.advance()?;
                Ok(Expr::Const(x))
            }
            Tok::Op('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.tok_start;
                self.advance()?;
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                let var = match (self.mode, name.as_str()) {
                    (Mode::Field, "u") => Var::U,
                    (Mode::Field, "v") => Var::V,
                    (Mode::Field, "m") => Var::M,
                    (Mode::Scalar, "s") => Var::U,
                    _ => {
                        return Err(ParseError { position: at, kind: ParseErrorKind::UnknownIdentifier(name) })
                    }
                };
                Ok(Expr::Var(var))
            }
            _ => Err(self.unexpected()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, u: f64, v: f64, m: f64) -> f64 {
        parse(text).unwrap().eval(u, v, m).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-u^2", 3.0, 0.0, 0.0), -9.0);
        assert_eq!(ev("2*-u", 3.0, 0.0, 0.0), -6.0);
        assert_eq!(ev("1-2-3", 0.0, 0.0, 0.0), -4.0);
        assert_eq!(ev("8/4/2", 0.0, 0.0, 0.0), 1.0);
        assert_eq!(ev("u*v^2 + m", 2.0, 3.0, 1.0), 19.0);
        assert_eq!(ev("u^-2", 2.0, 0.0, 0.0), 0.25);
        assert_eq!(ev("(u+v)^(3)", 1.0, 1.0, 0.0), 8.0);
        assert_eq!(ev("1.5e1 + .5", 0.0, 0.0, 0.0), 15.5);
    }

    #[test]
    fn functions() {
        assert!((ev("exp(ln(u))", 2.5, 0.0, 0.0) - 2.5).abs() < 1e-15);
        assert_eq!(ev("abs(v) + sign(v)", 0.0, -2.0, 0.0), 1.0);
        assert!((ev("atanh(tanh(u))", 0.3, 0.0, 0.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn error_positions() {
        let e = parse("u + w").unwrap_err();
        assert_eq!(e.position, 4);
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("w".into()));
        let e = parse("u + ").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = parse("u^1.5").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ExpectedExponent);
        let e = parse("u # v").unwrap_err();
        assert_eq!((e.position, e.kind), (2, ParseErrorKind::UnexpectedChar('#')));
        assert!(parse("(u").is_err());
        assert!(parse("u)").is_err());
        assert!(parse("foo(u)").is_err());
        assert!(parse("s").is_err());
        assert!(parse_scalar("u").is_err());
        assert!(parse_scalar("s^2 - 1").is_ok());
    }
}
