use std::collections::BTreeSet;
use std::fmt;

use super::{Expr, UnaryOp};

/// Position and reason of a rejected expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub offset: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {}", self.message, self.offset)?;
        if !self.token.is_empty() {
            write!(f, " (near `{}`)", self.token)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseDiagnostic {}

/// Names an expression may refer to, split into coordinates and parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameSet {
    pub vars: BTreeSet<String>,
    pub params: BTreeSet<String>,
}

impl NameSet {
    pub fn new<V, P>(vars: V, params: P) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        P: IntoIterator,
        P::Item: Into<String>,
    {
        NameSet {
            vars: vars.into_iter().map(Into::into).collect(),
            params: params.into_iter().map(Into::into).collect(),
        }
    }

    /// `r` expands to the Euclidean radius when x, y, z are coordinates and
    /// `r` itself is not a declared name.
    fn radius_sugar(&self) -> bool {
        !self.vars.contains("r")
            && !self.params.contains("r")
            && ["x", "y", "z"].iter().all(|n| self.vars.contains(*n))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
    text: String,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ParseDiagnostic {
                offset: start,
                message: "malformed number".into(),
                token: lit.into(),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                offset: start,
                text: lit.into(),
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let ident = &text[start..i];
            out.push(Token {
                tok: Tok::Ident(ident.into()),
                offset: start,
                text: ident.into(),
            });
        } else if "+-*/^(),".contains(c) {
            i += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                offset: start,
                text: c.to_string(),
            });
        } else {
            let ch = text[start..].chars().next().unwrap_or(c);
            return Err(ParseDiagnostic {
                offset: start,
                message: "unexpected character".into(),
                token: ch.to_string(),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        offset: text.len(),
        text: String::new(),
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a NameSet,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, tok: &Token, message: &str) -> ParseDiagnostic {
        ParseDiagnostic {
            offset: tok.offset,
            message: message.into(),
            token: tok.text.clone(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseDiagnostic> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.error(&t, &format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseDiagnostic> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseDiagnostic> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseDiagnostic> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::Sym('(') {
                    self.call(&t, name)
                } else {
                    self.name(&t, name)
                }
            }
            _ => Err(self.error(&t, "expected operand")),
        }
    }

    fn call(&mut self, t: &Token, name: &str) -> Result<Expr, ParseDiagnostic> {
        self.bump();
        if name == "r" && self.names.radius_sugar() {
            self.expect(')')?;
            return Ok(radius());
        }
        let Some(op) = UnaryOp::from_function_name(name) else {
            return Err(self.error(t, "unknown function"));
        };
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(Expr::unary(op, arg))
    }

    fn name(&mut self, t: &Token, name: &str) -> Result<Expr, ParseDiagnostic> {
        if self.names.vars.contains(name) {
            Ok(Expr::Var(name.into()))
        } else if self.names.params.contains(name) {
            Ok(Expr::Param(name.into()))
        } else if name == "r" && self.names.radius_sugar() {
            Ok(radius())
        } else if name == "pi" {
            Ok(Expr::Num(std::f64::consts::PI))
        } else {
            Err(self.error(t, "unknown name"))
        }
    }
}

fn radius() -> Expr {
    let sq = |n: &str| Expr::pow(Expr::var(n), Expr::Num(2.0));
    Expr::unary(
        UnaryOp::Sqrt,
        Expr::add(Expr::add(sq("x"), sq("y")), sq("z")),
    )
}

/// Parse infix text into an [`Expr`] whose free names lie in `names`.
pub fn parse_expression(text: &str, names: &NameSet) -> Result<Expr, ParseDiagnostic> {
    if text.trim().is_empty() {
        return Err(ParseDiagnostic {
            offset: 0,
            message: "empty expression".into(),
            token: String::new(),
        });
    }
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, names };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.error(&t, "unexpected token"));
    }
    Ok(e)
}
