//! Recursive-descent parser for the expression DSL.
//!
//! Grammar: infix `+ - * / ^` with the usual precedence, unary minus,
//! function calls `f(a,b)`, jet coordinates in suffix form `u_x`, `u_xx`,
//! `u_xy` (letters after the underscore name independent variables,
//! order-insensitive) or indexed form `u[1,1]` (1-based independent-variable
//! positions). Kernel partials print and parse as `f_{,1,2}(args)`.

use num::{BigInt, Zero};
use thiserror::Error;

use super::build::{mk_add, mk_fun, mk_mul, mk_pow};
use super::{Elem, Expr, Rat, Resolved, SymbolTable};
use crate::jet::MultiIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared symbol `{name}` at offset {offset}")]
    Undeclared { name: String, offset: usize },
    #[error("malformed jet index at offset {offset}: {message}")]
    MalformedJet { offset: usize, message: String },
    #[error("exponent at offset {offset} is not a rational constant")]
    NonRationalExponent { offset: usize },
    #[error("kernel `{name}` expects {expected} argument(s), got {got} (offset {offset})")]
    KernelArity {
        name: String,
        expected: usize,
        got: usize,
        offset: usize,
    },
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident {
        base: String,
        suffix: Option<String>,
        tags: Option<Vec<usize>>,
    },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn lex_number(&mut self) -> Result<Rat, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut frac_part: &[u8] = b"";
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let fs = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            frac_part = &self.src[fs..self.pos];
            if frac_part.is_empty() {
                return Err(syntax(self.pos, "expected digits after decimal point"));
            }
        }
        let digits: String = std::str::from_utf8(int_part)
            .unwrap()
            .chars()
            .chain(std::str::from_utf8(frac_part).unwrap().chars())
            .collect();
        let numer: BigInt = digits.parse().unwrap();
        let denom = num::pow::pow(BigInt::from(10), frac_part.len());
        Ok(Rat::new(numer, denom))
    }

    fn lex_ident(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        self.pos += 1;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let base = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let mut suffix = None;
        let mut tags = None;
        if self.peek() == Some(b'_') {
            let upos = self.pos;
            self.pos += 1;
            match self.peek() {
                Some(b'{') => {
                    self.pos += 1;
                    let mut ts = Vec::new();
                    loop {
                        if self.peek() != Some(b',') {
                            return Err(ParseError::MalformedJet {
                                offset: self.pos,
                                message: "expected `,` in kernel tag".into(),
                            });
                        }
                        self.pos += 1;
                        let ds = self.pos;
                        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                            self.pos += 1;
                        }
                        if ds == self.pos {
                            return Err(ParseError::MalformedJet {
                                offset: self.pos,
                                message: "expected digit in kernel tag".into(),
                            });
                        }
                        let n: usize = std::str::from_utf8(&self.src[ds..self.pos])
                            .unwrap()
                            .parse()
                            .map_err(|_| ParseError::MalformedJet {
                                offset: ds,
                                message: "tag out of range".into(),
                            })?;
                        ts.push(n);
                        match self.peek() {
                            Some(b'}') => {
                                self.pos += 1;
                                break;
                            }
                            Some(b',') => continue,
                            _ => {
                                return Err(ParseError::MalformedJet {
                                    offset: self.pos,
                                    message: "expected `,` or `}` in kernel tag".into(),
                                })
                            }
                        }
                    }
                    tags = Some(ts);
                }
                Some(c) if c.is_ascii_alphanumeric() => {
                    let ss = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                        self.pos += 1;
                    }
                    suffix = Some(
                        std::str::from_utf8(&self.src[ss..self.pos]).unwrap().to_string(),
                    );
                }
                _ => {
                    return Err(ParseError::MalformedJet {
                        offset: upos,
                        message: "dangling underscore".into(),
                    })
                }
            }
        }
        Ok(Tok::Ident { base, suffix, tags })
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_ws();
        let offset = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            c if c.is_ascii_digit() => Tok::Num(self.lex_number()?),
            c if c.is_ascii_alphabetic() => self.lex_ident()?,
            _ => return Err(syntax(offset, format!("unexpected character `{}`", c as char))),
        };
        Ok(Some((tok, offset)))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    table: &'a SymbolTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(t) {
            self.idx += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn parse_sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.parse_term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    terms.push(self.parse_term()?);
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    terms.push(self.parse_term()?.neg());
                }
                _ => break,
            }
        }
        Ok(mk_add(terms))
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.parse_unary()?];
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    factors.push(self.parse_unary()?);
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    factors.push(self.parse_unary()?.recip());
                }
                _ => break,
            }
        }
        Ok(mk_mul(factors))
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(self.parse_unary()?.neg());
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let eoff = self.offset();
            let exponent = self.parse_unary()?;
            let Some(r) = exponent.as_rat() else {
                return Err(ParseError::NonRationalExponent { offset: eoff });
            };
            return Ok(mk_pow(base, r.clone()));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(Expr::num(r)),
            Some(Tok::LParen) => {
                let e = self.parse_sum()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident { base, suffix, tags }) => self.parse_ident(base, suffix, tags, offset),
            Some(_) => Err(syntax(offset, "expected a value")),
            None => Err(syntax(self.end, "unexpected end of input")),
        }
    }

    fn parse_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = vec![self.parse_sum()?];
        while self.peek() == Some(&Tok::Comma) {
            self.idx += 1;
            args.push(self.parse_sum()?);
        }
        self.expect(&Tok::RParen, "`)`")?;
        Ok(args)
    }

    fn parse_ident(
        &mut self,
        base: String,
        suffix: Option<String>,
        tags: Option<Vec<usize>>,
        offset: usize,
    ) -> Result<Expr, ParseError> {
        // Elementary functions are reserved names.
        if let Some(elem) = Elem::from_name(&base) {
            if suffix.is_some() || tags.is_some() {
                return Err(syntax(offset, format!("`{base}` is a function name")));
            }
            let args = self.parse_args()?;
            if args.len() != 1 {
                return Err(syntax(offset, format!("`{base}` takes one argument")));
            }
            return Ok(mk_fun(elem, args.into_iter().next().unwrap()));
        }
        if base == "sqrt" {
            if suffix.is_some() || tags.is_some() {
                return Err(syntax(offset, "`sqrt` is a function name"));
            }
            let args = self.parse_args()?;
            if args.len() != 1 {
                return Err(syntax(offset, "`sqrt` takes one argument"));
            }
            return Ok(mk_pow(
                args.into_iter().next().unwrap(),
                Rat::new(1.into(), 2.into()),
            ));
        }

        let Some(resolved) = self.table.lookup(&base) else {
            return Err(ParseError::Undeclared { name: base, offset });
        };
        match resolved {
            Resolved::Kernel(k) => {
                let args = self.parse_args()?;
                if args.len() != k.arity {
                    return Err(ParseError::KernelArity {
                        name: base,
                        expected: k.arity,
                        got: args.len(),
                        offset,
                    });
                }
                if suffix.is_some() {
                    return Err(ParseError::MalformedJet {
                        offset,
                        message: format!("kernel `{base}` cannot carry a jet suffix"),
                    });
                }
                Ok(Expr::kernel(&k, tags.unwrap_or_default(), args))
            }
            Resolved::Dependent(sym) => {
                if tags.is_some() {
                    return Err(ParseError::MalformedJet {
                        offset,
                        message: "derivative tags only apply to kernels".into(),
                    });
                }
                let dep = match sym.kind {
                    super::SymKind::Dependent { index } => index,
                    _ => unreachable!(),
                };
                if let Some(sfx) = suffix {
                    let mut indices = Vec::new();
                    for ch in sfx.chars() {
                        let name = ch.to_string();
                        match self.table.lookup(&name) {
                            Some(Resolved::Independent(x)) => match x.kind {
                                super::SymKind::Independent { index } => indices.push(index),
                                _ => unreachable!(),
                            },
                            _ => {
                                return Err(ParseError::MalformedJet {
                                    offset,
                                    message: format!(
                                        "`{ch}` is not an independent variable in `{base}_{sfx}`"
                                    ),
                                })
                            }
                        }
                    }
                    let mi = MultiIndex::new(indices);
                    let jet = self.table.jet(dep, &mi).unwrap();
                    return Ok(Expr::sym(&jet));
                }
                if self.peek() == Some(&Tok::LBracket) {
                    self.idx += 1;
                    let mut indices = Vec::new();
                    loop {
                        let ioff = self.offset();
                        match self.bump() {
                            Some(Tok::Num(r)) if r.is_integer() && !r.numer().is_zero() => {
                                let i: usize = r.numer().try_into().map_err(|_| {
                                    ParseError::MalformedJet {
                                        offset: ioff,
                                        message: "index out of range".into(),
                                    }
                                })?;
                                if i == 0 || i > self.table.q() {
                                    return Err(ParseError::MalformedJet {
                                        offset: ioff,
                                        message: format!("index {i} out of range 1..={}", self.table.q()),
                                    });
                                }
                                indices.push(i - 1);
                            }
                            _ => {
                                return Err(ParseError::MalformedJet {
                                    offset: ioff,
                                    message: "expected a positive integer index".into(),
                                })
                            }
                        }
                        match self.bump() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RBracket) => break,
                            _ => {
                                return Err(ParseError::MalformedJet {
                                    offset: self.offset(),
                                    message: "expected `,` or `]`".into(),
                                })
                            }
                        }
                    }
                    let mi = MultiIndex::new(indices);
                    let jet = self.table.jet(dep, &mi).unwrap();
                    return Ok(Expr::sym(&jet));
                }
                Ok(Expr::sym(&sym))
            }
            Resolved::Independent(sym) | Resolved::Parameter(sym) => {
                if suffix.is_some() || tags.is_some() {
                    return Err(ParseError::MalformedJet {
                        offset,
                        message: format!("`{base}` is not a dependent variable"),
                    });
                }
                Ok(Expr::sym(&sym))
            }
        }
    }
}

/// Parse a DSL string against a declaration table into a canonical
/// expression.
pub fn parse(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
        table,
    };
    let e = p.parse_sum()?;
    if p.idx != p.toks.len() {
        return Err(syntax(p.offset(), "trailing input"));
    }
    Ok(e)
}
