//! Polynomial text formats.
//!
//! * Term lists: an optional `# d=<d>` header, then one `k1 ... kd : coeff`
//!   line per term in lexicographic order.
//! * Inline expressions over `u1..ud` with integers, `+ - *`, `^` (negative
//!   exponents allowed on monomials), parentheses, implicit multiplication,
//!   and the aliases `f` (the critical Laplacian) and `g1, g2, ...` (the
//!   generators of `I_d`).

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;

use super::{standard_polys, LaurentError, LaurentPoly};

fn parse_err(position: usize, message: impl Into<String>) -> LaurentError {
    LaurentError::Parse { position, message: message.into() }
}

pub fn to_text(p: &LaurentPoly) -> String {
    let mut out = format!("# d={}\n", p.dim());
    for (k, c) in p.terms() {
        for e in k {
            write!(out, "{e} ").unwrap();
        }
        writeln!(out, ": {c}").unwrap();
    }
    out
}

/// Parses the term-list format. Positions in errors are 1-based line numbers.
pub fn parse_text(text: &str) -> Result<LaurentPoly, LaurentError> {
    let mut dim: Option<usize> = None;
    let mut terms = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("d=") {
                let d: usize = v.trim().parse().map_err(|_| parse_err(lineno, "bad dimension header"))?;
                if dim.is_some_and(|old| old != d) {
                    return Err(parse_err(lineno, "conflicting dimension"));
                }
                dim = Some(d);
            }
            continue;
        }
        let (lhs, rhs) = line.split_once(':').ok_or_else(|| parse_err(lineno, "expected `k1 ... kd : coeff`"))?;
        let k: Vec<i64> = lhs
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(lineno, format!("bad exponent `{t}`"))))
            .collect::<Result<_, _>>()?;
        let c: BigInt = rhs.trim().parse().map_err(|_| parse_err(lineno, format!("bad coefficient `{}`", rhs.trim())))?;
        match dim {
            None => dim = Some(k.len()),
            Some(d) if d != k.len() => {
                return Err(parse_err(lineno, format!("expected {d} exponents, found {}", k.len())))
            }
            _ => {}
        }
        terms.push((k, c));
    }
    let dim = dim.ok_or_else(|| parse_err(0, "empty input without a `# d=` header"))?;
    if dim == 0 {
        return Err(parse_err(0, "dimension must be positive"));
    }
    LaurentPoly::from_terms(dim, terms)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, LaurentError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((start, Tok::Int(s.parse().unwrap())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => return Err(parse_err(start, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    dim: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<LaurentPoly, LaurentError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPoly, LaurentError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = &acc * &self.power()?;
                }
                Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<LaurentPoly, LaurentError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let n: u32 = match self.bump() {
            Some(Tok::Int(n)) => u32::try_from(&n).map_err(|_| parse_err(at, "exponent too large"))?,
            _ => return Err(parse_err(at, "expected an integer exponent")),
        };
        if !negative {
            return Ok(base.pow(n));
        }
        if base.num_terms() != 1 {
            return Err(parse_err(at, "negative powers are only defined for monomials"));
        }
        let (k, c) = base.terms().next().map(|(k, c)| (k.to_vec(), c.clone())).unwrap();
        if !(c.is_one() || (-c).is_one()) {
            return Err(parse_err(at, "negative powers need a unit coefficient"));
        }
        Ok(LaurentPoly::monomial(k.iter().map(|e| -e).collect(), base.coeff(&k)).pow(n))
    }

    fn primary(&mut self) -> Result<LaurentPoly, LaurentError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(LaurentPoly::constant(self.dim, n)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(parse_err(self.offset(), "expected `)`")),
                }
            }
            Some(Tok::Ident(name)) => self.ident(&name, at),
            Some(t) => Err(parse_err(at, format!("unexpected token {t:?}"))),
            None => Err(parse_err(at, "unexpected end of input")),
        }
    }

    fn ident(&self, name: &str, at: usize) -> Result<LaurentPoly, LaurentError> {
        let index = |rest: &str| rest.parse::<usize>().ok().filter(|&i| i >= 1);
        if name == "f" {
            return Ok(standard_polys(self.dim, 2 * self.dim as i64).map_err(|e| parse_err(at, e.to_string()))?.f);
        }
        if let Some(i) = name.strip_prefix('u').and_then(index) {
            if i > self.dim {
                return Err(parse_err(at, format!("variable u{i} exceeds dimension {}", self.dim)));
            }
            return Ok(LaurentPoly::variable(self.dim, i - 1));
        }
        if let Some(i) = name.strip_prefix('g').and_then(index) {
            let sp = standard_polys(self.dim, 2 * self.dim as i64).map_err(|e| parse_err(at, e.to_string()))?;
            return sp.generators.get(i - 1).cloned().ok_or_else(|| {
                parse_err(at, format!("only {} generators in dimension {}", sp.generators.len(), self.dim))
            });
        }
        Err(parse_err(at, format!("unknown identifier `{name}`")))
    }
}

/// Parses an inline expression such as `(1-u1)^2*(1-u2)` or `g3 + u1^-1*f`.
/// Error positions are character offsets.
pub fn parse_expression(src: &str, dim: usize) -> Result<LaurentPoly, LaurentError> {
    if dim == 0 {
        return Err(parse_err(0, "dimension must be positive"));
    }
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, dim, src };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(parse_err(p.offset(), "trailing input"));
    }
    Ok(e)
}
