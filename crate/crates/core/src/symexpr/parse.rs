use super::expr::RationalExpr;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

/// Grammar, loosest to tightest binding:
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := factor (('*' | '/') factor)*
/// factor := '-' factor | power
/// power  := atom ('^' exponent)?          exponent := '-'* power
/// atom   := integer | identifier | '(' expr ')'
/// ```
///
/// `^` is right associative and exponents must reduce to nonnegative
/// integer constants.  Rational literals like `3/4` fall out of `/` on
/// integers.  Identifiers must name declared coordinates.
pub fn parse_expr(src: &str, coords: &[String]) -> Result<RationalExpr> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        coords,
        src_len: src.len(),
    };
    let expr = p.expr()?;
    if let Some((tok, at)) = p.peek() {
        return Err(Error::Syntax {
            pos: at,
            msg: format!("unexpected `{}` after expression", tok.describe()),
        });
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(v) => v.to_string(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    return Err(Error::Syntax {
                        pos: i,
                        msg: "decimal literals are not supported; use p/q".into(),
                    });
                }
                let digits = &src[start..i];
                let v = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or(Error::Syntax {
                    pos: start,
                    msg: "malformed integer literal".into(),
                })?;
                out.push((Tok::Int(v), start));
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", &src[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a [String],
    src_len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<(&Tok, usize)> {
        self.tokens.get(self.pos).map(|(t, at)| (t, *at))
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, at)| *at)
            .unwrap_or(self.src_len)
    }

    fn expr(&mut self) -> Result<RationalExpr> {
        let mut acc = self.term()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.checked_add(&rhs)?;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.checked_add(&-&rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalExpr> {
        let mut acc = self.factor()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.checked_mul(&rhs)?;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.div(&rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RationalExpr> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.factor()?;
            return Ok(-&inner);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalExpr> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let at = self.here();
            let e = self.exponent()?;
            let c = e.as_constant().ok_or(Error::BadExponent { pos: at })?;
            if !c.denom().is_one() || c.is_negative() {
                return Err(Error::BadExponent { pos: at });
            }
            let e = c
                .numer()
                .to_u32()
                .ok_or_else(|| Error::ExponentOverflow(c.to_string()))?;
            return base.pow(e);
        }
        Ok(base)
    }

    /// Exponent position: allow unary minus and a further `^` chain
    /// (right associativity), but the result must be a constant.
    fn exponent(&mut self) -> Result<RationalExpr> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.exponent()?;
            return Ok(-&inner);
        }
        self.power()
    }

    fn atom(&mut self) -> Result<RationalExpr> {
        let at = self.here();
        match self.bump() {
            Some((Tok::Int(v), _)) => Ok(RationalExpr::constant(
                num_rational::BigRational::from_integer(v),
            )),
            Some((Tok::Ident(name), pos)) => {
                if self.coords.iter().any(|c| c == &name) {
                    Ok(RationalExpr::var(&name))
                } else {
                    Err(Error::UnknownIdentifier { name, pos })
                }
            }
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    other => Err(Error::Syntax {
                        pos: other.map(|(_, p)| p).unwrap_or(self.src_len),
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some((tok, pos)) => Err(Error::Syntax {
                pos,
                msg: format!("expected a value, found `{}`", tok.describe()),
            }),
            None => Err(Error::Syntax {
                pos: at,
                msg: "unexpected end of expression".into(),
            }),
        }
    }
}
