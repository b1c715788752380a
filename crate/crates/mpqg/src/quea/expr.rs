//! A small expression language for elements of U.
//!
//! Atoms: `E1`, `F2`, `H3`, `T+1`, `T-2`, `S1`, `L1`, `hbar`, integers and
//! rationals `a/b`; `exp(...)` of a toral argument with ħ-valuation ≥ 1.
//! Operators `*` (binding tighter), `+`, `-`, unary minus, `^` with a
//! non-negative integer exponent, and parentheses. Indices are 1-based.

use num_bigint::BigInt;
use serde_json::Value;

use super::{Gen, Mono, QueaError, UContext, UElem, TL};
use crate::series::{rat, ratio, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Hbar,
    Gen(Gen),
    TPlus(usize),
    TMinus(usize),
    /// (T_i^+ + T_i^-)/2
    S(usize),
    /// (T_i^+ − T_i^-)/2
    L(usize),
    Exp(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String, usize),
    TPlus(usize),
    TMinus(usize),
    Hbar,
    Exp,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn perr(pos: usize, msg: impl Into<String>) -> QueaError {
    QueaError::Parse(format!("at position {pos}: {}", msg.into()))
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, QueaError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        chars[start..*i].iter().collect()
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '/' => {
                i += 1;
                Tok::Slash
            }
            '^' => {
                i += 1;
                Tok::Caret
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            d if d.is_ascii_digit() => Tok::Int(digits(&mut i).parse().expect("digits")),
            'T' if i + 1 < chars.len() && (chars[i + 1] == '+' || chars[i + 1] == '-') => {
                let sign = chars[i + 1];
                i += 2;
                let d = digits(&mut i);
                if d.is_empty() {
                    return Err(perr(pos, "expected an index after T+/T-"));
                }
                let k: usize = d.parse().map_err(|_| perr(pos, "index too large"))?;
                if sign == '+' {
                    Tok::TPlus(k)
                } else {
                    Tok::TMinus(k)
                }
            }
            a if a.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "hbar" => Tok::Hbar,
                    "exp" => Tok::Exp,
                    "E" | "F" | "H" | "S" | "L" => {
                        let d = digits(&mut i);
                        if d.is_empty() {
                            return Err(perr(pos, format!("expected an index after {word}")));
                        }
                        Tok::Ident(word, d.parse().map_err(|_| perr(pos, "index too large"))?)
                    }
                    _ => return Err(perr(pos, format!("unknown symbol '{word}'"))),
                }
            }
            other => return Err(perr(pos, format!("unexpected character '{other}'"))),
        };
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), QueaError> {
        let pos = self.pos();
        match self.bump() {
            Some(ref x) if *x == t => Ok(()),
            _ => Err(perr(pos, format!("expected {what}"))),
        }
    }

    fn sum(&mut self) -> Result<Expr, QueaError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, QueaError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, QueaError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, QueaError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(k)) => {
                    let k: u32 = k.try_into().map_err(|_| perr(pos, "exponent too large"))?;
                    return Ok(Expr::Pow(Box::new(base), k));
                }
                _ => return Err(perr(pos, "expected a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, QueaError> {
        let pos = self.pos();
        let index = |k: usize| -> Result<usize, QueaError> {
            if k == 0 {
                Err(perr(pos, "indices start at 1"))
            } else {
                Ok(k - 1)
            }
        };
        match self.bump() {
            Some(Tok::Int(a)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let p2 = self.pos();
                    match self.bump() {
                        Some(Tok::Int(b)) if b != BigInt::from(0) => Ok(Expr::Num(Rational::new(a, b))),
                        Some(Tok::Int(_)) => Err(perr(p2, "division by zero")),
                        _ => Err(perr(p2, "expected an integer denominator")),
                    }
                } else {
                    Ok(Expr::Num(Rational::from_integer(a)))
                }
            }
            Some(Tok::Hbar) => Ok(Expr::Hbar),
            Some(Tok::TPlus(k)) => Ok(Expr::TPlus(index(k)?)),
            Some(Tok::TMinus(k)) => Ok(Expr::TMinus(index(k)?)),
            Some(Tok::Ident(name, k)) => {
                let k = index(k)?;
                Ok(match name.as_str() {
                    "E" => Expr::Gen(Gen::E(k)),
                    "F" => Expr::Gen(Gen::F(k)),
                    "H" => Expr::Gen(Gen::H(k)),
                    "S" => Expr::S(k),
                    _ => Expr::L(k),
                })
            }
            Some(Tok::Exp) => {
                self.expect(Tok::LParen, "'(' after exp")?;
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Exp(Box::new(inner)))
            }
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(_) => Err(perr(pos, "unexpected token")),
            None => Err(perr(pos, "unexpected end of input")),
        }
    }
}

/// Parses an expression; errors carry the character position.
pub fn parse_expr(src: &str) -> Result<Expr, QueaError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.chars().count() };
    let e = p.sum()?;
    if p.at < p.toks.len() {
        return Err(perr(p.pos(), "unexpected trailing input"));
    }
    Ok(e)
}

impl UContext {
    fn check_index(&self, i: usize, bound: usize, what: &str) -> Result<(), QueaError> {
        if i < bound {
            Ok(())
        } else {
            Err(QueaError::BadIndex(format!("{what}{} (have {bound})", i + 1)))
        }
    }

    /// (a·T_i^+ + b·T_i^-)/2 as an element.
    fn coroot_elem(&self, i: usize, a: i64, b: i64) -> Result<UElem, QueaError> {
        self.check_index(i, self.n(), "coroot ")?;
        let (a, b) = (ratio(a, 2), ratio(b, 2));
        let v: Vec<TL> = (0..self.t()).map(|g| (&self.tplus(i)[g].scale(&a) + &self.tminus(i)[g].scale(&b)).truncate(self.w())).collect();
        Ok(self.h_vec(&v))
    }

    /// Evaluates a parsed expression to a normal form.
    pub fn eval_expr(&self, e: &Expr) -> Result<UElem, QueaError> {
        let w = self.w();
        Ok(match e {
            Expr::Num(r) => self.scalar(TL::monomial(r.clone(), 0, w)),
            Expr::Hbar => self.scalar(TL::monomial(rat(1), 1, w)),
            Expr::Gen(g) => {
                match *g {
                    Gen::E(i) | Gen::F(i) => self.check_index(i, self.n(), "generator index ")?,
                    Gen::H(k) => self.check_index(k, self.t(), "H")?,
                }
                self.gen(*g)
            }
            Expr::TPlus(i) => self.coroot_elem(*i, 2, 0)?,
            Expr::TMinus(i) => self.coroot_elem(*i, 0, 2)?,
            Expr::S(i) => self.coroot_elem(*i, 1, 1)?,
            Expr::L(i) => self.coroot_elem(*i, 1, -1)?,
            Expr::Exp(x) => {
                let v = self.eval_expr(x)?;
                if v.terms.keys().any(|m| !m.is_toral()) {
                    return Err(QueaError::ExpArgument(format!("non-toral argument {v}")));
                }
                if v.valuation().is_some_and(|k| k < 1) {
                    return Err(QueaError::ExpArgument(format!("argument {v} has hbar-valuation below 1")));
                }
                self.exp(&v)?
            }
            Expr::Neg(x) => self.eval_expr(x)?.neg(),
            Expr::Add(a, b) => self.eval_expr(a)?.add(&self.eval_expr(b)?),
            Expr::Sub(a, b) => self.eval_expr(a)?.sub(&self.eval_expr(b)?),
            Expr::Mul(a, b) => self.mul(&self.eval_expr(a)?, &self.eval_expr(b)?),
            Expr::Pow(a, k) => self.pow(&self.eval_expr(a)?, *k),
        })
    }

    /// Parses and evaluates.
    pub fn eval_str(&self, src: &str) -> Result<UElem, QueaError> {
        self.eval_expr(&parse_expr(src)?)
    }

    /// Reads back the output of [`UElem::to_json`].
    pub fn elem_from_json(&self, v: &Value) -> Result<UElem, QueaError> {
        let arr = v.as_array().ok_or_else(|| QueaError::BadInput("expected an array of terms".into()))?;
        let mut out = UElem::zero();
        for item in arr {
            let m = item
                .get("monomial")
                .and_then(Value::as_str)
                .ok_or_else(|| QueaError::BadInput("term without a monomial".into()))?;
            let c: TL = serde_json::from_value(item.get("coefficient").cloned().unwrap_or(Value::Null))
                .map_err(|e| QueaError::BadInput(format!("coefficient: {e}")))?;
            let mono = self.parse_monomial(m)?;
            out.add_term(&mono, &c);
        }
        Ok(out)
    }

    /// Reads a normal monomial written as `F..*H..^k*E..` without rewriting it.
    pub fn parse_monomial(&self, src: &str) -> Result<Mono, QueaError> {
        let mut m = Mono::one(self.t());
        if src.trim() == "1" {
            return Ok(m);
        }
        let mut factors = Vec::new();
        collect_factors(&parse_expr(src)?, &mut factors)?;
        for (g, k) in factors {
            match g {
                Gen::F(i) => {
                    self.check_index(i, self.n(), "F")?;
                    m.f.extend(std::iter::repeat_n(i as u8, k as usize));
                }
                Gen::H(h) => {
                    self.check_index(h, self.t(), "H")?;
                    m.h[h] += k;
                }
                Gen::E(i) => {
                    self.check_index(i, self.n(), "E")?;
                    m.e.extend(std::iter::repeat_n(i as u8, k as usize));
                }
            }
        }
        Ok(m)
    }
}

fn collect_factors(e: &Expr, out: &mut Vec<(Gen, u32)>) -> Result<(), QueaError> {
    match e {
        Expr::Mul(a, b) => {
            collect_factors(a, out)?;
            collect_factors(b, out)
        }
        Expr::Gen(g) => {
            out.push((*g, 1));
            Ok(())
        }
        Expr::Pow(a, k) => match **a {
            Expr::Gen(g) => {
                out.push((g, *k));
                Ok(())
            }
            _ => Err(QueaError::Parse("monomial powers apply to generators only".into())),
        },
        _ => Err(QueaError::Parse("a monomial is a product of generators".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanDatum;
    use crate::quea::tests::ctx;

    #[test]
    fn precedence_and_atoms() {
        let e = parse_expr("1/2*(T+1 + T-1)").unwrap();
        assert_eq!(
            e,
            Expr::Mul(
                Box::new(Expr::Num(ratio(1, 2))),
                Box::new(Expr::Add(Box::new(Expr::TPlus(0)), Box::new(Expr::TMinus(0))))
            )
        );
        assert_eq!(parse_expr("T+1").unwrap(), Expr::TPlus(0));
        let e = parse_expr("E1 + F1*H2").unwrap();
        assert!(matches!(e, Expr::Add(_, ref b) if matches!(**b, Expr::Mul(_, _))));
        let e = parse_expr("E1*F1*E2").unwrap();
        assert!(matches!(e, Expr::Mul(ref a, _) if matches!(**a, Expr::Mul(_, _))));
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = parse_expr("E1 + * F1").unwrap_err();
        assert!(err.to_string().contains("position 5"), "{err}");
        assert!(parse_expr("E0").is_err());
        assert!(parse_expr("X1").is_err());
        assert!(parse_expr("(E1").is_err());
        assert!(parse_expr("3/0").is_err());
    }

    #[test]
    fn evaluation() {
        let u = ctx(&CartanDatum::a1(), 3, true);
        let s = u.eval_str("1/2*(T+1 + T-1)").unwrap();
        assert!(s.agrees_to(&u.eval_str("S1").unwrap(), 3));
        let ef = u.eval_str("E1*F1 - F1*E1").unwrap();
        assert!(ef.agrees_to(&u.ktilde_elem(0), 3));
        let x = u.eval_str("exp(hbar*T+1)*E1").unwrap();
        let y = u.mul(&u.exp_h(u.tplus(0)), &u.e(0));
        assert!(x.agrees_to(&y, 3));
        assert!(matches!(u.eval_str("exp(E1)"), Err(QueaError::ExpArgument(_))));
        assert!(matches!(u.eval_str("exp(T+1)"), Err(QueaError::ExpArgument(_))));
        assert!(matches!(u.eval_str("E2"), Err(QueaError::BadIndex(_))));
    }

    #[test]
    fn split_minimal_relation() {
        // [E_i, F_i] = e^{ħΛ_i}(e^{ħS_i} − e^{−ħS_i})/(q_i − q_i^{-1}) written via hbar
        let u = ctx(&CartanDatum::a2(), 3, true);
        for i in 1..=2 {
            let lhs = u.eval_str(&format!("E{i}*F{i} - F{i}*E{i}")).unwrap();
            let num = u.eval_str(&format!("exp(hbar*L{i})*(exp(hbar*S{i}) - exp(-hbar*S{i}))")).unwrap();
            let unit = u.kunit(i - 1);
            let rhs = UElem {
                terms: num.terms.iter().map(|(m, c)| (m.clone(), &c.div_h(1).unwrap() * &unit)).collect(),
            };
            assert!(lhs.agrees_to(&rhs, 3), "{}", lhs.sub(&rhs));
        }
    }

    #[test]
    fn json_round_trip() {
        let u = ctx(&CartanDatum::a2(), 3, true);
        let x = u.eval_str("E1*E2*F1 + 2/3*H2^2*E1 - hbar*F2*F1").unwrap();
        let back = u.elem_from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
    }
}
