//! Truncated Laurent series in ħ with exact rational coefficients.
//!
//! A [`TruncLaurent`] is known modulo ħ^(order+1). Every value carries its own
//! order, so precision lost through divisions by ħ is visible in the result
//! instead of silently corrupting low coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default lowest admissible ħ-exponent (as a positive number).
pub const DEFAULT_VMAX: i32 = 2;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("exp needs a series of valuation >= 1, found a term of exponent {0}")]
    NonPositiveValuation(i32),
    #[error("exponent {exp} is below the Laurent floor -{vmax}")]
    ValuationUnderflow { exp: i32, vmax: i32 },
    #[error("q-binomial index out of range: n = {n}, k = {k}")]
    IndexOutOfRange { n: i64, k: i64 },
    #[error("series is not invertible: constant term vanishes")]
    NotUnit,
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `a/b`.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `a/b` or a plain integer.
pub fn parse_rational(s: &str) -> Result<Rational, SeriesError> {
    let bad = || SeriesError::BadRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(a, b))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Laurent polynomial in ħ, known modulo ħ^(order+1), with no exponent below
/// `-vmax`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncLaurent {
    coeffs: BTreeMap<i32, Rational>,
    order: i32,
    vmax: i32,
}

impl TruncLaurent {
    pub fn zero(order: i32) -> Self {
        TruncLaurent { coeffs: BTreeMap::new(), order, vmax: DEFAULT_VMAX }
    }

    pub fn one(order: i32) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: i32) -> Self {
        Self::monomial(c, 0, order)
    }

    pub fn from_int(c: i64, order: i32) -> Self {
        Self::constant(rat(c), order)
    }

    /// `c·ħ^e`; dropped when `e` exceeds the order.
    pub fn monomial(c: Rational, e: i32, order: i32) -> Self {
        let mut s = Self::zero(order);
        if e <= order && !c.is_zero() {
            s.coeffs.insert(e, c);
        }
        s
    }

    pub fn hbar(order: i32) -> Self {
        Self::monomial(Rational::one(), 1, order)
    }

    /// Builds a series from `(exponent, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (i32, Rational)>>(terms: I, order: i32) -> Self {
        let mut s = Self::zero(order);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    pub fn with_vmax(mut self, vmax: i32) -> Self {
        self.vmax = vmax;
        self
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn vmax(&self) -> i32 {
        self.vmax
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i32) -> Rational {
        self.coeffs.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient, `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// True when the constant term is nonzero and no negative powers occur.
    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    fn add_term(&mut self, e: i32, c: Rational) {
        if e > self.order || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    /// Lowers the order to at most `n`, dropping higher coefficients.
    pub fn truncate(&self, n: i32) -> Self {
        let order = self.order.min(n);
        TruncLaurent {
            coeffs: self.coeffs.range(..=order).map(|(e, c)| (*e, c.clone())).collect(),
            order,
            vmax: self.vmax,
        }
    }

    /// Equality of all coefficients up to exponent `n`, requiring both sides to
    /// be known at least that far.
    pub fn agrees_to(&self, other: &Self, n: i32) -> bool {
        self.order >= n && other.order >= n && self.truncate(n).coeffs == other.truncate(n).coeffs
    }

    /// True when the value is zero modulo ħ^(n+1) and known that far.
    pub fn vanishes_to(&self, n: i32) -> bool {
        self.order >= n && self.coeffs.range(..=n).next().is_none()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self { coeffs: BTreeMap::new(), ..self.clone() };
        }
        TruncLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c * r)).collect(),
            order: self.order,
            vmax: self.vmax,
        }
    }

    /// Product with exponent floor checking.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let vmax = self.vmax.max(other.vmax);
        // Precision: (f + O(ħ^(a+1)))(g + O(ħ^(b+1))) is known to
        // min(a + val g, b + val f), never beyond the larger input order.
        const INF: i32 = i32::MAX / 4;
        let vf = self.valuation().unwrap_or(INF);
        let vg = other.valuation().unwrap_or(INF);
        let order = (self.order + vg)
            .min(other.order + vf)
            .min(self.order + other.order + 1)
            .min(self.order.max(other.order));
        let mut out = TruncLaurent { coeffs: BTreeMap::new(), order, vmax };
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e = ea + eb;
                if e > order {
                    break;
                }
                if e < -vmax {
                    return Err(SeriesError::ValuationUnderflow { exp: e, vmax });
                }
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplies by ħ^k.
    pub fn mul_h(&self, k: i32) -> Self {
        TruncLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            order: self.order + k,
            vmax: self.vmax,
        }
    }

    /// Divides by ħ^k; the order drops by `k`.
    pub fn div_h(&self, k: i32) -> Result<Self, SeriesError> {
        let shifted = self.mul_h(-k);
        if let Some(v) = shifted.valuation() {
            if v < -self.vmax {
                return Err(SeriesError::ValuationUnderflow { exp: v, vmax: self.vmax });
            }
        }
        Ok(shifted)
    }

    /// Inverse of a unit, or of ħ^v times a unit.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let v = self.valuation().ok_or(SeriesError::NotUnit)?;
        let u = self.mul_h(-v);
        let a0 = u.constant_term();
        let inv0 = a0.recip();
        let n = u.order;
        let mut g: Vec<Rational> = Vec::with_capacity((n.max(0) + 1) as usize);
        g.push(inv0.clone());
        for k in 1..=n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                let aj = u.coeff(j);
                if !aj.is_zero() {
                    acc += aj * &g[(k - j) as usize];
                }
            }
            g.push(-(acc * &inv0));
        }
        let inv = TruncLaurent::from_terms(g.into_iter().enumerate().map(|(e, c)| (e as i32, c)), n)
            .with_vmax(self.vmax);
        inv.div_h(v)
    }

    /// `self^k` for `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.order).with_vmax(self.vmax);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Value at ħ = 0 (requires no negative powers to be meaningful).
    pub fn mod_h(&self) -> Rational {
        self.constant_term()
    }

    pub fn is_polynomial(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// Substitutes a rational for ħ; only meaningful for exact polynomials.
    pub fn eval_at(&self, x: &Rational) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, (e, c)| {
            let p = if *e >= 0 {
                num_traits::pow(x.clone(), *e as usize)
            } else {
                num_traits::pow(x.recip(), (-*e) as usize)
            };
            acc + c * p
        })
    }
}

/// Σ_{n≥0} f^n/n!, truncated at the order of `f`.
pub fn ts_exp(f: &TruncLaurent) -> Result<TruncLaurent, SeriesError> {
    if let Some(v) = f.valuation() {
        if v <= 0 {
            return Err(SeriesError::NonPositiveValuation(v));
        }
    }
    let n = f.order;
    let mut out = TruncLaurent::one(n).with_vmax(f.vmax);
    let mut power = TruncLaurent::one(n).with_vmax(f.vmax);
    let mut k = 1i64;
    loop {
        power = (&power * f).scale(&ratio(1, k));
        if power.is_zero() {
            break;
        }
        out += &power;
        k += 1;
    }
    Ok(out)
}

/// `e^{ħc}` for a series `c` without negative powers.
pub fn exp_hbar(c: &TruncLaurent) -> TruncLaurent {
    ts_exp(&c.mul_h(1).truncate(c.order)).expect("ħc has positive valuation")
}

/// Divides by ħ^k, shifting the order down by `k`.
pub fn ts_div_h(f: &TruncLaurent, k: i32) -> Result<TruncLaurent, SeriesError> {
    f.div_h(k)
}

/// Laurent polynomial in q with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly(BTreeMap<i32, BigInt>);

impl QPoly {
    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn monomial(e: i32) -> Self {
        QPoly(BTreeMap::from([(e, BigInt::one())]))
    }

    pub fn shift(&self, k: i32) -> Self {
        QPoly(self.0.iter().map(|(e, c)| (e + k, c.clone())).collect())
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, BigInt> {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = QPoly::default();
        for (a, x) in &self.0 {
            for (b, y) in &other.0 {
                out.add_term(a + b, x * y);
            }
        }
        out
    }

    fn add_term(&mut self, e: i32, c: BigInt) {
        let entry = self.0.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&e);
        }
    }

    /// Value at q = 1.
    pub fn at_one(&self) -> BigInt {
        self.0.values().sum()
    }

    /// Substitutes q = e^{ħd}.
    pub fn to_series(&self, d: i64, order: i32) -> TruncLaurent {
        let mut out = TruncLaurent::zero(order);
        for (e, c) in &self.0 {
            let x = TruncLaurent::from_int(d * *e as i64, order);
            out += &exp_hbar(&x).scale(&Rational::from_integer(c.clone()));
        }
        out
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.0 {
            out.add_term(*e, c.clone());
        }
        out
    }
}

/// `[n]_q = Σ_{s<n} q^{2s-n+1}`, with `[0]_q = 1`.
pub fn qint_poly(n: u32) -> QPoly {
    if n == 0 {
        return QPoly::one();
    }
    let n = n as i32;
    let mut out = QPoly::default();
    for s in 0..n {
        out.add_term(2 * s - n + 1, BigInt::one());
    }
    out
}

/// Gaussian binomial via `[n,k] = q^{n-k}[n-1,k-1] + q^{-k}[n-1,k]`.
pub fn qbinom_poly(n: i64, k: i64) -> Result<QPoly, SeriesError> {
    if n < 0 || k < 0 || k > n {
        return Err(SeriesError::IndexOutOfRange { n, k });
    }
    let n = n as usize;
    let k = k as usize;
    let mut row = vec![QPoly::one()];
    for m in 1..=n {
        let mut next = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let mut entry = QPoly::default();
            if j >= 1 {
                entry = &entry + &row[j - 1].shift((m - j) as i32);
            }
            if j < m {
                entry = &entry + &row[j].shift(-(j as i32));
            }
            next.push(entry);
        }
        row = next;
    }
    Ok(row[k].clone())
}

/// `[n]_{q_d}` with `q_d = e^{ħd}`.
pub fn qint(n: u32, d: i64, order: i32) -> TruncLaurent {
    qint_poly(n).to_series(d, order)
}

/// Gaussian binomial `[n over k]_{q_d}` as a series.
pub fn qbinom(n: i64, k: i64, d: i64, order: i32) -> Result<TruncLaurent, SeriesError> {
    Ok(qbinom_poly(n, k)?.to_series(d, order))
}

impl AddAssign<&TruncLaurent> for TruncLaurent {
    fn add_assign(&mut self, rhs: &TruncLaurent) {
        self.order = self.order.min(rhs.order);
        self.vmax = self.vmax.max(rhs.vmax);
        let order = self.order;
        self.coeffs.retain(|e, _| *e <= order);
        for (e, c) in rhs.coeffs.range(..=order) {
            self.add_term(*e, c.clone());
        }
    }
}

impl SubAssign<&TruncLaurent> for TruncLaurent {
    fn sub_assign(&mut self, rhs: &TruncLaurent) {
        *self += &(-rhs);
    }
}

impl Add for &TruncLaurent {
    type Output = TruncLaurent;
    fn add(self, rhs: &TruncLaurent) -> TruncLaurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &TruncLaurent {
    type Output = TruncLaurent;
    fn sub(self, rhs: &TruncLaurent) -> TruncLaurent {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &TruncLaurent {
    type Output = TruncLaurent;
    fn neg(self) -> TruncLaurent {
        TruncLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
            order: self.order,
            vmax: self.vmax,
        }
    }
}

impl Neg for TruncLaurent {
    type Output = TruncLaurent;
    fn neg(self) -> TruncLaurent {
        -&self
    }
}

/// # Panics
/// When a product term falls below the Laurent floor; use
/// [`TruncLaurent::checked_mul`] where that can happen.
impl Mul for &TruncLaurent {
    type Output = TruncLaurent;
    fn mul(self, rhs: &TruncLaurent) -> TruncLaurent {
        self.checked_mul(rhs).expect("Laurent floor exceeded")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for TruncLaurent {
            type Output = TruncLaurent;
            fn $f(self, rhs: TruncLaurent) -> TruncLaurent {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for TruncLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 + O(h^{})", self.order + 1);
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = abs.is_one();
            match (*e, unit) {
                (0, _) => write!(f, "{abs}")?,
                (1, true) => write!(f, "h")?,
                (1, false) => write!(f, "{abs}*h")?,
                (_, true) => write!(f, "h^{e}")?,
                (_, false) => write!(f, "{abs}*h^{e}")?,
            }
        }
        write!(f, " + O(h^{})", self.order + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    vmax: i32,
    #[serde(rename = "N")]
    order: i32,
    terms: BTreeMap<String, String>,
}

impl Serialize for TruncLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeriesRepr {
            vmax: self.vmax,
            order: self.order,
            terms: self.coeffs.iter().map(|(e, c)| (e.to_string(), rational_to_string(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncLaurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = SeriesRepr::deserialize(d)?;
        let mut out = TruncLaurent::zero(r.order).with_vmax(r.vmax);
        for (e, c) in r.terms {
            let e: i32 = e.parse().map_err(D::Error::custom)?;
            if e < -r.vmax {
                return Err(D::Error::custom(format!("exponent {e} below -vmax")));
            }
            out.add_term(e, parse_rational(&c).map_err(D::Error::custom)?);
        }
        Ok(out)
    }
}

/// Serde adapter for rational matrices, written as rows of `"a/b"` strings.
pub mod qmat_serde {
    use super::{parse_rational, rational_to_string, Rational};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(rational_to_string).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        rows.iter()
            .map(|r| r.iter().map(|x| parse_rational(x).map_err(D::Error::custom)).collect())
            .collect()
    }
}

/// Small-integer view of a rational, when it is one.
pub fn as_small_int(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(terms: &[(i32, i64)], n: i32) -> TruncLaurent {
        TruncLaurent::from_terms(terms.iter().map(|(e, c)| (*e, rat(*c))), n)
    }

    #[test]
    fn exp_basics() {
        assert_eq!(ts_exp(&TruncLaurent::zero(4)).unwrap(), TruncLaurent::one(4));
        let e = ts_exp(&TruncLaurent::hbar(3)).unwrap();
        let want = TruncLaurent::from_terms(
            [(0, rat(1)), (1, rat(1)), (2, ratio(1, 2)), (3, ratio(1, 6))],
            3,
        );
        assert_eq!(e, want);
        let prod = &ts_exp(&TruncLaurent::hbar(4)).unwrap() * &ts_exp(&-TruncLaurent::hbar(4)).unwrap();
        assert_eq!(prod, TruncLaurent::one(4));
        assert_eq!(ts_exp(&TruncLaurent::one(3)), Err(SeriesError::NonPositiveValuation(0)));
    }

    #[test]
    fn division_by_hbar() {
        assert_eq!(ts_div_h(&s(&[(2, 1)], 4), 1).unwrap(), s(&[(1, 1)], 3));
        assert_eq!(ts_div_h(&s(&[(1, 2), (3, 1)], 4), 1).unwrap(), s(&[(0, 2), (2, 1)], 3));
        let inv = ts_div_h(&TruncLaurent::one(4), 1).unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert!(matches!(
            ts_div_h(&TruncLaurent::one(4), 3),
            Err(SeriesError::ValuationUnderflow { .. })
        ));
    }

    #[test]
    fn q_integers() {
        assert_eq!(qint(1, 3, 4), TruncLaurent::one(4));
        assert_eq!(qint(0, 2, 4), TruncLaurent::one(4));
        // e^h + e^{-h} = 2 + h^2 + ..., so [2] = 2 + h^2 at order 2.
        assert_eq!(qint(2, 1, 2), s(&[(0, 2), (2, 1)], 2));
    }

    #[test]
    fn q_binomials() {
        assert_eq!(qbinom(5, 0, 2, 4).unwrap(), TruncLaurent::one(4));
        assert_eq!(qbinom_poly(2, 1).unwrap(), &QPoly::monomial(1) + &QPoly::monomial(-1));
        assert!(matches!(qbinom(2, 3, 1, 4), Err(SeriesError::IndexOutOfRange { .. })));
        // (n)_{q^2} = 1 + q^2 + ... + q^{2(n-1)} = q^{n-1}[n]_q
        for n in 1..=5u32 {
            let mut lhs = QPoly::default();
            for s in 0..n as i32 {
                lhs = &lhs + &QPoly::monomial(2 * s);
            }
            assert_eq!(lhs, qint_poly(n).shift(n as i32 - 1));
        }
    }

    #[test]
    fn unit_inverse() {
        let f = s(&[(0, 2), (1, 3), (3, -1)], 5);
        let g = f.inverse().unwrap();
        assert_eq!(&f * &g, TruncLaurent::one(5));
        assert_eq!(TruncLaurent::zero(3).inverse(), Err(SeriesError::NotUnit));
    }

    #[test]
    fn precision_tracking() {
        let a = s(&[(0, 1), (1, 1)], 4);
        let b = ts_div_h(&s(&[(1, 1), (2, 1)], 4), 1).unwrap();
        assert_eq!(b.order(), 3);
        assert_eq!((&a + &b).order(), 3);
        let c = &TruncLaurent::hbar(4) * &b;
        assert_eq!(c.order(), 4);
    }

    #[test]
    fn json_roundtrip() {
        let f = s(&[(-1, 3), (0, 1), (2, -5)], 4).scale(&ratio(1, 7));
        let j = serde_json::to_string(&f).unwrap();
        assert!(j.contains("\"N\":4"));
        assert!(j.contains("\"-1\":\"3/7\""));
        let back: TruncLaurent = serde_json::from_str(&j).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(s(&[(0, 2), (2, -1)], 3).to_string(), "2 - h^2 + O(h^4)");
    }

    fn arb_series(min_exp: i32) -> impl Strategy<Value = TruncLaurent> {
        proptest::collection::vec((min_exp..=6, -20i64..=20, 1i64..=6), 0..5).prop_map(|ts| {
            TruncLaurent::from_terms(ts.into_iter().map(|(e, n, d)| (e, ratio(n, d))), 6)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn distributive(a in arb_series(0), b in arb_series(0), c in arb_series(0)) {
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn mul_commutes_and_associates(a in arb_series(0), b in arb_series(0), c in arb_series(0)) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn exp_is_a_homomorphism(a in arb_series(1), b in arb_series(1)) {
            let lhs = &ts_exp(&a).unwrap() * &ts_exp(&b).unwrap();
            prop_assert_eq!(lhs, ts_exp(&(&a + &b)).unwrap());
        }

        #[test]
        fn classical_limits(n in 0u32..=8, d in 1i64..=3) {
            let k = if n == 0 { 1 } else { n as i64 };
            prop_assert_eq!(qint(n, d, 4).constant_term(), rat(k));
            for j in 0..=n as i64 {
                let b = qbinom(n as i64, j, d, 4).unwrap().constant_term();
                let want = num_integer::binomial(n as i64, j);
                prop_assert_eq!(b, rat(want));
            }
        }
    }
}
