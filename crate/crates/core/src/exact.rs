//! Exact arithmetic on rationals and single square roots of rationals.
//!
//! Every weight the oracle sees is `c * sqrt(rho)` with `c`, `rho` rational.
//! Sums over one shared radicand stay in that form, so tail events reduce to
//! comparisons `p*sqrt(rho) <=> q*sqrt(mu)`, which are decided by signs and
//! squares without any rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::parse(&x.to_string(), "not a finite number"))
}

/// Parses `p/q`, integers, and decimals with an optional exponent (`0.35`, `-1e-3`).
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::parse(input, "empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim(), input)?;
        let d = parse_decimal(den.trim(), input)?;
        if d.is_zero() {
            return Err(Error::parse(input, "zero denominator"));
        }
        return Ok(n / d);
    }
    parse_decimal(s, input)
}

fn parse_decimal(s: &str, input: &str) -> Result<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = body[pos + 1..]
                .parse()
                .map_err(|_| Error::parse(input, "bad exponent"))?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::parse(input, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::parse(input, "unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().unwrap_or_default());
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Square root of a rational when it is itself rational.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = exact_isqrt(q.numer())?;
    let d = exact_isqrt(q.denom())?;
    Some(Rational::new(n, d))
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// `coef * sqrt(radicand)` with a positive rational radicand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Surd {
    #[serde(with = "rational_serde")]
    pub coef: Rational,
    #[serde(with = "rational_serde")]
    pub radicand: Rational,
}

impl Surd {
    pub fn rational(q: Rational) -> Self {
        Surd {
            coef: q,
            radicand: Rational::one(),
        }
    }

    pub fn new(coef: Rational, radicand: Rational) -> Result<Self> {
        if !radicand.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "radicand must be positive, got {radicand}"
            )));
        }
        Ok(Surd { coef, radicand })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.coef) * to_f64(&self.radicand).sqrt()
    }

    pub fn square(&self) -> Rational {
        &self.coef * &self.coef * &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    /// Rewrites `self` over `radicand` if the two radicands differ by a rational square.
    pub fn rebase(&self, radicand: &Rational) -> Option<Rational> {
        if self.coef.is_zero() {
            return Some(Rational::zero());
        }
        let ratio = &self.radicand / radicand;
        rational_sqrt(&ratio).map(|r| &self.coef * r)
    }

    /// Divides by `sqrt(s)` for a positive rational `s`.
    pub fn div_sqrt(&self, s: &Rational) -> Surd {
        Surd {
            coef: self.coef.clone(),
            radicand: &self.radicand / s,
        }
    }

    /// Parses a rational, or `[c*]sqrt(r)[/d]` with an optional leading sign.
    pub fn parse(input: &str) -> Result<Surd> {
        let s = input.trim();
        let Some(open) = s.find("sqrt(") else {
            return Ok(Surd::rational(parse_rational(s)?));
        };
        let close = s[open..]
            .find(')')
            .map(|c| c + open)
            .ok_or_else(|| Error::parse(input, "unclosed sqrt("))?;
        let radicand = parse_rational(&s[open + 5..close])?;
        let prefix = s[..open].trim();
        let mut coef = match prefix {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            p => {
                let p = p
                    .strip_suffix('*')
                    .ok_or_else(|| Error::parse(input, "expected `*` before sqrt("))?;
                parse_rational(p)?
            }
        };
        let suffix = s[close + 1..].trim();
        if !suffix.is_empty() {
            let d = suffix
                .strip_prefix('/')
                .ok_or_else(|| Error::parse(input, "unexpected text after sqrt(...)"))?;
            let d = parse_rational(d)?;
            if d.is_zero() {
                return Err(Error::parse(input, "zero denominator"));
            }
            coef /= d;
        }
        Surd::new(coef, radicand).map_err(|_| Error::parse(input, "radicand must be positive"))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand.is_one() {
            write!(f, "{}", self.coef)
        } else if self.coef.is_one() {
            write!(f, "sqrt({})", self.radicand)
        } else {
            write!(f, "{}*sqrt({})", self.coef, self.radicand)
        }
    }
}

/// A finite sum of surds, used for thresholds after elimination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurdSum {
    pub terms: Vec<Surd>,
}

impl SurdSum {
    pub fn zero() -> Self {
        SurdSum { terms: Vec::new() }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(Surd::to_f64).sum()
    }

    pub fn neg(&self) -> SurdSum {
        SurdSum {
            terms: self
                .terms
                .iter()
                .map(|t| Surd {
                    coef: -t.coef.clone(),
                    radicand: t.radicand.clone(),
                })
                .collect(),
        }
    }

    pub fn push(&mut self, s: Surd) {
        if !s.is_zero() {
            self.terms.push(s);
        }
    }

    /// Merges terms whose radicands differ by rational squares.
    pub fn simplify(&self) -> SurdSum {
        let mut out: Vec<Surd> = Vec::new();
        for t in self.terms.iter().filter(|t| !t.is_zero()) {
            match out.iter_mut().find_map(|o| t.rebase(&o.radicand).map(|c| (o, c))) {
                Some((o, c)) => o.coef += c,
                None => out.push(t.clone()),
            }
        }
        out.retain(|t| !t.is_zero());
        SurdSum { terms: out }
    }

    /// Splits into `a*sqrt(base) + b*sqrt(mu)`; fails when a second foreign radical remains.
    pub fn split_against(&self, base: &Rational) -> Result<(Rational, Option<Surd>)> {
        let mut aligned = Rational::zero();
        let mut rest: Option<Surd> = None;
        for t in self.simplify().terms {
            if let Some(c) = t.rebase(base) {
                aligned += c;
            } else if let Some(r) = rest.as_mut() {
                match t.rebase(&r.radicand) {
                    Some(c) => r.coef += c,
                    None => {
                        return Err(Error::InexactComparison(format!(
                            "threshold mixes radicals {} and {} beyond the weight radicand {}",
                            r.radicand, t.radicand, base
                        )))
                    }
                }
            } else {
                rest = Some(t);
            }
        }
        Ok((aligned, rest.filter(|r| !r.is_zero())))
    }

    /// Exact sign, for sums involving at most two distinct radicals.
    pub fn sign(&self) -> Result<Ordering> {
        let s = self.simplify();
        let Some(first) = s.terms.first() else {
            return Ok(Ordering::Equal);
        };
        let base = first.radicand.clone();
        let (a, rest) = s.split_against(&base)?;
        Ok(match rest {
            None => a.cmp(&Rational::zero()),
            Some(r) => compare_surds(&a, &base, &-r.coef, &r.radicand),
        })
    }

    pub fn sub(&self, other: &SurdSum) -> SurdSum {
        let mut terms = self.terms.clone();
        terms.extend(other.neg().terms);
        SurdSum { terms }
    }

    /// Exact comparison; falls back to `InexactComparison` for three or more radicals.
    pub fn cmp_exact(&self, other: &SurdSum) -> Result<Ordering> {
        self.sub(other).sign()
    }

    /// Parses `+`/`-` separated surd terms such as `1-sqrt(2)/3`.
    pub fn parse(input: &str) -> Result<SurdSum> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::parse(input, "empty threshold"));
        }
        let bytes = s.as_bytes();
        let mut depth = 0i32;
        let mut start = 0usize;
        let mut out = SurdSum::zero();
        for i in 0..bytes.len() {
            match bytes[i] {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > start => {
                    let prev = bytes[i - 1];
                    if !matches!(prev, b'e' | b'E' | b'*' | b'/') {
                        out.terms.push(Surd::parse(&s[start..i])?);
                        start = i;
                    }
                }
                _ => {}
            }
        }
        out.terms.push(Surd::parse(&s[start..])?);
        Ok(out)
    }
}

impl From<Surd> for SurdSum {
    fn from(s: Surd) -> Self {
        SurdSum { terms: vec![s] }
    }
}

impl From<Rational> for SurdSum {
    fn from(q: Rational) -> Self {
        SurdSum::from(Surd::rational(q))
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Expresses all surds over the radicand of the first nonzero one, if possible.
pub fn common_radicand(surds: &[Surd]) -> Option<(Vec<Rational>, Rational)> {
    let base = surds
        .iter()
        .find(|s| !s.is_zero())
        .map(|s| s.radicand.clone())
        .unwrap_or_else(Rational::one);
    let coefs = surds
        .iter()
        .map(|s| s.rebase(&base))
        .collect::<Option<Vec<_>>>()?;
    Some((coefs, base))
}

/// Orders `p*sqrt(rho)` against `q*sqrt(mu)` exactly.
pub fn compare_surds(p: &Rational, rho: &Rational, q: &Rational, mu: &Rational) -> Ordering {
    let sp = p.signum();
    let sq = q.signum();
    match (sp.is_positive(), sp.is_zero(), sq.is_positive(), sq.is_zero()) {
        (_, true, _, true) => Ordering::Equal,
        // p >= 0 >= q, not both zero
        (true, _, false, _) | (_, true, false, false) => Ordering::Greater,
        (false, false, true, _) | (false, false, _, true) => Ordering::Less,
        (_, true, true, _) => Ordering::Less,
        _ => {
            let lhs = p * p * rho;
            let rhs = q * q * mu;
            let by_square = lhs.cmp(&rhs);
            if sp.is_positive() {
                by_square
            } else {
                by_square.reverse()
            }
        }
    }
}

/// Probability `count / 2^log2_den` from enumerating sign vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dyadic {
    pub count: u128,
    pub log2_den: u32,
}

impl Dyadic {
    pub fn new(count: u128, log2_den: u32) -> Self {
        Dyadic { count, log2_den }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(
            BigInt::from(self.count),
            BigInt::one() << self.log2_den as usize,
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / 2f64.powi(self.log2_den as i32)
    }

    /// Exact `self >= p/q`.
    pub fn at_least(&self, target: &Rational) -> bool {
        self.to_rational() >= *target
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_rational().cmp(&other.to_rational()))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

pub(crate) mod rational_serde {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", q.numer(), q.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
