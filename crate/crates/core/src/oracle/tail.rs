use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::weights::WeightVector;
use crate::error::{Error, Result};
use crate::exact::{compare_surds, from_f64, Dyadic, Rational, SurdSum};

pub const DEFAULT_ENUMERATION_CAP: usize = 24;
/// Counts are `u128`, so `2^n` must fit.
pub const HARD_ENUMERATION_CAP: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// `X >= t`
    Ge,
    /// `X > t`
    Gt,
    /// `|X| >= t`
    AbsGe,
    /// `t1 < |X| < t2`
    AbsInOpen,
}

impl FromStr for TailMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ge" => Ok(TailMode::Ge),
            "gt" => Ok(TailMode::Gt),
            "abs_ge" => Ok(TailMode::AbsGe),
            "abs_in_open" => Ok(TailMode::AbsInOpen),
            _ => Err(Error::parse(s, "expected ge, gt, abs-ge or abs-in-open")),
        }
    }
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMode::Ge => "ge",
            TailMode::Gt => "gt",
            TailMode::AbsGe => "abs-ge",
            TailMode::AbsInOpen => "abs-in-open",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailQuery {
    pub threshold: SurdSum,
    pub mode: TailMode,
    pub second_threshold: Option<SurdSum>,
}

impl TailQuery {
    pub fn new(mode: TailMode, threshold: impl Into<SurdSum>) -> Result<Self> {
        if mode == TailMode::AbsInOpen {
            return Err(Error::InvalidQuery(
                "abs-in-open needs two thresholds; use TailQuery::abs_in_open".into(),
            ));
        }
        Ok(TailQuery {
            threshold: threshold.into(),
            mode,
            second_threshold: None,
        })
    }

    pub fn ge(t: impl Into<SurdSum>) -> Self {
        Self::one_sided(TailMode::Ge, t.into())
    }

    pub fn gt(t: impl Into<SurdSum>) -> Self {
        Self::one_sided(TailMode::Gt, t.into())
    }

    pub fn abs_ge(t: impl Into<SurdSum>) -> Self {
        Self::one_sided(TailMode::AbsGe, t.into())
    }

    pub fn abs_in_open(t1: impl Into<SurdSum>, t2: impl Into<SurdSum>) -> Result<Self> {
        let (t1, t2) = (t1.into(), t2.into());
        let ordered = match t1.cmp_exact(&t2) {
            Ok(o) => o == Ordering::Less,
            Err(_) => t1.to_f64() < t2.to_f64(),
        };
        if !ordered {
            return Err(Error::InvalidQuery(format!(
                "abs-in-open needs t1 < t2, got ({t1}, {t2})"
            )));
        }
        Ok(TailQuery {
            threshold: t1,
            mode: TailMode::AbsInOpen,
            second_threshold: Some(t2),
        })
    }

    /// Float thresholds are taken at their exact binary value.
    pub fn from_f64(mode: TailMode, t: f64) -> Result<Self> {
        Self::new(mode, from_f64(t)?)
    }

    fn one_sided(mode: TailMode, threshold: SurdSum) -> Self {
        TailQuery {
            threshold,
            mode,
            second_threshold: None,
        }
    }
}

/// Sorted distinct subset sums with multiplicities.
type Half = Vec<(BigInt, u128)>;

fn signed_sums(ints: &[BigInt]) -> Half {
    let mut acc: BTreeMap<BigInt, u128> = BTreeMap::new();
    acc.insert(BigInt::zero(), 1);
    for a in ints {
        let mut next = BTreeMap::new();
        for (s, c) in &acc {
            *next.entry(s + a).or_insert(0) += c;
            *next.entry(s - a).or_insert(0) += c;
        }
        acc = next;
    }
    acc.into_iter().collect()
}

/// Distribution of `X = S * sqrt(scale)` with `S` ranging over integer signed sums,
/// stored as two halves so that counting is `O(2^(n/2) log)` exact comparisons.
pub(crate) struct SplitDistribution {
    left: Half,
    right: Half,
    right_suffix: Vec<u128>,
    scale: Rational,
    n: u32,
}

impl SplitDistribution {
    pub(crate) fn new(w: &WeightVector, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_ENUMERATION_CAP);
        if w.len() > cap {
            return Err(Error::CapExceeded {
                what: "exact tail",
                n: w.len(),
                cap,
            });
        }
        let e = w.require_exact()?;
        let lcm = e
            .coefs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = e
            .coefs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let scale = &e.radicand / Rational::from_integer(&lcm * &lcm);
        let mid = ints.len() / 2;
        let left = signed_sums(&ints[..mid]);
        let right = signed_sums(&ints[mid..]);
        let mut right_suffix = vec![0u128; right.len() + 1];
        for i in (0..right.len()).rev() {
            right_suffix[i] = right_suffix[i + 1] + right[i].1;
        }
        Ok(SplitDistribution {
            left,
            right,
            right_suffix,
            scale,
            n: ints.len() as u32,
        })
    }

    fn total(&self) -> u128 {
        1u128 << self.n
    }

    /// Number of sign vectors with `X >= t` (`strict = false`) or `X > t`.
    fn count_above(&self, t: &SurdSum, strict: bool) -> Result<u128> {
        let (a, rest) = t.split_against(&self.scale)?;
        let (b, mu) = match rest {
            Some(r) => (r.coef, r.radicand),
            None => (Rational::zero(), Rational::one()),
        };
        let mut count = 0u128;
        for (l, cl) in &self.left {
            let shift = Rational::from_integer(l.clone()) - &a;
            let idx = self.right.partition_point(|(r, _)| {
                let lhs = Rational::from_integer(r.clone()) + &shift;
                let ord = compare_surds(&lhs, &self.scale, &b, &mu);
                if strict {
                    ord != Ordering::Greater
                } else {
                    ord == Ordering::Less
                }
            });
            count += cl * self.right_suffix[idx];
        }
        Ok(count)
    }

    fn ge(&self, t: &SurdSum) -> Result<u128> {
        self.count_above(t, false)
    }

    fn gt(&self, t: &SurdSum) -> Result<u128> {
        self.count_above(t, true)
    }

    /// Count of `X` in the open interval `(lo, hi)`.
    fn open(&self, lo: &SurdSum, hi: &SurdSum) -> Result<u128> {
        Ok(self.gt(lo)?.saturating_sub(self.ge(hi)?))
    }

    pub(crate) fn count(&self, q: &TailQuery) -> Result<u128> {
        let t = &q.threshold;
        match q.mode {
            TailMode::Ge => self.ge(t),
            TailMode::Gt => self.gt(t),
            TailMode::AbsGe => {
                let neg = t.neg();
                let upper = self.ge(t)?;
                let lower = self.total() - self.gt(&neg)?;
                // Overlap is the closed band [t, -t], nonempty only for t <= 0.
                let both = self.ge(t)?.saturating_sub(self.gt(&neg)?);
                Ok(upper + lower - both)
            }
            TailMode::AbsInOpen => {
                let t2 = q
                    .second_threshold
                    .as_ref()
                    .ok_or_else(|| Error::InvalidQuery("abs-in-open without t2".into()))?;
                if t.sign()? == Ordering::Less {
                    self.open(&t2.neg(), t2)
                } else {
                    Ok(self.open(t, t2)? + self.open(&t2.neg(), &t.neg())?)
                }
            }
        }
    }

    pub(crate) fn n(&self) -> u32 {
        self.n
    }
}

/// Exact `Pr` over all `2^n` sign vectors, with the default enumeration cap.
pub fn exact_tail(w: &WeightVector, q: &TailQuery) -> Result<Dyadic> {
    exact_tail_capped(w, q, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_tail_capped(w: &WeightVector, q: &TailQuery, cap: usize) -> Result<Dyadic> {
    let dist = SplitDistribution::new(w, cap)?;
    Ok(Dyadic::new(dist.count(q)?, dist.n()))
}

/// Evaluates several queries against one enumeration.
pub fn exact_tails(w: &WeightVector, qs: &[TailQuery], cap: usize) -> Result<Vec<Dyadic>> {
    let dist = SplitDistribution::new(w, cap)?;
    qs.iter()
        .map(|q| Ok(Dyadic::new(dist.count(q)?, dist.n())))
        .collect()
}

/// Convenience for float thresholds: `Pr[X > x]` taken at the exact binary value of `x`.
pub fn exact_tail_gt_f64(w: &WeightVector, x: f64) -> Result<Dyadic> {
    exact_tail(w, &TailQuery::from_f64(TailMode::Gt, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rational, Surd};

    fn w(raw: &[Rational]) -> WeightVector {
        WeightVector::from_rationals(raw).unwrap()
    }

    fn one() -> Rational {
        Rational::one()
    }

    #[test]
    fn single_weight() {
        let v = w(&[one()]);
        assert_eq!(exact_tail(&v, &TailQuery::ge(one())).unwrap().to_string(), "1/2");
        assert_eq!(exact_tail(&v, &TailQuery::gt(one())).unwrap().to_string(), "0/1");
    }

    #[test]
    fn four_halves() {
        let v = w(&vec![rational(1, 2); 4]);
        assert_eq!(exact_tail(&v, &TailQuery::gt(one())).unwrap().to_string(), "1/16");
        assert_eq!(exact_tail(&v, &TailQuery::ge(one())).unwrap().to_string(), "5/16");
        assert_eq!(exact_tail(&v, &TailQuery::abs_ge(one())).unwrap().to_string(), "5/8");
    }

    #[test]
    fn six_over_root_six() {
        let raw = vec![Surd::parse("sqrt(1/6)").unwrap(); 6];
        let v = WeightVector::from_surds(&raw).unwrap();
        let p = exact_tail(&v, &TailQuery::ge(one())).unwrap();
        assert_eq!(p.to_string(), "7/64");
    }

    #[test]
    fn irrational_threshold() {
        // seven weights 1/sqrt(7); X > 0.35 iff at least four positive signs
        let v = w(&vec![one(); 7]);
        let p = exact_tail(&v, &TailQuery::gt(rational(7, 20))).unwrap();
        assert_eq!(p.to_string(), "1/2");
        let t = SurdSum::parse("sqrt(1/7)").unwrap();
        assert_eq!(exact_tail(&v, &TailQuery::ge(t.clone())).unwrap().to_string(), "1/2");
        assert_eq!(exact_tail(&v, &TailQuery::gt(t)).unwrap().to_string(), "29/128");
    }

    #[test]
    fn abs_in_open_band() {
        let v = w(&vec![rational(1, 2); 4]);
        // X in {-2,-1,0,1,2} with mass 1,4,6,4,1 over 16; |X| in (1/2, 3/2) -> 8/16
        let q = TailQuery::abs_in_open(rational(1, 2), rational(3, 2)).unwrap();
        assert_eq!(exact_tail(&v, &q).unwrap().to_string(), "1/2");
        let q = TailQuery::abs_in_open(rational(-1, 2), rational(1, 2)).unwrap();
        assert_eq!(exact_tail(&v, &q).unwrap().to_string(), "3/8");
        assert!(TailQuery::abs_in_open(one(), one()).is_err());
    }

    #[test]
    fn abs_ge_with_nonpositive_threshold_is_everything() {
        let v = w(&[rational(3, 1), rational(1, 1)]);
        let q = TailQuery::abs_ge(rational(-1, 1));
        assert_eq!(exact_tail(&v, &q).unwrap().to_string(), "1/1");
    }

    #[test]
    fn cap_is_enforced() {
        let v = w(&vec![one(); 5]);
        assert!(matches!(
            exact_tail_capped(&v, &TailQuery::ge(one()), 4),
            Err(Error::CapExceeded { n: 5, cap: 4, .. })
        ));
    }

    #[test]
    fn mirror_required() {
        let raw = [Surd::parse("sqrt(2)").unwrap(), Surd::parse("sqrt(3)").unwrap()];
        let v = WeightVector::from_surds(&raw).unwrap();
        assert!(matches!(
            exact_tail(&v, &TailQuery::ge(one())),
            Err(Error::ExactMirrorAbsent)
        ));
    }
}
