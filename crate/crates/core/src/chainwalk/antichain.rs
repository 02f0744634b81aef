use std::collections::BTreeMap;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::{f_largest_binomials, integerize};
use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational};
use crate::report::{ReportItem, VerificationReport};

/// Largest number of weights (chain plus tail) enumerated by the checkers.
pub const CHAIN_CAP: usize = 24;

/// Weights `b_1 >= ... >= b_t` whose `k` smallest sum to at least `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCertificate {
    #[serde(with = "rational_vec")]
    pub b: Vec<Rational>,
    pub k: u32,
    #[serde(with = "crate::exact::rational_serde")]
    pub alpha: Rational,
    #[serde(with = "rational_vec")]
    pub tail: Vec<Rational>,
}

impl ChainCertificate {
    /// Sorts `b` descending; all weights must be positive.
    pub fn new(mut b: Vec<Rational>, k: u32, alpha: Rational, tail: Vec<Rational>) -> Result<Self> {
        if b.is_empty() || k == 0 || k as usize > b.len() {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= t, got k = {k}, t = {}",
                b.len()
            )));
        }
        if !alpha.is_positive() {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if b.iter().chain(&tail).any(|w| !w.is_positive()) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        if b.len() + tail.len() > CHAIN_CAP {
            return Err(Error::CapExceeded {
                what: "chain certificate",
                n: b.len() + tail.len(),
                cap: CHAIN_CAP,
            });
        }
        b.sort_by(|x, y| y.cmp(x));
        Ok(ChainCertificate { b, k, alpha, tail })
    }

    pub fn t(&self) -> usize {
        self.b.len()
    }

    /// `b_{t-k+1} + ... + b_t`
    pub fn smallest_k_sum(&self) -> Rational {
        self.b[self.t() - self.k as usize..].iter().sum()
    }

    pub fn premise_holds(&self) -> bool {
        self.smallest_k_sum() >= self.alpha
    }
}

/// Largest `Pr[sum w_i eps_i in (c - h, c + h)]` over all centres `c`, as a count out of `2^n`.
pub fn max_window_mass(weights: &[Rational], half_width: &Rational) -> Result<u128> {
    if weights.len() > CHAIN_CAP {
        return Err(Error::CapExceeded {
            what: "window mass",
            n: weights.len(),
            cap: CHAIN_CAP,
        });
    }
    let mut all = weights.to_vec();
    all.push(half_width.clone());
    let (ints, _) = integerize(&all)?;
    let width = 2 * ints[ints.len() - 1];
    let mut sums: BTreeMap<i128, u128> = BTreeMap::new();
    sums.insert(0, 1);
    for &w in &ints[..ints.len() - 1] {
        let mut next = BTreeMap::new();
        for (&s, &c) in &sums {
            *next.entry(s + w).or_insert(0) += c;
            *next.entry(s - w).or_insert(0) += c;
        }
        sums = next;
    }
    // An open window of width 2h holds exactly the sums in some [v_i, v_i + 2h).
    let pts: Vec<(i128, u128)> = sums.into_iter().collect();
    let (mut best, mut inside, mut hi) = (0u128, 0u128, 0usize);
    for lo in 0..pts.len() {
        while hi < pts.len() && pts[hi].0 - pts[lo].0 < width {
            inside += pts[hi].1;
            hi += 1;
        }
        best = best.max(inside);
        inside -= pts[lo].1;
    }
    Ok(best)
}

fn mass_item(desc: String, count: u128, n: usize, limit: Rational) -> ReportItem {
    let achieved = Rational::new(count.into(), num_bigint::BigInt::from(1u8) << n);
    let ok = achieved <= limit;
    let mut item = ReportItem::at_most(desc, to_f64(&achieved), to_f64(&limit))
        .with_detail(format!("max window mass {achieved}, limit {limit}"));
    item.pass = ok;
    item.unsound = !ok;
    item
}

/// Enumerates every window centre and checks the `f(k,t)/2^t` bound.
pub fn check_antichain_bound(c: &ChainCertificate) -> Result<VerificationReport> {
    let t = c.t();
    let mut report = VerificationReport::new("antichain")
        .config("t", t)
        .config("k", c.k)
        .config("alpha", c.alpha.to_string())
        .config("tail", c.tail.len());
    let premise = c.premise_holds();
    report.push(ReportItem::exact(
        format!("premise: smallest {} weights sum to at least alpha", c.k),
        premise,
        format!("{} vs {}", c.smallest_k_sum(), c.alpha),
    ));
    if !premise {
        report.skip("premise violated; no conclusion claimed");
        return Ok(report);
    }
    let f = f_largest_binomials(c.k, t as u32)?;
    let limit = Rational::new(f.into(), num_bigint::BigInt::from(1u8) << t);
    let weights: Vec<Rational> = c.b.iter().chain(&c.tail).cloned().collect();
    let count = max_window_mass(&weights, &c.alpha)?;
    report.push(mass_item(
        format!("max mass of an open window of width 2*alpha <= f({}, {t})/2^{t}", c.k),
        count,
        weights.len(),
        limit,
    ));
    Ok(report)
}

fn separation_report(
    campaign: &str,
    differences: Vec<(String, Rational)>,
    extra: Vec<(String, bool)>,
    weights: Vec<Rational>,
    delta: &Rational,
    limit: Rational,
) -> Result<VerificationReport> {
    if !delta.is_positive() || weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::InvalidParameter("weights and delta must be positive".into()));
    }
    let mut report = VerificationReport::new(campaign)
        .config("delta", delta.to_string())
        .config("weights", weights.iter().map(|w| w.to_string()).collect::<Vec<_>>());
    let mut premise = true;
    for (desc, ok) in extra {
        premise &= ok;
        report.push(ReportItem::exact(desc, ok, "ordering"));
    }
    for (name, d) in differences {
        let ok = d.abs() >= *delta;
        premise &= ok;
        report.push(ReportItem::exact(format!("difference {name} >= delta"), ok, d.abs().to_string()));
    }
    if !premise {
        report.skip("premise violated; no conclusion claimed");
        return Ok(report);
    }
    let count = max_window_mass(&weights, delta)?;
    report.push(mass_item(
        format!("max mass of an open window of width 2*delta <= {limit}"),
        count,
        weights.len(),
        limit,
    ));
    Ok(report)
}

/// Two weights at least `delta` apart and at least `delta` in size.
pub fn check_obs_k2(b1: &Rational, b2: &Rational, delta: &Rational, tail: &[Rational]) -> Result<VerificationReport> {
    let diffs = vec![
        ("b1 + b2".to_string(), b1 + b2),
        ("b1".to_string(), b1.clone()),
        ("b2".to_string(), b2.clone()),
        ("|b1 - b2|".to_string(), b1 - b2),
    ];
    let mut weights = vec![b1.clone(), b2.clone()];
    weights.extend_from_slice(tail);
    separation_report("obs-k2", diffs, Vec::new(), weights, delta, Rational::new(1.into(), 4.into()))
}

/// Three weights whose signed combinations all stay at least `delta` from 0.
pub fn check_obs_k3(
    c1: &Rational,
    c2: &Rational,
    c3: &Rational,
    delta: &Rational,
    tail: &[Rational],
) -> Result<VerificationReport> {
    let d = |s: &str, v: Rational| (s.to_string(), v);
    let diffs = vec![
        d("c1", c1.clone()),
        d("c2", c2.clone()),
        d("c3", c3.clone()),
        d("c1 + c2", c1 + c2),
        d("c1 - c2", c1 - c2),
        d("c1 + c3", c1 + c3),
        d("c1 - c3", c1 - c3),
        d("c2 + c3", c2 + c3),
        d("c2 - c3", c2 - c3),
        d("c1 + c2 + c3", c1 + c2 + c3),
        d("c1 + c2 - c3", c1 + c2 - c3),
        d("c1 - c2 + c3", c1 - c2 + c3),
        d("|c1 - c2 - c3|", c1 - c2 - c3),
    ];
    let extra = vec![
        ("c1 >= c2 >= c3".to_string(), c1 >= c2 && c2 >= c3),
        ("c1 - c2 >= delta, c2 - c3 >= delta".to_string(), (c1 - c2) >= *delta && (c2 - c3) >= *delta),
    ];
    let mut weights = vec![c1.clone(), c2.clone(), c3.clone()];
    weights.extend_from_slice(tail);
    separation_report("obs-k3", diffs, extra, weights, delta, Rational::new(1.into(), 8.into()))
}

mod rational_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exact::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|q| q.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::report::Status;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rational(x, 1)).collect()
    }

    #[test]
    fn pair_of_ones() {
        let c = ChainCertificate::new(ints(&[1, 1]), 2, rational(2, 1), vec![]).unwrap();
        let r = check_antichain_bound(&c).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(max_window_mass(&ints(&[1, 1]), &rational(2, 1)).unwrap(), 3);
    }

    #[test]
    fn four_ones() {
        let c = ChainCertificate::new(ints(&[1, 1, 1, 1]), 1, rational(1, 1), vec![]).unwrap();
        assert!(check_antichain_bound(&c).unwrap().passed());
        assert_eq!(max_window_mass(&ints(&[1, 1, 1, 1]), &rational(1, 1)).unwrap(), 6);
    }

    #[test]
    fn full_chain() {
        let b = ints(&[3, 2, 1]);
        let c = ChainCertificate::new(b, 3, rational(6, 1), ints(&[5])).unwrap();
        let r = check_antichain_bound(&c).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn premise_failure_is_flagged() {
        let c = ChainCertificate::new(ints(&[1, 1]), 1, rational(2, 1), vec![]).unwrap();
        let r = check_antichain_bound(&c).unwrap();
        assert_eq!(r.status, Status::Skipped);
        assert_eq!(r.items.len(), 1);
        let d = rational(1, 10);
        let r = check_obs_k2(&d, &d, &d, &[]).unwrap();
        assert_eq!(r.status, Status::Skipped);
    }

    #[test]
    fn separation_examples() {
        let d = rational(1, 10);
        let r = check_obs_k2(&rational(2, 10), &rational(4, 10), &d, &[rational(3, 7), rational(1, 64)]).unwrap();
        assert!(r.passed());
        let r = check_obs_k3(&rational(7, 10), &rational(5, 10), &rational(3, 10), &d, &[rational(1, 3)]).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn window_is_open() {
        // sums -1, 1: an open window of width 2 holds only one of them
        assert_eq!(max_window_mass(&ints(&[1]), &rational(1, 1)).unwrap(), 1);
        assert_eq!(max_window_mass(&ints(&[1]), &rational(101, 100)).unwrap(), 2);
    }
}
