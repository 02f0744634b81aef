use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::integerize;
use crate::error::{Error, Result};
use crate::exact::{common_radicand, to_f64, Dyadic, Rational, Surd};
use crate::report::{ReportItem, VerificationReport};

/// Largest set handled by the exact recursion.
pub const EXACT_WALK_CAP: usize = 30;
/// Largest set searched over all orderings.
pub const BEST_ORDER_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// The order given.
    Fixed,
    /// The best of all orderings.
    Best,
    /// Descending order; a lower bound on the best ordering.
    Heuristic,
}

impl FromStr for OrderPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(OrderPolicy::Fixed),
            "best" => Ok(OrderPolicy::Best),
            "heuristic" | "descending" => Ok(OrderPolicy::Heuristic),
            _ => Err(Error::parse(s, "expected fixed, best or heuristic")),
        }
    }
}

impl fmt::Display for OrderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderPolicy::Fixed => "fixed",
            OrderPolicy::Best => "best",
            OrderPolicy::Heuristic => "heuristic",
        })
    }
}

/// Steps `d_1..d_n` (over one common radicand) and an absorption level `x > 0`.
#[derive(Clone, Debug)]
pub struct WalkInstance {
    set: Vec<Surd>,
    x: Surd,
    pub policy: OrderPolicy,
    eta: Option<Rational>,
    steps: Vec<i128>,
    /// `|W| >= x` iff the integer walk reaches this level.
    level: i128,
}

impl WalkInstance {
    pub fn new(set: Vec<Surd>, x: Surd, policy: OrderPolicy) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if let Some(index) = set.iter().position(|d| !d.coef.is_positive()) {
            return Err(Error::ZeroWeight { index });
        }
        if !x.coef.is_positive() {
            return Err(Error::InvalidParameter("x must be positive".into()));
        }
        let (coefs, radicand) = common_radicand(&set)
            .ok_or_else(|| Error::InexactComparison("steps need a common radicand".into()))?;
        let (steps, scale) = integerize(&coefs)?;
        // W = S sqrt(radicand) / scale, so |W| >= x iff S^2 >= x^2 scale^2 / radicand.
        let scale = Rational::from_integer(scale);
        let bound = x.square() * &scale * &scale / &radicand;
        let need = bound.ceil().to_integer();
        let mut level = need.sqrt();
        if &level * &level < need {
            level += BigInt::one();
        }
        let level = level
            .to_i128()
            .ok_or_else(|| Error::InvalidParameter("x is too large relative to the steps".into()))?;
        Ok(WalkInstance {
            set,
            x,
            policy,
            eta: None,
            steps,
            level,
        })
    }

    pub fn from_rationals(set: &[Rational], x: Rational, policy: OrderPolicy) -> Result<Self> {
        Self::new(
            set.iter().cloned().map(Surd::rational).collect(),
            Surd::rational(x),
            policy,
        )
    }

    pub fn with_eta(mut self, eta: Rational) -> Result<Self> {
        if !(eta.is_positive() && eta < Rational::one()) {
            return Err(Error::InvalidParameter("eta must lie in (0, 1)".into()));
        }
        self.eta = Some(eta);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn set(&self) -> &[Surd] {
        &self.set
    }

    pub fn x(&self) -> &Surd {
        &self.x
    }

    pub fn eta(&self) -> Option<&Rational> {
        self.eta.as_ref()
    }

    /// `c = sum d_i^2 / x^2`
    pub fn c(&self) -> Rational {
        self.set.iter().map(Surd::square).sum::<Rational>() / self.x.square()
    }

    /// Whether every step lies in `(0, eta x] or [x, inf)`.
    pub fn eta_premise(&self, eta: &Rational) -> bool {
        let x2 = self.x.square();
        let small = eta * eta * &x2;
        self.set.iter().all(|d| {
            let d2 = d.square();
            d2 <= small || d2 >= x2
        })
    }

    fn order(&self, policy: OrderPolicy) -> Vec<i128> {
        let mut s = self.steps.clone();
        if policy != OrderPolicy::Fixed {
            s.sort_unstable_by(|a, b| b.cmp(a));
        }
        s
    }
}

/// Absorbed mass of the walk over `steps`, out of `2^n`.
fn success_count(steps: &[i128], level: i128) -> u128 {
    let n = steps.len() as u32;
    let mut live: HashMap<i128, u128> = HashMap::new();
    live.insert(0, 1);
    let mut absorbed: u128 = 0;
    for (j, &d) in steps.iter().enumerate() {
        let mut next: HashMap<i128, u128> = HashMap::with_capacity(live.len() * 2);
        let mut hit: u128 = 0;
        for (&w, &c) in &live {
            for v in [w + d, w - d] {
                if v.abs() >= level {
                    hit += c;
                } else {
                    *next.entry(v).or_insert(0) += c;
                }
            }
        }
        absorbed += hit << (n - 1 - j as u32);
        live = next;
    }
    absorbed
}

fn next_permutation(v: &mut [i128]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn best_order(w: &WalkInstance) -> Result<(Vec<i128>, u128)> {
    if w.len() > BEST_ORDER_CAP {
        return Err(Error::CapExceeded {
            what: "best-order search",
            n: w.len(),
            cap: BEST_ORDER_CAP,
        });
    }
    let mut perm = w.steps.clone();
    perm.sort_unstable();
    let mut all = vec![perm.clone()];
    while next_permutation(&mut perm) {
        all.push(perm.clone());
    }
    Ok(all
        .into_par_iter()
        .map(|p| {
            let c = success_count(&p, w.level);
            (p, c)
        })
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .unwrap())
}

/// Exact `p(S; x)` under the instance's ordering policy.
pub fn walk_success_probability(w: &WalkInstance) -> Result<Dyadic> {
    let n = w.len();
    if n > EXACT_WALK_CAP {
        return Err(Error::CapExceeded {
            what: "exact walk",
            n,
            cap: EXACT_WALK_CAP,
        });
    }
    let count = match w.policy {
        OrderPolicy::Best => best_order(w)?.1,
        p => success_count(&w.order(p), w.level),
    };
    Ok(Dyadic::new(count, n as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub confidence: f64,
    /// One-sided Wilson lower bound at `confidence`.
    pub lower_bound: f64,
    pub seed: u64,
}

/// One-sided Wilson score lower bound.
pub fn wilson_lower_bound(successes: u64, trials: u64, confidence: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(confidence);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - spread) / (1.0 + z2 / n)).max(0.0)
}

const CHUNK: u64 = 1 << 12;

pub fn simulate_walk(w: &WalkInstance, trials: u64, seed: u64) -> Result<Simulation> {
    simulate_walk_with(w, trials, seed, 0.99)
}

/// Monte Carlo estimate of `p(S; x)`; each block of trials has its own
/// ChaCha stream, so results do not depend on the thread count.
pub fn simulate_walk_with(w: &WalkInstance, trials: u64, seed: u64, confidence: f64) -> Result<Simulation> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter("confidence must lie in (0, 1)".into()));
    }
    let steps = match w.policy {
        OrderPolicy::Best => best_order(w)?.0,
        p => w.order(p),
    };
    let level = w.level;
    let chunks = trials.div_ceil(CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut hits = 0;
            for _ in 0..count {
                let mut s: i128 = 0;
                let mut bits = 0u64;
                for (i, &d) in steps.iter().enumerate() {
                    if i % 64 == 0 {
                        bits = rng.next_u64();
                    }
                    s += if bits & 1 == 1 { d } else { -d };
                    bits >>= 1;
                    if s.abs() >= level {
                        hits += 1;
                        break;
                    }
                }
            }
            hits
        })
        .sum();
    let estimate = successes as f64 / trials as f64;
    Ok(Simulation {
        trials,
        successes,
        estimate,
        confidence,
        lower_bound: wilson_lower_bound(successes, trials, confidence),
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HittingOptions {
    /// Used when the set is too large for the exact recursion.
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions {
            trials: 1_000_000,
            seed: 0,
            confidence: 0.99,
        }
    }
}

pub fn check_hitting_lemma(w: &WalkInstance) -> Result<VerificationReport> {
    check_hitting_lemma_with(w, &HittingOptions::default())
}

/// Compares `p(S; x)` with `(c-1)/(c+3)` and, given `eta`, `(c-1)/(c+eta^2+2 eta)`.
pub fn check_hitting_lemma_with(w: &WalkInstance, opts: &HittingOptions) -> Result<VerificationReport> {
    let c = w.c();
    let mut report = VerificationReport::new("hitting")
        .config("n", w.len())
        .config("x", w.x().to_string())
        .config("c", c.to_string());
    if c <= Rational::one() {
        report.skip(format!("c = {c} <= 1, the bound is vacuous"));
        return Ok(report);
    }
    let one = Rational::one();
    let mut bounds = vec![("(c-1)/(c+3)".to_string(), (&c - &one) / (&c + Rational::from_integer(3.into())))];
    if let Some(eta) = w.eta() {
        report.set_config("eta", eta.to_string());
        let ok = w.eta_premise(eta);
        report.push(ReportItem::exact(
            "premise: steps in (0, eta x] or [x, inf)",
            ok,
            format!("eta = {eta}"),
        ));
        if ok {
            bounds.push((
                "(c-1)/(c+eta^2+2eta)".to_string(),
                (&c - &one) / (&c + eta * eta + eta * Rational::from_integer(2.into())),
            ));
        }
    }
    // Best order is exact; the others only bound it from below.
    let (p, how, exact_best) = if w.len() <= BEST_ORDER_CAP {
        let p = walk_success_probability(&WalkInstance {
            policy: OrderPolicy::Best,
            ..w.clone()
        })?;
        (p.to_rational(), format!("exact best order: {p}"), true)
    } else if w.len() <= EXACT_WALK_CAP {
        let p = walk_success_probability(&WalkInstance {
            policy: OrderPolicy::Heuristic,
            ..w.clone()
        })?;
        (p.to_rational(), format!("exact descending order: {p}"), false)
    } else {
        let sim = simulate_walk_with(
            &WalkInstance {
                policy: OrderPolicy::Heuristic,
                ..w.clone()
            },
            opts.trials,
            opts.seed,
            opts.confidence,
        )?;
        report.set_config("trials", sim.trials);
        report.set_config("seed", sim.seed);
        let lcb = Rational::from_float(sim.lower_bound).unwrap_or_else(Rational::zero);
        (
            lcb,
            format!(
                "descending order, Monte Carlo {}/{} (lower bound at {})",
                sim.successes, sim.trials, sim.confidence
            ),
            false,
        )
    };
    for (name, b) in bounds {
        let ok = p >= b;
        let mut item = ReportItem::at_least(format!("p(S; x) >= {name}"), to_f64(&p), to_f64(&b), 0.0)
            .with_detail(how.clone());
        item.pass = ok;
        if exact_best {
            item = item.flag_unsound();
        }
        report.push(item);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    fn inst(set: &[(i64, i64)], x: (i64, i64), policy: OrderPolicy) -> WalkInstance {
        let s: Vec<Rational> = set.iter().map(|&(p, q)| rational(p, q)).collect();
        WalkInstance::from_rationals(&s, rational(x.0, x.1), policy).unwrap()
    }

    #[test]
    fn basic_values() {
        let w = inst(&[(1, 2), (3, 1)], (1, 1), OrderPolicy::Best);
        assert_eq!(walk_success_probability(&w).unwrap().to_string(), "1/1");
        let w = inst(&[(1, 2)], (1, 1), OrderPolicy::Fixed);
        assert_eq!(walk_success_probability(&w).unwrap().count, 0);
        for p in [OrderPolicy::Fixed, OrderPolicy::Best, OrderPolicy::Heuristic] {
            let w = inst(&[(3, 5), (3, 5)], (1, 1), p);
            assert_eq!(walk_success_probability(&w).unwrap().to_string(), "1/2");
        }
    }

    #[test]
    fn surd_threshold() {
        // four steps of x / sqrt(2), with x = sqrt(2)
        let set = vec![Surd::rational(rational(1, 1)); 4];
        let x = Surd::parse("sqrt(2)").unwrap();
        let w = WalkInstance::new(set, x, OrderPolicy::Best).unwrap();
        assert_eq!(w.c(), rational(2, 1));
        let p = walk_success_probability(&w).unwrap();
        // absorbed after two agreeing signs, else after the next two
        assert_eq!(p.to_string(), "3/4");
        let r = check_hitting_lemma(&w).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn fixed_order_matters() {
        let a = inst(&[(1, 10), (9, 10), (1, 2)], (1, 1), OrderPolicy::Fixed);
        let b = inst(&[(9, 10), (1, 2), (1, 10)], (1, 1), OrderPolicy::Fixed);
        let best = inst(&[(1, 10), (9, 10), (1, 2)], (1, 1), OrderPolicy::Best);
        let pb = walk_success_probability(&best).unwrap();
        assert!(pb >= walk_success_probability(&a).unwrap());
        assert!(pb >= walk_success_probability(&b).unwrap());
    }

    #[test]
    fn simulation_is_reproducible() {
        let w = inst(&[(1, 3); 12], (1, 1), OrderPolicy::Fixed);
        let a = simulate_walk(&w, 20_000, 7).unwrap();
        let b = simulate_walk(&w, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let exact = walk_success_probability(&w).unwrap().to_f64();
        assert!(a.lower_bound <= exact && (a.estimate - exact).abs() < 0.02);
        let sure = inst(&[(2, 1)], (1, 1), OrderPolicy::Fixed);
        let s = simulate_walk(&sure, 1000, 1).unwrap();
        assert_eq!(s.estimate, 1.0);
        assert!(s.lower_bound > 0.99 && s.lower_bound < 1.0);
    }

    #[test]
    fn vacuous_c_is_skipped() {
        let w = inst(&[(1, 2)], (1, 1), OrderPolicy::Best);
        let r = check_hitting_lemma(&w).unwrap();
        assert_eq!(r.status, crate::report::Status::Skipped);
    }
}
