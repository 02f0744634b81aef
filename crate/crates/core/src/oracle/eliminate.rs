use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::tail::{SplitDistribution, TailMode, TailQuery, DEFAULT_ENUMERATION_CAP};
use super::weights::WeightVector;
use crate::error::{Error, Result};
use crate::exact::{to_f64, Dyadic, Rational, Surd, SurdSum};

/// One sign pattern of the leading weights.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub signs: Vec<i8>,
    /// `sum_{i<=m} a_i eps_i`
    #[serde(skip)]
    pub shift: Surd,
    pub shift_f64: f64,
}

/// Conditioning on the signs of the `m` largest weights.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub m: usize,
    pub scenarios: Vec<Scenario>,
    pub residual: WeightVector,
    /// `sigma_m^2`, exactly.
    pub sigma_sq: Rational,
}

impl Elimination {
    pub fn scenario_weight(&self) -> Dyadic {
        Dyadic::new(1, self.m as u32)
    }

    pub fn sigma(&self) -> f64 {
        to_f64(&self.sigma_sq).sqrt()
    }

    /// `t' = (t - shift) / sigma_m`
    pub fn map_threshold(&self, s: &Scenario, t: &SurdSum) -> SurdSum {
        let mut shifted = t.clone();
        shifted.push(Surd {
            coef: -s.shift.coef.clone(),
            radicand: s.shift.radicand.clone(),
        });
        SurdSum {
            terms: shifted
                .terms
                .iter()
                .map(|term| term.div_sqrt(&self.sigma_sq))
                .collect(),
        }
        .simplify()
    }

    pub fn map_threshold_f64(&self, s: &Scenario, t: f64) -> f64 {
        (t - s.shift_f64) / self.sigma()
    }

    /// Right-hand side of the total-probability identity
    /// `Pr[X >= t] = 2^-m sum Pr[X' >= t']` (and the strict analog).
    pub fn total_probability(&self, q: &TailQuery, cap: usize) -> Result<Rational> {
        if !matches!(q.mode, TailMode::Ge | TailMode::Gt) {
            return Err(Error::InvalidQuery(format!(
                "elimination identity applies to one-sided modes, not {}",
                q.mode
            )));
        }
        let dist = SplitDistribution::new(&self.residual, cap)?;
        let mut total = Rational::zero();
        for s in &self.scenarios {
            let sub = TailQuery {
                threshold: self.map_threshold(s, &q.threshold),
                mode: q.mode,
                second_threshold: None,
            };
            total += Dyadic::new(dist.count(&sub)?, dist.n()).to_rational();
        }
        Ok(total * self.scenario_weight().to_rational())
    }
}

/// Splits `w` into `2^m` scenarios over its `m` largest weights and the rescaled residual.
pub fn eliminate(w: &WeightVector, m: usize) -> Result<Elimination> {
    let n = w.len();
    if m == 0 || m >= n {
        return Err(Error::InvalidElimination { m, n });
    }
    if m > DEFAULT_ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "elimination scenarios",
            n: m,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let (residual, sigma_sq) = w.residual(m)?;
    let e = w.require_exact()?;
    let root = to_f64(&e.radicand).sqrt();
    let scenarios = (0..1u64 << m)
        .map(|mask| {
            let signs: Vec<i8> = (0..m)
                .map(|i| if mask >> (m - 1 - i) & 1 == 0 { 1 } else { -1 })
                .collect();
            let coef: Rational = signs
                .iter()
                .zip(&e.coefs)
                .map(|(&s, c)| c * Rational::from_integer(BigInt::from(s)))
                .sum();
            Scenario {
                signs,
                shift_f64: to_f64(&coef) * root,
                shift: Surd {
                    coef,
                    radicand: e.radicand.clone(),
                },
            }
        })
        .collect();
    Ok(Elimination {
        m,
        scenarios,
        residual,
        sigma_sq,
    })
}
