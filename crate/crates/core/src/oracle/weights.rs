use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{common_radicand, from_f64, to_f64, Rational, Surd};

/// Exact form of a normalized weight vector: `a_i = coefs[i] * sqrt(radicand)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactWeights {
    pub coefs: Vec<Rational>,
    pub radicand: Rational,
}

impl ExactWeights {
    pub fn weight(&self, i: usize) -> Surd {
        Surd {
            coef: self.coefs[i].clone(),
            radicand: self.radicand.clone(),
        }
    }

    /// `1 - sum_{i<j} a_i^2`, exactly.
    pub fn sigma_sq(&self, j: usize) -> Rational {
        let head: Rational = self.coefs[..j].iter().map(|c| c * c).sum();
        Rational::one() - head * &self.radicand
    }
}

/// Normalized Rademacher weights sorted in descending order.
#[derive(Clone, Debug, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    #[serde(skip)]
    exact: Option<ExactWeights>,
    variance: f64,
    partial_sigmas: Vec<f64>,
}

impl WeightVector {
    /// Normalizes float weights. The floats are exact binary rationals, so the
    /// exact mirror is always available on this path.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        check_nonempty(raw.len())?;
        let mut surds = Vec::with_capacity(raw.len());
        for (index, &x) in raw.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            surds.push(Surd::rational(from_f64(x)?));
        }
        Self::from_surds(&surds)
    }

    pub fn from_rationals(raw: &[Rational]) -> Result<Self> {
        let surds: Vec<Surd> = raw.iter().cloned().map(Surd::rational).collect();
        Self::from_surds(&surds)
    }

    /// Normalizes surd inputs. If no common radicand exists the vector keeps
    /// only its float form and exact queries report `ExactMirrorAbsent`.
    pub fn from_surds(raw: &[Surd]) -> Result<Self> {
        check_nonempty(raw.len())?;
        if let Some(index) = raw.iter().position(Surd::is_zero) {
            return Err(Error::ZeroWeight { index });
        }
        match common_radicand(raw) {
            Some((coefs, radicand)) => {
                let norm: Rational = coefs.iter().map(|c| c * c).sum::<Rational>() * &radicand;
                let mut coefs: Vec<Rational> = coefs.into_iter().map(|c| c.abs()).collect();
                coefs.sort_by(|a, b| b.cmp(a));
                Ok(Self::from_exact(ExactWeights {
                    coefs,
                    radicand: radicand / norm,
                }))
            }
            None => {
                let floats: Vec<f64> = raw.iter().map(Surd::to_f64).collect();
                Self::from_floats_only(&floats)
            }
        }
    }

    /// Float-only vector with no exact mirror.
    pub fn from_floats_only(raw: &[f64]) -> Result<Self> {
        check_nonempty(raw.len())?;
        for (index, &x) in raw.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            if x == 0.0 {
                return Err(Error::ZeroWeight { index });
            }
        }
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut weights: Vec<f64> = raw.iter().map(|x| x.abs() / norm).collect();
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::assemble(weights, None))
    }

    fn from_exact(exact: ExactWeights) -> Self {
        let root = to_f64(&exact.radicand).sqrt();
        let weights = exact.coefs.iter().map(|c| to_f64(c) * root).collect();
        Self::assemble(weights, Some(exact))
    }

    fn assemble(weights: Vec<f64>, exact: Option<ExactWeights>) -> Self {
        let partial_sigmas = match &exact {
            Some(e) => (0..=weights.len())
                .map(|j| to_f64(&e.sigma_sq(j)).max(0.0).sqrt())
                .collect(),
            None => {
                let mut acc = 0.0;
                let mut out = vec![1.0];
                for w in &weights {
                    acc += w * w;
                    out.push((1.0 - acc).max(0.0).sqrt());
                }
                out
            }
        };
        let variance = weights.iter().map(|w| w * w).sum();
        WeightVector {
            weights,
            exact,
            variance,
            partial_sigmas,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `sigma_j` for `j = 0..=n`; `sigma_0 = 1`.
    pub fn partial_sigmas(&self) -> &[f64] {
        &self.partial_sigmas
    }

    pub fn sigma(&self, j: usize) -> f64 {
        self.partial_sigmas[j]
    }

    pub fn exact(&self) -> Option<&ExactWeights> {
        self.exact.as_ref()
    }

    pub fn require_exact(&self) -> Result<&ExactWeights> {
        self.exact.as_ref().ok_or(Error::ExactMirrorAbsent)
    }

    /// Residual vector after removing the first `m` weights and rescaling to unit variance.
    pub(crate) fn residual(&self, m: usize) -> Result<(WeightVector, Rational)> {
        let n = self.len();
        let e = self.require_exact()?;
        let s2 = e.sigma_sq(m);
        if m == 0 || m >= n || !s2.is_positive() {
            return Err(Error::InvalidElimination { m, n });
        }
        let rest = ExactWeights {
            coefs: e.coefs[m..].to_vec(),
            radicand: &e.radicand / &s2,
        };
        Ok((Self::from_exact(rest), s2))
    }
}

fn check_nonempty(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyWeights)
    } else {
        Ok(())
    }
}

pub fn normalize_weights(raw: &[f64]) -> Result<WeightVector> {
    WeightVector::normalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    #[test]
    fn single_weight() {
        let w = normalize_weights(&[1.0]).unwrap();
        assert_eq!(w.weights(), &[1.0]);
        assert_eq!(w.variance(), 1.0);
        assert_eq!(w.sigma(1), 0.0);
    }

    #[test]
    fn three_four_five() {
        let w = normalize_weights(&[3.0, -4.0]).unwrap();
        assert!((w.weights()[0] - 0.8).abs() < 1e-15);
        assert!((w.weights()[1] - 0.6).abs() < 1e-15);
        let e = w.exact().unwrap();
        assert_eq!(e.coefs, vec![rational(4, 1), rational(3, 1)]);
        assert_eq!(e.radicand, rational(1, 25));
    }

    #[test]
    fn nine_equal_thirds() {
        let raw = vec![rational(1, 3); 9];
        let w = WeightVector::from_rationals(&raw).unwrap();
        assert!(w.weights().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!((w.sigma(3) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(w.exact().unwrap().sigma_sq(3), rational(2, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(normalize_weights(&[]), Err(Error::EmptyWeights)));
        assert!(matches!(
            normalize_weights(&[1.0, 0.0]),
            Err(Error::ZeroWeight { index: 1 })
        ));
        assert!(matches!(
            normalize_weights(&[f64::NAN]),
            Err(Error::NonFiniteWeight { index: 0 })
        ));
    }

    #[test]
    fn mixed_radicands_drop_the_mirror() {
        let raw = [
            Surd::parse("sqrt(2)").unwrap(),
            Surd::parse("sqrt(3)").unwrap(),
        ];
        let w = WeightVector::from_surds(&raw).unwrap();
        assert!(w.exact().is_none());
        assert!((w.variance() - 1.0).abs() < 1e-12);
        assert!(w.weights()[0] > w.weights()[1]);
    }
}
