use std::collections::HashMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::tail::{DEFAULT_ENUMERATION_CAP, HARD_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::exact::{common_radicand, from_f64, to_f64, Dyadic, Rational, Surd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormDirection {
    /// `||X||_2 >= 1`
    NormGe1,
    /// `||X||_2 <= 1`
    NormLe1,
}

impl FromStr for NormDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ge" | "norm_ge_1" => Ok(NormDirection::NormGe1),
            "le" | "norm_le_1" => Ok(NormDirection::NormLe1),
            _ => Err(Error::parse(s, "expected ge or le")),
        }
    }
}

/// Coordinate `k` of every vector is `coefs[i] * sqrt(radicand)`.
#[derive(Clone, Debug)]
struct ExactCoordinate {
    coefs: Vec<Rational>,
    radicand: Rational,
}

/// Vectors `v_1..v_n` in `R^d` with `sum ||v_i||^2 = 1`.
#[derive(Clone, Debug)]
pub struct VectorWeightSet {
    vectors: Vec<Vec<f64>>,
    dimension: usize,
    exact: Option<Vec<ExactCoordinate>>,
}

impl VectorWeightSet {
    /// Validates that the squared norms already sum to one within `1e-12`.
    pub fn new(vectors: Vec<Vec<Surd>>) -> Result<Self> {
        let set = Self::build(vectors, false)?;
        let total: f64 = set.vectors.iter().flatten().map(|x| x * x).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "squared norms sum to {total}, expected 1"
            )));
        }
        Ok(set)
    }

    /// Rescales so that the squared norms sum to one.
    pub fn normalized(vectors: Vec<Vec<Surd>>) -> Result<Self> {
        Self::build(vectors, true)
    }

    pub fn from_f64(vectors: &[Vec<f64>], normalize: bool) -> Result<Self> {
        let surds = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&x| {
                        if x.is_finite() {
                            from_f64(x).map(Surd::rational)
                        } else {
                            Err(Error::NonFinite("vector coordinate"))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(surds, normalize)
    }

    fn build(vectors: Vec<Vec<Surd>>, normalize: bool) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::EmptyWeights);
        };
        let dimension = first.len();
        if dimension == 0 || vectors.iter().any(|v| v.len() != dimension) {
            return Err(Error::InvalidParameter(
                "all vectors need the same positive dimension".into(),
            ));
        }
        let mut columns = Vec::with_capacity(dimension);
        for k in 0..dimension {
            let col: Vec<Surd> = vectors.iter().map(|v| v[k].clone()).collect();
            columns.push(common_radicand(&col).map(|(coefs, radicand)| ExactCoordinate {
                coefs,
                radicand,
            }));
        }
        let exact: Option<Vec<ExactCoordinate>> = columns.into_iter().collect();
        let floats: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| v.iter().map(Surd::to_f64).collect())
            .collect();
        let (exact, vectors) = match (exact, normalize) {
            (Some(mut ex), true) => {
                let norm: Rational = ex
                    .iter()
                    .map(|c| c.coefs.iter().map(|q| q * q).sum::<Rational>() * &c.radicand)
                    .sum();
                if norm.is_zero() {
                    return Err(Error::ZeroWeight { index: 0 });
                }
                for c in &mut ex {
                    c.radicand = &c.radicand / &norm;
                }
                let floats = (0..floats.len())
                    .map(|i| {
                        ex.iter()
                            .map(|c| to_f64(&c.coefs[i]) * to_f64(&c.radicand).sqrt())
                            .collect()
                    })
                    .collect();
                (Some(ex), floats)
            }
            (None, true) => {
                let norm = floats.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
                let scaled = floats
                    .iter()
                    .map(|v| v.iter().map(|x| x / norm).collect())
                    .collect();
                (None, scaled)
            }
            (ex, false) => (ex, floats),
        };
        Ok(VectorWeightSet {
            vectors,
            dimension,
            exact,
        })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn has_exact_mirror(&self) -> bool {
        self.exact.is_some()
    }
}

/// Exact `Pr[||X||_2 >= 1]` or `Pr[||X||_2 <= 1]` for `X = sum eps_i v_i`.
pub fn high_dim_exact_tail(vs: &VectorWeightSet, direction: NormDirection) -> Result<Dyadic> {
    high_dim_exact_tail_capped(vs, direction, DEFAULT_ENUMERATION_CAP)
}

pub fn high_dim_exact_tail_capped(
    vs: &VectorWeightSet,
    direction: NormDirection,
    cap: usize,
) -> Result<Dyadic> {
    let cap = cap.min(HARD_ENUMERATION_CAP);
    if vs.len() > cap {
        return Err(Error::CapExceeded {
            what: "high-dimensional tail",
            n: vs.len(),
            cap,
        });
    }
    let exact = vs.exact.as_ref().ok_or(Error::ExactMirrorAbsent)?;
    // Integerize each coordinate: X_k = S_k * sqrt(scale_k).
    let mut ints: Vec<Vec<BigInt>> = vec![Vec::with_capacity(exact.len()); vs.len()];
    let mut scales = Vec::with_capacity(exact.len());
    for coord in exact {
        let lcm = coord
            .coefs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        for (i, c) in coord.coefs.iter().enumerate() {
            ints[i].push((c * Rational::from_integer(lcm.clone())).to_integer());
        }
        scales.push(&coord.radicand / Rational::from_integer(&lcm * &lcm));
    }
    let mut states: HashMap<Vec<BigInt>, u128> = HashMap::new();
    states.insert(vec![BigInt::zero(); vs.dimension()], 1);
    for v in &ints {
        let mut next: HashMap<Vec<BigInt>, u128> = HashMap::with_capacity(states.len() * 2);
        for (s, c) in &states {
            let plus: Vec<BigInt> = s.iter().zip(v).map(|(a, b)| a + b).collect();
            let minus: Vec<BigInt> = s.iter().zip(v).map(|(a, b)| a - b).collect();
            *next.entry(plus).or_insert(0) += c;
            *next.entry(minus).or_insert(0) += c;
        }
        states = next;
    }
    let one = Rational::one();
    let count = states
        .iter()
        .filter(|(s, _)| {
            let norm_sq: Rational = s
                .iter()
                .zip(&scales)
                .map(|(x, sc)| Rational::from_integer(x * x) * sc)
                .sum();
            match direction {
                NormDirection::NormGe1 => norm_sq >= one,
                NormDirection::NormLe1 => norm_sq <= one,
            }
        })
        .map(|(_, c)| c)
        .sum();
    Ok(Dyadic::new(count, vs.len() as u32))
}

/// `(1 - sqrt(1 - 1/e^2)) / 2`, the dimension-free lower bound for both directions.
pub fn dimension_free_bound() -> f64 {
    (1.0 - (1.0 - (-2.0f64).exp()).sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Surd {
        Surd::parse(x).unwrap()
    }

    #[test]
    fn t2_configuration() {
        let vs = VectorWeightSet::new(vec![
            vec![s("sqrt(1/3)"), s("0")],
            vec![s("-1/2*sqrt(1/3)"), s("1/2")],
            vec![s("-1/2*sqrt(1/3)"), s("-1/2")],
        ])
        .unwrap();
        let p = high_dim_exact_tail(&vs, NormDirection::NormLe1).unwrap();
        assert_eq!(p.to_string(), "1/4");
    }

    #[test]
    fn one_dimensional_reduction() {
        let vs = VectorWeightSet::new(vec![vec![s("1/2")]; 4]).unwrap();
        let p = high_dim_exact_tail(&vs, NormDirection::NormGe1).unwrap();
        assert_eq!(p.to_string(), "5/8");
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(VectorWeightSet::new(vec![vec![s("1")], vec![s("1")]]).is_err());
        let vs = VectorWeightSet::normalized(vec![vec![s("1")], vec![s("1")]]).unwrap();
        assert!((vs.vectors()[0][0] - 0.5f64.sqrt()).abs() < 1e-15);
        // X = ±sqrt(2) or 0, each sign pattern equally likely
        let p = high_dim_exact_tail(&vs, NormDirection::NormGe1).unwrap();
        assert_eq!(p.to_string(), "1/2");
    }

    #[test]
    fn bound_constant() {
        let b = dimension_free_bound();
        assert!(b > 0.035 && b < 0.0355);
    }
}
