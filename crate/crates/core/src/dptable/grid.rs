use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid over `a in [0, 1]`, `x in [-3, 3]` with step `delta = num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta_num: u64,
    pub delta_den: u64,
    pub iterations: u32,
}

/// Inputs closer than this many grid units to a grid point are read as that point.
pub const SNAP: f64 = 1e-9;

impl GridSpec {
    pub fn new(delta_num: u64, delta_den: u64, iterations: u32) -> Result<Self> {
        if delta_num == 0 || delta_den == 0 {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        let g = delta_num.gcd(&delta_den);
        let (num, den) = (delta_num / g, delta_den / g);
        if num != 1 {
            return Err(Error::InvalidParameter(format!(
                "1/delta must be an integer, got delta = {num}/{den}"
            )));
        }
        if iterations == 0 {
            return Err(Error::InvalidParameter("at least one iteration is required".into()));
        }
        if den > 20_000 {
            return Err(Error::InvalidParameter(format!("delta = 1/{den} is too fine")));
        }
        Ok(GridSpec {
            delta_num: num,
            delta_den: den,
            iterations,
        })
    }

    /// `delta = 1/400`, ten iterations.
    pub fn full() -> Self {
        GridSpec {
            delta_num: 1,
            delta_den: 400,
            iterations: 10,
        }
    }

    pub(crate) fn with_iterations(self, iterations: u32) -> Self {
        GridSpec { iterations, ..self }
    }

    /// Grid steps per unit, `1/delta`.
    pub fn steps(&self) -> usize {
        (self.delta_den / self.delta_num) as usize
    }

    pub fn delta(&self) -> f64 {
        self.delta_num as f64 / self.delta_den as f64
    }

    pub fn a_len(&self) -> usize {
        self.steps() + 1
    }

    pub fn x_len(&self) -> usize {
        6 * self.steps() + 1
    }

    pub fn cells(&self) -> usize {
        self.a_len() * self.x_len()
    }

    pub fn a_at(&self, i: usize) -> f64 {
        i as f64 / self.steps() as f64
    }

    pub fn x_at(&self, j: usize) -> f64 {
        -3.0 + j as f64 / self.steps() as f64
    }

    /// Smallest grid index whose `a` is at least the input.
    pub fn a_index_up(&self, a: f64) -> usize {
        let n = self.steps();
        index_up(a * n as f64).clamp(1, n)
    }

    /// Smallest grid index whose `x` is at least the input, or `None` for `x >= 3`.
    pub fn x_index_up(&self, x: f64) -> Option<usize> {
        if x >= 3.0 {
            return None;
        }
        if x < -3.0 {
            return Some(0);
        }
        let n = self.steps();
        let j = index_up((x + 3.0) * n as f64);
        (j < 6 * n).then_some(j)
    }
}

fn index_up(s: f64) -> usize {
    let r = s.round();
    if (s - r).abs() <= SNAP {
        r.max(0.0) as usize
    } else {
        s.ceil().max(0.0) as usize
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={}/{} iterations={}",
            self.delta_num, self.delta_den, self.iterations
        )
    }
}

/// Parses a step such as `1/400` or `0.0025`.
pub fn parse_delta(s: &str) -> Result<(u64, u64)> {
    let q = crate::exact::parse_rational(s)?;
    let num: u64 = q
        .numer()
        .try_into()
        .map_err(|_| Error::parse(s, "delta must be positive"))?;
    let den: u64 = q
        .denom()
        .try_into()
        .map_err(|_| Error::parse(s, "delta denominator too large"))?;
    Ok((num, den))
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (num, den) = parse_delta(s)?;
        GridSpec::new(num, den, GridSpec::full().iterations)
    }
}
