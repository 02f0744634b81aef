//! Iterated lower-bound table `D_I(a, x)` for `Pr[X > x]` over unit-variance
//! Rademacher sums with max weight at most `a`.

mod build;
mod grid;
mod io;
mod stash;

pub use build::{build_table, build_table_with, compute_d0, iterate, BuildLog, BuildOptions, CandidateRule, IterationStats, Schedule};
pub use grid::{parse_delta, GridSpec, SNAP};
pub use io::{load_table, load_table_checked, save_table, FORMAT_VERSION, MAGIC};
pub use stash::{stash_entries, verify_stash, StashEntry, STASH_SLACK};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prawitz::Integrator;

/// How the `D_0` layer was produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub integrator: Integrator,
    /// Largest error budget subtracted from any `F` cell, when known.
    pub max_error_budget: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundTable {
    grid: GridSpec,
    /// Row-major: row `i` is `a = i delta`, column `j` is `x = -3 + j delta`.
    values: Vec<f64>,
    pub provenance: Provenance,
    pub log: Option<BuildLog>,
}

impl BoundTable {
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.a_len(),
                grid.x_len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("table cell"));
        }
        Ok(BoundTable {
            grid,
            values,
            provenance,
            log: None,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Which `D_i` this table holds.
    pub fn iteration_stamp(&self) -> u32 {
        self.grid.iterations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, ia: usize, jx: usize) -> f64 {
        self.values[ia * self.grid.x_len() + jx]
    }

    pub fn row(&self, ia: usize) -> &[f64] {
        let w = self.grid.x_len();
        &self.values[ia * w..(ia + 1) * w]
    }

    /// Lower bound on `Pr[X > x]` for every unit-variance sum with max weight at most `a`.
    ///
    /// Both arguments are rounded up to the grid; `x >= 3` gives 0 and `x < -3`
    /// reads the `x = -3` column.
    pub fn query(&self, a: f64, x: f64) -> Result<f64> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidQuery(format!("a = {a} is outside (0, 1]")));
        }
        if x.is_nan() {
            return Err(Error::InvalidQuery("x is NaN".into()));
        }
        let ia = self.grid.a_index_up(a);
        Ok(match self.grid.x_index_up(x) {
            Some(j) => self.get(ia, j),
            None => 0.0,
        })
    }

    /// Cells where `D` increases with `a` by more than `tol`.
    pub fn a_monotonicity_violations(&self, tol: f64) -> usize {
        let w = self.grid.x_len();
        (1..self.grid.a_len() - 1)
            .map(|i| {
                let (lo, hi) = (self.row(i), self.row(i + 1));
                (0..w).filter(|&j| hi[j] > lo[j] + tol).count()
            })
            .sum()
    }

    /// Largest `|self - other|` over all cells.
    pub fn max_abs_diff(&self, other: &BoundTable) -> Result<f64> {
        if self.grid.steps() != other.grid.steps() {
            return Err(Error::GridMismatch("different steps".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
