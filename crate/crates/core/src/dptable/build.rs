use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_table_checked, save_table, BoundTable, GridSpec, Provenance};
use crate::error::{Error, Result};
use crate::prawitz::{Integrator, PrawitzColumn, Resolution};

/// Upward nudge applied to recursion arguments before rounding them to the grid.
const NUDGE: f64 = 1e-12;
/// Index standing for `x >= 3`, where the bound is 0.
const ZERO: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub integrator: Integrator,
    pub resolution: Resolution,
    /// Read `D_0` from here if present, else compute and write it.
    pub d0_cache: Option<PathBuf>,
    pub candidates: CandidateRule,
    pub schedule: Schedule,
    pub progress: bool,
}

/// Order in which cells of one iteration are updated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Rows updated in place from `a = 1` down, reading already improved rows.
    #[default]
    InPlace,
    /// Every cell reads the previous iterate only.
    Jacobi,
}

/// Which values of the eliminated weight `a` enter the infimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateRule {
    /// Every `a` in `(0, a_1]`, split into `per_step` intervals per grid step;
    /// children are bounded by their sup over each interval.
    Intervals { per_step: usize },
    /// Only grid multiples `a = k delta`, children rounded up.
    GridPoints,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            integrator: Integrator::TrapezoidCertified,
            resolution: Resolution::default(),
            d0_cache: None,
            candidates: CandidateRule::default(),
            schedule: Schedule::default(),
            progress: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: u32,
    pub min_increase: f64,
    pub max_increase: f64,
    pub cells_improved: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildLog {
    pub d0_seconds: Option<f64>,
    pub d0_from_cache: bool,
    /// Cells where `F` could not be evaluated and only the trivial floor was used.
    pub d0_fallbacks: usize,
    pub iterate_seconds: f64,
    pub iterations: Vec<IterationStats>,
    /// Max-norm change of one further iteration.
    pub fixed_point_delta: f64,
    pub a_monotonicity_violations: usize,
    pub candidates: CandidateRule,
    pub schedule: Schedule,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "in_place" => Ok(Schedule::InPlace),
            "jacobi" => Ok(Schedule::Jacobi),
            _ => Err(Error::parse(s, "expected in-place or jacobi")),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::InPlace => "in-place",
            Schedule::Jacobi => "jacobi",
        })
    }
}

impl Default for CandidateRule {
    fn default() -> Self {
        CandidateRule::Intervals { per_step: 4 }
    }
}

/// `intervals`, `intervals:8` or `grid-points`.
impl FromStr for CandidateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        let (name, arg) = norm.split_once(':').map_or((norm.as_str(), None), |(a, b)| (a, Some(b)));
        match (name, arg) {
            ("intervals", None) => Ok(CandidateRule::default()),
            ("intervals", Some(k)) => match k.parse::<usize>() {
                Ok(per_step) if (1..=64).contains(&per_step) => Ok(CandidateRule::Intervals { per_step }),
                _ => Err(Error::parse(s, "intervals per step must be in 1..=64")),
            },
            ("grid_points", None) => Ok(CandidateRule::GridPoints),
            _ => Err(Error::parse(s, "expected intervals[:K] or grid-points")),
        }
    }
}

impl fmt::Display for CandidateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateRule::Intervals { per_step } => write!(f, "intervals:{per_step}"),
            CandidateRule::GridPoints => f.write_str("grid-points"),
        }
    }
}

pub fn build_table(grid: &GridSpec) -> Result<BoundTable> {
    build_table_with(grid, &BuildOptions::default())
}

pub fn build_table_with(grid: &GridSpec, opts: &BuildOptions) -> Result<BoundTable> {
    let d0_grid = grid.with_iterations(0);
    let mut from_cache = false;
    let d0 = match &opts.d0_cache {
        Some(path) if path.exists() => {
            let t = load_table_checked(path, &d0_grid)?;
            if t.provenance.integrator != opts.integrator {
                return Err(Error::GridMismatch(format!(
                    "cached D0 uses the {} integrator, {} requested",
                    t.provenance.integrator, opts.integrator
                )));
            }
            from_cache = true;
            t
        }
        cache => {
            let t = compute_d0(grid, opts)?;
            if let Some(path) = cache {
                save_table(&t, path)?;
            }
            t
        }
    };
    let mut table = iterate(&d0, grid.iterations, opts.candidates, opts.schedule)?;
    if let (Some(log), Some(d0_log)) = (table.log.as_mut(), d0.log.as_ref()) {
        log.d0_seconds = d0_log.d0_seconds;
        log.d0_fallbacks = d0_log.d0_fallbacks;
    }
    if let Some(log) = table.log.as_mut() {
        log.d0_from_cache = from_cache;
    }
    Ok(table)
}

/// `D_0 = max(F, 1{x<0}/2)` on every cell, repaired to be non-increasing in `x`.
pub fn compute_d0(grid: &GridSpec, opts: &BuildOptions) -> Result<BoundTable> {
    let start = Instant::now();
    let n = grid.steps();
    let w = grid.x_len();
    let done = AtomicUsize::new(0);
    let rows: Vec<(Vec<f64>, f64, usize)> = (1..=n)
        .into_par_iter()
        .map(|i| {
            let column = PrawitzColumn::defaults(grid.a_at(i), opts.resolution)?;
            let mut row = vec![0.0; w];
            let mut budget: f64 = 0.0;
            let mut fallbacks = 0;
            for (j, cell) in row.iter_mut().enumerate().take(6 * n) {
                let floor = if j < 3 * n { 0.5 } else { 0.0 };
                let f = match column.eval(grid.x_at(j), opts.integrator) {
                    Ok(e) => {
                        budget = budget.max(e.error_budget);
                        e.value
                    }
                    Err(_) => {
                        fallbacks += 1;
                        0.0
                    }
                };
                *cell = f.max(floor).clamp(0.0, 1.0);
            }
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if opts.progress && (k.is_multiple_of((n / 20).max(1)) || k == n) {
                eprintln!("D0: {k}/{n} columns, {:.0}s", start.elapsed().as_secs_f64());
            }
            Ok((row, budget, fallbacks))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(grid.cells());
    let mut max_budget: f64 = 0.0;
    let mut fallbacks = 0;
    values.extend_from_slice(&rows[0].0);
    for (row, b, f) in rows {
        values.extend_from_slice(&row);
        max_budget = max_budget.max(b);
        fallbacks += f;
    }
    for row in values.chunks_mut(w) {
        repair(row);
    }
    let mut t = BoundTable::from_parts(
        grid.with_iterations(0),
        values,
        Provenance {
            integrator: opts.integrator,
            max_error_budget: Some(max_budget),
        },
    )?;
    t.log = Some(BuildLog {
        d0_seconds: Some(start.elapsed().as_secs_f64()),
        d0_fallbacks: fallbacks,
        ..BuildLog::default()
    });
    Ok(t)
}

/// Applies the recursion `iterations` times to `d0`, plus one extra step
/// that is only measured.
pub fn iterate(
    d0: &BoundTable,
    iterations: u32,
    rule: CandidateRule,
    schedule: Schedule,
) -> Result<BoundTable> {
    let start = Instant::now();
    let grid = d0.grid().with_iterations(iterations);
    let cand = Candidates::new(&grid, rule);
    let mut values = d0.values().to_vec();
    let mut stats = Vec::with_capacity(iterations as usize);
    for it in 1..=iterations {
        let next = step(&values, &cand, &grid, schedule);
        stats.push(compare(it, &values, &next));
        values = next;
    }
    let extra = step(&values, &cand, &grid, schedule);
    let fixed_point_delta = values
        .iter()
        .zip(&extra)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut t = BoundTable::from_parts(grid, values, d0.provenance)?;
    let log = BuildLog {
        iterate_seconds: start.elapsed().as_secs_f64(),
        iterations: stats,
        fixed_point_delta,
        a_monotonicity_violations: t.a_monotonicity_violations(1e-12),
        candidates: rule,
        schedule,
        ..BuildLog::default()
    };
    t.log = Some(log);
    Ok(t)
}

fn compare(iteration: u32, old: &[f64], new: &[f64]) -> IterationStats {
    let mut s = IterationStats {
        iteration,
        min_increase: f64::INFINITY,
        max_increase: 0.0,
        cells_improved: 0,
    };
    for (o, n) in old.iter().zip(new) {
        let d = n - o;
        s.min_increase = s.min_increase.min(d);
        s.max_increase = s.max_increase.max(d);
        if d > 0.0 {
            s.cells_improved += 1;
        }
    }
    s
}

/// Replaces each cell by the max over itself and all cells at larger `x`.
fn repair(row: &mut [f64]) {
    for j in (0..row.len() - 1).rev() {
        if row[j + 1] > row[j] {
            row[j] = row[j + 1];
        }
    }
}

/// Rounded-up grid arguments of the recursion, shared by all iterations.
///
/// Candidate `c` in `1..=per_step * n` stands for the eliminated weight `a` in
/// `((c-1) / (per_step n), c / (per_step n)]` (or exactly its right end for grid points).
struct Candidates {
    per_step: usize,
    /// Row of `a/sqrt(1-a^2)`, index `c-1`.
    a_row: Vec<usize>,
    /// `x` indices of the two children per `(c, j)`.
    minus: Vec<u32>,
    plus: Vec<u32>,
    /// The `a = 1` candidate uses only its exact value.
    exact_last: bool,
}

fn r_minus(x: f64, a: f64) -> f64 {
    (x - a) / (1.0 - a * a).sqrt()
}

fn r_plus(x: f64, a: f64) -> f64 {
    (x + a) / (1.0 - a * a).sqrt()
}

fn up_index(v: f64, n: usize) -> u32 {
    let s = (v + NUDGE + 3.0) * n as f64;
    if s >= (6 * n) as f64 {
        ZERO
    } else if s <= 0.0 {
        0
    } else {
        s.ceil() as u32
    }
}

fn row_up(a: f64, n: usize) -> usize {
    if a >= 1.0 {
        return n;
    }
    let big = a / (1.0 - a * a).sqrt();
    if big >= 1.0 {
        n
    } else {
        (((big + NUDGE) * n as f64).ceil() as usize).clamp(1, n)
    }
}

impl Candidates {
    fn new(grid: &GridSpec, rule: CandidateRule) -> Self {
        match rule {
            CandidateRule::Intervals { per_step } => Self::intervals(grid, per_step.max(1)),
            CandidateRule::GridPoints => Self::grid_points(grid),
        }
    }

    fn len(&self, n: usize) -> usize {
        self.per_step * n
    }

    fn intervals(grid: &GridSpec, per_step: usize) -> Self {
        let n = grid.steps();
        let w = grid.x_len();
        let big_k = per_step * n;
        let kf = big_k as f64;
        let a_row = (1..=big_k).map(|c| row_up(c as f64 / kf, n)).collect();
        let mut minus = vec![ZERO; big_k * w];
        let mut plus = vec![ZERO; big_k * w];
        let (neg_one, one) = (2 * n, 4 * n);
        minus
            .par_chunks_mut(w)
            .zip(plus.par_chunks_mut(w))
            .enumerate()
            .for_each(|(c0, (minus, plus))| {
                let c = c0 + 1;
                let (a0, a1) = ((c - 1) as f64 / kf, c as f64 / kf);
                let (first, last) = (c == 1, c == big_k);
                for j in 0..6 * n {
                    let x = grid.x_at(j);
                    // x - a over a: decreasing for x <= 1, else minimal at a = 1/x.
                    let mut m = if first { j as u32 } else { up_index(r_minus(x, a0), n) };
                    if j > one {
                        m = m.max(if last { ZERO } else { up_index(r_minus(x, a1), n) });
                    }
                    // x + a over a: increasing for x >= -1, else maximal at a = -1/x.
                    let p = if j >= neg_one {
                        if !last {
                            up_index(r_plus(x, a1), n)
                        } else if j > neg_one {
                            ZERO
                        } else {
                            (3 * n) as u32
                        }
                    } else {
                        let mut p = if first { j as u32 } else { up_index(r_plus(x, a0), n) };
                        if !last {
                            p = p.max(up_index(r_plus(x, a1), n));
                        }
                        let star = -1.0 / x;
                        if star >= a0 && star <= a1 {
                            p = p.max(up_index(-(x * x - 1.0).sqrt(), n));
                        }
                        p
                    };
                    minus[j] = m;
                    plus[j] = p;
                }
            });
        Candidates { per_step, a_row, minus, plus, exact_last: false }
    }

    fn grid_points(grid: &GridSpec) -> Self {
        let n = grid.steps();
        let w = grid.x_len();
        let nf = n as f64;
        let a_row = (1..=n).map(|k| row_up(k as f64 / nf, n)).collect();
        let mut minus = vec![ZERO; n * w];
        let mut plus = vec![ZERO; n * w];
        for k in 1..n {
            let a = k as f64 / nf;
            for j in 0..6 * n {
                let x = grid.x_at(j);
                minus[(k - 1) * w + j] = up_index(r_minus(x, a), n);
                plus[(k - 1) * w + j] = up_index(r_plus(x, a), n);
            }
        }
        Candidates { per_step: 1, a_row, minus, plus, exact_last: true }
    }

    /// `(D(A, x-) + D(A, x+)) / 2` for candidate `c` at column `j`, read from `table`.
    fn child(&self, table: &[f64], n: usize, c: usize, j: usize) -> f64 {
        let w = 6 * n + 1;
        let row = self.a_row[c - 1];
        let base = (c - 1) * w;
        let at = |idx: u32| if idx == ZERO { 0.0 } else { table[row * w + idx as usize] };
        let v = 0.5 * (at(self.minus[base + j]) + at(self.plus[base + j]));
        if c < self.len(n) {
            return v;
        }
        // a = 1: a single sign
        let exact = 0.5 * ((j < 4 * n) as u8 as f64 + (j < 2 * n) as u8 as f64);
        if self.exact_last {
            exact
        } else {
            v.min(exact)
        }
    }
}

fn step(prev: &[f64], cand: &Candidates, grid: &GridSpec, schedule: Schedule) -> Vec<f64> {
    let n = grid.steps();
    let w = grid.x_len();
    let per = cand.per_step;
    let mut next = prev.to_vec();
    match schedule {
        Schedule::InPlace => {
            for m in (1..=n).rev() {
                let best: Vec<f64> = (0..6 * n)
                    .into_par_iter()
                    .map(|j| (1..=per * m).map(|c| cand.child(&next, n, c, j)).fold(f64::INFINITY, f64::min))
                    .collect();
                let row = &mut next[m * w..(m + 1) * w];
                for (c, b) in row.iter_mut().zip(best) {
                    *c = c.max(b);
                }
                repair(row);
            }
        }
        Schedule::Jacobi => {
            // Minimum over the candidates of each grid step, then a prefix minimum over steps.
            let groups: Vec<Vec<f64>> = (1..=n)
                .into_par_iter()
                .map(|k| {
                    (0..w)
                        .map(|j| {
                            if j == 6 * n {
                                return 0.0;
                            }
                            (per * (k - 1) + 1..=per * k)
                                .map(|c| cand.child(prev, n, c, j))
                                .fold(f64::INFINITY, f64::min)
                        })
                        .collect()
                })
                .collect();
            let mut running = vec![f64::INFINITY; w];
            for m in 1..=n {
                let row = &mut next[m * w..(m + 1) * w];
                for j in 0..w {
                    running[j] = running[j].min(groups[m - 1][j]);
                    row[j] = row[j].max(running[j]);
                }
                repair(row);
            }
        }
    }
    let (first, rest) = next.split_at_mut(w);
    first.copy_from_slice(&rest[..w]);
    next
}
