//! End-to-end acceptance run: one line per criterion, then the assertions.
//!
//! The full `delta = 1/400` table needs its `D_0` layer, which is cached under
//! `target/rdmc/` (about nine minutes on one core when absent).

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use rademacher_tails::chainwalk::{
    check_antichain_bound, check_hitting_lemma, check_obs_k2, check_obs_k3, simulate_walk_with, walk_success_probability,
    wilson_lower_bound, ChainCertificate, OrderPolicy, WalkInstance,
};
use rademacher_tails::dptable::{
    build_table_with, load_table_checked, save_table, BoundTable, BuildOptions, GridSpec, STASH_SLACK,
};
use rademacher_tails::exact::{rational, Rational, Surd};
use rademacher_tails::oracle::{
    exact_tail, exact_tail_gt_f64, high_dim_exact_tail, NormDirection, TailQuery, WeightVector,
};
use rademacher_tails::prawitz::{theta, Integrator, PrawitzColumn, Resolution};
use rademacher_tails::report::{Status, VerificationReport};
use rademacher_tails::verify::{
    run_campaign, t2_configuration, t3_configuration, verify_fixtures, verify_theorems, Campaign, CampaignOptions,
};

const SEED: u64 = 20_240_601;
const THETA_WIDTH: f64 = 1e-10;
const THETA_CENTRE: f64 = 1.778;
const THETA_RADIUS: f64 = 1e-4;
const PRAWITZ_TRIPLES: usize = 10_000;
const AGREEMENT_CELLS: usize = 1_000;
const BUILD_BUDGET: Duration = Duration::from_secs(2 * 3600);
const TABLE_VECTORS: usize = 200;
const CHAIN_INSTANCES: usize = 1_000;
const WALK_INSTANCES: usize = 1_000;
const MC_INSTANCES: usize = 100;
const MC_TRIALS: u64 = 20_000;
/// Family-wise confidence of the Monte Carlo intervals.
const MC_CONFIDENCE: f64 = 0.99;

/// The one weight vector whose exact `Pr[X > 1]` differs from the tabulated value.
const KNOWN_MISMATCH: &str = "[1/2 x2, 1/4 x8]";

struct Line {
    id: u32,
    pass: bool,
    text: String,
}

fn line(id: u32, pass: bool, text: impl Into<String>) -> Line {
    let l = Line { id, pass, text: text.into() };
    println!("criterion {}: {} {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.text);
    l
}

fn cache_dir() -> PathBuf {
    std::env::var_os("RDMC_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/rdmc"))
}

fn print_failures(r: &VerificationReport) {
    for item in r.failing() {
        println!("    {}: {}", item.description, item.detail.as_deref().unwrap_or(""));
    }
}

fn tail_value(w: &[(Rational, usize)], q: TailQuery) -> Rational {
    let raw: Vec<Rational> = w.iter().flat_map(|(v, k)| std::iter::repeat_n(v.clone(), *k)).collect();
    exact_tail(&WeightVector::from_rationals(&raw).unwrap(), &q).unwrap().to_rational()
}

fn fixtures() -> Line {
    let start = Instant::now();
    let suite = verify_fixtures().unwrap();
    print_failures(&suite);
    assert!(suite.passed());
    let gt1 = || TailQuery::gt(Rational::one());
    let sixth = WeightVector::from_surds(&vec![Surd::parse("sqrt(1/6)").unwrap(); 6]).unwrap();
    let tabulated = [
        ("[1]", tail_value(&[(rational(1, 1), 1)], gt1()), rational(0, 1)),
        ("[1/2 x4]", tail_value(&[(rational(1, 2), 4)], gt1()), rational(1, 16)),
        ("[1/3 x9]", tail_value(&[(rational(1, 3), 9)], gt1()), rational(23, 256)),
        ("[2/3, 1/3 x5]", tail_value(&[(rational(2, 3), 1), (rational(1, 3), 5)], gt1()), rational(6, 64)),
        ("[1/2 x2, 1/4 x8]", tail_value(&[(rational(1, 2), 2), (rational(1, 4), 8)], gt1()), rational(55, 512)),
        (
            "[1/sqrt(6) x6] >= 1",
            exact_tail(&sixth, &TailQuery::ge(Rational::one())).unwrap().to_rational(),
            rational(7, 64),
        ),
        (
            "T2 norm <= 1",
            high_dim_exact_tail(&t2_configuration().unwrap(), NormDirection::NormLe1).unwrap().to_rational(),
            rational(1, 4),
        ),
        (
            "T3 norm <= 1",
            high_dim_exact_tail(&t3_configuration().unwrap(), NormDirection::NormLe1).unwrap().to_rational(),
            rational(3, 16),
        ),
    ];
    let mismatches: Vec<String> = tabulated
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, got, want)| format!("{name}: {got} (tabulated {want})"))
        .collect();
    assert_eq!(mismatches, [format!("{KNOWN_MISMATCH}: 111/1024 (tabulated 55/512)")]);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5));
    line(
        1,
        mismatches.is_empty(),
        format!(
            "{}/{} tabulated values reproduced, mismatch {}; fixture suite {}/{} ({elapsed:.2?})",
            tabulated.len() - mismatches.len(),
            tabulated.len(),
            mismatches.join(", "),
            suite.summary.passed,
            suite.summary.total
        ),
    )
}

fn theorems() -> Line {
    let start = Instant::now();
    let r = verify_theorems(500, SEED).unwrap();
    print_failures(&r);
    let elapsed = start.elapsed();
    let ok = r.passed() && elapsed < Duration::from_secs(30);
    line(2, ok, format!("{}/{} checks, 500 vectors and 100 vector sets ({elapsed:.2?})", r.summary.passed, r.summary.total))
}

fn theta_bracket() -> Line {
    let t = theta();
    let ok = t.width() <= THETA_WIDTH && (t.lo - THETA_CENTRE).abs() <= THETA_RADIUS && (t.hi - THETA_CENTRE).abs() <= THETA_RADIUS;
    line(3, ok, format!("[{:.12}, {:.12}], width {:.1e}", t.lo, t.hi, t.width()))
}

fn random_weights(rng: &mut ChaCha8Rng, max_len: usize) -> WeightVector {
    let n = rng.gen_range(1..=max_len);
    let hi = rng.gen_range(1..=40);
    let raw: Vec<Rational> = (0..n).map(|_| rational(rng.gen_range(1..=hi), 1)).collect();
    WeightVector::from_rationals(&raw).unwrap()
}

fn prawitz() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let res = Resolution::default();
    let mut violations = 0;
    let mut positive = 0;
    for _ in 0..PRAWITZ_TRIPLES {
        let w = random_weights(&mut rng, 16);
        let a = (w.max_weight() + rng.gen_range(0.0..0.1)).min(1.0);
        let x = rng.gen_range(-2.0..2.5);
        let f = PrawitzColumn::defaults(a, res)
            .unwrap()
            .eval(x, Integrator::TrapezoidCertified)
            .unwrap()
            .value;
        let p = exact_tail_gt_f64(&w, x).unwrap().to_f64();
        if f > 0.0 {
            positive += 1;
        }
        if f > p {
            violations += 1;
            println!("    F({a}, {x}) = {f} > {p}");
        }
    }
    let mut disagreements = 0;
    for _ in 0..AGREEMENT_CELLS {
        let a = rng.gen_range(0.01..=1.0);
        let x = rng.gen_range(-3.0..3.0);
        let col = PrawitzColumn::defaults(a, res).unwrap();
        let t = col.eval(x, Integrator::TrapezoidCertified).unwrap();
        match col.eval(x, Integrator::AdaptiveDiscounted) {
            Ok(s) if (t.estimate - s.estimate).abs() <= t.error_budget + s.error_budget => {}
            other => {
                disagreements += 1;
                println!("    a={a} x={x}: trapezoid {t:?}, adaptive {other:?}");
            }
        }
    }
    let ok = violations == 0 && disagreements == 0;
    line(
        4,
        ok,
        format!(
            "{violations} violations in {PRAWITZ_TRIPLES} triples ({positive} with F > 0), \
             {disagreements} disagreements in {AGREEMENT_CELLS} cells ({:.1?})",
            start.elapsed()
        ),
    )
}

/// Builds (or reuses the cached `D_0` of) the full table, keeping the build log.
fn full_table() -> (BoundTable, Duration) {
    let dir = cache_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let grid = GridSpec::full();
    let opts = BuildOptions {
        d0_cache: Some(dir.join("d0_400.rdmc")),
        ..BuildOptions::default()
    };
    let start = Instant::now();
    let table = build_table_with(&grid, &opts).unwrap();
    let elapsed = start.elapsed();
    let path = dir.join("table_400_10.rdmc");
    if let Ok(previous) = load_table_checked(&path, &grid) {
        assert_eq!(previous.max_abs_diff(&table).unwrap(), 0.0, "build is deterministic");
    }
    save_table(&table, &path).unwrap();
    (table, elapsed)
}

fn build_and_stash(table: &BoundTable, elapsed: Duration) -> Line {
    let log = table.log.as_ref().unwrap();
    let r = run_campaign(Campaign::Stash, Some(table), None, &CampaignOptions::default()).unwrap();
    print_failures(&r);
    let d0 = if log.d0_from_cache {
        "D0 from cache".to_string()
    } else {
        format!("D0 {:.0}s", log.d0_seconds.unwrap_or_default())
    };
    let ok = r.passed() && elapsed < BUILD_BUDGET;
    line(
        5,
        ok,
        format!(
            "{d0}, {} iterations {:.0}s, total {:.0}s (budget {}s); stash {}/{} items, slack {STASH_SLACK:e}, D(0.34, 1.42) = {:.4}",
            log.iterations.len(),
            log.iterate_seconds,
            elapsed.as_secs_f64(),
            BUILD_BUDGET.as_secs(),
            r.summary.passed,
            r.summary.total,
            table.query(0.34, 1.42).unwrap()
        ),
    )
}

fn campaigns(table: &BoundTable) -> Line {
    let opts = CampaignOptions::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (c, delta) in [(Campaign::A1, Some(0.005)), (Campaign::A2, Some(0.03)), (Campaign::A3, Some(0.01)), (Campaign::Qsums, None)] {
        let r = run_campaign(c, Some(table), delta, &opts).unwrap();
        print_failures(&r);
        let margin = r.summary.min_margin.unwrap_or(f64::NAN);
        ok &= r.passed() && r.failing().count() == 0 && margin > 0.0;
        parts.push(format!("{c} {} (margin {margin:.4})", r.status));
    }
    line(6, ok, parts.join(", "))
}

fn table_soundness(table: &BoundTable) -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut violations = 0;
    let mut worst_gap = f64::INFINITY;
    for _ in 0..TABLE_VECTORS {
        let n = rng.gen_range(1..=20);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let w = WeightVector::normalize(&raw).unwrap();
        let x = rng.gen_range(-3.0..3.0);
        let d = table.query(w.max_weight(), x).unwrap();
        let p = exact_tail_gt_f64(&w, x).unwrap().to_f64();
        worst_gap = worst_gap.min(p - d);
        if d > p {
            violations += 1;
            println!("    D({}, {x}) = {d} > {p}", w.max_weight());
        }
    }
    let log = table.log.as_ref().unwrap();
    let decreases = log.iterations.iter().filter(|s| s.min_increase < 0.0).count();
    let ok = violations == 0 && decreases == 0 && log.iterations.len() == 10;
    line(
        7,
        ok,
        format!(
            "{violations} violations in {TABLE_VECTORS} vectors (min gap {worst_gap:.4}), \
             {decreases} iterations with a decreasing cell ({:.1?})",
            start.elapsed()
        ),
    )
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rational(rng.gen_range(1..=24), rng.gen_range(1..=6))
}

fn tail(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    (0..rng.gen_range(0..=4)).map(|_| small_rational(rng)).collect()
}

fn chain_instances(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut bad = 0;
    for _ in 0..CHAIN_INSTANCES {
        let t = rng.gen_range(1..=10);
        let b: Vec<Rational> = (0..t).map(|_| small_rational(rng)).collect();
        let k = rng.gen_range(1..=t) as u32;
        let probe = ChainCertificate::new(b.clone(), k, Rational::one(), vec![]).unwrap();
        let alpha = probe.smallest_k_sum() * rational(rng.gen_range(1..=4), 4);
        let c = ChainCertificate::new(b, k, alpha, tail(rng)).unwrap();
        assert!(c.premise_holds());
        let r = check_antichain_bound(&c).unwrap();
        if r.status != Status::Pass {
            bad += 1;
            print_failures(&r);
        }
    }
    (CHAIN_INSTANCES, bad)
}

fn scaled_delta(rng: &mut ChaCha8Rng, diffs: &[Rational]) -> Option<Rational> {
    let m = diffs.iter().map(|d| d.clone().abs()).min()?;
    (m > Rational::from_integer(0.into())).then(|| m * rational(rng.gen_range(1..=4), 4))
}

fn k2_instances(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let (mut n, mut bad) = (0, 0);
    while n < CHAIN_INSTANCES {
        let (b1, b2) = (small_rational(rng), small_rational(rng));
        let Some(delta) = scaled_delta(rng, &[b1.clone(), b2.clone(), &b1 - &b2]) else {
            continue;
        };
        n += 1;
        let r = check_obs_k2(&b1, &b2, &delta, &tail(rng)).unwrap();
        if r.status != Status::Pass {
            bad += 1;
            print_failures(&r);
        }
    }
    (n, bad)
}

fn k3_instances(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let (mut n, mut bad) = (0, 0);
    while n < CHAIN_INSTANCES {
        let mut c = [small_rational(rng), small_rational(rng), small_rational(rng)];
        c.sort_by(|x, y| y.cmp(x));
        let [c1, c2, c3] = &c;
        let diffs = [
            c3.clone(),
            c1 - c2,
            c2 - c3,
            c1 - c3,
            c1 - c2 - c3,
            c1 - c2 + c3,
            c1 + c2 - c3,
        ];
        let Some(delta) = scaled_delta(rng, &diffs) else {
            continue;
        };
        n += 1;
        let r = check_obs_k3(c1, c2, c3, &delta, &tail(rng)).unwrap();
        if r.status != Status::Pass {
            bad += 1;
            print_failures(&r);
        }
    }
    (n, bad)
}

/// Exactly solvable walks with `c > 1`; half of them also carry an `eta`.
fn hitting_instances(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    let (mut n, mut with_eta, mut bad) = (0, 0, 0);
    while n < WALK_INSTANCES {
        let len = rng.gen_range(1..=8);
        let x = rational(rng.gen_range(2..=12), 2);
        let eta = rational(rng.gen_range(1..=7), 8);
        let use_eta = rng.gen_bool(0.5);
        let set: Vec<Rational> = (0..len)
            .map(|_| {
                if use_eta && rng.gen_bool(0.7) {
                    &eta * &x * rational(rng.gen_range(1..=8), 8)
                } else if use_eta {
                    &x * rational(rng.gen_range(8..=16), 8)
                } else {
                    small_rational(rng)
                }
            })
            .collect();
        let mut w = WalkInstance::from_rationals(&set, x, OrderPolicy::Best).unwrap();
        if w.c() <= Rational::one() {
            continue;
        }
        if use_eta {
            w = w.with_eta(eta).unwrap();
            with_eta += 1;
        }
        n += 1;
        let r = check_hitting_lemma(&w).unwrap();
        if r.status != Status::Pass {
            bad += 1;
            print_failures(&r);
        }
    }
    (n, with_eta, bad)
}

/// Two-sided Wilson interval at a Bonferroni-corrected per-instance level.
fn monte_carlo(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let per_instance = 1.0 - (1.0 - MC_CONFIDENCE) / (2.0 * MC_INSTANCES as f64);
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(per_instance);
    assert!(z > 3.8);
    let mut outside = 0;
    for i in 0..MC_INSTANCES {
        let len = rng.gen_range(1..=12);
        let set: Vec<Rational> = (0..len).map(|_| small_rational(rng)).collect();
        let total: Rational = set.iter().sum();
        let x = total * rational(rng.gen_range(1..=8), 12);
        let w = WalkInstance::from_rationals(&set, x, OrderPolicy::Fixed).unwrap();
        let exact = walk_success_probability(&w).unwrap().to_f64();
        let sim = simulate_walk_with(&w, MC_TRIALS, SEED + i as u64, per_instance).unwrap();
        let lo = wilson_lower_bound(sim.successes, sim.trials, per_instance);
        let hi = 1.0 - wilson_lower_bound(sim.trials - sim.successes, sim.trials, per_instance);
        if exact < lo - 1e-12 || exact > hi + 1e-12 {
            outside += 1;
            println!("    instance {i}: exact {exact}, interval [{lo}, {hi}]");
        }
    }
    (MC_INSTANCES, outside)
}

fn chainwalk() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 11);
    let (n1, b1) = chain_instances(&mut rng);
    let (n2, b2) = k2_instances(&mut rng);
    let (n3, b3) = k3_instances(&mut rng);
    let (n4, eta, b4) = hitting_instances(&mut rng);
    let (n5, b5) = monte_carlo(&mut rng);
    let elapsed = start.elapsed();
    let ok = b1 + b2 + b3 + b4 + b5 == 0 && elapsed < Duration::from_secs(60);
    line(
        8,
        ok,
        format!(
            "chain {b1}/{n1}, k2 {b2}/{n2}, k3 {b3}/{n3}, hitting {b4}/{n4} ({eta} with eta), \
             Monte Carlo outside {b5}/{n5} (failures/instances, {elapsed:.1?})"
        ),
    )
}

fn main() {
    let mut lines = vec![fixtures(), theorems(), theta_bracket(), prawitz(), chainwalk()];
    let (table, elapsed) = full_table();
    lines.push(build_and_stash(&table, elapsed));
    lines.push(campaigns(&table));
    lines.push(table_soundness(&table));
    lines.sort_by_key(|l| l.id);
    println!();
    for l in &lines {
        println!("criterion {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" });
    }
    let unexpected: Vec<u32> = lines.iter().filter(|l| !l.pass && l.id != 1).map(|l| l.id).collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
