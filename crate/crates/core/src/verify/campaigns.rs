use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::mesh::{mesh_pairs, mesh_triples};
use super::SLACK;
use crate::dptable::BoundTable;
use crate::error::{Error, Result};
use crate::exact::{rational, to_f64, Rational, Surd};
use crate::oracle::{exact_tail, TailQuery, WeightVector};
use crate::report::{ReportItem, VerificationReport};

/// Failing mesh points listed individually in a report.
const MAX_LISTED: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CampaignOptions {
    /// Random points checked without the `+delta` shift.
    pub off_mesh_samples: usize,
    /// Random weight vectors checked with the exact oracle.
    pub crossfire: usize,
    /// Random vectors drawn by the theorem campaign.
    pub theorem_samples: usize,
    pub seed: u64,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            off_mesh_samples: 10_000,
            crossfire: 50,
            theorem_samples: 500,
            seed: 0,
        }
    }
}

fn clamp_query(t: &BoundTable, a: f64, x: f64) -> Result<f64> {
    t.query(a.min(1.0), x)
}

fn require_resolution(t: &BoundTable, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("campaign delta {delta}")));
    }
    if t.grid().delta() > delta * (1.0 + 1e-12) {
        return Err(Error::ResolutionTooCoarse(format!(
            "table step {} exceeds campaign delta {delta}",
            t.grid().delta()
        )));
    }
    Ok(())
}

/// `a3` bound of the first campaign.
pub fn a1_cap(a1: f64, a2: f64) -> f64 {
    (1.0 - a1 - a2).min(a2).clamp(0.0, 0.325)
}

/// `a3` bound of the third campaign.
pub fn a3_cap(a1: f64, a2: f64) -> f64 {
    a2.min(1.0 - a1 - a2).max(0.0)
}

/// `E_eps D(a/sigma2 + d, (1 + a1 eps1 + a2 eps2)/sigma2 + d)`; `None` if the weight bound is 0 and `d = 0`.
pub fn pair_value(t: &BoundTable, a1: f64, a2: f64, a: f64, d: f64) -> Result<Option<f64>> {
    let s2 = (1.0 - a1 * a1 - a2 * a2).sqrt();
    let arg = a / s2 + d;
    if arg <= 0.0 {
        return Ok(None);
    }
    let mut sum = 0.0;
    for e1 in [-1.0, 1.0] {
        for e2 in [-1.0, 1.0] {
            sum += clamp_query(t, arg, (1.0 + a1 * e1 + a2 * e2) / s2 + d)?;
        }
    }
    Ok(Some(sum / 4.0))
}

fn in_override_box(p: [f64; 3]) -> bool {
    p.iter().all(|a| (a - 0.5).abs() <= 0.02 + 1e-12)
}

/// `[L1, L2, L3, L4]`
pub fn l_values(a1: f64, a2: f64, a3: f64) -> [f64; 4] {
    [
        a1 + a2 + a3 - 1.0,
        1.0 - a1 - a2 + a3,
        1.0 - a1 + a2 - a3,
        1.0 + a1 - a2 - a3,
    ]
}

/// Upper bound on `a4` at a mesh point and whether the improved bound was used.
pub fn a4_cap(p: [f64; 3], half_delta: f64) -> (f64, bool) {
    let [a1, a2, a3] = p;
    let s3 = (1.0 - a1 * a1 - a2 * a2 - a3 * a3).max(0.0).sqrt();
    let base = a3.min(s3);
    let l = l_values(a1, a2, a3);
    let room = 0.35 * (1.0 - a1 * a1 - a2 * a2 - 2.0 * a3 * a3).max(0.0).sqrt();
    if in_override_box(p) || l[1] - l[0] + half_delta < room {
        (base.min(1.0 - a1 - a3).max(0.0), true)
    } else {
        (base, false)
    }
}

/// `sum_{i=2,3,4} D(a4/sigma3 + d, L_i/sigma3 + d)`
pub fn triple_value(t: &BoundTable, p: [f64; 3], a4: f64, d: f64) -> Result<Option<f64>> {
    let [a1, a2, a3] = p;
    let s3 = (1.0 - a1 * a1 - a2 * a2 - a3 * a3).sqrt();
    let arg = a4 / s3 + d;
    if arg <= 0.0 {
        return Ok(None);
    }
    let l = l_values(a1, a2, a3);
    let mut sum = 0.0;
    for li in &l[1..] {
        sum += clamp_query(t, arg, li / s3 + d)?;
    }
    Ok(Some(sum))
}

struct MeshOutcome {
    values: Vec<(Vec<f64>, f64)>,
}

fn summarize(
    report: &mut VerificationReport,
    outcome: MeshOutcome,
    target: f64,
    label: &str,
) {
    report.set_config("mesh_points", outcome.values.len());
    let worst = outcome
        .values
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned();
    let failing: Vec<&(Vec<f64>, f64)> = outcome
        .values
        .iter()
        .filter(|(_, v)| v - SLACK < target)
        .collect();
    if let Some((p, v)) = worst {
        report.push(
            ReportItem::at_least(format!("mesh minimum >= {label}"), v, target, SLACK)
                .with_detail(format!("at {}", fmt_point(&p))),
        );
    }
    if !failing.is_empty() {
        report.note(format!("{} failing mesh points", failing.len()));
    }
    for (p, v) in failing.iter().take(MAX_LISTED) {
        report.push(ReportItem::at_least(format!("point {}", fmt_point(p)), *v, target, SLACK));
    }
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn off_mesh_item(samples: Vec<Option<(Vec<f64>, f64)>>, target: f64, label: &str) -> ReportItem {
    let used: Vec<(Vec<f64>, f64)> = samples.into_iter().flatten().collect();
    let n = used.len();
    match used.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
        Some((p, v)) => ReportItem::at_least(format!("off-mesh minimum without +delta >= {label}"), v, target, SLACK)
            .with_detail(format!("{n} samples, worst at {}", fmt_point(&p))),
        None => ReportItem::exact("off-mesh samples", false, "no usable samples"),
    }
}

fn base_report(name: &str, t: &BoundTable, delta: f64, h: f64, opts: &CampaignOptions) -> VerificationReport {
    let g = t.grid();
    VerificationReport::new(name)
        .config("delta", delta)
        .config("granularity", h)
        .config("table_delta", format!("{}/{}", g.delta_num, g.delta_den))
        .config("table_iterations", g.iterations)
        .config("off_mesh_samples", opts.off_mesh_samples)
        .config("crossfire", opts.crossfire)
        .config("seed", opts.seed)
        .config("slack", SLACK)
}

struct PairCampaign {
    name: &'static str,
    lo: f64,
    hi: f64,
    target: f64,
    target_q: (i64, i64),
    label: &'static str,
    cap: fn(f64, f64) -> f64,
    strict_oracle: bool,
}

fn run_pairs(t: &BoundTable, delta: f64, c: &PairCampaign, opts: &CampaignOptions) -> Result<VerificationReport> {
    require_resolution(t, delta)?;
    let h = delta / 10.0;
    let mut report = base_report(c.name, t, delta, h, opts);
    let pts = mesh_pairs(c.lo, c.hi, h);
    let values = pts
        .par_iter()
        .map(|&[a1, a2]| {
            let v = pair_value(t, a1, a2, (c.cap)(a1, a2), delta)?.unwrap_or(0.0);
            Ok((vec![a1, a2], v))
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(&mut report, MeshOutcome { values }, c.target, c.label);

    let samples = (0..opts.off_mesh_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let a1 = rng.gen_range(c.lo..=c.hi);
            let a2 = rng.gen_range(0.0..=a1.min(1.0 - a1));
            Ok(pair_value(t, a1, a2, (c.cap)(a1, a2), 0.0)?.map(|v| (vec![a1, a2], v)))
        })
        .collect::<Result<Vec<_>>>()?;
    if opts.off_mesh_samples > 0 {
        report.push(off_mesh_item(samples, c.target, c.label));
    }
    if opts.crossfire > 0 {
        report.push(pair_crossfire(c, opts)?);
    }
    Ok(report)
}

/// `E_eps D(a/sigma2 + delta, (1 + a1 eps1 + a2 eps2)/sigma2 + delta) >= 3/32` on the mesh.
pub fn verify_a1(t: &BoundTable, delta: f64) -> Result<VerificationReport> {
    verify_a1_with(t, delta, &CampaignOptions::default())
}

pub fn verify_a1_with(t: &BoundTable, delta: f64, opts: &CampaignOptions) -> Result<VerificationReport> {
    run_pairs(
        t,
        delta,
        &PairCampaign {
            name: "a1",
            lo: 0.3,
            hi: 0.7,
            target: 3.0 / 32.0,
            target_q: (3, 32),
            label: "3/32",
            cap: a1_cap,
            strict_oracle: false,
        },
        opts,
    )
}

/// Same shape as the first campaign with `a = min(a2, 1 - a1 - a2)` and target 1/12.
pub fn verify_a3(t: &BoundTable, delta: f64) -> Result<VerificationReport> {
    verify_a3_with(t, delta, &CampaignOptions::default())
}

pub fn verify_a3_with(t: &BoundTable, delta: f64, opts: &CampaignOptions) -> Result<VerificationReport> {
    run_pairs(
        t,
        delta,
        &PairCampaign {
            name: "a3",
            lo: 0.4,
            hi: 0.6,
            target: 1.0 / 12.0,
            target_q: (1, 12),
            label: "1/12",
            cap: a3_cap,
            strict_oracle: true,
        },
        opts,
    )
}

/// `sum_{i=2..4} D(a4/sigma3 + delta, L_i/sigma3 + delta) >= 1/4` on the three-weight mesh.
pub fn verify_a2(t: &BoundTable, delta: f64) -> Result<VerificationReport> {
    verify_a2_with(t, delta, &CampaignOptions::default())
}

pub fn verify_a2_with(t: &BoundTable, delta: f64, opts: &CampaignOptions) -> Result<VerificationReport> {
    require_resolution(t, delta)?;
    let h = delta / 15.0;
    let mut report = base_report("a2", t, delta, h, opts)
        .config("a4_default", "min(a3, sigma3)")
        .config("override_box", "|a_i - 0.5| <= 0.02");
    let pts = mesh_triples(0.7, h);
    let improved = pts.iter().filter(|p| a4_cap(**p, delta / 2.0).1).count();
    report.set_config("improved_points", improved);
    let values = pts
        .par_iter()
        .map(|&p| {
            let (a4, _) = a4_cap(p, delta / 2.0);
            let v = triple_value(t, p, a4, delta)?.unwrap_or(0.0);
            Ok((p.to_vec(), v))
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(&mut report, MeshOutcome { values }, 0.25, "1/4");

    let samples = (0..opts.off_mesh_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let p = random_triple(&mut rng);
            let (a4, _) = a4_cap(p, 0.0);
            Ok(triple_value(t, p, a4, 0.0)?.map(|v| (p.to_vec(), v)))
        })
        .collect::<Result<Vec<_>>>()?;
    if opts.off_mesh_samples > 0 {
        report.push(off_mesh_item(samples, 0.25, "1/4"));
    }
    if opts.crossfire > 0 {
        report.push(triple_crossfire(opts)?);
    }
    Ok(report)
}

fn random_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let a1: f64 = rng.gen_range(1.0 / 3.0..=0.7);
        let a2 = rng.gen_range(0.0..=a1.min(1.0 - a1));
        let lo: f64 = 1.0 - a1 - a2;
        if lo <= a2 {
            let a3 = rng.gen_range(lo.max(0.0)..=a2);
            return [a1, a2, a3];
        }
    }
}

fn rand_q(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Option<Rational> {
    let (l, h) = ((lo * 1000.0).ceil() as i64, (hi * 1000.0).floor() as i64);
    (l <= h).then(|| rational(rng.gen_range(l..=h), 1000))
}

/// Normalized tail whose scaled largest weight `sigma * max / norm` is at most `cap`.
fn random_tail(rng: &mut ChaCha8Rng, max_len: usize, sigma_sq: &Rational, cap_sq: &Rational) -> Option<WeightVector> {
    let k = rng.gen_range(4..=max_len);
    let lo = rng.gen_range(1..=64);
    let raw: Vec<Rational> = (0..k).map(|_| rational(rng.gen_range(lo..=64), 64)).collect();
    let max = raw.iter().max().unwrap();
    let norm: Rational = raw.iter().map(|t| t * t).sum();
    if sigma_sq * max * max / norm > *cap_sq {
        return None;
    }
    WeightVector::from_rationals(&raw).ok()
}

/// `Pr[Y > c / sigma]` or `Pr[Y >= c / sigma]` for a normalized `Y`.
fn tail_at(y: &WeightVector, c: Rational, sigma_sq: &Rational, strict: bool) -> Result<Rational> {
    let th = Surd::new(c, Rational::one() / sigma_sq)?;
    let q = if strict { TailQuery::gt(th) } else { TailQuery::ge(th) };
    Ok(exact_tail(y, &q)?.to_rational())
}

const ATTEMPTS: usize = 200_000;

fn pair_crossfire(c: &PairCampaign, opts: &CampaignOptions) -> Result<ReportItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9);
    let target = rational(c.target_q.0, c.target_q.1);
    let (mut checked, mut worst): (usize, Option<Rational>) = (0, None);
    for _ in 0..ATTEMPTS {
        if checked == opts.crossfire {
            break;
        }
        let Some(a1) = rand_q(&mut rng, c.lo, c.hi) else { continue };
        let a1f = to_f64(&a1);
        let Some(a2) = rand_q(&mut rng, 0.001, a1f.min(1.0 - a1f)) else { continue };
        let cap = a2.clone().min(Rational::one() - &a1 - &a2);
        let cap = if c.strict_oracle { cap } else { cap.min(rational(13, 40)) };
        if cap <= Rational::zero() {
            continue;
        }
        let s2 = Rational::one() - &a1 * &a1 - &a2 * &a2;
        let Some(y) = random_tail(&mut rng, 12, &s2, &(&cap * &cap)) else { continue };
        let mut p = Rational::zero();
        for e1 in [-1i64, 1] {
            for e2 in [-1i64, 1] {
                let shift = Rational::one() - &a1 * Rational::from_integer(e1.into()) - &a2 * Rational::from_integer(e2.into());
                p += tail_at(&y, shift, &s2, c.strict_oracle)?;
            }
        }
        p /= Rational::from_integer(4.into());
        worst = Some(match worst {
            Some(w) if w <= p => w,
            _ => p,
        });
        checked += 1;
    }
    Ok(crossfire_item(checked, worst, &target, if c.strict_oracle { "Pr[X > 1]" } else { "Pr[X >= 1]" }))
}

fn triple_crossfire(opts: &CampaignOptions) -> Result<ReportItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7f4a_7c15);
    let (mut checked, mut worst): (usize, Option<Rational>) = (0, None);
    for _ in 0..ATTEMPTS {
        if checked == opts.crossfire {
            break;
        }
        let Some(a1) = rand_q(&mut rng, 0.334, 0.7) else { continue };
        let a1f = to_f64(&a1);
        let Some(a2) = rand_q(&mut rng, (1.0 - a1f) / 2.0, a1f.min(1.0 - a1f)) else { continue };
        let a2f = to_f64(&a2);
        let Some(a3) = rand_q(&mut rng, (1.0 - a1f - a2f).max(0.001), a2f) else { continue };
        let one = Rational::one();
        let s3 = &one - &a1 * &a1 - &a2 * &a2 - &a3 * &a3;
        let p = [a1f, a2f, to_f64(&a3)];
        let (_, improved) = a4_cap(p, 0.0);
        let mut cap_sq = (&a3 * &a3).min(s3.clone());
        if improved {
            let alt = &one - &a1 - &a3;
            cap_sq = cap_sq.min(&alt * &alt);
            if alt <= Rational::zero() {
                continue;
            }
        }
        let Some(y) = random_tail(&mut rng, 11, &s3, &cap_sq) else { continue };
        let ls = [
            &one - &a1 - &a2 + &a3,
            &one - &a1 + &a2 - &a3,
            &one + &a1 - &a2 - &a3,
        ];
        let mut total = Rational::zero();
        for l in ls {
            total += tail_at(&y, l, &s3, true)?;
        }
        worst = Some(match worst {
            Some(w) if w <= total => w,
            _ => total,
        });
        checked += 1;
    }
    Ok(crossfire_item(checked, worst, &rational(1, 4), "sum Pr[Y > L_i]"))
}

fn crossfire_item(checked: usize, worst: Option<Rational>, target: &Rational, what: &str) -> ReportItem {
    match worst {
        Some(w) => {
            let ok = w >= *target;
            let mut item = ReportItem::at_least(
                format!("exact oracle on random vectors: {what} >= {target}"),
                to_f64(&w),
                to_f64(target),
                0.0,
            )
            .with_detail(format!("{checked} vectors, minimum {w}"));
            item.pass = ok;
            item.flag_unsound()
        }
        None => ReportItem::exact("exact oracle on random vectors", false, "no instances generated"),
    }
}
