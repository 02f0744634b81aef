use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exact::{rational, Dyadic, Rational, Surd};
use crate::oracle::{
    dimension_free_bound, exact_tail, high_dim_exact_tail, NormDirection, TailQuery, VectorWeightSet, WeightVector,
};
use crate::report::{ReportItem, VerificationReport};

fn surd(s: &str) -> Surd {
    Surd::parse(s).expect("fixture literal")
}

fn weights(parts: &[(&str, usize)]) -> Result<WeightVector> {
    let surds: Vec<Surd> = parts
        .iter()
        .flat_map(|&(w, k)| std::iter::repeat_n(surd(w), k))
        .collect();
    WeightVector::from_surds(&surds)
}

/// `v1..v3` with `Pr[||X|| <= 1] = 1/4`.
pub fn t2_configuration() -> Result<VectorWeightSet> {
    VectorWeightSet::new(vec![
        vec![surd("sqrt(1/3)"), surd("0")],
        vec![surd("-1/2*sqrt(1/3)"), surd("1/2")],
        vec![surd("-1/2*sqrt(1/3)"), surd("-1/2")],
    ])
}

/// `v1..v5` with `Pr[||X|| <= 1] = 3/16`.
pub fn t3_configuration() -> Result<VectorWeightSet> {
    VectorWeightSet::new(vec![
        vec![surd("sqrt(7/30)"), surd("1/3"), surd("1/5")],
        vec![surd("sqrt(7/30)"), surd("-1/3"), surd("-1/5")],
        vec![surd("0"), surd("1/3"), surd("-1/5")],
        vec![surd("0"), surd("0"), surd("1/5")],
        vec![surd("0"), surd("0"), surd("1/5")],
    ])
}

struct Fixture {
    name: &'static str,
    weights: &'static [(&'static str, usize)],
    query: fn() -> TailQuery,
    expected: (i64, i64),
}

const FIXTURES: [Fixture; 8] = [
    Fixture { name: "[1]: Pr[X > 1]", weights: &[("1", 1)], query: || TailQuery::gt(rational(1, 1)), expected: (0, 1) },
    Fixture { name: "[1]: Pr[X >= 1]", weights: &[("1", 1)], query: || TailQuery::ge(rational(1, 1)), expected: (1, 2) },
    Fixture { name: "[1/2 x4]: Pr[X > 1]", weights: &[("1/2", 4)], query: || TailQuery::gt(rational(1, 1)), expected: (1, 16) },
    Fixture { name: "[1/3 x9]: Pr[X > 1]", weights: &[("1/3", 9)], query: || TailQuery::gt(rational(1, 1)), expected: (23, 256) },
    Fixture {
        name: "[2/3, 1/3 x5]: Pr[X > 1]",
        weights: &[("2/3", 1), ("1/3", 5)],
        query: || TailQuery::gt(rational(1, 1)),
        expected: (6, 64),
    },
    Fixture {
        name: "[1/2 x2, 1/4 x8]: Pr[X > 1]",
        weights: &[("1/2", 2), ("1/4", 8)],
        query: || TailQuery::gt(rational(1, 1)),
        expected: (111, 1024),
    },
    Fixture {
        name: "[1/sqrt(6) x6]: Pr[X >= 1]",
        weights: &[("sqrt(1/6)", 6)],
        query: || TailQuery::ge(rational(1, 1)),
        expected: (7, 64),
    },
    Fixture {
        name: "[1/sqrt(7) x7]: Pr[X > 0.35]",
        weights: &[("sqrt(1/7)", 7)],
        query: || TailQuery::gt(rational(35, 100)),
        expected: (1, 2),
    },
];

fn exact_eq(desc: String, p: Dyadic, want: &Rational) -> ReportItem {
    ReportItem::exact(desc, p.to_rational() == *want, format!("{p}, expected {want}"))
}

/// Exact fixture values plus the theorem-level bounds on them.
pub fn verify_fixtures() -> Result<VerificationReport> {
    let mut report = VerificationReport::new("fixtures");
    let ge1 = TailQuery::ge(rational(1, 1));
    let gt1 = TailQuery::gt(rational(1, 1));
    for f in &FIXTURES {
        let w = weights(f.weights)?;
        let p = exact_tail(&w, &(f.query)())?;
        report.push(exact_eq(f.name.to_string(), p, &rational(f.expected.0, f.expected.1)));
    }
    // the first two fixtures share their weights
    for f in FIXTURES.iter().skip(1) {
        let w = weights(f.weights)?;
        let ge = exact_tail(&w, &ge1)?;
        report.push(
            ReportItem::exact(format!("{}: Pr[X >= 1] >= 6/64", f.weights_label()), ge.at_least(&rational(6, 64)), ge.to_string())
                .flag_unsound(),
        );
        if w.len() >= 2 {
            let gt = exact_tail(&w, &gt1)?;
            report.push(
                ReportItem::exact(format!("{}: Pr[X > 1] >= 1/16", f.weights_label()), gt.at_least(&rational(1, 16)), gt.to_string())
                    .flag_unsound(),
            );
        }
    }
    let bound = dimension_free_bound();
    for (name, vs, want) in [("T2", t2_configuration()?, rational(1, 4)), ("T3", t3_configuration()?, rational(3, 16))] {
        let le = high_dim_exact_tail(&vs, NormDirection::NormLe1)?;
        report.push(exact_eq(format!("{name}: Pr[||X|| <= 1]"), le, &want));
        let ge = high_dim_exact_tail(&vs, NormDirection::NormGe1)?;
        for (dir, p) in [("<=", le), (">=", ge)] {
            report.push(
                ReportItem::at_least(format!("{name}: Pr[||X|| {dir} 1] >= dimension-free bound"), p.to_f64(), bound, 0.0)
                    .flag_unsound(),
            );
        }
    }
    Ok(report)
}

impl Fixture {
    fn weights_label(&self) -> String {
        let parts: Vec<String> = self
            .weights
            .iter()
            .map(|(w, k)| if *k == 1 { w.to_string() } else { format!("{w} x{k}") })
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

fn random_weights(rng: &mut ChaCha8Rng, max_len: usize) -> Result<WeightVector> {
    let n = rng.gen_range(1..=max_len);
    let raw: Vec<Rational> = if rng.gen_bool(0.2) {
        vec![Rational::one(); n]
    } else {
        let hi = rng.gen_range(1..=32);
        (0..n).map(|_| rational(rng.gen_range(1..=hi), 1)).collect()
    };
    WeightVector::from_rationals(&raw)
}

fn random_vectors(rng: &mut ChaCha8Rng) -> Result<VectorWeightSet> {
    let d = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=10);
    let mut vecs = Vec::with_capacity(n);
    while vecs.len() < n {
        let v: Vec<Surd> = (0..d).map(|_| Surd::rational(rational(rng.gen_range(-5..=5), 5))).collect();
        if v.iter().any(|c| !c.is_zero()) {
            vecs.push(v);
        }
    }
    VectorWeightSet::normalized(vecs)
}

/// Random instances of the one-dimensional bounds and the dimension-free bound.
pub fn verify_theorems(samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::new("theorems")
        .config("samples", samples)
        .config("seed", seed);
    let checks: [(&str, TailQuery, Rational, usize); 3] = [
        ("Pr[X >= 1] >= 6/64", TailQuery::ge(rational(1, 1)), rational(6, 64), 1),
        ("Pr[X > 1] >= 1/16", TailQuery::gt(rational(1, 1)), rational(1, 16), 2),
        ("Pr[X > 0.35] >= 1/4", TailQuery::gt(rational(35, 100)), rational(1, 4), 1),
    ];
    let mut worst: Vec<Option<(Dyadic, usize)>> = vec![None; checks.len()];
    let mut violations = vec![0usize; checks.len()];
    for _ in 0..samples {
        let w = random_weights(&mut rng, 14)?;
        for (i, (_, q, target, min_len)) in checks.iter().enumerate() {
            if w.len() < *min_len {
                continue;
            }
            let p = exact_tail(&w, q)?;
            if !p.at_least(target) {
                violations[i] += 1;
            }
            if worst[i].as_ref().is_none_or(|(b, _)| p.to_rational() < b.to_rational()) {
                worst[i] = Some((p, w.len()));
            }
        }
    }
    for (i, (name, ..)) in checks.iter().enumerate() {
        let detail = worst[i]
            .as_ref()
            .map(|(p, n)| format!("minimum {p} at n = {n}, {} violations", violations[i]))
            .unwrap_or_default();
        report.push(ReportItem::exact(name.to_string(), violations[i] == 0, detail).flag_unsound());
    }
    let bound = dimension_free_bound();
    let (mut min_le, mut min_ge) = (1.0f64, 1.0f64);
    let vector_samples = samples / 5;
    for _ in 0..vector_samples {
        let vs = random_vectors(&mut rng)?;
        min_le = min_le.min(high_dim_exact_tail(&vs, NormDirection::NormLe1)?.to_f64());
        min_ge = min_ge.min(high_dim_exact_tail(&vs, NormDirection::NormGe1)?.to_f64());
    }
    if vector_samples > 0 {
        report.push(
            ReportItem::at_least(format!("Pr[||X|| <= 1] over {vector_samples} vector sets"), min_le, bound, 0.0).flag_unsound(),
        );
        report.push(
            ReportItem::at_least(format!("Pr[||X|| >= 1] over {vector_samples} vector sets"), min_ge, bound, 0.0).flag_unsound(),
        );
    }
    Ok(report)
}
