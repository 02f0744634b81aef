//! Exact tail probabilities of small Rademacher sums.
//!
//! cargo run --example exact_tails

use rademacher_tails::exact::{rational, Surd};
use rademacher_tails::oracle::{exact_tail, TailQuery, WeightVector};

fn main() -> rademacher_tails::Result<()> {
    let cases: [(&str, Vec<Surd>); 4] = [
        ("four halves", vec![Surd::rational(rational(1, 2)); 4]),
        ("nine thirds", vec![Surd::rational(rational(1, 3)); 9]),
        ("two halves, eight quarters", {
            let mut w = vec![Surd::rational(rational(1, 2)); 2];
            w.extend(vec![Surd::rational(rational(1, 4)); 8]);
            w
        }),
        ("six equal", vec![Surd::parse("sqrt(1/6)")?; 6]),
    ];
    for (name, weights) in cases {
        let w = WeightVector::from_surds(&weights)?;
        let gt = exact_tail(&w, &TailQuery::gt(rational(1, 1)))?;
        let ge = exact_tail(&w, &TailQuery::ge(rational(1, 1)))?;
        println!("{name:>28}: Pr[X > 1] = {gt:>9}  Pr[X >= 1] = {ge:>9}");
    }
    Ok(())
}
