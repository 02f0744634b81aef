//! Conditioning on the largest weights and checking the total-probability identity.

use rademacher_tails::exact::{rational, Surd, SurdSum};
use rademacher_tails::oracle::{eliminate, exact_tail, TailQuery, WeightVector, DEFAULT_ENUMERATION_CAP};

fn main() -> rademacher_tails::Result<()> {
    let mut raw = vec![Surd::rational(rational(2, 3))];
    raw.extend(vec![Surd::rational(rational(1, 3)); 5]);
    let w = WeightVector::from_surds(&raw)?;
    let t = SurdSum::from(rational(1, 1));
    for m in 1..=3 {
        let e = eliminate(&w, m)?;
        println!("m = {m}, sigma^2 = {}", e.sigma_sq);
        for s in &e.scenarios {
            println!("  signs {:?} -> residual threshold {}", s.signs, e.map_threshold(s, &t));
        }
        let q = TailQuery::gt(t.clone());
        let total = e.total_probability(&q, DEFAULT_ENUMERATION_CAP)?;
        let direct = exact_tail(&w, &q)?;
        println!("  total {total}, direct {direct}");
    }
    Ok(())
}
