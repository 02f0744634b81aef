//! Counting signed sums in a short window against the binomial bound.

use rademacher_tails::chainwalk::{check_antichain_bound, check_obs_k2, check_obs_k3, f_largest_binomials, ChainCertificate};
use rademacher_tails::exact::rational;

fn main() -> rademacher_tails::Result<()> {
    for t in 1..=6 {
        let row: Vec<String> = (1..=3).map(|k| f_largest_binomials(k, t).map(|f| f.to_string())).collect::<Result<_, _>>()?;
        println!("t = {t}: f(1..3, t) = {}", row.join(", "));
    }
    let cert = ChainCertificate::new(
        vec![rational(3, 10), rational(1, 4), rational(1, 5), rational(1, 5)],
        2,
        rational(2, 5),
        vec![rational(1, 10); 3],
    )?;
    check_antichain_bound(&cert)?.write_text(std::io::stdout())?;
    check_obs_k2(&rational(1, 2), &rational(1, 5), &rational(1, 5), &vec![rational(1, 10); 2])?.write_text(std::io::stdout())?;
    check_obs_k3(&rational(2, 5), &rational(3, 10), &rational(1, 20), &rational(1, 20), &[])?.write_text(std::io::stdout())?;
    Ok(())
}
