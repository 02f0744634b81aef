//! Absorption probabilities of the stopped sign walk, exact and simulated.

use rademacher_tails::chainwalk::{
    check_hitting_lemma, simulate_walk, walk_success_probability, OrderPolicy, WalkInstance,
};
use rademacher_tails::exact::{rational, Surd};

fn main() -> rademacher_tails::Result<()> {
    let unit = vec![Surd::rational(rational(1, 1)); 4];
    let w = WalkInstance::new(unit, Surd::parse("sqrt(2)")?, OrderPolicy::Best)?;
    println!("four unit steps, x = sqrt(2): {}", walk_success_probability(&w)?);

    let steps = [rational(1, 1), rational(3, 4), rational(1, 2), rational(1, 2), rational(1, 4)];
    for policy in [OrderPolicy::Fixed, OrderPolicy::Heuristic, OrderPolicy::Best] {
        let w = WalkInstance::from_rationals(&steps, rational(3, 2), policy)?;
        let p = walk_success_probability(&w)?;
        let sim = simulate_walk(&w, 200_000, 7)?;
        println!(
            "{:>9}: exact {p} = {:.5}, simulated {:.5} (lower bound {:.5})",
            policy.to_string(),
            p.to_f64(),
            sim.estimate,
            sim.lower_bound
        );
    }
    let w = WalkInstance::from_rationals(&steps, rational(1, 2), OrderPolicy::Best)?;
    check_hitting_lemma(&w)?.write_text(std::io::stdout())?;
    Ok(())
}
