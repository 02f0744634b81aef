//! The characteristic-function bound along one column, with both integrators.

use rademacher_tails::prawitz::{theta, Integrator, PrawitzColumn, Resolution};

fn main() -> rademacher_tails::Result<()> {
    let th = theta();
    println!("theta in [{:.12}, {:.12}]", th.lo, th.hi);
    let a = 0.3;
    let column = PrawitzColumn::defaults(a, Resolution::default())?;
    println!("a = {a}, T = {:.4}, q = {}", column.t, column.q);
    println!("{:>6} {:>12} {:>10} {:>12}", "x", "certified", "budget", "adaptive");
    for i in -4..=6 {
        let x = 0.25 * i as f64;
        let t = column.eval(x, Integrator::TrapezoidCertified)?;
        let s = column.eval(x, Integrator::AdaptiveDiscounted)?;
        println!("{x:>6.2} {:>12.6} {:>10.2e} {:>12.6}", t.value, t.error_budget, s.value);
    }
    Ok(())
}
