//! Norm probabilities for vector-valued weights.

use rademacher_tails::exact::Surd;
use rademacher_tails::oracle::{dimension_free_bound, high_dim_exact_tail, NormDirection, VectorWeightSet};
use rademacher_tails::verify::{t2_configuration, t3_configuration};

fn main() -> rademacher_tails::Result<()> {
    for (name, set) in [("planar", t2_configuration()?), ("spatial", t3_configuration()?)] {
        let le = high_dim_exact_tail(&set, NormDirection::NormLe1)?;
        let ge = high_dim_exact_tail(&set, NormDirection::NormGe1)?;
        println!("{name}: Pr[|X| <= 1] = {le}, Pr[|X| >= 1] = {ge}");
    }
    let diag = VectorWeightSet::normalized(vec![
        vec![Surd::parse("1")?, Surd::parse("1")?],
        vec![Surd::parse("1")?, Surd::parse("-1")?],
        vec![Surd::parse("1/2")?, Surd::parse("0")?],
    ])?;
    println!(
        "diagonal set: Pr[|X| >= 1] = {}, dimension-free bound {:.4}",
        high_dim_exact_tail(&diag, NormDirection::NormGe1)?,
        dimension_free_bound()
    );
    Ok(())
}
