//! Anti-concentration certificates for chains of large weights, and the
//! stopped walk `W(S; x)` with its exact success probability.

mod antichain;
mod binomial;
mod walk;

pub use antichain::{
    check_antichain_bound, check_obs_k2, check_obs_k3, max_window_mass, ChainCertificate, CHAIN_CAP,
};
pub use binomial::f_largest_binomials;
pub use walk::{
    check_hitting_lemma, check_hitting_lemma_with, simulate_walk, simulate_walk_with, walk_success_probability,
    wilson_lower_bound, HittingOptions, OrderPolicy, Simulation, WalkInstance, BEST_ORDER_CAP, EXACT_WALK_CAP,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Scales rationals by the lcm of their denominators; returns the integers and the scale.
pub(crate) fn integerize(qs: &[Rational]) -> Result<(Vec<i128>, BigInt)> {
    let lcm = qs.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let ints = qs
        .iter()
        .map(|q| {
            (q * Rational::from_integer(lcm.clone()))
                .to_integer()
                .to_i128()
                .ok_or_else(|| Error::InvalidParameter("weights too large to scale to integers".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ints, lcm))
}
