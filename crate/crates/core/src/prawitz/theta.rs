use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Bracket around the root of `exp(-t^2/2) + cos(t)` in `[pi/2, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConstant {
    pub lo: f64,
    pub hi: f64,
}

impl ThetaConstant {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub fn theta_residual(t: f64) -> f64 {
    (-0.5 * t * t).exp() + t.cos()
}

/// Bisection down to a bracket of width at most `1e-12`.
pub fn theta_root() -> ThetaConstant {
    let (mut lo, mut hi) = (FRAC_PI_2, PI);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if theta_residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ThetaConstant { lo, hi }
}

/// Cached bracket.
pub fn theta() -> ThetaConstant {
    static THETA: OnceLock<ThetaConstant> = OnceLock::new();
    *THETA.get_or_init(theta_root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_is_tight_and_signed() {
        let t = theta_root();
        assert!(t.width() <= 1e-10);
        assert!(theta_residual(t.lo) > 0.0);
        assert!(theta_residual(t.hi) < 0.0);
        assert!((t.mid() - 1.778).abs() < 1e-4);
        assert!(theta_residual(t.mid()).abs() < 1e-9);
        assert!(theta_residual(FRAC_PI_2) > 0.0);
    }
}
