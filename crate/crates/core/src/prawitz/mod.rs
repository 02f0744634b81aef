//! Prawitz smoothing lower bound `F(a, x, T, q)` for unit-variance Rademacher sums
//! whose largest weight is at most `a`.
//!
//! All three integrals are taken in `v = T u`. Each integrand is `|k| * E` (or
//! `k * exp(-v^2/2)`) on a piece where the envelope `E` is a single smooth branch.
//! The certified path bounds the trapezoid error per panel from closed-form bounds
//! on `k`, `k'`, `k''` and on the envelope derivatives, and subtracts the total.

mod envelope;
mod kernel;
mod quadrature;
mod theta;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use envelope::{cos_power, envelope_g, envelope_h, Envelope, EnvelopePanel};
pub use kernel::{kernel_k, kernel_phi_bounds, Kernel, KernelPanel};
pub use quadrature::{
    adaptive_simpson, integrate_bounded, integrate_certified, trapezoid_error, BoundedFn,
    Certified, CertifiedIntegrand, Subdivision, SAFETY_FACTOR,
};
pub use theta::{theta, theta_residual, theta_root, ThetaConstant};

/// Additive slack per integral covering round-to-nearest arithmetic.
pub const FLOAT_SLACK: f64 = 1e-9;
/// Flat discount of the adaptive path.
pub const ADAPTIVE_DISCOUNT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    TrapezoidCertified,
    AdaptiveDiscounted,
}

impl Integrator {
    pub fn tag(self) -> u8 {
        match self {
            Integrator::TrapezoidCertified => 1,
            Integrator::AdaptiveDiscounted => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Integrator::TrapezoidCertified),
            2 => Some(Integrator::AdaptiveDiscounted),
            _ => None,
        }
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" | "trapezoid_certified" => Ok(Integrator::TrapezoidCertified),
            "adaptive" | "adaptive_discounted" => Ok(Integrator::AdaptiveDiscounted),
            _ => Err(Error::parse(s, "expected trapezoid or adaptive")),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::TrapezoidCertified => "trapezoid_certified",
            Integrator::AdaptiveDiscounted => "adaptive_discounted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrawitzParams {
    pub a: f64,
    pub x: f64,
    pub t: f64,
    pub q: f64,
}

impl PrawitzParams {
    pub fn new(a: f64, x: f64, t: f64, q: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParameter(format!("a must lie in (0, 1], got {a}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be positive, got {t}")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("q must lie in [0, 1], got {q}")));
        }
        if !x.is_finite() {
            return Err(Error::InvalidParameter("x must be finite".into()));
        }
        Ok(PrawitzParams { a, x, t, q })
    }

    /// `T = pi / a`, `q = 1/2`.
    pub fn defaults(a: f64, x: f64) -> Result<Self> {
        Self::new(a, x, PI / a, 0.5)
    }
}

/// Step control for both integrators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Initial panel width in `v`.
    pub base_step: f64,
    /// Target for the summed trapezoid error bound of all three integrals.
    pub tolerance: f64,
    pub max_depth: u32,
    /// Gaussian-dominated pieces are cut here and the remainder bounded analytically.
    pub cutoff: f64,
    /// Target for the adaptive Simpson error estimate.
    pub adaptive_tolerance: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            base_step: 0.05,
            tolerance: 3e-4,
            max_depth: 14,
            cutoff: 9.0,
            adaptive_tolerance: 1e-7,
        }
    }
}

impl Resolution {
    /// `panels` base panels over the cut-off window, no refinement.
    pub fn uniform(panels: usize) -> Self {
        let d = Resolution::default();
        Resolution {
            base_step: d.cutoff / panels.max(1) as f64,
            tolerance: 0.0,
            max_depth: 0,
            ..d
        }
    }

    pub fn with_panels(panels: usize) -> Self {
        let d = Resolution::default();
        Resolution {
            base_step: d.cutoff / panels.max(1) as f64,
            ..d
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrawitzEvaluation {
    /// Lower bound on `F`, with `error_budget` already subtracted.
    pub value: f64,
    pub error_budget: f64,
    pub integrator: Integrator,
    /// Undiscounted numerical value of `F`.
    pub estimate: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    /// `int |k| g`
    G,
    /// `int |k| h`
    H,
    /// `int k exp(-v^2/2)`
    Signed,
}

/// A piece of one integral where the envelope is a single smooth branch.
#[derive(Clone, Copy, Debug)]
struct Piece {
    part: Part,
    envelope: Envelope,
    /// Integration interval in the envelope coordinate `s`.
    lo: f64,
    hi: f64,
    /// `v = reflect - s` when set, else `v = s`.
    reflect: Option<f64>,
}

/// `|k(v)| E(s)` or `k(v) E(s)` in the coordinate of a [`Piece`].
pub struct KernelEnvelopeIntegrand {
    kernel: Kernel,
    envelope: Envelope,
    absolute: bool,
    reflect: Option<f64>,
}

impl KernelEnvelopeIntegrand {
    pub fn new(kernel: Kernel, envelope: Envelope, absolute: bool, reflect: Option<f64>) -> Self {
        KernelEnvelopeIntegrand {
            kernel,
            envelope,
            absolute,
            reflect,
        }
    }

    fn v(&self, s: f64) -> f64 {
        match self.reflect {
            Some(r) => (r - s).max(0.0),
            None => s,
        }
    }

    fn k(&self, s: f64) -> f64 {
        self.kernel.at_v(self.v(s))
    }
}

impl CertifiedIntegrand for KernelEnvelopeIntegrand {
    fn value(&self, s: f64) -> f64 {
        let k = self.k(s);
        let k = if self.absolute { k.abs() } else { k };
        k * self.envelope.eval(s)
    }

    fn panel_error(&self, s0: f64, s1: f64, _f0: f64, _f1: f64) -> f64 {
        let width = s1 - s0;
        let (v0, v1) = {
            let (p, q) = (self.v(s0), self.v(s1));
            (p.min(q), p.max(q))
        };
        let kp = self.kernel.panel_v(v0, v1);
        let ep = self.envelope.panel(s0, s1);
        let (k0, k1) = (self.k(s0), self.k(s1));
        let k_sup = kp.sup.min(k0.abs().max(k1.abs()) + 0.5 * kp.d1 * width);
        let lipschitz = kp.d1 * ep.sup + k_sup * ep.d1;
        // |k| is smooth unless k may vanish inside the panel.
        let smooth = !self.absolute
            || (k0 * k1 > 0.0 && k0.abs().min(k1.abs()) > 0.5 * kp.d1 * width);
        let second = smooth.then_some(kp.d2 * ep.sup + 2.0 * kp.d1 * ep.d1 + k_sup * ep.d2);
        trapezoid_error(width, lipschitz, second)
    }
}

/// Upper bound on `int_c^inf exp(-s^2/2) ds` for `c > 0`.
fn gauss_tail(c: f64) -> f64 {
    (-0.5 * c * c).exp() / c
}

/// Precomputed geometry for one `(a, T, q)`; evaluates `F` for any `x`.
#[derive(Clone, Debug)]
pub struct PrawitzColumn {
    pub a: f64,
    pub t: f64,
    pub q: f64,
    resolution: Resolution,
    pieces: Vec<Piece>,
    /// Summed `int exp(-s^2/2)` mass of discarded tails plus band widths; times `sup |k|`.
    discarded: f64,
    total_length: f64,
}

impl PrawitzColumn {
    pub fn new(a: f64, t: f64, q: f64, resolution: Resolution) -> Result<Self> {
        PrawitzParams::new(a, 0.0, t, q)?;
        let th = theta();
        let cut = resolution.cutoff;
        let vq = t * q;
        let mut pieces = Vec::new();
        let mut discarded = 0.0;
        let mut push = |part: Part, envelope: Envelope, lo: f64, hi: f64, reflect: Option<f64>| {
            if hi <= lo {
                return;
            }
            if envelope.decays() && hi > cut {
                if lo >= cut {
                    discarded += gauss_tail(lo);
                    return;
                }
                discarded += gauss_tail(cut);
                pieces.push(Piece { part, envelope, lo, hi: cut, reflect });
            } else {
                pieces.push(Piece { part, envelope, lo, hi, reflect });
            }
        };

        // first integral: g on [0, T q]
        let g_split = FRAC_PI_2 / a;
        push(Part::G, Envelope::GaussMinusCos { a }, 0.0, vq.min(g_split), None);
        push(Part::G, Envelope::GaussPlusOne, g_split, vq, None);
        // third integral: k exp(-v^2/2) on [0, T q]
        push(Part::Signed, Envelope::Gauss, 0.0, vq, None);
        // second integral: h on [T q, T]
        let (lo_exp, hi_cos, end_cos) = (th.lo / a, th.hi / a, PI / a);
        push(Part::H, Envelope::Gauss, vq, t.min(lo_exp), None);
        let band = t.min(hi_cos) - vq.max(lo_exp);
        let band = band.max(0.0);
        let (c_lo, c_hi) = (vq.max(hi_cos), t.min(end_cos));
        if c_hi > c_lo {
            push(
                Part::H,
                Envelope::CosPower { a },
                end_cos - c_hi,
                end_cos - c_lo,
                Some(end_cos),
            );
        }
        push(Part::H, Envelope::One, vq.max(end_cos), t, None);
        discarded += band;

        let total_length = pieces.iter().map(|p| p.hi - p.lo).sum();
        Ok(PrawitzColumn {
            a,
            t,
            q,
            resolution,
            pieces,
            discarded,
            total_length,
        })
    }

    pub fn defaults(a: f64, resolution: Resolution) -> Result<Self> {
        Self::new(a, PI / a, 0.5, resolution)
    }

    fn integrand(&self, piece: &Piece, x: f64) -> KernelEnvelopeIntegrand {
        KernelEnvelopeIntegrand::new(
            Kernel::new(x, self.t),
            piece.envelope,
            piece.part != Part::Signed,
            piece.reflect,
        )
    }

    /// Bound on everything left out of the pieces, in `u` units.
    fn discarded_bound(&self, x: f64) -> f64 {
        Kernel::new(x, self.t).global_sup() * self.discarded / self.t
    }

    pub fn eval(&self, x: f64, mode: Integrator) -> Result<PrawitzEvaluation> {
        if !x.is_finite() {
            return Err(Error::InvalidParameter("x must be finite".into()));
        }
        match mode {
            Integrator::TrapezoidCertified => self.eval_trapezoid(x),
            Integrator::AdaptiveDiscounted => self.eval_adaptive(x),
        }
    }

    fn eval_trapezoid(&self, x: f64) -> Result<PrawitzEvaluation> {
        let r = &self.resolution;
        let mut total = Certified::default();
        for piece in &self.pieces {
            let f = self.integrand(piece, x);
            let share = if self.total_length > 0.0 {
                r.tolerance * self.t * (piece.hi - piece.lo) / self.total_length
            } else {
                0.0
            };
            let sub = Subdivision {
                base_step: r.base_step,
                tolerance: share,
                max_depth: r.max_depth,
            };
            total.add(integrate_bounded(&f, piece.lo, piece.hi, &sub)?);
        }
        let integrals = total.value / self.t;
        let budget = total.error / self.t + self.discarded_bound(x) + 3.0 * FLOAT_SLACK;
        let estimate = 0.5 - integrals;
        let value = estimate - budget;
        if !value.is_finite() || !budget.is_finite() {
            return Err(Error::NonFinite("prawitz trapezoid"));
        }
        Ok(PrawitzEvaluation {
            value,
            error_budget: budget,
            integrator: Integrator::TrapezoidCertified,
            estimate,
            panels: total.panels,
        })
    }

    fn eval_adaptive(&self, x: f64) -> Result<PrawitzEvaluation> {
        let r = &self.resolution;
        let mut sum = 0.0;
        let mut err = 0.0;
        for piece in &self.pieces {
            let f = self.integrand(piece, x);
            let tol = if self.total_length > 0.0 {
                r.adaptive_tolerance * self.t * (piece.hi - piece.lo) / self.total_length
            } else {
                0.0
            };
            // Start from the base panels so oscillations are resolved before estimating.
            let n = ((piece.hi - piece.lo) / r.base_step).ceil().max(1.0) as usize;
            let h = (piece.hi - piece.lo) / n as f64;
            for i in 0..n {
                let lo = piece.lo + i as f64 * h;
                let hi = if i + 1 == n { piece.hi } else { lo + h };
                let (v, e) = adaptive_simpson(&|s| f.value(s), lo, hi, tol / n as f64, 30)?;
                sum += v;
                err += e;
            }
        }
        let estimate_err = err / self.t + self.discarded_bound(x);
        if estimate_err.is_nan() || estimate_err > ADAPTIVE_DISCOUNT {
            return Err(Error::AdaptiveUnreliable {
                estimate: estimate_err,
                discount: ADAPTIVE_DISCOUNT,
            });
        }
        let estimate = 0.5 - sum / self.t;
        if !estimate.is_finite() {
            return Err(Error::NonFinite("prawitz adaptive"));
        }
        Ok(PrawitzEvaluation {
            value: estimate - ADAPTIVE_DISCOUNT,
            error_budget: ADAPTIVE_DISCOUNT,
            integrator: Integrator::AdaptiveDiscounted,
            estimate,
            panels: 0,
        })
    }
}

/// Lower bound on `F(a, x, T, q)`.
pub fn prawitz_f(
    p: &PrawitzParams,
    mode: Integrator,
    resolution: &Resolution,
) -> Result<PrawitzEvaluation> {
    PrawitzColumn::new(p.a, p.t, p.q, *resolution)?.eval(p.x, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(a: f64, x: f64, mode: Integrator) -> PrawitzEvaluation {
        prawitz_f(&PrawitzParams::defaults(a, x).unwrap(), mode, &Resolution::default()).unwrap()
    }

    #[test]
    fn trapezoid_meets_tolerance() {
        for &a in &[0.0025, 0.1, 0.3, 0.5, 1.0] {
            for &x in &[-3.0, -0.5, 0.0, 1.0, 2.99] {
                let e = eval(a, x, Integrator::TrapezoidCertified);
                assert!(e.error_budget < 1e-3, "a={a} x={x} budget={}", e.error_budget);
            }
        }
    }

    #[test]
    fn paths_agree_within_budgets() {
        for &a in &[0.05, 0.3, 0.7] {
            for &x in &[-1.0, 0.35, 1.0, 2.0] {
                let t = eval(a, x, Integrator::TrapezoidCertified);
                let s = eval(a, x, Integrator::AdaptiveDiscounted);
                assert!(
                    (t.estimate - s.estimate).abs() <= t.error_budget + s.error_budget,
                    "a={a} x={x}: {} vs {}",
                    t.estimate,
                    s.estimate
                );
            }
        }
    }

    #[test]
    fn large_x_is_not_positive() {
        let e = eval(1.0, 10.0, Integrator::TrapezoidCertified);
        assert!(e.value <= 0.0);
    }

    #[test]
    fn decreasing_in_a_with_t_reoptimized() {
        let lo = eval(0.2, 1.0, Integrator::TrapezoidCertified);
        let hi = eval(0.3, 1.0, Integrator::TrapezoidCertified);
        assert!(lo.value >= hi.value);
    }

    #[test]
    fn gaussian_limit() {
        // as a -> 0 the bound approaches Pr[Z > x] from below
        let e = eval(0.0025, 1.0, Integrator::TrapezoidCertified);
        let gauss_tail = 0.158_655_253_931_457;
        assert!(e.value <= gauss_tail);
        assert!(e.value > gauss_tail - 0.01, "value {}", e.value);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PrawitzParams::new(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(PrawitzParams::new(1.1, 1.0, 1.0, 0.5).is_err());
        assert!(PrawitzParams::new(0.5, 1.0, -1.0, 0.5).is_err());
        assert!(PrawitzParams::new(0.5, 1.0, 1.0, 1.5).is_err());
    }
}
