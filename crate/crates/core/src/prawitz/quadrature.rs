use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global factor applied to every per-panel derivative-based error bound.
pub const SAFETY_FACTOR: f64 = 2.0;

/// An integrand that can bound the trapezoid error on any panel.
pub trait CertifiedIntegrand {
    fn value(&self, s: f64) -> f64;

    /// Upper bound on `|integral - (s1 - s0) (f0 + f1) / 2|` over `[s0, s1]`.
    fn panel_error(&self, s0: f64, s1: f64, f0: f64, f1: f64) -> f64;
}

/// Trapezoid error from a Lipschitz constant and an optional second-derivative bound.
pub fn trapezoid_error(width: f64, lipschitz: f64, second: Option<f64>) -> f64 {
    let first_order = lipschitz * width * width / 4.0;
    let second_order = match second {
        Some(m2) if m2.is_finite() => m2 * width * width * width / 12.0,
        _ => f64::INFINITY,
    };
    SAFETY_FACTOR * first_order.min(second_order)
}

/// Step control: uniform base panels, bisected until each panel's error bound is
/// below its length-proportional share of `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    pub base_step: f64,
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Subdivision {
    pub fn uniform(panels: usize, length: f64) -> Self {
        Subdivision {
            base_step: length / panels.max(1) as f64,
            tolerance: 0.0,
            max_depth: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certified {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

impl Certified {
    pub fn add(&mut self, other: Certified) {
        self.value += other.value;
        self.error += other.error;
        self.panels += other.panels;
    }
}

/// Adaptive certified trapezoid rule. Always returns the achieved bound, even when
/// it exceeds the tolerance.
pub fn integrate_bounded<F: CertifiedIntegrand + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    sub: &Subdivision,
) -> Result<Certified> {
    let mut out = Certified::default();
    if hi <= lo {
        return Ok(out);
    }
    let len = hi - lo;
    let n = (len / sub.base_step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let density = sub.tolerance / len;
    let mut f_left = checked(f.value(lo))?;
    for i in 0..n {
        let s0 = lo + i as f64 * h;
        let s1 = if i + 1 == n { hi } else { lo + (i + 1) as f64 * h };
        let f_right = checked(f.value(s1))?;
        refine(f, s0, s1, f_left, f_right, density, sub.max_depth, &mut out)?;
        f_left = f_right;
    }
    Ok(out)
}

/// Like [`integrate_bounded`], but fails when the bound exceeds the tolerance.
pub fn integrate_certified<F: CertifiedIntegrand + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    sub: &Subdivision,
) -> Result<Certified> {
    let out = integrate_bounded(f, lo, hi, sub)?;
    if out.error > sub.tolerance {
        return Err(Error::TooCoarse {
            achieved: out.error,
            requested: sub.tolerance,
        });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: CertifiedIntegrand + ?Sized>(
    f: &F,
    s0: f64,
    s1: f64,
    f0: f64,
    f1: f64,
    density: f64,
    depth: u32,
    out: &mut Certified,
) -> Result<()> {
    let width = s1 - s0;
    let err = f.panel_error(s0, s1, f0, f1);
    if err.is_nan() {
        return Err(Error::NonFinite("trapezoid panel bound"));
    }
    if err <= density * width || depth == 0 {
        out.value += 0.5 * width * (f0 + f1);
        out.error += err;
        out.panels += 1;
        return Ok(());
    }
    let mid = 0.5 * (s0 + s1);
    let fm = checked(f.value(mid))?;
    refine(f, s0, mid, f0, fm, density, depth - 1, out)?;
    refine(f, mid, s1, fm, f1, density, depth - 1, out)
}

fn checked(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("integrand"))
    }
}

/// A closure with global Lipschitz and second-derivative bounds.
pub struct BoundedFn<F> {
    pub f: F,
    pub lipschitz: f64,
    pub second: Option<f64>,
}

impl<F: Fn(f64) -> f64> CertifiedIntegrand for BoundedFn<F> {
    fn value(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    fn panel_error(&self, s0: f64, s1: f64, _f0: f64, _f1: f64) -> f64 {
        trapezoid_error(s1 - s0, self.lipschitz, self.second)
    }
}

/// Recursive adaptive Simpson with the usual `|S2 - S1| / 15` error estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_depth: u32,
) -> Result<(f64, f64)> {
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let fa = checked(f(lo))?;
    let fb = checked(f(hi))?;
    let m = 0.5 * (lo + hi);
    let fm = checked(f(m))?;
    let whole = (hi - lo) * (fa + 4.0 * fm + fb) / 6.0;
    simpson_step(f, lo, hi, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = checked(f(lm))?;
    let frm = checked(f(rm))?;
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    let (lv, le) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let (rv, re) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok((lv + rv, le + re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let f = BoundedFn {
            f: |_| 1.0,
            lipschitz: 0.0,
            second: Some(0.0),
        };
        let r = integrate_certified(&f, 0.0, 1.0, &Subdivision::uniform(10, 1.0)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.error, 0.0);
    }

    #[test]
    fn bound_holds_for_smooth_function() {
        let f = BoundedFn {
            f: |s: f64| s.sin(),
            lipschitz: 1.0,
            second: Some(1.0),
        };
        let r = integrate_bounded(&f, 0.0, 3.0, &Subdivision::uniform(7, 3.0)).unwrap();
        let exact = 1.0 - 3f64.cos();
        assert!((r.value - exact).abs() <= r.error);
    }

    #[test]
    fn too_coarse_is_an_error() {
        let f = BoundedFn {
            f: |s: f64| s * s,
            lipschitz: 2.0,
            second: Some(2.0),
        };
        let sub = Subdivision {
            base_step: 0.5,
            tolerance: 1e-12,
            max_depth: 2,
        };
        assert!(matches!(
            integrate_certified(&f, 0.0, 1.0, &sub),
            Err(Error::TooCoarse { .. })
        ));
    }

    #[test]
    fn adaptive_refines_until_tolerance() {
        let f = BoundedFn {
            f: |s: f64| (5.0 * s).cos(),
            lipschitz: 5.0,
            second: Some(25.0),
        };
        let sub = Subdivision {
            base_step: 0.25,
            tolerance: 1e-6,
            max_depth: 20,
        };
        let r = integrate_certified(&f, 0.0, 2.0, &sub).unwrap();
        let exact = (10f64).sin() / 5.0;
        assert!((r.value - exact).abs() <= r.error);
        assert!(r.error <= 1e-6);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let (v, e) = adaptive_simpson(&|s: f64| (-s * s).exp(), 0.0, 3.0, 1e-10, 30).unwrap();
        let exact = 0.886_207_348_259_521_1; // erf(3) sqrt(pi)/2
        assert!((v - exact).abs() < 1e-8);
        assert!(e < 1e-8);
    }

    #[test]
    fn nan_aborts() {
        let f = BoundedFn {
            f: |s: f64| if s > 0.5 { f64::NAN } else { 0.0 },
            lipschitz: 1.0,
            second: None,
        };
        assert!(matches!(
            integrate_bounded(&f, 0.0, 1.0, &Subdivision::uniform(4, 1.0)),
            Err(Error::NonFinite(_))
        ));
    }
}
