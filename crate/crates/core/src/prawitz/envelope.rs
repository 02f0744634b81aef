use std::f64::consts::{FRAC_PI_2, PI};

use super::theta::theta;

fn gauss(v: f64) -> f64 {
    (-0.5 * v * v).exp()
}

/// `cos(z)^p` for `z` in `[0, pi/2]`, through `ln(1 - 2 sin^2(z/2))` for accuracy near 0.
/// Underflow returns 0.
pub fn cos_power(z: f64, p: f64) -> f64 {
    if z >= FRAC_PI_2 {
        return 0.0;
    }
    let s = (0.5 * z).sin();
    (p * (-2.0 * s * s).ln_1p()).exp()
}

/// `g(v,a)`; at `a v = pi/2` the larger adjacent branch is returned.
pub fn envelope_g(v: f64, a: f64) -> f64 {
    let av = a * v;
    if av < FRAC_PI_2 {
        gauss(v) - cos_power(av, 1.0 / (a * a))
    } else {
        gauss(v) + 1.0
    }
}

/// `h(v,a)` with the `theta` bracket resolved conservatively; at branch points
/// the larger adjacent value is returned.
pub fn envelope_h(v: f64, a: f64) -> f64 {
    let th = theta();
    let av = a * v;
    let p = 1.0 / (a * a);
    let cos_branch = || cos_power(PI - av, p);
    if av < th.lo {
        gauss(v)
    } else if av <= th.hi {
        gauss(v).max(cos_branch())
    } else if av < PI {
        cos_branch()
    } else {
        1.0
    }
}

/// Bounds on an envelope and its first two derivatives over a panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopePanel {
    pub sup: f64,
    pub d1: f64,
    /// May be infinite where the second derivative is unbounded.
    pub d2: f64,
}

/// One smooth branch of an envelope, in its integration coordinate `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    /// `exp(-s^2/2)`
    Gauss,
    /// `exp(-s^2/2) - cos(a s)^(1/a^2)`, requires `a s <= pi/2`.
    GaussMinusCos { a: f64 },
    /// `exp(-s^2/2) + 1`
    GaussPlusOne,
    /// `cos(a s)^(1/a^2)`; the cosine branch of `h` in reflected coordinate `s = pi/a - v`.
    CosPower { a: f64 },
    /// `1`
    One,
}

impl Envelope {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Envelope::Gauss => gauss(s),
            Envelope::GaussMinusCos { a } => (gauss(s) - cos_power(a * s, 1.0 / (a * a))).max(0.0),
            Envelope::GaussPlusOne => gauss(s) + 1.0,
            Envelope::CosPower { a } => cos_power(a * s, 1.0 / (a * a)),
            Envelope::One => 1.0,
        }
    }

    /// Whether the envelope is dominated by `exp(-s^2/2)` (so its far tail may be cut).
    pub fn decays(&self) -> bool {
        matches!(
            self,
            Envelope::Gauss | Envelope::GaussMinusCos { .. } | Envelope::CosPower { .. }
        )
    }

    pub fn panel(&self, s0: f64, s1: f64) -> EnvelopePanel {
        match *self {
            Envelope::Gauss => gauss_panel(s0, s1),
            Envelope::GaussMinusCos { a } => {
                let g = gauss_panel(s0, s1);
                let c = cos_panel(a, s0, s1);
                EnvelopePanel {
                    sup: (g.sup - cos_power(a * s1, 1.0 / (a * a))).max(0.0),
                    d1: g.d1 + c.d1,
                    d2: g.d2 + c.d2,
                }
            }
            Envelope::GaussPlusOne => {
                let g = gauss_panel(s0, s1);
                EnvelopePanel {
                    sup: g.sup + 1.0,
                    ..g
                }
            }
            Envelope::CosPower { a } => cos_panel(a, s0, s1),
            Envelope::One => EnvelopePanel {
                sup: 1.0,
                d1: 0.0,
                d2: 0.0,
            },
        }
    }
}

fn gauss_panel(s0: f64, s1: f64) -> EnvelopePanel {
    let sup = gauss(s0.max(0.0));
    let wide = (s0 * s0 - 1.0).abs().max((s1 * s1 - 1.0).abs());
    EnvelopePanel {
        sup,
        d1: s1.abs().max(s0.abs()) * sup,
        d2: wide * sup,
    }
}

// C = cos(a s)^p with p = 1/a^2 >= 1:
//   C'  = -(1/a) sin(a s) cos(a s)^(p-1)
//   C'' = -C + (p-1) sin(a s)^2 cos(a s)^(p-2)
fn cos_panel(a: f64, s0: f64, s1: f64) -> EnvelopePanel {
    let p = 1.0 / (a * a);
    let (z0, z1) = (a * s0, (a * s1).min(FRAC_PI_2));
    let c_at0 = cos_power(z0, p);
    let c1 = z1.cos();
    let sn1 = z1.sin();
    let pow_m1 = if p - 1.0 <= 0.0 {
        1.0
    } else {
        cos_power(z0, p - 1.0)
    };
    let pow_m2 = if p >= 2.0 {
        cos_power(z0, p - 2.0)
    } else if c1 > 0.0 {
        c1.powf(p - 2.0)
    } else {
        f64::INFINITY
    };
    EnvelopePanel {
        sup: c_at0,
        d1: sn1 * pow_m1 / a,
        d2: c_at0 + (p - 1.0) * sn1 * sn1 * pow_m2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        assert_eq!(envelope_g(0.0, 0.4), 0.0);
        let a = 0.5;
        let v = 4.0; // a v = 2 > pi/2
        assert!((envelope_g(v, a) - ((-8.0f64).exp() + 1.0)).abs() < 1e-15);
        let v = 1.0; // a v < theta
        assert_eq!(envelope_h(v, a), (-0.5f64).exp());
        assert_eq!(envelope_h(7.0, a), 1.0);
        let v = 5.0; // a v = 2.5, cosine branch
        let want = (-(2.5f64).cos()).powf(4.0);
        assert!((envelope_h(v, a) - want).abs() < 1e-14);
    }

    #[test]
    fn g_is_between_zero_and_gauss() {
        for &a in &[0.05, 0.3, 0.7, 1.0] {
            let mut v = 0.0;
            while a * v < FRAC_PI_2 {
                let g = envelope_g(v, a);
                assert!(g >= -1e-15 && g <= gauss(v) + 1e-15, "a={a} v={v}");
                v += 0.01;
            }
        }
    }

    #[test]
    fn h_is_continuous_at_theta_and_pi() {
        let th = theta();
        for &a in &[0.1, 0.5, 1.0] {
            let left = gauss(th.lo / a);
            let right = cos_power(PI - th.hi, 1.0 / (a * a));
            assert!((left - right).abs() < 1e-9, "a={a}");
            assert!((envelope_h((PI - 1e-12) / a, a) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn panel_bounds_dominate() {
        let envs = [
            (Envelope::Gauss, 0.0, 9.0),
            (Envelope::GaussMinusCos { a: 0.3 }, 0.0, FRAC_PI_2 / 0.3),
            (Envelope::GaussMinusCos { a: 0.9 }, 0.0, FRAC_PI_2 / 0.9),
            (Envelope::CosPower { a: 0.3 }, 0.0, (PI - 1.7781) / 0.3),
            (Envelope::CosPower { a: 1.0 }, 0.0, PI - 1.7781),
            (Envelope::GaussPlusOne, 0.0, 5.0),
        ];
        for (env, lo, hi) in envs {
            let n = 200;
            let h = (hi - lo) / n as f64;
            for i in 0..n {
                let (s0, s1) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
                let b = env.panel(s0, s1);
                for j in 0..=10 {
                    let s = s0 + j as f64 * h / 10.0;
                    assert!(env.eval(s) <= b.sup + 1e-12, "{env:?} sup at {s}");
                    let e = 1e-6;
                    if s - e >= lo && s + e <= hi {
                        let d1 = (env.eval(s + e) - env.eval(s - e)) / (2.0 * e);
                        assert!(d1.abs() <= b.d1 * (1.0 + 1e-5) + 1e-7, "{env:?} d1 at {s}");
                        let e2 = 1e-4;
                        if s - e2 >= lo && s + e2 <= hi {
                            let d2 = (env.eval(s + e2) - 2.0 * env.eval(s) + env.eval(s - e2))
                                / (e2 * e2);
                            assert!(d2.abs() <= b.d2 * (1.0 + 1e-3) + 1e-5, "{env:?} d2 at {s}");
                        }
                    }
                }
            }
        }
    }
}
