use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};

/// `k(u,x,T) = (1-u) sin(pi u + T u x) / sin(pi u) + sin(T u x) / pi`, continued
/// to `k(0) = 1 + T x / pi` and `k(1) = 0`.
pub fn kernel_k(u: f64, x: f64, t: f64) -> f64 {
    if u <= 0.0 {
        return 1.0 + t * x * FRAC_1_PI;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let y = t * u * x;
    let one_minus = 1.0 - u;
    // sin(pi u) = sin(pi (1-u)); the smaller argument keeps relative accuracy near u = 1.
    let phi = PI * u.min(one_minus);
    let (s, c) = phi.sin_cos();
    let cot = if u <= 0.5 { c / s } else { -c / s };
    let (sy, cy) = y.sin_cos();
    one_minus * (cy + cot * sy) + sy * FRAC_1_PI
}

/// Upper bounds for `|k|`, `|dk/dphi|`, `|d2k/dphi2|` on a `phi = pi u` panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPanel {
    pub sup: f64,
    pub d1: f64,
    pub d2: f64,
}

impl KernelPanel {
    fn max(self, o: KernelPanel) -> KernelPanel {
        KernelPanel {
            sup: self.sup.max(o.sup),
            d1: self.d1.max(o.d1),
            d2: self.d2.max(o.d2),
        }
    }
}

// P(phi) = phi / sin(phi) and its first two derivatives; all are increasing on [0, pi/2].
fn p0(phi: f64) -> f64 {
    if phi < 1e-8 {
        1.0
    } else {
        phi / phi.sin()
    }
}

fn p1(phi: f64) -> f64 {
    let phi = phi.max(0.1);
    let (s, c) = phi.sin_cos();
    (s - phi * c) / (s * s)
}

fn p2(phi: f64) -> f64 {
    let phi = phi.max(0.1);
    let (s, c) = phi.sin_cos();
    let csc = 1.0 / s;
    let cot = c / s;
    -2.0 * csc * cot + phi * csc * (cot * cot + csc * csc)
}

fn left_half(phi0: f64, phi1: f64, lambda: f64) -> KernelPanel {
    let mu = 1.0 + lambda;
    let am = mu.abs();
    // Q = sin(mu phi) / phi = mu sinc(mu phi); |sinc'| <= 1/2, |sinc''| <= 1/3.
    let (q0, q1, q2) = if phi0 > 0.0 {
        (
            am.min(1.0 / phi0),
            (0.5 * mu * mu).min(am / phi0 + 1.0 / (phi0 * phi0)),
            (am * am * am / 3.0)
                .min(mu * mu / phi0 + 2.0 * am / (phi0 * phi0) + 2.0 / (phi0 * phi0 * phi0)),
        )
    } else {
        (am, 0.5 * mu * mu, am * am * am / 3.0)
    };
    let (pa, pb, pc) = (p0(phi1), p1(phi1), p2(phi1));
    let s0 = q0 * pa;
    let s1 = q1 * pa + q0 * pb;
    let s2 = q2 * pa + 2.0 * q1 * pb + q0 * pc;
    let w = 1.0 - phi0 * FRAC_1_PI;
    KernelPanel {
        sup: w * s0 + FRAC_1_PI,
        d1: s0 * FRAC_1_PI + w * s1 + lambda.abs() * FRAC_1_PI,
        d2: 2.0 * s1 * FRAC_1_PI + w * s2 + lambda * lambda * FRAC_1_PI,
    }
}

fn right_half(phi0: f64, lambda: f64) -> KernelPanel {
    // With psi = pi - phi: k = (P(psi) sin(mu phi) + sin(lambda phi)) / pi.
    let mu = 1.0 + lambda;
    let am = mu.abs();
    let psi = (PI - phi0).min(FRAC_PI_2);
    let (pa, pb, pc) = (p0(psi), p1(psi), p2(psi));
    KernelPanel {
        sup: (pa + 1.0) * FRAC_1_PI,
        d1: (pb + pa * am + lambda.abs()) * FRAC_1_PI,
        d2: (pc + 2.0 * pb * am + pa * mu * mu + lambda * lambda) * FRAC_1_PI,
    }
}

/// Derivative bounds in `phi` for `phi` in `[phi0, phi1] ⊂ [0, pi]`, with `lambda = T x / pi`.
pub fn kernel_phi_bounds(phi0: f64, phi1: f64, lambda: f64) -> KernelPanel {
    let phi0 = phi0.clamp(0.0, PI);
    let phi1 = phi1.clamp(phi0, PI);
    if phi1 <= FRAC_PI_2 {
        left_half(phi0, phi1, lambda)
    } else if phi0 >= FRAC_PI_2 {
        right_half(phi0, lambda)
    } else {
        left_half(phi0, FRAC_PI_2, lambda).max(right_half(FRAC_PI_2, lambda))
    }
}

/// `k` viewed as a function of `v = T u` for fixed `x`, `T`.
#[derive(Clone, Copy, Debug)]
pub struct Kernel {
    pub x: f64,
    pub t: f64,
    lambda: f64,
    scale: f64,
    global_sup: f64,
}

impl Kernel {
    pub fn new(x: f64, t: f64) -> Self {
        let lambda = t * x * FRAC_1_PI;
        let mu = 1.0 + lambda;
        Kernel {
            x,
            t,
            lambda,
            scale: PI / t,
            global_sup: (mu.abs() * FRAC_PI_2).max(0.5) + FRAC_1_PI,
        }
    }

    pub fn at_v(&self, v: f64) -> f64 {
        kernel_k(v / self.t, self.x, self.t)
    }

    /// Bound on `sup |k|` over the whole of `[0, 1]`.
    pub fn global_sup(&self) -> f64 {
        self.global_sup
    }

    /// Bounds on `|K|`, `|K'|`, `|K''|` over `v` in `[v0, v1]`.
    pub fn panel_v(&self, v0: f64, v1: f64) -> KernelPanel {
        let kp = kernel_phi_bounds(v0 * self.scale, v1 * self.scale, self.lambda);
        KernelPanel {
            sup: kp.sup.min(self.global_sup),
            d1: kp.d1 * self.scale,
            d2: kp.d2 * self.scale * self.scale,
        }
    }
}
