//! Special functions behind the closed-form densities: log-gamma, the beta
//! function, the regularized incomplete beta function, and the Gauss
//! hypergeometric function (series for `F(1, n; n + 1; z)`, Euler integral
//! in general).

use crate::error::{domain, Result};
use crate::quadrature::TanhSinh;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// `B(a, b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_beta(a, b)?.exp())
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued fraction (modified Lentz), evaluated directly below the pivot
/// `(a + 1) / (a + b + 2)` and through `1 - I_{1-x}(b, a)` above it.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("incomplete_beta requires 0 <= x <= 1, got {x}")));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "incomplete_beta requires a, b > 0, got a = {a}, b = {b}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - log_beta(a, b)?;
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 100_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Inverse of `x ↦ I_x(a, b)`: safeguarded Newton iteration inside a
/// shrinking bisection bracket.
pub fn incomplete_beta_inverse(u: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain(format!("probability {u} outside [0, 1]")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(1.0);
    }
    let ln_b = log_beta(a, b)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = 0.5;
    for _ in 0..200 {
        let f = incomplete_beta(x, a, b)? - u;
        if f.abs() < 1e-16 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp();
        let newton = x - f / dens;
        x = if dens > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-16 * hi.max(1e-300) {
            break;
        }
    }
    Ok(x)
}

/// `F(1, n; n + 1; z) = n Σ_{k≥0} z^k / (n + k)` for `n > 0`, `0 <= z < 1`.
///
/// Summed directly; near `z = 1` integer `n` switches to the closed form
/// `n z^-n (-ln(1 - z) - Σ_{m=1}^{n-1} z^m / m)`, and non-integer `n` falls
/// back to `n z^-n ∫_0^z t^(n-1) / (1 - t) dt` when the series would need
/// more than a million terms.
pub fn hyp2f1_1_n(n: f64, z: f64) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(domain(format!("hyp2f1_1_n requires n > 0, got {n}")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(domain(format!(
            "hyp2f1_1_n requires 0 <= z < 1, got {z} (logarithmic divergence at 1)"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > 0.9 && n.fract() == 0.0 && n <= 30.0 {
        return Ok(closed_form_integer(n as u32, z));
    }
    const MAX_TERMS: usize = 1_000_000;
    // terms decay like z^k; stop when the geometric tail is negligible
    let stop = 1e-16 * (1.0 - z);
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 0..MAX_TERMS {
        let term = power / (n + k as f64);
        sum += term;
        if term < stop * sum {
            return Ok(n * sum);
        }
        power *= z;
    }
    let integral = TanhSinh::default()
        .integrate_with_distances(|t: f64, _, to_z| t.powf(n - 1.0) / ((1.0 - z) + to_z), 0.0, z)
        .value;
    Ok(n * integral / z.powf(n))
}

fn closed_form_integer(n: u32, z: f64) -> f64 {
    let mut partial = 0.0;
    let mut power = 1.0;
    for m in 1..n {
        power *= z;
        partial += power / m as f64;
    }
    n as f64 * (-(-z).ln_1p() - partial) / z.powi(n as i32)
}

/// Parameters of `F(a, b; c; z)` for the Euler integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HyperParams {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(domain("hypergeometric parameter a must be finite"));
        }
        if !(b > 0.0) || !(c > b) {
            return Err(domain(format!(
                "Euler integral requires c > b > 0, got b = {b}, c = {c}"
            )));
        }
        if !(0.0..1.0).contains(&z) {
            return Err(domain(format!("Euler integral requires 0 <= z < 1, got {z}")));
        }
        Ok(Self { a, b, c, z })
    }
}

/// `F(a, b; c; z)` from Euler's integral
/// `Γ(c) / (Γ(b) Γ(c - b)) ∫_0^1 t^(b-1) (1 - t)^(c-b-1) (1 - t z)^(-a) dt`.
pub fn euler_hyp2f1(p: HyperParams) -> Result<f64> {
    let HyperParams { a, b, c, z } = HyperParams::new(p.a, p.b, p.c, p.z)?;
    let ln_norm = log_gamma(c)? - log_gamma(b)? - log_gamma(c - b)?;
    let rule = TanhSinh::with_tolerance(1e-15, 1e-13);
    let est = rule.integrate_with_distances(
        |_t: f64, t0: f64, t1: f64| {
            ((b - 1.0) * t0.ln() + (c - b - 1.0) * t1.ln() - a * (-t0 * z).ln_1p()).exp()
        },
        0.0,
        1.0,
    );
    Ok(ln_norm.exp() * est.value)
}
