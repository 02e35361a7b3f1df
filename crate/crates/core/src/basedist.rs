//! Catalog of base univariate laws: density, distribution function,
//! quantile, sampling and Stieltjes transform.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};

use num_complex::Complex64;
use rand_distr::{Distribution as _, StandardNormal};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::TanhSinh;
use crate::rng::RandomStream;
use crate::specfun::{incomplete_beta, incomplete_beta_inverse, log_beta};
use crate::stieltjes::ComplexPoint;

/// A base univariate law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    /// Density `1 / (π sqrt((x - lo)(hi - x)))`.
    Arcsin { lo: f64, hi: f64 },
    /// Wigner semicircle on `[lo, hi]`.
    Semicircle { lo: f64, hi: f64 },
    /// Beta(alpha, beta) carried affinely onto `[lo, hi]`.
    Beta { alpha: f64, beta: f64, lo: f64, hi: f64 },
    /// Density `n w^(n-1)` on `[0, 1]`.
    Power { n: f64 },
    Triangular { lo: f64, mode: f64, hi: f64 },
    Cauchy { location: f64, scale: f64 },
    Normal { mean: f64, sd: f64 },
    PointMass { at: f64 },
}

use DistributionSpec::*;

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl DistributionSpec {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Uniform { lo, hi }.validated()
    }
    pub fn arcsin(lo: f64, hi: f64) -> Result<Self> {
        Arcsin { lo, hi }.validated()
    }
    pub fn semicircle(lo: f64, hi: f64) -> Result<Self> {
        Semicircle { lo, hi }.validated()
    }
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Beta {
            alpha,
            beta,
            lo: 0.0,
            hi: 1.0,
        }
        .validated()
    }
    pub fn beta_on(alpha: f64, beta: f64, lo: f64, hi: f64) -> Result<Self> {
        Beta {
            alpha,
            beta,
            lo,
            hi,
        }
        .validated()
    }
    pub fn power(n: f64) -> Result<Self> {
        Power { n }.validated()
    }
    pub fn triangular(lo: f64, mode: f64, hi: f64) -> Result<Self> {
        Triangular { lo, mode, hi }.validated()
    }
    pub fn cauchy(location: f64, scale: f64) -> Result<Self> {
        Cauchy { location, scale }.validated()
    }
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Normal { mean, sd }.validated()
    }
    pub fn point_mass(at: f64) -> Result<Self> {
        PointMass { at }.validated()
    }

    /// Check the parameter constraints.
    pub fn validated(self) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("{}: {msg}", self.name())));
        match self {
            Uniform { lo, hi } | Arcsin { lo, hi } | Semicircle { lo, hi } => {
                if !finite(&[lo, hi]) || lo >= hi {
                    return bad("support bounds must be finite with lo < hi");
                }
            }
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => {
                if !finite(&[alpha, beta]) || alpha <= 0.0 || beta <= 0.0 {
                    return bad("shape parameters must be positive");
                }
                if !finite(&[lo, hi]) || lo >= hi {
                    return bad("support bounds must be finite with lo < hi");
                }
            }
            Power { n } => {
                if !n.is_finite() || n < 1.0 {
                    return bad("power parameter must be at least 1");
                }
            }
            Triangular { lo, mode, hi } => {
                if !finite(&[lo, mode, hi]) || lo >= hi || mode < lo || mode > hi {
                    return bad("need lo <= mode <= hi and lo < hi");
                }
            }
            Cauchy { location, scale } => {
                if !finite(&[location, scale]) || scale <= 0.0 {
                    return bad("scale must be positive");
                }
            }
            Normal { mean, sd } => {
                if !finite(&[mean, sd]) || sd <= 0.0 {
                    return bad("standard deviation must be positive");
                }
            }
            PointMass { at } => {
                if !at.is_finite() {
                    return bad("location must be finite");
                }
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Uniform { .. } => "uniform",
            Arcsin { .. } => "arcsin",
            Semicircle { .. } => "semicircle",
            Beta { .. } => "beta",
            Power { .. } => "power",
            Triangular { .. } => "triangular",
            Cauchy { .. } => "cauchy",
            Normal { .. } => "normal",
            PointMass { .. } => "point_mass",
        }
    }

    /// Closed convex hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Uniform { lo, hi }
            | Arcsin { lo, hi }
            | Semicircle { lo, hi }
            | Beta { lo, hi, .. }
            | Triangular { lo, hi, .. } => (lo, hi),
            Power { .. } => (0.0, 1.0),
            Cauchy { .. } | Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            PointMass { at } => (at, at),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, PointMass { .. })
    }

    pub fn has_density(&self) -> bool {
        !self.is_atom()
    }

    pub fn has_finite_moments(&self) -> bool {
        !matches!(self, Cauchy { .. })
    }

    /// Same law translated by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        match *self {
            Uniform { lo, hi } => Uniform {
                lo: lo + c,
                hi: hi + c,
            },
            Arcsin { lo, hi } => Arcsin {
                lo: lo + c,
                hi: hi + c,
            },
            Semicircle { lo, hi } => Semicircle {
                lo: lo + c,
                hi: hi + c,
            },
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => Beta {
                alpha,
                beta,
                lo: lo + c,
                hi: hi + c,
            },
            Power { n } => Beta {
                alpha: n,
                beta: 1.0,
                lo: c,
                hi: 1.0 + c,
            },
            Triangular { lo, mode, hi } => Triangular {
                lo: lo + c,
                mode: mode + c,
                hi: hi + c,
            },
            Cauchy { location, scale } => Cauchy {
                location: location + c,
                scale,
            },
            Normal { mean, sd } => Normal { mean: mean + c, sd },
            PointMass { at } => PointMass { at: at + c },
        }
    }

    /// Density at `x`; zero outside the support. Point masses have no
    /// density and report zero.
    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        self.pdf_with_distances(x, x - lo, hi - x)
    }

    /// Density at `x` given its exact distances to the support ends, which
    /// keeps endpoint singularities accurate under quadrature.
    pub(crate) fn pdf_with_distances(&self, x: f64, to_lo: f64, to_hi: f64) -> f64 {
        if to_lo < 0.0 || to_hi < 0.0 {
            return 0.0;
        }
        match *self {
            Uniform { lo, hi } => 1.0 / (hi - lo),
            Arcsin { .. } => FRAC_1_PI / (to_lo * to_hi).sqrt(),
            Semicircle { lo, hi } => {
                let r = 0.5 * (hi - lo);
                2.0 * FRAC_1_PI * (to_lo * to_hi).sqrt() / (r * r)
            }
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => {
                let len = hi - lo;
                let ln = (alpha - 1.0) * (to_lo / len).ln() + (beta - 1.0) * (to_hi / len).ln()
                    - log_beta(alpha, beta).unwrap_or(f64::NAN);
                ln.exp() / len
            }
            Power { n } => {
                if n == 1.0 {
                    1.0
                } else {
                    n * to_lo.powf(n - 1.0)
                }
            }
            Triangular { lo, mode, hi } => {
                if x < mode {
                    2.0 * to_lo / ((hi - lo) * (mode - lo))
                } else if x > mode {
                    2.0 * to_hi / ((hi - lo) * (hi - mode))
                } else {
                    2.0 / (hi - lo)
                }
            }
            Cauchy { location, scale } => {
                let t = (x - location) / scale;
                FRAC_1_PI / (scale * (1.0 + t * t))
            }
            Normal { mean, sd } => {
                let t = (x - mean) / sd;
                (-0.5 * t * t).exp() / (sd * (2.0 * PI).sqrt())
            }
            PointMass { .. } => 0.0,
        }
    }

    /// Distribution function, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let (lo, hi) = self.support();
        if x < lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Uniform { lo, hi } => (x - lo) / (hi - lo),
            Arcsin { lo, hi } => {
                let t = ((x - lo) - (hi - x)) / (hi - lo);
                0.5 + t.clamp(-1.0, 1.0).asin() * FRAC_1_PI
            }
            Semicircle { lo, hi } => {
                let t = (((x - lo) - (hi - x)) / (hi - lo)).clamp(-1.0, 1.0);
                (0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) * FRAC_1_PI).clamp(0.0, 1.0)
            }
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => incomplete_beta(((x - lo) / (hi - lo)).clamp(0.0, 1.0), alpha, beta)
                .unwrap_or(f64::NAN),
            Power { n } => x.powf(n),
            Triangular { lo, mode, hi } => {
                if x <= mode {
                    (x - lo) * (x - lo) / ((hi - lo) * (mode - lo))
                } else {
                    1.0 - (hi - x) * (hi - x) / ((hi - lo) * (hi - mode))
                }
            }
            Cauchy { location, scale } => 0.5 + ((x - location) / scale).atan() * FRAC_1_PI,
            Normal { mean, sd } => {
                0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * SQRT_2))
            }
            PointMass { .. } => 1.0,
        }
    }

    /// Left limit `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            PointMass { at } => {
                if x > at {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.cdf(x),
        }
    }

    /// Inverse distribution function on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile requires 0 < u < 1, got {u}")));
        }
        let q = match *self {
            Uniform { lo, hi } => lo + (hi - lo) * u,
            Arcsin { lo, hi } => {
                let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                m + r * (PI * (u - 0.5)).sin()
            }
            Semicircle { lo, hi } => {
                let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                m + r * semicircle_standard_quantile(u)
            }
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => lo + (hi - lo) * incomplete_beta_inverse(u, alpha, beta)?,
            Power { n } => u.powf(1.0 / n),
            Triangular { lo, mode, hi } => {
                let split = (mode - lo) / (hi - lo);
                if u <= split {
                    lo + (u * (hi - lo) * (mode - lo)).sqrt()
                } else {
                    hi - ((1.0 - u) * (hi - lo) * (hi - mode)).sqrt()
                }
            }
            Cauchy { location, scale } => location + scale * (PI * (u - 0.5)).tan(),
            Normal { mean, sd } => {
                let mut t = -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u);
                // one Newton polish step against the erfc-based cdf
                let f = 0.5 * statrs::function::erf::erfc(-t / SQRT_2) - u;
                let dens = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
                if dens > 0.0 {
                    t -= f / dens;
                }
                mean + sd * t
            }
            PointMass { at } => at,
        };
        Ok(q)
    }

    /// A sampler that draws from this law.
    pub fn sampler(&self) -> Sampler {
        let kind = match *self {
            Beta {
                alpha,
                beta,
                lo,
                hi,
            } => SamplerKind::Beta(
                rand_distr::Beta::new(alpha, beta).expect("validated beta parameters"),
                lo,
                hi - lo,
            ),
            other => SamplerKind::Direct(other),
        };
        Sampler { kind }
    }

    /// `count` independent draws.
    pub fn sample(&self, rng: &mut RandomStream, count: usize) -> Vec<f64> {
        let s = self.sampler();
        (0..count).map(|_| s.draw(rng)).collect()
    }

    /// Order of the highest derivative available in closed form, if the
    /// transform has a closed form at all.
    pub fn closed_form_order(&self) -> Option<u32> {
        match self {
            PointMass { .. } | Cauchy { .. } | Uniform { .. } => Some(u32::MAX),
            Arcsin { .. } | Semicircle { .. } => Some(3),
            _ => None,
        }
    }

    pub fn stieltjes_closed_form(&self) -> Option<StieltjesClosedForm> {
        self.closed_form_order().map(|derivative_order| StieltjesClosedForm {
            spec: *self,
            derivative_order,
        })
    }

    /// Whether `z` lies on the closed support hull.
    pub fn on_support(&self, z: ComplexPoint) -> bool {
        if z.im != 0.0 {
            return false;
        }
        let (lo, hi) = self.support();
        z.re >= lo && z.re <= hi
    }

    fn check_off_support(&self, z: ComplexPoint) -> Result<()> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(domain("Stieltjes transform needs a finite point"));
        }
        if self.on_support(z) {
            return Err(Error::OnSupport {
                re: z.re,
                im: z.im,
                what: self.name().to_string(),
            });
        }
        Ok(())
    }

    /// `order`-th derivative of `S(F, z) = ∫ (z - x)^-1 F(dx)`. Uses the
    /// closed form where cataloged and quadrature otherwise.
    pub fn stieltjes(&self, z: ComplexPoint, order: u32) -> Result<Complex64> {
        self.check_off_support(z)?;
        match self.stieltjes_closed_form() {
            Some(cf) if order <= cf.derivative_order => cf.evaluate(z, order),
            _ => self.stieltjes_quadrature(z, order),
        }
    }

    /// Transform derivative by quadrature of `(-1)^k k! (z - x)^(-k-1)`
    /// against the density.
    pub fn stieltjes_quadrature(&self, z: ComplexPoint, order: u32) -> Result<Complex64> {
        self.check_off_support(z)?;
        let zc = z.to_complex();
        let k = order as i32;
        let sign_fact = if order % 2 == 0 { 1.0 } else { -1.0 } * factorial(order);
        if let PointMass { at } = *self {
            return Ok((zc - at).powi(-(k + 1)) * sign_fact);
        }
        let rule = TanhSinh::with_tolerance(1e-15, 1e-13);
        let (lo, hi) = self.support();
        let value = if lo.is_finite() {
            rule.integrate_with_distances(
                |x: f64, dl: f64, dh: f64| {
                    (zc - x).powi(-(k + 1)) * self.pdf_with_distances(x, dl, dh)
                },
                lo,
                hi,
            )
            .value
        } else {
            let kernel = |x: f64| (zc - x).powi(-(k + 1)) * self.pdf(x);
            let (c_lo, c_hi) = self.core_range();
            let mut cuts = vec![c_lo, c_hi];
            if z.re > c_lo && z.re < c_hi {
                cuts.insert(1, z.re);
            }
            let mut total = rule.integrate(kernel, f64::NEG_INFINITY, cuts[0]).value
                + rule.integrate(kernel, *cuts.last().unwrap(), f64::INFINITY).value;
            for w in cuts.windows(2) {
                total += rule.integrate(kernel, w[0], w[1]).value;
            }
            total
        };
        Ok(value * sign_fact)
    }

    /// A finite interval carrying the bulk of an unbounded law.
    fn core_range(&self) -> (f64, f64) {
        match *self {
            Normal { mean, sd } => (mean - 8.0 * sd, mean + 8.0 * sd),
            Cauchy { location, scale } => (location - 50.0 * scale, location + 50.0 * scale),
            _ => self.support(),
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

fn semicircle_standard_quantile(u: f64) -> f64 {
    let cdf = |t: f64| 0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) * FRAC_1_PI;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut t = (PI * (u - 0.5)).sin();
    for _ in 0..100 {
        let f = cdf(t) - u;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let dens = 2.0 * FRAC_1_PI * (1.0 - t * t).max(0.0).sqrt();
        let newton = t - f / dens;
        t = if dens > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-16 {
            break;
        }
    }
    t
}

/// Draws from one base law.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Direct(DistributionSpec),
    Beta(rand_distr::Beta<f64>, f64, f64),
}

impl Sampler {
    #[inline]
    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        match &self.kind {
            SamplerKind::Beta(b, lo, len) => lo + len * b.sample(rng),
            SamplerKind::Direct(spec) => match *spec {
                Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
                Arcsin { lo, hi } => {
                    let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    m + r * (PI * (rng.uniform() - 0.5)).sin()
                }
                Semicircle { lo, hi } => {
                    // x-coordinate of a uniform point in the disk
                    let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    let radius = rng.uniform().sqrt();
                    let angle = 2.0 * PI * rng.uniform();
                    m + r * radius * angle.cos()
                }
                Power { n } => rng.uniform().powf(1.0 / n),
                Normal { mean, sd } => {
                    let z: f64 = StandardNormal.sample(rng);
                    mean + sd * z
                }
                PointMass { at } => at,
                Triangular { .. } | Cauchy { .. } => spec
                    .quantile(rng.uniform())
                    .expect("uniform draw lies in (0, 1)"),
                Beta { .. } => unreachable!("beta uses the dedicated sampler"),
            },
        }
    }
}

/// Closed-form Stieltjes transform of a cataloged law, with hand-derived
/// derivatives up to `derivative_order`.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesClosedForm {
    pub spec: DistributionSpec,
    pub derivative_order: u32,
}

impl StieltjesClosedForm {
    pub fn evaluate(&self, z: ComplexPoint, order: u32) -> Result<Complex64> {
        self.spec.check_off_support(z)?;
        if order > self.derivative_order {
            return Err(domain(format!(
                "closed form for {} only covers derivatives up to order {}",
                self.spec.name(),
                self.derivative_order
            )));
        }
        let zc = z.to_complex();
        let k = order as i32;
        let value = match self.spec {
            PointMass { at } => pole(zc - at, order),
            Cauchy { location, scale } => {
                // upper half-plane: 1 / (z - location + i scale)
                let shift = if z.im > 0.0 { scale } else { -scale };
                pole(zc - Complex64::new(location, -shift), order)
            }
            Uniform { lo, hi } => {
                let (za, zb) = (zc - lo, zc - hi);
                if order == 0 {
                    (za / zb).ln() / (hi - lo)
                } else {
                    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
                    (za.powi(-k) - zb.powi(-k)) * (sign * factorial(order - 1) / (hi - lo))
                }
            }
            Arcsin { lo, hi } => {
                let (w, r2, root) = centered(zc, lo, hi);
                match order {
                    0 => root.inv(),
                    1 => -w / root.powi(3),
                    2 => (w * w * 2.0 + r2) / root.powi(5),
                    _ => -(w * 3.0) * (w * w * 2.0 + 3.0 * r2) / root.powi(7),
                }
            }
            Semicircle { lo, hi } => {
                let (w, _, root) = centered(zc, lo, hi);
                match order {
                    0 => 2.0 / (w + root),
                    1 => -2.0 / (root * (w + root)),
                    2 => root.powi(-3) * 2.0,
                    _ => -(w * 6.0) / root.powi(5),
                }
            }
            _ => unreachable!("no closed form"),
        };
        Ok(value)
    }
}

/// `(-1)^k k! / u^(k+1)`
fn pole(u: Complex64, order: u32) -> Complex64 {
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    u.powi(-(order as i32 + 1)) * (sign * factorial(order))
}

/// Centre offset `w = z - m`, squared half-width, and the branch of
/// `sqrt((z - lo)(z - hi))` that behaves like `z` at infinity.
fn centered(z: Complex64, lo: f64, hi: f64) -> (Complex64, f64, Complex64) {
    let m = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let root = (z - lo).sqrt() * (z - hi).sqrt();
    (z - m, r * r, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn catalog() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::uniform(-1.0, 3.0).unwrap(),
            DistributionSpec::arcsin(-1.0, 1.0).unwrap(),
            DistributionSpec::arcsin(0.0, 1.0).unwrap(),
            DistributionSpec::semicircle(-1.0, 1.0).unwrap(),
            DistributionSpec::beta(2.0, 3.0).unwrap(),
            DistributionSpec::beta(0.5, 0.5).unwrap(),
            DistributionSpec::beta_on(2.0, 2.0, -1.0, 1.0).unwrap(),
            DistributionSpec::power(3.0).unwrap(),
            DistributionSpec::power(1.5).unwrap(),
            DistributionSpec::triangular(0.0, 0.3, 1.0).unwrap(),
            DistributionSpec::cauchy(0.5, 2.0).unwrap(),
            DistributionSpec::normal(1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn validation() {
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::beta(0.0, 1.0).is_err());
        assert!(DistributionSpec::cauchy(0.0, 0.0).is_err());
        assert!(DistributionSpec::normal(0.0, -1.0).is_err());
        assert!(DistributionSpec::power(0.0).is_err());
        assert!(DistributionSpec::power(0.5).is_err());
        assert!(DistributionSpec::triangular(0.0, 2.0, 1.0).is_err());
        assert!(DistributionSpec::point_mass(f64::NAN).is_err());
    }

    #[test]
    fn pdf_examples() {
        assert_eq!(DistributionSpec::uniform(0.0, 1.0).unwrap().pdf(0.3), 1.0);
        let semi = DistributionSpec::semicircle(-1.0, 1.0).unwrap();
        assert!((semi.pdf(0.0) - 2.0 / PI).abs() < 1e-15);
        let ps = DistributionSpec::beta_on(2.0, 2.0, -1.0, 1.0).unwrap();
        assert!((ps.pdf(0.0) - 0.75).abs() < 1e-14);
        assert!((ps.pdf(0.5) - 3.0 * (1.0 - 0.25) / 4.0).abs() < 1e-14);
        assert!((DistributionSpec::power(2.0).unwrap().pdf(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(DistributionSpec::uniform(0.0, 1.0).unwrap().pdf(1.5), 0.0);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(DistributionSpec::uniform(0.0, 1.0).unwrap().cdf(0.25), 0.25);
        for n in [1.0, 2.0, 3.5] {
            let p = DistributionSpec::power(n).unwrap();
            for x in [0.1, 0.5, 0.9] {
                assert!((p.cdf(x) - x.powf(n)).abs() < 1e-15);
            }
        }
        let pm = DistributionSpec::point_mass(2.0).unwrap();
        assert_eq!(pm.cdf(2.0), 1.0);
        assert_eq!(pm.cdf_left(2.0), 0.0);
        assert_eq!(pm.cdf(1.999), 0.0);
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in catalog() {
            let (lo, hi) = d.support();
            let total = if lo.is_finite() {
                TanhSinh::default()
                    .integrate_with_distances(|x, a, b| d.pdf_with_distances(x, a, b), lo, hi)
                    .value
            } else {
                integrate(|x| d.pdf(x), lo, hi)
            };
            assert!((total - 1.0).abs() < 1e-8, "{d:?}: {total}");
        }
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        for d in catalog() {
            let (lo, _) = d.support();
            for u in [0.1, 0.4, 0.77] {
                let x = d.quantile(u).unwrap();
                let area = if lo.is_finite() {
                    TanhSinh::default()
                        .integrate_with_distances(|t, a, _| d.pdf_with_distances(t, a, d.support().1 - t), lo, x)
                        .value
                } else {
                    integrate(|t| d.pdf(t), lo, x)
                };
                assert!((area - d.cdf(x)).abs() < 1e-8, "{d:?} at {x}: {area} vs {}", d.cdf(x));
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in catalog() {
            for u in [1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-6] {
                let x = d.quantile(u).unwrap();
                assert!((d.cdf(x) - u).abs() < 1e-10, "{d:?} u={u}");
            }
        }
        assert_eq!(DistributionSpec::cauchy(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.0);
        assert!(DistributionSpec::uniform(0.0, 1.0).unwrap().quantile(1.0).is_err());
        assert!(DistributionSpec::uniform(0.0, 1.0).unwrap().quantile(0.0).is_err());
    }

    #[test]
    fn cdf_inverts_quantile_on_interior() {
        for d in catalog() {
            for x in [-0.5, 0.05, 0.35, 0.6, 0.93, 2.0] {
                let u = d.cdf(x);
                if u <= 1e-9 || u >= 1.0 - 1e-9 {
                    continue;
                }
                let back = d.quantile(u).unwrap();
                assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "{d:?} x={x}: {back}");
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let mut rng = RandomStream::new(5);
        assert_eq!(
            DistributionSpec::point_mass(3.0).unwrap().sample(&mut rng, 4),
            vec![3.0; 4]
        );
        let n = 1_000_000;
        let mean = |d: DistributionSpec, seed| {
            let v = d.sample(&mut RandomStream::new(seed), n);
            v.iter().sum::<f64>() / n as f64
        };
        assert!((mean(DistributionSpec::uniform(0.0, 1.0).unwrap(), 1) - 0.5).abs() < 0.002);
        assert!(mean(DistributionSpec::arcsin(-1.0, 1.0).unwrap(), 2).abs() < 0.005);
        assert!(mean(DistributionSpec::semicircle(-1.0, 1.0).unwrap(), 3).abs() < 0.005);
        assert!((mean(DistributionSpec::beta(2.0, 3.0).unwrap(), 4) - 0.4).abs() < 0.002);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DistributionSpec::normal(0.0, 1.0).unwrap();
        let a = d.sample(&mut RandomStream::new(9), 100);
        let b = d.sample(&mut RandomStream::new(9), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn stieltjes_examples() {
        let semi = DistributionSpec::semicircle(-1.0, 1.0).unwrap();
        let s = semi.stieltjes(ComplexPoint::real(2.0), 0).unwrap();
        assert!((s.re - 0.535_898_384_862_245_4).abs() < 1e-12 && s.im == 0.0);

        let c = DistributionSpec::cauchy(0.0, 1.0).unwrap();
        let z = ComplexPoint::new(0.3, 2.0);
        let s = c.stieltjes(z, 0).unwrap();
        let expected = 1.0 / (z.to_complex() + Complex64::new(0.0, 1.0));
        assert!((s - expected).norm() < 1e-15);

        let arc = DistributionSpec::arcsin(-1.0, 1.0).unwrap();
        let z = ComplexPoint::new(0.0, 2.0);
        let closed = arc.stieltjes(z, 0).unwrap();
        let quad = arc.stieltjes_quadrature(z, 0).unwrap();
        // 1 / sqrt(z^2 - 1) at 2i on the branch ~ 1/z: -i / sqrt(5)
        assert!((closed - Complex64::new(0.0, -1.0 / 5f64.sqrt())).norm() < 1e-14);
        assert!((closed - quad).norm() < 1e-10);
    }

    #[test]
    fn on_support_is_rejected() {
        let u = DistributionSpec::uniform(-1.0, 1.0).unwrap();
        assert!(matches!(
            u.stieltjes(ComplexPoint::real(1.0), 0),
            Err(Error::OnSupport { .. })
        ));
        assert!(u.stieltjes(ComplexPoint::real(0.2), 0).is_err());
        let n = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!(n.stieltjes(ComplexPoint::real(40.0), 0).is_err());
    }

    fn test_grid() -> Vec<ComplexPoint> {
        let mut grid = Vec::new();
        for re in [-3.0, -1.4, 1.3, 2.0, 5.0] {
            grid.push(ComplexPoint::real(re));
        }
        for re in [-2.0, -0.5, 0.0, 0.4, 1.0, 2.5] {
            for im in [0.5, 1.0, 3.0] {
                grid.push(ComplexPoint::new(re, im));
                grid.push(ComplexPoint::new(re, -im));
            }
        }
        grid
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let members = [
            DistributionSpec::uniform(-1.0, 1.0).unwrap(),
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::arcsin(-1.0, 1.0).unwrap(),
            DistributionSpec::arcsin(0.0, 1.0).unwrap(),
            DistributionSpec::semicircle(-1.0, 1.0).unwrap(),
            DistributionSpec::cauchy(0.2, 0.7).unwrap(),
            DistributionSpec::point_mass(0.25).unwrap(),
        ];
        for d in members {
            let cf = d.stieltjes_closed_form().unwrap();
            for z in test_grid() {
                if d.on_support(z) {
                    continue;
                }
                for order in 0..=3 {
                    let a = cf.evaluate(z, order).unwrap();
                    let b = d.stieltjes_quadrature(z, order).unwrap();
                    assert!(
                        (a - b).norm() <= 1e-8 * a.norm().max(1e-3),
                        "{d:?} z={z:?} order {order}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn herglotz_and_conjugation() {
        for d in catalog() {
            for z in test_grid() {
                if d.on_support(z) || z.im <= 0.0 {
                    continue;
                }
                let s = d.stieltjes(z, 0).unwrap();
                assert!(s.im < 0.0, "{d:?} at {z:?}: {s}");
                let s_bar = d.stieltjes(z.conj(), 0).unwrap();
                assert!((s_bar - s.conj()).norm() < 1e-10 * s.norm().max(1.0));
            }
        }
    }

    #[test]
    fn large_z_behaves_like_inverse() {
        for d in catalog() {
            if d.support().0.is_infinite() {
                continue;
            }
            for z in [ComplexPoint::real(1e6), ComplexPoint::new(0.0, 1e6)] {
                let s = d.stieltjes(z, 0).unwrap();
                let inv = 1.0 / z.to_complex();
                assert!((s - inv).norm() <= 1e-4 * inv.norm(), "{d:?}");
            }
        }
        let c = DistributionSpec::cauchy(0.0, 1.0).unwrap();
        let z = ComplexPoint::new(1e6, 1e6);
        let inv = 1.0 / z.to_complex();
        assert!((c.stieltjes(z, 0).unwrap() - inv).norm() <= 1e-4 * inv.norm());
    }
}
