//! Directed power mixtures and two-sided power (TSP) mixtures of two
//! independent base laws.
//!
//! Given `X1`, `X2` and a weight `W` on `[0, 1]` independent of both:
//!
//! * the directed mixture is `Z1 = X1 + W (X2 - X1)`, anchored at `X1`;
//! * the TSP mixture is `Z2 = Y1 + W (Y2 - Y1)` with `Y1 = min(X1, X2)` and
//!   `Y2 = max(X1, X2)`.
//!
//! With `W ~ power(n)` the conditional law given `(X1, X2)` has distribution
//! function `((z - y1) / (y2 - y1))^n` in the TSP case.

use serde::Serialize;

use crate::basedist::DistributionSpec;
use crate::error::{domain, Error, Result};
use crate::quadrature::TanhSinh;
use crate::rng::{par_fill, RandomStream};
use crate::specfun::{beta, hyp2f1_1_n, incomplete_beta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Directed,
    Undirected,
}

/// Law of the mixing weight `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// Power law with distribution function `w^n`.
    Power(f64),
    /// Any law supported in `[0, 1]`.
    Custom(DistributionSpec),
}

impl Weight {
    pub fn as_distribution(&self) -> DistributionSpec {
        match *self {
            Weight::Power(n) => DistributionSpec::Power { n },
            Weight::Custom(d) => d,
        }
    }

    pub fn power_index(&self) -> Option<f64> {
        match *self {
            Weight::Power(n) => Some(n),
            Weight::Custom(_) => None,
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        self.as_distribution().cdf(u)
    }

    /// Density at `u` given `u` and `1 - u` computed independently.
    pub fn pdf_pair(&self, u: f64, v: f64) -> f64 {
        let d = self.as_distribution();
        if d.support() == (0.0, 1.0) {
            if u < 0.0 || v < 0.0 {
                return 0.0;
            }
            d.pdf_with_distances(u, u, v)
        } else {
            d.pdf(u)
        }
    }

    /// `E W^j`.
    pub fn raw_moment(&self, j: u32) -> f64 {
        match self.as_distribution() {
            DistributionSpec::Power { n } => n / (n + j as f64),
            DistributionSpec::PointMass { at } => at.powi(j as i32),
            DistributionSpec::Beta {
                alpha,
                beta,
                lo,
                hi,
            } => {
                // E (lo + (hi - lo) B)^j by the binomial expansion
                let len = hi - lo;
                let mut total = 0.0;
                let mut beta_moment = 1.0;
                for r in 0..=j {
                    if r > 0 {
                        let rr = (r - 1) as f64;
                        beta_moment *= (alpha + rr) / (alpha + beta + rr);
                    }
                    total += binomial(j, r)
                        * lo.powi((j - r) as i32)
                        * len.powi(r as i32)
                        * beta_moment;
                }
                total
            }
            DistributionSpec::Uniform { lo, hi } => {
                let k = j as f64 + 1.0;
                (hi.powf(k) - lo.powf(k)) / (k * (hi - lo))
            }
            other => {
                let (lo, hi) = other.support();
                TanhSinh::default()
                    .integrate_with_distances(
                        |x: f64, a, b| x.powi(j as i32) * other.pdf_with_distances(x, a, b),
                        lo,
                        hi,
                    )
                    .value
            }
        }
    }

    /// `E (W - 1/2)^i` by expanding over the raw moments.
    pub fn centered_half_moment(&self, i: u32) -> f64 {
        (0..=i)
            .map(|j| binomial(i, j) * self.raw_moment(j) * (-0.5f64).powi((i - j) as i32))
            .sum()
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// A mixture of two independent base laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub family: Family,
    pub x1: DistributionSpec,
    pub x2: DistributionSpec,
    pub weight: Weight,
}

impl MixtureSpec {
    /// TSP mixture with `W ~ power(n)`.
    pub fn tsp(n: f64, x1: DistributionSpec, x2: DistributionSpec) -> Result<Self> {
        Self {
            family: Family::Undirected,
            x1,
            x2,
            weight: Weight::Power(n),
        }
        .validated()
    }

    /// Directed mixture with `W ~ power(n)`.
    pub fn directed(n: f64, x1: DistributionSpec, x2: DistributionSpec) -> Result<Self> {
        Self {
            family: Family::Directed,
            x1,
            x2,
            weight: Weight::Power(n),
        }
        .validated()
    }

    /// TSP mixture with an arbitrary weight law on `[0, 1]`.
    pub fn tsp_with_weight(
        w: DistributionSpec,
        x1: DistributionSpec,
        x2: DistributionSpec,
    ) -> Result<Self> {
        Self {
            family: Family::Undirected,
            x1,
            x2,
            weight: Weight::Custom(w),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.x1.validated()?;
        self.x2.validated()?;
        match self.weight {
            Weight::Power(n) => {
                if !n.is_finite() || n < 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "power parameter must be at least 1, got {n}"
                    )));
                }
            }
            Weight::Custom(w) => {
                w.validated()?;
                if self.family == Family::Directed {
                    return Err(Error::InvalidSpec(
                        "a custom weight law is only available for tsp mixtures".into(),
                    ));
                }
                let (lo, hi) = w.support();
                if lo < 0.0 || hi > 1.0 {
                    return Err(Error::InvalidSpec(
                        "weight law must be supported in [0, 1]".into(),
                    ));
                }
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> Option<f64> {
        self.weight.power_index()
    }

    /// Convex hull of the support of the mixture.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.x1.support();
        let (c, d) = self.x2.support();
        (a.min(c), b.max(d))
    }

    /// Same mixture with both components translated by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            x1: self.x1.shifted(c),
            x2: self.x2.shifted(c),
            ..*self
        }
    }

    pub fn has_finite_moments(&self) -> bool {
        self.x1.has_finite_moments() && self.x2.has_finite_moments()
    }

    /// The law of the mixture when it is known in closed form: identical
    /// Cauchy components (stable under convex combination) and identical
    /// point masses.
    pub fn known_law(&self) -> Option<DistributionSpec> {
        use DistributionSpec::*;
        match (self.x1, self.x2) {
            (PointMass { at: a }, PointMass { at: b }) if a == b => Some(self.x1),
            (Cauchy { .. }, Cauchy { .. }) if self.x1 == self.x2 => {
                let exchangeable = self.family == Family::Directed || self.n() == Some(1.0);
                exchangeable.then_some(self.x1)
            }
            _ => None,
        }
    }

    /// Conditional law given `X1 = x1`, `X2 = x2`.
    pub fn conditional(&self, x1: f64, x2: f64) -> ConditionalLaw {
        ConditionalLaw {
            x1,
            x2,
            family: self.family,
            weight: self.weight,
        }
    }

    /// One draw of the mixture.
    pub fn draw(&self, samplers: &MixtureSamplers, rng: &mut RandomStream) -> f64 {
        let x1 = samplers.x1.draw(rng);
        let x2 = samplers.x2.draw(rng);
        let w = samplers.w.draw(rng);
        match self.family {
            Family::Undirected => tsp_point(x1, x2, w),
            Family::Directed => directed_point(x1, x2, w),
        }
    }

    pub fn samplers(&self) -> MixtureSamplers {
        MixtureSamplers {
            x1: self.x1.sampler(),
            x2: self.x2.sampler(),
            w: self.weight.as_distribution().sampler(),
        }
    }

    /// `count` draws from a single stream.
    pub fn sample(&self, rng: &mut RandomStream, count: usize) -> Vec<f64> {
        let s = self.samplers();
        (0..count).map(|_| self.draw(&s, rng)).collect()
    }

    /// `count` draws generated in parallel; the result depends only on
    /// `seed`.
    pub fn sample_par(&self, seed: u64, count: usize) -> Vec<f64> {
        let s = self.samplers();
        par_fill(seed, count, |rng| self.draw(&s, rng))
    }
}

/// Cached samplers for the three independent inputs of a mixture.
#[derive(Debug, Clone)]
pub struct MixtureSamplers {
    pub x1: crate::basedist::Sampler,
    pub x2: crate::basedist::Sampler,
    pub w: crate::basedist::Sampler,
}

/// `Y1 + w (Y2 - Y1)`.
#[inline]
pub fn tsp_point(x1: f64, x2: f64, w: f64) -> f64 {
    let (y1, y2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    y1 + w * (y2 - y1)
}

/// `(X1 + X2) / 2 + (w - 1/2) |X1 - X2|`.
#[inline]
pub fn tsp_point_midrange(x1: f64, x2: f64, w: f64) -> f64 {
    0.5 * (x1 + x2) + (w - 0.5) * (x1 - x2).abs()
}

/// `X1 + w (X2 - X1)`.
#[inline]
pub fn directed_point(x1: f64, x2: f64, w: f64) -> f64 {
    x1 + w * (x2 - x1)
}

/// TSP draws; panics if `spec` is directed.
pub fn sample_tsp(spec: &MixtureSpec, rng: &mut RandomStream, count: usize) -> Vec<f64> {
    assert_eq!(spec.family, Family::Undirected, "sample_tsp needs a tsp mixture");
    spec.sample(rng, count)
}

/// TSP draws through the midrange representation, consuming the stream in
/// the same order as [`sample_tsp`].
pub fn sample_tsp_midrange(spec: &MixtureSpec, rng: &mut RandomStream, count: usize) -> Vec<f64> {
    let s = spec.samplers();
    (0..count)
        .map(|_| {
            let x1 = s.x1.draw(rng);
            let x2 = s.x2.draw(rng);
            let w = s.w.draw(rng);
            tsp_point_midrange(x1, x2, w)
        })
        .collect()
}

/// Directed draws; panics if `spec` is a tsp mixture.
pub fn sample_directed(spec: &MixtureSpec, rng: &mut RandomStream, count: usize) -> Vec<f64> {
    assert_eq!(spec.family, Family::Directed, "sample_directed needs a directed mixture");
    spec.sample(rng, count)
}

/// Law of the mixture given both component values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalLaw {
    pub x1: f64,
    pub x2: f64,
    pub family: Family,
    pub weight: Weight,
}

impl ConditionalLaw {
    pub fn power(family: Family, n: f64, x1: f64, x2: f64) -> Result<Self> {
        if !n.is_finite() || n < 1.0 {
            return Err(domain(format!("power parameter must be at least 1, got {n}")));
        }
        if !x1.is_finite() || !x2.is_finite() {
            return Err(domain("component values must be finite"));
        }
        Ok(Self {
            x1,
            x2,
            family,
            weight: Weight::Power(n),
        })
    }

    pub fn cdf(&self, z: f64) -> f64 {
        conditional_cdf(self, z)
    }

    /// One conditional draw.
    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        let w = self.weight.as_distribution().sampler().draw(rng);
        match self.family {
            Family::Undirected => tsp_point(self.x1, self.x2, w),
            Family::Directed => directed_point(self.x1, self.x2, w),
        }
    }
}

/// Conditional distribution function.
pub fn conditional_cdf(law: &ConditionalLaw, z: f64) -> f64 {
    let (x1, x2) = (law.x1, law.x2);
    if x1 == x2 {
        return if z >= x1 { 1.0 } else { 0.0 };
    }
    let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    if z < lo {
        return 0.0;
    }
    if z >= hi {
        return 1.0;
    }
    match law.family {
        Family::Undirected => law.weight.cdf((z - lo) / (hi - lo)),
        Family::Directed if x1 < x2 => law.weight.cdf((z - x1) / (x2 - x1)),
        Family::Directed => {
            // P(x1 + W (x2 - x1) <= z) = P(W >= (x1 - z) / (x1 - x2))
            let u = (x1 - z) / (x1 - x2);
            1.0 - law.weight.as_distribution().cdf_left(u)
        }
    }
}

/// Density of the TSP mixture of two uniform(0, 1) components with
/// `W ~ power(n)`.
pub fn tsp_pdf_uniform(n: f64, z: f64) -> Result<f64> {
    if !n.is_finite() || n <= 0.0 {
        return Err(domain(format!("power parameter must be positive, got {n}")));
    }
    if !(z > 0.0 && z < 1.0) {
        return Ok(0.0);
    }
    if n == 1.0 {
        return Ok(-2.0 * (1.0 - z) * (-z).ln_1p() - 2.0 * z * z.ln());
    }
    // (1 - z^(n-1)) / (n - 1) without cancellation near n = 1
    let ratio = -((n - 1.0) * z.ln()).exp_m1() / (n - 1.0);
    Ok(2.0 * n * z * ratio + 2.0 * (1.0 - z) * z.powf(n) * hyp2f1_1_n(n, z)?)
}

/// Density of the TSP mixture of two uniform(0, 1) components with
/// `W ~ Beta(n, m)`.
pub fn tsp_pdf_uniform_betaweight(n: f64, m: f64, z: f64) -> Result<f64> {
    if !(n.is_finite() && m.is_finite()) || n <= 1.0 || m <= 1.0 {
        return Err(domain(format!("need n > 1 and m > 1, got n = {n}, m = {m}")));
    }
    if !(z > 0.0 && z < 1.0) {
        return Ok(0.0);
    }
    let b = beta(n, m)?;
    let left = beta(n - 1.0, m)? / b * 2.0 * z * (1.0 - incomplete_beta(z, n - 1.0, m)?);
    let right = beta(n, m - 1.0)? / b * 2.0 * (1.0 - z) * incomplete_beta(z, n, m - 1.0)?;
    Ok(left + right)
}

/// Density of the uniform-component TSP mixture given `W = w`: triangular
/// on `[0, 1]` with mode `w`.
pub fn conditional_pdf_given_w(w: f64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(domain(format!("weight must lie in [0, 1], got {w}")));
    }
    if !(z > 0.0 && z < 1.0) {
        return Ok(0.0);
    }
    Ok(if z < w {
        2.0 * z / w
    } else if z > w {
        2.0 * (1.0 - z) / (1.0 - w)
    } else {
        2.0
    })
}

/// Density of the mixture at `z` by quadrature over the component laws.
///
/// Writing the lower component value as `z - s` and the upper one as
/// `z + t`, the conditional density at `z` is `f_W(u) / (s + t)` where `u`
/// is `s / (s + t)` when the weight is measured from the lower value and
/// `t / (s + t)` otherwise. The two orderings of `(X1, X2)` are integrated
/// separately over the quadrant `s, t > 0`, so component support ends and
/// the corner `s = t = 0` sit on panel boundaries.
pub fn mixture_pdf_numeric(spec: &MixtureSpec, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(domain("density needs a finite point"));
    }
    if !spec.weight.as_distribution().has_density() {
        return Err(domain("weight law has no density"));
    }
    let from_lower = |s: f64, t: f64| {
        let r = s + t;
        spec.weight.pdf_pair(s / r, t / r) / r
    };
    let from_upper = |s: f64, t: f64| {
        let r = s + t;
        spec.weight.pdf_pair(t / r, s / r) / r
    };
    // X1 below z, X2 above
    let a = ordered_term(&spec.x1, &spec.x2, z, &from_lower)?;
    // X2 below z, X1 above
    let b = match spec.family {
        Family::Undirected => ordered_term(&spec.x2, &spec.x1, z, &from_lower)?,
        Family::Directed => ordered_term(&spec.x2, &spec.x1, z, &from_upper)?,
    };
    Ok((a + b).max(0.0))
}

fn inner_rule() -> TanhSinh {
    TanhSinh::with_tolerance(1e-13, 1e-11)
}

/// `∫∫ f_L(z - s) f_U(z + t) k(s, t) ds dt` over `s, t > 0`.
fn ordered_term(
    lower: &DistributionSpec,
    upper: &DistributionSpec,
    z: f64,
    kernel: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    let (lo_l, hi_l) = lower.support();
    let (lo_u, hi_u) = upper.support();
    // largest offsets that keep each component inside its support
    let s_max = z - lo_l;
    let t_max = hi_u - z;
    if s_max <= 0.0 || t_max <= 0.0 {
        return Ok(0.0);
    }
    let density_lower = |s: f64, s_rest: f64| {
        let x = z - s;
        lower.pdf_with_distances(x, s_rest, hi_l - z + s)
    };
    let density_upper = |t: f64, t_rest: f64| {
        let x = z + t;
        upper.pdf_with_distances(x, z + t - lo_u, t_rest)
    };
    let value = match (lower, upper) {
        (DistributionSpec::PointMass { at: a }, DistributionSpec::PointMass { at: b }) => {
            kernel(z - a, b - z)
        }
        (DistributionSpec::PointMass { at }, _) => {
            let s0 = z - at;
            half_line(|t, t_rest| density_upper(t, t_rest) * kernel(s0, t), t_max)
        }
        (_, DistributionSpec::PointMass { at }) => {
            let t0 = at - z;
            half_line(|s, s_rest| density_lower(s, s_rest) * kernel(s, t0), s_max)
        }
        _ => half_line(
            |s, s_rest| {
                let fl = density_lower(s, s_rest);
                if fl == 0.0 {
                    return 0.0;
                }
                fl * half_line(|t, t_rest| density_upper(t, t_rest) * kernel(s, t), t_max)
            },
            s_max,
        ),
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NotConverged { error: f64::NAN })
    }
}

/// `∫_0^len f(x, len - x) dx`, `len` possibly infinite.
fn half_line(f: impl Fn(f64, f64) -> f64, len: f64) -> f64 {
    let rule = inner_rule();
    if len.is_finite() {
        rule.integrate_with_distances(|_, a: f64, b: f64| f(a, b), 0.0, len)
            .value
    } else {
        rule.integrate(|x: f64| f(x, f64::INFINITY), 0.0, f64::INFINITY)
            .value
    }
}
