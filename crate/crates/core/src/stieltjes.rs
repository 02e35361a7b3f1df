//! Stieltjes transform identities: residual checks for the partial
//! fraction identity, the derivative relation for directed mixtures, the
//! iid fixed-point equation and the third-derivative relation for TSP
//! mixtures.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basedist::DistributionSpec;
use crate::error::{domain, Error, Result};
use crate::mixture::{binomial, mixture_pdf_numeric, Family, MixtureSpec};
use crate::quadrature::TanhSinh;
use crate::rng::RandomStream;

/// A point of the complex plane at which transforms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
}

impl ComplexPoint {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// Distance to the real segment `[lo, hi]`.
    pub fn distance_to(self, lo: f64, hi: f64) -> f64 {
        let dx = if self.re < lo {
            lo - self.re
        } else if self.re > hi {
            self.re - hi
        } else {
            0.0
        };
        dx.hypot(self.im)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

/// Smallest distance from the supports at which identity checks evaluate.
pub const MIN_DISTANCE: f64 = 0.1;

/// Reject points on, or closer than [`MIN_DISTANCE`] to, any of `laws`.
pub fn check_point(z: ComplexPoint, laws: &[&DistributionSpec]) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain("evaluation point must be finite"));
    }
    for law in laws {
        if law.on_support(z) {
            return Err(Error::OnSupport {
                re: z.re,
                im: z.im,
                what: law.name().to_string(),
            });
        }
        let (lo, hi) = law.support();
        if lo.is_finite() && hi.is_finite() && z.distance_to(lo, hi) < MIN_DISTANCE {
            return Err(domain(format!(
                "point {}{:+}i is closer than {MIN_DISTANCE} to the support of {}",
                z.re,
                z.im,
                law.name()
            )));
        }
        if (!lo.is_finite() || !hi.is_finite()) && z.im.abs() < MIN_DISTANCE {
            return Err(domain(format!(
                "point {}{:+}i is closer than {MIN_DISTANCE} to the support of {}",
                z.re,
                z.im,
                law.name()
            )));
        }
    }
    Ok(())
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Relative residual of the partial-fraction identity
///
/// `-1/((z-x1)(x2-x1)^n) + (-1)^n/(n-1)! d^(n-1)/dx2^(n-1) [1/((z-x2)(x1-x2))]
///   = 1/((x1-z)(x2-z)^n)`,
///
/// scaled by `max(1, |T1| + |T2| + |RHS|)`. The derivative is taken from
/// the partial-fraction expansion.
pub fn lemma21_residual(x1: f64, x2: f64, z: f64, n: u32) -> Result<f64> {
    let (t1, t2, rhs) = lemma21_terms(x1, x2, z, n, lemma21_derivative)?;
    Ok((t1 + t2 - rhs).abs() / 1f64.max(t1.abs() + t2.abs() + rhs.abs()))
}

/// The three terms of the identity, with the derivative supplied by `deriv`.
pub fn lemma21_terms(
    x1: f64,
    x2: f64,
    z: f64,
    n: u32,
    deriv: impl Fn(f64, f64, f64, u32) -> f64,
) -> Result<(f64, f64, f64)> {
    if n == 0 {
        return Err(domain("identity needs n >= 1"));
    }
    if ![x1, x2, z].iter().all(|v| v.is_finite()) {
        return Err(domain("arguments must be finite"));
    }
    if x1 == x2 || x1 == z || x2 == z {
        return Err(domain("x1, x2 and z must be pairwise distinct"));
    }
    let ni = n as i32;
    let t1 = -1.0 / ((z - x1) * (x2 - x1).powi(ni));
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let t2 = sign / factorial(n - 1) * deriv(x1, x2, z, n - 1);
    let rhs = 1.0 / ((x1 - z) * (x2 - z).powi(ni));
    Ok((t1, t2, rhs))
}

/// `d^m/dx2^m [1/((z-x2)(x1-x2))] = m!/(z-x1) [(x1-x2)^(-m-1) - (z-x2)^(-m-1)]`.
pub fn lemma21_derivative(x1: f64, x2: f64, z: f64, m: u32) -> f64 {
    let p = -(m as i32) - 1;
    factorial(m) / (z - x1) * ((x1 - x2).powi(p) - (z - x2).powi(p))
}

/// Transform derivative `S^(order)(F_Z, z)` of a mixture law.
///
/// Known laws use their own transform; two point masses with an integer
/// power weight use the exact antiderivative; otherwise the kernel is
/// integrated against [`mixture_pdf_numeric`].
pub fn mixture_stieltjes(spec: &MixtureSpec, z: ComplexPoint, order: u32) -> Result<Complex64> {
    check_point(z, &[&spec.x1, &spec.x2])?;
    if let Some(law) = spec.known_law() {
        return law.stieltjes(z, order);
    }
    if let (DistributionSpec::PointMass { at: a }, DistributionSpec::PointMass { at: b }) =
        (spec.x1, spec.x2)
    {
        if let Some(n) = spec.n().filter(|n| n.fract() == 0.0 && *n <= 64.0) {
            let (start, end) = match spec.family {
                Family::Undirected => (a.min(b), a.max(b)),
                Family::Directed => (a, b),
            };
            return Ok(two_point_kernel(start, end, n as u32, z.to_complex(), order));
        }
    }
    let (lo, hi) = spec.support();
    let zc = z.to_complex();
    let k = order as i32;
    let scale = if order % 2 == 0 { 1.0 } else { -1.0 } * factorial(order);
    let failure = RefCell::new(None);
    let kernel = |x: f64| match mixture_pdf_numeric(spec, x) {
        Ok(f) => (zc - x).powi(-(k + 1)) * f,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let mut cuts: Vec<f64> = [spec.x1.support(), spec.x2.support()]
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|c| c.is_finite() && *c > lo && *c < hi)
        .collect();
    let bounded = lo.is_finite() && hi.is_finite();
    if !bounded {
        // keep the bulk of the unbounded components on finite panels
        for law in [spec.x1, spec.x2] {
            match law {
                DistributionSpec::Normal { mean, sd } => {
                    cuts.extend([mean - 8.0 * sd, mean, mean + 8.0 * sd])
                }
                DistributionSpec::Cauchy { location, scale } => cuts.extend([
                    location - 50.0 * scale,
                    location,
                    location + 50.0 * scale,
                ]),
                _ => {}
            }
        }
        if z.re.is_finite() {
            cuts.push(z.re);
        }
    }
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rule = TanhSinh::with_tolerance(1e-12, 1e-11);
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        total += rule.integrate(kernel, w[0], w[1]).value;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(total * scale)
}

/// `(-1)^m m! E (z - start - W (end - start))^(-m-1)` for `W ~ power(n)`,
/// integer `n`, by expanding `w^(n-1)` and integrating powers exactly.
fn two_point_kernel(start: f64, end: f64, n: u32, z: Complex64, order: u32) -> Complex64 {
    let m = order as i32 + 1;
    let d = end - start;
    let scale = if order % 2 == 0 { 1.0 } else { -1.0 } * factorial(order);
    if d == 0.0 {
        return (z - start).powi(-m) * scale;
    }
    // u = z - start - d w runs from c (w = 0) to e (w = 1)
    let c = z - start;
    let e = z - end;
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let p = j as i32 - m;
        let integral = if p == -1 {
            (c / e).ln()
        } else {
            (c.powi(p + 1) - e.powi(p + 1)) / (p + 1) as f64
        };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += c.powi((n - 1 - j) as i32) * integral * (sign * binomial(n - 1, j));
    }
    // w^(n-1) dw = ((c - u)/d)^(n-1) du / d
    total * (scale * n as f64 / d.powi(n as i32))
}

/// `(1/n) S^(n)(F_Z1, z) + S(F_X1, z) S^(n-1)(F_X2, z)` for a directed
/// mixture with integer power `n`; zero when the derivative relation holds.
pub fn lemma22_residual(spec: &MixtureSpec, z: ComplexPoint) -> Result<Complex64> {
    if spec.family != Family::Directed {
        return Err(domain("the derivative relation concerns directed mixtures"));
    }
    let n = integer_power(spec)?;
    check_point(z, &[&spec.x1, &spec.x2])?;
    let lhs = mixture_stieltjes(spec, z, n)? / n as f64;
    let rhs = -spec.x1.stieltjes(z, 0)? * spec.x2.stieltjes(z, n - 1)?;
    Ok(lhs - rhs)
}

fn integer_power(spec: &MixtureSpec) -> Result<u32> {
    match spec.n() {
        Some(n) if n.fract() == 0.0 && (1.0..=16.0).contains(&n) => Ok(n as u32),
        _ => Err(domain("an integer power weight between 1 and 16 is required")),
    }
}

/// `-S'(F_Z1, z) - S(F_X1, z) S(F_X2, z)` for the directed mixture with
/// `n = 1`.
pub fn van_assche_residual(
    x1: &DistributionSpec,
    x2: &DistributionSpec,
    z: ComplexPoint,
) -> Result<Complex64> {
    let spec = MixtureSpec::directed(1.0, *x1, *x2)?;
    check_point(z, &[x1, x2])?;
    let lhs = -mixture_stieltjes(&spec, z, 1)?;
    Ok(lhs - x1.stieltjes(z, 0)? * x2.stieltjes(z, 0)?)
}

/// `-S'(F_Z1, z) - S(F_X, z)^2` for the directed mixture of two copies of
/// `x` with `n = 2`.
pub fn eq31_residual(x: &DistributionSpec, z: ComplexPoint) -> Result<Complex64> {
    let spec = MixtureSpec::directed(2.0, *x, *x)?;
    check_point(z, &[x])?;
    let lhs = -mixture_stieltjes(&spec, z, 1)?;
    let s = x.stieltjes(z, 0)?;
    Ok(lhs - s * s)
}

/// `∫∫ f1(x1) f2(x2) / ((z-x1)(z-x2)(x2-x1)^2) dx1 dx2`.
///
/// The kernel is not integrable across the diagonal, so the integral is
/// reported divergent whenever the two laws put mass on a common
/// neighbourhood: shared atoms, an atom where the other density is
/// positive, or overlapping densities. Otherwise it is evaluated on
/// `|x2 - x1| > δ` for a decreasing sequence of `δ` and accepted once the
/// excised strip stops contributing.
pub fn double_stieltjes(
    x1: &DistributionSpec,
    x2: &DistributionSpec,
    z: ComplexPoint,
) -> Result<Complex64> {
    check_point(z, &[x1, x2])?;
    let zc = z.to_complex();
    use DistributionSpec::PointMass;
    match (*x1, *x2) {
        (PointMass { at: a }, PointMass { at: b }) => {
            if a == b {
                return Err(Error::Divergent("the two laws share an atom".into()));
            }
            Ok(1.0 / ((zc - a) * (zc - b) * (b - a) * (b - a)))
        }
        (PointMass { at }, other) | (other, PointMass { at }) => {
            if other.pdf(at) > 0.0 || other.cdf(at) - other.cdf_left(at) > 0.0 {
                return Err(Error::Divergent(format!(
                    "the atom at {at} lies where the other density is positive"
                )));
            }
            let f = |x: f64| other.pdf(x) / ((zc - at) * (zc - x) * (x - at) * (x - at));
            excised(|delta| {
                let (lo, hi) = other.support();
                let rule = TanhSinh::with_tolerance(1e-13, 1e-11);
                let mut v = Complex64::new(0.0, 0.0);
                if lo < at - delta {
                    v += rule.integrate(f, lo, (at - delta).min(hi)).value;
                }
                if hi > at + delta {
                    v += rule.integrate(f, (at + delta).max(lo), hi).value;
                }
                v
            })
        }
        _ => {
            let overlap = density_overlap(x1, x2);
            if overlap > 0.0 {
                return Err(Error::Divergent(format!(
                    "the densities overlap (∫ f1 f2 = {overlap:.3e}); the (x2-x1)^-2 kernel is not integrable across the diagonal"
                )));
            }
            excised(|delta| excised_product(x1, x2, zc, delta))
        }
    }
}

/// `∫ f1 f2` over the common part of the supports.
fn density_overlap(x1: &DistributionSpec, x2: &DistributionSpec) -> f64 {
    let (a1, b1) = x1.support();
    let (a2, b2) = x2.support();
    let (lo, hi) = (a1.max(a2), b1.min(b2));
    if lo >= hi {
        return 0.0;
    }
    TanhSinh::with_tolerance(1e-14, 1e-10)
        .integrate(|x: f64| x1.pdf(x) * x2.pdf(x), lo, hi)
        .value
}

/// Product-density integral over `|x2 - x1| > delta`.
fn excised_product(
    x1: &DistributionSpec,
    x2: &DistributionSpec,
    z: Complex64,
    delta: f64,
) -> Complex64 {
    let rule = TanhSinh::with_tolerance(1e-13, 1e-11);
    let (a1, b1) = x1.support();
    let (a2, b2) = x2.support();
    let inner = |u: f64| -> Complex64 {
        let f1 = x1.pdf(u);
        if f1 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = |v: f64| x2.pdf(v) / ((z - v) * (v - u) * (v - u));
        let mut acc = Complex64::new(0.0, 0.0);
        if a2 < u - delta {
            acc += rule.integrate(g, a2, (u - delta).min(b2)).value;
        }
        if b2 > u + delta {
            acc += rule.integrate(g, (u + delta).max(a2), b2).value;
        }
        acc * f1 / (z - u)
    };
    rule.integrate(inner, a1, b1).value
}

/// Shrink the excision width until successive values agree.
fn excised(value: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    let mut delta = 1e-2;
    let mut previous = value(delta);
    let mut previous_step = f64::INFINITY;
    for _ in 0..8 {
        delta *= 0.1;
        let current = value(delta);
        let step = (current - previous).norm();
        if step <= 1e-9 * current.norm().max(1.0) {
            return Ok(current);
        }
        if step >= 0.5 * previous_step {
            return Err(Error::Divergent(format!(
                "excised integral keeps growing (change {step:.3e} at width {delta:.0e})"
            )));
        }
        previous = current;
        previous_step = step;
    }
    Err(Error::NotConverged {
        error: previous_step,
    })
}

/// `-1/2 S'''(F_Z, z) - [S'(F_X1, z) S'(F_X2, z) + 2 S(F_X1, F_X2, z)]` for
/// the tsp mixture with `n = 2`.
pub fn thm441_residual(
    x1: &DistributionSpec,
    x2: &DistributionSpec,
    z: ComplexPoint,
) -> Result<Complex64> {
    let spec = MixtureSpec::tsp(2.0, *x1, *x2)?;
    check_point(z, &[x1, x2])?;
    let lhs = -0.5 * mixture_stieltjes(&spec, z, 3)?;
    let rhs = x1.stieltjes(z, 1)? * x2.stieltjes(z, 1)? + 2.0 * double_stieltjes(x1, x2, z)?;
    Ok(lhs - rhs)
}

/// The identities that can be swept over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Lemma21,
    Lemma22,
    Eq31,
    Thm441,
    VanAssche,
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::Lemma21 => "lemma21",
            Identity::Lemma22 => "lemma22",
            Identity::Eq31 => "eq31",
            Identity::Thm441 => "thm441",
            Identity::VanAssche => "van_assche",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lemma21" => Identity::Lemma21,
            "lemma22" => Identity::Lemma22,
            "eq31" => Identity::Eq31,
            "thm441" => Identity::Thm441,
            "van_assche" => Identity::VanAssche,
            _ => return None,
        })
    }

    /// Default tolerance for a sweep of this identity over `spec`.
    pub fn default_tolerance(&self, spec: Option<&MixtureSpec>) -> f64 {
        match self {
            Identity::Lemma21 => 1e-11,
            Identity::Thm441 => {
                let atoms = spec.is_some_and(|s| s.x1.is_atom() && s.x2.is_atom());
                if atoms {
                    1e-10
                } else {
                    1e-5
                }
            }
            _ => {
                if spec.is_some_and(|s| s.known_law().is_some()) {
                    1e-8
                } else {
                    1e-6
                }
            }
        }
    }

    /// Residual of the identity at `z` for `spec`.
    pub fn residual(&self, spec: &MixtureSpec, z: ComplexPoint) -> Result<Complex64> {
        match self {
            Identity::Lemma22 => lemma22_residual(spec, z),
            Identity::Eq31 => {
                if spec.x1 != spec.x2 {
                    return Err(domain("the fixed-point equation needs identical components"));
                }
                eq31_residual(&spec.x1, z)
            }
            Identity::Thm441 => thm441_residual(&spec.x1, &spec.x2, z),
            Identity::VanAssche => van_assche_residual(&spec.x1, &spec.x2, z),
            Identity::Lemma21 => Err(domain("the partial-fraction identity takes real triples")),
        }
    }
}

/// Residuals of one identity over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub points: Vec<ComplexPoint>,
    /// Residual modulus per point; infinite where evaluation failed.
    pub residuals: Vec<f64>,
    /// Failure message per point, if any.
    pub notes: Vec<Option<String>>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(
        identity: &str,
        points: Vec<ComplexPoint>,
        outcomes: Vec<Result<f64>>,
        tolerance: f64,
    ) -> Self {
        let mut residuals = Vec::with_capacity(outcomes.len());
        let mut notes = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            match o {
                Ok(r) => {
                    residuals.push(r);
                    notes.push(None);
                }
                Err(e) => {
                    residuals.push(f64::INFINITY);
                    notes.push(Some(e.to_string()));
                }
            }
        }
        let max_residual = residuals
            .iter()
            .fold(0.0f64, |m, &r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
        Self {
            identity: identity.to_string(),
            points,
            residuals,
            notes,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

/// Sweep a transform identity over `grid`, evaluating points in parallel.
pub fn sweep(
    identity: Identity,
    spec: &MixtureSpec,
    grid: &[ComplexPoint],
    tolerance: f64,
) -> ResidualReport {
    use rayon::prelude::*;
    let outcomes: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&z| identity.residual(spec, z).map(|r| r.norm()))
        .collect();
    ResidualReport::new(identity.name(), grid.to_vec(), outcomes, tolerance)
}

/// One random argument of the partial-fraction identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma21Point {
    pub x1: f64,
    pub x2: f64,
    pub z: f64,
    pub n: u32,
}

/// `count` random triples in `[-10, 10]` with pairwise gaps of at least
/// 0.05 and `n` in `1..=5`.
pub fn lemma21_grid(seed: u64, count: usize) -> Vec<Lemma21Point> {
    let mut rng = RandomStream::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut draw = || -10.0 + 20.0 * rng.uniform();
        let (x1, x2, z) = (draw(), draw(), draw());
        if (x1 - x2).abs() < 0.05 || (x1 - z).abs() < 0.05 || (x2 - z).abs() < 0.05 {
            continue;
        }
        let n = 1 + (rng.uniform() * 5.0) as u32;
        out.push(Lemma21Point { x1, x2, z, n: n.min(5) });
    }
    out
}

/// Sweep the partial-fraction identity over `points`.
pub fn lemma21_sweep(points: &[Lemma21Point], tolerance: f64) -> ResidualReport {
    let outcomes = points
        .iter()
        .map(|p| lemma21_residual(p.x1, p.x2, p.z, p.n))
        .collect();
    let as_complex = points.iter().map(|p| ComplexPoint::real(p.z)).collect();
    ResidualReport::new(Identity::Lemma21.name(), as_complex, outcomes, tolerance)
}
