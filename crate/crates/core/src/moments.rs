//! Moments of TSP mixtures from order-statistic moments of the components,
//! with closed forms for the uniform and normal cases and Monte Carlo
//! tables otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::basedist::DistributionSpec;
use crate::error::{domain, Error, Result};
use crate::mixture::{binomial, MixtureSpec};
use crate::rng::par_fill_with;
use crate::specfun::log_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Thm411a,
    Thm411b,
    Thm411c,
    MonteCarlo,
    NamedClosedForm,
}

impl MomentMethod {
    pub fn label(&self) -> &'static str {
        match self {
            MomentMethod::Thm411a => "a",
            MomentMethod::Thm411b => "b",
            MomentMethod::Thm411c => "c",
            MomentMethod::MonteCarlo => "mc",
            MomentMethod::NamedClosedForm => "named",
        }
    }
}

/// One moment `E Z^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub k: u32,
    pub value: f64,
    pub std_error: Option<f64>,
    pub method: MomentMethod,
}

impl MomentReport {
    fn unit(method: MomentMethod) -> Self {
        Self {
            k: 0,
            value: 1.0,
            std_error: None,
            method,
        }
    }
}

fn reject_heavy_tails(laws: &[&DistributionSpec]) -> Result<()> {
    for d in laws {
        if !d.has_finite_moments() {
            return Err(Error::NoFiniteMoments(d.name().to_string()));
        }
    }
    Ok(())
}

/// Table of `E(Y1^i Y2^j)` and `E(Y1^i (Y2 - Y1)^j)` for `i + j <= k_max`,
/// where `Y1 = min(X1, X2)` and `Y2 = max(X1, X2)`.
#[derive(Debug, Clone)]
pub struct OrderStatMoments {
    pub k_max: usize,
    pub source: MomentSource,
    joint: Vec<Vec<f64>>,
    spread: Vec<Vec<f64>>,
    joint_se: Option<Vec<Vec<f64>>>,
    spread_se: Option<Vec<Vec<f64>>>,
    pairs: Option<Arc<Vec<(f64, f64)>>>,
}

/// First and second order-statistic moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderStatSummary {
    pub mu1: f64,
    pub mu2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
}

fn triangle(k_max: usize) -> Vec<Vec<f64>> {
    (0..=k_max).map(|i| vec![0.0; k_max + 1 - i]).collect()
}

impl OrderStatMoments {
    /// Closed-form table where one is known: identical uniform or normal
    /// components, or two point masses.
    pub fn closed_form(
        x1: &DistributionSpec,
        x2: &DistributionSpec,
        k_max: usize,
    ) -> Result<Option<Self>> {
        reject_heavy_tails(&[x1, x2])?;
        use DistributionSpec::*;
        let spread_fn: Box<dyn Fn(usize, usize) -> f64> = match (*x1, *x2) {
            (PointMass { at: a }, PointMass { at: b }) => {
                let (y1, d) = (a.min(b), (a - b).abs());
                Box::new(move |i, j| y1.powi(i as i32) * d.powi(j as i32))
            }
            (Uniform { lo, hi }, Uniform { .. }) if x1 == x2 => {
                let len = hi - lo;
                Box::new(move |i, j| uniform_spread(lo, len, i, j))
            }
            (Normal { mean, sd }, Normal { .. }) if x1 == x2 => {
                Box::new(move |i, j| normal_spread(mean, sd, i, j))
            }
            _ => return Ok(None),
        };
        let mut spread = triangle(k_max);
        for (i, row) in spread.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = spread_fn(i, j);
            }
        }
        spread[0][0] = 1.0;
        let joint = joint_from_spread(&spread);
        Ok(Some(Self {
            k_max,
            source: MomentSource::ClosedForm,
            joint,
            spread,
            joint_se: None,
            spread_se: None,
            pairs: None,
        }))
    }

    /// Monte Carlo table from `samples` independent pairs.
    pub fn monte_carlo(
        x1: &DistributionSpec,
        x2: &DistributionSpec,
        k_max: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        reject_heavy_tails(&[x1, x2])?;
        if samples < 2 {
            return Err(domain("Monte Carlo tables need at least two samples"));
        }
        let (s1, s2) = (x1.sampler(), x2.sampler());
        let pairs = par_fill_with(seed, samples, |rng| {
            let a = s1.draw(rng);
            let b = s2.draw(rng);
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        });
        let mut joint = triangle(k_max);
        let mut spread = triangle(k_max);
        let mut joint_se = triangle(k_max);
        let mut spread_se = triangle(k_max);
        for i in 0..=k_max {
            for j in 0..=(k_max - i) {
                let (m, se) = mean_and_se(&pairs, |y1, y2| y1.powi(i as i32) * y2.powi(j as i32));
                joint[i][j] = m;
                joint_se[i][j] = se;
                let (m, se) =
                    mean_and_se(&pairs, |y1, y2| y1.powi(i as i32) * (y2 - y1).powi(j as i32));
                spread[i][j] = m;
                spread_se[i][j] = se;
            }
        }
        joint[0][0] = 1.0;
        spread[0][0] = 1.0;
        Ok(Self {
            k_max,
            source: MomentSource::MonteCarlo { samples, seed },
            joint,
            spread,
            joint_se: Some(joint_se),
            spread_se: Some(spread_se),
            pairs: Some(Arc::new(pairs)),
        })
    }

    /// Closed form when available, Monte Carlo otherwise.
    pub fn best(
        x1: &DistributionSpec,
        x2: &DistributionSpec,
        k_max: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        match Self::closed_form(x1, x2, k_max)? {
            Some(t) => Ok(t),
            None => Self::monte_carlo(x1, x2, k_max, samples, seed),
        }
    }

    /// `E(Y1^i Y2^j)`.
    pub fn joint(&self, i: usize, j: usize) -> Result<f64> {
        self.joint
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .ok_or(Error::MissingMoment { i, j })
    }

    /// `E(Y1^i (Y2 - Y1)^j)`.
    pub fn spread(&self, i: usize, j: usize) -> Result<f64> {
        self.spread
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .ok_or(Error::MissingMoment { i, j })
    }

    pub fn joint_se(&self, i: usize, j: usize) -> Option<f64> {
        self.joint_se.as_ref()?.get(i)?.get(j).copied()
    }

    pub fn spread_se(&self, i: usize, j: usize) -> Option<f64> {
        self.spread_se.as_ref()?.get(i)?.get(j).copied()
    }

    /// Standard error of the sample mean of `f(Y1, Y2)` for Monte Carlo
    /// tables.
    pub fn combination_se(&self, f: impl Fn(f64, f64) -> f64) -> Option<f64> {
        let pairs = self.pairs.as_ref()?;
        Some(mean_and_se(pairs, f).1)
    }

    pub fn summary(&self) -> Result<OrderStatSummary> {
        let mu1 = self.joint(1, 0)?;
        let mu2 = self.joint(0, 1)?;
        Ok(OrderStatSummary {
            mu1,
            mu2,
            var1: self.joint(2, 0)? - mu1 * mu1,
            var2: self.joint(0, 2)? - mu2 * mu2,
            cov: self.joint(1, 1)? - mu1 * mu2,
        })
    }
}

fn mean_and_se(pairs: &[(f64, f64)], f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let n = pairs.len() as f64;
    let mean = pairs.iter().map(|&(a, b)| f(a, b)).sum::<f64>() / n;
    let ss = pairs
        .iter()
        .map(|&(a, b)| {
            let d = f(a, b) - mean;
            d * d
        })
        .sum::<f64>();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// `E(Y1^i Y2^j) = sum_m C(j, m) E(Y1^(i+m) (Y2 - Y1)^(j-m))`.
fn joint_from_spread(spread: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k_max = spread.len() - 1;
    let mut joint = triangle(k_max);
    for i in 0..=k_max {
        for j in 0..=(k_max - i) {
            joint[i][j] = (0..=j)
                .map(|m| binomial(j as u32, m as u32) * spread[i + m][j - m])
                .sum();
        }
    }
    joint
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Spread moments for two uniform components on `[lo, lo + len]`; the
/// standardized pair `(V1, D)` is Dirichlet(1, 1, 1).
fn uniform_spread(lo: f64, len: f64, i: usize, j: usize) -> f64 {
    let unit = |r: usize| 2.0 * factorial(r) * factorial(j) / factorial(r + j + 2);
    len.powi(j as i32)
        * (0..=i)
            .map(|r| {
                binomial(i as u32, r as u32) * lo.powi((i - r) as i32) * len.powi(r as i32) * unit(r)
            })
            .sum::<f64>()
}

/// Raw moments of N(m, v) up to `order`.
fn normal_raw_moments(m: f64, v: f64, order: usize) -> Vec<f64> {
    let mut out = vec![1.0; order + 1];
    for a in 1..=order {
        let prev2 = if a >= 2 { out[a - 2] } else { 0.0 };
        out[a] = m * out[a - 1] + (a - 1) as f64 * v * prev2;
    }
    out
}

/// `E |N(0, 1)|^b`.
fn abs_normal_moment(b: usize) -> f64 {
    let b = b as f64;
    (0.5 * b * 2f64.ln() + log_gamma(0.5 * (b + 1.0)).unwrap_or(f64::NAN)).exp() / PI.sqrt()
}

/// Spread moments for two normal components. `S = X1 + X2` and
/// `D = |X1 - X2|` are independent, `Y1 = (S - D) / 2` and `Y2 - Y1 = D`.
fn normal_spread(mean: f64, sd: f64, i: usize, j: usize) -> f64 {
    let s_moments = normal_raw_moments(2.0 * mean, 2.0 * sd * sd, i);
    let d_moment = |b: usize| (2f64.sqrt() * sd).powi(b as i32) * abs_normal_moment(b);
    0.5f64.powi(i as i32)
        * (0..=i)
            .map(|r| {
                let sign = if (i - r) % 2 == 0 { 1.0 } else { -1.0 };
                binomial(i as u32, r as u32) * sign * s_moments[r] * d_moment(i - r + j)
            })
            .sum::<f64>()
}

/// Table of `E((X1 + X2)^a |X1 - X2|^b)` for `a + b <= k_max`.
#[derive(Debug, Clone)]
pub struct SumDiffMoments {
    pub k_max: usize,
    table: Vec<Vec<f64>>,
    pairs: Option<Arc<Vec<(f64, f64)>>>,
}

impl SumDiffMoments {
    /// From an order-statistic table, using `X1 + X2 = 2 Y1 + D` and
    /// `|X1 - X2| = D`.
    pub fn from_order_stats(os: &OrderStatMoments) -> Result<Self> {
        let k_max = os.k_max;
        let mut table = triangle(k_max);
        for a in 0..=k_max {
            for b in 0..=(k_max - a) {
                let mut v = 0.0;
                for r in 0..=a {
                    v += binomial(a as u32, r as u32)
                        * 2f64.powi(r as i32)
                        * os.spread(r, a - r + b)?;
                }
                table[a][b] = v;
            }
        }
        table[0][0] = 1.0;
        Ok(Self {
            k_max,
            table,
            pairs: os.pairs.clone(),
        })
    }

    /// Identical normal components, where the sum and the absolute
    /// difference are independent.
    pub fn normal_closed(mean: f64, sd: f64, k_max: usize) -> Result<Self> {
        DistributionSpec::normal(mean, sd)?;
        let s = normal_raw_moments(2.0 * mean, 2.0 * sd * sd, k_max);
        let mut table = triangle(k_max);
        for a in 0..=k_max {
            for b in 0..=(k_max - a) {
                table[a][b] = s[a] * (2f64.sqrt() * sd).powi(b as i32) * abs_normal_moment(b);
            }
        }
        table[0][0] = 1.0;
        Ok(Self {
            k_max,
            table,
            pairs: None,
        })
    }

    /// `E((X1 + X2)^a |X1 - X2|^b)`.
    pub fn get(&self, a: usize, b: usize) -> Result<f64> {
        self.table
            .get(a)
            .and_then(|r| r.get(b))
            .copied()
            .ok_or(Error::MissingMoment { i: a, j: b })
    }
}

fn check_n(n: f64) -> Result<()> {
    if !n.is_finite() || n <= 0.0 {
        return Err(domain(format!("power parameter must be positive, got {n}")));
    }
    Ok(())
}

/// `E Z^k = n Γ(k+1)/Γ(k+n+1) Σ_i Γ(k-i+n)/Γ(k-i+1) E(Y1^i Y2^(k-i))`.
pub fn moment_thm_a(os: &OrderStatMoments, n: f64, k: u32) -> Result<MomentReport> {
    check_n(n)?;
    if k == 0 {
        return Ok(MomentReport::unit(MomentMethod::Thm411a));
    }
    let coeffs = thm_a_coefficients(n, k)?;
    let ku = k as usize;
    let mut value = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        value += c * os.joint(i, ku - i)?;
    }
    let std_error = os.combination_se(|y1, y2| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * y1.powi(i as i32) * y2.powi((ku - i) as i32))
            .sum()
    });
    Ok(MomentReport {
        k,
        value,
        std_error,
        method: MomentMethod::Thm411a,
    })
}

fn thm_a_coefficients(n: f64, k: u32) -> Result<Vec<f64>> {
    let kf = k as f64;
    let lead = n.ln() + log_gamma(kf + 1.0)? - log_gamma(kf + n + 1.0)?;
    (0..=k)
        .map(|i| {
            let r = (k - i) as f64;
            Ok((lead + log_gamma(r + n)? - log_gamma(r + 1.0)?).exp())
        })
        .collect()
}

/// `E Z^k = Σ_i C(k,i) (1/2)^(k-i) E(W - 1/2)^i E((X1+X2)^(k-i) |X1-X2|^i)`.
pub fn moment_thm_b(spec: &MixtureSpec, k: u32, joint: &SumDiffMoments) -> Result<MomentReport> {
    reject_heavy_tails(&[&spec.x1, &spec.x2])?;
    if k == 0 {
        return Ok(MomentReport::unit(MomentMethod::Thm411b));
    }
    let ku = k as usize;
    let coeffs: Vec<f64> = (0..=k)
        .map(|i| {
            binomial(k, i) * 0.5f64.powi((k - i) as i32) * spec.weight.centered_half_moment(i)
        })
        .collect();
    let mut value = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        value += c * joint.get(ku - i, i)?;
    }
    let std_error = joint.pairs.as_ref().map(|pairs| {
        mean_and_se(pairs, |y1, y2| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * (y1 + y2).powi((ku - i) as i32) * (y2 - y1).powi(i as i32))
                .sum()
        })
        .1
    });
    Ok(MomentReport {
        k,
        value,
        std_error,
        method: MomentMethod::Thm411b,
    })
}

/// `E Z^k = Σ_i C(k,i) n/(n+i) E(Y1^(k-i) (Y2-Y1)^i)`.
pub fn moment_thm_c(os: &OrderStatMoments, n: f64, k: u32) -> Result<MomentReport> {
    check_n(n)?;
    if k == 0 {
        return Ok(MomentReport::unit(MomentMethod::Thm411c));
    }
    let ku = k as usize;
    let coeffs: Vec<f64> = (0..=k)
        .map(|i| binomial(k, i) * n / (n + i as f64))
        .collect();
    let mut value = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        value += c * os.spread(ku - i, i)?;
    }
    let std_error = os.combination_se(|y1, y2| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * y1.powi((ku - i) as i32) * (y2 - y1).powi(i as i32))
            .sum()
    });
    Ok(MomentReport {
        k,
        value,
        std_error,
        method: MomentMethod::Thm411c,
    })
}

/// `(μ1 + n μ2) / (n + 1)`.
pub fn tsp_mean(n: f64, s: &OrderStatSummary) -> Result<f64> {
    check_n(n)?;
    check_summary(s)?;
    Ok((s.mu1 + n * s.mu2) / (n + 1.0))
}

/// `[n(μ1-μ2)² + n(n+1)²σ2² + 2(n+1)(σ1² + nσ12)] / ((n+1)²(n+2))`.
pub fn tsp_variance(n: f64, s: &OrderStatSummary) -> Result<f64> {
    check_n(n)?;
    check_summary(s)?;
    let d = s.mu1 - s.mu2;
    let np1 = n + 1.0;
    Ok(
        (n * d * d + n * np1 * np1 * s.var2 + 2.0 * np1 * (s.var1 + n * s.cov))
            / (np1 * np1 * (n + 2.0)),
    )
}

fn check_summary(s: &OrderStatSummary) -> Result<()> {
    if [s.mu1, s.mu2, s.var1, s.var2, s.cov]
        .iter()
        .all(|v| v.is_finite())
    {
        Ok(())
    } else {
        Err(domain("order-statistic moments must be finite"))
    }
}

/// Mean of a TSP mixture with centred components, `(1 - n)/(1 + n) E Y1`.
pub fn tsp_mean_centered(n: f64, mu1: f64) -> Result<f64> {
    check_n(n)?;
    Ok((1.0 - n) / (1.0 + n) * mu1)
}

/// `E Z^k` for uniform(0, 1) components.
pub fn uniform_moment_formula(n: f64, k: u32) -> Result<f64> {
    check_n(n)?;
    let kf = k as f64;
    let lead = n.ln() + log_gamma(kf + 1.0)? - log_gamma(n + kf + 1.0)?;
    let mut total = 0.0;
    for i in 0..=k {
        let r = (k - i) as f64;
        total += (lead + log_gamma(r + n)? - log_gamma(r + 1.0)?).exp() * 2.0
            / ((kf + 2.0) * (i as f64 + 1.0));
    }
    Ok(total)
}

/// `(2n + 1) / (3(n + 1))`.
pub fn uniform_mean(n: f64) -> f64 {
    (2.0 * n + 1.0) / (3.0 * (n + 1.0))
}

/// `(n³ + 3n² + 6n + 2) / (18 (n+1)² (n+2))`.
pub fn uniform_variance(n: f64) -> f64 {
    (n * n * n + 3.0 * n * n + 6.0 * n + 2.0) / (18.0 * (n + 1.0) * (n + 1.0) * (n + 2.0))
}

/// First three moments for standard normal components.
pub fn normal_moments(n: f64) -> [f64; 3] {
    let sp = PI.sqrt();
    [
        (n - 1.0) / (n + 1.0) / sp,
        (n * n + n + 2.0) / ((n + 1.0) * (n + 2.0)),
        (5.0 * n * n * n + 12.0 * n * n + 13.0 * n - 30.0)
            / (2.0 * sp * (n + 3.0) * (n + 2.0) * (n + 1.0)),
    ]
}

/// Named closed form for `E Z^k` when the components match one of the
/// cataloged cases.
pub fn named_moment(spec: &MixtureSpec, k: u32) -> Option<MomentReport> {
    let n = spec.n()?;
    let u01 = DistributionSpec::Uniform { lo: 0.0, hi: 1.0 };
    let n01 = DistributionSpec::Normal { mean: 0.0, sd: 1.0 };
    if spec.family != crate::mixture::Family::Undirected {
        return None;
    }
    let value = if spec.x1 == u01 && spec.x2 == u01 {
        uniform_moment_formula(n, k).ok()?
    } else if spec.x1 == n01 && spec.x2 == n01 && (1..=3).contains(&k) {
        normal_moments(n)[k as usize - 1]
    } else if k == 0 {
        1.0
    } else {
        return None;
    };
    Some(MomentReport {
        k,
        value,
        std_error: None,
        method: MomentMethod::NamedClosedForm,
    })
}

/// Sample moments `E Z^k`, `k = 0..=k_max`, from `samples` draws.
pub fn monte_carlo_moments(
    spec: &MixtureSpec,
    k_max: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<MomentReport>> {
    reject_heavy_tails(&[&spec.x1, &spec.x2])?;
    if samples < 2 {
        return Err(domain("Monte Carlo moments need at least two samples"));
    }
    let draws = spec.sample_par(seed, samples);
    Ok(moments_of_sample(&draws, k_max))
}

/// Sample raw moments with their standard errors.
pub fn moments_of_sample(draws: &[f64], k_max: u32) -> Vec<MomentReport> {
    let n = draws.len() as f64;
    (0..=k_max)
        .map(|k| {
            if k == 0 {
                return MomentReport {
                    k,
                    value: 1.0,
                    std_error: Some(0.0),
                    method: MomentMethod::MonteCarlo,
                };
            }
            let mean = draws.iter().map(|z| z.powi(k as i32)).sum::<f64>() / n;
            let ss = draws
                .iter()
                .map(|z| {
                    let d = z.powi(k as i32) - mean;
                    d * d
                })
                .sum::<f64>();
            MomentReport {
                k,
                value: mean,
                std_error: Some((ss / (n - 1.0) / n).sqrt()),
                method: MomentMethod::MonteCarlo,
            }
        })
        .collect()
}

/// Sample mean, variance and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub skewness: f64,
}

pub fn summarize(draws: &[f64]) -> Result<SampleSummary> {
    if draws.len() < 4 {
        return Err(Error::EmptySample);
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &z in draws {
        let d = z - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let variance = m2 * n / (n - 1.0);
    Ok(SampleSummary {
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        variance_se: ((m4 - m2 * m2) / n).sqrt(),
        skewness: m3 / m2.powf(1.5),
    })
}

/// All applicable methods for `E Z^k`, `k = 0..=k_max`, for a TSP mixture
/// with power weight.
pub fn all_methods(
    spec: &MixtureSpec,
    k_max: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<MomentReport>> {
    reject_heavy_tails(&[&spec.x1, &spec.x2])?;
    let n = spec
        .n()
        .ok_or_else(|| domain("moment formulas need a power weight"))?;
    if spec.family != crate::mixture::Family::Undirected {
        return Err(domain("moment formulas apply to tsp mixtures"));
    }
    let os = OrderStatMoments::best(&spec.x1, &spec.x2, k_max as usize, samples, seed)?;
    let sd = match (spec.x1, spec.x2) {
        (DistributionSpec::Normal { mean, sd }, DistributionSpec::Normal { .. })
            if spec.x1 == spec.x2 =>
        {
            SumDiffMoments::normal_closed(mean, sd, k_max as usize)?
        }
        _ => SumDiffMoments::from_order_stats(&os)?,
    };
    let mc = monte_carlo_moments(spec, k_max, samples, seed.wrapping_add(1))?;
    let mut out = Vec::new();
    for k in 0..=k_max {
        out.push(moment_thm_a(&os, n, k)?);
        out.push(moment_thm_b(spec, k, &sd)?);
        out.push(moment_thm_c(&os, n, k)?);
        out.push(mc[k as usize]);
        if let Some(named) = named_moment(spec, k) {
            out.push(named);
        }
    }
    Ok(out)
}

/// Largest gap between two methods relative to its allowance
/// `max(1e-10, 4 SE)`, with SE combined in quadrature.
pub fn max_cross_method_ratio(reports: &[MomentReport]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a_idx, a) in reports.iter().enumerate() {
        for b in &reports[a_idx + 1..] {
            if a.k != b.k {
                continue;
            }
            let se = a.std_error.unwrap_or(0.0).hypot(b.std_error.unwrap_or(0.0));
            let allowance = (4.0 * se).max(1e-10);
            worst = worst.max((a.value - b.value).abs() / allowance);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u01() -> DistributionSpec {
        DistributionSpec::uniform(0.0, 1.0).unwrap()
    }
    fn n01() -> DistributionSpec {
        DistributionSpec::normal(0.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_table_entries() {
        let os = OrderStatMoments::closed_form(&u01(), &u01(), 4).unwrap().unwrap();
        assert_eq!(os.joint(0, 0).unwrap(), 1.0);
        for i in 0..=4usize {
            for j in 0..=(4 - i) {
                let expected = 2.0 / ((i as f64 + 1.0) * (i + j + 2) as f64);
                assert!((os.joint(i, j).unwrap() - expected).abs() < 1e-15, "{i} {j}");
            }
        }
        assert!((os.joint(1, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(os.joint(3, 3).is_err());
    }

    #[test]
    fn normal_table_entries() {
        let os = OrderStatMoments::closed_form(&n01(), &n01(), 4).unwrap().unwrap();
        let sp = PI.sqrt();
        assert!((os.joint(1, 0).unwrap() + 1.0 / sp).abs() < 1e-15);
        assert!((os.joint(0, 1).unwrap() - 1.0 / sp).abs() < 1e-15);
        // E Y1^2 = E Y2^2 = 1 and E Y1 Y2 = E X1 X2 = 0
        assert!((os.joint(2, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((os.joint(0, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!(os.joint(1, 1).unwrap().abs() < 1e-14);
    }

    #[test]
    fn point_mass_table() {
        let os = OrderStatMoments::closed_form(
            &DistributionSpec::point_mass(3.0).unwrap(),
            &DistributionSpec::point_mass(-2.0).unwrap(),
            3,
        )
        .unwrap()
        .unwrap();
        assert_eq!(os.joint(2, 1).unwrap(), 4.0 * 3.0);
        assert_eq!(os.spread(1, 2).unwrap(), -2.0 * 25.0);
    }

    #[test]
    fn monte_carlo_tables() {
        let os = OrderStatMoments::monte_carlo(&u01(), &u01(), 2, 200_000, 3).unwrap();
        let se = os.joint_se(1, 0).unwrap();
        assert!((os.joint(1, 0).unwrap() - 1.0 / 3.0).abs() < 3.0 * se);
        assert!((os.joint(0, 1).unwrap() - 2.0 / 3.0).abs() < 3.0 * os.joint_se(0, 1).unwrap());
        let os = OrderStatMoments::monte_carlo(&n01(), &n01(), 1, 200_000, 4).unwrap();
        assert!((os.joint(1, 0).unwrap() + 1.0 / PI.sqrt()).abs() < 3.0 * os.joint_se(1, 0).unwrap());
        let again = OrderStatMoments::monte_carlo(&n01(), &n01(), 1, 200_000, 4).unwrap();
        assert_eq!(os.joint(1, 0).unwrap(), again.joint(1, 0).unwrap());
    }

    #[test]
    fn heavy_tails_are_refused() {
        let c = DistributionSpec::cauchy(0.0, 1.0).unwrap();
        assert!(matches!(
            OrderStatMoments::monte_carlo(&c, &c, 2, 100, 1),
            Err(Error::NoFiniteMoments(_))
        ));
        let spec = MixtureSpec::tsp(2.0, c, c).unwrap();
        assert!(matches!(
            monte_carlo_moments(&spec, 2, 100, 1),
            Err(Error::NoFiniteMoments(_))
        ));
        let sd = SumDiffMoments::normal_closed(0.0, 1.0, 2).unwrap();
        assert!(moment_thm_b(&spec, 1, &sd).is_err());
    }

    #[test]
    fn worked_examples() {
        let os = OrderStatMoments::closed_form(&u01(), &u01(), 4).unwrap().unwrap();
        assert_eq!(moment_thm_a(&os, 2.0, 0).unwrap().value, 1.0);
        assert!((moment_thm_a(&os, 1.0, 1).unwrap().value - 0.5).abs() < 1e-13);
        assert!((moment_thm_c(&os, 2.0, 1).unwrap().value - 5.0 / 9.0).abs() < 1e-15);
        let second = uniform_variance(2.0) + uniform_mean(2.0).powi(2);
        assert!((moment_thm_a(&os, 2.0, 2).unwrap().value - second).abs() < 1e-12);
        assert!((moment_thm_c(&os, 2.0, 2).unwrap().value - second).abs() < 1e-12);

        let sd = SumDiffMoments::normal_closed(0.0, 1.0, 3).unwrap();
        let m = |n: f64, k| {
            moment_thm_b(&MixtureSpec::tsp(n, n01(), n01()).unwrap(), k, &sd)
                .unwrap()
                .value
        };
        assert!((m(3.0, 1) - 0.282_094_791_773_878_1).abs() < 1e-12);
        assert!((m(2.0, 2) - 2.0 / 3.0).abs() < 1e-12);
        assert!(m(1.0, 3).abs() < 1e-12);
    }

    #[test]
    fn normal_formulas_for_all_n() {
        let sd = SumDiffMoments::normal_closed(0.0, 1.0, 3).unwrap();
        for n in 1..=6 {
            let n = n as f64;
            let spec = MixtureSpec::tsp(n, n01(), n01()).unwrap();
            let named = normal_moments(n);
            for k in 1..=3u32 {
                let b = moment_thm_b(&spec, k, &sd).unwrap().value;
                assert!((b - named[k as usize - 1]).abs() < 1e-12, "n={n} k={k}");
            }
            assert!(n == 1.0 || named[0] > 0.0);
        }
    }

    #[test]
    fn uniform_formulas() {
        assert!((uniform_moment_formula(1.0, 1).unwrap() - 0.5).abs() < 1e-13);
        assert!((uniform_moment_formula(2.0, 1).unwrap() - 5.0 / 9.0).abs() < 1e-13);
        assert!((uniform_moment_formula(1.0, 2).unwrap() - 11.0 / 36.0).abs() < 1e-13);
        assert!((uniform_variance(1.0) - 1.0 / 18.0).abs() < 1e-16);
        assert!((uniform_variance(2.0) - 0.052_469_135_802_469_13).abs() < 1e-16);
        let os = OrderStatMoments::closed_form(&u01(), &u01(), 2).unwrap().unwrap();
        let s = os.summary().unwrap();
        for n in [1.0, 2.0, 3.0, 5.0] {
            assert!((tsp_mean(n, &s).unwrap() - uniform_mean(n)).abs() < 1e-15);
            assert!((tsp_variance(n, &s).unwrap() - uniform_variance(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn centred_mean() {
        let os = OrderStatMoments::closed_form(&n01(), &n01(), 2).unwrap().unwrap();
        let s = os.summary().unwrap();
        for n in [1.0, 2.0, 4.0] {
            let via_y1 = tsp_mean_centered(n, s.mu1).unwrap();
            assert!((tsp_mean(n, &s).unwrap() - via_y1).abs() < 1e-15);
            assert!((via_y1 - normal_moments(n)[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_matches_thm_c() {
        let pairs = [
            (u01(), u01()),
            (n01(), n01()),
            (
                DistributionSpec::beta(2.0, 5.0).unwrap(),
                DistributionSpec::arcsin(-1.0, 1.0).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            let os = OrderStatMoments::best(&a, &b, 2, 10_000, 9).unwrap();
            let s = os.summary().unwrap();
            for n in [1.0, 2.5] {
                let c = moment_thm_c(&os, n, 1).unwrap().value;
                assert!((tsp_mean(n, &s).unwrap() - c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cross_method_agreement() {
        for x in [u01(), n01()] {
            for n in [1.0, 2.0, 3.0] {
                let spec = MixtureSpec::tsp(n, x, x).unwrap();
                let reports = all_methods(&spec, 4, 200_000, 17).unwrap();
                let r = max_cross_method_ratio(&reports);
                assert!(r <= 1.0, "{x:?} n={n}: {r}");
            }
        }
    }

    #[test]
    fn monte_carlo_tables_carry_errors() {
        let a = DistributionSpec::beta(2.0, 2.0).unwrap();
        let b = DistributionSpec::triangular(0.0, 0.2, 1.0).unwrap();
        let spec = MixtureSpec::tsp(2.0, a, b).unwrap();
        let reports = all_methods(&spec, 3, 100_000, 5).unwrap();
        assert!(reports
            .iter()
            .filter(|r| r.k > 0)
            .all(|r| r.std_error.unwrap() > 0.0));
        assert!(max_cross_method_ratio(&reports) <= 1.0);
    }

    #[test]
    fn sample_summary() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.variance, 2.5);
        assert!(s.skewness.abs() < 1e-15);
        assert!(summarize(&[1.0]).is_err());
    }
}
