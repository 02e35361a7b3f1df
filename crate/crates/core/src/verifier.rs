//! Scenario harness: each scenario builds a mixture, draws from it and
//! compares the draws (or a derived quantity) against a claimed law.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::basedist::DistributionSpec;
use crate::error::{domain, Error, Result};
use crate::mixture::{mixture_pdf_numeric, tsp_pdf_uniform, MixtureSpec};
use crate::moments::summarize;
use crate::quadrature;
use crate::rng::mix;
use crate::stieltjes::{sweep, ComplexPoint, Identity};

/// Asymptotic 5% critical value of the scaled KS statistic.
pub const KS_CRITICAL: f64 = 1.36;

/// Default sample size of the catalog.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Default seed of the catalog.
pub const DEFAULT_SEED: u64 = 42;

/// Sup distance between the empirical distribution of `samples` and `cdf`.
///
/// The left limit of `cdf` at each sample is taken one ulp below it, so
/// reference laws with atoms are handled.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    ks_statistic_with(samples, &cdf, |x| cdf(next_down(x)))
}

/// [`ks_statistic`] with an explicit left-limit function.
pub fn ks_statistic_with(
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    cdf_left: impl Fn(f64) -> f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain("sample contains NaN"));
    }
    let mut xs = samples.to_vec();
    xs.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i + 1;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max(upto - cdf(x)).max(cdf_left(x) - below);
        i = j;
    }
    Ok(d.clamp(0.0, 1.0))
}

fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits - 1 } else { bits + 1 })
}

/// Distribution function tabulated from a density by piecewise quadrature
/// and cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    knots: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl TabulatedCdf {
    pub fn from_density(pdf: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || cells == 0 {
            return Err(domain("tabulation needs a finite interval and at least one cell"));
        }
        let h = (hi - lo) / cells as f64;
        let knots: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
        let pieces: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|i| quadrature::integrate(&pdf, knots[i], knots[i + 1]))
            .collect();
        let mut cdf = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for p in pieces {
            acc += p;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(domain("density has no mass on the interval"));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        let pdf = knots
            .iter()
            .map(|&x| {
                let v = pdf(x) / acc;
                if v.is_finite() {
                    v
                } else {
                    f64::NAN
                }
            })
            .collect();
        Ok(Self { knots, cdf, pdf })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let lo = self.knots[0];
        let hi = *self.knots.last().unwrap();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let cells = self.knots.len() - 1;
        let h = (hi - lo) / cells as f64;
        let i = (((x - lo) / h) as usize).min(cells - 1);
        let t = (x - self.knots[i]) / h;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.pdf[i], self.pdf[i + 1]);
        let v = if d0.is_finite() && d1.is_finite() {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * c0
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * c1
                + (t3 - t2) * h * d1
        } else {
            c0 + t * (c1 - c0)
        };
        v.clamp(c0.min(c1), c0.max(c1))
    }
}

/// The law a scenario's output is compared with.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Law(DistributionSpec),
    /// Closed-form density of the uniform(0, 1) TSP mixture at the
    /// construction's power index.
    UniformTsp,
}

impl Reference {
    pub fn is_quadrature_based(&self) -> bool {
        matches!(self, Reference::UniformTsp)
    }

    pub fn describe(&self) -> String {
        match self {
            Reference::Law(d) => format!("{d:?}"),
            Reference::UniformTsp => "uniform tsp density".into(),
        }
    }

    fn pdf(&self, spec: &MixtureSpec, z: f64) -> Result<f64> {
        match self {
            Reference::Law(d) => Ok(d.pdf(z)),
            Reference::UniformTsp => {
                let n = spec.n().ok_or_else(|| domain("reference needs a power weight"))?;
                tsp_pdf_uniform(n, z)
            }
        }
    }
}

/// Additional claims about moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentClaim {
    /// Centered normal components: skewness vanishes at `n = 1`, and at
    /// `n = 2` the mean is positive and equals `1 / (3 sqrt(pi))`.
    SymmetryOnlyAtOne,
}

/// What a scenario measures.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// KS distance of the draws to `reference`. With `powers` nonempty the
    /// construction is rerun at each power index and the worst distance is
    /// reported.
    Ks { reference: Reference, powers: Vec<f64> },
    /// Sup gap between the quadrature density and the reference density on
    /// `grid`.
    DensitySup { reference: Reference, grid: Vec<f64> },
    MomentMatch(MomentClaim),
    StieltjesResidual { identity: Identity, grid: Vec<ComplexPoint> },
    /// Draws of the construction shifted by `shift` against the unshifted
    /// draws plus `shift`, in ulps; both runs share the seed.
    Exactness { shift: f64 },
}

impl Check {
    pub fn kind(&self) -> &'static str {
        match self {
            Check::Ks { .. } => "ks",
            Check::DensitySup { .. } => "density_sup",
            Check::MomentMatch(_) => "moment_match",
            Check::StieltjesResidual { .. } => "stieltjes_residual",
            Check::Exactness { .. } => "exactness",
        }
    }
}

/// Pass threshold of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    /// `c / sqrt(N)`.
    PerRootN(f64),
}

impl Threshold {
    /// KS threshold against a closed-form reference.
    pub fn ks_closed() -> Self {
        Threshold::PerRootN(1.5 * KS_CRITICAL)
    }

    /// KS threshold against a quadrature-based reference.
    pub fn ks_quadrature() -> Self {
        Threshold::PerRootN(2.5 * KS_CRITICAL)
    }

    pub fn value(&self, samples: usize) -> f64 {
        match *self {
            Threshold::Fixed(t) => t,
            Threshold::PerRootN(c) => c / (samples.max(1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub summary: String,
    pub construction: MixtureSpec,
    pub check: Check,
    pub samples: usize,
    pub seed: u64,
    pub threshold: Threshold,
}

impl Scenario {
    pub fn new(id: &str, summary: &str, construction: MixtureSpec, check: Check, threshold: Threshold) -> Self {
        Self {
            id: id.into(),
            summary: summary.into(),
            construction,
            check,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            threshold,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        match &mut self.check {
            Check::Ks { reference: r, .. } | Check::DensitySup { reference: r, .. } => *r = reference,
            _ => {}
        }
        self
    }

    pub fn threshold_value(&self) -> f64 {
        self.threshold.value(self.samples)
    }

    /// Seed of this scenario's own random stream.
    pub fn stream_seed(&self) -> u64 {
        // FNV-1a of the id
        let h = self
            .id
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        mix(self.seed ^ mix(h))
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.threshold_value();
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidSpec(format!("threshold must be positive, got {t}")));
        }
        self.construction.validated()?;
        let sampled = matches!(
            self.check,
            Check::Ks { .. } | Check::MomentMatch(_) | Check::Exactness { .. }
        );
        if sampled && self.samples < 4 {
            return Err(Error::InvalidSpec("a sampled scenario needs at least 4 draws".into()));
        }
        Ok(())
    }
}

/// A named scalar attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    pub check: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub details: Vec<Detail>,
}

impl VerificationReport {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self { wall_time_s: 0.0, ..self.clone() } == Self { wall_time_s: 0.0, ..other.clone() }
    }
}

fn detail(name: &str, value: f64) -> Detail {
    Detail {
        name: name.into(),
        value,
    }
}

/// Evaluate one scenario.
pub fn run_scenario(s: &Scenario) -> Result<VerificationReport> {
    s.validate()?;
    let start = Instant::now();
    let seed = s.stream_seed();
    let (statistic, details) = match &s.check {
        Check::Ks { reference, powers } => {
            if powers.is_empty() {
                let d = ks_against(&s.construction, reference, s.samples, seed)?;
                (d, vec![detail("ks", d)])
            } else {
                let mut worst: f64 = 0.0;
                let mut details = Vec::new();
                for (i, &n) in powers.iter().enumerate() {
                    let spec = MixtureSpec {
                        weight: crate::mixture::Weight::Power(n),
                        ..s.construction
                    }
                    .validated()?;
                    let d = ks_against(&spec, reference, s.samples, mix(seed ^ (i as u64 + 1)))?;
                    details.push(detail(&format!("ks_n{n}"), d));
                    worst = worst.max(d);
                }
                (worst, details)
            }
        }
        Check::DensitySup { reference, grid } => {
            let gaps: Vec<Result<f64>> = grid
                .par_iter()
                .map(|&z| Ok((mixture_pdf_numeric(&s.construction, z)? - reference.pdf(&s.construction, z)?).abs()))
                .collect();
            let mut worst: f64 = 0.0;
            for g in gaps {
                worst = worst.max(g?);
            }
            (worst, vec![detail("points", grid.len() as f64)])
        }
        Check::MomentMatch(MomentClaim::SymmetryOnlyAtOne) => symmetry_check(s, seed)?,
        Check::StieltjesResidual { identity, grid } => {
            let tol = s.threshold_value();
            let rep = sweep(*identity, &s.construction, grid, tol);
            if let Some(msg) = rep.notes.iter().flatten().next() {
                if rep.residuals.iter().all(|r| r.is_infinite()) {
                    return Err(Error::Divergent(msg.clone()));
                }
            }
            (rep.max_residual, vec![detail("points", grid.len() as f64)])
        }
        Check::Exactness { shift } => {
            let base = s.construction.sample_par(seed, s.samples);
            let moved = s.construction.shifted(*shift).sample_par(seed, s.samples);
            let worst = base
                .iter()
                .zip(&moved)
                .map(|(&a, &b)| ulp_gap(a + shift, b))
                .fold(0.0f64, f64::max);
            (worst, vec![detail("shift", *shift)])
        }
    };
    let threshold = s.threshold_value();
    Ok(VerificationReport {
        id: s.id.clone(),
        check: s.check.kind().into(),
        statistic,
        threshold,
        pass: statistic <= threshold,
        samples: s.samples,
        seed: s.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        details,
    })
}

/// Run scenarios in parallel; reports come back in input order.
pub fn run_all(scenarios: &[Scenario]) -> Vec<Result<VerificationReport>> {
    scenarios.par_iter().map(run_scenario).collect()
}

/// `|a - b|` in units of the spacing of floats at `max(|a|, |b|)`.
pub fn ulp_gap(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = a.abs().max(b.abs());
    let ulp = if m < f64::MIN_POSITIVE {
        f64::from_bits(1)
    } else {
        let e = m.to_bits() >> 52;
        f64::from_bits(e << 52) * f64::EPSILON
    };
    (a - b).abs() / ulp
}

fn ks_against(spec: &MixtureSpec, reference: &Reference, samples: usize, seed: u64) -> Result<f64> {
    let draws = spec.sample_par(seed, samples);
    match reference {
        Reference::Law(d) => ks_statistic_with(&draws, |x| d.cdf(x), |x| d.cdf_left(x)),
        Reference::UniformTsp => {
            let n = spec.n().ok_or_else(|| domain("reference needs a power weight"))?;
            tsp_pdf_uniform(n, 0.5)?;
            let table = TabulatedCdf::from_density(|z| tsp_pdf_uniform(n, z).unwrap_or(f64::NAN), 0.0, 1.0, 2048)?;
            ks_statistic(&draws, |x| table.eval(x))
        }
    }
}

fn symmetry_check(s: &Scenario, seed: u64) -> Result<(f64, Vec<Detail>)> {
    let at = |n: f64, k: u64| -> Result<crate::moments::SampleSummary> {
        let spec = MixtureSpec {
            weight: crate::mixture::Weight::Power(n),
            ..s.construction
        }
        .validated()?;
        summarize(&spec.sample_par(mix(seed ^ k), s.samples))
    };
    let one = at(1.0, 1)?;
    let two = at(2.0, 2)?;
    let claimed = 1.0 / (3.0 * std::f64::consts::PI.sqrt());
    let skew_ratio = one.skewness.abs() / 0.01;
    let excess_ratio = if two.mean > 0.0 {
        3.0 * two.mean_se / two.mean
    } else {
        f64::INFINITY
    };
    let mean_ratio = (two.mean - claimed).abs() / (4.0 * two.mean_se);
    let statistic = skew_ratio.max(excess_ratio).max(mean_ratio);
    Ok((
        statistic,
        vec![
            detail("skewness_n1", one.skewness),
            detail("mean_n2", two.mean),
            detail("mean_se_n2", two.mean_se),
            detail("mean_claimed_n2", claimed),
        ],
    ))
}

fn law(d: Result<DistributionSpec>) -> DistributionSpec {
    d.expect("catalog law")
}

fn spec(m: Result<MixtureSpec>) -> MixtureSpec {
    m.expect("catalog mixture")
}

fn ks(reference: DistributionSpec) -> Check {
    Check::Ks {
        reference: Reference::Law(reference),
        powers: Vec::new(),
    }
}

/// The built-in catalog.
pub fn catalog() -> Vec<Scenario> {
    let u11 = law(DistributionSpec::uniform(-1.0, 1.0));
    let u01 = law(DistributionSpec::uniform(0.0, 1.0));
    let arc = law(DistributionSpec::arcsin(-1.0, 1.0));
    let semi = law(DistributionSpec::semicircle(-1.0, 1.0));
    let power_semi = law(DistributionSpec::beta_on(2.0, 2.0, -1.0, 1.0));
    let b22 = law(DistributionSpec::beta(2.0, 2.0));
    let normal = law(DistributionSpec::normal(0.0, 1.0));
    let cauchy = law(DistributionSpec::cauchy(0.0, 1.0));
    vec![
        Scenario::new(
            "thm32a",
            "directed n=2, x1 uniform(-1,1), x2 arcsin(-1,1) has the semicircle law",
            spec(MixtureSpec::directed(2.0, u11, arc)),
            ks(semi),
            Threshold::PerRootN(2.0),
        ),
        Scenario::new(
            "thm32b",
            "directed n=2, x1 uniform(-1,1), x2 power semicircle has the power semicircle law",
            spec(MixtureSpec::directed(2.0, u11, power_semi)),
            ks(power_semi),
            Threshold::ks_closed(),
        ),
        Scenario::new(
            "thm32c",
            "directed n=2, x1 beta(1,1), x2 beta(1/2,1/2) has the beta(3/2,3/2) law",
            spec(MixtureSpec::directed(
                2.0,
                law(DistributionSpec::beta(1.0, 1.0)),
                law(DistributionSpec::beta(0.5, 0.5)),
            )),
            ks(law(DistributionSpec::beta(1.5, 1.5))),
            Threshold::ks_closed(),
        ),
        Scenario::new(
            "thm32d",
            "directed n=2, x1 uniform(0,1), x2 beta(2,2) has the beta(2,2) law",
            spec(MixtureSpec::directed(2.0, u01, b22)),
            ks(b22),
            Threshold::ks_closed(),
        ),
        Scenario::new(
            "ex421",
            "tsp with uniform(0,1) components matches its closed-form density for n = 1, 2, 3",
            spec(MixtureSpec::tsp(1.0, u01, u01)),
            Check::Ks {
                reference: Reference::UniformTsp,
                powers: vec![1.0, 2.0, 3.0],
            },
            Threshold::ks_quadrature(),
        ),
        Scenario::new(
            "ex431",
            "tsp with beta(1,2) components and beta(3,1) weight has the beta(2,3) law",
            spec(MixtureSpec::tsp_with_weight(
                law(DistributionSpec::beta(3.0, 1.0)),
                law(DistributionSpec::beta(1.0, 2.0)),
                law(DistributionSpec::beta(1.0, 2.0)),
            )),
            ks(law(DistributionSpec::beta(2.0, 3.0))),
            Threshold::ks_closed(),
        ),
        Scenario::new(
            "ex432",
            "tsp with uniform(0,1) components and beta(2,2) weight has the law of the weight",
            spec(MixtureSpec::tsp_with_weight(b22, u01, u01)),
            ks(b22),
            Threshold::ks_closed(),
        ),
        Scenario::new(
            "thm412a",
            "tsp location invariance under a shift of both components",
            spec(MixtureSpec::tsp(2.0, u01, u01)),
            Check::Exactness { shift: 3.0 },
            Threshold::Fixed(4.0),
        ),
        Scenario::new(
            "thm412b",
            "tsp with centered normal components is symmetric at n=1 and not at n=2",
            spec(MixtureSpec::tsp(1.0, normal, normal)),
            Check::MomentMatch(MomentClaim::SymmetryOnlyAtOne),
            Threshold::Fixed(1.0),
        ),
        Scenario::new(
            "cauchy_n1",
            "tsp n=1 with cauchy(0,1) components is cauchy(0,1)",
            spec(MixtureSpec::tsp(1.0, cauchy, cauchy)),
            ks(cauchy),
            Threshold::ks_closed(),
        ),
    ]
}

/// Scenarios outside the main catalog: the characterizations with the two
/// component roles exchanged, the arcsin case at n=1, and a quadrature
/// density comparison.
pub fn extras() -> Vec<Scenario> {
    let mut out: Vec<Scenario> = catalog()
        .into_iter()
        .filter(|s| s.id.starts_with("thm32"))
        .map(|mut s| {
            let c = s.construction;
            s.construction = MixtureSpec {
                x1: c.x2,
                x2: c.x1,
                ..c
            };
            s.id = format!("{}_swapped", s.id);
            s.summary = format!("{} (component roles exchanged)", s.summary);
            s
        })
        .collect();
    let arc = law(DistributionSpec::arcsin(-1.0, 1.0));
    let u11 = law(DistributionSpec::uniform(-1.0, 1.0));
    let u01 = law(DistributionSpec::uniform(0.0, 1.0));
    out.push(Scenario::new(
        "arcsin_n1",
        "tsp n=1 with arcsin(-1,1) components is uniform(-1,1)",
        spec(MixtureSpec::tsp(1.0, arc, arc)),
        ks(u11),
        Threshold::ks_closed(),
    ));
    out.push(
        Scenario::new(
            "ex421_density",
            "quadrature density of the uniform tsp mixture matches the closed form at n=2",
            spec(MixtureSpec::tsp(2.0, u01, u01)),
            Check::DensitySup {
                reference: Reference::UniformTsp,
                grid: (1..100).map(|i| i as f64 / 100.0).collect(),
            },
            Threshold::Fixed(1e-5),
        )
        .with_samples(0),
    );
    out
}

/// Scenarios that must fail: each KS scenario of the catalog against a
/// deliberately wrong reference, and the arcsin case at n=2.
pub fn controls() -> Vec<Scenario> {
    let u11 = law(DistributionSpec::uniform(-1.0, 1.0));
    let u01 = law(DistributionSpec::uniform(0.0, 1.0));
    let mut out: Vec<Scenario> = catalog()
        .into_iter()
        .filter(|s| matches!(s.check, Check::Ks { .. }))
        .map(|s| {
            let wrong = match s.id.as_str() {
                "thm32a" | "thm32b" => u11,
                "cauchy_n1" => law(DistributionSpec::normal(0.0, 1.0)),
                _ => u01,
            };
            let id = format!("{}_control", s.id);
            let mut s = s.with_reference(Reference::Law(wrong));
            s.summary = format!("{} (wrong reference {})", s.summary, Reference::Law(wrong).describe());
            s.id = id;
            s
        })
        .collect();
    let arc = law(DistributionSpec::arcsin(-1.0, 1.0));
    out.push(Scenario::new(
        "arcsin_n2",
        "tsp n=2 with arcsin(-1,1) components is not uniform(-1,1)",
        spec(MixtureSpec::tsp(2.0, arc, arc)),
        ks(u11),
        Threshold::ks_closed(),
    ));
    out
}

/// Look up a scenario by id in the catalog, extras and controls.
pub fn find(id: &str) -> Result<Scenario> {
    catalog()
        .into_iter()
        .chain(extras())
        .chain(controls())
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u01() -> DistributionSpec {
        DistributionSpec::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn ks_examples() {
        let pm = DistributionSpec::point_mass(0.3).unwrap();
        assert_eq!(ks_statistic(&[0.3; 50], |x| pm.cdf(x)).unwrap(), 0.0);
        let mut rng = crate::RandomStream::new(5);
        let xs = u01().sample(&mut rng, 10_000);
        let normal = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!(ks_statistic(&xs, |x| normal.cdf(x)).unwrap() > 0.04);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn ks_against_brute_force() {
        // sup over a dense grid of |ecdf - F|
        let xs = [0.1, 0.4, 0.4, 0.9, 0.25];
        let f = |x: f64| x.clamp(0.0, 1.0);
        let mut brute: f64 = 0.0;
        for i in 0..=100_000 {
            let x = i as f64 / 100_000.0;
            let e = xs.iter().filter(|&&v| v <= x).count() as f64 / 5.0;
            brute = brute.max((e - f(x)).abs());
            let e_left = xs.iter().filter(|&&v| v < x).count() as f64 / 5.0;
            brute = brute.max((e_left - f(x)).abs());
        }
        let d = ks_statistic(&xs, f).unwrap();
        assert!((d - brute).abs() < 1e-4, "{d} {brute}");
    }

    #[test]
    fn ks_null_calibration() {
        let n = 100_000;
        let mut rng = crate::RandomStream::new(11);
        let xs = u01().sample(&mut rng, n);
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 1.5 * KS_CRITICAL / (n as f64).sqrt());
    }

    #[test]
    fn tabulated_cdf_matches_closed_form() {
        let b = DistributionSpec::beta(2.0, 3.0).unwrap();
        let t = TabulatedCdf::from_density(|x| b.pdf(x), 0.0, 1.0, 256).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!((t.eval(x) - b.cdf(x)).abs() < 1e-10, "{x}");
        }
        let t = TabulatedCdf::from_density(|z| tsp_pdf_uniform(1.0, z).unwrap(), 0.0, 1.0, 2048).unwrap();
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let direct = quadrature::integrate(|z| tsp_pdf_uniform(1.0, z).unwrap(), 0.0, x);
            assert!((t.eval(x) - direct).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn ulp_gaps() {
        assert_eq!(ulp_gap(1.0, 1.0), 0.0);
        assert_eq!(ulp_gap(1.0, 1.0 + f64::EPSILON), 1.0);
        assert_eq!(ulp_gap(3.0, 3.0 + 4.0 * f64::EPSILON), 2.0);
    }

    #[test]
    fn catalog_shape() {
        let c = catalog();
        assert_eq!(c.len(), 10);
        let mut ids: Vec<_> = c.iter().map(|s| s.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 10);
        for s in c.iter().chain(&extras()).chain(&controls()) {
            s.validate().unwrap();
            assert!(s.threshold_value() > 0.0);
        }
        assert!(matches!(find("nope"), Err(Error::UnknownScenario(_))));
        assert_eq!(find("thm32a").unwrap().threshold_value(), 0.002);
    }

    #[test]
    fn reports_are_deterministic() {
        let s = find("ex432").unwrap().with_samples(20_000);
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert!(a.same_outcome(&b));
        assert_eq!(a.seed, DEFAULT_SEED);
        let c = run_scenario(&s.clone().with_seed(7)).unwrap();
        assert_ne!(a.statistic, c.statistic);
        let all = run_all(&[s.clone(), s]);
        assert!(all[0].as_ref().unwrap().same_outcome(all[1].as_ref().unwrap()));
    }

    #[test]
    fn exactness_scenario() {
        let r = run_scenario(&find("thm412a").unwrap().with_samples(100_000)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn user_threshold_must_be_positive() {
        let s = Scenario::new(
            "bad",
            "",
            MixtureSpec::tsp(1.0, u01(), u01()).unwrap(),
            ks(u01()),
            Threshold::Fixed(0.0),
        );
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn residual_scenario() {
        let c = DistributionSpec::cauchy(0.0, 1.0).unwrap();
        let s = Scenario::new(
            "cauchy_fixed_point",
            "",
            MixtureSpec::directed(1.0, c, c).unwrap(),
            Check::StieltjesResidual {
                identity: Identity::Lemma22,
                grid: vec![ComplexPoint::new(0.0, 2.0), ComplexPoint::new(1.0, -1.0)],
            },
            Threshold::Fixed(1e-8),
        );
        let r = run_scenario(&s).unwrap();
        assert!(r.pass);
    }
}
