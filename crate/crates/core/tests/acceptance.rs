//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! line per criterion and exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use powermix::mixture::{mixture_pdf_numeric, tsp_pdf_uniform};
use powermix::moments::{
    all_methods, max_cross_method_ratio, moments_of_sample, normal_moments, summarize, uniform_mean,
    uniform_variance,
};
use powermix::specfun::{euler_hyp2f1, hyp2f1_1_n, incomplete_beta, HyperParams};
use powermix::stieltjes::{lemma21_grid, lemma21_sweep, sweep, thm441_residual};
use powermix::verifier::{find, run_scenario, TabulatedCdf};
use powermix::{ComplexPoint, DistributionSpec, Identity, MixtureSpec};

const N: usize = 1_000_000;
const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn uniform01() -> DistributionSpec {
    DistributionSpec::uniform(0.0, 1.0).unwrap()
}

fn normal01() -> DistributionSpec {
    DistributionSpec::normal(0.0, 1.0).unwrap()
}

fn uniform_tsp_moments() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [1.0, 2.0, 3.0, 5.0] {
        let start = Instant::now();
        let spec = MixtureSpec::tsp(n, uniform01(), uniform01()).unwrap();
        let s = summarize(&spec.sample_par(SEED, N)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let zm = (s.mean - uniform_mean(n)).abs() / s.mean_se;
        let zv = (s.variance - uniform_variance(n)).abs() / s.variance_se;
        pass &= zm <= 4.0 && zv <= 4.0 && secs < 10.0;
        notes.push(format!("n={n}: mean {zm:.2} SE, var {zv:.2} SE, {secs:.2}s"));
    }
    outcome(pass, notes.join("; "))
}

fn normal_tsp_moments() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [1.0, 2.0, 3.0] {
        let spec = MixtureSpec::tsp(n, normal01(), normal01()).unwrap();
        let mc = moments_of_sample(&spec.sample_par(SEED, N), 3);
        let claimed = normal_moments(n);
        let worst = (1..=3)
            .map(|k| (mc[k].value - claimed[k - 1]).abs() / mc[k].std_error.unwrap())
            .fold(0.0f64, f64::max);
        pass &= worst <= 4.0;
        notes.push(format!("n={n}: worst {worst:.2} SE"));
    }
    outcome(pass, notes.join("; "))
}

fn uniform_tsp_density() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    for n in [1.0, 2.0, 3.0] {
        let spec = MixtureSpec::tsp(n, uniform01(), uniform01()).unwrap();
        let gap = grid
            .iter()
            .map(|&z| (tsp_pdf_uniform(n, z).unwrap() - mixture_pdf_numeric(&spec, z).unwrap()).abs())
            .fold(0.0f64, f64::max);
        pass &= gap <= 1e-5;
        notes.push(format!("n={n}: sup gap {gap:.1e}"));
        if n == 1.0 {
            continue;
        }
        let bins = 200;
        let table = TabulatedCdf::from_density(|z| tsp_pdf_uniform(n, z).unwrap(), 0.0, 1.0, 2048).unwrap();
        let mut counts = vec![0usize; bins];
        for z in spec.sample_par(SEED, N) {
            counts[((z * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let chi2: f64 = (0..bins)
            .map(|b| {
                let p = table.eval((b + 1) as f64 / bins as f64) - table.eval(b as f64 / bins as f64);
                let e = p * N as f64;
                (counts[b] as f64 - e).powi(2) / e
            })
            .sum();
        let df = (bins - 1) as f64;
        let limit = df + 4.0 * (2.0 * df).sqrt();
        pass &= chi2 <= limit;
        notes.push(format!("n={n}: chi2 {chi2:.1} (limit {limit:.1})"));
    }
    outcome(pass, notes.join("; "))
}

fn semicircle_characterization() -> Outcome {
    let r = run_scenario(&find("thm32a").unwrap().with_samples(N).with_seed(SEED)).unwrap();
    let c = run_scenario(&find("thm32a_control").unwrap().with_samples(N).with_seed(SEED)).unwrap();
    outcome(
        r.pass && !c.pass,
        format!(
            "KS {:.5} (threshold {:.4}); control vs uniform KS {:.5} fails: {}",
            r.statistic, r.threshold, c.statistic, !c.pass
        ),
    )
}

fn beta_characterizations_and_examples() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for id in ["thm32c", "thm32d", "ex431", "ex432"] {
        let r = run_scenario(&find(id).unwrap()).unwrap();
        pass &= r.pass;
        notes.push(format!("{id} KS {:.5}/{:.5} {}", r.statistic, r.threshold, if r.pass { "ok" } else { "FAIL" }));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    notes.push(format!("{secs:.1}s"));
    outcome(pass, notes.join("; "))
}

fn partial_fractions() -> Outcome {
    let grid = lemma21_grid(SEED, 100);
    let all_n = (1..=5).all(|n| grid.iter().any(|p| p.n == n));
    let r = lemma21_sweep(&grid, 1e-11);
    outcome(r.pass && all_n, format!("max residual {:.1e} over 100 points", r.max_residual))
}

fn derivative_relation() -> Outcome {
    let c = DistributionSpec::cauchy(0.0, 1.0).unwrap();
    let cauchy = MixtureSpec::directed(1.0, c, c).unwrap();
    let mut grid = Vec::new();
    for re in [-3.0, -1.0, 0.0, 1.5, 4.0] {
        for im in [-2.0, -0.5, 0.5, 3.0] {
            grid.push(ComplexPoint::new(re, im));
        }
    }
    let a = sweep(Identity::Lemma22, &cauchy, &grid, 1e-8);
    let mixed = MixtureSpec::directed(
        2.0,
        DistributionSpec::uniform(-1.0, 1.0).unwrap(),
        DistributionSpec::arcsin(-1.0, 1.0).unwrap(),
    )
    .unwrap();
    let points = [
        ComplexPoint::real(2.0),
        ComplexPoint::real(-2.5),
        ComplexPoint::new(0.5, 1.0),
        ComplexPoint::new(-1.0, -0.75),
        ComplexPoint::new(0.0, 3.0),
    ];
    let b = sweep(Identity::Lemma22, &mixed, &points, 1e-6);
    outcome(
        a.pass && b.pass && grid.len() == 20,
        format!(
            "cauchy n=1 max {:.1e} on 20 points; uniform/arcsin n=2 max {:.1e}",
            a.max_residual, b.max_residual
        ),
    )
}

fn third_derivative_relation() -> Outcome {
    let at0 = DistributionSpec::point_mass(0.0).unwrap();
    let at1 = DistributionSpec::point_mass(1.0).unwrap();
    let atoms = thm441_residual(&at0, &at1, ComplexPoint::real(3.0)).unwrap().norm();
    let atoms_ok = atoms <= 1e-10;
    let zs = [ComplexPoint::real(2.0), ComplexPoint::real(3.0), ComplexPoint::new(1.5, 1.5)];
    let mut notes = vec![format!("point masses 0,1 at z=3: residual {atoms:.4}")];
    let mut uniform_ok = true;
    for z in zs {
        match thm441_residual(&uniform01(), &uniform01(), z) {
            Ok(r) => {
                uniform_ok &= r.norm() <= 1e-5;
                notes.push(format!("uniform z={}{:+}i: {:.1e}", z.re, z.im, r.norm()));
            }
            Err(e) => {
                uniform_ok = false;
                notes.push(format!("uniform z={}{:+}i: {e}", z.re, z.im));
                break;
            }
        }
    }
    outcome(atoms_ok && uniform_ok, notes.join("; "))
}

fn location_and_symmetry() -> Outcome {
    let a = run_scenario(&find("thm412a").unwrap().with_samples(N).with_seed(SEED)).unwrap();
    let b = run_scenario(&find("thm412b").unwrap().with_samples(N).with_seed(SEED)).unwrap();
    let get = |name: &str| b.details.iter().find(|d| d.name == name).unwrap().value;
    let skew = get("skewness_n1");
    let mean = get("mean_n2");
    let se = get("mean_se_n2");
    let pass = a.statistic <= 4.0 && skew.abs() <= 0.01 && mean > 3.0 * se && b.pass;
    outcome(
        pass,
        format!(
            "shift gap {} ulp; skewness n=1 {skew:.4}; mean n=2 {mean:.4} = {:.1} SE above 0",
            a.statistic,
            mean / se
        ),
    )
}

fn cross_method_moments() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, law) in [("uniform", uniform01()), ("normal", normal01())] {
        for n in [1.0, 2.0, 3.0] {
            let spec = MixtureSpec::tsp(n, law, law).unwrap();
            let reports = all_methods(&spec, 4, N, SEED).unwrap();
            let ratio = max_cross_method_ratio(&reports);
            pass &= ratio <= 1.0;
            notes.push(format!("{name} n={n}: {ratio:.2}"));
        }
    }
    outcome(pass, format!("max delta / allowance: {}", notes.join(", ")))
}

fn special_functions() -> Outcome {
    let shapes = [0.1, 0.5, 1.0, 2.0, 3.5, 10.0, 50.0];
    let mut reflection: f64 = 0.0;
    for &a in &shapes {
        for &b in &shapes {
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let s = incomplete_beta(x, a, b).unwrap() + incomplete_beta(1.0 - x, b, a).unwrap();
                reflection = reflection.max((s - 1.0).abs());
            }
        }
    }
    let mut euler: f64 = 0.0;
    for n in [1.0, 2.0, 3.0, 5.0] {
        for i in 1..=9 {
            let z = i as f64 / 10.0;
            let series = hyp2f1_1_n(n, z).unwrap();
            let integral = euler_hyp2f1(HyperParams::new(1.0, n, n + 1.0, z).unwrap()).unwrap();
            euler = euler.max((series - integral).abs() / series.abs());
        }
    }
    outcome(
        reflection <= 1e-10 && euler <= 1e-8,
        format!("reflection max {reflection:.1e}; series vs Euler integral max rel {euler:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("uniform-component tsp mean and variance", uniform_tsp_moments),
        ("normal-component moments", normal_tsp_moments),
        ("uniform-component density: closed form, quadrature, histogram", uniform_tsp_density),
        ("semicircle characterization (n=2)", semicircle_characterization),
        ("beta characterizations and beta-weight examples", beta_characterizations_and_examples),
        ("partial-fraction identity", partial_fractions),
        ("derivative relation of the transform", derivative_relation),
        ("third-derivative relation with the double transform", third_derivative_relation),
        ("location invariance and symmetry only at n=1", location_and_symmetry),
        ("cross-formula moment consistency", cross_method_moments),
        ("special functions", special_functions),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} ({:.1}s): {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
