mod grid;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use powermix::mixture::{mixture_pdf_numeric, tsp_pdf_uniform, tsp_pdf_uniform_betaweight};
use powermix::moments::{all_methods, max_cross_method_ratio, monte_carlo_moments};
use powermix::stieltjes::{check_point, lemma21_grid, lemma21_sweep, sweep};
use powermix::verifier::{self, Check, Reference, Threshold};
use powermix::{
    parse_distribution, parse_mixture, parse_spec, DistributionSpec, Family, Identity, MixtureSpec, MomentMethod,
    RandomStream, Scenario, Spec, Weight,
};

use output::{Cell, Format, Table};

#[derive(Parser)]
#[command(name = "powermix", version, about = "Directed power and two-sided power mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Leave out the timestamp line and timing columns.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct Seed {
    #[arg(long, env = "POWERMIX_SEED", default_value_t = verifier::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Draw from a distribution or mixture.
    Sample {
        spec: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        output: Output,
    },
    /// Tabulate a density on a grid `a:b:steps`.
    Pdf {
        spec: String,
        /// Defaults to 101 points across the support.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Raw moments of a tsp mixture.
    Moments {
        spec: String,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
        /// Monte Carlo sample size.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        output: Output,
    },
    /// Run verification scenarios.
    #[command(group(ArgGroup::new("which").required(true).multiple(true).args(["scenario", "all", "config"])))]
    Verify {
        /// Scenario id; may be repeated.
        #[arg(long)]
        scenario: Vec<String>,
        /// The whole catalog.
        #[arg(long)]
        all: bool,
        /// With --all, also the exchanged-role and auxiliary scenarios.
        #[arg(long)]
        extra: bool,
        /// JSON file of user scenarios.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sample size per scenario.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        output: Output,
    },
    /// Residuals of a transform identity over a complex grid.
    Stieltjes {
        #[arg(long)]
        identity: String,
        spec: Option<String>,
        /// `re_a:re_b:steps,im` or a single point `re[,im]`; may be repeated.
        #[arg(long, allow_hyphen_values = true)]
        grid: Vec<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Number of random triples for lemma21.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    A,
    B,
    C,
    Mc,
    All,
}

enum Failure {
    Usage(String),
    Io(String),
    Lib(powermix::Error),
    Verification(String),
}

impl From<powermix::Error> for Failure {
    fn from(e: powermix::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use powermix::Error::*;
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Lib(Parse(_) | InvalidSpec(_) | UnknownScenario(_)) => 2,
            Failure::Io(_) => 3,
            Failure::Lib(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Verification(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("powermix: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Sample { spec, n, seed, output } => cmd_sample(&spec, n, seed.seed, &output),
        Command::Pdf { spec, grid, output } => cmd_pdf(&spec, grid.as_deref(), &output),
        Command::Moments {
            spec,
            kmax,
            method,
            samples,
            seed,
            output,
        } => cmd_moments(&spec, kmax, method, samples, seed.seed, &output),
        Command::Verify {
            scenario,
            all,
            extra,
            config,
            n,
            seed,
            output,
        } => cmd_verify(&scenario, all, extra, config.as_deref(), n, seed.seed, &output),
        Command::Stieltjes {
            identity,
            spec,
            grid,
            tol,
            points,
            seed,
            output,
        } => cmd_stieltjes(&identity, spec.as_deref(), &grid, tol, points, seed.seed, &output),
    }
}

fn emit(mut table: Table, output: &Output) -> Outcome {
    if !output.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        table.meta("timestamp", format!("unix {secs}"));
    }
    table
        .write(output.format, output.out.as_deref())
        .map_err(|e| match &output.out {
            Some(p) => Failure::Io(format!("cannot write {}: {e}", p.display())),
            None => Failure::Io(format!("cannot write output: {e}")),
        })
}

fn cmd_sample(spec: &str, n: usize, seed: u64, output: &Output) -> Outcome {
    let spec = parse_spec(spec)?;
    let draws = match spec {
        Spec::Mixture(m) => m.sample_par(seed, n),
        Spec::Distribution(d) => {
            let s = d.sampler();
            powermix::rng::par_fill(seed, n, |rng: &mut RandomStream| s.draw(rng))
        }
    };
    let mut t = Table::new("sample", &["value"]);
    t.meta("spec", spec).meta("seed", seed).meta("n", n).meta("method", "sampling");
    for x in draws {
        t.push(vec![x.into()]);
    }
    emit(t, output)
}

type Density = Box<dyn Fn(f64) -> powermix::Result<f64>>;

/// Closed form where one is known, quadrature otherwise.
fn density_for(spec: &Spec) -> (String, Density) {
    let m = match *spec {
        Spec::Distribution(d) => return ("closed form".into(), Box::new(move |z| Ok(d.pdf(z)))),
        Spec::Mixture(m) => m,
    };
    if let (Family::Undirected, DistributionSpec::Uniform { lo, hi }) = (m.family, m.x1) {
        if m.x1 == m.x2 {
            let len = hi - lo;
            match m.weight {
                Weight::Power(n) => {
                    let label = if n == 1.0 {
                        "closed form (log)"
                    } else {
                        "closed form (hypergeometric)"
                    };
                    return (label.into(), Box::new(move |z| Ok(tsp_pdf_uniform(n, (z - lo) / len)? / len)));
                }
                Weight::Custom(DistributionSpec::Beta { alpha, beta, lo: 0.0, hi: 1.0 })
                    if alpha > 1.0 && beta > 1.0 =>
                {
                    return (
                        "closed form (incomplete beta)".into(),
                        Box::new(move |z| Ok(tsp_pdf_uniform_betaweight(alpha, beta, (z - lo) / len)? / len)),
                    );
                }
                _ => {}
            }
        }
    }
    if let Some(DistributionSpec::Cauchy { location, scale }) = m.known_law() {
        let d = DistributionSpec::Cauchy { location, scale };
        return ("closed form".into(), Box::new(move |z| Ok(d.pdf(z))));
    }
    ("quadrature".into(), Box::new(move |z| mixture_pdf_numeric(&m, z)))
}

fn cmd_pdf(spec: &str, grid: Option<&str>, output: &Output) -> Outcome {
    let spec = parse_spec(spec)?;
    let zs = match grid {
        Some(g) => grid::parse_real_grid(g).map_err(Failure::Usage)?,
        None => {
            let (lo, hi) = match spec {
                Spec::Mixture(m) => m.support(),
                Spec::Distribution(d) => d.support(),
            };
            if !(lo.is_finite() && hi.is_finite()) || lo == hi {
                return Err(Failure::Usage("unbounded or degenerate support: pass --grid a:b:steps".into()));
            }
            grid::parse_real_grid(&format!("{lo:?}:{hi:?}:101")).map_err(Failure::Usage)?
        }
    };
    let (method, f) = density_for(&spec);
    let mut t = Table::new("pdf", &["z", "pdf"]);
    t.meta("spec", spec).meta("method", &method).meta("points", zs.len());
    for z in zs {
        t.push(vec![z.into(), f(z)?.into()]);
    }
    emit(t, output)
}

fn cmd_moments(spec: &str, kmax: u32, method: MethodArg, samples: usize, seed: u64, output: &Output) -> Outcome {
    let spec = parse_mixture(spec)?;
    let reports = if method == MethodArg::Mc {
        monte_carlo_moments(&spec, kmax, samples, seed)?
    } else {
        let wanted = match method {
            MethodArg::A => Some(MomentMethod::Thm411a),
            MethodArg::B => Some(MomentMethod::Thm411b),
            MethodArg::C => Some(MomentMethod::Thm411c),
            _ => None,
        };
        all_methods(&spec, kmax, samples, seed)?
            .into_iter()
            .filter(|r| wanted.is_none_or(|w| r.method == w))
            .collect()
    };
    let with_delta = method == MethodArg::All;
    let mut columns = vec!["k", "value", "std_error", "method"];
    if with_delta {
        columns.push("delta_vs_a");
    }
    let mut t = Table::new("moments", &columns);
    t.meta("spec", spec).meta("seed", seed).meta("samples", samples);
    if with_delta {
        t.meta("max_cross_method_ratio", output::format_float(max_cross_method_ratio(&reports)));
        t.meta("allowance", "max(1e-10, 4 SE)");
    }
    for r in &reports {
        let mut row: Vec<Cell> = vec![r.k.into(), r.value.into(), r.std_error.into(), r.method.label().into()];
        if with_delta {
            let base = reports
                .iter()
                .find(|b| b.k == r.k && b.method == MomentMethod::Thm411a)
                .map(|b| r.value - b.value);
            row.push(base.into());
        }
        t.push(row);
    }
    emit(t, output)
}

/// One entry of a user scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserScenario {
    id: String,
    construction: String,
    reference: String,
    #[serde(default)]
    summary: Option<String>,
    #[serde(default)]
    threshold: Option<f64>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

fn load_config(path: &Path) -> Result<Vec<Scenario>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let entries: Vec<UserScenario> =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    entries
        .into_iter()
        .map(|u| {
            let threshold = u.threshold.map_or(Threshold::ks_closed(), Threshold::Fixed);
            let mut s = Scenario::new(
                &u.id,
                u.summary.as_deref().unwrap_or(""),
                parse_mixture(&u.construction)?,
                Check::Ks {
                    reference: Reference::Law(parse_distribution(&u.reference)?),
                    powers: Vec::new(),
                },
                threshold,
            );
            if let Some(n) = u.samples {
                s = s.with_samples(n);
            }
            if let Some(seed) = u.seed {
                s = s.with_seed(seed);
            }
            s.validate()?;
            Ok(s)
        })
        .collect()
}

fn cmd_verify(
    ids: &[String],
    all: bool,
    extra: bool,
    config: Option<&Path>,
    n: Option<usize>,
    seed: u64,
    output: &Output,
) -> Outcome {
    let mut chosen = Vec::new();
    if all {
        chosen.extend(verifier::catalog());
        if extra {
            chosen.extend(verifier::extras());
        }
    }
    for id in ids {
        chosen.push(verifier::find(id)?);
    }
    let mut user = match config {
        Some(p) => load_config(p)?,
        None => Vec::new(),
    };
    chosen = chosen
        .into_iter()
        .map(|s| {
            let s = s.with_seed(seed);
            match n {
                Some(n) if s.samples > 0 => s.with_samples(n),
                _ => s,
            }
        })
        .collect();
    if let Some(n) = n {
        user = user.into_iter().map(|s| s.with_samples(n)).collect();
    }
    chosen.extend(user);
    let reports = verifier::run_all(&chosen);
    let mut columns = vec!["id", "check", "statistic", "threshold", "pass", "samples", "seed", "note"];
    if !output.no_timestamp {
        columns.push("wall_time_s");
    }
    let mut t = Table::new("verify", &columns);
    t.meta("scenarios", chosen.len());
    let mut failed = Vec::new();
    for (s, r) in chosen.iter().zip(reports) {
        let mut row: Vec<Cell> = match &r {
            Ok(r) => vec![
                r.id.clone().into(),
                r.check.clone().into(),
                r.statistic.into(),
                r.threshold.into(),
                r.pass.into(),
                r.samples.into(),
                r.seed.into(),
                Cell::Null,
            ],
            Err(e) => vec![
                s.id.clone().into(),
                s.check.kind().into(),
                f64::INFINITY.into(),
                s.threshold_value().into(),
                false.into(),
                s.samples.into(),
                s.seed.into(),
                e.to_string().into(),
            ],
        };
        if !output.no_timestamp {
            row.push(r.as_ref().map_or(Cell::Null, |r| r.wall_time_s.into()));
        }
        if !r.as_ref().is_ok_and(|r| r.pass) {
            failed.push(s.id.clone());
        }
        t.push(row);
    }
    emit(t, output)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} of {} scenarios failed: {}",
            failed.len(),
            chosen.len(),
            failed.join(", ")
        )))
    }
}

fn cmd_stieltjes(
    identity: &str,
    spec: Option<&str>,
    grids: &[String],
    tol: Option<f64>,
    points: usize,
    seed: u64,
    output: &Output,
) -> Outcome {
    let identity = Identity::parse(identity).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown identity `{identity}`; expected lemma21, lemma22, eq31, thm441 or van_assche"
        ))
    })?;
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    if identity == Identity::Lemma21 {
        let grid = lemma21_grid(seed, points);
        let tolerance = tol.unwrap_or(identity.default_tolerance(None));
        let report = lemma21_sweep(&grid, tolerance);
        let mut t = Table::new("stieltjes", &["x1", "x2", "z", "n", "residual", "note"]);
        t.meta("identity", identity.name())
            .meta("seed", seed)
            .meta("tolerance", output::format_float(tolerance))
            .meta("max_residual", output::format_float(report.max_residual))
            .meta("pass", report.pass);
        for (p, (r, note)) in grid.iter().zip(report.residuals.iter().zip(&report.notes)) {
            t.push(vec![
                p.x1.into(),
                p.x2.into(),
                p.z.into(),
                p.n.into(),
                (*r).into(),
                note.clone().map_or(Cell::Null, Cell::Text),
            ]);
        }
        emit(t, output)?;
        return verdict(report.pass, report.max_residual, tolerance);
    }
    let spec: MixtureSpec = parse_mixture(spec.ok_or_else(|| Failure::Usage("this identity needs a mixture spec".into()))?)?;
    if grids.is_empty() {
        return Err(Failure::Usage("pass at least one --grid".into()));
    }
    let mut zs = Vec::new();
    for g in grids {
        zs.extend(grid::parse_complex_grid(g).map_err(Failure::Usage)?);
    }
    for &z in &zs {
        check_point(z, &[&spec.x1, &spec.x2])?;
    }
    if identity == Identity::Eq31 && spec.x1 != spec.x2 {
        return Err(Failure::Lib(powermix::Error::Domain(
            "the fixed-point equation needs identical components".into(),
        )));
    }
    let tolerance = tol.unwrap_or(identity.default_tolerance(Some(&spec)));
    let report = sweep(identity, &spec, &zs, tolerance);
    let mut t = Table::new("stieltjes", &["re", "im", "residual", "note"]);
    t.meta("identity", identity.name())
        .meta("spec", spec)
        .meta("tolerance", output::format_float(tolerance))
        .meta("max_residual", output::format_float(report.max_residual))
        .meta("pass", report.pass);
    for (z, (r, note)) in zs.iter().zip(report.residuals.iter().zip(&report.notes)) {
        t.push(vec![
            z.re.into(),
            z.im.into(),
            (*r).into(),
            note.clone().map_or(Cell::Null, Cell::Text),
        ]);
    }
    emit(t, output)?;
    verdict(report.pass, report.max_residual, tolerance)
}

fn verdict(pass: bool, max_residual: f64, tolerance: f64) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "max residual {max_residual:e} exceeds tolerance {tolerance:e}"
        )))
    }
}
