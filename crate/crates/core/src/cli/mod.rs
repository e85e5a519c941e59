//! Batch driver behind the `csep` binary.

mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    check_beurling_hitting, check_beurling_monotone, check_davis, check_lower_bound,
    check_support_theorem, check_torsion_product, check_upper_bound, check_upper_bound_sampled,
    ecdf, estimate_rate, ks_statistic, slit_hitting_frequency, Axis, Certificate, EdgeDensity,
    TargetDistribution,
};
use crate::error::{Error, Result};
use crate::geometry::{re_projection, truncate_u, DomainSpec, Interval, Point};
use crate::io;
use crate::sampler::{
    euler_batch, survival_curve, wos_batch, ExitSample, Method, DEFAULT_DT, DEFAULT_MAX_STEPS,
    DEFAULT_MAX_TIME, DEFAULT_SHELL_EPS,
};
use crate::spectral::{
    self, best_known_c2, closed_form_rate, default_bbox, principal_mode, rasterize, rate_of_u,
    torsion, GridMask,
};

pub use plot::render_svg;

#[derive(Debug, Parser)]
#[command(name = "csep", version, about = "Brownian exit laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    /// Exit positions (walk-on-spheres) or exits with times (Euler).
    Sample,
    /// Survival curve and fitted tail rate.
    RateMc,
    /// Principal eigenvalue on a grid.
    RateEig,
    /// Torsion function on a grid.
    Torsion,
    /// Full certificate suite; exit status 0 iff every certificate holds.
    Verify,
    /// SVG rendering of a produced CSV, or of the domain boundary.
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Inline spec (`strip_re,-1,1`), a JSON object, or a path to a JSON file.
    #[arg(long, global = true, default_value = "grim_reaper_u")]
    pub domain: String,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Number of paths.
    #[arg(long = "n", visible_alias = "samples", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// Walk-on-spheres shell width, relative to the domain length scale.
    #[arg(long, global = true, default_value_t = DEFAULT_SHELL_EPS)]
    pub shell_eps: f64,
    /// Grid spacing; defaults to 1% of the domain length scale.
    #[arg(long, global = true)]
    pub grid_dx: Option<f64>,
    /// Truncation heights for the Grim Reaper domain, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub heights: Option<Vec<f64>>,
    #[arg(long, global = true, env = "CSEP_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long, global = true, env = "CSEP_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// `uniform,a,b`, `sech` or `cauchy,location,scale`.
    #[arg(long, global = true)]
    pub target: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Method::Wos)]
    pub method: Method,
    /// Last survival grid time; defaults to 3 squared length scales.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true, default_value_t = 400)]
    pub grid_points: usize,
    /// CSV to render (plot).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

/// Validated, normalized settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Verb,
    pub domain: DomainSpec,
    pub seed: u64,
    pub samples: usize,
    pub dt: f64,
    pub shell_eps: f64,
    pub grid_dx: f64,
    pub truncation_heights: Vec<f64>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub format: Format,
    pub target: Option<TargetDistribution>,
    pub method: Method,
    pub t_max: f64,
    pub grid_points: usize,
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

const DEFAULT_SAMPLES: usize = 100_000;

/// Reads `--domain`: a JSON object, a path to a JSON file, or inline syntax.
pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let t = text.trim();
    let spec: DomainSpec = if t.starts_with('{') {
        serde_json::from_str(t).map_err(|e| Error::Usage(format!("bad domain JSON: {e}")))?
    } else if t.ends_with(".json") || Path::new(t).is_file() {
        let body = fs::read_to_string(t)?;
        serde_json::from_str(&body).map_err(|e| Error::Usage(format!("bad domain file {t}: {e}")))?
    } else {
        DomainSpec::parse_inline(t)?
    };
    spec.validate()?;
    Ok(spec)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        let o = cli.opts;
        let domain = parse_domain(&o.domain)?;
        let scale = domain.length_scale();
        let samples = o.n.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::Usage("--n must be at least 1".into()));
        }
        let positive = |name: &str, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Usage(format!("--{name} must be positive, got {v}")))
            }
        };
        let dt = positive("dt", o.dt)?;
        let shell_eps = positive("shell-eps", o.shell_eps)?;
        let grid_dx = positive("grid-dx", o.grid_dx.unwrap_or(0.01 * scale))?;
        let t_max = positive("t-max", o.t_max.unwrap_or(3.0 * scale * scale))?;
        let truncation_heights = match (&o.heights, &domain) {
            (Some(h), _) => h.clone(),
            (None, DomainSpec::GrimReaperU { scale }) => {
                [2.0, 4.0, 6.0, 8.0].iter().map(|h| h * scale).collect()
            }
            (None, _) => Vec::new(),
        };
        if truncation_heights.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::Usage("--heights must be positive".into()));
        }
        if o.grid_points < 8 {
            return Err(Error::Usage("--grid-points must be at least 8".into()));
        }
        if o.threads == Some(0) {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        let target = o.target.as_deref().map(TargetDistribution::parse_inline).transpose()?;
        Ok(RunConfig {
            command: cli.verb,
            domain,
            seed: o.seed,
            samples,
            dt,
            shell_eps,
            grid_dx,
            truncation_heights,
            output_dir: o.output_dir,
            format: o.format,
            target,
            method: o.method,
            t_max,
            grid_points: o.grid_points,
            input: o.input,
            threads: o.threads,
        })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn abs_shell(&self) -> f64 {
        self.shell_eps * self.domain.length_scale()
    }
}

/// What a run produced: written files, and for `verify` whether every
/// certificate holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub success: bool,
}

/// Executes one verb inside a thread pool of the configured size.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&config.output_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| match config.command {
        Verb::Sample => run_sample(config),
        Verb::RateMc => run_rate_mc(config),
        Verb::RateEig => run_rate_eig(config),
        Verb::Torsion => run_torsion(config),
        Verb::Verify => run_verify(config),
        Verb::Plot => run_plot(config),
    })
}

/// Parses `args`, runs, and maps the result to a process exit code. Errors
/// are printed to stderr as a JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            print_error(&Error::Usage(e.to_string().trim().to_string()));
            return 2;
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|c| run(&c));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            print_error(&e);
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn print_error(e: &Error) {
    let body = json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{}", serde_json::to_string(&body).expect("plain JSON"));
}

/// Target law implied by the domain when none is given.
fn implied_target(spec: &DomainSpec) -> Option<TargetDistribution> {
    match *spec {
        DomainSpec::GrimReaperU { scale } => Some(TargetDistribution::Uniform { a: -scale, b: scale }),
        DomainSpec::StripIm { c, d } if c == -1.0 && d == 1.0 => Some(TargetDistribution::SechDensity),
        _ => None,
    }
}

fn exits(config: &RunConfig, method: Method, n: usize) -> Result<Vec<ExitSample>> {
    match method {
        Method::Wos => wos_batch(
            &config.domain,
            Point::ORIGIN,
            config.abs_shell(),
            DEFAULT_MAX_STEPS,
            n,
            config.seed,
        ),
        Method::Euler => euler_batch(&config.domain, Point::ORIGIN, config.dt, DEFAULT_MAX_TIME, n, config.seed),
    }
}

fn run_sample(config: &RunConfig) -> Result<Outcome> {
    let samples = exits(config, config.method, config.samples)?;
    let re: Vec<f64> = samples.iter().map(|s| s.position.x).collect();
    let mut files = Vec::new();
    match config.format {
        Format::Json => {
            let p = config.out("samples.json");
            io::write_json(&p, &samples)?;
            files.push(p);
        }
        _ => {
            let p = config.out("samples.csv");
            io::write_file(&p, |w| io::write_samples_csv(w, &samples))?;
            files.push(p);
            let p = config.out("ecdf.csv");
            io::write_file(&p, |w| io::write_ecdf_csv(w, &ecdf(&re)))?;
            files.push(p);
        }
    }
    if let Some(target) = config.target.or_else(|| implied_target(&config.domain)) {
        let ks = ks_statistic(&re, &target)?;
        let p = config.out("ks.json");
        io::write_json(
            &p,
            &json!({
                "config": config,
                "target": target,
                "n": re.len(),
                "censored": samples.iter().filter(|s| s.censored).count(),
                "ks_statistic": ks,
            }),
        )?;
        files.push(p);
    }
    Ok(Outcome { files, success: true })
}

fn run_rate_mc(config: &RunConfig) -> Result<Outcome> {
    let k = config.grid_points;
    let grid: Vec<f64> = (0..k).map(|i| config.t_max * i as f64 / (k - 1) as f64).collect();
    let curve = survival_curve(&config.domain, Point::ORIGIN, config.dt, &grid, config.samples, config.seed)?;
    let p_csv = config.out("survival.csv");
    io::write_file(&p_csv, |w| io::write_survival_csv(w, &curve))?;
    let estimate = estimate_rate(&curve)?;
    let exact = closed_form_rate(&config.domain);
    let p_json = config.out("rate_mc.json");
    io::write_json(
        &p_json,
        &json!({
            "config": config,
            "estimate": estimate,
            "closed_form": exact,
            "relative_error": exact.map(|e| (estimate.lambda - e) / e),
        }),
    )?;
    Ok(Outcome { files: vec![p_csv, p_json], success: true })
}

/// Grid mask for spectral verbs: the Grim Reaper domain is cut at the
/// largest height, unbounded strips get a box twenty widths long.
fn spectral_mask(config: &RunConfig) -> Result<(DomainSpec, GridMask)> {
    let spec = match config.domain {
        DomainSpec::GrimReaperU { scale } => {
            let h = config
                .truncation_heights
                .iter()
                .copied()
                .fold(f64::NAN, f64::max);
            if h.is_nan() {
                return Err(Error::Usage("--heights is empty".into()));
            }
            truncate_u(scale, h)?
        }
        ref other => other.clone(),
    };
    let bbox = default_bbox(&spec, 20.0).ok_or_else(|| {
        Error::Usage(format!("{} has no finite computational box", spec.kind()))
    })?;
    let mask = rasterize(&spec, config.grid_dx, bbox)?;
    Ok((spec, mask))
}

fn run_rate_eig(config: &RunConfig) -> Result<Outcome> {
    let (spec, mask) = spectral_mask(config)?;
    let mode = principal_mode(&mask)?;
    let mut files = Vec::new();
    let report = if let DomainSpec::GrimReaperU { scale } = config.domain {
        let sweep = rate_of_u(scale, config.grid_dx, &config.truncation_heights)?;
        json!({ "config": config, "sweep": sweep, "target_rate": sweep.strip_floor })
    } else {
        let exact = closed_form_rate(&spec);
        json!({
            "config": config,
            "result": mode.result,
            "closed_form": exact,
            "relative_error": exact.map(|e| (mode.result.rate - e) / e),
        })
    };
    let p = config.out("rate_eig.json");
    io::write_json(&p, &report)?;
    files.push(p);
    let p = config.out("eigenvector.csv");
    io::write_file(&p, |w| {
        io::write_field_csv(w, spectral::inside_nodes(&mask).zip(mode.vector.iter().copied()))
    })?;
    files.push(p);
    Ok(Outcome { files, success: true })
}

fn run_torsion(config: &RunConfig) -> Result<Outcome> {
    let (spec, mask) = spectral_mask(config)?;
    let field = torsion(&mask)?;
    let p_csv = config.out("torsion.csv");
    io::write_file(&p_csv, |w| io::write_field_csv(w, field.points()))?;
    let p_json = config.out("torsion.json");
    io::write_json(
        &p_json,
        &json!({
            "config": config,
            "grid_domain": spec,
            "sup_norm": field.sup_norm,
            "value_at_origin": field.value_at_origin,
            "argmax": field.argmax(),
            "iterations": field.iterations,
            "residual": field.residual,
        }),
    )?;
    Ok(Outcome { files: vec![p_csv, p_json], success: true })
}

/// Paths used by the Beurling hitting check.
pub const BEURLING_PATHS: usize = 100_000;
/// Euler paths used by the optional-stopping check (at most).
pub const DAVIS_PATHS: usize = 20_000;

/// Rate used by the certificates, and the grid pair for the torsion product.
struct SpectralSummary {
    rate: f64,
    rate_source: &'static str,
    grid_rate: f64,
    sup_norm: f64,
    detail: Value,
}

fn spectral_summary(config: &RunConfig) -> Result<SpectralSummary> {
    let (spec, mask) = spectral_mask(config)?;
    let grid = spectral::principal_rate(&mask)?;
    let field = torsion(&mask)?;
    let (rate, source, detail) = match config.domain {
        DomainSpec::GrimReaperU { scale } => {
            let sweep = rate_of_u(scale, config.grid_dx, &config.truncation_heights)?;
            (sweep.extrapolated, "truncation_extrapolated", serde_json::to_value(&sweep)?)
        }
        _ => match closed_form_rate(&spec) {
            Some(r) => (r, "closed_form", json!({ "grid": grid })),
            None => (grid.rate, "grid", json!({ "grid": grid })),
        },
    };
    Ok(SpectralSummary {
        rate,
        rate_source: source,
        grid_rate: grid.rate,
        sup_norm: field.sup_norm,
        detail,
    })
}

fn run_verify(config: &RunConfig) -> Result<Outcome> {
    let spec = &config.domain;
    let spectral = spectral_summary(config)?;
    let positions = exits(config, Method::Wos, config.samples)?;
    let re: Vec<f64> = positions.iter().map(|s| s.position.x).collect();
    let proj = re_projection(spec);
    let target = config.target.or_else(|| implied_target(spec));

    let mut certs: Vec<Certificate> = Vec::new();
    certs.push(match target {
        Some(t) if t.variance().is_some() => check_upper_bound(spectral.rate, &t, best_known_c2())?,
        _ => check_upper_bound_sampled(spectral.rate, &re, best_known_c2())?,
    });
    let support = match target {
        Some(TargetDistribution::Uniform { a, b }) => Interval::new(a, b),
        _ => proj,
    };
    certs.push(check_lower_bound(spectral.rate, support));
    certs.push(check_support_theorem(spec, &re, EdgeDensity::Generic)?);

    let n_euler = config.samples.min(DAVIS_PATHS);
    let timed: Vec<ExitSample> = euler_batch(spec, Point::ORIGIN, config.dt, DEFAULT_MAX_TIME, n_euler, config.seed)?;
    let uncensored: Vec<ExitSample> = timed.iter().copied().filter(|s| !s.censored).collect();
    certs.push(check_davis(&uncensored, Axis::Re, Point::ORIGIN)?);
    certs.push(check_beurling_monotone(10_000)?);
    let hit = slit_hitting_frequency(0.25, 1.0, BEURLING_PATHS, config.seed, 1e-6)?;
    certs.push(check_beurling_hitting(0.25, &hit)?);
    certs.push(check_torsion_product(spectral.grid_rate, spectral.sup_norm, best_known_c2()));

    let all_hold = certs.iter().all(|c| c.holds);
    let report = json!({
        "config": config,
        "rate": spectral.rate,
        "rate_source": spectral.rate_source,
        "spectral": spectral.detail,
        "euler_censored": timed.len() - uncensored.len(),
        "certificates": certs,
        "all_hold": all_hold,
    });
    let p = config.out("verify.json");
    io::write_json(&p, &report)?;
    Ok(Outcome { files: vec![p], success: all_hold })
}

fn run_plot(config: &RunConfig) -> Result<Outcome> {
    let (svg, stem) = match &config.input {
        Some(path) => {
            let table = io::read_table(path)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "plot".into());
            (render_svg(&table, &config.domain)?, stem)
        }
        None => (plot::domain_svg(&config.domain)?, format!("{}_domain", config.domain.kind())),
    };
    let p = config.out(&format!("{stem}.svg"));
    fs::write(&p, svg)?;
    Ok(Outcome { files: vec![p], success: true })
}
