//! Command-line driver. Every subcommand can also be given as a JSON run
//! configuration (`lspec run --config run.json`).
//!
//! Exit status: 0 when all checks pass, 2 when a check fails, 1 on bad input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cerf::{self, FamilyPath};
use crate::expr::{self, Expr};
use crate::genfam::{self, FamilySpec, GeneratingFamily};
use crate::hodograph::{self, ContactElement};
use crate::jet::{self, JetPoint, LegendrianLoop};
use crate::scenarios;
use crate::spectra::{self, Grids, Region};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("unsupported config schema {0} (expected 1)")]
    Schema(u32),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "lspec", version, about = "Generating families, min-max values and Cerf diagrams on J¹(S¹)")]
pub struct Cli {
    /// Directory for CSV/JSON/SVG outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    #[command(flatten)]
    Task(Command),
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// A versioned, self-contained description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    pub command: Command,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Min-max values c_k of a family, over the circle or over {f >= 0}.
    Spectrum(SpectrumArgs),
    /// Cerf diagram, min-max curves and slope check of a path F_t.
    Cerf(CerfArgs),
    /// Vertical-speed certificate for a path F_t.
    Positivity(PathArgs),
    /// Build and verify the positive loop of Legendrians.
    Loop(LoopArgs),
    /// Zeros of lambda -> c_k,M(F - lambda f) with first-jet witnesses.
    LambdaScan(LambdaScanArgs),
    /// Intersections of a loop with the surface of j¹(lambda cos kq).
    LambdaK(LambdaKArgs),
    /// Contact elements of the plane versus 1-jets on the circle.
    Hodograph(HodographArgs),
    /// Front projection of a family's Legendrian or of the high-p loop.
    Front(FrontArgs),
    /// Count intersections of a positively deformed fiber with both half-surfaces.
    Thm5(Thm5Args),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FamilyArgs {
    /// Expression g(q, w1..wK); F = sum of ±wi² + g.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub g: Option<String>,
    /// Fiber dimension.
    #[arg(long = "K", default_value_t = 0)]
    #[serde(default, rename = "K")]
    pub fiber_dim: usize,
    /// Signs of the quadratic form, comma separated (default all +1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub qsigns: Vec<i8>,
    /// JSON family file, instead of --g/--K/--qsigns.
    #[arg(long)]
    #[serde(default)]
    pub family: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_n_q")]
    pub n_q: usize,
    #[arg(long, default_value_t = 33)]
    #[serde(default = "default_n_w")]
    pub n_w: usize,
}

fn default_n_q() -> usize {
    256
}

fn default_n_w() -> usize {
    33
}

impl GridArgs {
    fn grids(&self) -> Grids {
        Grids::new(self.n_q, self.n_w)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Restrict the base to {f >= 0}.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub region: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PathArgs {
    /// Expression g(q, w1..wK, t).
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    #[arg(long = "K", default_value_t = 0)]
    #[serde(default, rename = "K")]
    pub fiber_dim: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub qsigns: Vec<i8>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    #[serde(default = "one")]
    pub t1: f64,
    #[arg(long, default_value_t = 64)]
    #[serde(default = "default_n_t")]
    pub n_t: usize,
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_n_q")]
    pub n_q: usize,
}

fn one() -> f64 {
    1.0
}

fn default_n_t() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CerfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathArgs,
    #[arg(long, default_value_t = 33)]
    #[serde(default = "default_n_w")]
    pub n_w: usize,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub region: Option<String>,
    /// Assert positivity, strict monotonicity and positive slopes.
    #[arg(long)]
    #[serde(default)]
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LoopArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Number of front SVG frames to write.
    #[arg(long, default_value_t = 16)]
    #[serde(default = "default_svg_frames")]
    pub svg_frames: usize,
}

fn default_svg_frames() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LambdaScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// The function f of q defining the region {f >= 0}.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub n_lambda: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LambdaKArgs {
    /// Use the loop j¹c.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub c: Option<f64>,
    /// Use the loop j¹h for an expression h(q).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub h: Option<String>,
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 720)]
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    720
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HodographMode {
    Fwd,
    Inv,
    Fiber,
    Family,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HodographArgs {
    #[arg(long, value_enum)]
    pub mode: HodographMode,
    /// Jet coordinates for `fwd`: q, p, u.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub jet: Vec<f64>,
    /// Plane point for `inv` and `fiber`: x1, x2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub x: Vec<f64>,
    /// Coorientation angle for `inv`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub theta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_n_q")]
    pub n_q: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FrontArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// Draw the high-p loop for this ε instead of a family.
    #[arg(long)]
    #[serde(default)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_n_q")]
    pub n_q: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Thm5Args {
    /// Base point of the fiber.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    pub x: Vec<f64>,
    /// Direction of the line through the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub direction: Vec<f64>,
    /// Deformation g(q, t) of the fiber, K = 0.
    #[arg(long, allow_hyphen_values = true, default_value = "t")]
    pub deformation: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    #[serde(default = "one")]
    pub t1: f64,
    #[arg(long, default_value_t = 16)]
    #[serde(default = "default_n_t_small")]
    pub n_t: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 500)]
    pub n_lambda: usize,
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_n_q")]
    pub n_q: usize,
}

fn default_n_t_small() -> usize {
    16
}

/// Result of a run: whether every check passed and the JSON summary that
/// was printed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            fs::write(&p, bytes).map_err(|source| CliError::Io { path: p, source })?;
        }
        Ok(())
    }

    fn csv(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>) -> Result<(), CliError> {
        if self.dir.is_some() {
            let mut buf = Vec::new();
            f(&mut buf)?;
            self.write(name, &buf)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        if self.dir.is_some() {
            let mut s = serde_json::to_string_pretty(value)?;
            s.push('\n');
            self.write(name, s.as_bytes())?;
        }
        Ok(())
    }
}

fn family_of(a: &FamilyArgs) -> Result<GeneratingFamily, CliError> {
    if let Some(path) = &a.family {
        let text = read(path)?;
        let spec: FamilySpec = serde_json::from_str(&text)?;
        return spec.to_family().map_err(CliError::input);
    }
    let g = a.g.as_deref().ok_or_else(|| CliError::Input("need --g or --family".into()))?;
    let signs = signs_of(&a.qsigns, a.fiber_dim)?;
    GeneratingFamily::parse(signs, g).map_err(CliError::input)
}

fn signs_of(qsigns: &[i8], k: usize) -> Result<Vec<i8>, CliError> {
    if qsigns.is_empty() {
        return Ok(vec![1; k]);
    }
    if qsigns.len() != k {
        return Err(CliError::Input(format!("{} signs given for K = {k}", qsigns.len())));
    }
    Ok(qsigns.to_vec())
}

fn expr_of_q(text: &str) -> Result<Expr, CliError> {
    expr::parse(text, 0).map_err(CliError::input)
}

fn region_of(text: &Option<String>) -> Result<Region, CliError> {
    Ok(match text {
        None => Region::All,
        Some(f) => Region::NonNegative(expr_of_q(f)?),
    })
}

fn path_of(a: &PathArgs) -> Result<FamilyPath, CliError> {
    let signs = signs_of(&a.qsigns, a.fiber_dim)?;
    FamilyPath::parse(signs, &a.g, (a.t0, a.t1), a.n_t).map_err(CliError::input)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn point2(v: &[f64], what: &str) -> Result<[f64; 2], CliError> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(CliError::Input(format!("{what} needs two comma-separated numbers"))),
    }
}

fn summary<T: Serialize>(pass: bool, value: &T) -> Result<Outcome, CliError> {
    Ok(Outcome { pass, summary: serde_json::to_value(value)? })
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    if config.schema != 1 {
        return Err(CliError::Schema(config.schema));
    }
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    }
    let sink = Sink { dir: config.out.clone() };
    let go = || execute(&config.command, &sink);
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(CliError::input)?;
            pool.install(go)
        }
        None => go(),
    }
}

fn execute(cmd: &Command, sink: &Sink) -> Result<Outcome, CliError> {
    match cmd {
        Command::Spectrum(a) => {
            let fam = family_of(&a.family)?;
            let region = region_of(&a.region)?;
            let s = spectra::spectrum_over(&fam, &region, a.grid.grids()).map_err(CliError::input)?;
            sink.csv("spectrum.csv", |b| s.write_csv(b))?;
            sink.json("spectrum.json", &s)?;
            summary(true, &s)
        }
        Command::Cerf(a) => {
            let path = path_of(&a.path)?;
            let region = region_of(&a.region)?;
            let d = cerf::cerf_diagram(&path, &region, a.path.n_q).map_err(CliError::input)?;
            let grids = Grids::new(a.path.n_q, a.n_w);
            let tr = cerf::viterbo_trajectory(&path, &region, grids).map_err(CliError::input)?;
            let pos = if a.positive {
                Some(cerf::check_positive_family(&path, a.path.n_q).map_err(CliError::input)?)
            } else {
                None
            };
            let slopes = cerf::slope_check(&d, a.positive);
            sink.csv("cerf.csv", |b| d.write_csv(b))?;
            sink.csv("trajectory.csv", |b| tr.write_csv(b))?;
            sink.write("cerf.svg", d.to_svg(Some(&tr)).as_bytes())?;
            #[derive(Serialize)]
            struct Report<'a> {
                branches: usize,
                events: &'a [cerf::CerfEvent],
                strict_increase: bool,
                weakly_monotone: bool,
                strictly_monotone: bool,
                min_increase: f64,
                max_increase: f64,
                slopes: &'a cerf::SlopeReport,
                positivity: Option<&'a cerf::PositiveFamilyReport>,
            }
            let rep = Report {
                branches: d.branches.len(),
                events: &d.events,
                strict_increase: tr.strict_increase,
                weakly_monotone: tr.weakly_monotone,
                strictly_monotone: tr.strictly_monotone,
                min_increase: tr.min_increase,
                max_increase: tr.max_increase,
                slopes: &slopes,
                positivity: pos.as_ref(),
            };
            sink.json("cerf.json", &rep)?;
            let pass = !a.positive
                || (pos.as_ref().is_some_and(|p| p.pass)
                    && tr.strict_increase
                    && tr.weakly_monotone
                    && slopes.pass == Some(true));
            summary(pass, &rep)
        }
        Command::Positivity(a) => {
            let path = path_of(a)?;
            let r = cerf::check_positive_family(&path, a.n_q).map_err(CliError::input)?;
            sink.json("positivity.json", &r)?;
            summary(r.pass, &r)
        }
        Command::Loop(a) => {
            let iso = scenarios::build_positive_loop(a.eps).map_err(CliError::input)?;
            let r = scenarios::verify_loop(&iso, a.eps);
            sink.json("loop.json", &r)?;
            sink.csv("loop.csv", |b| iso.frames()[0].write_csv(b))?;
            let frames = iso.frames();
            let every = (frames.len() / a.svg_frames.max(1)).max(1);
            for (i, f) in frames.iter().enumerate().step_by(every) {
                sink.write(&format!("front_{i:03}.svg"), jet::front_projection(f).to_svg().as_bytes())?;
            }
            summary(r.pass, &r)
        }
        Command::LambdaScan(a) => {
            let fam = family_of(&a.family)?;
            let f = expr_of_q(&a.f)?;
            let s = scenarios::lambda_scan(&fam, &f, a.lambda_max, a.n_lambda, a.grid.grids())
                .map_err(CliError::input)?;
            sink.csv("lambda_scan.csv", |b| s.write_csv(b))?;
            #[derive(Serialize)]
            struct Report<'a> {
                b: usize,
                distinct_positive: &'a [f64],
                crossings: &'a [scenarios::LambdaCrossing],
                monotone_decreasing: bool,
            }
            let rep = Report {
                b: s.b,
                distinct_positive: &s.distinct_positive,
                crossings: &s.crossings,
                monotone_decreasing: s.monotone_decreasing,
            };
            sink.json("lambda_scan.json", &rep)?;
            summary(s.distinct_positive.len() >= s.b, &rep)
        }
        Command::LambdaK(a) => {
            let l = match (&a.c, &a.h) {
                (Some(c), None) => LegendrianLoop::one_jet(a.samples, |_| (*c, 0.0)),
                (None, Some(h)) => {
                    let e = expr_of_q(h)?;
                    let de = e.differentiate(expr::Var::Q);
                    let ev = |x: &Expr, q: f64| x.eval(&expr::Bindings::at(q, &[])).unwrap_or(f64::NAN);
                    LegendrianLoop::one_jet(a.samples, |q| (ev(&e, q), ev(&de, q)))
                }
                _ => return Err(CliError::Input("give exactly one of --c and --h".into())),
            }
            .map_err(CliError::input)?;
            let r = scenarios::lambda_k_intersections(&l, a.k);
            sink.json("lambda_k.json", &r)?;
            summary(!r.degenerate && r.count >= 2 * a.k as usize, &r)
        }
        Command::Hodograph(a) => hodograph_cmd(a, sink),
        Command::Front(a) => {
            let l = match a.eps {
                Some(eps) => scenarios::build_high_p_loop(eps, eps, scenarios::LOOP_SAMPLES).map_err(CliError::input)?,
                None => {
                    let fam = family_of(&a.family)?;
                    let mut loops = genfam::legendrian_from_family(&fam, a.n_q).map_err(CliError::input)?;
                    if loops.len() != 1 {
                        return Err(CliError::Input(format!("family has {} components, expected 1", loops.len())));
                    }
                    loops.remove(0)
                }
            };
            let front = jet::front_projection(&l);
            sink.write("front.svg", front.to_svg().as_bytes())?;
            sink.csv("front.csv", |b| l.write_csv(b))?;
            #[derive(Serialize)]
            struct Report {
                samples: usize,
                winding: i64,
                cusps: usize,
            }
            summary(true, &Report { samples: l.len(), winding: l.winding(), cusps: front.cusps.len() })
        }
        Command::Thm5(a) => {
            let x = point2(&a.x, "--x")?;
            let d = point2(&a.direction, "--direction")?;
            let path = FamilyPath::parse(vec![], &a.deformation, (a.t0, a.t1), a.n_t).map_err(CliError::input)?;
            let r = scenarios::theorem5_experiment(x, d, &path, a.lambda_max, a.n_lambda, Grids::new(a.n_q, 33))
                .map_err(CliError::input)?;
            sink.json("thm5.json", &r)?;
            summary(r.pass, &r)
        }
    }
}

fn hodograph_cmd(a: &HodographArgs, sink: &Sink) -> Result<Outcome, CliError> {
    match a.mode {
        HodographMode::Fwd => {
            let [q, p, u] = match a.jet.as_slice() {
                [q, p, u] => [*q, *p, *u],
                _ => return Err(CliError::Input("--jet needs q,p,u".into())),
            };
            let e = hodograph::hodograph_fwd(&JetPoint::new(q, p, u));
            sink.json("hodograph.json", &e)?;
            summary(true, &e)
        }
        HodographMode::Inv => {
            let x = point2(&a.x, "--x")?;
            let p = hodograph::hodograph_inv(&ContactElement::new(x, a.theta));
            sink.json("hodograph.json", &p)?;
            summary(true, &p)
        }
        HodographMode::Fiber | HodographMode::Family => {
            let l = if a.mode == HodographMode::Fiber {
                hodograph::fiber_as_jet(point2(&a.x, "--x")?, a.n_q).map_err(CliError::input)?
            } else {
                let fam = family_of(&a.family)?;
                let mut loops = genfam::legendrian_from_family(&fam, a.n_q).map_err(CliError::input)?;
                if loops.is_empty() {
                    return Err(CliError::Input("family has an empty fiber-critical set".into()));
                }
                loops.remove(0)
            };
            let curve = hodograph::hodograph_loop(&l);
            let r = hodograph::check_legendrian_st(&curve, jet::default_tol_leg(curve.len()))
                .map_err(CliError::input)?;
            sink.csv("hodograph.csv", |b| hodograph::write_elements_csv(&curve, b))?;
            sink.write("hodograph.svg", hodograph::elements_svg(&curve, 48).as_bytes())?;
            sink.json("hodograph.json", &r)?;
            summary(r.pass, &r)
        }
    }
}

/// Parses `args`, runs, prints the JSON summary and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.command {
        CliCommand::Task(command) => Ok(RunConfig { schema: 1, command, out: cli.out, threads: cli.threads }),
        CliCommand::Run { config } => read(&config)
            .and_then(|text| serde_json::from_str::<RunConfig>(&text).map_err(CliError::from))
            .map(|mut c| {
                c.out = cli.out.or(c.out);
                c.threads = cli.threads.or(c.threads);
                c
            }),
    };
    match config.and_then(|c| run(&c)) {
        Ok(outcome) => {
            match serde_json::to_string_pretty(&outcome.summary) {
                Ok(s) => {
                    use std::io::Write;
                    let _ = writeln!(std::io::stdout().lock(), "{s}");
                }
                Err(e) => eprintln!("error: {e}"),
            }
            if !outcome.pass {
                eprintln!("check failed");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(args).unwrap();
        match cli.command {
            CliCommand::Task(command) => RunConfig { schema: 1, command, out: cli.out, threads: cli.threads },
            CliCommand::Run { .. } => panic!(),
        }
    }

    #[test]
    fn spectrum_of_linear_function() {
        let c = parse(&["lspec", "spectrum", "--g", "3*cos(q)+4*sin(q)", "--K", "0", "--n-q", "4096"]);
        let o = run(&c).unwrap();
        assert!(o.pass);
        let v = o.summary["values"].as_array().unwrap();
        assert!((v[0].as_f64().unwrap() + 5.0).abs() < 0.016);
        assert!((v[1].as_f64().unwrap() - 5.0).abs() < 0.016);
    }

    #[test]
    fn lambda_k_count() {
        let o = run(&parse(&["lspec", "lambda-k", "--c", "1", "--k", "3"])).unwrap();
        assert_eq!(o.summary["count"], 6);
        assert_eq!(o.exit_code(), 0);
    }

    #[test]
    fn failing_check_gives_status_two() {
        let o = run(&parse(&["lspec", "positivity", "--g", "cos(q) + t*sin(q)", "--n-t", "8"])).unwrap();
        assert_eq!(o.exit_code(), 2);
        assert_eq!(main_with_args(["lspec", "positivity", "--g", "cos(q) + t*sin(q)", "--n-t", "8"]), 2);
    }

    #[test]
    fn bad_input_gives_status_one() {
        assert_eq!(main_with_args(["lspec", "spectrum", "--g", "cos(q"]), 1);
        assert_eq!(main_with_args(["lspec", "nonsense"]), 1);
        assert_eq!(main_with_args(["lspec", "spectrum", "--g", "cos(q)", "--n-q", "8"]), 1);
    }

    #[test]
    fn config_round_trip() {
        let c = parse(&["lspec", "--threads", "2", "spectrum", "--g", "cos(q)", "--K", "1", "--qsigns", "-1"]);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with("{\"schema\":1,\"command\":{\"spectrum\":"));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let minimal: RunConfig =
            serde_json::from_str(r#"{"schema":1,"command":{"lambda-k":{"c":1.0,"k":2}}}"#).unwrap();
        assert_eq!(run(&minimal).unwrap().summary["count"], 4);
        let wrong = RunConfig { schema: 2, ..c };
        assert!(matches!(run(&wrong), Err(CliError::Schema(2))));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut c = parse(&["lspec", "spectrum", "--g", "cos(q) + 0.3*sin(2*q) + w1*sin(q)", "--K", "1"]);
        c.threads = Some(1);
        let a = run(&c).unwrap();
        c.threads = Some(4);
        assert_eq!(a, run(&c).unwrap());
    }

    #[test]
    fn writes_files_deterministically() {
        let dir = std::env::temp_dir().join(format!("lspec-cli-{}", std::process::id()));
        let c = parse(&["lspec", "--out", dir.to_str().unwrap(), "cerf", "--g", "cos(q) + t*(2 + sin(q))", "--n-t", "32", "--positive"]);
        let o = run(&c).unwrap();
        assert!(o.pass);
        let first: Vec<Vec<u8>> = ["cerf.csv", "trajectory.csv", "cerf.json", "cerf.svg"]
            .iter()
            .map(|n| fs::read(dir.join(n)).unwrap())
            .collect();
        run(&c).unwrap();
        for (n, bytes) in ["cerf.csv", "trajectory.csv", "cerf.json", "cerf.svg"].iter().zip(first) {
            assert_eq!(fs::read(dir.join(n)).unwrap(), bytes, "{n}");
        }
        let _ = fs::remove_dir_all(dir);
    }
}
