//! Command-line front end for the `omega` binary.
//!
//! Exit codes: 0 success, 1 usage / IO / infeasible region, 2 solve result
//! flagged as not admissible, 3 admissibility check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::bench::{self, BenchInstance, PlotGrid, RunConfig};
use crate::error::{Error, Result};
use crate::pencil::{self, AdmissibilityVerdict, MatrixPair, SpectrumOptions};
use crate::region::{LmiRegion, DEFAULT_MARGIN_TOL};
use crate::solve::{self, Algorithm, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "omega", version, about = "Nearest Ω-admissible matrix pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print more detail (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the nearest admissible pair.
    Solve(SolveArgs),
    /// Report the spectrum and region margins of a pair.
    Check(CheckArgs),
    /// Run a benchmark suite and write result tables and traces.
    Bench(BenchArgs),
    /// Describe a region file.
    RegionInfo(RegionArgs),
    /// Emit region boundary and eigenvalue scatter CSVs.
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Fgm,
    Bcd,
    Auto,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Fgm => Algorithm::Fgm,
            AlgoArg::Bcd => Algorithm::Bcd,
            AlgoArg::Auto => Algorithm::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Args)]
pub struct TolArgs {
    /// Margin below which λ_max(f_Ω(λ)) counts as inside.
    #[arg(long, default_value_t = DEFAULT_MARGIN_TOL)]
    pub tol_margin: f64,
    /// Absolute singular-value threshold for rank(E).
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Relative |β| threshold below which an eigenvalue is infinite.
    #[arg(long)]
    pub tol_beta: Option<f64>,
}

impl TolArgs {
    fn spectrum_options(&self) -> SpectrumOptions {
        let mut o = SpectrumOptions::default();
        if let Some(b) = self.tol_beta {
            o.beta_tol = b;
        }
        o.rank_tol = self.tol_rank;
        o
    }

    fn is_default(&self) -> bool {
        self.tol_margin == DEFAULT_MARGIN_TOL && self.tol_rank.is_none() && self.tol_beta.is_none()
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Pair file (JSON `{"E", "A"}` or CSV with E rows above A rows).
    #[arg(long)]
    pub pair: PathBuf,
    /// Region file; the open left half-plane when omitted.
    #[arg(long)]
    pub region: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
    pub algo: AlgoArg,
    /// Weight of the ‖E − Ẽ‖² term.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub time: f64,
    /// Output directory for result.json, pair.json and trace.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace CSV path (defaults to <out>/trace.csv).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub pair: PathBuf,
    #[arg(long)]
    pub region: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Hurwitz,
    Schur,
    Composite,
    All,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Suite::Hurwitz)]
    pub suite: Suite,
    /// Problem size (the MSD rows use n blocks, so 2n unknowns).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Per-instance budget in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub time: f64,
    #[arg(long, default_value_t = 2017)]
    pub seed: u64,
    /// Noise level of the composite instance.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Concurrent solves; defaults to the available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub region: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub region: PathBuf,
    /// Pair files whose eigenvalues are plotted, labeled by file stem.
    #[arg(long)]
    pub pair: Vec<PathBuf>,
    /// Also solve each pair and plot the approximation.
    #[arg(long)]
    pub solve: bool,
    #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 30.0)]
    pub time: f64,
    /// Grid points per axis for the boundary scan.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Plot window `re_min,re_max,im_min,im_max`.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

/// `%.12g`-style formatting used for every number the CLI prints.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im < 0.0 { "-" } else { "+" };
    format!("{}{}{}i", fmt_num(z.re), sign, fmt_num(z.im.abs()))
}

fn load_region(path: Option<&Path>) -> Result<LmiRegion> {
    match path {
        None => Ok(LmiRegion::hurwitz()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Format(format!("cannot read region file {}: {e}", p.display())))?;
            LmiRegion::from_json_str(&text).map_err(|e| Error::Format(format!("region file {}: {e}", p.display())))
        }
    }
}

fn load_pair(path: &Path) -> Result<MatrixPair> {
    MatrixPair::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Format(format!("cannot read pair file {}: {io}", path.display())),
        other => Error::Format(format!("pair file {}: {other}", path.display())),
    })
}

fn require_nonempty(region: &LmiRegion) -> Result<()> {
    if region.is_empty() {
        return Err(Error::InfeasibleRegion(
            "the intersection contains no point (no real z satisfies every primitive)".into(),
        ));
    }
    Ok(())
}

fn print_verdict(out: &mut dyn Write, v: &AdmissibilityVerdict) -> Result<()> {
    let r = &v.report;
    writeln!(out, "n: {}", r.n)?;
    writeln!(out, "regular: {}", r.is_regular)?;
    writeln!(out, "rank(E): {}", r.rank_e)?;
    writeln!(out, "finite eigenvalues: {}", r.num_finite())?;
    writeln!(out, "infinite eigenvalues: {}", r.num_infinite)?;
    writeln!(out, "impulse-free: {}", r.is_impulse_free)?;
    for (ev, m) in r.finite_eigenvalues.iter().zip(&v.margins) {
        writeln!(
            out,
            "  lambda = {}  margin = {}  residual = {}",
            fmt_complex(ev.value()),
            fmt_num(*m),
            fmt_num(ev.right_residual.max(ev.left_residual))
        )?;
    }
    if let Some(w) = v.worst_margin {
        writeln!(out, "worst margin: {}", fmt_num(w))?;
    }
    writeln!(out, "admissible: {}", v.admissible)?;
    for f in &v.failures {
        writeln!(out, "failure: {f}")?;
    }
    Ok(())
}

fn solve_command(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let pair = load_pair(&args.pair)?;
    let region = load_region(args.region.as_deref())?;
    require_nonempty(&region)?;
    let opts = SolveOptions { algorithm: args.algo.into(), mu: args.mu, max_time_s: args.time };
    let mut res = solve::solve(&pair.e, &pair.a, &region, opts)?;
    if !args.tol.is_default() {
        res.verdict = pencil::admissibility_check_with(&res.pair, &region, args.tol.tol_margin, args.tol.spectrum_options());
        res.admissible = res.verdict.admissible;
    }
    let trace_path = args.trace.clone().or_else(|| args.out.as_ref().map(|d| d.join("trace.csv")));
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    if let Some(tp) = &trace_path {
        res.write_trace_csv(fs::File::create(tp)?)?;
    }
    if let Some(dir) = &args.out {
        let mut json = res.to_json_value();
        json["trace_path"] = trace_path.as_ref().map_or(serde_json::Value::Null, |p| p.display().to_string().into());
        fs::write(dir.join("result.json"), serde_json::to_string_pretty(&json)?)?;
        fs::write(dir.join("pair.json"), res.pair.to_json_string())?;
    }
    writeln!(out, "algorithm: {}", res.algorithm)?;
    writeln!(out, "relative error: {}", fmt_num(res.relative_error))?;
    writeln!(out, "relative error (%): {}", fmt_num(100.0 * res.relative_error))?;
    writeln!(out, "objective: {}", fmt_num(res.objective))?;
    writeln!(out, "iterations: {}", res.iterations)?;
    writeln!(out, "elapsed (s): {}", fmt_num(res.elapsed_s))?;
    if let Some(w) = res.verdict.worst_margin {
        writeln!(out, "worst margin: {}", fmt_num(w))?;
    }
    for a in &res.adjustments {
        writeln!(out, "adjustment: {a}")?;
    }
    writeln!(out, "admissible: {}", res.admissible)?;
    for f in &res.verdict.failures {
        writeln!(out, "failure: {f}")?;
    }
    Ok(if res.admissible { EXIT_OK } else { EXIT_FLAGGED })
}

fn check_command(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let pair = load_pair(&args.pair)?;
    let region = load_region(args.region.as_deref())?;
    let v = pencil::admissibility_check_with(&pair, &region, args.tol.tol_margin, args.tol.spectrum_options());
    print_verdict(out, &v)?;
    Ok(if v.admissible { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn bench_command(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let mut instances: Vec<BenchInstance> = Vec::new();
    if matches!(args.suite, Suite::Hurwitz | Suite::All) {
        instances.extend(bench::hurwitz_suite(args.n, args.time)?);
    }
    if matches!(args.suite, Suite::Schur | Suite::All) {
        instances.extend(bench::schur_suite(args.n, args.time, args.seed)?);
    }
    if matches!(args.suite, Suite::Composite | Suite::All) {
        instances.extend(bench::composite_suite(args.n, args.eps, args.seed, args.time)?);
    }
    for inst in &mut instances {
        inst.mu = args.mu;
    }
    let cfg = RunConfig { workers: args.workers, out_dir: Some(args.out.clone()) };
    let runs = bench::run_table(&instances, &cfg)?;
    writeln!(out, "instance,algorithm,relative_error_pct,time_s,admissible")?;
    let mut flagged = false;
    for r in &runs {
        let row = &r.row;
        flagged |= row.error.is_some() || row.admissible == Some(false);
        writeln!(
            out,
            "{},{},{},{},{}",
            row.instance,
            row.algorithm,
            row.relative_error_pct.map_or_else(|| "NA".into(), fmt_num),
            row.time_s.map_or_else(|| "NA".into(), fmt_num),
            row.admissible.map_or_else(|| row.error.clone().unwrap_or_default(), |a| a.to_string()),
        )?;
    }
    writeln!(out, "results: {}", args.out.join("results.csv").display())?;
    Ok(if flagged { EXIT_FLAGGED } else { EXIT_OK })
}

fn region_info_command(args: &RegionArgs, out: &mut dyn Write) -> Result<i32> {
    let region = load_region(Some(&args.region))?;
    writeln!(out, "size: {}", region.size())?;
    for p in region.primitives() {
        writeln!(out, "primitive: {}", serde_json::to_string(&p)?)?;
    }
    if region.primitives().is_empty() {
        writeln!(out, "primitive: raw")?;
    }
    writeln!(out, "uniform (B = 0): {}", region.b().iter().all(|v| *v == 0.0))?;
    writeln!(out, "uniform part nonempty: {}", region.uniform_part_nonempty())?;
    writeln!(out, "hurwitz: {}", region.is_hurwitz())?;
    match region.real_interval() {
        Some(iv) => {
            writeln!(out, "real interval: ({}, {})", fmt_num(iv.lo), fmt_num(iv.hi))?;
            if let Some(x) = region.interior_real_point() {
                writeln!(out, "interior point: {}", fmt_num(x))?;
            }
            writeln!(out, "contained in closed left half-plane: {}", region.in_closed_left_half_plane(1e-9))?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "empty: true")?;
            Err(Error::InfeasibleRegion("the intersection contains no point".into()))
        }
    }
}

fn plot_data_command(args: &PlotArgs, out: &mut dyn Write) -> Result<i32> {
    let region = load_region(Some(&args.region))?;
    require_nonempty(&region)?;
    fs::create_dir_all(&args.out)?;
    let mut labeled: Vec<(String, MatrixPair)> = Vec::new();
    let mut code = EXIT_OK;
    for path in &args.pair {
        let pair = load_pair(path)?;
        let label = path.file_stem().map_or_else(|| "pair".into(), |s| s.to_string_lossy().into_owned());
        if args.solve {
            let opts = SolveOptions { algorithm: args.algo.into(), mu: args.mu, max_time_s: args.time };
            let res = solve::solve(&pair.e, &pair.a, &region, opts)?;
            let traces = args.out.join("traces");
            fs::create_dir_all(&traces)?;
            res.write_trace_csv(fs::File::create(traces.join(format!("{label}.csv")))?)?;
            if !res.admissible {
                code = EXIT_FLAGGED;
            }
            labeled.push((format!("{label}_approx"), res.pair));
        }
        labeled.push((label, pair));
    }
    let grid = match &args.window {
        Some(w) => PlotGrid::new((w[0], w[1]), (w[2], w[3]), args.grid, args.grid),
        None => {
            let mut pts: Vec<Complex64> = labeled.iter().flat_map(|(_, p)| pencil::spectrum(p).eigenvalues()).collect();
            if let Some(iv) = region.real_interval() {
                pts.extend([iv.lo, iv.hi].into_iter().filter(|x| x.is_finite()).map(|x| Complex64::new(x, 0.0)));
            }
            PlotGrid::around(&pts, args.grid)
        }
    };
    let bundle = bench::region_plot_data(&region, &labeled, &grid)?;
    bundle.write_to(&args.out)?;
    writeln!(out, "boundary points: {}", bundle.boundary.len())?;
    writeln!(out, "eigenvalues: {}", bundle.eigenvalues.len())?;
    writeln!(
        out,
        "window: [{}, {}] x [{}, {}]",
        fmt_num(grid.re.0),
        fmt_num(grid.re.1),
        fmt_num(grid.im.0),
        fmt_num(grid.im.1)
    )?;
    writeln!(out, "written to: {}", args.out.display())?;
    Ok(code)
}

/// Parse `args` (including the program name) and run the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => solve_command(a, out),
        Command::Check(a) => check_command(a, out),
        Command::Bench(a) => bench_command(a, out),
        Command::RegionInfo(a) => region_info_command(a, out),
        Command::PlotData(a) => plot_data_command(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if cli.verbose > 0 {
                let _ = writeln!(err, "{e:?}");
            }
            EXIT_USAGE
        }
    }
}
