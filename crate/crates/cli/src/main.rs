mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pelastica::closure::{closure_grid, lambda_p, solve_closure, ClosureIndex};
use pelastica::curve::{CurveTrace, DEFAULT_SAMPLES_PER_PERIOD, DEFAULT_STEP_TOL};
use pelastica::export::{
    fmt_num, write_file, write_json, write_mean_curvature, write_obj, write_ply, write_trace_csv, write_trace_json,
    write_trace_svg,
};
use pelastica::hopf::{
    build_torus, horizontal_lift, CoverPolicy, DEFAULT_POLE, DEFAULT_S_SAMPLES_PER_PERIOD, DEFAULT_T_SAMPLES,
};
use pelastica::stability::{upsilon, upsilon_elliptic_report, upsilon_report};
use pelastica::table::{diff_report, reproduce_table, write_table_csv};
use pelastica::{ElasticaParams, Error};

use config::{parse_pole, FileConfig};

const DEFAULT_CLOSURE_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "pelastica", version, about = "Closed p-elastic curves on the 2-sphere and their Hopf tori")]
struct Cli {
    /// Settings file with `key = value` lines (tol, step_tol, samples, t_samples, rings, pole).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Closure tolerance on `Λ_p(a) − 2πn/m`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the table of closed curves and compare with the published values.
    Table1,
    /// Trace a curve and write it as CSV, JSON or SVG.
    Curve(CurveArgs),
    /// Second variation along the normal, `δ²Θ_p[1] = 2mΥ_p(a)`.
    Stability(StabilityArgs),
    /// Hopf torus over a closed curve, projected to ℝ³.
    Hopf(HopfArgs),
    /// `Λ_p` or `Υ_p` over the momentum grid.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct Target {
    #[arg(long = "p")]
    p: f64,
    #[arg(long = "n", requires = "m", conflicts_with = "a")]
    n: Option<u32>,
    #[arg(long = "m")]
    m: Option<u32>,
    #[arg(long = "a")]
    a: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    Obj,
    Ply,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv])]
    format: Vec<Format>,
    /// Samples per curvature period.
    #[arg(long)]
    samples: Option<usize>,
    /// Curvature periods to trace when `--a` is given.
    #[arg(long, default_value_t = 1)]
    periods: u32,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    target: Target,
    /// Use the elliptic closed form (p = 1/2 only).
    #[arg(long)]
    elliptic: bool,
}

#[derive(Args)]
struct HopfArgs {
    #[arg(long = "p")]
    p: f64,
    #[arg(long = "n")]
    n: u32,
    #[arg(long = "m")]
    m: u32,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Obj])]
    format: Vec<Format>,
    /// Points per fiber.
    #[arg(long)]
    samples: Option<usize>,
    /// Fiber rings per curvature period.
    #[arg(long)]
    rings: Option<usize>,
    /// Projection pole `x,y,z,w`.
    #[arg(long, value_parser = parse_pole)]
    pole: Option<[f64; 4]>,
    /// Refuse to glue an unclosed lift through its holonomy.
    #[arg(long)]
    strict_covers: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Lambda,
    Upsilon,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "p")]
    p: f64,
    #[arg(long, value_enum, default_value_t = Quantity::Lambda)]
    quantity: Quantity,
}

enum Failure {
    Lib(Error),
    Usage(String),
    TableMismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inadmissible { .. }
        | Error::Domain(_)
        | Error::NoPeriodicOrbit { .. }
        | Error::NearCircularTarget { .. }
        | Error::Seed { .. }
        | Error::PoleCollision { .. } => 2,
        Error::ConvergenceFailure(_) | Error::NotFound(_) | Error::StepFailure { .. } | Error::CoverOverflow { .. } => 3,
        Error::InvariantBreach(_) | Error::Resolution { .. } => 4,
        Error::Io(_) | Error::Json(_) => 5,
    }
}

struct Settings {
    out: PathBuf,
    tol: f64,
    step_tol: f64,
    samples: Option<usize>,
    t_samples: Option<usize>,
    rings: Option<usize>,
    pole: Option<[f64; 4]>,
}

fn tag(p: f64, n: u32, m: u32) -> String {
    format!("p{}_n{n}_m{m}", fmt_num(p))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_table1(s: &Settings) -> Result<(), Failure> {
    let reports = reproduce_table(s.tol)?;
    ensure_dir(&s.out)?;
    let path = s.out.join("table1.csv");
    write_file(&path, |w| write_table_csv(&reports, w))?;
    print!("{}", diff_report(&reports));
    println!("wrote {}", path.display());
    if reports.iter().all(|r| r.pass()) { Ok(()) } else { Err(Failure::TableMismatch) }
}

fn closed_index(p: f64, n: u32, m: u32, tol: f64) -> Result<ClosureIndex, Failure> {
    Ok(solve_closure(p, &ClosureIndex::new(n, m)?, tol)?)
}

fn cmd_curve(s: &Settings, args: &CurveArgs) -> Result<(), Failure> {
    let t = &args.target;
    let spp = args.samples.or(s.samples).unwrap_or(DEFAULT_SAMPLES_PER_PERIOD);
    let (trace, name) = match (t.n, t.m, t.a) {
        (Some(n), Some(m), None) => {
            let idx = closed_index(t.p, n, m, s.tol)?;
            let a = idx.a_solved.expect("solved");
            (CurveTrace::closed_at(t.p, a, idx, spp, s.step_tol)?, format!("curve_{}", tag(t.p, n, m)))
        }
        (None, _, Some(a)) => {
            let params = ElasticaParams::new(t.p, a)?;
            let periods = t.m.unwrap_or(args.periods);
            let tr = CurveTrace::over_periods(&params, periods, spp, s.step_tol)?;
            (tr, format!("curve_p{}_a{}", fmt_num(t.p), fmt_num(a)))
        }
        _ => return Err(Failure::Usage("give either --n and --m, or --a".into())),
    };
    ensure_dir(&s.out)?;
    for f in &args.format {
        let path = s.out.join(format!("{name}.{}", extension(*f)));
        match f {
            Format::Csv => write_file(&path, |w| write_trace_csv(&trace, w))?,
            Format::Json => write_file(&path, |w| write_trace_json(&trace, w))?,
            Format::Svg => write_file(&path, |w| write_trace_svg(&trace, w, 600))?,
            Format::Obj | Format::Ply => return Err(Failure::Usage("curves export as csv, json or svg".into())),
        }
        println!("wrote {}", path.display());
    }
    println!(
        "a = {}  closure gap = {}  winding number = {}  periods = {}",
        fmt_num(trace.a),
        fmt_num(trace.closure_gap),
        trace.winding_number,
        trace.periods
    );
    Ok(())
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Svg => "svg",
        Format::Obj => "obj",
        Format::Ply => "ply",
    }
}

fn cmd_stability(s: &Settings, args: &StabilityArgs) -> Result<(), Failure> {
    let t = &args.target;
    let (a, m, name) = match (t.n, t.m, t.a) {
        (Some(n), Some(m), None) => {
            let idx = closed_index(t.p, n, m, s.tol)?;
            (idx.a_solved.expect("solved"), m, format!("stability_{}", tag(t.p, n, m)))
        }
        (None, m, Some(a)) => (a, m.unwrap_or(1), format!("stability_p{}_a{}", fmt_num(t.p), fmt_num(a))),
        _ => return Err(Failure::Usage("give either --n and --m, or --a".into())),
    };
    let report = if args.elliptic {
        if t.p != 0.5 {
            return Err(Failure::Usage("the elliptic closed form holds only for p = 0.5".into()));
        }
        upsilon_elliptic_report(a, m)?
    } else {
        upsilon_report(&ElasticaParams::new(t.p, a)?, m)?
    };
    ensure_dir(&s.out)?;
    let path = s.out.join(format!("{name}.json"));
    write_file(&path, |w| write_json(&report, w))?;
    println!("upsilon = {}  delta2 = {}", fmt_num(report.upsilon), fmt_num(report.delta_squared));
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_hopf(s: &Settings, args: &HopfArgs) -> Result<(), Failure> {
    let spp = s.samples.unwrap_or(DEFAULT_SAMPLES_PER_PERIOD);
    let idx = closed_index(args.p, args.n, args.m, s.tol)?;
    let a = idx.a_solved.expect("solved");
    let trace = CurveTrace::closed_at(args.p, a, idx, spp, s.step_tol)?;
    let lift = horizontal_lift(&trace, None)?;
    let policy = if args.strict_covers { CoverPolicy::Strict } else { CoverPolicy::Twisted };
    let t_samples = args.samples.or(s.t_samples).unwrap_or(DEFAULT_T_SAMPLES);
    let rings = args.rings.or(s.rings).unwrap_or(DEFAULT_S_SAMPLES_PER_PERIOD);
    let mut patch = build_torus(&trace, &lift, t_samples, rings, policy)?;
    patch.project(args.pole.or(s.pole).unwrap_or(DEFAULT_POLE))?;

    ensure_dir(&s.out)?;
    let name = format!("hopf_{}", tag(args.p, args.n, args.m));
    let mut written = Vec::new();
    for f in &args.format {
        match f {
            Format::Obj => {
                let obj = s.out.join(format!("{name}.obj"));
                write_file(&obj, |w| write_obj(&patch, w))?;
                let h = s.out.join(format!("{name}.H.txt"));
                write_file(&h, |w| write_mean_curvature(&patch, w))?;
                written.extend([obj, h]);
            }
            Format::Ply => {
                let ply = s.out.join(format!("{name}.ply"));
                write_file(&ply, |w| write_ply(&patch, w))?;
                written.push(ply);
            }
            _ => return Err(Failure::Usage("tori export as obj or ply".into())),
        }
    }
    let meta = s.out.join(format!("{name}.json"));
    write_file(&meta, |w| write_json(&patch.metadata(), w))?;
    written.push(meta);
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!("holonomy = {}  covers = {}", fmt_num(patch.holonomy_angle), patch.covers);
    Ok(())
}

fn cmd_sweep(s: &Settings, args: &SweepArgs) -> Result<(), Failure> {
    let grid = closure_grid(args.p)?;
    let values = grid
        .par_iter()
        .map(|prm| match args.quantity {
            Quantity::Lambda => lambda_p(prm),
            Quantity::Upsilon => upsilon(prm),
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let label = match args.quantity {
        Quantity::Lambda => "lambda",
        Quantity::Upsilon => "upsilon",
    };
    ensure_dir(&s.out)?;
    let path = s.out.join(format!("sweep_{label}_p{}.csv", fmt_num(args.p)));
    write_file(&path, |w| {
        writeln!(w, "a,{label}")?;
        for (prm, v) in grid.iter().zip(&values) {
            writeln!(w, "{},{}", fmt_num(prm.a), fmt_num(*v))?;
        }
        Ok(())
    })?;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    println!(
        "{} grid points, {label} from {} to {}, {}",
        values.len(),
        fmt_num(values[0]),
        fmt_num(*values.last().unwrap()),
        if decreasing { "strictly decreasing" } else { "not monotone" }
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("PELASTICA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("PELASTICA_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Failure::Usage("PELASTICA_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
        None => FileConfig::default(),
    };
    let settings = Settings {
        out: cli.out,
        tol: cli.tol.or(file.tol).unwrap_or(DEFAULT_CLOSURE_TOL),
        step_tol: file.step_tol.unwrap_or(DEFAULT_STEP_TOL),
        samples: file.samples,
        t_samples: file.t_samples,
        rings: file.rings,
        pole: file.pole,
    };
    match &cli.command {
        Command::Table1 => cmd_table1(&settings),
        Command::Curve(a) => cmd_curve(&settings, a),
        Command::Stability(a) => cmd_stability(&settings, a),
        Command::Hopf(a) => cmd_hopf(&settings, a),
        Command::Sweep(a) => cmd_sweep(&settings, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::TableMismatch) => {
            eprintln!("error: some table cells fall outside tolerance");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
