//! The `fpquad` command line: single evaluations, mesh sweeps and the
//! figure data for the two builtin families.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
//! 4 I/O failure.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fpquad::integrand::BUILTIN_NAMES;
use fpquad::{
    builtin, fp_epsilon_limit, fp_integral, ClosedForm, Complex, Contour, DeTransform,
    EpsilonSchedule, Formula, FpProblem, Integrand, QuadratureParams,
};

#[derive(Debug, Parser)]
#[command(
    name = "fpquad",
    version,
    about = "Hadamard finite-part integrals by contour DE quadrature"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one integral at a fixed mesh.
    Compute(ComputeArgs),
    /// Sweep h = 2^-1, 2^-2, ... and write a CSV of errors.
    Converge(ConvergeArgs),
    /// Write the sweep CSVs for both builtin families, alpha = 0.5, n = 1..3.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Builtin name (runge, expdecay) or an expression in x.
    #[arg(long = "f")]
    pub f: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Vertical offset of the contour, in (0,1).
    #[arg(long, default_value_t = Contour::DEFAULT_DELTA)]
    pub delta: f64,
    /// sinh-sinh or sinh.
    #[arg(long, default_value_t = DeTransform::SinhSinh)]
    pub transform: DeTransform,
    /// Use the two-sided rule even when the folded one applies.
    #[arg(long)]
    pub force_full: bool,
    /// Override whether the integrand is real on the real axis.
    #[arg(long)]
    pub real_on_axis: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 0.0625)]
    pub h: f64,
    /// Also evaluate at 2h and report |I_h - I_2h|.
    #[arg(long)]
    pub compare_coarser: bool,
    /// Relative truncation tolerance.
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    /// Maximum retained terms per side.
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// `builtin` (closed form), `oracle` (epsilon limit) or a number.
    #[arg(long = "ref", default_value = "builtin", allow_negative_numbers = true)]
    pub reference: String,
    /// Number of meshes, h = 2^-1 ... 2^-levels.
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: u32,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: u32,
}

pub const DEFAULT_LEVELS: u32 = 7;
const MAX_LEVELS: u32 = 12;

pub const CSV_HEADER: &str = "h,N_total,value,rel_error,est_error";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<fpquad::Error> for CliError {
    fn from(e: fpquad::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// A validated problem together with its path and rule choices.
pub struct Setup {
    pub problem: FpProblem,
    pub contour: Contour,
    pub transform: DeTransform,
    pub formula: Formula,
}

pub fn resolve_integrand(src: &str) -> fpquad::Result<Integrand> {
    if BUILTIN_NAMES.contains(&src) {
        builtin(src)
    } else {
        Integrand::from_expr(src)
    }
}

impl ProblemArgs {
    pub fn setup(&self) -> Result<Setup, CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage("alpha must be in (0,1)".into()));
        }
        if self.n < 1 {
            return Err(CliError::Usage("n must be >= 1".into()));
        }
        let contour = Contour::new(self.delta)?;
        let mut f = resolve_integrand(&self.f)?;
        if let Some(real) = self.real_on_axis {
            f = f.with_real_on_axis(real);
        }
        Ok(Setup {
            problem: FpProblem::new(self.n, self.alpha, f)?,
            contour,
            transform: self.transform,
            formula: if self.force_full {
                Formula::Full
            } else {
                Formula::Auto
            },
        })
    }
}

/// 17 significant digits, `.` separator.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cmd_compute(
    args: &ComputeArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let s = args.problem.setup()?;
    let q = QuadratureParams {
        h: args.h,
        trunc_rel_tol: args.tol,
        n_cap: args.cap,
        record_trace: false,
    };
    q.validate()?;
    let r = fp_integral(&s.problem, &s.contour, s.transform, &q, s.formula)?;
    let est = if args.compare_coarser {
        let coarse = QuadratureParams {
            h: 2.0 * args.h,
            ..q
        };
        coarse
            .validate()
            .map_err(|_| CliError::Usage("--compare-coarser needs h <= 0.5".into()))?;
        let c = fp_integral(&s.problem, &s.contour, s.transform, &coarse, s.formula)?;
        Some((r.value - c.value).norm())
    } else {
        None
    };
    for w in &r.warnings {
        writeln!(err, "warning: {w}").ok();
    }
    let formula = match r.formula {
        Formula::Symmetric => "symmetric",
        _ => "full",
    };
    let mut lines = vec![("value", fmt_num(r.value.re))];
    if r.value.im != 0.0 {
        lines.push(("value_imag", fmt_num(r.value.im)));
    }
    lines.extend([
        ("n_plus", r.n_plus.to_string()),
        ("n_minus", r.n_minus.to_string()),
        ("n_total", r.n_total().to_string()),
        ("evaluations", r.evaluations.to_string()),
        ("formula", formula.to_string()),
        ("termination", r.termination.to_string()),
    ]);
    if let Some(e) = est {
        lines.push(("est_error", fmt_num(e)));
    }
    for (k, v) in lines {
        writeln!(out, "{k} = {v}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub n_total: usize,
    pub value: Complex,
    pub rel_error: f64,
    pub est_error: Option<f64>,
}

/// Evaluates on `h = 2^-1 … 2^-levels`. `rel_error` is absolute when the
/// reference is zero.
pub fn sweep(s: &Setup, levels: u32, reference: f64) -> fpquad::Result<Vec<SweepRow>> {
    let mut rows: Vec<SweepRow> = Vec::with_capacity(levels as usize);
    for j in 1..=levels {
        let h = 0.5f64.powi(j as i32);
        let q = QuadratureParams::new(h)?;
        let r = fp_integral(&s.problem, &s.contour, s.transform, &q, s.formula)?;
        let diff = (r.value - reference).norm();
        rows.push(SweepRow {
            h,
            n_total: r.n_total(),
            value: r.value,
            rel_error: if reference == 0.0 {
                diff
            } else {
                diff / reference.abs()
            },
            est_error: rows.last().map(|p| (r.value - p.value).norm()),
        });
    }
    Ok(rows)
}

pub fn write_csv(rows: &[SweepRow], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let est = r.est_error.map(fmt_num).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.h),
            r.n_total,
            fmt_num(r.value.re),
            fmt_num(r.rel_error),
            est
        )?;
    }
    Ok(())
}

fn reference_value(spec: &str, s: &Setup) -> Result<f64, CliError> {
    let p = &s.problem;
    match spec {
        "builtin" => {
            let name = p.integrand().name();
            let cf = ClosedForm::for_builtin(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "no closed form for `{name}`; use --ref oracle or a number"
                ))
            })?;
            Ok(cf.value(p.n(), p.alpha())?)
        }
        "oracle" => Ok(fp_epsilon_limit(p, &EpsilonSchedule::default())?.value),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "--ref must be builtin, oracle or a number, got `{other}`"
                ))
            }),
    }
}

fn check_levels(levels: u32) -> Result<(), CliError> {
    if (1..=MAX_LEVELS).contains(&levels) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "levels must be in 1..={MAX_LEVELS}"
        )))
    }
}

pub fn cmd_converge(args: &ConvergeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_levels(args.levels)?;
    let s = args.problem.setup()?;
    let reference = reference_value(&args.reference, &s)?;
    let rows = sweep(&s, args.levels, reference)?;
    match &args.output {
        Some(path) => write_file(path, &rows),
        None => write_csv(&rows, out).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn write_file(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| io_error(path, e))?;
    fs::write(path, buf).map_err(|e| io_error(path, e))
}

/// `(file stem, builtin)` for the figure data.
pub const REPRO_FAMILIES: [(&str, &str); 2] = [("i", "runge"), ("ii", "expdecay")];
pub const REPRO_ALPHA: f64 = 0.5;
pub const REPRO_N: [u32; 3] = [1, 2, 3];

pub fn repro_file_name(family: &str, n: u32) -> String {
    format!("fig3_{family}_n{n}.csv")
}

pub fn cmd_repro(args: &ReproArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_levels(args.levels)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| io_error(&args.out_dir, e))?;
    for (family, name) in REPRO_FAMILIES {
        for n in REPRO_N {
            let s = ProblemArgs {
                f: name.to_string(),
                n,
                alpha: REPRO_ALPHA,
                delta: Contour::DEFAULT_DELTA,
                transform: DeTransform::SinhSinh,
                force_full: false,
                real_on_axis: None,
            }
            .setup()?;
            let reference = reference_value("builtin", &s)?;
            let rows = sweep(&s, args.levels, reference)?;
            let path = args.out_dir.join(repro_file_name(family, n));
            write_file(&path, &rows)?;
            writeln!(out, "{}", path.display()).ok();
        }
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Compute(a) => cmd_compute(a, out, err),
        Command::Converge(a) => cmd_converge(a, out),
        Command::Repro(a) => cmd_repro(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            e.exit_code()
        }
    }
}
