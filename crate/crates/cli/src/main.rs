use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use lelong::estimators::{lct_numeric_detailed, lelong_numeric, write_fit_csv, AnnulusSchedule};
use lelong::json::{expr_to_string_pretty, parse_expr_file};
use lelong::verify::{
    overall_verdict, verify_levelset, verify_levelset_sandwich, verify_radial_identity,
    verify_restriction_monotonicity, verify_theorem1, CheckVerdict, HarnessConfig, VerificationReport,
};
use lelong::{lct_exact, lelong_exact, make_phi_k, PshExpr, SliceMap};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lelong", version, about = "Lelong numbers and singularity exponents of plurisubharmonic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and numeric Lelong number at each point.
    Lelong(ComputeArgs),
    /// Exact (or bracketing) and numeric complex singularity exponent at each point.
    Lct(ComputeArgs),
    /// Write the symmetrized pullback of an expression as an expression file.
    Construct(ConstructArgs),
    /// Run a verification harness.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Value, Lelong number and threshold of the symmetrized pullback.
    Thm1(HarnessArgs),
    /// Monotonicity of both invariants under restriction to slices through a point.
    Restriction(HarnessArgs),
    /// c * nu = n for a radial expression at the origin.
    Radial(HarnessArgs),
    /// Level-set inclusions for the symmetrized pullback.
    Sandwich(HarnessArgs),
    /// Lelong level sets of log|f| as zero loci of partial derivatives.
    Levelset(HarnessArgs),
}

#[derive(Args)]
struct Common {
    /// Expression file (JSON).
    #[arg(long)]
    expr: PathBuf,
    /// Point as comma-separated components `re` or `re:im`; repeatable. Defaults to the origin.
    #[arg(long = "point", allow_hyphen_values = true)]
    points: Vec<String>,
    #[arg(long)]
    r0: Option<f64>,
    /// Number of dyadic annuli (or radii).
    #[arg(long)]
    annuli: Option<usize>,
    /// Samples per annulus.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bisection tolerance for numeric thresholds.
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
    /// JSON report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the generation time out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: Common,
    /// CSV dump of the fit at the reported threshold (lct, single point only).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    expr: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Output expression file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HarnessArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Level for the sandwich and level-set checks.
    #[arg(long)]
    c: Option<f64>,
    /// Slice through the first point: columns separated by `;`, components as in --point; repeatable.
    #[arg(long = "slice", allow_hyphen_values = true)]
    slices: Vec<String>,
    /// Allow sampled suprema over unitary blocks of more than one coordinate.
    #[arg(long)]
    sampled_unitary: bool,
}

/// Failure with exit status 2 and a message for standard error.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = Result<T, UsageError>;

fn parse_component(s: &str) -> CliResult<Complex64> {
    let s = s.trim();
    let (re, im) = match s.split_once(':') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| UsageError(format!("bad complex component `{s}`")))
    };
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn parse_point(s: &str) -> CliResult<Vec<Complex64>> {
    s.split(',').map(parse_component).collect()
}

fn points_for(common: &Common, expr: &PshExpr) -> CliResult<Vec<Vec<Complex64>>> {
    let n = expr.arity();
    if common.points.is_empty() {
        return Ok(vec![vec![Complex64::new(0.0, 0.0); n]]);
    }
    let points = common
        .points
        .iter()
        .map(|p| parse_point(p))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(UsageError(format!(
            "point has {} components, expression has arity {n}",
            p.len()
        )));
    }
    Ok(points)
}

fn load_expr(path: &Path) -> CliResult<PshExpr> {
    parse_expr_file(path).map_err(|e| UsageError(format!("{}: {e}", e.code())))
}

fn schedule_for(common: &Common) -> CliResult<AnnulusSchedule> {
    let mut s = AnnulusSchedule::default();
    if let Some(seed) = common.seed {
        s = s.with_seed(seed);
    }
    if let Some(r0) = common.r0 {
        s.r0 = r0;
    }
    if let Some(j) = common.annuli {
        s.annuli = j;
    }
    if let Some(m) = common.samples {
        s.samples_per_annulus = m;
    }
    s.validate()?;
    Ok(s)
}

fn point_json(p: &[Complex64]) -> Value {
    Value::Array(p.iter().map(|z| json!([z.re, z.im])).collect())
}

fn write_report(common: &Common, mut report: Value) -> CliResult<()> {
    if !common.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        report["generated_at_unix"] = json!(secs);
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    write_text(common.out.as_deref(), &text)
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| UsageError(format!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_compute(args: &ComputeArgs, lct: bool) -> CliResult<ExitCode> {
    let c = &args.common;
    let expr = load_expr(&c.expr)?;
    let points = points_for(c, &expr)?;
    let schedule = schedule_for(c)?;
    if args.csv.is_some() && (!lct || points.len() != 1) {
        return Err(UsageError("--csv needs the lct subcommand and a single point".into()));
    }
    let mut results = Vec::new();
    for p in &points {
        let (exact, numeric) = if lct {
            let search = lct_numeric_detailed(&expr, p, None, c.tol, &schedule)?;
            if let Some(path) = &args.csv {
                let fit = search
                    .boundary_fit
                    .as_ref()
                    .ok_or_else(|| UsageError("no fit was recorded at the reported threshold".into()))?;
                let file = File::create(path).map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
                write_fit_csv(fit, BufWriter::new(file))?;
            }
            (lct_exact(&expr, p)?, search.estimate)
        } else {
            (lelong_exact(&expr, p)?, lelong_numeric(&expr, p, &schedule)?)
        };
        results.push(json!({
            "point": point_json(p),
            "exact": exact,
            "numeric": numeric,
        }));
    }
    let report = json!({
        "command": if lct { "lct" } else { "lelong" },
        "expr": c.expr.display().to_string(),
        "results": results,
        "tol": c.tol,
        "schedule": schedule,
    });
    write_report(c, report)?;
    Ok(ExitCode::SUCCESS)
}

fn run_construct(args: &ConstructArgs) -> CliResult<ExitCode> {
    let expr = load_expr(&args.expr)?;
    let phi_k = make_phi_k(&expr, args.k)?;
    write_text(args.out.as_deref(), &(expr_to_string_pretty(&phi_k) + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_slice(s: &str, base: &[Complex64]) -> CliResult<SliceMap> {
    let columns = s.split(';').map(parse_point).collect::<CliResult<Vec<_>>>()?;
    Ok(SliceMap::from_columns(base.to_vec(), &columns)?)
}

fn run_verify(which: &VerifyCommand) -> CliResult<ExitCode> {
    let (name, args) = match which {
        VerifyCommand::Thm1(a) => ("thm1", a),
        VerifyCommand::Restriction(a) => ("restriction", a),
        VerifyCommand::Radial(a) => ("radial", a),
        VerifyCommand::Sandwich(a) => ("sandwich", a),
        VerifyCommand::Levelset(a) => ("levelset", a),
    };
    let c = &args.common;
    let expr = load_expr(&c.expr)?;
    let points = points_for(c, &expr)?;
    let config = HarnessConfig {
        schedule: schedule_for(c)?,
        tol: c.tol,
        sampled_unitary: args.sampled_unitary,
        ..Default::default()
    };
    let level = || args.c.ok_or_else(|| UsageError(format!("verify {name} needs --c")));
    let reports: Vec<VerificationReport> = match which {
        VerifyCommand::Thm1(_) => verify_theorem1(&expr, args.k, &points, &config)?,
        VerifyCommand::Restriction(_) => {
            if args.slices.is_empty() {
                return Err(UsageError("verify restriction needs at least one --slice".into()));
            }
            let base = &points[0];
            let slices = args
                .slices
                .iter()
                .map(|s| parse_slice(s, base))
                .collect::<CliResult<Vec<_>>>()?;
            verify_restriction_monotonicity(&expr, &slices, base, &config)?
        }
        VerifyCommand::Radial(_) => vec![verify_radial_identity(&expr, &config)?],
        VerifyCommand::Sandwich(_) => verify_levelset_sandwich(&expr, level()?, args.k, &points, &config)?,
        VerifyCommand::Levelset(_) => {
            let PshExpr::LogAbsPoly(poly) = &expr else {
                return Err(UsageError("verify levelset needs a log_abs_poly expression".into()));
            };
            vec![verify_levelset(poly, level()?, &points, &config)?]
        }
    };
    let verdict = overall_verdict(&reports);
    let report = json!({
        "command": format!("verify {name}"),
        "expr": c.expr.display().to_string(),
        "verdict": verdict,
        "reports": reports,
    });
    write_report(c, report)?;
    for r in reports.iter().filter(|r| r.verdict != CheckVerdict::Pass) {
        eprintln!("{:?}: {} [{}] {}", r.verdict, r.statement.as_str(), r.instance, r.note);
    }
    Ok(match verdict {
        CheckVerdict::Pass => ExitCode::SUCCESS,
        CheckVerdict::Fail => ExitCode::from(1),
        CheckVerdict::Inconclusive => ExitCode::from(3),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Lelong(a) => run_compute(a, false),
        Command::Lct(a) => run_compute(a, true),
        Command::Construct(a) => run_construct(a),
        Command::Verify { which } => run_verify(which),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
