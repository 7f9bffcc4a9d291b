use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use twsolve_core::pde_ast::parse_pde;
use twsolve_core::phi_calculus::SIGMA;
use twsolve_core::pipeline::{
    figure_csv, solve, tabulate_csv, verify_branch, violation_warnings, FigureOptions, Mesh, Method, PdeSource,
    PipelineError, SolveOptions, TabulateFn,
};
use twsolve_core::solution_verify::Grid;

#[derive(Parser)]
#[command(name = "twsolve", version, about = "Travelling-wave solutions by the tanh and fractional sub-equation methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and print the solve log.
    Solve(SolveArgs),
    /// Construct one branch's solutions and report residuals.
    Verify {
        #[command(flatten)]
        solve: SolveArgs,
        /// Branch id from the solve log (`0`, `1`, …, `r0`, …).
        #[arg(long, default_value = "0")]
        branch: String,
    },
    /// Emit the data behind figure N (1..=6).
    Figure(FigureArgs),
    /// Tabulate a special function (ml, gamma, sinh … cot).
    Tabulate(TabulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tanh,
    Subeq,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    /// Registry key (toy, sww, kp, boussinesq4, with optional `_frac`) or a DSL file.
    pde: String,
    #[arg(long, value_enum, default_value = "tanh")]
    method: MethodArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega: f64,
    /// Overrides the balance degree.
    #[arg(long)]
    degree: Option<u32>,
    /// Decay integrations before the ansatz (registry default, 0 for files).
    #[arg(long)]
    integrate: Option<u32>,
    /// Parameter values, e.g. `k=1,m=1,c=3`.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// Residual grid `lo:hi:n` in ξ.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct FigureArgs {
    n: u32,
    /// Overrides caption values; may bind `a_0` or `sigma`.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// Orders for fractional figures, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// x mesh `lo:hi:n`.
    #[arg(long = "x-grid", allow_hyphen_values = true)]
    x_grid: Option<String>,
    /// t mesh `lo:hi:n`.
    #[arg(long = "t-grid", allow_hyphen_values = true)]
    t_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    y: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct TabulateArgs {
    function: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "0:5:101")]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_params(s: Option<&str>) -> Result<BTreeMap<String, f64>, PipelineError> {
    let mut out = BTreeMap::new();
    let Some(s) = s else { return Ok(out) };
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| PipelineError::Invalid(format!("parameter {item:?} is not name=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| PipelineError::Invalid(format!("parameter {item:?} has no numeric value")))?;
        let k = match k.trim() {
            "sigma" => SIGMA.to_string(),
            other => other.to_string(),
        };
        out.insert(k, v);
    }
    Ok(out)
}

fn source(pde: &str, method: Method, integrate: Option<u32>) -> Result<PdeSource, PipelineError> {
    let path = Path::new(pde);
    let mut src = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Invalid(format!("{pde}: {e}")))?;
        PdeSource::custom(parse_pde(&text).map_err(|e| PipelineError::Invalid(e.to_string()))?)
    } else {
        PdeSource::builtin(pde, method)?
    };
    if let Some(n) = integrate {
        src.integrations = n;
    }
    Ok(src)
}

fn solve_options(a: &SolveArgs) -> Result<SolveOptions, PipelineError> {
    let mut params = parse_params(a.params.as_deref())?;
    let sigma = a.sigma.or_else(|| params.get(SIGMA).copied());
    if let Some(s) = sigma {
        params.insert(SIGMA.into(), s);
    }
    let mut opts = SolveOptions {
        method: match a.method {
            MethodArg::Tanh => Method::Tanh,
            MethodArg::Subeq => Method::Subeq,
        },
        alpha: a.alpha,
        sigma,
        omega: a.omega,
        degree: a.degree,
        params,
        ..SolveOptions::default()
    };
    if let Some(g) = &a.grid {
        let m = Mesh::parse(g)?;
        opts.grid = Grid { lo: m.lo, hi: m.hi, points: m.points, ..Grid::default() };
        opts.grid.validate()?;
    }
    if a.format != Format::Json {
        return Err(PipelineError::Invalid("solve and verify emit json only".into()));
    }
    Ok(opts)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), PipelineError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| PipelineError::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run_solve(a: &SolveArgs) -> Result<ExitCode, PipelineError> {
    let opts = solve_options(a)?;
    let src = source(&a.pde, opts.method, a.integrate)?;
    let log = solve(&src, &opts)?;
    emit(&pretty(&log.to_json()), a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(a: &SolveArgs, branch: &str) -> Result<ExitCode, PipelineError> {
    let opts = solve_options(a)?;
    let src = source(&a.pde, opts.method, a.integrate)?;
    let log = solve(&src, &SolveOptions { params: BTreeMap::new(), ..opts.clone() })?;
    let reps = verify_branch(&log, branch, &opts)?;
    let report_only = log.definition.is_fractional() || opts.alpha != 1.0;
    let pass = reps.iter().all(|r| r.passes());
    let mut warnings = log.warnings.clone();
    warnings.extend(violation_warnings(&reps, &opts.params_origin));
    let v = json!({
        "pde": log.pde,
        "key": log.key,
        "method": log.method.name(),
        "branch": log.branch(branch).map(|b| b.branch.to_json()),
        "solutions": reps.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "pass": pass,
        "report_only": report_only,
        "warnings": warnings.iter().map(|w| json!({ "location": w.location, "message": w.message })).collect::<Vec<_>>(),
    });
    emit(&pretty(&v), a.out.as_deref())?;
    Ok(if pass || report_only { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_figure(a: &FigureArgs) -> Result<ExitCode, PipelineError> {
    let mut opts = FigureOptions { overrides: parse_params(a.params.as_deref())?, y: a.y, ..FigureOptions::default() };
    if let Some(s) = &a.alpha {
        opts.alphas = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| PipelineError::Invalid(format!("bad alpha list {s:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(g) = &a.x_grid {
        opts.x = Mesh::parse(g)?;
    }
    if let Some(g) = &a.t_grid {
        opts.t = Mesh::parse(g)?;
    }
    let f = figure_csv(a.n, &opts)?;
    let warnings: Vec<Value> = f.warnings.iter().map(|w| json!({ "location": w.location, "message": w.message })).collect();
    match a.format {
        Format::Csv => {
            for w in &warnings {
                eprintln!("{w}");
            }
            emit(&f.csv, a.out.as_deref())?;
        }
        Format::Json => {
            let v = json!({
                "figure": f.number,
                "key": f.key,
                "caption": f.caption,
                "formula": f.formula,
                "warnings": warnings,
                "csv": f.csv,
            });
            emit(&pretty(&v), a.out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_tabulate(a: &TabulateArgs) -> Result<ExitCode, PipelineError> {
    let f = TabulateFn::parse(&a.function)
        .ok_or_else(|| PipelineError::Invalid(format!("unknown function {:?}", a.function)))?;
    let csv = tabulate_csv(f, a.alpha, &Mesh::parse(&a.grid)?)?;
    emit(&csv, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Verify { solve, branch } => run_verify(solve, branch),
        Command::Figure(a) => run_figure(a),
        Command::Tabulate(a) => run_tabulate(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
