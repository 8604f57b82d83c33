use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use drcheck::abstraction::build_template;
use drcheck::coverability::{backward_reach, error_target, expand_target, forward_explore, CounterState, Query};
use drcheck::drcore::{
    check_monotone_sufficient, check_monotone_symbolic, find_monotonicity_violation, monotone_closure, nmf, DrProgram,
    Monotonicity, SymbolicMonotonicity,
};
use drcheck::frontend::{parse_predicates, parse_program, AsyncProgram};
use drcheck::logic::{Solver, SolverBackend};
use drcheck::minsky::{encode_minsky, simulate_minsky, CounterMachine};
use drcheck::Error;

#[derive(Parser)]
#[command(
    name = "drcheck",
    version,
    about = "Parameterized verification of asynchronous programs via dual-reference abstraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Boolean DR template of a program against predicates.
    Abstract(AbstractArgs),
    /// Explore a template for a fixed number of threads.
    Explore(ExploreArgs),
    /// Check the local monotonicity condition of a template or concrete program.
    CheckMonotone(CheckArgs),
    /// Apply the monotone closure to a template.
    Close(CloseArgs),
    /// Decide coverability for all thread counts.
    Verify(VerifyArgs),
    /// Encode a two-counter machine as a DR template.
    EncodeMinsky(MinskyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Smt,
    Enum,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "smt")]
    backend: BackendKind,
    /// Integer bound for the enumerator (values range over [0, B]).
    #[arg(long)]
    bound: Option<i64>,
    #[arg(long, env = "DRCHECK_SOLVER", default_value = "z3")]
    solver: String,
    /// Per-query timeout in milliseconds.
    #[arg(long, default_value_t = 60_000)]
    timeout: u64,
    /// Worker threads for solver queries.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Template JSON.
    #[arg(long, conflicts_with_all = ["program", "predicates"])]
    template: Option<PathBuf>,
    #[arg(long, requires = "predicates")]
    program: Option<PathBuf>,
    #[arg(long)]
    predicates: Option<PathBuf>,
    /// Extra thread counts checked beyond the saturation bound.
    #[arg(long, default_value_t = 0)]
    probe: u32,
}

#[derive(Args)]
struct AbstractArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    predicates: PathBuf,
    #[arg(long, default_value_t = 0)]
    probe: u32,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the template; embedded in the report otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Query JSON; the template's error states otherwise.
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Template JSON.
    #[arg(long, conflicts_with = "program")]
    template: Option<PathBuf>,
    /// Concrete program, checked symbolically.
    #[arg(long)]
    program: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Integers are natural numbers in the symbolic check.
    #[arg(long)]
    naturals: bool,
    /// Also search for violations with up to this many threads.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CloseArgs {
    #[arg(long)]
    template: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MinskyArgs {
    #[arg(long)]
    machine: PathBuf,
    /// Also simulate the machine for this many steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) | Error::Invalid(_) | Error::Template(_) | Error::NotMonotone(_) => 2,
            Error::Solver(_) | Error::Eval(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

type Outcome = Result<Value, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn load_program(path: &Path) -> Result<AsyncProgram, Failure> {
    parse_program(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_template(path: &Path) -> Result<DrProgram, Failure> {
    DrProgram::from_json_str(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn solver(args: &SolverArgs, default_bound: i64) -> Result<Solver, Failure> {
    if let Some(j) = args.jobs {
        // only the first call configures the pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let backend = match args.backend {
        BackendKind::Smt => SolverBackend::Smt { path: args.solver.clone().into(), timeout_ms: args.timeout, int_bound: None },
        BackendKind::Enum => SolverBackend::enumerate(args.bound.unwrap_or(default_bound)),
    };
    backend.validate().map_err(|e| input_error(e.to_string()))?;
    Solver::new(backend).map_err(|e| Failure { code: 1, message: e.to_string() })
}

/// Template from `--template`, or built from `--program` and `--predicates`.
fn obtain_template(input: &InputArgs, args: &SolverArgs) -> Result<(DrProgram, Option<Value>), Failure> {
    if let Some(t) = &input.template {
        return Ok((load_template(t)?, None));
    }
    let (Some(prog), Some(preds)) = (&input.program, &input.predicates) else {
        return Err(input_error("either --template or --program with --predicates is required".into()));
    };
    let p = load_program(prog)?;
    let ps = parse_predicates(&read(preds)?, &p.sig).map_err(|e| input_error(format!("{}: {e}", preds.display())))?;
    let s = solver(args, 2 * p.max_constant() + 2)?;
    log::info!("abstracting {} against {} predicates", prog.display(), ps.len());
    let (d, report) = build_template(&p, &ps, input.probe, &s)?;
    log::info!("template: {} transitions, {} initial pairs", d.trans.len(), d.init.len());
    Ok((d, Some(serde_json::to_value(report).unwrap())))
}

fn targets(d: &DrProgram, query: Option<&Path>) -> Result<(Vec<CounterState>, Option<Query>), Failure> {
    match query {
        Some(q) => {
            let q = Query::from_json_str(&read(q)?).map_err(|e| input_error(format!("{}: {e}", q.display())))?;
            Ok((expand_target(d, &q.target)?, Some(q)))
        }
        None => {
            let t = error_target(d);
            if t.is_empty() {
                return Err(input_error("no query given and the template has no error states".into()));
            }
            Ok((t, None))
        }
    }
}

fn cmd_abstract(a: &AbstractArgs) -> Outcome {
    let input =
        InputArgs { template: None, program: Some(a.program.clone()), predicates: Some(a.predicates.clone()), probe: a.probe };
    let (d, report) = obtain_template(&input, &a.solver)?;
    let mut out = json!({ "report": report, "transitions": d.trans.len(), "initial": d.init.len() });
    match &a.out {
        Some(path) => write(path, &d.to_json_string())?,
        None => out["template"] = d.to_json(),
    }
    Ok(out)
}

fn cmd_explore(a: &ExploreArgs) -> Outcome {
    let (d, report) = obtain_template(&a.input, &a.solver)?;
    let (target, query) = targets(&d, a.query.as_deref())?;
    let engine = query.map(|q| q.engine).unwrap_or_default();
    let n = a.n.or(engine.n).ok_or_else(|| input_error("thread count required (--n or engine.n in the query)".into()))?;
    let depth = a.depth.or(engine.depth);
    let r = forward_explore(&d, n, &target, depth)?;
    let out = json!({
        "n": n,
        "depth_limit": depth,
        "verdict": r.verdict.name(),
        "exhausted": r.exhausted,
        "states": r.states,
        "depth": r.depth,
        "trace": r.verdict.trace().map(|t| t.to_json(&d)),
        "abstraction": report,
    });
    if let Some(path) = &a.out {
        write(path, &serde_json::to_string_pretty(&out).unwrap())?;
    }
    Ok(out)
}

fn monotonicity_json(d: &DrProgram, m: &Monotonicity) -> Value {
    match m {
        Monotonicity::Monotone => json!({ "monotone": true }),
        Monotonicity::Violation { active, active_next, passive } => json!({
            "monotone": false,
            "violation": { "active": d.fmt_state(*active), "active_next": d.fmt_state(*active_next), "passive": d.fmt_state(*passive) },
        }),
    }
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    if let Some(path) = &a.program {
        let p = load_program(path)?;
        let s = solver(&a.solver, 2 * p.max_constant() + 2)?;
        let out = match check_monotone_symbolic(&p, &s, a.naturals)? {
            SymbolicMonotonicity::Monotone => json!({ "monotone": true }),
            SymbolicMonotonicity::Violation(m) => {
                let w: serde_json::Map<String, Value> =
                    m.iter().map(|(k, v)| (k.to_string(), serde_json::to_value(v).unwrap())).collect();
                json!({ "monotone": false, "witness": w })
            }
            SymbolicMonotonicity::Unknown => json!({ "monotone": null }),
        };
        return Ok(out);
    }
    let Some(path) = &a.template else {
        return Err(input_error("either --template or --program is required".into()));
    };
    let d = load_template(path)?;
    d.validate()?;
    let mut out = monotonicity_json(&d, &check_monotone_sufficient(&d));
    out["nmf_size"] = json!(nmf(&d).len());
    if let Some(k) = a.n {
        if k < 2 {
            return Err(input_error("--n must be at least 2".into()));
        }
        let w = find_monotonicity_violation(&d, k, a.depth);
        out["search"] = json!({
            "max_threads": k,
            "depth": a.depth,
            "violation": w.map(|w| json!({
                "before": w.before.iter().map(|s| d.fmt_state(*s)).collect::<Vec<_>>(),
                "after": w.after.iter().map(|s| d.fmt_state(*s)).collect::<Vec<_>>(),
                "extension": d.fmt_state(w.extension),
            })),
        });
    }
    if let Some(path) = &a.out {
        write(path, &serde_json::to_string_pretty(&out).unwrap())?;
    }
    Ok(out)
}

fn cmd_close(a: &CloseArgs) -> Outcome {
    let d = load_template(&a.template)?;
    let before = check_monotone_sufficient(&d);
    let m = monotone_closure(&d)?;
    let mut out = json!({
        "nmf_size": m.provenance.nmf_size,
        "added": m.trans.len() - d.trans.len(),
        "input": monotonicity_json(&d, &before),
    });
    match &a.out {
        Some(path) => write(path, &m.to_json_string())?,
        None => out["template"] = m.to_json(),
    }
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let (d, report) = obtain_template(&a.input, &a.solver)?;
    d.validate()?;
    let (target, _) = targets(&d, a.query.as_deref())?;
    let check = check_monotone_sufficient(&d);
    let (analysed, closure) = if check.is_monotone() { (d.clone(), false) } else { (monotone_closure(&d)?, true) };
    if closure {
        log::info!("template is not monotone; closure added {} transitions", analysed.trans.len() - d.trans.len());
    }
    let r = backward_reach(&analysed, &target)?;
    let out = json!({
        "verdict": r.verdict.name(),
        "closure_applied": closure,
        "nmf_size": analysed.provenance.nmf_size.filter(|_| closure),
        "input_monotonicity": monotonicity_json(&d, &check),
        "trace": r.verdict.trace().map(|t| t.to_json(&analysed)),
        "stats": {
            "iterations": r.stats.iterations,
            "generated": r.stats.generated,
            "final_basis": r.stats.final_basis,
            "max_basis": r.stats.max_basis,
            "work_sizes": r.stats.work_sizes,
        },
        "abstraction": report,
    });
    if let Some(path) = &a.out {
        write(path, &serde_json::to_string_pretty(&out).unwrap())?;
    }
    Ok(out)
}

fn cmd_minsky(a: &MinskyArgs) -> Outcome {
    let m =
        CounterMachine::from_json_str(&read(&a.machine)?).map_err(|e| input_error(format!("{}: {e}", a.machine.display())))?;
    let d = encode_minsky(&m)?;
    let mut out = json!({ "transitions": d.trans.len(), "locations": d.locations });
    if let Some(k) = a.steps {
        out["run"] = json!(simulate_minsky(&m, k));
    }
    match &a.out {
        Some(path) => write(path, &d.to_json_string())?,
        None => out["template"] = d.to_json(),
    }
    Ok(out)
}

/// Print a report; a closed stdout is not an error.
fn emit(report: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(report).unwrap());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, outcome) = match &cli.command {
        Command::Abstract(a) => ("abstract", cmd_abstract(a)),
        Command::Explore(a) => ("explore", cmd_explore(a)),
        Command::CheckMonotone(a) => ("check-monotone", cmd_check(a)),
        Command::Close(a) => ("close", cmd_close(a)),
        Command::Verify(a) => ("verify", cmd_verify(a)),
        Command::EncodeMinsky(a) => ("encode-minsky", cmd_minsky(a)),
    };
    match outcome {
        Ok(result) => {
            let report = json!({
                "command": name,
                "result": result,
                "timing": { "wall_ms": start.elapsed().as_millis() as u64 },
            });
            emit(&report);
            ExitCode::SUCCESS
        }
        Err(f) => {
            let report = json!({ "command": name, "error": f.message });
            eprintln!("error: {}", f.message);
            emit(&report);
            ExitCode::from(f.code)
        }
    }
}
