//! `toricgw`: genus-zero Gromov–Witten invariants of smooth projective toric
//! varieties from the command line. Results are JSON on standard output.

mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toricgw::cache::InvariantCache;
use toricgw::fan::{parse_fan_unvalidated, CohomClass, CurveClass, Fan};
use toricgw::gw::{contributing_graphs, gw_invariant, InvariantRequest, Twist};
use toricgw::localization::RootIntegral;
use toricgw::moment_graph::MomentGraph;
use toricgw::psi::{psi_intersection, psi_intersection_by_string};
use toricgw::quantum::QuantumContext;
use toricgw::rational::format_q;
use toricgw::{build_moment_graph, validate};

#[derive(Parser)]
#[command(name = "toricgw", version, about = "Genus-zero Gromov-Witten invariants of toric varieties by localization")]
struct Cli {
    /// Worker threads for graph evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check smoothness, completeness and connectivity of a fan file.
    Validate { fan: PathBuf },
    /// Print fixed points, tangent weights and edge classes.
    MomentGraph { fan: PathBuf },
    /// Top intersection of cotangent-line classes on M_{0,m}.
    Psi {
        #[arg(long)]
        m: usize,
        /// Exponents d_1,…,d_m.
        #[arg(long)]
        d: String,
    },
    /// One invariant Φ^A_{0,m}(β; γ_1, …, γ_m).
    Gw(GwArgs),
    /// A multiple quantum product, truncated to a box of classes.
    Qprod(QprodArgs),
    /// Compare both sides of a relation between quantum products.
    CheckRelation(RelationArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RootMethod {
    Fiber,
    ClosedForm,
}

#[derive(Args)]
struct Common {
    /// Seed of the evaluation points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate only once instead of at two independent points.
    #[arg(long)]
    no_check_independence: bool,
    /// Integration method at the stable vertex for point-class twists.
    #[arg(long, value_enum, default_value_t = RootMethod::Fiber)]
    root_integral: RootMethod,
    /// Include wall-clock timings in the output.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GwArgs {
    fan: PathBuf,
    /// Curve class as an intersection vector.
    #[arg(long, allow_hyphen_values = true)]
    class: String,
    /// Insertions as exponent vectors separated by ';'.
    #[arg(long, conflicts_with = "insertion_file")]
    insertions: Option<String>,
    /// JSON list of insertion classes with rational coefficients.
    #[arg(long)]
    insertion_file: Option<PathBuf>,
    /// Twist by Π ψ_i^{d_i} with Σ d_i = m − 3.
    #[arg(long, conflicts_with = "pd_point")]
    psi: Option<String>,
    /// Twist by the point class of M_{0,m}.
    #[arg(long)]
    pd_point: bool,
    /// Write each contributing graph as a JSON line to standard error.
    #[arg(long)]
    dump_graphs: bool,
    /// Write each graph contribution as a JSON line to standard error.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QuantumArgs {
    /// Exponent caps, one per generator.
    #[arg(long)]
    caps: String,
    /// Cap generators as intersection vectors separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    generators: Option<String>,
    /// Directory of the persistent invariant cache (else $TORICGW_CACHE).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QprodArgs {
    fan: PathBuf,
    /// Factors as exponent vectors separated by ';'.
    #[arg(long, conflicts_with = "factor_file")]
    factors: Option<String>,
    /// JSON list of factor classes.
    #[arg(long)]
    factor_file: Option<PathBuf>,
    #[command(flatten)]
    quantum: QuantumArgs,
}

#[derive(Args)]
struct RelationArgs {
    fan: PathBuf,
    /// JSON file with "lhs" and "rhs" term lists.
    #[arg(long)]
    relation: PathBuf,
    #[command(flatten)]
    quantum: QuantumArgs,
}

/// A failure reported as a JSON error object with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_fan(path: &Path) -> Result<(Fan, MomentGraph), Failure> {
    let fan = toricgw::parse_fan(&read(path)?)?;
    let mg = build_moment_graph(&fan)?;
    Ok((fan, mg))
}

fn points_json(r: &toricgw::gw::InvariantResult) -> Value {
    json!(r.eval_points.iter().map(|p| json!({"seed": p.seed, "xi": p.xi})).collect::<Vec<_>>())
}

fn root_method(m: RootMethod) -> RootIntegral {
    match m {
        RootMethod::Fiber => RootIntegral::Fiber,
        RootMethod::ClosedForm => RootIntegral::ClosedForm,
    }
}

fn run_validate(path: &Path) -> Outcome {
    let fan = parse_fan_unvalidated(&read(path)?)?;
    let report = validate(&fan);
    let ok = report.passed;
    Ok((serde_json::to_value(report)?, ok))
}

fn run_moment_graph(path: &Path) -> Outcome {
    let (_, mg) = load_fan(path)?;
    Ok((mg.to_json(), true))
}

fn run_psi(m: usize, d: &str) -> Outcome {
    let d = input::parse_u32s(d).map_err(Failure)?;
    let v = psi_intersection(m, &d)?;
    let check = psi_intersection_by_string(m, &d)?;
    if v != check {
        return Err(Failure(format!("string recursion gives {}", format_q(&check))));
    }
    Ok((json!({"m": m, "d": d, "value": format_q(&v)}), true))
}

fn run_gw(a: &GwArgs) -> Outcome {
    let (fan, mg) = load_fan(&a.fan)?;
    let n = fan.n();
    let class = CurveClass(input::parse_ints(&a.class).map_err(Failure)?);
    let insertions: Vec<CohomClass> = match (&a.insertions, &a.insertion_file) {
        (Some(s), None) => input::parse_monomials(s, n).map_err(Failure)?,
        (None, Some(p)) => input::parse_insertion_file(&read(p)?, n).map_err(Failure)?,
        (None, None) => Vec::new(),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let twist = match (&a.psi, a.pd_point) {
        (Some(d), _) => Twist::Psi(input::parse_u32s(d).map_err(Failure)?),
        (None, true) => Twist::PointClass,
        (None, false) => Twist::Classical,
    };
    let mut req = InvariantRequest::new(class.clone(), insertions, twist.clone());
    req.seed = a.common.seed;
    req.check_independence = !a.common.no_check_independence;
    req.trace = a.trace;
    req.engine.root_integral = root_method(a.common.root_integral);
    if a.dump_graphs && !class.is_zero() {
        for g in contributing_graphs(&mg, &req)? {
            eprintln!("{}", g.to_json());
        }
    }
    let r = gw_invariant(&mg, &req)?;
    for (key, c) in &r.trace {
        eprintln!("{}", json!({"graph": key, "contribution": format_q(c)}));
    }
    let twist_json = match &twist {
        Twist::Classical => json!("classical"),
        Twist::PointClass => json!("pd-point"),
        Twist::Psi(d) => json!({"psi": d}),
    };
    let mut out = json!({
        "invariant": format_q(&r.value),
        "class": class.0,
        "m": req.insertions.len(),
        "twist": twist_json,
        "dimension_ok": r.dimension_ok,
        "graphs": r.graph_count,
        "eval_points": points_json(&r),
    });
    if a.common.timing {
        out["elapsed_ms"] = json!(r.elapsed.as_secs_f64() * 1e3);
    }
    Ok((out, true))
}

fn context<'a>(mg: &'a MomentGraph, q: &QuantumArgs) -> Result<(QuantumContext<'a>, Vec<u32>), Failure> {
    let mut ctx = QuantumContext::new(mg, q.common.seed)?;
    if let Some(g) = &q.generators {
        ctx = ctx.with_generators(input::parse_classes(g, mg.fan().n()).map_err(Failure)?)?;
    }
    let cache = match &q.cache {
        Some(d) => InvariantCache::with_dir(d)?,
        None => InvariantCache::from_env()?,
    };
    ctx = ctx.with_cache(cache);
    ctx.seed = q.common.seed;
    ctx.check_independence = !q.common.no_check_independence;
    ctx.engine.root_integral = root_method(q.common.root_integral);
    let caps = input::parse_u32s(&q.caps).map_err(Failure)?;
    Ok((ctx, caps))
}

fn generators_json(ctx: &QuantumContext) -> Value {
    json!(ctx.generators().iter().map(|g| g.0.clone()).collect::<Vec<_>>())
}

fn run_qprod(a: &QprodArgs) -> Outcome {
    let (fan, mg) = load_fan(&a.fan)?;
    let factors = match (&a.factors, &a.factor_file) {
        (Some(s), None) => input::parse_monomials(s, fan.n()).map_err(Failure)?,
        (None, Some(p)) => input::parse_insertion_file(&read(p)?, fan.n()).map_err(Failure)?,
        _ => return Err(Failure("give --factors or --factor-file".into())),
    };
    let start = std::time::Instant::now();
    let (ctx, caps) = context(&mg, &a.quantum)?;
    let classes = ctx.effective_classes(&caps)?;
    let p = ctx.product_at(&factors, &classes)?;
    let mut out = json!({
        "product": p.to_json(),
        "generators": generators_json(&ctx),
        "caps": caps,
        "classes": classes.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
    });
    if a.quantum.common.timing {
        out["elapsed_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((out, true))
}

fn run_check_relation(a: &RelationArgs) -> Outcome {
    let (fan, mg) = load_fan(&a.fan)?;
    let start = std::time::Instant::now();
    let (ctx, caps) = context(&mg, &a.quantum)?;
    let rel = input::parse_relation_file(&read(&a.relation)?, fan.n(), ctx.generators()).map_err(Failure)?;
    let report = ctx.check_relation(&rel, &caps)?;
    let mut out = report.to_json();
    out["generators"] = generators_json(&ctx);
    out["caps"] = json!(caps);
    if a.quantum.common.timing {
        out["elapsed_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((out, report.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("toricgw: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Validate { fan } => run_validate(fan),
        Command::MomentGraph { fan } => run_moment_graph(fan),
        Command::Psi { m, d } => run_psi(*m, d),
        Command::Gw(a) => run_gw(a),
        Command::Qprod(a) => run_qprod(a),
        Command::CheckRelation(a) => run_check_relation(a),
    };
    match outcome {
        Ok((v, ok)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            println!("{}", json!({"error": msg}));
            ExitCode::from(1)
        }
    }
}
