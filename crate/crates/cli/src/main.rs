use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use symcap::billiard::{find_a_billiard, length_bound_suite, verify_generalized, SearchConfig};
use symcap::capacity::{minimize_capacity, verify_carrier, SolverConfig};
use symcap::geometry::spec::BodySpec;
use symcap::inequality::{bm_check, bm_equality_probe, conjecture_sample, xi, xi_slab_upper_bound};
use symcap::linalg::{from_rows, to_rows};
use symcap::report::{digest, run_suite, write_artifacts, RunConfig};
use symcap::symplectic::t_psi_a_det;
use symcap::{ConvexBody, Error, Matrix, SymplecticMap, Vector};

/// Environment variable holding the worker thread count.
const WORKERS_VAR: &str = "SYMCAP_WORKERS";

#[derive(Parser)]
#[command(name = "symcap", version, about = "Twisted EHZ capacities, t(Psi), Brunn-Minkowski and billiard checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity of a convex body under a symplectic twist.
    Capacity(CapacityArgs),
    /// Smallest zero of det(Psi - e^{sJ}) on (0, 2pi].
    Tpsi(TpsiArgs),
    /// Brunn-Minkowski check for a pair of bodies.
    Bm(BmArgs),
    /// Capacity of Delta x Lambda under Psi_A.
    Xi(XiArgs),
    /// Shortest A-billiard trajectories by shooting.
    Billiard(BilliardArgs),
    /// Acceptance suite with per-check artifacts.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self, p: f64) -> SolverConfig {
        SolverConfig { p, nodes: self.nodes, restarts: self.restarts, seed: self.seed, ..SolverConfig::default() }
    }
}

#[derive(Args)]
struct TwistArgs {
    /// 2n x 2n symplectic matrix as nested JSON arrays.
    #[arg(long)]
    psi: Option<PathBuf>,
    /// n x n invertible matrix; uses Psi_A = diag(A, A^-T).
    #[arg(long = "A")]
    a: Option<PathBuf>,
}

impl TwistArgs {
    fn load(&self, dim: usize) -> Result<SymplecticMap, CliError> {
        match (&self.psi, &self.a) {
            (Some(_), Some(_)) => Err(CliError::input("give either --psi or --A, not both")),
            (Some(p), None) => SymplecticMap::new(load_matrix(p)?).map_err(|e| CliError::at(p, e)),
            (None, Some(p)) => SymplecticMap::from_a(&load_matrix(p)?).map_err(|e| CliError::at(p, e)),
            (None, None) if dim.is_multiple_of(2) => Ok(SymplecticMap::identity(dim / 2)),
            (None, None) => Err(CliError::input(format!("body dimension {dim} is odd"))),
        }
    }
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long)]
    body: PathBuf,
    #[command(flatten)]
    twist: TwistArgs,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TpsiArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Treat the matrix as A and use Psi_A.
    #[arg(long = "from-A")]
    from_a: bool,
}

#[derive(Args)]
struct BmArgs {
    #[arg(long)]
    d: PathBuf,
    #[arg(long)]
    k: PathBuf,
    #[command(flatten)]
    twist: TwistArgs,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Also fit the carriers of D and K by a dilation and time shift.
    #[arg(long)]
    probe: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct XiArgs {
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    /// Defaults to the Euclidean unit ball.
    #[arg(long)]
    lambda: Option<PathBuf>,
    /// Compare with the capacity of the slab of minimal width.
    #[arg(long)]
    slab: bool,
    /// `conjecture`: Delta x Delta° against (2/pi) t(Psi_A), data only.
    #[arg(long)]
    experiment: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct BilliardArgs {
    #[command(subcommand)]
    action: Option<BilliardAction>,
    #[command(flatten)]
    search: Option<SearchArgs>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long = "A")]
    a: Option<PathBuf>,
    /// Range `lo..hi` (inclusive) or comma list.
    #[arg(long, default_value = "1..6")]
    bounces: String,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BilliardAction {
    /// Check a point sequence against the generalized trajectory clauses.
    Verify {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        body: PathBuf,
        #[arg(long = "A")]
        a: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "suite-out")]
    out: PathBuf,
    /// Check id prefixes to run, e.g. `c4` or `c9-disk`.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Replace the expected value of a check: `ID=VALUE`.
    #[arg(long, value_parser = parse_expect)]
    expect: Vec<(String, f64)>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
}

fn parse_expect(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("'{value}' is not a number"))?;
    Ok((name.trim().to_string(), v))
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn at(path: &Path, e: Error) -> Self {
        Self::input(format!("{}: {e}", path.display()))
    }

    fn compute(e: Error) -> Self {
        let code = match e {
            Error::Io(_)
            | Error::Parse(_)
            | Error::InvalidBody(_)
            | Error::InvalidExponent(_)
            | Error::DimensionMismatch { .. }
            | Error::NotSymplectic { .. }
            | Error::SingularMatrix
            | Error::BodyWithoutInteriorOrigin
            | Error::NoFixedInteriorPoint
            | Error::HypothesisViolated(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn load_body(path: &Path) -> Result<ConvexBody, CliError> {
    let spec = BodySpec::from_json(&read(path)?).map_err(|e| CliError::at(path, e))?;
    spec.build().map_err(|e| CliError::at(path, e))
}

fn load_matrix(path: &Path) -> Result<Matrix, CliError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
        return Err(CliError::input(format!("{}: matrix rows must be nonempty and of equal length", path.display())));
    }
    Ok(from_rows(&rows))
}

fn load_a(path: Option<&PathBuf>, n: usize) -> Result<Matrix, CliError> {
    match path {
        Some(p) => load_matrix(p),
        None => Ok(Matrix::identity(n, n)),
    }
}

fn emit(value: &Value, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json values serialise") + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

fn parse_bounces(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::input(format!("invalid --bounces '{s}'"));
    let out: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

fn capacity(args: &CapacityArgs) -> Result<u8, CliError> {
    let body = load_body(&args.body)?;
    let psi = args.twist.load(body.dim())?;
    let r = minimize_capacity(&body, &psi, &args.solver.config(args.p)).map_err(CliError::compute)?;
    let report = r.carrier.as_ref().map(|c| verify_carrier(c, &body, &psi));
    let value = json!({
        "value": r.value,
        "p": r.p,
        "rel_error": r.rel_error,
        "converged": r.converged,
        "restart_values": r.restart_values,
        "fixed_point": vec_json(&r.fixed_point),
        "multiplier": r.multiplier,
        "residuals": r.residuals,
        "carrier": r.carrier.as_ref().map(|c| c.to_rows()),
        "carrier_diagnostics": r.carrier_diagnostics,
        "carrier_error": r.carrier_error.as_ref().map(|e| e.to_string()),
        "verify_carrier": report,
    });
    emit(&value, args.out.as_ref())?;
    Ok(0)
}

fn tpsi(args: &TpsiArgs) -> Result<u8, CliError> {
    let m = load_matrix(&args.matrix)?;
    let value = if args.from_a {
        let psi = SymplecticMap::from_a(&m).map_err(|e| CliError::at(&args.matrix, e))?;
        let t = psi.t_psi().map_err(CliError::compute)?;
        let det = t_psi_a_det(&m).map_err(CliError::compute)?;
        json!({ "t_psi": t.value, "trace": t.trace, "t_psi_a_det": det.value, "a_det_trace": det.trace })
    } else {
        let psi = SymplecticMap::new(m).map_err(|e| CliError::at(&args.matrix, e))?;
        let t = psi.t_psi().map_err(CliError::compute)?;
        json!({ "t_psi": t.value, "trace": t.trace })
    };
    emit(&value, None)?;
    Ok(0)
}

fn bm(args: &BmArgs) -> Result<u8, CliError> {
    let d = load_body(&args.d)?;
    let k = load_body(&args.k)?;
    let psi = args.twist.load(d.dim())?;
    let b = bm_check(&d, &k, &psi, args.p, &args.solver.config(2.0)).map_err(CliError::compute)?;
    let mut value = json!({
        "report": b.report,
        "c_d": b.d.value,
        "c_k": b.k.value,
        "c_sum": b.sum.value,
    });
    if args.probe {
        value["probe"] = match (&b.d.carrier, &b.k.carrier) {
            (Some(cd), Some(ck)) => json!(bm_equality_probe(cd.nodes(), ck.nodes(), &psi)),
            _ => Value::Null,
        };
    }
    emit(&value, args.out.as_ref())?;
    Ok(if b.report.pass { 0 } else { 1 })
}

fn xi_cmd(args: &XiArgs) -> Result<u8, CliError> {
    let a = load_matrix(&args.a)?;
    let delta = load_body(&args.delta)?;
    let cfg = args.solver.config(2.0);
    if let Some(exp) = &args.experiment {
        if exp != "conjecture" {
            return Err(CliError::input(format!("unknown experiment '{exp}'")));
        }
        let s = conjecture_sample(&a, &delta, &cfg).map_err(CliError::compute)?;
        emit(&json!({ "experiment": exp, "sample": s, "judged": false }), args.out.as_ref())?;
        return Ok(0);
    }
    let lambda = match &args.lambda {
        Some(p) => load_body(p)?,
        None => ConvexBody::unit_ball(a.nrows()),
    };
    let mut pass = true;
    let mut value = if args.slab {
        if args.lambda.is_some() {
            return Err(CliError::input("--slab uses the unit ball for Lambda"));
        }
        let s = xi_slab_upper_bound(&a, &delta, &cfg, true).map_err(CliError::compute)?;
        pass = s.reports.iter().all(|r| r.pass);
        json!({ "xi": s.xi, "slab": s })
    } else {
        let r = xi(&a, &delta, &lambda, &cfg).map_err(CliError::compute)?;
        json!({ "xi": r.value, "rel_error": r.rel_error, "carrier": r.carrier.as_ref().map(|c| c.to_rows()) })
    };
    value["a"] = json!(to_rows(&a));
    emit(&value, args.out.as_ref())?;
    Ok(if pass { 0 } else { 1 })
}

fn billiard(args: &BilliardArgs) -> Result<u8, CliError> {
    if let Some(BilliardAction::Verify { points, body, a }) = &args.action {
        let body = load_body(body)?;
        let a = load_a(a.as_ref(), body.dim())?;
        let rows: Vec<Vec<f64>> = serde_json::from_str(&read(points)?).map_err(|e| CliError::input(format!("{}: {e}", points.display())))?;
        if rows.iter().any(|r| r.len() != body.dim()) {
            return Err(CliError::input(format!("{}: points must have dimension {}", points.display(), body.dim())));
        }
        let pts: Vec<Vector> = rows.into_iter().map(Vector::from_vec).collect();
        let report = verify_generalized(&pts, &body, &a);
        emit(&json!(report), None)?;
        return Ok(if report.pass { 0 } else { 1 });
    }
    let Some(s) = &args.search else {
        return Err(CliError::input("billiard needs --body (or the verify subcommand)"));
    };
    let body = load_body(&s.body)?;
    let a = load_a(s.a.as_ref(), body.dim())?;
    let cfg = SearchConfig { bounce_counts: parse_bounces(&s.bounces)?, restarts: s.restarts, seed: s.seed, ..SearchConfig::default() };
    let out = find_a_billiard(&body, &a, &cfg).map_err(CliError::compute)?;
    let bounds = length_bound_suite(&body, &a, &out, None).map_err(CliError::compute)?;
    let shortest = out.accepted.first().map(|t| {
        let mut rec = json!(t.to_record());
        rec["generalized"] = json!(verify_generalized(&t.points, &body, &a));
        rec
    });
    let value = json!({
        "shortest": shortest,
        "accepted_lengths": out.accepted_lengths(),
        "attempts": out.attempts,
        "diameter": out.diameter,
        "best_candidate": out.best_candidate.as_ref().map(|t| t.to_record()),
        "bounds": bounds,
    });
    emit(&value, s.out.as_ref())?;
    if out.accepted.is_empty() {
        eprintln!("error: {}", Error::NoTrajectoryFound);
        return Ok(1);
    }
    Ok(0)
}

fn suite(args: &SuiteArgs) -> Result<u8, CliError> {
    let config = RunConfig {
        seed: args.seed,
        nodes: args.nodes,
        restarts: args.restarts,
        only: args.only.clone(),
        expect: args.expect.clone(),
        out: Some(args.out.clone()),
        ..RunConfig::default()
    };
    let outcome = run_suite(&config).map_err(CliError::compute)?;
    write_artifacts(&outcome.records, &args.out).map_err(CliError::compute)?;
    print!("{}", digest(&outcome.records));
    let failed = outcome.failed();
    if failed.is_empty() {
        return Ok(0);
    }
    eprintln!("failed checks:");
    for r in failed {
        eprintln!("  {}", r.id);
    }
    Ok(1)
}

fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::input(format!("{WORKERS_VAR}='{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_workers().and_then(|_| match &cli.command {
        Command::Capacity(a) => capacity(a),
        Command::Tpsi(a) => tpsi(a),
        Command::Bm(a) => bm(a),
        Command::Xi(a) => xi_cmd(a),
        Command::Billiard(a) => billiard(a),
        Command::Suite(a) => suite(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
