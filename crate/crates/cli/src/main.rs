use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use qmclose::fiberlab::{
    fiber_decompose, fiber_member, weak_closure_member, FiberAggregate, FiberError, WeakClosureOptions,
};
use qmclose::numkernel::NumError;
use qmclose::polyring::{parse_polynomial, Monomial};
use qmclose::qmodule::{
    archimedean_probe, ball, dual_moment_check, example_3_3, example_3_4, example_4_2, example_couex, example_couex_m,
    member, poly_stability, pos_semiordering_search, seq_member, stable_closure, support_probe, ArchimedeanStatus,
    MemberOptions, MemberResult, ModuleJson, ModuleKind, MomentCheck, PseudoMoments, QPoly, QmError, QuadraticModuleSpec,
};
use qmclose::scalar::parse_rational;
use qmclose::seqlab::{cc_seq_step_verify, seq_step_verify, terminal_verify, SeqError};

const SCHEMA: &str = "qmclose/1";
/// Overrides the default `tol_feas` and `tol_psd`.
const TOL_ENV: &str = "QMCLOSE_TOL";

#[derive(Parser, Serialize)]
#[command(name = "qmclose", version, about = "Certificates and closures for finitely generated quadratic modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Search a certificate for f ∈ M at a truncation degree.
    Member(PolyArgs),
    /// Test f + ε(1 + |x|²)^e ∈ M along an ε schedule.
    SeqMember(SeqMemberArgs),
    /// Search p·f = f^(2m) + q with p SOS and q ∈ M.
    PosSemi(PosSemiArgs),
    /// Look for k - |x|² ∈ M.
    Archimedean(ArchArgs),
    /// Candidates h with ±h certified in M.
    Support(SupportArgs),
    /// Polyhedral stability test for linear generators.
    Stable(StableArgs),
    /// M + (radical generators) as a module.
    ClosureStable(ClosureStableArgs),
    /// Fibres of M over a bounded coordinate.
    Fiber(FiberArgs),
    /// Recursive fibre test for the weak closure.
    WeakClosure(WeakArgs),
    /// PSD check of moment and localizing matrices.
    MomentDual(MomentArgs),
    /// Sequential-closure peeling on the appendix sets.
    Appendix(AppendixArgs),
    /// List the built-in modules.
    Instances,
}

#[derive(Args, Serialize, Clone)]
struct ModuleArgs {
    /// ball:N, couex, couex-m, example-4-2, example-3-3:N:C, example-3-4:N:C.
    #[arg(long, conflicts_with_all = ["module", "gens"])]
    instance: Option<String>,
    /// Module JSON file: {"vars":[...], "kind":"qm"|"preordering", "generators":[...]}.
    #[arg(long, conflicts_with = "gens")]
    module: Option<PathBuf>,
    /// Comma-separated variable names, with --gens.
    #[arg(long, requires = "gens")]
    vars: Option<String>,
    /// Generator, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    gens: Vec<String>,
    #[arg(long)]
    preordering: bool,
}

#[derive(Args, Serialize, Clone)]
struct TolArgs {
    #[arg(long)]
    tol_feas: Option<f64>,
    #[arg(long)]
    tol_psd: Option<f64>,
}

#[derive(Args, Serialize)]
struct PolyArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    #[arg(long, default_value_t = 4)]
    degree: u32,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Serialize)]
struct SeqMemberArgs {
    #[command(flatten)]
    inner: PolyArgs,
    /// Perturber exponent; defaults to ⌊deg f / 2⌋ + 1.
    #[arg(long)]
    exponent: Option<u32>,
    /// Comma-separated ε values.
    #[arg(long, default_value = "1/10,1/100,1/1000")]
    eps: String,
}

#[derive(Args, Serialize)]
struct PosSemiArgs {
    #[command(flatten)]
    inner: PolyArgs,
    #[arg(long, default_value_t = 3)]
    max_exponent: u32,
}

#[derive(Args, Serialize)]
struct ArchArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Comma-separated values of k.
    #[arg(long, default_value = "1,10,100,1000,10000")]
    k: String,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Serialize)]
struct SupportArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long, default_value_t = 4)]
    degree: u32,
    /// Candidate polynomial, repeatable.
    #[arg(long, required = true, allow_hyphen_values = true)]
    candidate: Vec<String>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Serialize)]
struct StableArgs {
    #[command(flatten)]
    module: ModuleArgs,
    /// Extra linear form to test for boundedness, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    probe: Vec<String>,
}

#[derive(Args, Serialize)]
struct ClosureStableArgs {
    #[command(flatten)]
    module: ModuleArgs,
    /// Generator of the radical part, repeatable.
    #[arg(long, required = true, allow_hyphen_values = true)]
    radical: Vec<String>,
}

#[derive(Args, Serialize)]
struct FiberArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long)]
    coordinate: String,
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Test this polynomial on every fibre.
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    #[arg(long, default_value_t = 4)]
    degree: u32,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Serialize)]
struct WeakArgs {
    #[command(flatten)]
    inner: PolyArgs,
    #[arg(long, default_value_t = 9)]
    grid: usize,
    #[arg(long, default_value_t = 4)]
    depth: usize,
}

#[derive(Args, Serialize)]
struct MomentArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Dirac functional at a comma-separated point.
    #[arg(long, conflicts_with = "moments")]
    point: Option<String>,
    /// JSON file {"degree": 2d, "values": [{"exps": [...], "value": v}, ...]}.
    #[arg(long)]
    moments: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Serialize)]
struct AppendixArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verify the conic hull instead.
    #[arg(long)]
    cone: bool,
    /// Omit per-point verdicts.
    #[arg(long)]
    summary: bool,
}

enum CliError {
    Usage(String),
    Limit(String),
}

impl From<QmError> for CliError {
    fn from(e: QmError) -> Self {
        match e {
            QmError::TooLarge { .. } | QmError::Num(NumError::TooLarge { .. }) => CliError::Limit(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FiberError> for CliError {
    fn from(e: FiberError) -> Self {
        match e {
            FiberError::Qm(q) => q.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::TooManyAtoms(..) => CliError::Limit(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type Res<T> = Result<T, CliError>;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn rational(s: &str) -> Res<num_rational::BigRational> {
    parse_rational(s).ok_or_else(|| usage(format!("not a rational number: {s}")))
}

fn rationals(s: &str) -> Res<Vec<num_rational::BigRational>> {
    s.split(',').map(|t| rational(t.trim())).collect()
}

fn instance(name: &str) -> Res<QuadraticModuleSpec> {
    let parts: Vec<&str> = name.split(':').collect();
    let int = |i: usize| -> Res<usize> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| usage(format!("instance {name}: expected a positive integer at position {i}")))
    };
    let c = |i: usize| -> Res<num_rational::BigRational> {
        parts.get(i).map_or_else(|| Ok(num_rational::BigRational::from_integer(1.into())), |s| rational(s))
    };
    match parts[0] {
        "ball" => Ok(ball(int(1)?)),
        "couex" => Ok(example_couex()),
        "couex-m" => Ok(example_couex_m()),
        "example-4-2" => Ok(example_4_2()),
        "example-3-3" => Ok(example_3_3(int(1)?, c(2)?)),
        "example-3-4" => Ok(example_3_4(int(1)?, c(2)?)),
        _ => Err(usage(format!("unknown instance name: {name}"))),
    }
}

const INSTANCES: [&str; 6] = ["ball:2", "couex", "couex-m", "example-4-2", "example-3-3:2:1", "example-3-4:2:1/4"];

fn load_module(a: &ModuleArgs) -> Res<QuadraticModuleSpec> {
    if let Some(name) = &a.instance {
        return instance(name);
    }
    if let Some(path) = &a.module {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let j: ModuleJson = serde_json::from_str(&text).map_err(|e| usage(format!("malformed module JSON: {e}")))?;
        return Ok(QuadraticModuleSpec::from_json(&j)?);
    }
    let Some(vars) = &a.vars else {
        return Err(usage("one of --instance, --module or --vars/--gens is required"));
    };
    let vars: Vec<&str> = vars.split(',').map(str::trim).collect();
    let gens: Vec<&str> = a.gens.iter().map(String::as_str).collect();
    let kind = if a.preordering { ModuleKind::Preordering } else { ModuleKind::QuadraticModule };
    Ok(QuadraticModuleSpec::parse(&vars, &gens, kind)?)
}

fn poly(m: &QuadraticModuleSpec, s: &str) -> Res<QPoly> {
    parse_polynomial(s, Some(m.vars.clone())).map_err(|e| usage(format!("{s}: {e}")))
}

fn member_options(t: &TolArgs) -> Res<MemberOptions> {
    let mut opts = MemberOptions::default();
    if let Ok(v) = std::env::var(TOL_ENV) {
        let tol: f64 = v.parse().map_err(|_| usage(format!("{TOL_ENV}={v} is not a number")))?;
        opts.sdp.tol_feas = tol;
        opts.sdp.tol_psd = tol;
    }
    if let Some(v) = t.tol_feas {
        opts.sdp.tol_feas = v;
    }
    if let Some(v) = t.tol_psd {
        opts.sdp.tol_psd = v;
    }
    if !(opts.sdp.tol_feas > 0.0 && opts.sdp.tol_psd > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    Ok(opts)
}

fn status_str<T: Serialize>(s: &T) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

fn moments_json(l: &PseudoMoments) -> Value {
    json!({
        "degree": l.degree,
        "values": l.values.iter().map(|(m, v)| json!({"exps": m.exps(), "value": v})).collect::<Vec<_>>(),
    })
}

fn member_json(r: &MemberResult) -> Value {
    json!({
        "status": status_str(&r.status),
        "degree": r.degree,
        "certificate": r.certificate.as_ref().map(|c| c.to_json()),
        "dual": r.dual.as_ref().map(moments_json),
        "margin": r.margin,
        "reason": r.reason,
    })
}

fn run(cli: &Cli) -> Res<Value> {
    let result = match &cli.command {
        Command::Member(a) => {
            let m = load_module(&a.module)?;
            let f = poly(&m, &a.poly)?;
            let opts = member_options(&a.tol)?;
            json!({"module": m.to_json(), "options": opts, "result": member_json(&member(&f, &m, a.degree, &opts)?)})
        }
        Command::SeqMember(s) => {
            let a = &s.inner;
            let m = load_module(&a.module)?;
            let f = poly(&m, &a.poly)?;
            let opts = member_options(&a.tol)?;
            let e = s.exponent.unwrap_or(f.degree() / 2 + 1);
            let r = seq_member(&f, &m, a.degree, e, &rationals(&s.eps)?, &opts)?;
            json!({
                "module": m.to_json(),
                "options": opts,
                "result": {
                    "verdict": status_str(&r.verdict),
                    "exponent": r.exponent,
                    "per_eps": r.per_eps.iter().map(|(eps, r)| json!({"eps": eps.to_string(), "member": member_json(r)})).collect::<Vec<_>>(),
                },
            })
        }
        Command::PosSemi(p) => {
            let a = &p.inner;
            let m = load_module(&a.module)?;
            let f = poly(&m, &a.poly)?;
            let opts = member_options(&a.tol)?;
            let r = pos_semiordering_search(&f, &m, p.max_exponent, a.degree, &opts)?;
            json!({
                "module": m.to_json(),
                "options": opts,
                "result": {
                    "status": status_str(&r.status),
                    "exponent": r.exponent,
                    "reason": r.reason,
                    "certificate": r.certificate.as_ref().map(|c| json!({
                        "p": c.p_poly().to_string(),
                        "q": c.q_poly().to_string(),
                        "residual": c.residual,
                        "identity": c.inner.to_json(),
                    })),
                },
            })
        }
        Command::Archimedean(a) => {
            let m = load_module(&a.module)?;
            let opts = member_options(&a.tol)?;
            let r = archimedean_probe(&m, &rationals(&a.k)?, a.degree, &opts)?;
            let result = match r {
                ArchimedeanStatus::Certified { k, certificate } => {
                    json!({"status": "archimedean_certified", "k": k.to_string(), "certificate": certificate.to_json()})
                }
                ArchimedeanStatus::Unknown { tried } => json!({
                    "status": "unknown",
                    "note": "no certificate found; this does not show the module is not archimedean",
                    "tried": tried.iter().map(|(k, s)| json!({"k": k.to_string(), "status": status_str(s)})).collect::<Vec<_>>(),
                }),
            };
            json!({"module": m.to_json(), "options": opts, "result": result})
        }
        Command::Support(a) => {
            let m = load_module(&a.module)?;
            let opts = member_options(&a.tol)?;
            let cands = a.candidate.iter().map(|c| poly(&m, c)).collect::<Res<Vec<_>>>()?;
            let found = support_probe(&m, a.degree, &cands, &opts)?;
            json!({
                "module": m.to_json(),
                "options": opts,
                "result": {"certified_in_support": found.iter().map(|h| h.to_string()).collect::<Vec<_>>()},
            })
        }
        Command::Stable(a) => {
            let m = load_module(&a.module)?;
            let probes = a.probe.iter().map(|c| poly(&m, c)).collect::<Res<Vec<_>>>()?;
            json!({"module": m.to_json(), "result": poly_stability(&m, &probes)?.to_json()})
        }
        Command::ClosureStable(a) => {
            let m = load_module(&a.module)?;
            let rad = a.radical.iter().map(|c| poly(&m, c)).collect::<Res<Vec<_>>>()?;
            json!({"module": m.to_json(), "result": {"closure_module": stable_closure(&m, &rad)?.to_json()}})
        }
        Command::Fiber(a) => {
            let m = load_module(&a.module)?;
            let d = fiber_decompose(&m, &a.coordinate, &rational(&a.a)?, &rational(&a.b)?, a.grid)?;
            let fibers: Vec<Value> = d
                .fibers
                .iter()
                .map(|f| {
                    json!({
                        "lambda": f.lambda.to_string(),
                        "improper": f.improper,
                        "vars": f.spec.vars.to_vec(),
                        "generators": f.spec.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let test = match &a.poly {
                Some(p) => {
                    let f = poly(&m, p)?;
                    let opts = member_options(&a.tol)?;
                    let r = fiber_member(&f, &d, a.degree, &opts)?;
                    let aggregate = match &r.aggregate {
                        FiberAggregate::MemberOnAllGridFibers => json!({"status": "member_on_all_grid_fibers"}),
                        FiberAggregate::FailsAt(l) => json!({"status": "fails_at", "lambda": l.to_string()}),
                    };
                    json!({
                        "per_fiber": r.per_fiber.iter().map(|(l, s)| json!({"lambda": l.to_string(), "status": status_str(s)})).collect::<Vec<_>>(),
                        "aggregate": aggregate,
                    })
                }
                None => Value::Null,
            };
            json!({"module": m.to_json(), "result": {"coordinate": d.coordinate, "fibers": fibers, "test": test}})
        }
        Command::WeakClosure(w) => {
            let a = &w.inner;
            let m = load_module(&a.module)?;
            let f = poly(&m, &a.poly)?;
            let mut opts = WeakClosureOptions { depth_limit: w.depth, degree: a.degree, grid_size: w.grid, ..Default::default() };
            opts.bounds.member = member_options(&a.tol)?;
            let r = weak_closure_member(&f, &m, &opts)?;
            json!({"module": m.to_json(), "result": r})
        }
        Command::MomentDual(a) => {
            let m = load_module(&a.module)?;
            let opts = member_options(&a.tol)?;
            let l = match (&a.point, &a.moments) {
                (Some(p), _) => {
                    let pt: Vec<f64> = p
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad coordinate {t}"))))
                        .collect::<Res<_>>()?;
                    if pt.len() != m.nvars() {
                        return Err(usage(format!("point has {} coordinates, module has {} variables", pt.len(), m.nvars())));
                    }
                    PseudoMoments::dirac(m.vars.clone(), 2 * a.degree, &pt)
                }
                (None, Some(path)) => read_moments(path, &m)?,
                (None, None) => return Err(usage("one of --point or --moments is required")),
            };
            let result = match dual_moment_check(&l, &m, a.degree, opts.sdp.tol_psd)? {
                MomentCheck::PsdPass { min_eig } => json!({"status": "psd_pass", "mineig": min_eig}),
                MomentCheck::PsdFail(w) => json!({"status": "psd_fail", "witness": w}),
            };
            json!({"module": m.to_json(), "options": opts, "result": result})
        }
        Command::Appendix(a) => {
            if a.n == 1 {
                let r = terminal_verify(a.m, a.samples, a.seed)?;
                json!({"result": r, "passed": r.passed()})
            } else {
                let mut r =
                    if a.cone { cc_seq_step_verify(a.n, a.m, a.samples, a.seed)? } else { seq_step_verify(a.n, a.m, a.samples, a.seed)? };
                let passed = r.passed();
                if a.summary {
                    r.points.clear();
                }
                json!({"result": r, "passed": passed})
            }
        }
        Command::Instances => {
            let list: BTreeMap<&str, Value> = INSTANCES
                .iter()
                .map(|n| (*n, serde_json::to_value(instance(n).map(|m| m.to_json()).ok()).unwrap_or(Value::Null)))
                .collect();
            json!({"instances": list})
        }
    };
    Ok(result)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentFile {
    degree: u32,
    values: Vec<MomentEntry>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentEntry {
    exps: Vec<u32>,
    value: f64,
}

fn read_moments(path: &PathBuf, m: &QuadraticModuleSpec) -> Res<PseudoMoments> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let f: MomentFile = serde_json::from_str(&text).map_err(|e| usage(format!("malformed moments JSON: {e}")))?;
    let mut values = BTreeMap::new();
    for e in f.values {
        if e.exps.len() != m.nvars() {
            return Err(usage(format!("exponent vector {:?} does not match {} variables", e.exps, m.nvars())));
        }
        values.insert(Monomial::new(e.exps), e.value);
    }
    Ok(PseudoMoments::new(m.vars.clone(), f.degree, values))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(result) => {
            let mut report = json!({"schema": SCHEMA, "config": &cli, "tol_env": std::env::var(TOL_ENV).ok()});
            if let (Value::Object(r), Value::Object(extra)) = (&mut report, result) {
                r.extend(extra);
            }
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            match &cli.output {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, text) {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Limit(msg)) => {
            eprintln!("limit exceeded: {msg}");
            ExitCode::from(2)
        }
    }
}
