use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use noflip::bloch::{canonicalize_triple, coplanarity_det, great_circle_flipper, BlochVector, QubitTriple};
use noflip::constructions::search::{minimize_deviation, SearchConfig};
use noflip::constructions::signalling::{nosignalling_feasibility, Constraint};
use noflip::error::Error;
use noflip::linalg::{StateVector, C64};
use noflip::machine::{FlipScenario, MachineModel};
use noflip::report::{evaluate, Check, Evaluation, Tolerances, VerificationReport};
use noflip::sweep::{self, parse_angle, OutputFormat, RunManifest, SweepConfig};
use noflip::triple::FlipTriple;

const EXIT_INCONSISTENT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "noflip", version, about = "Checks for universal qubit flipping machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Qutrit-qubit signalling construction: Alice's marginals before and after.
    VerifySignalling(ScenarioArgs),
    /// Five-qubit construction: entanglement gain and the six-term identity.
    VerifyEntanglement(ScenarioArgs),
    /// Product-state construction: normalization and created entanglement.
    VerifyProduct(ScenarioArgs),
    /// Whether any machine meets all four no-signalling conditions.
    Feasibility(ScenarioArgs),
    /// Coplanarity and canonical form of three qubit states.
    CheckGreatCircle(CircleArgs),
    /// Runs a seeded sweep from a JSON configuration.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Random seed for `--machine random` and `--machine optimize`.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Tolerance for great-circle, feasibility, and closed-form checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Overlap magnitude `⟨0|ψ⟩`; defaults to 1/√2 with `--c`.
    #[arg(long)]
    a: Option<f64>,
    /// Defaults to √(1 - a²).
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Defaults to √(1 - c²).
    #[arg(long)]
    d: Option<f64>,
    /// Relative phase in radians; accepts `pi`, `pi/2`, `3pi/4`, ...
    #[arg(long, default_value = "pi/2", allow_hyphen_values = true)]
    theta: String,
    /// trivial | identity-gram | witness | random | optimize | file:PATH
    #[arg(long, default_value = "trivial")]
    machine: String,
    /// Overrides the machine's `μ`.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Overrides the machine's `ν`.
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CircleArgs {
    /// A qubit state as `re0,im0,re1,im1`; give exactly three.
    #[arg(long = "state", num_args = 1, allow_hyphen_values = true)]
    states: Vec<String>,
    /// A Bloch vector as `x,y,z`; alternative to `--state`.
    #[arg(long = "bloch", num_args = 1, allow_hyphen_values = true)]
    blochs: Vec<String>,
    /// Accepted deviation of each input from unit norm before renormalizing.
    #[arg(long, default_value_t = 1e-6)]
    norm_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::VerifySignalling(a) => verify(a, Kind::Signalling),
        Command::VerifyEntanglement(a) => verify(a, Kind::Entanglement),
        Command::VerifyProduct(a) => verify(a, Kind::Product),
        Command::Feasibility(a) => feasibility(a),
        Command::CheckGreatCircle(a) => check_great_circle(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INCONSISTENT),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn triple_from(args: &ScenarioArgs) -> Result<FlipTriple, Failure> {
    let theta = parse_angle(&args.theta)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = args.a.unwrap_or(s);
    let c = args.c.unwrap_or(s);
    let root = |x: f64| (1.0 - x * x).max(0.0).sqrt();
    Ok(FlipTriple::new(
        a,
        args.b.unwrap_or_else(|| root(a)),
        c,
        args.d.unwrap_or_else(|| root(c)),
        theta,
    )?)
}

fn machine_from(args: &ScenarioArgs, triple: &FlipTriple) -> Result<MachineModel, Failure> {
    let seed = args.common.seed;
    let base = match args.machine.as_str() {
        "trivial" => MachineModel::trivial(),
        "identity-gram" => MachineModel::identity_gram(),
        "witness" => nosignalling_feasibility(triple, args.common.tol)
            .witness
            .ok_or(Error::NoWitness)?,
        "random" => MachineModel::random(&mut ChaCha8Rng::seed_from_u64(seed)),
        "optimize" => {
            let cfg = SearchConfig { seed, ..SearchConfig::default() };
            minimize_deviation(triple, &cfg)?.argmin
        }
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("{path}: {e}")))?;
                serde_json::from_str::<MachineModel>(&text)
                    .map_err(|e| Failure::Usage(format!("{path}: {e}")))?
            }
            None => return Err(Failure::Usage(format!("unknown machine {other:?}"))),
        },
    };
    if args.mu.is_none() && args.nu.is_none() {
        return Ok(base);
    }
    Ok(MachineModel::from_gram(
        args.mu.unwrap_or(base.mu()),
        args.nu.unwrap_or(base.nu()),
        base.gram().clone(),
    )?)
}

fn tolerances(tol: f64) -> Result<Tolerances, Failure> {
    let t = Tolerances {
        great_circle: tol,
        feasibility: tol,
        consistency: tol,
    };
    t.validate()?;
    Ok(t)
}

#[derive(Clone, Copy)]
enum Kind {
    Signalling,
    Entanglement,
    Product,
}

impl Kind {
    fn owns(self, check: &Check) -> bool {
        let n = check.name.as_str();
        match self {
            Kind::Signalling => n.starts_with("signalling") || n == "deviation",
            Kind::Entanglement => {
                n.starts_with("entanglement")
                    || n.starts_with("lambda")
                    || n.starts_with("entropy")
                    || n.starts_with("appendix")
                    || n == "monotone_ok"
            }
            Kind::Product => n.starts_with("product"),
        }
    }
}

fn verify(args: &ScenarioArgs, kind: Kind) -> Outcome {
    let triple = triple_from(args)?;
    let machine = machine_from(args, &triple)?;
    let scenario = FlipScenario::new(triple, machine)?;
    let tol = tolerances(args.common.tol)?;
    let ev = evaluate(&scenario, &tol)?;
    let checks: Vec<&Check> = ev.checks.iter().filter(|c| kind.owns(c)).collect();
    let pass = checks.iter().all(|c| c.pass);
    let body = match args.common.format {
        Format::Csv => sweep::render_csv(std::slice::from_ref(&ev.report)),
        Format::Json => pretty(&verify_json(&ev, &scenario, kind, &checks, pass)),
    };
    emit(args.common.out.as_deref(), &body)?;
    Ok(pass)
}

fn verify_json(ev: &Evaluation, scenario: &FlipScenario, kind: Kind, checks: &[&Check], pass: bool) -> Value {
    let mut v = json!({
        "report": ev.report,
        "machine": scenario.machine,
        "checks": checks,
        "consistent": pass,
    });
    let extra = match kind {
        Kind::Signalling => json!({
            "deviation_frobenius": ev.frobenius_deviation,
            "residuals": Constraint::ALL
                .iter()
                .zip(ev.residuals)
                .map(|(c, r)| (c.id().to_string(), json!(r)))
                .collect::<serde_json::Map<_, _>>(),
        }),
        Kind::Entanglement => json!({ "appendix": ev.appendix }),
        Kind::Product => json!({ "product": ev.product }),
    };
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, extra) {
        dst.extend(src);
    }
    v
}

fn feasibility(args: &ScenarioArgs) -> Outcome {
    let triple = triple_from(args)?;
    let tol = tolerances(args.common.tol)?;
    let verdict = nosignalling_feasibility(&triple, tol.feasibility);
    let det = triple.bloch_determinant();
    let body = json!({
        "triple": triple,
        "bloch_determinant": det,
        "great_circle": triple.is_great_circle(tol.great_circle),
        "feasible": verdict.feasible,
        "violated": verdict.violated,
        "witness": verdict.witness,
        "residuals": verdict.residuals,
    });
    let text = match args.common.format {
        Format::Json => pretty(&body),
        Format::Csv => format!(
            "feasible,great_circle,bloch_determinant\n{},{},{}\n",
            verdict.feasible,
            triple.is_great_circle(tol.great_circle),
            noflip::report::format_number(det)
        ),
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(true)
}

fn parse_reals(text: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("cannot parse {text:?} as {n} numbers")))?;
    if vals.len() != n {
        return Err(Failure::Usage(format!("expected {n} numbers in {text:?}")));
    }
    Ok(vals)
}

fn circle_states(args: &CircleArgs) -> Result<Vec<StateVector>, Failure> {
    let mut out = Vec::new();
    for s in &args.states {
        let v = parse_reals(s, 4)?;
        let psi = StateVector::qubit(C64::new(v[0], v[1]), C64::new(v[2], v[3]));
        let n = psi.norm_sqr().sqrt();
        if (n - 1.0).abs() > args.norm_tol {
            return Err(Failure::Usage(format!("state {s:?} has norm {n}")));
        }
        out.push(psi.normalized());
    }
    for s in &args.blochs {
        let v = parse_reals(s, 3)?;
        let b = BlochVector::new(v[0], v[1], v[2]);
        if (b.norm() - 1.0).abs() > args.norm_tol {
            return Err(Failure::Usage(format!("Bloch vector {s:?} has norm {}", b.norm())));
        }
        let n = b.norm();
        out.push(BlochVector::new(b.x / n, b.y / n, b.z / n).to_state());
    }
    if out.len() != 3 {
        return Err(Failure::Usage(format!(
            "need exactly three states, got {}",
            out.len()
        )));
    }
    Ok(out)
}

fn check_great_circle(args: &CircleArgs) -> Outcome {
    let states = circle_states(args)?;
    let tol = args.common.tol;
    let triple = QubitTriple::new(states[0].clone(), states[1].clone(), states[2].clone())?;
    let det = coplanarity_det(&triple);
    let on_circle = det.abs() <= tol;
    let blochs: Vec<BlochVector> = states
        .iter()
        .map(BlochVector::from_state)
        .collect::<Result<_, _>>()?;
    let mut body = json!({
        "bloch": blochs.iter().map(|b| [b.x, b.y, b.z]).collect::<Vec<_>>(),
        "determinant": det,
        "great_circle": on_circle,
        "degenerate_pairs": triple.degenerate_pairs(),
    });
    if on_circle {
        if let Some(n) = circle_normal(&blochs) {
            let u = great_circle_flipper(&n)?;
            let worst = states
                .iter()
                .map(|s| s.inner(&StateVector::new(u.mul_vec(s.amplitudes()), vec![2]).expect("qubit")).norm())
                .fold(0.0, f64::max);
            body["normal"] = json!([n.x, n.y, n.z]);
            body["flipper_max_overlap"] = json!(worst);
        }
    }
    match canonicalize_triple(&triple) {
        Ok(canon) => {
            body["canonical"] = json!(canon.triple);
            body["reflected"] = json!(canon.reflected);
        }
        Err(e) => body["canonical_error"] = json!(e.to_string()),
    }
    let text = match args.common.format {
        Format::Json => pretty(&body),
        Format::Csv => format!(
            "determinant,great_circle\n{},{}\n",
            noflip::report::format_number(det),
            on_circle
        ),
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(true)
}

/// Unit normal of the plane through the origin holding all three vectors.
fn circle_normal(b: &[BlochVector]) -> Option<BlochVector> {
    let candidates = [b[0].cross(&b[1]), b[0].cross(&b[2]), b[1].cross(&b[2])];
    let best = candidates
        .into_iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))?;
    let n = best.norm();
    (n > 1e-12).then(|| BlochVector::new(best.x / n, best.y / n, best.z / n))
}

fn run_sweep(args: &SweepArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = SweepConfig::from_json(&text)?;
    let mut output = cfg.output.clone().unwrap_or(sweep::OutputSpec {
        path: None,
        format: OutputFormat::Csv,
    });
    if let Some(p) = &args.out {
        output.path = Some(p.clone());
    }
    if let Some(f) = args.format {
        output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    cfg.output = Some(output.clone());

    let started_at = sweep::timestamp();
    let rows = sweep::run_sweep(&cfg)?;
    let finished_at = sweep::timestamp();
    let consistent = rows.iter().all(|r| r.consistent);
    for r in rows.iter().filter(|r| !r.consistent) {
        eprintln!("row {}: failed checks {}", r.index, r.failed.join(", "));
    }
    let reports: Vec<VerificationReport> = rows.into_iter().map(|r| r.report).collect();
    emit(output.path.as_deref(), &sweep::render(&reports, output.format))?;

    let manifest = RunManifest {
        config_sha256: sweep::config_hash(&text),
        version: noflip::VERSION.to_string(),
        seed: cfg.seed,
        started_at,
        finished_at,
        rows: reports.len(),
        consistent,
    };
    let manifest_text = pretty(&serde_json::to_value(&manifest).expect("manifest serializes"));
    match &output.path {
        Some(p) => {
            let mut name = p.clone().into_os_string();
            name.push(".manifest.json");
            write_file(Path::new(&name), &manifest_text)?;
        }
        None => eprint!("{manifest_text}"),
    }
    Ok(consistent)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}
