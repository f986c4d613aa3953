//! `orbex`: JSON front end for orbex-core.
//!
//! Every invocation writes exactly one JSON document to stdout. Exit status
//! reflects computational health only: 0 on success (whatever the verdict),
//! 2 on input errors, 3 on internal invariant violations. All randomness is
//! ChaCha8 seeded from `--seed`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use orbex_core::acceptance::{run_criterion, AcceptanceConfig, Fault, CRITERIA};
use orbex_core::extremality::check_extreme;
use orbex_core::matrix::{
    birkhoff_decompose, check_extreme_diag, eig_scale, identity_suite, matrix_majorise, parse_matrix,
    t_transform_chain, DoublyStochastic, HermitianOperator, NumberOrRat,
};
use orbex_core::measure::{parse_function_document, parse_function_normalized, SimpleFunction};
use orbex_core::oracle::{enumerate_extreme, oracle_extreme, sample_orbit, OrbitPolytope};
use orbex_core::scales::{majorise_check, rearrange, submajorise_check};
use orbex_core::witness::build_witness;
use orbex_core::Error;

const DEFAULT_MATRIX_TOL: f64 = 1e-9;
const DEFAULT_SUITE_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "orbex", version, about = "Extreme points of majorisation orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangement of -f.
    Rearrange(Opts),
    /// Majorisation report for -x against -y.
    Majorise(Opts),
    /// Weak (sub)majorisation of -x by -y.
    Submajorise(Opts),
    /// Extremality verdict for -x in the orbit of -y.
    Extreme(Opts),
    /// Perturbation pair certifying that -x is not extreme.
    Witness(Opts),
    /// Independent polytope verdict (atomic spaces only).
    Oracle(Opts),
    /// All extreme points of the orbit of -y (at most six atoms).
    Enumerate(Opts),
    /// A seeded random point of the orbit of -y.
    Sample(Opts),
    /// Spectral scale of the Hermitian matrix -f.
    MatrixEig(Opts),
    /// Spectral majorisation of -x by -y.
    MatrixMajorise(Opts),
    /// Extremality of the diagonal matrix -x in the unitary orbit of -y.
    MatrixExtreme(Opts),
    /// Birkhoff decomposition of the doubly stochastic matrix -f.
    Birkhoff(Opts),
    /// T-transform chain taking vector -y to vector -x.
    Ttransform(Opts),
    /// Randomized trace-identity checks in dimension --dim.
    Suite(Opts),
    /// Full acceptance suite.
    Selftest(Opts),
}

#[derive(Args, Clone, Debug)]
struct Opts {
    #[arg(short = 'x', value_name = "PATH")]
    x: Option<PathBuf>,
    #[arg(short = 'y', value_name = "PATH")]
    y: Option<PathBuf>,
    #[arg(short = 'f', value_name = "PATH")]
    f: Option<PathBuf>,
    /// Include the witness pair in `extreme` output.
    #[arg(long)]
    witness: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// Numerical tolerance for matrix commands.
    #[arg(long)]
    tol: Option<f64>,
    /// Rescale input measures to total mass 1.
    #[arg(long)]
    normalize: bool,
    /// Indentation width of the output; 0 prints compact JSON.
    #[arg(long, default_value_t = 2)]
    json_indent: usize,
    /// Matrix dimension for `suite`.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    FlipVerdict,
}

enum Failure {
    Input(String, String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.code().into(), e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl Failure {
    fn usage(detail: impl Into<String>) -> Self {
        Failure::Input("UsageError".into(), detail.into())
    }
}

type Outcome = Result<(Value, ExitCode), Failure>;

fn main() -> ExitCode {
    let (cli, indent) = match Cli::try_parse() {
        Ok(cli) => {
            let indent = opts(&cli.command).json_indent;
            (cli, indent)
        }
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    emit(&json!({ "help": text }), 2);
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{text}");
                    emit(&json!({ "error": "UsageError", "detail": text.trim() }), 2);
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(&cli.command) {
        Ok((value, code)) => {
            emit(&value, indent);
            code
        }
        Err(Failure::Input(code, detail)) => {
            eprintln!("error: {detail}");
            emit(&json!({ "error": code, "detail": detail }), indent);
            ExitCode::from(2)
        }
        Err(Failure::Internal(detail)) => {
            eprintln!("internal error: {detail}");
            emit(&json!({ "error": "InvariantViolation", "detail": detail }), indent);
            ExitCode::from(3)
        }
    }
}

fn emit(value: &Value, indent: usize) {
    let mut out = Vec::new();
    if indent == 0 {
        serde_json::to_writer(&mut out, value).expect("serializable");
    } else {
        let pad = vec![b' '; indent];
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
        let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
        value.serialize(&mut ser).expect("serializable");
    }
    out.push(b'\n');
    let _ = std::io::stdout().lock().write_all(&out);
}

fn opts(c: &Command) -> &Opts {
    match c {
        Command::Rearrange(o)
        | Command::Majorise(o)
        | Command::Submajorise(o)
        | Command::Extreme(o)
        | Command::Witness(o)
        | Command::Oracle(o)
        | Command::Enumerate(o)
        | Command::Sample(o)
        | Command::MatrixEig(o)
        | Command::MatrixMajorise(o)
        | Command::MatrixExtreme(o)
        | Command::Birkhoff(o)
        | Command::Ttransform(o)
        | Command::Suite(o)
        | Command::Selftest(o) => o,
    }
}

fn ok(value: Value) -> Outcome {
    Ok((value, ExitCode::SUCCESS))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<String, Failure> {
    let path: &Path = path.as_deref().ok_or_else(|| Failure::usage(format!("missing required input {flag}")))?;
    fs::read_to_string(path).map_err(|e| Failure::Input("IoError".into(), format!("{}: {e}", path.display())))
}

fn function(o: &Opts, path: &Option<PathBuf>, flag: &str) -> Result<SimpleFunction, Failure> {
    let text = read(path, flag)?;
    let f = if o.normalize { parse_function_normalized(&text) } else { parse_function_document(&text) };
    Ok(f?)
}

fn pair(o: &Opts) -> Result<(SimpleFunction, SimpleFunction), Failure> {
    Ok((function(o, &o.x, "-x")?, function(o, &o.y, "-y")?))
}

fn target(o: &Opts) -> Result<SimpleFunction, Failure> {
    if o.y.is_some() {
        function(o, &o.y, "-y")
    } else {
        function(o, &o.f, "-f")
    }
}

fn matrix(o: &Opts, path: &Option<PathBuf>, flag: &str) -> Result<HermitianOperator, Failure> {
    let doc = parse_matrix(&read(path, flag)?)?;
    Ok(doc.hermitian(o.tol)?)
}

fn vector(path: &Option<PathBuf>, flag: &str) -> Result<Vec<f64>, Failure> {
    let text = read(path, flag)?;
    let v: Vec<NumberOrRat> =
        serde_json::from_str(&text).map_err(|e| Failure::from(Error::Schema(format!("vector: {e}"))))?;
    let v: Vec<f64> = v.iter().map(NumberOrRat::value).collect();
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::Schema("vector entries must be finite".into()).into());
    }
    Ok(v)
}

fn run(command: &Command) -> Outcome {
    let o = opts(command);
    match command {
        Command::Rearrange(_) => ok(to_value(&rearrange(&function(o, &o.f, "-f")?))),
        Command::Majorise(_) => {
            let (x, y) = pair(o)?;
            ok(to_value(&majorise_check(&rearrange(&x), &rearrange(&y))))
        }
        Command::Submajorise(_) => {
            let (x, y) = pair(o)?;
            ok(json!({ "holds": submajorise_check(&x, &y) }))
        }
        Command::Extreme(_) => {
            let (x, y) = pair(o)?;
            ok(check_extreme(&x, &y)?.to_json(o.witness))
        }
        Command::Witness(_) => {
            let (x, y) = pair(o)?;
            ok(build_witness(&x, &y)?.to_json())
        }
        Command::Oracle(_) => {
            let (x, y) = pair(o)?;
            let poly = OrbitPolytope::for_function(x.space().clone(), &y)?;
            let in_orbit = poly.contains(&x)?;
            let mut out = json!({
                "in_orbit": in_orbit,
                "n": poly.n(),
                "constraints": poly.constraint_count(),
            });
            if in_orbit {
                out["tight_rank"] = json!(poly.tight_rank(&x)?);
                out["extreme"] = json!(oracle_extreme(&x, &y)?);
            }
            ok(out)
        }
        Command::Enumerate(_) => {
            let points = enumerate_extreme(&target(o)?)?;
            ok(Value::Array(points.iter().map(SimpleFunction::to_json).collect()))
        }
        Command::Sample(_) => ok(sample_orbit(&target(o)?, o.seed).to_json()),
        Command::MatrixEig(_) => {
            let a = matrix(o, &o.f, "-f")?;
            let scale = eig_scale(&a)?;
            let mut out = scale.to_json();
            out["eigenvalues"] = json!(scale.values());
            ok(out)
        }
        Command::MatrixMajorise(_) => {
            let (x, y) = (matrix(o, &o.x, "-x")?, matrix(o, &o.y, "-y")?);
            ok(to_value(&matrix_majorise(&x, &y)?))
        }
        Command::MatrixExtreme(_) => {
            let (x, y) = (matrix(o, &o.x, "-x")?, matrix(o, &o.y, "-y")?);
            let d = check_extreme_diag(&x, &y)?;
            ok(json!({
                "verdict": if d.extreme { "extreme" } else { "not_extreme" },
                "model_checked": d.model_checked,
            }))
        }
        Command::Birkhoff(_) => {
            let tol = o.tol.unwrap_or(DEFAULT_MATRIX_TOL);
            let doc = parse_matrix(&read(&o.f, "-f")?)?;
            if doc.im.is_some() {
                return Err(Error::Schema("doubly stochastic input must be real".into()).into());
            }
            let m = doc.to_matrix()?;
            let n = m.n();
            let rows = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
            let s = DoublyStochastic::new(rows, tol)?;
            ok(to_value(&birkhoff_decompose(&s, tol)?))
        }
        Command::Ttransform(_) => {
            let tol = o.tol.unwrap_or(DEFAULT_MATRIX_TOL);
            let (x, y) = (vector(&o.x, "-x")?, vector(&o.y, "-y")?);
            ok(to_value(&t_transform_chain(&x, &y, tol)?))
        }
        Command::Suite(_) => {
            let tol = o.tol.unwrap_or(DEFAULT_SUITE_TOL);
            let report = identity_suite(o.seed, o.dim, o.trials.unwrap_or(100), tol)?;
            ok(to_value(&report))
        }
        Command::Selftest(_) => selftest(o),
    }
}

/// Timings go to stderr so that stdout stays byte-identical across runs.
fn selftest(o: &Opts) -> Outcome {
    let cfg = AcceptanceConfig {
        seed: o.seed,
        trials: o.trials,
        fault: o.inject_fault.map(|FaultArg::FlipVerdict| Fault::FlipVerdict),
    };
    if o.trials == Some(0) {
        eprintln!("warning: 0 trials requested; randomized criteria pass vacuously");
    }
    let mut criteria = Vec::new();
    let mut all = true;
    let mut seconds = 0.0;
    for id in CRITERIA {
        let r = run_criterion(id, &cfg);
        eprintln!("{}", r.line());
        seconds += r.seconds;
        all &= r.passed();
        criteria.push(json!({
            "id": r.id,
            "name": r.name,
            "cases": r.cases,
            "passed": r.passed,
            "failure_count": r.failure_count,
            "failures": r.failures,
            "ok": r.passed(),
            "notes": r.notes,
        }));
    }
    eprintln!("{} in {seconds:.1} s", if all { "all criteria passed" } else { "FAILED" });
    let mut out = json!({ "seed": o.seed, "trials": o.trials, "all_passed": all, "criteria": criteria });
    if o.trials == Some(0) {
        out["warning"] = json!("0 trials");
    }
    Ok((out, if all { ExitCode::SUCCESS } else { ExitCode::from(1) }))
}
