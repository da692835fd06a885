//! Command-line front end over the torus calculus: structure validation,
//! normalization, brackets, cone tests, deformation flows, and the exact
//! identity self-test. Inputs are JSON documents; every run emits a short
//! human summary on stderr and a machine report on stdout (or a file via
//! `-o`). Exit codes: 0 success, 2 contract violation, 3 schema error,
//! 4 numerical divergence.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use b3geo::algebra::{rat_int, rat_to_f64, MONOMIAL_NAMES};
use b3geo::bracket::{courant, dorfman};
use b3geo::fields::genvec_band;
use b3geo::g22::{cohomology_class, cone_membership, cone_representative, normalize, validate};
use b3geo::io::{
    ba_to_value, cohomology_to_value, form_to_value, genvec_to_value, parse_document, rat_string,
    Payload,
};
use b3geo::moser::moser_flow;
use b3geo::selftest::run_selftest;
use b3geo::{
    CohomologyVector, Error, FlowSettings, FormField3, GenVectorField, MoserProblem, SpinorSign,
    TorusGrid,
};

const REPORT_VERSION: &str = "1";
const DEFAULT_GRID: usize = 16;
const DEFAULT_STEPS: usize = 32;
const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "b3geo", version, about = "Generalized structures on the flat 3-torus")]
struct Cli {
    /// Write the machine report to a file instead of stdout
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a structure: nowhere-null on the grid, sign, cohomology class
    Validate {
        /// g22_structure or form_field document
        file: PathBuf,
        /// Grid resolution per axis (overrides the document)
        #[arg(long)]
        grid: Option<usize>,
        /// Lower bound the sampled |Q| must clear
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Factor a validated structure as exp(B+A) applied to a constant normal form
    Normalize {
        /// g22_structure or form_field document
        file: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Courant bracket of two generalized vector fields
    Bracket {
        left: PathBuf,
        right: PathBuf,
    },
    /// Dorfman bracket of two generalized vector fields
    Dorfman {
        left: PathBuf,
        right: PathBuf,
    },
    /// Cone membership of a cohomology class, with a representative when inside
    Cone {
        /// cohomology_vector, form_field, or g22_structure document
        file: PathBuf,
    },
    /// Flow a structure onto a perturbed target and report the residuals
    Moser {
        /// moser_problem document (alternative to --rho0 and --phi)
        problem: Option<PathBuf>,
        /// Base structure document (g22_structure or form_field)
        #[arg(long, value_name = "FILE", conflicts_with = "problem")]
        rho0: Option<PathBuf>,
        /// Potential document (form_field); the target is rho + d phi
        #[arg(long, value_name = "FILE", conflicts_with = "problem")]
        phi: Option<PathBuf>,
        /// Grid resolution per axis for solves and residuals
        #[arg(long)]
        grid: Option<usize>,
        /// Time steps for the flow integrator
        #[arg(long)]
        steps: Option<usize>,
        /// Frequency band kept when projecting stage generators
        #[arg(long = "band-cap")]
        band_cap: Option<u32>,
        /// Fail (exit 4) when the terminal residual exceeds this
        #[arg(long)]
        tol: Option<f64>,
        /// Abort threshold for |Q| along the path
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Run the seeded exact-identity diagnostic suites
    Selftest {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Validate { .. } => "validate",
            Cmd::Normalize { .. } => "normalize",
            Cmd::Bracket { .. } => "bracket",
            Cmd::Dorfman { .. } => "dorfman",
            Cmd::Cone { .. } => "cone",
            Cmd::Moser { .. } => "moser",
            Cmd::Selftest { .. } => "selftest",
        }
    }
}

struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn new(message: impl Into<String>, code: i32) -> Self {
        Failure { message: message.into(), code }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: e.exit_code(), message: e.to_string() }
    }
}

struct CmdOutput {
    data: Value,
    human: Vec<String>,
    /// set when the command completed but its check failed
    failure: Option<Failure>,
}

impl CmdOutput {
    fn ok(data: Value, human: Vec<String>) -> Self {
        CmdOutput { data, human, failure: None }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run_cli(cli));
}

fn run_cli(cli: Cli) -> i32 {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let outcome = dispatch(&cli.command, &mut inputs);
    let timing_ms = start.elapsed().as_millis() as u64;

    let (code, ok, data, error, human) = match outcome {
        Ok(out) => match out.failure {
            None => (0, true, out.data, None, out.human),
            Some(f) => {
                let err = json!({ "message": f.message, "exit_code": f.code });
                let mut human = out.human;
                human.push(format!("error: {}", f.message));
                (f.code, false, out.data, Some(err), human)
            }
        },
        Err(f) => {
            let err = json!({ "message": f.message, "exit_code": f.code });
            (f.code, false, Value::Null, Some(err), vec![format!("error: {}", f.message)])
        }
    };

    let mut report = json!({
        "report_version": REPORT_VERSION,
        "command": cli.command.name(),
        "inputs": inputs,
        "ok": ok,
        "data": data,
        "timing_ms": timing_ms,
    });
    if let Some(err) = error {
        report["error"] = err;
    }

    for line in &human {
        eprintln!("{line}");
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serialization");
    text.push('\n');
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    code
}

fn dispatch(cmd: &Cmd, inputs: &mut Vec<Value>) -> Result<CmdOutput, Failure> {
    match cmd {
        Cmd::Validate { file, grid, margin } => cmd_validate(file, *grid, *margin, inputs),
        Cmd::Normalize { file, grid, margin } => cmd_normalize(file, *grid, *margin, inputs),
        Cmd::Bracket { left, right } => cmd_bracket(left, right, false, inputs),
        Cmd::Dorfman { left, right } => cmd_bracket(left, right, true, inputs),
        Cmd::Cone { file } => cmd_cone(file, inputs),
        Cmd::Moser { problem, rho0, phi, grid, steps, band_cap, tol, margin } => {
            cmd_moser(problem, rho0, phi, *grid, *steps, *band_cap, *tol, *margin, inputs)
        }
        Cmd::Selftest { cases, seed } => cmd_selftest(*cases, *seed),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn load(path: &Path, inputs: &mut Vec<Value>) -> Result<Payload, Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::new(format!("{}: {e}", path.display()), 2))?;
    inputs.push(json!({ "file": path.display().to_string(), "sha256": sha256_hex(&bytes) }));
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::schema("", "document is not valid UTF-8"))?;
    Ok(parse_document(&text)?)
}

fn wrong_kind(p: &Payload, wanted: &str) -> Failure {
    Error::schema("/kind", format!("expected {wanted}, got {:?}", p.kind())).into()
}

/// A structure input is either a full g22_structure document, whose embedded
/// grid and margin serve as defaults, or a bare form_field.
fn structure_input(
    p: Payload,
    grid: Option<usize>,
    margin: Option<f64>,
) -> Result<(FormField3, usize, f64), Failure> {
    match p {
        Payload::G22(doc) => Ok((
            doc.rho,
            grid.unwrap_or(doc.grid),
            margin.unwrap_or_else(|| rat_to_f64(&doc.margin)),
        )),
        Payload::FormField(f) => {
            Ok((f, grid.unwrap_or(DEFAULT_GRID), margin.unwrap_or(DEFAULT_MARGIN)))
        }
        other => Err(wrong_kind(&other, "a g22_structure or form_field document")),
    }
}

fn genvec_input(p: Payload) -> Result<GenVectorField, Failure> {
    match p {
        Payload::GenVectorField(u) => Ok(u),
        other => Err(wrong_kind(&other, "a gen_vector_field document")),
    }
}

fn sign_str(s: SpinorSign) -> &'static str {
    match s {
        SpinorSign::Null => "null",
        SpinorSign::Positive => "positive",
        SpinorSign::Negative => "negative",
    }
}

fn class_line(c: &CohomologyVector) -> String {
    format!(
        "h0 = {}, h1 = ({}, {}, {}), h2 = ({}, {}, {}), h3 = {}",
        rat_string(&c.h0),
        rat_string(&c.h1[0]),
        rat_string(&c.h1[1]),
        rat_string(&c.h1[2]),
        rat_string(&c.h2[0]),
        rat_string(&c.h2[1]),
        rat_string(&c.h2[2]),
        rat_string(&c.h3),
    )
}

/// Compact display for constant forms, e.g. `d1 + d23` or `1 - 1/2 d12`.
fn constant_form_line(f: &FormField3) -> String {
    let zero = rat_int(0);
    let one = rat_int(1);
    let mut out = String::new();
    for (i, c) in f.c.iter().enumerate() {
        let Some(r) = c.as_constant() else { return "(nonconstant)".into() };
        if r == zero {
            continue;
        }
        let neg = r < zero;
        let mag = if neg { -r.clone() } else { r };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let name = MONOMIAL_NAMES[i];
        if mag == one && i != 0 {
            out.push_str(name);
        } else if i == 0 {
            write!(out, "{mag}").unwrap();
        } else {
            write!(out, "{mag} {name}").unwrap();
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn cmd_validate(
    file: &Path,
    grid: Option<usize>,
    margin: Option<f64>,
    inputs: &mut Vec<Value>,
) -> Result<CmdOutput, Failure> {
    let (rho, m, margin) = structure_input(load(file, inputs)?, grid, margin)?;
    let s = validate(&rho, &TorusGrid::new(m), margin)?;
    let sign = sign_str(s.cert.sign);
    let data = json!({
        "valid": true,
        "sign": sign,
        "min_abs_q": s.cert.min_abs_q,
        "grid": s.cert.grid_m,
        "margin": s.cert.margin,
        "class": cohomology_to_value(&s.cls),
    });
    let human = vec![
        format!(
            "valid structure: sign {sign}, min |Q| = {} at margin {margin} on a {m}^3 grid",
            s.cert.min_abs_q
        ),
        format!("class: {}", class_line(&s.cls)),
    ];
    Ok(CmdOutput::ok(data, human))
}

fn cmd_normalize(
    file: &Path,
    grid: Option<usize>,
    margin: Option<f64>,
    inputs: &mut Vec<Value>,
) -> Result<CmdOutput, Failure> {
    let (rho, m, margin) = structure_input(load(file, inputs)?, grid, margin)?;
    let s = validate(&rho, &TorusGrid::new(m), margin)?;
    let (g, normal) = normalize(&s)?;
    let data = json!({
        "transform": ba_to_value(&g),
        "normal_form": form_to_value(&normal),
        "sign": sign_str(s.cert.sign),
        "class": cohomology_to_value(&s.cls),
    });
    let human = vec![
        format!("factored as exp(B+A) applied to {}", constant_form_line(&normal)),
        format!("class: {}", class_line(&s.cls)),
    ];
    Ok(CmdOutput::ok(data, human))
}

fn cmd_bracket(
    left: &Path,
    right: &Path,
    use_dorfman: bool,
    inputs: &mut Vec<Value>,
) -> Result<CmdOutput, Failure> {
    let u = genvec_input(load(left, inputs)?)?;
    let v = genvec_input(load(right, inputs)?)?;
    let w = if use_dorfman { dorfman(&u, &v) } else { courant(&u, &v) };
    let data = json!({ "result": genvec_to_value(&w), "band": genvec_band(&w) });
    let which = if use_dorfman { "dorfman" } else { "courant" };
    let human = vec![format!("{which} bracket computed, result band {}", genvec_band(&w))];
    Ok(CmdOutput::ok(data, human))
}

fn cmd_cone(file: &Path, inputs: &mut Vec<Value>) -> Result<CmdOutput, Failure> {
    let class = match load(file, inputs)? {
        Payload::Cohomology(c) => c,
        Payload::FormField(f) => cohomology_class(&f),
        Payload::G22(d) => cohomology_class(&d.rho),
        other => {
            return Err(wrong_kind(
                &other,
                "a cohomology_vector, form_field, or g22_structure document",
            ))
        }
    };
    let res = cone_membership(&class);
    let mut data = json!({
        "in_cone": res.in_cone,
        "witness": res.witness,
        "class": cohomology_to_value(&class),
    });
    let side = if res.in_cone { "inside" } else { "outside" };
    let mut human = vec![format!("cone membership: {side} ({})", res.witness)];
    if res.in_cone {
        let rep = cone_representative(&class)?;
        data["representative"] = json!({
            "rho": form_to_value(&rep.rho),
            "sign": sign_str(rep.cert.sign),
            "class_matches": rep.cls == class,
        });
        human.push(format!("representative: {}", constant_form_line(&rep.rho)));
    }
    Ok(CmdOutput::ok(data, human))
}

#[allow(clippy::too_many_arguments)]
fn cmd_moser(
    problem: &Option<PathBuf>,
    rho0: &Option<PathBuf>,
    phi: &Option<PathBuf>,
    grid: Option<usize>,
    steps: Option<usize>,
    band_cap: Option<u32>,
    tol: Option<f64>,
    margin: Option<f64>,
    inputs: &mut Vec<Value>,
) -> Result<CmdOutput, Failure> {
    // resolve the base structure, potential, and discretization from either
    // a single moser_problem document or a --rho0/--phi pair, with explicit
    // flags overriding document values
    let (base, phi, m, steps, band, flow_margin) = match (problem, rho0, phi) {
        (Some(pfile), None, None) => {
            let doc = match load(pfile, inputs)? {
                Payload::Moser(doc) => doc,
                other => return Err(wrong_kind(&other, "a moser_problem document")),
            };
            let base = validate(
                &doc.base.rho,
                &TorusGrid::new(doc.base.grid),
                rat_to_f64(&doc.base.margin),
            )?;
            let flow_margin = margin
                .or_else(|| doc.margin.as_ref().map(rat_to_f64))
                .unwrap_or_else(|| rat_to_f64(&doc.base.margin));
            (
                base,
                doc.phi,
                grid.unwrap_or(doc.grid),
                steps.unwrap_or(doc.steps),
                band_cap.or(doc.band),
                flow_margin,
            )
        }
        (None, Some(rfile), Some(ffile)) => {
            let (rho, vm, vmargin) = structure_input(load(rfile, inputs)?, grid, margin)?;
            let base = validate(&rho, &TorusGrid::new(vm), vmargin)?;
            let phi = match load(ffile, inputs)? {
                Payload::FormField(f) => f,
                other => return Err(wrong_kind(&other, "a form_field document")),
            };
            (base, phi, grid.unwrap_or(DEFAULT_GRID), steps.unwrap_or(DEFAULT_STEPS), band_cap, vmargin)
        }
        _ => {
            return Err(Failure::new(
                "provide either a moser_problem document or both --rho0 and --phi",
                2,
            ))
        }
    };

    let mut cfg = FlowSettings::new(m, steps);
    if let Some(b) = band {
        cfg.band = b;
    }
    let band = cfg.band;
    let problem = MoserProblem { base, phi, cfg, margin: flow_margin };
    let (_, report) = moser_flow(&problem)?;

    let within_tol = tol.map(|t| report.terminal_residual <= t);
    let data = json!({
        "stages": report.stages,
        "solve_residual_max": report.solve_residual_max,
        "terminal_residual": report.terminal_residual,
        "grid": m,
        "steps": steps,
        "band": band,
        "margin": flow_margin,
        "tol": tol,
        "within_tol": within_tol,
    });
    let mut human = vec![
        format!("flow integrated: {} stage samples, {steps} steps on a {m}^3 grid", report.stages),
        format!("pointwise solve residual (a): {:.3e}", report.solve_residual_max),
        format!("terminal residual (b): {:.3e}", report.terminal_residual),
    ];
    let failure = match within_tol {
        Some(true) => {
            human.push(format!("within tolerance {:e}", tol.unwrap()));
            None
        }
        Some(false) => Some(Failure::new(
            format!(
                "terminal residual {:.3e} exceeds tolerance {:e}",
                report.terminal_residual,
                tol.unwrap()
            ),
            4,
        )),
        None => None,
    };
    Ok(CmdOutput { data, human, failure })
}

fn cmd_selftest(cases: usize, seed: u64) -> Result<CmdOutput, Failure> {
    let report = run_selftest(cases, seed);
    let ok = report.ok();
    let data = serde_json::to_value(&report).expect("report serialization");
    let human = report
        .suites
        .iter()
        .map(|s| format!("{}: {}/{} cases pass", s.name, s.cases - s.failures, s.cases))
        .collect();
    let failure = (!ok).then(|| Failure::new("exact identity suite reported failures", 2));
    Ok(CmdOutput { data, human, failure })
}
