//! `abl`: group orders, instance verification and exhaustive searches for
//! index-versus-submodule-size bounds over `Z/nZ`.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abl::bounds::{verify_instance, BoundReport, Verification, VerifyOptions};
use abl::error::Error;
use abl::groups::{reduction_check, AmbientGroup, AmbientKind, GroupHandle, GroupJson, DEFAULT_CLOSURE_CAP};
use abl::search::{exhaustive_verify, SearchConfig};
use abl::submodules::{Submodule, SubmoduleJson};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_BOUND_VIOLATION: u8 = 3;
const EXIT_CAPACITY: u8 = 4;

#[derive(Parser)]
#[command(name = "abl", version, about = "Bounds for subgroups of GL and Sp over Z/nZ acting abelianly on submodules")]
struct Cli {
    /// Reserved; every computation is exhaustive and deterministic.
    #[arg(long, global = true, hide = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact order of GL_m(Z/n) or Sp(2m, Z/n).
    Order {
        #[arg(long)]
        kind: Kind,
        /// Matrix size for gl, half of it for sp.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        json: bool,
    },
    /// Verify the bounds on one subgroup and one submodule.
    Verify {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        module: PathBuf,
        /// Row k of the entry a_{k1} that defines J in the symplectic case.
        #[arg(long, default_value_t = 2)]
        sp_row: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Verify every subgroup/invariant-submodule pair and rank extremal ratios.
    Search {
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Only subgroups generated by at most this many elements.
        #[arg(long)]
        max_generators: Option<usize>,
        #[arg(long, default_value_t = 0)]
        parallelism: usize,
        #[arg(long, default_value_t = 2)]
        sp_row: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Print the canonical shape and stabilizer divisibility pattern of a module.
    Stabilizer {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Split a module into its l-primary parts.
    Decompose {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check the reduction Sp(2m, Z/p^{k+1}) -> Sp(2m, Z/p^k).
    ReductionCheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gl,
    Sp,
}

impl From<Kind> for AmbientKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Gl => AmbientKind::Gl,
            Kind::Sp => AmbientKind::Sp,
        }
    }
}

#[derive(Args)]
#[group(multiple = false)]
struct Format {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

/// What a command produced, and the exit code it implies.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(err) => {
            eprintln!("abl: {err}");
            ExitCode::from(match err {
                Error::Capacity { .. } => EXIT_CAPACITY,
                _ => EXIT_USAGE,
            })
        }
    }
}

fn closure_cap() -> Result<usize, Error> {
    match std::env::var("ABL_MAX_CLOSURE") {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|&c: &usize| c > 0)
            .ok_or_else(|| Error::Input(format!("ABL_MAX_CLOSURE must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_CLOSURE_CAP),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_module(path: &Path) -> Result<Submodule, Error> {
    Submodule::try_from(read_json::<SubmoduleJson>(path)?)
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types always serialize")
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Order { kind, m, n, json } => {
            let ambient = match kind {
                Kind::Gl => AmbientGroup::gl(m, n)?,
                Kind::Sp => AmbientGroup::sp(m, n)?,
            };
            let value = json!({
                "kind": AmbientKind::from(kind),
                "m": m,
                "n": n,
                "order": ambient.order().to_string(),
            });
            Ok(Outcome::ok(if json { pretty(&value) } else { format!("{}\n", value["order"].as_str().unwrap()) }))
        }
        Command::Verify { group, module, sp_row, format } => {
            let gamma = GroupHandle::try_from(read_json::<GroupJson>(&group)?)?;
            let w = read_module(&module)?;
            let options = VerifyOptions { sp_row, closure_cap: closure_cap()?, ..VerifyOptions::default() };
            let verification = verify_instance(&gamma, &w, &options)?;
            let code = match &verification {
                Verification::Verified(r) if r.all_hold() => 0,
                Verification::Verified(_) => EXIT_BOUND_VIOLATION,
                Verification::HypothesisViolation(d) => {
                    eprintln!("abl: hypothesis violated: {}", render::flat(&to_value(d)));
                    EXIT_HYPOTHESIS
                }
            };
            let text = match (&verification, format.csv) {
                (Verification::Verified(r), true) => format!("{}\n{}\n", BoundReport::CSV_HEADER, r.csv_row()),
                (Verification::HypothesisViolation(_), true) => String::new(),
                _ if format.json => pretty(&to_value(&verification)),
                _ => render::human(&to_value(&verification)),
            };
            Ok(Outcome { text, code })
        }
        Command::Search { kind, m, n, top, max_generators, parallelism, sp_row, format } => {
            let ambient = match kind {
                Kind::Gl => AmbientGroup::gl(m, n)?,
                Kind::Sp => AmbientGroup::sp(m, n)?,
            };
            let mut config = SearchConfig::new(ambient);
            config.report_top_k = top;
            config.max_generators = max_generators;
            config.parallelism = parallelism;
            config.verify.sp_row = sp_row;
            config.verify.closure_cap = closure_cap()?;
            let outcome = exhaustive_verify(&config)?;
            let s = &outcome.summary;
            let violated = s.violations + s.local_violations + s.intermediate_violations > 0;
            let text = if format.csv {
                let mut t = format!("{}\n", BoundReport::CSV_HEADER);
                for inst in &outcome.instances {
                    t.push_str(&inst.report.csv_row());
                    t.push('\n');
                }
                t
            } else if format.json {
                pretty(&to_value(s))
            } else {
                render::human(&search_table(s))
            };
            Ok(Outcome { text, code: if violated { EXIT_BOUND_VIOLATION } else { 0 } })
        }
        Command::Stabilizer { module, json } => {
            let w = read_module(&module)?;
            let mut parts = Vec::new();
            for (pp, part) in w.l_primary_parts() {
                let basis = part.adapted_basis()?;
                parts.push(json!({
                    "l": pp.l,
                    "e": pp.e,
                    "shape": to_value(&basis.shape),
                    "pattern": basis.shape.stabilizer_pattern(),
                    "adapted_basis": basis.from_adapted.transpose().rows(),
                }));
            }
            let value = json!({ "n": w.modulus(), "rank": w.rank(), "parts": parts });
            Ok(Outcome::ok(if json { pretty(&value) } else { render::human(&value) }))
        }
        Command::Decompose { module, json } => {
            let w = read_module(&module)?;
            let mut parts = Vec::new();
            for (pp, part) in w.l_primary_parts() {
                parts.push(json!({
                    "l": pp.l,
                    "e": pp.e,
                    "module": to_value(&part.reduced()?.to_json()),
                    "order": part.order()?.to_string(),
                }));
            }
            let value = json!({ "n": w.modulus(), "order": w.order()?.to_string(), "parts": parts });
            Ok(Outcome::ok(if json { pretty(&value) } else { render::human(&value) }))
        }
        Command::ReductionCheck { m, p, k, json } => {
            let report = reduction_check(m, p, k, closure_cap()?)?;
            let code = if report.surjective && report.kernel_size == report.expected_kernel_size {
                0
            } else {
                EXIT_BOUND_VIOLATION
            };
            let value = to_value(&report);
            let text = if json { pretty(&value) } else { format!("{}\n", render::flat(&value)) };
            Ok(Outcome { text, code })
        }
    }
}

/// The search summary with each top record cut down to its headline numbers.
fn search_table(summary: &abl::search::Summary) -> Value {
    let mut value = to_value(summary);
    if let Some(top) = value.get_mut("top").and_then(Value::as_array_mut) {
        for rec in top.iter_mut() {
            let r = &rec["report"];
            *rec = json!({
                "ratio": rec["ratio"],
                "ratio_lower": rec["ratio_lower"],
                "reaches_target": rec["reaches_target"],
                "gamma_order": r["gamma_order"],
                "index": r["index"],
                "w_order": r["w_order"],
                "generators": rec["gamma"]["generators"].as_array().map(|g| g.iter().map(|x| x["rows"].clone()).collect::<Vec<_>>()),
                "module": rec["module"]["generators"],
            });
        }
    }
    value
}
