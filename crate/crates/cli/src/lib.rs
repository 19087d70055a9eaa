//! The `nmodal` command line. [`run`] takes an argument vector and returns
//! the exit code with captured output, so the binary and the tests share one
//! code path.
//!
//! Exit codes: 0 when the claim holds (valid, theorem, accepted, report
//! clean), 1 when a counterexample or failed check is printed, 2 on usage or
//! input errors.

pub mod report;
pub mod sample;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nmodal::formula::{parse, Formula};
use nmodal::hilbert::{builtin_system, check_proof, CheckResult, Proof};
use nmodal::kripke::{
    correspondence_scan, parse_condition, rank_candidates, FrameClass, ScanLimits,
};
use nmodal::nmatrix::{
    builtin_matrix, check_consequence, compose, strengthening, CellRestriction, Nmatrix, Valuation,
    Verdict,
};
use nmodal::tableau::{decide, LogicId, TableauResult};
use serde_json::{json, Map, Value};

use report::Report;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "nmodal",
    version,
    about = "Four-valued Nmatrix modal logic workbench"
)]
struct Cli {
    /// Line-delimited JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is FORMULA valid in the matrix?
    Taut {
        formula: String,
        /// Built-in name or path to a matrix JSON file.
        #[arg(long, default_value = "TBAT")]
        matrix: String,
    },
    /// Do the comma-separated PREMISES entail CONCLUSION?
    Entails {
        premises: String,
        conclusion: String,
        #[arg(long, default_value = "TBAT")]
        matrix: String,
    },
    /// Show, compose or load matrices.
    Matrix {
        #[command(subcommand)]
        action: MatrixAction,
    },
    /// Compare an axiom with a first-order frame condition on small frames;
    /// without CONDITION, rank a list of familiar conditions.
    Corr {
        axiom: String,
        condition: Option<String>,
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
    /// Decide FORMULA in K, T, S4 or S5.
    Tableau {
        formula: String,
        #[arg(long, default_value = "K")]
        logic: String,
        /// Print the numbered rule applications.
        #[arg(long)]
        trace: bool,
    },
    /// Check a JSON-lines proof file.
    ProofCheck {
        file: PathBuf,
        /// Overrides the system named in the file header.
        #[arg(long)]
        system: Option<String>,
    },
    /// Reproduce a table-sized sweep.
    Report {
        #[command(subcommand)]
        which: ReportKind,
    },
}

#[derive(Subcommand, Debug)]
enum MatrixAction {
    Show {
        #[arg(long, default_value = "TBAT")]
        matrix: String,
    },
    /// Apply restrictions such as `neg(t)={f}` or strengthening names such as
    /// `N1` to a base matrix.
    Compose {
        restrictions: Vec<String>,
        #[arg(long, default_value = "W_SIMPLIFIED")]
        matrix: String,
    },
    /// Validate a matrix file and print it.
    Load { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ReportKind {
    Strengthenings,
    Correspondence {
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
    Remarks,
    WVsSimplified {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    TbatVsOriginal,
    Monotonicity {
        #[arg(long, default_value_t = 1_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Out {
    json: bool,
    text: String,
}

impl Out {
    fn record(&mut self, v: Value) {
        if self.json {
            self.text
                .push_str(&serde_json::to_string(&v).expect("JSON serializes"));
            self.text.push('\n');
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        if !self.json {
            self.text.push_str(s.as_ref());
            self.text.push('\n');
        }
    }
}

pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut out = Out {
        json: cli.json,
        text: String::new(),
    };
    match dispatch(cli.command, &mut out) {
        Ok(code) => Outcome {
            code,
            stdout: out.text,
            stderr: String::new(),
        },
        Err(message) => Outcome {
            code: 2,
            stdout: out.text,
            stderr: format!("error: {message}\n"),
        },
    }
}

fn formula(text: &str) -> Result<Formula, String> {
    parse(text).map_err(|e| format!("{text:?}: {e}"))
}

/// A built-in matrix by name, or a matrix file.
pub fn load_matrix(name_or_path: &str) -> Result<Nmatrix, String> {
    match builtin_matrix(name_or_path) {
        Ok(m) => Ok(m),
        Err(_) if Path::new(name_or_path).exists() => {
            let text = std::fs::read_to_string(name_or_path)
                .map_err(|e| format!("{name_or_path}: {e}"))?;
            Nmatrix::from_json(&text).map_err(|e| format!("{name_or_path}: {e}"))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn witness_json(v: &Valuation) -> Value {
    let map: Map<String, Value> = v
        .entries()
        .map(|(f, val)| (f.print(), Value::String(val.to_string())))
        .collect();
    Value::Object(map)
}

fn verdict(out: &mut Out, cmd: &str, m: &Nmatrix, sequent: Value, v: &Verdict) -> i32 {
    let mut rec = json!({"command": cmd, "matrix": m.name()});
    if let (Value::Object(r), Value::Object(s)) = (&mut rec, sequent) {
        r.extend(s);
    }
    rec["valid"] = json!(v.is_valid());
    match v.witness() {
        None => {
            out.record(rec);
            out.line(format!("valid in {}", m.name()));
            0
        }
        Some(w) => {
            rec["witness"] = witness_json(w);
            out.record(rec);
            out.line(format!("invalid in {}", m.name()));
            out.line(format!("witness: {w}"));
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut Out) -> Result<i32, String> {
    match cmd {
        Command::Taut { formula: f, matrix } => {
            let m = load_matrix(&matrix)?;
            let f = formula(&f)?;
            let v = check_consequence(&[], &f, &m).map_err(|e| e.to_string())?;
            Ok(verdict(out, "taut", &m, json!({"formula": f.print()}), &v))
        }
        Command::Entails {
            premises,
            conclusion,
            matrix,
        } => {
            let m = load_matrix(&matrix)?;
            let s = report::parse_sequent(&premises, &conclusion)?;
            let v = check_consequence(&s.premises, &s.conclusion, &m).map_err(|e| e.to_string())?;
            let premises: Vec<String> = s.premises.iter().map(Formula::print).collect();
            let seq = json!({"premises": premises, "conclusion": s.conclusion.print()});
            Ok(verdict(out, "entails", &m, seq, &v))
        }
        Command::Matrix { action } => matrix(action, out),
        Command::Corr {
            axiom,
            condition,
            class,
            max_worlds,
        } => corr(&axiom, condition.as_deref(), &class, max_worlds, out),
        Command::Tableau {
            formula: f,
            logic,
            trace,
        } => {
            let logic: LogicId = logic
                .parse()
                .map_err(|e: nmodal::tableau::TableauError| e.to_string())?;
            let f = formula(&f)?;
            let r = decide(&f, logic).map_err(|e| e.to_string())?;
            let mut rec = json!({
                "command": "tableau",
                "formula": f.print(),
                "logic": logic.name(),
                "theorem": r.is_theorem(),
                "steps": r.trace().len(),
            });
            if let TableauResult::NonTheorem { counter, world, .. } = &r {
                rec["counter_model"] =
                    serde_json::from_str(&counter.to_json()).expect("model JSON");
                rec["world"] = json!(world);
            }
            if trace {
                rec["trace"] = serde_json::to_value(r.trace()).expect("trace serializes");
            }
            out.record(rec);
            match &r {
                TableauResult::Theorem { .. } => out.line(format!("theorem of {logic}")),
                TableauResult::NonTheorem { counter, world, .. } => {
                    out.line(format!("not a theorem of {logic}"));
                    out.line(format!(
                        "counter-model, false at world {world}: {}",
                        counter.to_json()
                    ));
                }
            }
            if trace {
                for step in r.trace() {
                    out.line(step.to_string());
                }
            }
            Ok(if r.is_theorem() { 0 } else { 1 })
        }
        Command::ProofCheck { file, system } => {
            let text =
                std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let proof = Proof::from_jsonl(&text).map_err(|e| e.to_string())?;
            let name = system
                .or_else(|| proof.system.clone())
                .unwrap_or_else(|| "W".into());
            let sys = builtin_system(&name).map_err(|e| e.to_string())?;
            let result = check_proof(&proof, &sys);
            let mut rec = json!({
                "command": "proof-check",
                "file": file.display().to_string(),
                "system": sys.name(),
                "lines": proof.lines.len(),
            });
            if let (Value::Object(r), Value::Object(v)) = (
                &mut rec,
                serde_json::to_value(&result).expect("result serializes"),
            ) {
                r.extend(v);
            }
            out.record(rec);
            out.line(format!(
                "{} ({}, {} lines)",
                result,
                sys.name(),
                proof.lines.len()
            ));
            Ok(match result {
                CheckResult::Accepted => 0,
                CheckResult::Rejected { .. } => 1,
            })
        }
        Command::Report { which } => {
            let r: Report = match which {
                ReportKind::Strengthenings => report::strengthenings(),
                ReportKind::Correspondence { max_worlds } => report::correspondence(max_worlds)?,
                ReportKind::Remarks => report::remarks(),
                ReportKind::WVsSimplified { samples, seed } => {
                    if samples == 0 {
                        return Err("--samples must be at least 1".into());
                    }
                    report::w_vs_simplified(samples, seed)
                }
                ReportKind::TbatVsOriginal => report::tbat_vs_original(),
                ReportKind::Monotonicity { samples, seed } => report::monotonicity(samples, seed),
            };
            for rec in r.records {
                out.record(rec);
            }
            out.line(r.summary.trim_end());
            Ok(r.code)
        }
    }
}

fn matrix(action: MatrixAction, out: &mut Out) -> Result<i32, String> {
    let m = match action {
        MatrixAction::Show { matrix } => load_matrix(&matrix)?,
        MatrixAction::Load { file } => load_matrix(&file.display().to_string())?,
        MatrixAction::Compose {
            restrictions,
            matrix,
        } => {
            let base = load_matrix(&matrix)?;
            let rs = restrictions
                .iter()
                .map(|r| match strengthening(r) {
                    Ok(s) => Ok(s.restriction.clone()),
                    Err(_) => CellRestriction::parse(r).map_err(|e| format!("{r:?}: {e}")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            compose(&base, &rs).map_err(|e| e.to_string())?
        }
    };
    out.record(m.to_json_value());
    out.line(m.render().trim_end());
    Ok(0)
}

fn corr(
    axiom: &str,
    condition: Option<&str>,
    class: &str,
    max_worlds: usize,
    out: &mut Out,
) -> Result<i32, String> {
    let class: FrameClass = class
        .parse()
        .map_err(|e: nmodal::kripke::KripkeError| e.to_string())?;
    let f = formula(axiom)?;
    let limits = ScanLimits::new(max_worlds);
    match condition {
        Some(c) => {
            let c = parse_condition(c).map_err(|e| e.to_string())?;
            let r = correspondence_scan(&f, &c, class, limits).map_err(|e| e.to_string())?;
            out.record(serde_json::to_value(&r).expect("report serializes"));
            let mut text = format!(
                "{} vs {} on {} frames up to {} worlds: {} frames, {} mismatches",
                r.axiom,
                r.condition,
                class.name(),
                max_worlds,
                r.frames_scanned,
                r.mismatches.len()
            );
            for m in r.mismatches.iter().take(10) {
                let _ = write!(
                    text,
                    "\n  {}  axiom {}  condition {}",
                    m.frame,
                    if m.axiom_valid { "valid" } else { "invalid" },
                    if m.condition_holds { "holds" } else { "fails" }
                );
            }
            out.line(text);
            Ok(if r.agrees() { 0 } else { 1 })
        }
        None => {
            let ranked = rank_candidates(&f, class, limits).map_err(|e| e.to_string())?;
            for (name, r) in &ranked {
                out.record(json!({
                    "candidate": name,
                    "condition": r.condition,
                    "mismatches": r.mismatches.len(),
                    "frames_scanned": r.frames_scanned,
                }));
                out.line(format!(
                    "{:>6}  {:<26} {}",
                    r.mismatches.len(),
                    name,
                    r.condition
                ));
            }
            Ok(if ranked.first().is_some_and(|(_, r)| r.agrees()) {
                0
            } else {
                1
            })
        }
    }
}


#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
