//! Report sweeps. Each report is a list of JSON records, a rendered
//! summary and an exit code; rows are computed in parallel and assembled in
//! registry order.

use std::fmt::Write as _;

use nmodal::formula::{parse, Formula};
use nmodal::hilbert::builtin_system;
use nmodal::kripke::{
    builtin_conditions, correspondence_scan, parse_condition, FrameClass, Mismatch, ScanLimits,
    CONDITIONS_TSV,
};
use nmodal::nmatrix::{
    builtin_matrix, check_consequence, check_tautology, compose, registry, Remark,
};
use nmodal::tableau::{verify_remark, RemarkOutcome};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::sample::{random_sequents, Sequent};

pub struct Report {
    pub records: Vec<Value>,
    pub summary: String,
    pub code: i32,
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One line per registry row, in registry order.
pub fn registry_text() -> String {
    registry()
        .iter()
        .map(|s| {
            format!(
                "{}\t{:?}\t{}\t{}\t{}\t{}\n",
                s.name,
                s.table,
                s.restriction,
                s.axiom.print(),
                s.stated.print(),
                s.remark
            )
        })
        .collect()
}

fn header(name: &str) -> Value {
    json!({
        "report": name,
        "conditions_sha256": sha256(CONDITIONS_TSV),
        "registry_sha256": sha256(&registry_text()),
    })
}

fn header_text(name: &str) -> String {
    format!(
        "report {name}\nconditions.tsv sha256 {}\nregistry sha256 {}\n\n",
        sha256(CONDITIONS_TSV),
        sha256(&registry_text())
    )
}

fn mark(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

/// Each row's axiom against W_SIMPLIFIED with and without the row's cell
/// restriction.
pub fn strengthenings() -> Report {
    let base = builtin_matrix("W_SIMPLIFIED").expect("built-in");
    let rows: Vec<(bool, bool)> = registry()
        .par_iter()
        .map(|s| {
            let f = s.axiom.fresh_instance();
            let composed =
                compose(&base, std::slice::from_ref(&s.restriction)).expect("restriction applies");
            let strengthened = check_tautology(&f, &composed)
                .expect("within cap")
                .is_valid();
            let weak = !check_tautology(&f, &base).expect("within cap").is_valid();
            (strengthened, weak)
        })
        .collect();
    let mut records = vec![header("strengthenings")];
    let mut summary = header_text("strengthenings");
    let _ = writeln!(
        summary,
        "{:<12} {:<18} {:>9} {:>9}  axiom",
        "row", "restriction", "composed", "base"
    );
    let mut passed = 0;
    for (s, &(strengthened, weak)) in registry().iter().zip(&rows) {
        passed += strengthened as usize + weak as usize;
        records.push(json!({
            "name": s.name,
            "table": format!("{:?}", s.table).to_lowercase(),
            "restriction": s.restriction.to_string(),
            "axiom": s.axiom.print(),
            "valid_in_composed": strengthened,
            "invalid_in_base": weak,
        }));
        let _ = writeln!(
            summary,
            "{:<12} {:<18} {:>9} {:>9}  {}",
            s.name,
            s.restriction.to_string(),
            mark(strengthened),
            mark(weak),
            s.axiom.pretty()
        );
    }
    let total = 2 * rows.len();
    let _ = writeln!(summary, "\n{passed}/{total} checks pass");
    records.push(json!({"checks": total, "passed": passed}));
    Report {
        records,
        summary,
        code: if passed == total { 0 } else { 1 },
    }
}

/// Axiom/condition pairs that should agree on every frame.
pub const ANCHORS: [(&str, &str, &str); 5] = [
    ("T", "[]A -> A", "forall x. R(x,x)"),
    (
        "4",
        "[]A -> [][]A",
        "forall x y z. R(x,y) & R(y,z) -> R(x,z)",
    ),
    ("N3", "~[]A /\\ A -> []~~A", "forall x y. R(x,y) -> x = y"),
    (
        "B7",
        "[]~A -> []~[]A",
        "forall x y. R(x,y) -> exists z. R(x,z) & R(y,z)",
    ),
    ("B", "A -> []<>A", "forall x y. R(x,y) -> R(y,x)"),
];

pub const ANCHOR_WORLDS: usize = 4;

fn mismatch_json(m: &Mismatch) -> Value {
    json!({
        "frame": m.frame,
        "axiom_valid": m.axiom_valid,
        "condition_holds": m.condition_holds,
    })
}

/// Anchor pairs at four worlds, then every row of the conditions table at
/// `max_n` worlds.
pub fn correspondence(max_n: usize) -> Result<Report, String> {
    let mut records = vec![header("correspondence")];
    let mut summary = header_text("correspondence");
    let mut scan = |kind: &str, name: &str, axiom: &Formula, cond: &str, n: usize, source: &str| {
        let c = parse_condition(cond).map_err(|e| format!("{name}: {e}"))?;
        let r = correspondence_scan(axiom, &c, FrameClass::All, ScanLimits::new(n))
            .map_err(|e| e.to_string())?;
        records.push(json!({
            "kind": kind,
            "name": name,
            "axiom": r.axiom,
            "condition": r.condition,
            "source": source,
            "max_worlds": n,
            "frames_scanned": r.frames_scanned,
            "mismatches": r.mismatches.len(),
            "examples": r.mismatches.iter().take(3).map(mismatch_json).collect::<Vec<_>>(),
        }));
        let _ = writeln!(
            summary,
            "{:<6} {:<12} n<={} frames {:>6} mismatches {:>5}  {}",
            kind,
            name,
            n,
            r.frames_scanned,
            r.mismatches.len(),
            r.condition
        );
        Ok::<usize, String>(r.mismatches.len())
    };
    let mut anchor_failures = 0;
    for (name, axiom, cond) in ANCHORS {
        let f = nmodal::Schema::parse(axiom)
            .expect("anchor parses")
            .fresh_instance();
        if scan("anchor", name, &f, cond, ANCHOR_WORLDS, "anchor")? > 0 {
            anchor_failures += 1;
        }
    }
    for row in builtin_conditions() {
        let cond = row.condition.to_string();
        scan(
            "table",
            &row.name,
            &row.axiom.fresh_instance(),
            &cond,
            max_n,
            &row.source,
        )?;
    }
    Ok(Report {
        records,
        summary,
        code: if anchor_failures == 0 { 0 } else { 1 },
    })
}

/// Tableau verdicts on every remark.
pub fn remarks() -> Report {
    let rows: Vec<_> = registry()
        .iter()
        .filter(|s| s.remark != Remark::None)
        .collect();
    let outcomes: Vec<RemarkOutcome> = rows.par_iter().map(|s| verify_remark(s)).collect();
    let mut records = vec![header("remarks")];
    let mut summary = header_text("remarks");
    let (mut confirmed, mut refuted, mut unchecked) = (0, 0, 0);
    for (s, out) in rows.iter().zip(&outcomes) {
        let mut rec =
            json!({"name": s.name, "remark": s.remark.to_string(), "axiom": s.axiom.print()});
        let line = match out {
            RemarkOutcome::Confirmed(e) | RemarkOutcome::Refuted(e) => {
                let is_confirmed = matches!(out, RemarkOutcome::Confirmed(_));
                if is_confirmed {
                    confirmed += 1;
                } else {
                    refuted += 1;
                }
                rec["outcome"] = json!(if is_confirmed { "confirmed" } else { "refuted" });
                rec["logic"] = json!(e.logic.name());
                rec["theorem"] = json!(e.theorem);
                rec["steps"] = json!(e.steps);
                if let Some((m, w)) = &e.counter {
                    let model: Value = serde_json::from_str(&m.to_json()).expect("model JSON");
                    rec["counter_model"] = model;
                    rec["world"] = json!(w);
                }
                if !is_confirmed {
                    rec["finding"] = json!(true);
                }
                let verdict = if e.theorem { "theorem" } else { "non-theorem" };
                let tag = if is_confirmed { "confirmed" } else { "REFUTED" };
                let model = e
                    .counter
                    .as_ref()
                    .map(|(m, w)| format!("  world {w} of {}", m.to_json()))
                    .unwrap_or_default();
                format!("{tag:<10} {verdict} of {}{model}", e.logic)
            }
            RemarkOutcome::Unchecked(why) => {
                unchecked += 1;
                rec["outcome"] = json!("unchecked");
                rec["reason"] = json!(why);
                format!("unchecked  {why}")
            }
        };
        records.push(rec);
        let _ = writeln!(
            summary,
            "{:<12} {:<20} {}",
            s.name,
            s.remark.to_string(),
            line
        );
    }
    let _ = writeln!(
        summary,
        "\n{confirmed} confirmed, {refuted} refuted, {unchecked} unchecked"
    );
    records.push(json!({"confirmed": confirmed, "refuted": refuted, "unchecked": unchecked}));
    Report {
        records,
        summary,
        code: if unchecked == 0 { 0 } else { 1 },
    }
}

/// Seeded comparison of W with W_SIMPLIFIED on random sequents.
pub fn w_vs_simplified(samples: usize, seed: u64) -> Report {
    let w = builtin_matrix("W").expect("built-in");
    let ws = builtin_matrix("W_SIMPLIFIED").expect("built-in");
    let sequents = random_sequents(seed, samples);
    let verdicts: Vec<(bool, bool)> = sequents
        .par_iter()
        .map(|s| {
            let a = check_consequence(&s.premises, &s.conclusion, &w).expect("within cap");
            let b = check_consequence(&s.premises, &s.conclusion, &ws).expect("within cap");
            (a.is_valid(), b.is_valid())
        })
        .collect();
    let mut records = vec![header("w-vs-simplified")];
    let mut summary = header_text("w-vs-simplified");
    let mut disagreements = 0;
    let mut valid = 0;
    for (s, &(a, b)) in sequents.iter().zip(&verdicts) {
        valid += a as usize;
        if a != b {
            disagreements += 1;
            records.push(json!({"sequent": s.render(), "w_valid": a, "w_simplified_valid": b}));
            let _ = writeln!(
                summary,
                "disagreement: {}  W {a}  W_SIMPLIFIED {b}",
                s.render()
            );
        }
    }
    let _ = writeln!(
        summary,
        "seed {seed}, {samples} sequents, {valid} W-valid, {disagreements} disagreements"
    );
    records.push(json!({
        "seed": seed,
        "samples": samples,
        "w_valid": valid,
        "agreements": samples - disagreements,
        "disagreements": disagreements,
    }));
    Report {
        records,
        summary,
        code: if disagreements == 0 { 0 } else { 1 },
    }
}

/// Registry rows and T-BAT schemas that separate the two T-BAT tables.
pub fn tbat_vs_original() -> Report {
    let tbat = builtin_matrix("TBAT").expect("built-in");
    let original = builtin_matrix("TBAT_ORIGINAL").expect("built-in");
    let mut items: Vec<(String, Formula)> = registry()
        .iter()
        .map(|s| (s.name.clone(), s.axiom.fresh_instance()))
        .collect();
    for (name, schema) in builtin_system("TBAT").expect("built-in").schemas() {
        items.push((format!("schema {name}"), schema.fresh_instance()));
    }
    let verdicts: Vec<(bool, bool)> = items
        .par_iter()
        .map(|(_, f)| {
            (
                check_tautology(f, &tbat).expect("within cap").is_valid(),
                check_tautology(f, &original)
                    .expect("within cap")
                    .is_valid(),
            )
        })
        .collect();
    let mut records = vec![header("tbat-vs-original")];
    let mut summary = header_text("tbat-vs-original");
    let mut differing = 0;
    for ((name, f), &(a, b)) in items.iter().zip(&verdicts) {
        records.push(
            json!({"name": name, "formula": f.print(), "tbat_valid": a, "original_valid": b}),
        );
        if a != b {
            differing += 1;
            let _ = writeln!(
                summary,
                "{name:<18} TBAT {a:<5} original {b:<5} {}",
                f.pretty()
            );
        }
    }
    let _ = writeln!(
        summary,
        "{} formulas, {differing} separate the tables",
        items.len()
    );
    records.push(json!({"formulas": items.len(), "differing": differing}));
    Report {
        records,
        summary,
        code: 0,
    }
}

/// Violation counts from [`monotonicity`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonotonicityCounts {
    pub samples: usize,
    pub refinement_violations: usize,
    pub reflexivity_violations: usize,
    pub monotonicity_violations: usize,
    pub cut_violations: usize,
}

/// Refinement along W, W_SIMPLIFIED, TBAT and the Tarskian laws of each
/// consequence relation, on seeded random sequents.
pub fn monotonicity_counts(samples: usize, seed: u64) -> MonotonicityCounts {
    let chain = ["W", "W_SIMPLIFIED", "TBAT"].map(|n| builtin_matrix(n).expect("built-in"));
    let sequents = random_sequents(seed, samples);
    // A second, independent stream supplies the extra formula for weakening
    // and cut.
    let extras = random_sequents(seed ^ 0x9e37_79b9_7f4a_7c15, samples);
    let per: Vec<MonotonicityCounts> = sequents
        .par_iter()
        .zip(extras.par_iter())
        .map(|(s, extra)| {
            let mut c = MonotonicityCounts {
                samples: 1,
                ..Default::default()
            };
            let holds = |ps: &[Formula], f: &Formula, i: usize| {
                check_consequence(ps, f, &chain[i])
                    .map(|v| v.is_valid())
                    .ok()
            };
            let verdicts: Vec<Option<bool>> = (0..3)
                .map(|i| holds(&s.premises, &s.conclusion, i))
                .collect();
            for pair in verdicts.windows(2) {
                if pair[0] == Some(true) && pair[1] == Some(false) {
                    c.refinement_violations += 1;
                }
            }
            let b = &extra.conclusion;
            for (i, verdict) in verdicts.iter().enumerate() {
                let mut with_a = s.premises.clone();
                with_a.push(s.conclusion.clone());
                if holds(&with_a, &s.conclusion, i) == Some(false) {
                    c.reflexivity_violations += 1;
                }
                if *verdict == Some(true) {
                    let mut weaker = s.premises.clone();
                    weaker.push(b.clone());
                    if holds(&weaker, &s.conclusion, i) == Some(false) {
                        c.monotonicity_violations += 1;
                    }
                    if holds(&with_a, b, i) == Some(true) && holds(&s.premises, b, i) == Some(false)
                    {
                        c.cut_violations += 1;
                    }
                }
            }
            c
        })
        .collect();
    per.into_iter()
        .fold(MonotonicityCounts::default(), |acc, c| MonotonicityCounts {
            samples: acc.samples + c.samples,
            refinement_violations: acc.refinement_violations + c.refinement_violations,
            reflexivity_violations: acc.reflexivity_violations + c.reflexivity_violations,
            monotonicity_violations: acc.monotonicity_violations + c.monotonicity_violations,
            cut_violations: acc.cut_violations + c.cut_violations,
        })
}

pub fn monotonicity(samples: usize, seed: u64) -> Report {
    let c = monotonicity_counts(samples, seed);
    let total = c.refinement_violations
        + c.reflexivity_violations
        + c.monotonicity_violations
        + c.cut_violations;
    let mut summary = header_text("monotonicity");
    let _ = writeln!(
        summary,
        "seed {seed}, {} sequents\nrefinement violations   {}\nreflexivity violations  {}\nmonotonicity violations {}\ncut violations          {}",
        c.samples, c.refinement_violations, c.reflexivity_violations, c.monotonicity_violations, c.cut_violations
    );
    Report {
        records: vec![
            header("monotonicity"),
            json!({
                "seed": seed,
                "samples": c.samples,
                "refinement_violations": c.refinement_violations,
                "reflexivity_violations": c.reflexivity_violations,
                "monotonicity_violations": c.monotonicity_violations,
                "cut_violations": c.cut_violations,
            }),
        ],
        summary,
        code: if total == 0 { 0 } else { 1 },
    }
}

/// Sequents as accepted by `entails`: comma-separated premises.
pub fn parse_sequent(premises: &str, conclusion: &str) -> Result<Sequent, String> {
    let premises = premises
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse(p).map_err(|e| format!("premise {p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let conclusion = parse(conclusion).map_err(|e| format!("conclusion: {e}"))?;
    Ok(Sequent {
        premises,
        conclusion,
    })
}
