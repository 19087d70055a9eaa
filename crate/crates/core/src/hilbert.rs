//! Hilbert-style proof checking over schema-based systems.
//!
//! A proof file is JSON lines: an optional header
//! `{"system": "K", "premises": [...]}` (both fields optional)
//! followed by one record per line,
//!
//! ```text
//! {"f": "p -> p -> p", "rule": "Axiom", "schema": "p1"}
//! {"f": "q", "rule": "MP", "refs": [2, 3]}
//! ```
//!
//! Line numbers are 1-based. `MP` cites `[i, j]` where line `j` is
//! `line i -> this line`; `Nec` cites `[i]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{parse, Formula, Schema, Substitution};
use crate::nmatrix::strengthening;
use crate::nmatrix::TBAT_RESTRICTIONS;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HilbertError {
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("proof line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A named set of axiom schemas closed under modus ponens and, optionally,
/// necessitation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    name: String,
    schemas: Vec<(String, Schema)>,
    necessitation: bool,
}

impl System {
    pub fn new(
        name: impl Into<String>,
        schemas: Vec<(String, Schema)>,
        necessitation: bool,
    ) -> System {
        System {
            name: name.into(),
            schemas,
            necessitation,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schemas(&self) -> &[(String, Schema)] {
        &self.schemas
    }

    pub fn schema(&self, name: &str) -> Option<&Schema> {
        self.schemas.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn necessitation(&self) -> bool {
        self.necessitation
    }
}

pub const SYSTEMS: [&str; 7] = ["W", "TBAT", "K", "T", "S4", "S5", "GL"];

const PROPOSITIONAL: [(&str, &str); 3] = [
    ("p1", "A -> (B -> A)"),
    ("p2", "(A -> (B -> C)) -> ((A -> B) -> (A -> C))"),
    ("p3", "(~B -> ~A) -> (A -> B)"),
];

fn named(rows: &[(&str, &str)]) -> Vec<(String, Schema)> {
    rows.iter()
        .map(|(n, s)| {
            (
                n.to_string(),
                Schema::parse(s).expect("built-in schema parses"),
            )
        })
        .collect()
}

pub fn builtin_system(name: &str) -> Result<System, HilbertError> {
    let upper = name.to_ascii_uppercase();
    let mut rows: Vec<(&str, &str)> = PROPOSITIONAL.to_vec();
    let (canonical, nec) = match upper.as_str() {
        "W" => {
            rows.push(("T", "[]A -> A"));
            ("W", false)
        }
        "TBAT" | "T-BAT" => {
            rows.push(("T", "[]A -> A"));
            let mut schemas = named(&rows);
            for n in TBAT_RESTRICTIONS {
                let s = strengthening(n).expect("TBAT axiom is registered");
                schemas.push((n.to_string(), s.axiom.clone()));
            }
            return Ok(System::new("TBAT", schemas, false));
        }
        "K" => ("K", true),
        "T" => ("T", true),
        "S4" => ("S4", true),
        "S5" => ("S5", true),
        "GL" => ("GL", true),
        _ => return Err(HilbertError::UnknownSystem(name.to_string())),
    };
    if nec {
        rows.push(("K", "[](A -> B) -> ([]A -> []B)"));
        match canonical {
            "T" => rows.push(("T", "[]A -> A")),
            "S4" => rows.extend([("T", "[]A -> A"), ("4", "[]A -> [][]A")]),
            "S5" => rows.extend([("T", "[]A -> A"), ("5", "<>A -> []<>A")]),
            "GL" => rows.extend([("4", "[]A -> [][]A"), ("Lob", "[]([]A -> A) -> []A")]),
            _ => {}
        }
    }
    Ok(System::new(canonical, named(&rows), nec))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Premise,
    Axiom {
        schema: String,
        sub: Option<Substitution>,
    },
    Mp(usize, usize),
    Nec(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    /// System named in the header, if any.
    pub system: Option<String>,
    pub premises: Vec<Formula>,
    pub lines: Vec<Line>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<String>,
    #[serde(default)]
    premises: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    f: String,
    rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    refs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sub: Option<BTreeMap<String, String>>,
}

impl Proof {
    pub fn from_jsonl(text: &str) -> Result<Proof, HilbertError> {
        let mut proof = Proof::default();
        let mut seen_line = false;
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| HilbertError::Parse {
                line: i + 1,
                message,
            };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with("//") {
                continue;
            }
            if !seen_line {
                if let Ok(h) = serde_json::from_str::<Header>(raw) {
                    proof.system = h.system;
                    for p in h.premises {
                        proof
                            .premises
                            .push(parse(&p).map_err(|e| err(e.to_string()))?);
                    }
                    seen_line = true;
                    continue;
                }
            }
            seen_line = true;
            let rec: Record = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            let formula = parse(&rec.f).map_err(|e| err(e.to_string()))?;
            let refs = |n: usize| -> Result<&[usize], HilbertError> {
                if rec.refs.len() == n {
                    Ok(&rec.refs)
                } else {
                    Err(err(format!(
                        "{} expects {n} refs, got {}",
                        rec.rule,
                        rec.refs.len()
                    )))
                }
            };
            let justification = match rec.rule.as_str() {
                "Premise" => Justification::Premise,
                "Axiom" => {
                    let schema = rec
                        .schema
                        .clone()
                        .ok_or_else(|| err("Axiom needs a schema".into()))?;
                    let sub = match &rec.sub {
                        None => None,
                        Some(map) => Some(
                            map.iter()
                                .map(|(k, v)| parse(v).map(|f| (k.clone(), f)))
                                .collect::<Result<Substitution, _>>()
                                .map_err(|e| err(e.to_string()))?,
                        ),
                    };
                    Justification::Axiom { schema, sub }
                }
                "MP" => {
                    let r = refs(2)?;
                    Justification::Mp(r[0], r[1])
                }
                "Nec" => Justification::Nec(refs(1)?[0]),
                other => return Err(err(format!("unknown rule {other:?}"))),
            };
            proof.lines.push(Line {
                formula,
                justification,
            });
        }
        Ok(proof)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        if self.system.is_some() || !self.premises.is_empty() {
            let h = Header {
                system: self.system.clone(),
                premises: self.premises.iter().map(Formula::print).collect(),
            };
            out.push_str(&serde_json::to_string(&h).expect("header serializes"));
            out.push('\n');
        }
        for line in &self.lines {
            let (rule, schema, refs, sub) = match &line.justification {
                Justification::Premise => ("Premise", None, vec![], None),
                Justification::Axiom { schema, sub } => (
                    "Axiom",
                    Some(schema.clone()),
                    vec![],
                    sub.as_ref()
                        .map(|s| s.iter().map(|(k, v)| (k.clone(), v.print())).collect()),
                ),
                Justification::Mp(i, j) => ("MP", None, vec![*i, *j], None),
                Justification::Nec(i) => ("Nec", None, vec![*i], None),
            };
            let rec = Record {
                f: line.formula.print(),
                rule: rule.to_string(),
                schema,
                refs,
                sub,
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum CheckResult {
    Accepted,
    Rejected { line: usize, reason: String },
}

impl CheckResult {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CheckResult::Accepted)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckResult::Accepted => f.write_str("accepted"),
            CheckResult::Rejected { line, reason } => {
                write!(f, "rejected at line {line}: {reason}")
            }
        }
    }
}

pub fn check_proof(p: &Proof, s: &System) -> CheckResult {
    // Premises each line depends on, for the necessitation side condition.
    let mut deps: Vec<BTreeSet<usize>> = Vec::with_capacity(p.lines.len());
    for (k, line) in p.lines.iter().enumerate() {
        let n = k + 1;
        let reject = |reason: String| CheckResult::Rejected { line: n, reason };
        let earlier = |i: usize| -> Result<usize, CheckResult> {
            if i >= 1 && i < n {
                Ok(i - 1)
            } else {
                Err(reject(format!(
                    "reference to line {i} is not an earlier line"
                )))
            }
        };
        let d = match &line.justification {
            Justification::Premise => match p.premises.iter().position(|q| *q == line.formula) {
                Some(i) => BTreeSet::from([i]),
                None => return reject("not a declared premise".to_string()),
            },
            Justification::Axiom { schema, sub } => {
                let Some(pattern) = s.schema(schema) else {
                    return reject(format!("unknown schema {schema} in {}", s.name()));
                };
                let ok = match sub {
                    Some(sub) => pattern.instantiate(sub).ok().as_ref() == Some(&line.formula),
                    None => pattern.matches(&line.formula).is_some(),
                };
                if !ok {
                    return reject(format!("schema mismatch ({schema})"));
                }
                BTreeSet::new()
            }
            Justification::Mp(i, j) => {
                let (a, b) = match (earlier(*i), earlier(*j)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return e,
                };
                let expected = Formula::implies(p.lines[a].formula.clone(), line.formula.clone());
                if p.lines[b].formula != expected {
                    return reject(format!("line {j} is not line {i} -> this line"));
                }
                deps[a].union(&deps[b]).copied().collect()
            }
            Justification::Nec(i) => {
                if !s.necessitation() {
                    return reject(format!("{} has no necessitation rule", s.name()));
                }
                let a = match earlier(*i) {
                    Ok(a) => a,
                    Err(e) => return e,
                };
                if line.formula != Formula::boxed(p.lines[a].formula.clone()) {
                    return reject(format!("not the necessitation of line {i}"));
                }
                if !deps[a].is_empty() {
                    return reject("necessitation applied to non-theorem".to_string());
                }
                BTreeSet::new()
            }
        };
        deps.push(d);
    }
    CheckResult::Accepted
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Found(Proof),
    NotFoundWithinBudget,
}

/// Forward search for a premise-free proof of `target`. Schema instances
/// are built only from subformulas of `target`; the budget caps the number
/// of derived formulas. Failure says nothing about underivability.
pub fn derivable_bounded(target: &Formula, s: &System, budget: usize) -> Derivation {
    for (name, schema) in s.schemas() {
        if let Some(sub) = schema.matches(target) {
            return Derivation::Found(Proof {
                system: Some(s.name().to_string()),
                premises: vec![],
                lines: vec![Line {
                    formula: target.clone(),
                    justification: Justification::Axiom {
                        schema: name.clone(),
                        sub: Some(sub),
                    },
                }],
            });
        }
    }
    let pool: Vec<Formula> = target.subformulas().into_iter().collect();
    let mut search = Search::default();
    for (name, schema) in s.schemas() {
        let metas = schema.metavariables();
        let mut idx = vec![0usize; metas.len()];
        loop {
            let sub: Substitution = metas
                .iter()
                .zip(&idx)
                .map(|(m, &i)| (m.clone(), pool[i].clone()))
                .collect();
            let f = schema.instantiate(&sub).expect("all metavariables bound");
            search.add(
                f,
                Justification::Axiom {
                    schema: name.clone(),
                    sub: Some(sub),
                },
            );
            if search.derived.len() > budget {
                return Derivation::NotFoundWithinBudget;
            }
            if !odometer(&mut idx, pool.len()) {
                break;
            }
        }
    }
    let wanted: BTreeSet<&Formula> = pool.iter().collect();
    let mut done = 0;
    while done < search.derived.len() {
        let f = search.derived[done].0.clone();
        done += 1;
        if s.necessitation() {
            let boxed = Formula::boxed(f.clone());
            if wanted.contains(&boxed) {
                search.add(boxed, Justification::Nec(done));
            }
        }
        let mut fresh = Vec::new();
        if let Formula::Impl(a, b) = &f {
            if let Some(&i) = search.index.get(a.as_ref()) {
                fresh.push((b.as_ref().clone(), Justification::Mp(i + 1, done)));
            }
        }
        let key = f.clone();
        for (g, gi) in search.implications_from(&key) {
            fresh.push((g, Justification::Mp(done, gi + 1)));
        }
        for (g, j) in fresh {
            search.add(g, j);
        }
        if search.derived.len() > budget {
            return Derivation::NotFoundWithinBudget;
        }
        if search.index.contains_key(target) {
            break;
        }
    }
    match search.index.get(target) {
        Some(&t) => Derivation::Found(Proof {
            system: Some(s.name().to_string()),
            ..search.extract(t)
        }),
        None => Derivation::NotFoundWithinBudget,
    }
}

fn odometer(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Default)]
struct Search {
    derived: Vec<(Formula, Justification)>,
    index: HashMap<Formula, usize>,
}

impl Search {
    fn add(&mut self, f: Formula, j: Justification) {
        if !self.index.contains_key(&f) {
            self.index.insert(f.clone(), self.derived.len());
            self.derived.push((f, j));
        }
    }

    /// Derived implications `a -> b` with `a` the given formula.
    fn implications_from(&self, a: &Formula) -> Vec<(Formula, usize)> {
        self.derived
            .iter()
            .enumerate()
            .filter_map(|(i, (f, _))| match f {
                Formula::Impl(x, y) if x.as_ref() == a => Some((y.as_ref().clone(), i)),
                _ => None,
            })
            .collect()
    }

    /// Proof of derived formula `t`, keeping only the lines it uses.
    fn extract(&self, t: usize) -> Proof {
        let mut needed = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(i) = stack.pop() {
            if needed.insert(i) {
                match self.derived[i].1 {
                    Justification::Mp(a, b) => stack.extend([a - 1, b - 1]),
                    Justification::Nec(a) => stack.push(a - 1),
                    _ => {}
                }
            }
        }
        let renumber: HashMap<usize, usize> = needed
            .iter()
            .enumerate()
            .map(|(new, &old)| (old + 1, new + 1))
            .collect();
        let lines = needed
            .iter()
            .map(|&i| {
                let (formula, j) = &self.derived[i];
                let justification = match j {
                    Justification::Mp(a, b) => Justification::Mp(renumber[a], renumber[b]),
                    Justification::Nec(a) => Justification::Nec(renumber[a]),
                    other => other.clone(),
                };
                Line {
                    formula: formula.clone(),
                    justification,
                }
            })
            .collect();
        Proof {
            system: None,
            premises: vec![],
            lines,
        }
    }
}

/// The shipped proof corpus as `(name, JSON lines)`.
pub const CORPUS: [(&str, &str); 14] = [
    (
        "w_identity",
        include_str!("../data/proofs/w_identity.jsonl"),
    ),
    (
        "w_modus_ponens",
        include_str!("../data/proofs/w_modus_ponens.jsonl"),
    ),
    (
        "w_syllogism",
        include_str!("../data/proofs/w_syllogism.jsonl"),
    ),
    (
        "w_reflexivity",
        include_str!("../data/proofs/w_reflexivity.jsonl"),
    ),
    (
        "w_contraposition",
        include_str!("../data/proofs/w_contraposition.jsonl"),
    ),
    ("tbat_n1", include_str!("../data/proofs/tbat_n1.jsonl")),
    (
        "tbat_b7_b1",
        include_str!("../data/proofs/tbat_b7_b1.jsonl"),
    ),
    (
        "tbat_box_implication",
        include_str!("../data/proofs/tbat_box_implication.jsonl"),
    ),
    (
        "k_nec_identity",
        include_str!("../data/proofs/k_nec_identity.jsonl"),
    ),
    (
        "k_box_weakening",
        include_str!("../data/proofs/k_box_weakening.jsonl"),
    ),
    (
        "t_double_box",
        include_str!("../data/proofs/t_double_box.jsonl"),
    ),
    (
        "s4_nec_four",
        include_str!("../data/proofs/s4_nec_four.jsonl"),
    ),
    (
        "s5_nec_five",
        include_str!("../data/proofs/s5_nec_five.jsonl"),
    ),
    ("gl_nec_p1", include_str!("../data/proofs/gl_nec_p1.jsonl")),
];

/// The shipped corpus, parsed, with each proof's system.
pub fn corpus() -> Vec<(&'static str, System, Proof)> {
    CORPUS
        .iter()
        .map(|(name, text)| {
            let proof = Proof::from_jsonl(text).expect("corpus proof parses");
            let system = builtin_system(proof.system.as_deref().unwrap_or("W"))
                .expect("corpus system is built in");
            (*name, system, proof)
        })
        .collect()
}
