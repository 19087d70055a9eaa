use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::condition::CompiledCondition;
use super::{
    enumerate_frames, frame_valid, frames_inspected, parse_condition, Condition, Frame, FrameClass,
    KripkeError,
};
use crate::formula::Formula;

/// Default cap on candidate relations inspected by one scan. Covers every
/// class up to four worlds.
pub const DEFAULT_FRAME_BUDGET: u128 = 100_000;

#[derive(Clone, Copy, Debug)]
pub struct ScanLimits {
    pub max_n: usize,
    pub budget: u128,
}

impl ScanLimits {
    pub fn new(max_n: usize) -> ScanLimits {
        ScanLimits {
            max_n,
            budget: DEFAULT_FRAME_BUDGET,
        }
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Frame", 2)?;
        st.serialize_field("worlds", &self.size())?;
        let pairs: Vec<[usize; 2]> = self.pairs().into_iter().map(|(a, b)| [a, b]).collect();
        st.serialize_field("relation", &pairs)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub frame: Frame,
    pub axiom_valid: bool,
    pub condition_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub axiom: String,
    pub condition: String,
    pub class: FrameClass,
    pub max_n: usize,
    pub frames_scanned: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CorrespondenceReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares frame validity of `axiom` with `c` on every frame of `class`
/// with up to `limits.max_n` worlds. Mismatches come out in enumeration
/// order (size, then relation bitmask) whatever the thread count.
pub fn correspondence_scan(
    axiom: &Formula,
    c: &Condition,
    class: FrameClass,
    limits: ScanLimits,
) -> Result<CorrespondenceReport, KripkeError> {
    if limits.max_n == 0 {
        return Err(KripkeError::Size(0));
    }
    let needed: u128 = (1..=limits.max_n).map(|n| frames_inspected(n, class)).sum();
    if needed > limits.budget {
        return Err(KripkeError::BudgetExceeded {
            needed,
            budget: limits.budget,
        });
    }
    let compiled = CompiledCondition::new(c);
    let mut frames_scanned = 0;
    let mut mismatches = Vec::new();
    for n in 1..=limits.max_n {
        let frames = enumerate_frames(n, class)?;
        frames_scanned += frames.len();
        let found: Vec<Mismatch> = frames
            .par_iter()
            .filter_map(|fr| {
                let axiom_valid = frame_valid(fr, axiom);
                let condition_holds = compiled.holds(fr);
                (axiom_valid != condition_holds).then_some(Mismatch {
                    frame: *fr,
                    axiom_valid,
                    condition_holds,
                })
            })
            .collect();
        mismatches.extend(found);
    }
    Ok(CorrespondenceReport {
        axiom: axiom.print(),
        condition: c.to_string(),
        class,
        max_n: limits.max_n,
        frames_scanned,
        mismatches,
    })
}

/// Familiar first-order conditions tried when looking for a correspondent.
pub fn candidate_conditions() -> Vec<(&'static str, Condition)> {
    [
        ("true", "x = x"),
        ("false", "~(x = x)"),
        ("reflexive", "R(x,x)"),
        ("irreflexive", "~R(x,x)"),
        ("symmetric", "R(x,y) -> R(y,x)"),
        ("transitive", "R(x,y) & R(y,z) -> R(x,z)"),
        ("euclidean", "R(x,y) & R(x,z) -> R(y,z)"),
        ("serial", "exists y. R(x,y)"),
        ("functional", "R(x,y) & R(x,z) -> y = z"),
        ("dense", "R(x,y) -> exists z. R(x,z) & R(z,y)"),
        ("convergent", "R(x,y) -> exists z. R(x,z) & R(y,z)"),
        ("only_loops", "R(x,y) -> x = y"),
        ("empty", "~R(x,y)"),
        ("successors_are_dead_ends", "R(x,y) -> ~R(y,z)"),
        ("reflexive_or_dead_end", "R(x,x) | ~R(x,y)"),
        ("no_loops_reached", "R(x,y) -> ~R(y,y)"),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_condition(text).expect("candidate parses")))
    .collect()
}

/// Candidate conditions ordered by how many frames they disagree with
/// `axiom` on; ties keep candidate order.
pub fn rank_candidates(
    axiom: &Formula,
    class: FrameClass,
    limits: ScanLimits,
) -> Result<Vec<(&'static str, CorrespondenceReport)>, KripkeError> {
    let mut out = candidate_conditions()
        .into_iter()
        .map(|(name, c)| correspondence_scan(axiom, &c, class, limits).map(|r| (name, r)))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by_key(|(_, r)| r.mismatches.len());
    Ok(out)
}


/// One line of a conditions table.
#[derive(Clone, Debug)]
pub struct ConditionRow {
    pub name: String,
    pub axiom: crate::formula::Schema,
    pub condition: Condition,
    pub source: String,
}

/// The shipped conditions table.
pub const CONDITIONS_TSV: &str = include_str!("../../data/conditions.tsv");

/// Parses a tab-separated conditions table; `#` lines are comments.
pub fn load_conditions(text: &str) -> Result<Vec<ConditionRow>, KripkeError> {
    let bad = |line: usize, msg: String| KripkeError::Table { line, message: msg };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad(
                i + 1,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let axiom =
            crate::formula::Schema::parse(cols[1]).map_err(|e| bad(i + 1, e.to_string()))?;
        let condition = parse_condition(cols[2]).map_err(|e| bad(i + 1, e.to_string()))?;
        rows.push(ConditionRow {
            name: cols[0].to_string(),
            axiom,
            condition,
            source: cols[3].to_string(),
        });
    }
    Ok(rows)
}

pub fn builtin_conditions() -> Vec<ConditionRow> {
    load_conditions(CONDITIONS_TSV).expect("shipped conditions table parses")
}

#[cfg(test)]
mod table_tests {
    use super::*;
    use crate::nmatrix::strengthening;

    #[test]
    fn shipped_table_parses() {
        let rows = builtin_conditions();
        assert_eq!(rows.len(), 30);
        assert_eq!(rows.iter().filter(|r| r.name.starts_with("I_")).count(), 22);
    }

    #[test]
    fn table_axioms_agree_with_registry_but_one() {
        let differing: Vec<String> = builtin_conditions()
            .iter()
            .filter(|r| strengthening(&r.name).unwrap().axiom != r.axiom)
            .map(|r| r.name.clone())
            .collect();
        assert_eq!(differing, ["I_{t,R}^R"]);
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let err = load_conditions("# c\nN3\t[]A\n").unwrap_err();
        assert!(matches!(err, KripkeError::Table { line: 2, .. }));
        let err = load_conditions("N3\t[]A\tR(x,\tsrc\n").unwrap_err();
        assert!(matches!(err, KripkeError::Table { line: 1, .. }));
    }
}
