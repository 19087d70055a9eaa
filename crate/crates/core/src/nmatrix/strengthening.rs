//! Named single-cell strengthenings of the base matrix together with the
//! axiom schema each one corresponds to.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use super::{CellRestriction, Connective, NmatrixError};
use crate::formula::Schema;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StrengtheningTable {
    Negation,
    Box,
    Implication,
}

/// What is claimed about the ordinary modal status of an axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Remark {
    ProvableK,
    ProvableT,
    ProvableS4,
    NotProvableS5,
    None,
}

impl fmt::Display for Remark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Remark::ProvableK => "provable in K",
            Remark::ProvableT => "provable in T",
            Remark::ProvableS4 => "provable in S4",
            Remark::NotProvableS5 => "not provable in S5",
            Remark::None => "none",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NamedStrengthening {
    /// `N1`..`N4`, `B1`..`B8`, or `I_{a,b}^c`.
    pub name: String,
    pub table: StrengtheningTable,
    pub restriction: CellRestriction,
    /// The schema used for checking: the simplified form where one exists.
    pub axiom: Schema,
    /// The schema as first stated, before simplification.
    pub stated: Schema,
    pub remark: Remark,
}

impl NamedStrengthening {
    pub fn is_simplified(&self) -> bool {
        self.axiom != self.stated
    }
}

// (name, input, output, stated axiom, simplified axiom, remark)
type Row = (
    &'static str,
    &'static str,
    &'static str,
    &'static str,
    Option<&'static str>,
    Remark,
);

const NEGATION: [Row; 4] = [
    ("N1", "P", "R", "[]A -> []~~A", None, Remark::ProvableK),
    (
        "N2",
        "P",
        "f",
        "[]A -> ~[]~~A /\\ ~~A",
        Some("[]A -> ~[]~~A"),
        Remark::None,
    ),
    (
        "N3",
        "t",
        "R",
        "~[]A /\\ A -> []~~A",
        None,
        Remark::NotProvableS5,
    ),
    (
        "N4",
        "t",
        "f",
        "~[]A /\\ A -> ~[]~~A /\\ ~~A",
        Some("~[]A /\\ A -> ~[]~~A"),
        Remark::ProvableK,
    ),
];

const BOX: [Row; 8] = [
    ("B1", "P", "P", "[]A -> [][]A", None, Remark::ProvableS4),
    (
        "B2",
        "P",
        "t",
        "[]A -> []A /\\ ~[][]A",
        Some("[]A -> ~[][]A"),
        Remark::None,
    ),
    (
        "B3",
        "t",
        "R",
        "~[]A /\\ A -> []~[]A",
        None,
        Remark::ProvableS4,
    ),
    (
        "B4",
        "t",
        "f",
        "~[]A /\\ A -> ~[]A /\\ ~[]~[]A",
        Some("~[]A /\\ A -> ~[]~[]A"),
        Remark::None,
    ),
    ("B5", "f", "R", "~[]~A /\\ ~A -> []~[]A", None, Remark::None),
    (
        "B6",
        "f",
        "f",
        "~[]~A /\\ ~A -> ~[]A /\\ ~[]~[]A",
        None,
        Remark::NotProvableS5,
    ),
    ("B7", "R", "R", "[]~A -> []~[]A", None, Remark::ProvableT),
    (
        "B8",
        "R",
        "f",
        "[]~A -> ~[]A /\\ ~[]~[]A",
        None,
        Remark::NotProvableS5,
    ),
];

use Remark::{NotProvableS5 as NS5, ProvableK as K, ProvableT as T};

// (antecedent value, consequent value, output, axiom, remark)
const IMPLICATION: [(&str, &str, &str, &str, Remark); 32] = [
    ("P", "P", "P", "[]A /\\ []B -> [](A -> B)", K),
    (
        "P",
        "P",
        "t",
        "[]A /\\ []B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    ("P", "t", "P", "[]A /\\ ~[]B /\\ B -> [](A -> B)", NS5),
    (
        "P",
        "t",
        "t",
        "[]A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)",
        K,
    ),
    (
        "P",
        "f",
        "f",
        "[]A /\\ ~[]~B /\\ ~B -> ~[]~(A -> B) /\\ ~(A -> B)",
        T,
    ),
    ("P", "f", "R", "[]A /\\ ~[]~B /\\ ~B -> []~(A -> B)", NS5),
    (
        "P",
        "R",
        "f",
        "[]A /\\ []~B -> ~[]~(A -> B) /\\ ~(A -> B)",
        NS5,
    ),
    ("P", "R", "R", "[]A /\\ []~B -> []~(A -> B)", K),
    ("t", "P", "P", "~[]A /\\ A /\\ []B -> [](A -> B)", K),
    (
        "t",
        "P",
        "t",
        "~[]A /\\ A /\\ []B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    (
        "t",
        "t",
        "P",
        "~[]A /\\ A /\\ ~[]B /\\ B -> [](A -> B)",
        NS5,
    ),
    (
        "t",
        "t",
        "t",
        "~[]A /\\ A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)",
        K,
    ),
    (
        "t",
        "f",
        "f",
        "~[]A /\\ A /\\ ~[]~B /\\ ~B -> ~[]~(A -> B) /\\ ~(A -> B)",
        K,
    ),
    (
        "t",
        "f",
        "R",
        "~[]A /\\ A /\\ ~[]~B /\\ ~B -> []~(A -> B)",
        NS5,
    ),
    (
        "t",
        "R",
        "f",
        "~[]A /\\ A /\\ []~B -> ~[]~(A -> B) /\\ ~(A -> B)",
        T,
    ),
    ("t", "R", "R", "~[]A /\\ A /\\ []~B -> []~(A -> B)", NS5),
    ("f", "P", "P", "~[]~A /\\ ~A /\\ []B -> [](A -> B)", K),
    (
        "f",
        "P",
        "t",
        "~[]~A /\\ ~A /\\ []B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    (
        "f",
        "t",
        "P",
        "~[]~A /\\ ~A /\\ ~[]B /\\ B -> [](A -> B)",
        NS5,
    ),
    (
        "f",
        "t",
        "t",
        "~[]~A /\\ ~A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    (
        "f",
        "f",
        "P",
        "~[]~A /\\ ~A /\\ ~[]~B /\\ ~B -> [](A -> B)",
        NS5,
    ),
    (
        "f",
        "f",
        "t",
        "~[]~A /\\ ~A /\\ ~[]~B /\\ ~B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    ("f", "R", "P", "~[]~A /\\ ~A /\\ []~B -> [](A -> B)", NS5),
    (
        "f",
        "R",
        "t",
        "~[]~A /\\ ~A /\\ []~B -> ~[](A -> B) /\\ (A -> B)",
        K,
    ),
    ("R", "P", "P", "[]~A /\\ []B -> [](A -> B)", K),
    (
        "R",
        "P",
        "t",
        "[]~A /\\ []B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    ("R", "t", "P", "[]~A /\\ ~[]B /\\ B -> [](A -> B)", K),
    (
        "R",
        "t",
        "t",
        "[]~A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    ("R", "f", "P", "[]~A /\\ ~[]~B /\\ ~B -> [](A -> B)", K),
    (
        "R",
        "f",
        "t",
        "[]~A /\\ ~[]~B /\\ ~B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
    ("R", "R", "P", "[]~A /\\ []~B -> [](A -> B)", K),
    (
        "R",
        "R",
        "t",
        "[]~A /\\ []~B -> ~[](A -> B) /\\ (A -> B)",
        NS5,
    ),
];

/// The strengthenings whose joint composition over `W_SIMPLIFIED` gives
/// `TBAT`.
pub const TBAT_RESTRICTIONS: [&str; 17] = [
    "N1",
    "N4",
    "B1",
    "B7",
    "I_{P,P}^P",
    "I_{t,P}^P",
    "I_{f,P}^P",
    "I_{R,R}^P",
    "I_{R,t}^P",
    "I_{R,P}^P",
    "I_{R,f}^P",
    "I_{P,t}^t",
    "I_{f,R}^t",
    "I_{P,f}^f",
    "I_{t,f}^f",
    "I_{t,R}^f",
    "I_{P,R}^R",
];

fn schema(text: &str) -> Schema {
    Schema::parse(text).unwrap_or_else(|e| panic!("registry schema {text:?}: {e}"))
}

fn build() -> Vec<NamedStrengthening> {
    let unary = |table, conn, rows: &[Row]| {
        rows.iter()
            .map(
                move |&(name, input, output, stated, simplified, remark)| NamedStrengthening {
                    name: name.to_string(),
                    table,
                    restriction: CellRestriction::new(conn, &[input], &[output]),
                    axiom: schema(simplified.unwrap_or(stated)),
                    stated: schema(stated),
                    remark,
                },
            )
            .collect::<Vec<_>>()
    };
    let mut out = unary(StrengtheningTable::Negation, Connective::Neg, &NEGATION);
    out.extend(unary(StrengtheningTable::Box, Connective::Box, &BOX));
    out.extend(IMPLICATION.iter().map(|&(a, b, c, text, remark)| {
        let axiom = schema(text);
        NamedStrengthening {
            name: format!("I_{{{a},{b}}}^{c}"),
            table: StrengtheningTable::Implication,
            restriction: CellRestriction::new(Connective::Impl, &[a, b], &[c]),
            stated: axiom.clone(),
            axiom,
            remark,
        }
    }));
    out
}

/// All 44 named strengthenings, negation rows first, then box, then
/// implication.
pub fn registry() -> &'static [NamedStrengthening] {
    static REGISTRY: OnceLock<Vec<NamedStrengthening>> = OnceLock::new();
    REGISTRY.get_or_init(build)
}

fn canonical(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '{' && *c != '}')
        .collect()
}

/// Looks a strengthening up by name. Implication rows accept both
/// `I_{P,R}^R` and `I_P,R^R`.
pub fn strengthening(name: &str) -> Result<&'static NamedStrengthening, NmatrixError> {
    let key = canonical(name);
    registry()
        .iter()
        .find(|s| canonical(&s.name) == key)
        .ok_or_else(|| NmatrixError::UnknownStrengthening(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_matrix, compose, refines};
    use super::*;
    use crate::formula::Formula;

    #[test]
    fn sizes() {
        let r = registry();
        assert_eq!(r.len(), 44);
        let count = |t| r.iter().filter(|s| s.table == t).count();
        assert_eq!(count(StrengtheningTable::Negation), 4);
        assert_eq!(count(StrengtheningTable::Box), 8);
        assert_eq!(count(StrengtheningTable::Implication), 32);
    }

    #[test]
    fn names_are_unique_and_resolvable() {
        for s in registry() {
            assert_eq!(strengthening(&s.name).unwrap().name, s.name);
        }
        assert_eq!(strengthening("I_P,R^R").unwrap().name, "I_{P,R}^R");
        assert!(strengthening("N9").is_err());
    }

    #[test]
    fn implication_cells_cover_each_input_pair_twice() {
        let w = builtin_matrix("W").unwrap();
        for a in ["P", "t", "f", "R"] {
            for b in ["P", "t", "f", "R"] {
                let rows: Vec<_> = registry()
                    .iter()
                    .filter(|s| s.restriction.connective == Connective::Impl)
                    .filter(|s| s.restriction.inputs == [a, b])
                    .collect();
                assert_eq!(rows.len(), 2, "{a},{b}");
                let va = w.value(a).unwrap();
                let vb = w.value(b).unwrap();
                for s in rows {
                    let out = w.value(&s.restriction.allowed[0]).unwrap();
                    assert!(w.imp(va, vb).contains(out), "{}", s.name);
                }
            }
        }
    }

    /// Each implication axiom has the form `meaning(a)[A] & meaning(b)[B] ->
    /// meaning(c)[A -> B]`, where a value's meaning is the formula that
    /// forces it.
    #[test]
    fn implication_axioms_follow_the_value_pattern() {
        fn parts(v: &str, x: Formula) -> Vec<Formula> {
            match v {
                "P" => vec![Formula::boxed(x)],
                "t" => vec![Formula::neg(Formula::boxed(x.clone())), x],
                "f" => vec![
                    Formula::neg(Formula::boxed(Formula::neg(x.clone()))),
                    Formula::neg(x),
                ],
                "R" => vec![Formula::boxed(Formula::neg(x))],
                _ => unreachable!(),
            }
        }
        // Conjunction associates to the left.
        fn conj(items: Vec<Formula>) -> Formula {
            items.into_iter().reduce(Formula::and).unwrap()
        }
        let a = Formula::var("a");
        let b = Formula::var("b");
        let ab = Formula::implies(a.clone(), b.clone());
        let sub = [("A".to_string(), a.clone()), ("B".to_string(), b.clone())]
            .into_iter()
            .collect();
        for s in registry()
            .iter()
            .filter(|s| s.table == StrengtheningTable::Implication)
        {
            let r = &s.restriction;
            let mut antecedent = parts(&r.inputs[0], a.clone());
            antecedent.extend(parts(&r.inputs[1], b.clone()));
            let expected =
                Formula::implies(conj(antecedent), conj(parts(&r.allowed[0], ab.clone())));
            assert_eq!(s.axiom.instantiate(&sub).unwrap(), expected, "{}", s.name);
        }
    }

    #[test]
    fn simplified_rows() {
        let simplified: Vec<&str> = registry()
            .iter()
            .filter(|s| s.is_simplified())
            .map(|s| s.name.as_str())
            .collect();
        assert_eq!(simplified, ["N2", "N4", "B2", "B4"]);
    }

    #[test]
    fn remark_counts() {
        let count = |r| registry().iter().filter(|s| s.remark == r).count();
        assert_eq!(count(Remark::ProvableK), 14);
        assert_eq!(count(Remark::ProvableT), 3);
        assert_eq!(count(Remark::ProvableS4), 2);
        assert_eq!(count(Remark::NotProvableS5), 21);
        assert_eq!(count(Remark::None), 4);
    }

    #[test]
    fn tbat_is_the_composition_of_its_restrictions() {
        let restrictions: Vec<CellRestriction> = TBAT_RESTRICTIONS
            .iter()
            .map(|n| strengthening(n).unwrap().restriction.clone())
            .collect();
        let composed = compose(&builtin_matrix("W_SIMPLIFIED").unwrap(), &restrictions).unwrap();
        let tbat = builtin_matrix("TBAT").unwrap();
        assert!(refines(&composed, &tbat).unwrap());
        assert!(refines(&tbat, &composed).unwrap());
    }
}
