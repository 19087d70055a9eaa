//! Finite Kripke frames and models, frame validity, first-order frame
//! conditions and brute-force correspondence scanning.

mod condition;
mod scan;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{closure_of, Closure, Formula, Shape};

pub use condition::{eval_condition, parse_condition, Condition, ConditionError};
pub use scan::{
    builtin_conditions, candidate_conditions, correspondence_scan, load_conditions,
    rank_candidates, ConditionRow, CorrespondenceReport, Mismatch, ScanLimits, CONDITIONS_TSV,
    DEFAULT_FRAME_BUDGET,
};

/// Frames are stored as a 128-bit relation mask, so at most 11 worlds.
pub const MAX_WORLDS: usize = 11;

/// Set of worlds as a bitmask.
pub type Worlds = u16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("frames have between 1 and {MAX_WORLDS} worlds, got {0}")]
    Size(usize),
    #[error("pair ({0},{1}) is outside the frame")]
    OutOfRange(usize, usize),
    #[error("scan needs {needed} frames, above the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("unknown frame class {0:?}")]
    UnknownClass(String),
    #[error("conditions table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("model: {0}")]
    Model(String),
}

/// A finite frame on worlds `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frame {
    n: usize,
    bits: u128,
}

impl Frame {
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Frame, KripkeError> {
        let mut fr = Frame::empty(n)?;
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(KripkeError::OutOfRange(a, b));
            }
            fr.bits |= 1 << (a * n + b);
        }
        Ok(fr)
    }

    pub fn empty(n: usize) -> Result<Frame, KripkeError> {
        if n == 0 || n > MAX_WORLDS {
            return Err(KripkeError::Size(n));
        }
        Ok(Frame { n, bits: 0 })
    }

    /// Bit `a * n + b` stands for the pair `(a, b)`.
    pub fn from_bits(n: usize, bits: u128) -> Result<Frame, KripkeError> {
        let fr = Frame::empty(n)?;
        if bits >> (n * n) != 0 {
            return Err(KripkeError::OutOfRange(n, n));
        }
        Ok(Frame { bits, ..fr })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.bits >> (a * self.n + b) & 1 == 1
    }

    pub fn successors(&self, a: usize) -> Worlds {
        ((self.bits >> (a * self.n)) & ((1u128 << self.n) - 1)) as Worlds
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.related(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn all_worlds(&self) -> Worlds {
        ((1u32 << self.n) - 1) as Worlds
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.related(a, a))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().iter().all(|&(a, b)| self.related(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.n).all(|a| {
            let succ = self.successors(a);
            (0..self.n)
                .filter(|b| succ >> b & 1 == 1)
                .all(|b| self.successors(b) & !succ == 0)
        })
    }

    pub fn in_class(&self, class: FrameClass) -> bool {
        match class {
            FrameClass::All => true,
            FrameClass::Reflexive => self.is_reflexive(),
            FrameClass::Transitive => self.is_transitive(),
            FrameClass::ReflTrans => self.is_reflexive() && self.is_transitive(),
            FrameClass::Equivalence => {
                self.is_reflexive() && self.is_transitive() && self.is_symmetric()
            }
        }
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame({}, {:?})", self.n, self.pairs())
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .pairs()
            .iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        write!(f, "n={} {{{}}}", self.n, pairs.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    All,
    Reflexive,
    Transitive,
    ReflTrans,
    Equivalence,
}

impl FrameClass {
    pub const ALL: [FrameClass; 5] = [
        FrameClass::All,
        FrameClass::Reflexive,
        FrameClass::Transitive,
        FrameClass::ReflTrans,
        FrameClass::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::All => "all",
            FrameClass::Reflexive => "reflexive",
            FrameClass::Transitive => "transitive",
            FrameClass::ReflTrans => "refl_trans",
            FrameClass::Equivalence => "equivalence",
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FrameClass {
    type Err = KripkeError;

    fn from_str(s: &str) -> Result<FrameClass, KripkeError> {
        FrameClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| KripkeError::UnknownClass(s.to_string()))
    }
}

/// All frames of a class on `n` worlds in ascending relation-bitmask order.
pub fn enumerate_frames(n: usize, class: FrameClass) -> Result<Vec<Frame>, KripkeError> {
    Frame::empty(n)?;
    if class == FrameClass::Equivalence {
        let mut frames: Vec<Frame> = set_partitions(n)
            .into_iter()
            .map(|blocks| {
                let mut bits = 0u128;
                for a in 0..n {
                    for b in 0..n {
                        if blocks[a] == blocks[b] {
                            bits |= 1 << (a * n + b);
                        }
                    }
                }
                Frame { n, bits }
            })
            .collect();
        frames.sort_by_key(|f| f.bits);
        return Ok(frames);
    }
    if n * n > 25 {
        return Err(KripkeError::BudgetExceeded {
            needed: 1u128 << (n * n),
            budget: 1 << 25,
        });
    }
    let mask = if class == FrameClass::Reflexive || class == FrameClass::ReflTrans {
        (0..n).fold(0u128, |acc, a| acc | 1 << (a * n + a))
    } else {
        0
    };
    Ok((0..1u128 << (n * n))
        .filter(|bits| bits & mask == mask)
        .map(|bits| Frame { n, bits })
        .filter(|f| f.in_class(class))
        .collect())
}

/// Number of candidate relations `enumerate_frames` inspects.
pub fn frames_inspected(n: usize, class: FrameClass) -> u128 {
    match class {
        FrameClass::Equivalence => set_partitions(n).len() as u128,
        _ => 1u128 << (n * n),
    }
}

/// Set partitions of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur.push(b);
            go(i + 1, n, max.max(b), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut cur = vec![0];
        go(1, n, 0, &mut cur, &mut out);
    }
    out
}

/// A frame with a truth set for each variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub frame: Frame,
    pub valuation: BTreeMap<String, Worlds>,
}

impl Model {
    pub fn new(frame: Frame, valuation: BTreeMap<String, Worlds>) -> Model {
        Model { frame, valuation }
    }

    /// `{"worlds":n,"relation":[[a,b],...],"valuation":{"p":[0,2],...}}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelJson::from(self)).expect("model JSON serializes")
    }

    pub fn from_json(text: &str) -> Result<Model, KripkeError> {
        let m: ModelJson =
            serde_json::from_str(text).map_err(|e| KripkeError::Model(e.to_string()))?;
        m.try_into()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub worlds: usize,
    pub relation: Vec<[usize; 2]>,
    pub valuation: BTreeMap<String, Vec<usize>>,
}

impl From<&Model> for ModelJson {
    fn from(m: &Model) -> ModelJson {
        ModelJson {
            worlds: m.frame.size(),
            relation: m.frame.pairs().into_iter().map(|(a, b)| [a, b]).collect(),
            valuation: m
                .valuation
                .iter()
                .map(|(k, set)| {
                    let worlds = (0..m.frame.size()).filter(|w| set >> w & 1 == 1).collect();
                    (k.clone(), worlds)
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelJson> for Model {
    type Error = KripkeError;

    fn try_from(m: ModelJson) -> Result<Model, KripkeError> {
        let pairs: Vec<(usize, usize)> = m.relation.iter().map(|[a, b]| (*a, *b)).collect();
        let frame = Frame::new(m.worlds, &pairs)?;
        let mut valuation = BTreeMap::new();
        for (k, ws) in m.valuation {
            let mut set = 0;
            for w in ws {
                if w >= m.worlds {
                    return Err(KripkeError::OutOfRange(w, w));
                }
                set |= 1 << w;
            }
            valuation.insert(k, set);
        }
        Ok(Model { frame, valuation })
    }
}

/// Truth sets for every member of `closure`, given truth sets for its
/// variables (missing variables are false everywhere).
fn truth_sets(frame: &Frame, closure: &Closure, var_sets: &dyn Fn(&str) -> Worlds) -> Vec<Worlds> {
    let all = frame.all_worlds();
    let succ: Vec<Worlds> = (0..frame.size()).map(|w| frame.successors(w)).collect();
    let mut sets: Vec<Worlds> = Vec::with_capacity(closure.len());
    for (f, shape) in closure.items().iter().zip(closure.shapes()) {
        let s = match *shape {
            Shape::Var => match f {
                Formula::Var(name) => var_sets(name) & all,
                _ => unreachable!("variable shape on a compound formula"),
            },
            Shape::Neg(a) => !sets[a] & all,
            Shape::Impl(a, b) => (!sets[a] | sets[b]) & all,
            Shape::Box(a) => box_set(&succ, sets[a]),
        };
        sets.push(s);
    }
    sets
}

fn box_set(succ: &[Worlds], body: Worlds) -> Worlds {
    succ.iter()
        .enumerate()
        .filter(|(_, s)| *s & !body == 0)
        .fold(0, |acc, (w, _)| acc | 1 << w)
}

/// Worlds of `m` at which `f` is true.
pub fn truth_set(m: &Model, f: &Formula) -> Worlds {
    let closure = closure_of([f]);
    let sets = truth_sets(&m.frame, &closure, &|v| {
        m.valuation.get(v).copied().unwrap_or(0)
    });
    sets[closure.index_of(f).expect("formula is in its own closure")]
}

pub fn eval_model(m: &Model, w: usize, f: &Formula) -> bool {
    truth_set(m, f) >> w & 1 == 1
}

/// Whether `f` holds at every world under every valuation of its variables.
pub fn frame_valid(fr: &Frame, f: &Formula) -> bool {
    refute_on_frame(fr, f).is_none()
}

/// The first model (in valuation order) on `fr` falsifying `f`, with the
/// falsifying world.
pub fn refute_on_frame(fr: &Frame, f: &Formula) -> Option<(Model, usize)> {
    let closure = closure_of([f]);
    let target = closure.index_of(f).expect("formula is in its own closure");
    let vars = f.variables();
    let n = fr.size();
    let total_bits = n * vars.len();
    if total_bits >= 64 {
        panic!("frame_valid: {} valuation bits is too many", total_bits);
    }
    let all = fr.all_worlds();
    let world_mask = (1u64 << n) - 1;
    for code in 0..1u64 << total_bits {
        let lookup = |name: &str| -> Worlds {
            match vars.iter().position(|v| v == name) {
                Some(i) => ((code >> (i * n)) & world_mask) as Worlds,
                None => 0,
            }
        };
        let sets = truth_sets(fr, &closure, &lookup);
        if sets[target] != all {
            let world = (0..n).find(|w| sets[target] >> w & 1 == 0).unwrap();
            let valuation = vars.iter().map(|v| (v.clone(), lookup(v))).collect();
            return Some((Model::new(*fr, valuation), world));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        let single = Frame::new(1, &[]).unwrap();
        let m = Model::new(single, BTreeMap::new());
        assert!(eval_model(&m, 0, &p("[]p")));
        assert!(!eval_model(&m, 0, &p("[]p -> p")));
        let refl = Frame::new(1, &[(0, 0)]).unwrap();
        for set in [0, 1] {
            let m = Model::new(refl, [("p".to_string(), set)].into());
            assert!(eval_model(&m, 0, &p("[]p -> p")));
        }
    }

    #[test]
    fn frame_validity_examples() {
        let chain = Frame::new(2, &[(0, 0), (1, 1), (0, 1)]).unwrap();
        assert!(frame_valid(&chain, &p("[]p -> p")));
        let nontrans = Frame::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!frame_valid(&nontrans, &p("[]p -> [][]p")));
        for bits in 0..16 {
            assert!(frame_valid(
                &Frame::from_bits(2, bits).unwrap(),
                &p("p -> p")
            ));
        }
    }

    #[test]
    fn refutation_falsifies() {
        let nontrans = Frame::new(3, &[(0, 1), (1, 2)]).unwrap();
        let f = p("[]p -> [][]p");
        let (m, w) = refute_on_frame(&nontrans, &f).unwrap();
        assert!(!eval_model(&m, w, &f));
    }

    #[test]
    fn frame_counts() {
        assert_eq!(enumerate_frames(2, FrameClass::All).unwrap().len(), 16);
        assert_eq!(enumerate_frames(2, FrameClass::Reflexive).unwrap().len(), 4);
        assert_eq!(
            enumerate_frames(3, FrameClass::Equivalence).unwrap().len(),
            5
        );
        assert_eq!(
            enumerate_frames(4, FrameClass::Equivalence).unwrap().len(),
            15
        );
        assert_eq!(enumerate_frames(3, FrameClass::All).unwrap().len(), 512);
        // Preorders on 3 points.
        assert_eq!(
            enumerate_frames(3, FrameClass::ReflTrans).unwrap().len(),
            29
        );
        // Transitive relations on 3 points.
        assert_eq!(
            enumerate_frames(3, FrameClass::Transitive).unwrap().len(),
            171
        );
    }

    #[test]
    fn equivalence_partitions_agree_with_filtering() {
        for n in 1..=4 {
            let via_partitions = enumerate_frames(n, FrameClass::Equivalence).unwrap();
            let via_filter: Vec<Frame> = enumerate_frames(n, FrameClass::All)
                .unwrap()
                .into_iter()
                .filter(|f| f.in_class(FrameClass::Equivalence))
                .collect();
            assert_eq!(via_partitions, via_filter);
        }
    }

    #[test]
    fn frame_construction_errors() {
        assert_eq!(Frame::new(0, &[]), Err(KripkeError::Size(0)));
        assert_eq!(Frame::new(12, &[]), Err(KripkeError::Size(12)));
        assert_eq!(Frame::new(2, &[(0, 2)]), Err(KripkeError::OutOfRange(0, 2)));
        assert!(Frame::from_bits(2, 1 << 4).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let fr = Frame::new(2, &[(0, 1), (1, 1)]).unwrap();
        let m = Model::new(fr, [("p".to_string(), 0b10), ("q".to_string(), 0)].into());
        let text = m.to_json();
        assert_eq!(
            text,
            r#"{"worlds":2,"relation":[[0,1],[1,1]],"valuation":{"p":[1],"q":[]}}"#
        );
        assert_eq!(Model::from_json(&text).unwrap(), m);
        assert!(Model::from_json(r#"{"worlds":1,"relation":[[0,1]],"valuation":{}}"#).is_err());
    }

    #[test]
    fn class_names_round_trip() {
        for c in FrameClass::ALL {
            assert_eq!(c.name().parse::<FrameClass>().unwrap(), c);
        }
        assert!("serial".parse::<FrameClass>().is_err());
    }
}
