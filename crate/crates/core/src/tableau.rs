//! Prefixed tableaux deciding validity in K, T, S4 and S5.
//!
//! A proof attempt starts from `~f` at the root prefix `1`. Rules are tried
//! in a fixed order: α (`~~A`, `~(A -> B)`), ν (`[]A`), π (`~[]A`), and last
//! the branching β rule (`A -> B`). Within a rule the oldest formula of the
//! earliest world goes first, so traces and counter-models are
//! reproducible. S4 uses subset blocking against ancestors; S5 works over
//! one cluster where every world sees every world.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{eval_model, Frame, FrameClass, Model, Worlds, MAX_WORLDS};
use crate::nmatrix::{NamedStrengthening, Remark};

/// Default cap on rule applications per `decide` call.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicId {
    K,
    T,
    S4,
    S5,
}

impl LogicId {
    pub const ALL: [LogicId; 4] = [LogicId::K, LogicId::T, LogicId::S4, LogicId::S5];

    pub fn name(self) -> &'static str {
        match self {
            LogicId::K => "K",
            LogicId::T => "T",
            LogicId::S4 => "S4",
            LogicId::S5 => "S5",
        }
    }

    /// The frames the logic is complete for.
    pub fn frame_class(self) -> FrameClass {
        match self {
            LogicId::K => FrameClass::All,
            LogicId::T => FrameClass::Reflexive,
            LogicId::S4 => FrameClass::ReflTrans,
            LogicId::S5 => FrameClass::Equivalence,
        }
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LogicId {
    type Err = TableauError;

    fn from_str(s: &str) -> Result<LogicId, TableauError> {
        LogicId::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| TableauError::UnknownLogic(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("gave up after {0} rule applications")]
    DepthExceeded(usize),
    #[error("unknown logic {0:?}")]
    UnknownLogic(String),
    #[error("open branch has {0} worlds, more than a counter-model can hold")]
    ModelTooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Root,
    Alpha,
    Nu,
    Pi,
    BetaLeft,
    BetaRight,
    Close,
}

/// One numbered line of a tableau trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub index: usize,
    pub prefix: String,
    pub formula: String,
    pub rule: Rule,
    /// The line the rule was applied to; for `Close`, the complementary line.
    pub parent: Option<usize>,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match self.rule {
            Rule::Root => "root",
            Rule::Alpha => "alpha",
            Rule::Nu => "nu",
            Rule::Pi => "pi",
            Rule::BetaLeft => "beta-left",
            Rule::BetaRight => "beta-right",
            Rule::Close => "close",
        };
        write!(
            f,
            "{:>4}. {:<8} {}  [{rule}",
            self.index, self.prefix, self.formula
        )?;
        if let Some(p) = self.parent {
            write!(f, " {p}")?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableauResult {
    /// Every branch closed; the trace covers all of them in search order.
    Theorem { trace: Vec<Step> },
    /// An open saturated branch, read off as a model falsifying the formula
    /// at `world`.
    NonTheorem {
        counter: Model,
        world: usize,
        trace: Vec<Step>,
    },
}

impl TableauResult {
    pub fn is_theorem(&self) -> bool {
        matches!(self, TableauResult::Theorem { .. })
    }

    pub fn trace(&self) -> &[Step] {
        match self {
            TableauResult::Theorem { trace } | TableauResult::NonTheorem { trace, .. } => trace,
        }
    }
}

pub fn decide(f: &Formula, logic: LogicId) -> Result<TableauResult, TableauError> {
    decide_with(f, logic, DEFAULT_MAX_STEPS)
}

pub fn decide_with(
    f: &Formula,
    logic: LogicId,
    max_steps: usize,
) -> Result<TableauResult, TableauError> {
    let mut prover = Prover {
        logic,
        steps: Vec::new(),
        max_steps,
    };
    let mut branch = Branch::default();
    branch.worlds.push(World::new("1".to_string(), None));
    let root = Formula::neg(f.clone());
    let closed = prover.add(&mut branch, 0, root, Rule::Root, None)?;
    let open = if closed { None } else { prover.expand(branch)? };
    Ok(match open {
        None => TableauResult::Theorem {
            trace: prover.steps,
        },
        Some(b) => TableauResult::NonTheorem {
            counter: b.model(logic)?,
            world: 0,
            trace: prover.steps,
        },
    })
}

#[derive(Clone, Debug)]
struct Entry {
    formula: Formula,
    step: usize,
    done: bool,
}

#[derive(Clone, Debug)]
struct World {
    prefix: String,
    parent: Option<usize>,
    children: usize,
    entries: Vec<Entry>,
    index: HashMap<Formula, usize>,
}

impl World {
    fn new(prefix: String, parent: Option<usize>) -> World {
        World {
            prefix,
            parent,
            children: 0,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn has(&self, f: &Formula) -> bool {
        self.index.contains_key(f)
    }

    fn label_within(&self, other: &World) -> bool {
        self.entries.iter().all(|e| other.has(&e.formula))
    }
}

#[derive(Clone, Debug, Default)]
struct Branch {
    worlds: Vec<World>,
    nu_done: HashSet<(usize, usize, usize)>,
}

impl Branch {
    fn children(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.worlds.len()).filter(move |&v| self.worlds[v].parent == Some(w))
    }

    fn ancestors(&self, w: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.worlds[w].parent;
        while let Some(a) = cur {
            out.push(a);
            cur = self.worlds[a].parent;
        }
        out
    }

    /// Nearest ancestor whose label contains this world's label.
    fn blocker(&self, w: usize) -> Option<usize> {
        self.ancestors(w)
            .into_iter()
            .find(|&a| self.worlds[w].label_within(&self.worlds[a]))
    }

    fn model(&self, logic: LogicId) -> Result<Model, TableauError> {
        let n = self.worlds.len();
        if n > MAX_WORLDS {
            return Err(TableauError::ModelTooLarge(n));
        }
        let mut rel = vec![vec![false; n]; n];
        for (v, world) in self.worlds.iter().enumerate() {
            if let Some(p) = world.parent {
                rel[p][v] = true;
            }
        }
        match logic {
            LogicId::K => {}
            LogicId::T => (0..n).for_each(|w| rel[w][w] = true),
            LogicId::S4 => {
                for (w, row) in rel.iter_mut().enumerate() {
                    row[w] = true;
                    if let Some(u) = self.blocker(w) {
                        row[u] = true;
                    }
                }
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            if rel[i][k] && rel[k][j] {
                                rel[i][j] = true;
                            }
                        }
                    }
                }
            }
            LogicId::S5 => rel.iter_mut().for_each(|row| row.fill(true)),
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| rel[a][b])
            .collect();
        let frame = Frame::new(n, &pairs).expect("counter-model fits in a frame");
        let mut valuation: BTreeMap<String, Worlds> = BTreeMap::new();
        for (w, world) in self.worlds.iter().enumerate() {
            for e in &world.entries {
                match &e.formula {
                    Formula::Var(p) => *valuation.entry(p.clone()).or_default() |= 1 << w,
                    Formula::Neg(inner) => {
                        if let Formula::Var(p) = inner.as_ref() {
                            valuation.entry(p.clone()).or_default();
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(Model::new(frame, valuation))
    }
}

struct Prover {
    logic: LogicId,
    steps: Vec<Step>,
    max_steps: usize,
}

fn complement(f: &Formula) -> Formula {
    match f {
        Formula::Neg(inner) => inner.as_ref().clone(),
        other => Formula::neg(other.clone()),
    }
}

impl Prover {
    fn record(
        &mut self,
        prefix: &str,
        formula: String,
        rule: Rule,
        parent: Option<usize>,
    ) -> Result<usize, TableauError> {
        if self.steps.len() >= self.max_steps {
            return Err(TableauError::DepthExceeded(self.max_steps));
        }
        let index = self.steps.len() + 1;
        self.steps.push(Step {
            index,
            prefix: prefix.to_string(),
            formula,
            rule,
            parent,
        });
        Ok(index)
    }

    /// Adds `f` at world `w`; returns whether the branch closed.
    fn add(
        &mut self,
        b: &mut Branch,
        w: usize,
        f: Formula,
        rule: Rule,
        parent: Option<usize>,
    ) -> Result<bool, TableauError> {
        if b.worlds[w].has(&f) {
            return Ok(false);
        }
        let step = self.record(&b.worlds[w].prefix.clone(), f.print(), rule, parent)?;
        let clash = b.worlds[w]
            .index
            .get(&complement(&f))
            .map(|&i| b.worlds[w].entries[i].step);
        let world = &mut b.worlds[w];
        world.index.insert(f.clone(), world.entries.len());
        world.entries.push(Entry {
            formula: f,
            step,
            done: false,
        });
        if let Some(other) = clash {
            let prefix = world.prefix.clone();
            self.record(&prefix, "x".to_string(), Rule::Close, Some(other))?;
            return Ok(true);
        }
        Ok(false)
    }

    fn find(&self, b: &Branch, pick: impl Fn(&Formula) -> bool) -> Option<(usize, usize)> {
        b.worlds.iter().enumerate().find_map(|(w, world)| {
            world
                .entries
                .iter()
                .position(|e| !e.done && pick(&e.formula))
                .map(|i| (w, i))
        })
    }

    /// Saturates `b`; returns an open saturated branch if one exists.
    fn expand(&mut self, mut b: Branch) -> Result<Option<Branch>, TableauError> {
        loop {
            // α
            let alpha = self.find(&b, |f| match f {
                Formula::Neg(inner) => {
                    matches!(inner.as_ref(), Formula::Neg(_) | Formula::Impl(..))
                }
                _ => false,
            });
            if let Some((w, i)) = alpha {
                b.worlds[w].entries[i].done = true;
                let Entry { formula, step, .. } = b.worlds[w].entries[i].clone();
                let parts = match formula {
                    Formula::Neg(inner) => match *inner {
                        Formula::Neg(a) => vec![*a],
                        Formula::Impl(a, c) => vec![*a, Formula::neg(*c)],
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                };
                for part in parts {
                    if self.add(&mut b, w, part, Rule::Alpha, Some(step))? {
                        return Ok(None);
                    }
                }
                continue;
            }
            // ν
            match self.apply_nu(&mut b)? {
                Some(true) => return Ok(None),
                Some(false) => continue,
                None => {}
            }
            // π
            if let Some(closed) = self.apply_pi(&mut b)? {
                if closed {
                    return Ok(None);
                }
                continue;
            }
            // β
            let beta = self.find(&b, |f| matches!(f, Formula::Impl(..)));
            if let Some((w, i)) = beta {
                b.worlds[w].entries[i].done = true;
                let Entry { formula, step, .. } = b.worlds[w].entries[i].clone();
                let Formula::Impl(a, c) = formula else {
                    unreachable!()
                };
                let left = Formula::neg(*a);
                let right = *c;
                if b.worlds[w].has(&left) || b.worlds[w].has(&right) {
                    continue;
                }
                let mut other = b.clone();
                if !self.add(&mut b, w, left, Rule::BetaLeft, Some(step))? {
                    if let Some(open) = self.expand(b)? {
                        return Ok(Some(open));
                    }
                }
                if self.add(&mut other, w, right, Rule::BetaRight, Some(step))? {
                    return Ok(None);
                }
                b = other;
                continue;
            }
            return Ok(Some(b));
        }
    }

    /// Applies every pending ν instance once. `None` when nothing was
    /// pending, otherwise whether the branch closed.
    fn apply_nu(&mut self, b: &mut Branch) -> Result<Option<bool>, TableauError> {
        let mut changed = false;
        for w in 0..b.worlds.len() {
            let mut i = 0;
            while i < b.worlds[w].entries.len() {
                let Formula::Box(body) = &b.worlds[w].entries[i].formula else {
                    i += 1;
                    continue;
                };
                let body = body.as_ref().clone();
                let boxed = b.worlds[w].entries[i].formula.clone();
                let step = b.worlds[w].entries[i].step;
                let children: Vec<usize> = b.children(w).collect();
                let targets: Vec<usize> = match self.logic {
                    LogicId::K => children.clone(),
                    LogicId::T | LogicId::S4 => {
                        std::iter::once(w).chain(children.clone()).collect()
                    }
                    LogicId::S5 => (0..b.worlds.len()).collect(),
                };
                for t in targets {
                    if b.nu_done.insert((w, i, t)) {
                        changed = true;
                        if self.add(b, t, body.clone(), Rule::Nu, Some(step))? {
                            return Ok(Some(true));
                        }
                        if self.logic == LogicId::S4
                            && t != w
                            && self.add(b, t, boxed.clone(), Rule::Nu, Some(step))?
                        {
                            return Ok(Some(true));
                        }
                    }
                }
                i += 1;
            }
        }
        Ok(changed.then_some(false))
    }

    /// Applies the first pending π instance, if any; returns whether the
    /// branch closed.
    fn apply_pi(&mut self, b: &mut Branch) -> Result<Option<bool>, TableauError> {
        for w in 0..b.worlds.len() {
            if self.logic == LogicId::S4 && b.worlds[w].parent.is_some() && b.blocker(w).is_some() {
                continue;
            }
            let Some(i) = b.worlds[w].entries.iter().position(|e| {
                !e.done && matches!(&e.formula, Formula::Neg(x) if matches!(x.as_ref(), Formula::Box(_)))
            }) else {
                continue;
            };
            b.worlds[w].entries[i].done = true;
            let Entry { formula, step, .. } = b.worlds[w].entries[i].clone();
            let Formula::Neg(inner) = formula else {
                unreachable!()
            };
            let Formula::Box(body) = *inner else {
                unreachable!()
            };
            let witness = Formula::neg(*body);
            if self.logic == LogicId::S5 && b.worlds.iter().any(|v| v.has(&witness)) {
                return Ok(Some(false));
            }
            b.worlds[w].children += 1;
            let prefix = format!("{}.{}", b.worlds[w].prefix, b.worlds[w].children);
            b.worlds.push(World::new(prefix, Some(w)));
            let v = b.worlds.len() - 1;
            return self.add(b, v, witness, Rule::Pi, Some(step)).map(Some);
        }
        Ok(None)
    }
}

/// How a remark fared against the tableau.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemarkOutcome {
    Confirmed(Evidence),
    Refuted(Evidence),
    Unchecked(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub logic: LogicId,
    pub theorem: bool,
    /// Counter-model and falsifying world, for non-theorems.
    pub counter: Option<(Model, usize)>,
    pub steps: usize,
}

/// Checks a strengthening's remark: `Provable in L` needs an L-theorem, `Not
/// provable in S5` needs an S5 counter-model that re-evaluates as false.
pub fn verify_remark(s: &NamedStrengthening) -> RemarkOutcome {
    let (logic, want_theorem) = match s.remark {
        Remark::ProvableK => (LogicId::K, true),
        Remark::ProvableT => (LogicId::T, true),
        Remark::ProvableS4 => (LogicId::S4, true),
        Remark::NotProvableS5 => (LogicId::S5, false),
        Remark::None => return RemarkOutcome::Unchecked("no remark".to_string()),
    };
    let f = s.axiom.fresh_instance();
    let result = match decide(&f, logic) {
        Ok(r) => r,
        Err(e) => return RemarkOutcome::Unchecked(e.to_string()),
    };
    let steps = result.trace().len();
    let evidence = match result {
        TableauResult::Theorem { .. } => Evidence {
            logic,
            theorem: true,
            counter: None,
            steps,
        },
        TableauResult::NonTheorem { counter, world, .. } => {
            let falsified = !eval_model(&counter, world, &f);
            let in_class = counter.frame.in_class(logic.frame_class());
            if !(falsified && in_class) {
                return RemarkOutcome::Unchecked(format!(
                    "counter-model failed re-validation (falsifies: {falsified}, in class: {in_class})"
                ));
            }
            Evidence {
                logic,
                theorem: false,
                counter: Some((counter, world)),
                steps,
            }
        }
    };
    if evidence.theorem == want_theorem {
        RemarkOutcome::Confirmed(evidence)
    } else {
        RemarkOutcome::Refuted(evidence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::{enumerate_frames, frame_valid};

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn theorem(f: &str, logic: LogicId) -> bool {
        decide(&p(f), logic).unwrap().is_theorem()
    }

    #[test]
    fn axiom_k_is_a_k_theorem() {
        assert!(theorem("[](p -> q) -> []p -> []q", LogicId::K));
    }

    #[test]
    fn t_fails_in_k_with_one_dead_world() {
        let TableauResult::NonTheorem { counter, world, .. } =
            decide(&p("[]p -> p"), LogicId::K).unwrap()
        else {
            panic!("T is not a K theorem")
        };
        assert_eq!(world, 0);
        assert_eq!(counter.frame.size(), 1);
        assert!(counter.frame.pairs().is_empty());
        assert_eq!(counter.valuation.get("p").copied().unwrap_or(0), 0);
    }

    #[test]
    fn textbook_verdicts() {
        use LogicId::*;
        let table = [
            ("[]p -> p", [false, true, true, true]),
            ("[]p -> [][]p", [false, false, true, true]),
            ("<>p -> []<>p", [false, false, false, true]),
            ("p -> []<>p", [false, false, false, true]),
            ("[]~p -> []~[]p", [false, true, true, true]),
            ("[](p -> p)", [true, true, true, true]),
            ("[]p /\\ []q -> [](p /\\ q)", [true, true, true, true]),
            ("<>p -> []p", [false, false, false, false]),
            ("p", [false, false, false, false]),
            ("[]([]p -> p) -> []p", [false, false, false, false]),
        ];
        for (f, expected) in table {
            for (logic, want) in [K, T, S4, S5].into_iter().zip(expected) {
                assert_eq!(theorem(f, logic), want, "{f} in {logic}");
            }
        }
    }

    #[test]
    fn n3_has_an_s5_counter_model() {
        let f = p("~[]p /\\ p -> []~~p");
        let TableauResult::NonTheorem { counter, world, .. } = decide(&f, LogicId::S5).unwrap()
        else {
            panic!("N3 is not an S5 theorem")
        };
        assert!(!eval_model(&counter, world, &f));
        assert!(counter.frame.in_class(FrameClass::Equivalence));
    }

    #[test]
    fn counter_models_lie_in_the_class_and_falsify() {
        let formulas = [
            "[]p -> [][]p",
            "<>p -> []<>p",
            "[](p -> q) -> [](q -> p)",
            "<>p /\\ <>q -> <>(p /\\ q)",
            "[]<>p -> <>[]p",
            "[]([]p -> p) -> []p",
        ];
        for f in formulas {
            let f = p(f);
            for logic in LogicId::ALL {
                if let TableauResult::NonTheorem { counter, world, .. } = decide(&f, logic).unwrap()
                {
                    assert!(!eval_model(&counter, world, &f), "{f} {logic}");
                    assert!(counter.frame.in_class(logic.frame_class()), "{f} {logic}");
                }
            }
        }
    }

    #[test]
    fn theorems_hold_on_small_frames() {
        let formulas = [
            "[]p -> p",
            "[]p -> [][]p",
            "<>p -> []<>p",
            "[]~p -> []~[]p",
            "[](p -> q) -> []p -> []q",
        ];
        for f in formulas {
            let f = p(f);
            for logic in LogicId::ALL {
                if decide(&f, logic).unwrap().is_theorem() {
                    for n in 1..=3 {
                        for fr in enumerate_frames(n, logic.frame_class()).unwrap() {
                            assert!(frame_valid(&fr, &f), "{f} {logic} {fr}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn step_guard_reports_depth_exceeded() {
        let f = p("[](p -> q) -> []p -> []q");
        assert_eq!(
            decide_with(&f, LogicId::K, 3),
            Err(TableauError::DepthExceeded(3))
        );
    }

    #[test]
    fn traces_are_deterministic_and_numbered() {
        let f = p("<>p /\\ <>q -> <>(p /\\ q)");
        let a = decide(&f, LogicId::S4).unwrap();
        let b = decide(&f, LogicId::S4).unwrap();
        assert_eq!(a, b);
        for (i, s) in a.trace().iter().enumerate() {
            assert_eq!(s.index, i + 1);
            assert!(s.parent.is_none_or(|p| p < s.index));
        }
        assert_eq!(a.trace()[0].rule, Rule::Root);
        assert_eq!(a.trace()[0].prefix, "1");
    }

    #[test]
    fn logic_names_parse() {
        assert_eq!("s4".parse::<LogicId>().unwrap(), LogicId::S4);
        assert!("GL".parse::<LogicId>().is_err());
    }
}
