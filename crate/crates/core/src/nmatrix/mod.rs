//! Non-deterministic matrices.
//!
//! An [`Nmatrix`] assigns to every connective and tuple of input values a
//! non-empty *set* of admissible output values. A [`Valuation`] picks one
//! value per formula of a [`Closure`](crate::formula::Closure) so that every
//! compound formula takes a value from the cell selected by its immediate
//! subformulas. Identical subformulas share one slot.

mod builtin;
mod file;
mod strengthening;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{closure_of, Closure, Formula, Shape};

pub use builtin::{builtin_matrix, Builtin};
pub use file::MatrixFile;
pub use strengthening::{
    registry, strengthening, NamedStrengthening, Remark, StrengtheningTable, TBAT_RESTRICTIONS,
};

/// Default refusal threshold for closures handed to the valuation search.
pub const DEFAULT_MAX_CLOSURE: usize = 24;

/// Index of a truth value inside its matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(pub u8);

/// A set of values of one matrix, as a bitmask over value indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueSet(u32);

impl ValueSet {
    pub const EMPTY: ValueSet = ValueSet(0);

    pub fn singleton(v: Value) -> ValueSet {
        ValueSet(1 << v.0)
    }

    pub fn full(n: usize) -> ValueSet {
        ValueSet(((1u64 << n) - 1) as u32)
    }

    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> ValueSet {
        values
            .into_iter()
            .fold(ValueSet::EMPTY, |acc, v| acc.with(v))
    }

    pub fn with(self, v: Value) -> ValueSet {
        ValueSet(self.0 | (1 << v.0))
    }

    pub fn contains(self, v: Value) -> bool {
        self.0 & (1 << v.0) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersect(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ValueSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = Value> {
        (0..32u8).filter(move |i| self.0 & (1 << i) != 0).map(Value)
    }

    fn first(self) -> Option<Value> {
        (self.0 != 0).then(|| Value(self.0.trailing_zeros() as u8))
    }

    fn without(self, v: Value) -> ValueSet {
        ValueSet(self.0 & !(1 << v.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    Neg,
    Box,
    Impl,
}

impl Connective {
    pub fn arity(self) -> usize {
        match self {
            Connective::Neg | Connective::Box => 1,
            Connective::Impl => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Connective::Neg => "neg",
            Connective::Box => "box",
            Connective::Impl => "impl",
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NmatrixError {
    #[error("unknown matrix {0:?}")]
    UnknownMatrix(String),
    #[error("matrix has no values")]
    NoValues,
    #[error("matrix has more than 32 values")]
    TooManyValues,
    #[error("duplicate value {0:?}")]
    DuplicateValue(String),
    #[error("unknown value {0:?}")]
    UnknownValue(String),
    #[error("designated set is empty")]
    NoDesignated,
    #[error("cell {connective}({inputs}) is missing")]
    MissingCell {
        connective: Connective,
        inputs: String,
    },
    #[error("cell {connective}({inputs}) is empty")]
    EmptyCell {
        connective: Connective,
        inputs: String,
    },
    #[error("restriction on {connective} expects {expected} inputs, got {got}")]
    Arity {
        connective: Connective,
        expected: usize,
        got: usize,
    },
    #[error("matrices have different values or designated sets")]
    CarrierMismatch,
    #[error("closure has {size} formulas, above the limit of {limit}")]
    ClosureTooLarge { size: usize, limit: usize },
    #[error("unknown strengthening {0:?}")]
    UnknownStrengthening(String),
    #[error("malformed restriction {0:?}")]
    MalformedRestriction(String),
    #[error("matrix file: {0}")]
    File(String),
}

/// A finite Nmatrix over the connectives `~`, `[]` and `->`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nmatrix {
    name: String,
    values: Vec<String>,
    designated: ValueSet,
    neg: Vec<ValueSet>,
    boxed: Vec<ValueSet>,
    imp: Vec<ValueSet>,
}

impl Nmatrix {
    /// Builds a matrix and checks its invariants. `imp` is row-major:
    /// `imp[a * n + b]` is the cell for `a -> b`.
    pub fn new(
        name: impl Into<String>,
        values: Vec<String>,
        designated: ValueSet,
        neg: Vec<ValueSet>,
        boxed: Vec<ValueSet>,
        imp: Vec<ValueSet>,
    ) -> Result<Nmatrix, NmatrixError> {
        let n = values.len();
        if n == 0 {
            return Err(NmatrixError::NoValues);
        }
        if n > 32 {
            return Err(NmatrixError::TooManyValues);
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(NmatrixError::DuplicateValue(v.clone()));
            }
        }
        let full = ValueSet::full(n);
        if designated.is_empty() {
            return Err(NmatrixError::NoDesignated);
        }
        if !designated.is_subset(full) {
            return Err(NmatrixError::UnknownValue(format!("{designated:?}")));
        }
        let m = Nmatrix {
            name: name.into(),
            values,
            designated,
            neg,
            boxed,
            imp,
        };
        for (conn, expected) in [
            (Connective::Neg, n),
            (Connective::Box, n),
            (Connective::Impl, n * n),
        ] {
            if m.table(conn).len() != expected {
                return Err(NmatrixError::MissingCell {
                    connective: conn,
                    inputs: format!("{} of {expected} cells", m.table(conn).len()),
                });
            }
        }
        for (conn, inputs) in m.cells() {
            let cell = m.cell(conn, &inputs);
            if cell.is_empty() {
                return Err(NmatrixError::EmptyCell {
                    connective: conn,
                    inputs: m.render_inputs(&inputs),
                });
            }
            if !cell.is_subset(full) {
                return Err(NmatrixError::UnknownValue(format!("{cell:?}")));
            }
        }
        Ok(m)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Nmatrix {
        self.name = name.into();
        self
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_values(&self) -> impl Iterator<Item = Value> {
        (0..self.values.len() as u8).map(Value)
    }

    pub fn value(&self, name: &str) -> Option<Value> {
        self.values
            .iter()
            .position(|v| v == name)
            .map(|i| Value(i as u8))
    }

    pub fn value_name(&self, v: Value) -> &str {
        &self.values[v.0 as usize]
    }

    pub fn designated(&self) -> ValueSet {
        self.designated
    }

    pub fn is_designated(&self, v: Value) -> bool {
        self.designated.contains(v)
    }

    pub fn neg(&self, a: Value) -> ValueSet {
        self.neg[a.0 as usize]
    }

    pub fn box_of(&self, a: Value) -> ValueSet {
        self.boxed[a.0 as usize]
    }

    pub fn imp(&self, a: Value, b: Value) -> ValueSet {
        self.imp[a.0 as usize * self.values.len() + b.0 as usize]
    }

    pub fn cell(&self, conn: Connective, inputs: &[Value]) -> ValueSet {
        match conn {
            Connective::Neg => self.neg(inputs[0]),
            Connective::Box => self.box_of(inputs[0]),
            Connective::Impl => self.imp(inputs[0], inputs[1]),
        }
    }

    fn table(&self, conn: Connective) -> &[ValueSet] {
        match conn {
            Connective::Neg => &self.neg,
            Connective::Box => &self.boxed,
            Connective::Impl => &self.imp,
        }
    }

    fn cell_mut(&mut self, conn: Connective, inputs: &[Value]) -> &mut ValueSet {
        let n = self.values.len();
        match conn {
            Connective::Neg => &mut self.neg[inputs[0].0 as usize],
            Connective::Box => &mut self.boxed[inputs[0].0 as usize],
            Connective::Impl => &mut self.imp[inputs[0].0 as usize * n + inputs[1].0 as usize],
        }
    }

    /// Every (connective, inputs) cell address, negation first, then box,
    /// then implication in row-major order.
    pub fn cells(&self) -> Vec<(Connective, Vec<Value>)> {
        let mut out = Vec::with_capacity(2 * self.len() + self.len() * self.len());
        for conn in [Connective::Neg, Connective::Box] {
            out.extend(self.all_values().map(|v| (conn, vec![v])));
        }
        for a in self.all_values() {
            for b in self.all_values() {
                out.push((Connective::Impl, vec![a, b]));
            }
        }
        out
    }

    pub fn render_set(&self, set: ValueSet) -> String {
        let names: Vec<&str> = set.iter().map(|v| self.value_name(v)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn render_inputs(&self, inputs: &[Value]) -> String {
        let names: Vec<&str> = inputs.iter().map(|v| self.value_name(*v)).collect();
        names.join(",")
    }

    pub fn parse_set(&self, names: &[impl AsRef<str>]) -> Result<ValueSet, NmatrixError> {
        names.iter().try_fold(ValueSet::EMPTY, |acc, n| {
            self.value(n.as_ref())
                .map(|v| acc.with(v))
                .ok_or_else(|| NmatrixError::UnknownValue(n.as_ref().to_string()))
        })
    }

    /// Plain-text rendering of the three tables.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let designated: Vec<&str> = self.designated.iter().map(|v| self.value_name(v)).collect();
        out.push_str(&format!(
            "matrix {}  values {{{}}}  designated {{{}}}\n",
            self.name,
            self.values.join(","),
            designated.join(",")
        ));
        let width = self
            .cells()
            .iter()
            .map(|(c, i)| self.render_set(self.cell(*c, i)).len())
            .max()
            .unwrap_or(1)
            .max(3);
        out.push_str(&format!(
            "{:>5} | {:<width$} | {:<width$}\n",
            "x", "~x", "[]x"
        ));
        for v in self.all_values() {
            out.push_str(&format!(
                "{:>5} | {:<width$} | {:<width$}\n",
                self.value_name(v),
                self.render_set(self.neg(v)),
                self.render_set(self.box_of(v)),
            ));
        }
        out.push_str(&format!("{:>5} |", "->"));
        for b in self.all_values() {
            out.push_str(&format!(" {:<width$}", self.value_name(b)));
        }
        out.push('\n');
        for a in self.all_values() {
            out.push_str(&format!("{:>5} |", self.value_name(a)));
            for b in self.all_values() {
                out.push_str(&format!(" {:<width$}", self.render_set(self.imp(a, b))));
            }
            out.push('\n');
        }
        out
    }
}

/// One row of a strengthening table: the cell for `connective(inputs)` may
/// only take values in `allowed`. Values are named, and resolved against the
/// matrix the restriction is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellRestriction {
    pub connective: Connective,
    pub inputs: Vec<String>,
    pub allowed: Vec<String>,
}

impl CellRestriction {
    pub fn new(connective: Connective, inputs: &[&str], allowed: &[&str]) -> CellRestriction {
        CellRestriction {
            connective,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            allowed: allowed.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Parses `neg(P)={R}`, `box(t)={f,R}` or `impl(P,R)={R}`.
    pub fn parse(text: &str) -> Result<CellRestriction, NmatrixError> {
        let bad = || NmatrixError::MalformedRestriction(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rhs) = compact.split_once('=').ok_or_else(bad)?;
        let (conn, args) = lhs.split_once('(').ok_or_else(bad)?;
        let args = args.strip_suffix(')').ok_or_else(bad)?;
        let connective = match conn {
            "neg" | "~" | "¬" => Connective::Neg,
            "box" | "[]" | "□" => Connective::Box,
            "impl" | "->" | "→" => Connective::Impl,
            _ => return Err(bad()),
        };
        let set = rhs
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .unwrap_or(rhs);
        let inputs: Vec<String> = args.split(',').map(str::to_string).collect();
        let allowed: Vec<String> = set
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if inputs.len() != connective.arity() {
            return Err(NmatrixError::Arity {
                connective,
                expected: connective.arity(),
                got: inputs.len(),
            });
        }
        if allowed.is_empty() {
            return Err(bad());
        }
        Ok(CellRestriction {
            connective,
            inputs,
            allowed,
        })
    }
}

impl fmt::Display for CellRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({})={{{}}}",
            self.connective,
            self.inputs.join(","),
            self.allowed.join(",")
        )
    }
}

/// Intersects each targeted cell of `base` with the restriction's allowed set.
pub fn compose(base: &Nmatrix, restrictions: &[CellRestriction]) -> Result<Nmatrix, NmatrixError> {
    let mut out = base.clone();
    for r in restrictions {
        if r.inputs.len() != r.connective.arity() {
            return Err(NmatrixError::Arity {
                connective: r.connective,
                expected: r.connective.arity(),
                got: r.inputs.len(),
            });
        }
        let inputs: Vec<Value> = r
            .inputs
            .iter()
            .map(|n| {
                base.value(n)
                    .ok_or_else(|| NmatrixError::UnknownValue(n.clone()))
            })
            .collect::<Result<_, _>>()?;
        let allowed = base.parse_set(&r.allowed)?;
        let cell = out.cell_mut(r.connective, &inputs);
        *cell = cell.intersect(allowed);
        if cell.is_empty() {
            return Err(NmatrixError::EmptyCell {
                connective: r.connective,
                inputs: base.render_inputs(&inputs),
            });
        }
    }
    if !restrictions.is_empty() {
        let tags: Vec<String> = restrictions.iter().map(|r| r.to_string()).collect();
        out.name = format!("{}[{}]", base.name, tags.join(";"));
    }
    Ok(out)
}

/// Whether every cell of `fine` is contained in the matching cell of `coarse`.
pub fn refines(fine: &Nmatrix, coarse: &Nmatrix) -> Result<bool, NmatrixError> {
    if fine.values != coarse.values || fine.designated != coarse.designated {
        return Err(NmatrixError::CarrierMismatch);
    }
    Ok(fine
        .cells()
        .iter()
        .all(|(c, i)| fine.cell(*c, i).is_subset(coarse.cell(*c, i))))
}

/// A total assignment of values to the formulas of a closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    closure: Arc<Closure>,
    names: Arc<[String]>,
    values: Vec<Value>,
}

impl Valuation {
    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, f: &Formula) -> Option<Value> {
        self.closure.index_of(f).map(|i| self.values[i])
    }

    pub fn get_name(&self, f: &Formula) -> Option<&str> {
        self.get(f).map(|v| self.names[v.0 as usize].as_str())
    }

    /// `(formula, value name)` pairs in closure order.
    pub fn entries(&self) -> impl Iterator<Item = (&Formula, &str)> {
        self.closure
            .items()
            .iter()
            .zip(&self.values)
            .map(|(f, v)| (f, self.names[v.0 as usize].as_str()))
    }

    /// Whether the assignment respects every cell of `m`.
    pub fn respects(&self, m: &Nmatrix) -> bool {
        self.closure
            .shapes()
            .iter()
            .zip(&self.values)
            .all(|(shape, v)| allowed_at(m, *shape, &self.values).contains(*v))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries()
            .map(|(formula, v)| format!("v({})={v}", formula.pretty()))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

fn allowed_at(m: &Nmatrix, shape: Shape, assign: &[Value]) -> ValueSet {
    match shape {
        Shape::Var => ValueSet::full(m.len()),
        Shape::Neg(a) => m.neg(assign[a]),
        Shape::Box(a) => m.box_of(assign[a]),
        Shape::Impl(a, b) => m.imp(assign[a], assign[b]),
    }
}

type Pruner<'a> = Box<dyn FnMut(usize, &[Value]) -> bool + 'a>;

/// Depth-first enumeration of the valuations of a closure. Values are tried
/// in matrix order and closure items are fixed in closure order, so the
/// sequence is deterministic.
pub struct Valuations<'a> {
    closure: Arc<Closure>,
    names: Arc<[String]>,
    m: &'a Nmatrix,
    assign: Vec<Value>,
    remaining: Vec<ValueSet>,
    started: bool,
    keep: Option<Pruner<'a>>,
}

impl<'a> Valuations<'a> {
    /// Installs a branch filter. It is called as soon as closure item `i` has
    /// been given a value, with the assignment prefix `0..=i`; returning
    /// `false` abandons every valuation extending that prefix.
    pub fn with_filter<F>(mut self, keep: F) -> Valuations<'a>
    where
        F: FnMut(usize, &[Value]) -> bool + 'a,
    {
        self.keep = Some(Box::new(keep));
        self
    }

    fn emit(&self) -> Valuation {
        let v = Valuation {
            closure: Arc::clone(&self.closure),
            names: Arc::clone(&self.names),
            values: self.assign.clone(),
        };
        debug_assert!(v.respects(self.m), "enumerated valuation violates a cell");
        v
    }
}

impl Iterator for Valuations<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        let n = self.closure.len();
        if !self.started {
            self.started = true;
            if n == 0 {
                return Some(self.emit());
            }
            let first = allowed_at(self.m, self.closure.shapes()[0], &self.assign);
            self.remaining.push(first);
            self.assign.push(Value(0));
        } else if self.remaining.is_empty() {
            return None;
        }
        loop {
            let top = self.remaining.len() - 1;
            let Some(v) = self.remaining[top].first() else {
                self.remaining.pop();
                self.assign.pop();
                if self.remaining.is_empty() {
                    return None;
                }
                continue;
            };
            self.remaining[top] = self.remaining[top].without(v);
            self.assign[top] = v;
            if let Some(keep) = self.keep.as_mut() {
                if !keep(top, &self.assign) {
                    continue;
                }
            }
            if top + 1 == n {
                return Some(self.emit());
            }
            let next = allowed_at(self.m, self.closure.shapes()[top + 1], &self.assign);
            self.remaining.push(next);
            self.assign.push(Value(0));
        }
    }
}

pub fn enumerate_valuations<'a>(closure: &Closure, m: &'a Nmatrix) -> Valuations<'a> {
    Valuations {
        closure: Arc::new(closure.clone()),
        names: m.values.clone().into(),
        m,
        assign: Vec::with_capacity(closure.len()),
        remaining: Vec::with_capacity(closure.len()),
        started: false,
        keep: None,
    }
}

/// Result of a consequence or tautology check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// The first counter-valuation in enumeration order.
    Invalid(Valuation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn witness(&self) -> Option<&Valuation> {
        match self {
            Verdict::Valid => None,
            Verdict::Invalid(w) => Some(w),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_closure: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_closure: DEFAULT_MAX_CLOSURE,
        }
    }
}

/// Decides `premises |= conclusion` in `m` under the default closure cap.
pub fn check_consequence(
    premises: &[Formula],
    conclusion: &Formula,
    m: &Nmatrix,
) -> Result<Verdict, NmatrixError> {
    check_consequence_with(premises, conclusion, m, SearchLimits::default())
}

pub fn check_consequence_with(
    premises: &[Formula],
    conclusion: &Formula,
    m: &Nmatrix,
    limits: SearchLimits,
) -> Result<Verdict, NmatrixError> {
    let closure = closure_of(premises.iter().chain(std::iter::once(conclusion)));
    if closure.len() > limits.max_closure {
        return Err(NmatrixError::ClosureTooLarge {
            size: closure.len(),
            limit: limits.max_closure,
        });
    }
    let mut is_premise = vec![false; closure.len()];
    for p in premises {
        is_premise[closure.index_of(p).expect("premise is in its own closure")] = true;
    }
    let goal = closure
        .index_of(conclusion)
        .expect("conclusion is in its own closure");
    let designated = m.designated();
    let witness = enumerate_valuations(&closure, m)
        .with_filter(move |i, assign| {
            let d = designated.contains(assign[i]);
            !(is_premise[i] && !d) && !(i == goal && d)
        })
        .next();
    Ok(match witness {
        None => Verdict::Valid,
        Some(w) => Verdict::Invalid(w),
    })
}

pub fn check_tautology(f: &Formula, m: &Nmatrix) -> Result<Verdict, NmatrixError> {
    check_consequence(&[], f, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn m(name: &str) -> Nmatrix {
        builtin_matrix(name).unwrap()
    }

    #[test]
    fn valuation_counts() {
        for name in ["TBAT", "TBAT_ORIGINAL", "W", "W_SIMPLIFIED"] {
            let c = closure_of([&p("p")]);
            assert_eq!(enumerate_valuations(&c, &m(name)).count(), 4);
        }
        let c = closure_of([&p("~p")]);
        assert_eq!(enumerate_valuations(&c, &m("TBAT")).count(), 4);
        let c = closure_of([&p("[]p")]);
        assert_eq!(enumerate_valuations(&c, &m("W")).count(), 8);
    }

    #[test]
    fn enumeration_order_is_depth_first_in_value_order() {
        let w = m("W");
        let c = closure_of([&p("[]p")]);
        let seq: Vec<String> = enumerate_valuations(&c, &w)
            .map(|v| v.to_string())
            .collect();
        assert_eq!(seq[0], "v(p)=P, v([]p)=P");
        assert_eq!(seq[1], "v(p)=P, v([]p)=t");
        assert_eq!(seq[2], "v(p)=t, v([]p)=f");
        assert_eq!(seq[7], "v(p)=R, v([]p)=R");
    }

    #[test]
    fn empty_closure_has_one_valuation() {
        let c = closure_of(std::iter::empty());
        assert_eq!(enumerate_valuations(&c, &m("W")).count(), 1);
    }

    #[test]
    fn filter_prunes_prefixes() {
        let w = m("W");
        let c = closure_of([&p("[]p")]);
        let kept: Vec<Valuation> = enumerate_valuations(&c, &w)
            .with_filter(|i, a| !(i == 0 && a[0] == Value(0)))
            .collect();
        assert_eq!(kept.len(), 6);
    }

    #[test]
    fn compose_n1_over_simplified() {
        let base = m("W_SIMPLIFIED");
        let n1 = strengthening("N1").unwrap();
        let out = compose(&base, std::slice::from_ref(&n1.restriction)).unwrap();
        let pv = out.value("P").unwrap();
        assert_eq!(out.render_set(out.neg(pv)), "{R}");
        assert_eq!(base.render_set(base.neg(pv)), "{f,R}");
    }

    #[test]
    fn compose_conflicting_restrictions_is_empty_cell() {
        let r1 = CellRestriction::new(Connective::Neg, &["P"], &["R"]);
        let r2 = CellRestriction::new(Connective::Neg, &["P"], &["f"]);
        let err = compose(&m("W"), &[r1, r2]).unwrap_err();
        assert!(matches!(
            err,
            NmatrixError::EmptyCell {
                connective: Connective::Neg,
                ..
            }
        ));
    }

    #[test]
    fn compose_rejects_unknown_values_and_arity() {
        let r = CellRestriction::new(Connective::Neg, &["X"], &["R"]);
        assert_eq!(
            compose(&m("W"), &[r]),
            Err(NmatrixError::UnknownValue("X".into()))
        );
        let r = CellRestriction::new(Connective::Impl, &["P"], &["R"]);
        assert!(matches!(
            compose(&m("W"), &[r]),
            Err(NmatrixError::Arity { .. })
        ));
    }

    #[test]
    fn restriction_text_round_trip() {
        for s in ["neg(P)={R}", "box(t)={f,R}", "impl(P,R)={R}"] {
            assert_eq!(CellRestriction::parse(s).unwrap().to_string(), s);
        }
        assert!(CellRestriction::parse("impl(P)={R}").is_err());
        assert!(CellRestriction::parse("neg(P)={}").is_err());
        assert!(CellRestriction::parse("nope").is_err());
    }

    #[test]
    fn refinement_examples() {
        assert!(refines(&m("TBAT"), &m("W_SIMPLIFIED")).unwrap());
        assert!(refines(&m("W"), &m("W")).unwrap());
        assert!(!refines(&m("W"), &m("TBAT")).unwrap());
        assert!(refines(&m("W_SIMPLIFIED"), &m("W")).unwrap());
    }

    #[test]
    fn refinement_needs_matching_carriers() {
        let tiny = Nmatrix::new(
            "two",
            vec!["1".into(), "0".into()],
            ValueSet::singleton(Value(0)),
            vec![ValueSet::singleton(Value(1)), ValueSet::singleton(Value(0))],
            vec![ValueSet::full(2); 2],
            vec![ValueSet::full(2); 4],
        )
        .unwrap();
        assert_eq!(refines(&tiny, &m("W")), Err(NmatrixError::CarrierMismatch));
    }

    #[test]
    fn constructor_enforces_invariants() {
        let two = || vec!["1".to_string(), "0".to_string()];
        let ok = || vec![ValueSet::full(2); 2];
        assert_eq!(
            Nmatrix::new(
                "x",
                two(),
                ValueSet::EMPTY,
                ok(),
                ok(),
                vec![ValueSet::full(2); 4]
            ),
            Err(NmatrixError::NoDesignated)
        );
        assert!(matches!(
            Nmatrix::new(
                "x",
                two(),
                ValueSet::singleton(Value(0)),
                vec![ValueSet::EMPTY, ValueSet::full(2)],
                ok(),
                vec![ValueSet::full(2); 4]
            ),
            Err(NmatrixError::EmptyCell { .. })
        ));
        assert!(matches!(
            Nmatrix::new("x", two(), ValueSet::singleton(Value(0)), ok(), ok(), ok()),
            Err(NmatrixError::MissingCell { .. })
        ));
        assert_eq!(
            Nmatrix::new("x", vec![], ValueSet::EMPTY, vec![], vec![], vec![]),
            Err(NmatrixError::NoValues)
        );
    }

    #[test]
    fn consequence_examples() {
        assert!(check_tautology(&p("[]p -> p"), &m("W")).unwrap().is_valid());
        assert!(
            check_consequence(&[p("p"), p("p -> q")], &p("q"), &m("TBAT"))
                .unwrap()
                .is_valid()
        );

        let nec = check_tautology(&p("[](p -> p)"), &m("TBAT")).unwrap();
        let w = nec.witness().expect("necessitation fails");
        assert_eq!(w.get_name(&p("p")), Some("t"));
        assert_eq!(w.get_name(&p("p -> p")), Some("t"));
        assert_eq!(w.get_name(&p("[](p -> p)")), Some("f"));

        let n1 = p("[]p -> []~~p");
        assert!(!check_tautology(&n1, &m("W")).unwrap().is_valid());
        let strengthened = compose(
            &m("W_SIMPLIFIED"),
            &[strengthening("N1").unwrap().restriction.clone()],
        )
        .unwrap();
        assert!(check_tautology(&n1, &strengthened).unwrap().is_valid());
    }

    #[test]
    fn tautology_examples() {
        let w = m("W");
        assert!(check_tautology(&p("p -> p"), &w).unwrap().is_valid());
        assert!(check_tautology(&p("p <-> ~~p"), &w).unwrap().is_valid());
        assert!(check_tautology(&p("[]p \\/ ~[]p"), &w).unwrap().is_valid());
    }

    #[test]
    fn witness_designates_premises_and_not_conclusion() {
        let w = m("W");
        let prem = p("[]p");
        let verdict = check_consequence(std::slice::from_ref(&prem), &p("[]~~p"), &w).unwrap();
        let wit = verdict.witness().unwrap();
        assert!(w.is_designated(wit.get(&prem).unwrap()));
        assert!(!w.is_designated(wit.get(&p("[]~~p")).unwrap()));
        assert!(wit.respects(&w));
    }

    #[test]
    fn closure_cap_is_enforced() {
        let big = p("[](a -> b) -> [](c -> d) -> [](e -> f) -> [](g -> h) -> [](i -> j)");
        let err = check_consequence_with(&[], &big, &m("W"), SearchLimits { max_closure: 10 })
            .unwrap_err();
        assert!(matches!(
            err,
            NmatrixError::ClosureTooLarge { limit: 10, .. }
        ));
    }

    #[test]
    fn premise_that_is_conclusion_is_valid() {
        assert!(check_consequence(&[p("[]q")], &p("[]q"), &m("W"))
            .unwrap()
            .is_valid());
    }
}
