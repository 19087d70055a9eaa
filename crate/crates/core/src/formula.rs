//! Modal formulas over `~`, `->` and `[]`, plus schemas with metavariables.
//!
//! Conjunction, disjunction, the biconditional and the diamond are parse-time
//! sugar:
//!
//! | sugar      | expansion          |
//! |------------|--------------------|
//! | `a /\ b`   | `~(a -> ~b)`       |
//! | `a \/ b`   | `~a -> b`          |
//! | `a <-> b`  | `(a -> b) /\ (b -> a)` |
//! | `<>a`      | `~[]~a`            |
//!
//! Formulas are compared structurally. Two formulas that differ only by the
//! order of a conjunction are different formulas, and the Nmatrix semantics
//! is allowed to give them different values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A formula of the core language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Neg(Box<Formula>),
    Impl(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(body: Formula) -> Formula {
        Formula::Neg(Box::new(body))
    }

    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::Impl(Box::new(left), Box::new(right))
    }

    pub fn boxed(body: Formula) -> Formula {
        Formula::Box(Box::new(body))
    }

    /// `~(a -> ~b)`
    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::neg(Formula::implies(left, Formula::neg(right)))
    }

    /// `~a -> b`
    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::implies(Formula::neg(left), right)
    }

    pub fn iff(left: Formula, right: Formula) -> Formula {
        Formula::and(
            Formula::implies(left.clone(), right.clone()),
            Formula::implies(right, left),
        )
    }

    /// `~[]~a`
    pub fn diamond(body: Formula) -> Formula {
        Formula::neg(Formula::boxed(Formula::neg(body)))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) => 1,
            Formula::Neg(a) | Formula::Box(a) => 1 + a.size(),
            Formula::Impl(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::Neg(a) => a.modal_depth(),
            Formula::Box(a) => 1 + a.modal_depth(),
            Formula::Impl(a, b) => a.modal_depth().max(b.modal_depth()),
        }
    }

    /// Variables in order of first occurrence (left to right).
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        self.collect_vars(&mut seen);
        seen
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Formula::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Formula::Neg(a) | Formula::Box(a) => a.collect_vars(out),
            Formula::Impl(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Uniform substitution of formulas for variables.
    pub fn substitute(&self, sub: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Var(v) => sub.get(v).cloned().unwrap_or_else(|| self.clone()),
            Formula::Neg(a) => Formula::neg(a.substitute(sub)),
            Formula::Box(a) => Formula::boxed(a.substitute(sub)),
            Formula::Impl(a, b) => Formula::implies(a.substitute(sub), b.substitute(sub)),
        }
    }

    /// All distinct subformulas, including `self`.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.contains(self) {
            return;
        }
        match self {
            Formula::Var(_) => {}
            Formula::Neg(a) | Formula::Box(a) => a.collect_subformulas(out),
            Formula::Impl(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
        }
        out.insert(self.clone());
    }

    /// Core-connective ASCII rendering, e.g. `~([]p -> ~q)`.
    pub fn print(&self) -> String {
        let mut out = String::new();
        write_tree(self, &mut out, false, 0);
        out
    }

    /// Rendering that folds `~(a -> ~b)` back to `a /\ b` and `~[]~a` to `<>a`.
    /// Parsing the result gives back the same formula.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        write_tree(self, &mut out, true, 0);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parse a formula. Metavariables are rejected.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let pattern = Parser::new(text, false)?.parse_all()?;
    Ok(pattern
        .into_formula()
        .expect("parser in formula mode never yields metavariables"))
}

/// Render a formula with core connectives only.
pub fn print(f: &Formula) -> String {
    f.print()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected {0}")]
    Unexpected(String),
    #[error("metavariable {0:?} not allowed in a formula")]
    MetavariableInFormula(String),
}

// ---------------------------------------------------------------------------
// Schemas

/// A formula-shaped tree whose leaves may be metavariables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Var(String),
    Meta(String),
    Neg(Box<Pattern>),
    Impl(Box<Pattern>, Box<Pattern>),
    Box(Box<Pattern>),
}

impl Pattern {
    fn neg(p: Pattern) -> Pattern {
        Pattern::Neg(Box::new(p))
    }

    fn implies(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Impl(Box::new(a), Box::new(b))
    }

    fn boxed(p: Pattern) -> Pattern {
        Pattern::Box(Box::new(p))
    }

    fn and(a: Pattern, b: Pattern) -> Pattern {
        Pattern::neg(Pattern::implies(a, Pattern::neg(b)))
    }

    fn or(a: Pattern, b: Pattern) -> Pattern {
        Pattern::implies(Pattern::neg(a), b)
    }

    fn iff(a: Pattern, b: Pattern) -> Pattern {
        Pattern::and(
            Pattern::implies(a.clone(), b.clone()),
            Pattern::implies(b, a),
        )
    }

    fn diamond(p: Pattern) -> Pattern {
        Pattern::neg(Pattern::boxed(Pattern::neg(p)))
    }

    fn into_formula(self) -> Result<Formula, String> {
        Ok(match self {
            Pattern::Var(v) => Formula::Var(v),
            Pattern::Meta(m) => return Err(m),
            Pattern::Neg(a) => Formula::neg(a.into_formula()?),
            Pattern::Box(a) => Formula::boxed(a.into_formula()?),
            Pattern::Impl(a, b) => Formula::implies(a.into_formula()?, b.into_formula()?),
        })
    }

    fn collect_metas(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(_) => {}
            Pattern::Meta(m) => {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
            Pattern::Neg(a) | Pattern::Box(a) => a.collect_metas(out),
            Pattern::Impl(a, b) => {
                a.collect_metas(out);
                b.collect_metas(out);
            }
        }
    }
}

/// Metavariable bindings.
pub type Substitution = BTreeMap<String, Formula>;

/// An axiom schema. Metavariables are written as uppercase identifiers
/// (`A`, `B`, `Phi`) or as the Greek letters `φ ψ χ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    pattern: Pattern,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("no binding for metavariable {0}")]
    MissingBinding(String),
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema, ParseError> {
        let pattern = Parser::new(text, true)?.parse_all()?;
        Ok(Schema { pattern })
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// Metavariables in order of first occurrence.
    pub fn metavariables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.pattern.collect_metas(&mut out);
        out
    }

    pub fn instantiate(&self, sub: &Substitution) -> Result<Formula, SchemaError> {
        fn go(p: &Pattern, sub: &Substitution) -> Result<Formula, SchemaError> {
            Ok(match p {
                Pattern::Var(v) => Formula::var(v.clone()),
                Pattern::Meta(m) => sub
                    .get(m)
                    .cloned()
                    .ok_or_else(|| SchemaError::MissingBinding(m.clone()))?,
                Pattern::Neg(a) => Formula::neg(go(a, sub)?),
                Pattern::Box(a) => Formula::boxed(go(a, sub)?),
                Pattern::Impl(a, b) => Formula::implies(go(a, sub)?, go(b, sub)?),
            })
        }
        go(&self.pattern, sub)
    }

    /// First-order matching of `f` against the schema.
    pub fn matches(&self, f: &Formula) -> Option<Substitution> {
        fn go(p: &Pattern, f: &Formula, sub: &mut Substitution) -> bool {
            match (p, f) {
                (Pattern::Meta(m), _) => match sub.get(m) {
                    Some(bound) => bound == f,
                    None => {
                        sub.insert(m.clone(), f.clone());
                        true
                    }
                },
                (Pattern::Var(a), Formula::Var(b)) => a == b,
                (Pattern::Neg(a), Formula::Neg(b)) | (Pattern::Box(a), Formula::Box(b)) => {
                    go(a, b, sub)
                }
                (Pattern::Impl(a1, a2), Formula::Impl(b1, b2)) => {
                    go(a1, b1, sub) && go(a2, b2, sub)
                }
                _ => false,
            }
        }
        let mut sub = Substitution::new();
        go(&self.pattern, f, &mut sub).then_some(sub)
    }

    /// Instance with each metavariable replaced by a distinct fresh letter
    /// (`p`, `q`, `r`, `s`, ...) in order of first occurrence.
    pub fn fresh_instance(&self) -> Formula {
        let sub: Substitution = self
            .metavariables()
            .into_iter()
            .zip(fresh_letters())
            .map(|(m, v)| (m, Formula::var(v)))
            .collect();
        self.instantiate(&sub)
            .expect("every metavariable is bound to a fresh letter")
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        write_tree(&self.pattern, &mut out, false, 0);
        out
    }

    pub fn pretty(&self) -> String {
        let mut out = String::new();
        write_tree(&self.pattern, &mut out, true, 0);
        out
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl FromStr for Schema {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::parse(s)
    }
}

pub fn instantiate(s: &Schema, sub: &Substitution) -> Result<Formula, SchemaError> {
    s.instantiate(sub)
}

pub fn match_schema(f: &Formula, s: &Schema) -> Option<Substitution> {
    s.matches(f)
}

fn fresh_letters() -> impl Iterator<Item = String> {
    const BASE: [&str; 8] = ["p", "q", "r", "s", "u", "v", "w", "x"];
    (0..).map(|i| {
        if i < BASE.len() {
            BASE[i].to_string()
        } else {
            format!("p{}", i - BASE.len() + 1)
        }
    })
}

// ---------------------------------------------------------------------------
// Closure

/// Shape of a closure item in terms of the indices of its immediate
/// subformulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Var,
    Neg(usize),
    Box(usize),
    Impl(usize, usize),
}

/// Duplicate-free, subformula-closed list of formulas in topological order.
#[derive(Clone, Debug)]
pub struct Closure {
    items: Vec<Formula>,
    shapes: Vec<Shape>,
    index: HashMap<Formula, usize>,
}

impl PartialEq for Closure {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Eq for Closure {}

impl Closure {
    pub fn items(&self) -> &[Formula] {
        &self.items
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }
}

/// Subformula closure of a set of formulas, ordered by size and then by
/// printed form.
pub fn closure_of<'a, I>(formulas: I) -> Closure
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut all = BTreeSet::new();
    for f in formulas {
        all.extend(f.subformulas());
    }
    let mut items: Vec<(usize, String, Formula)> =
        all.into_iter().map(|f| (f.size(), f.print(), f)).collect();
    items.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let items: Vec<Formula> = items.into_iter().map(|(_, _, f)| f).collect();
    let index: HashMap<Formula, usize> = items
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();
    let shapes = items
        .iter()
        .map(|f| match f {
            Formula::Var(_) => Shape::Var,
            Formula::Neg(a) => Shape::Neg(index[a.as_ref()]),
            Formula::Box(a) => Shape::Box(index[a.as_ref()]),
            Formula::Impl(a, b) => Shape::Impl(index[a.as_ref()], index[b.as_ref()]),
        })
        .collect();
    Closure {
        items,
        shapes,
        index,
    }
}

// ---------------------------------------------------------------------------
// Printing

enum Node<'a, T> {
    Leaf(&'a str),
    Neg(&'a T),
    Impl(&'a T, &'a T),
    Box(&'a T),
}

trait Tree: Sized {
    fn node(&self) -> Node<'_, Self>;
}

impl Tree for Formula {
    fn node(&self) -> Node<'_, Self> {
        match self {
            Formula::Var(v) => Node::Leaf(v),
            Formula::Neg(a) => Node::Neg(a),
            Formula::Impl(a, b) => Node::Impl(a, b),
            Formula::Box(a) => Node::Box(a),
        }
    }
}

impl Tree for Pattern {
    fn node(&self) -> Node<'_, Self> {
        match self {
            Pattern::Var(v) | Pattern::Meta(v) => Node::Leaf(v),
            Pattern::Neg(a) => Node::Neg(a),
            Pattern::Impl(a, b) => Node::Impl(a, b),
            Pattern::Box(a) => Node::Box(a),
        }
    }
}

const LEVEL_IMPL: u8 = 0;
const LEVEL_AND: u8 = 1;
const LEVEL_PREFIX: u8 = 2;

/// Recognizes `~(a -> ~b)`.
fn as_conjunction<T: Tree>(t: &T) -> Option<(&T, &T)> {
    if let Node::Neg(inner) = t.node() {
        if let Node::Impl(a, nb) = inner.node() {
            if let Node::Neg(b) = nb.node() {
                return Some((a, b));
            }
        }
    }
    None
}

/// Recognizes `~[]~a`.
fn as_diamond<T: Tree>(t: &T) -> Option<&T> {
    if let Node::Neg(inner) = t.node() {
        if let Node::Box(nb) = inner.node() {
            if let Node::Neg(a) = nb.node() {
                return Some(a);
            }
        }
    }
    None
}

fn write_tree<T: Tree>(t: &T, out: &mut String, pretty: bool, min_level: u8) {
    if pretty {
        if let Some((a, b)) = as_conjunction(t) {
            let paren = min_level > LEVEL_AND;
            if paren {
                out.push('(');
            }
            write_tree(a, out, pretty, LEVEL_AND);
            out.push_str(" /\\ ");
            write_tree(b, out, pretty, LEVEL_PREFIX);
            if paren {
                out.push(')');
            }
            return;
        }
        if let Some(a) = as_diamond(t) {
            out.push_str("<>");
            write_tree(a, out, pretty, LEVEL_PREFIX);
            return;
        }
    }
    match t.node() {
        Node::Leaf(name) => out.push_str(name),
        Node::Neg(a) => {
            out.push('~');
            write_tree(a, out, pretty, LEVEL_PREFIX);
        }
        Node::Box(a) => {
            out.push_str("[]");
            write_tree(a, out, pretty, LEVEL_PREFIX);
        }
        Node::Impl(a, b) => {
            let paren = min_level > LEVEL_IMPL;
            if paren {
                out.push('(');
            }
            write_tree(a, out, pretty, LEVEL_AND);
            out.push_str(" -> ");
            write_tree(b, out, pretty, LEVEL_IMPL);
            if paren {
                out.push(')');
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Meta(String),
    Not,
    Box,
    Diamond,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Meta(s) => write!(f, "{s:?}"),
            Tok::Not => f.write_str("'~'"),
            Tok::Box => f.write_str("'[]'"),
            Tok::Diamond => f.write_str("'<>'"),
            Tok::And => f.write_str("'/\\'"),
            Tok::Or => f.write_str("'\\/'"),
            Tok::Implies => f.write_str("'->'"),
            Tok::Iff => f.write_str("'<->'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
        }
    }
}

fn tokenize(text: &str, allow_meta: bool) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let unknown = |pos: usize, s: String| ParseError {
        position: pos,
        kind: ParseErrorKind::UnknownToken(s),
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '~' | '¬' => {
                i += 1;
                Tok::Not
            }
            '□' => {
                i += 1;
                Tok::Box
            }
            '◇' => {
                i += 1;
                Tok::Diamond
            }
            '∧' => {
                i += 1;
                Tok::And
            }
            '∨' => {
                i += 1;
                Tok::Or
            }
            '→' => {
                i += 1;
                Tok::Implies
            }
            '↔' => {
                i += 1;
                Tok::Iff
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' if rest.starts_with("[]") => {
                i += 2;
                Tok::Box
            }
            '<' if rest.starts_with("<->") => {
                i += 3;
                Tok::Iff
            }
            '<' if rest.starts_with("<>") => {
                i += 2;
                Tok::Diamond
            }
            '/' if rest.starts_with("/\\") => {
                i += 2;
                Tok::And
            }
            '\\' if rest.starts_with("\\/") => {
                i += 2;
                Tok::Or
            }
            '-' if rest.starts_with("->") => {
                i += 2;
                Tok::Implies
            }
            'φ' | 'ψ' | 'χ' if allow_meta => {
                i += 1;
                Tok::Meta(c.to_string())
            }
            c if c.is_ascii_lowercase() => {
                while i < chars.len()
                    && (chars[i].is_ascii_lowercase()
                        || chars[i].is_ascii_digit()
                        || chars[i] == '_')
                {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            c if c.is_ascii_uppercase() && allow_meta => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Meta(chars[start..i].iter().collect())
            }
            c if c.is_ascii_uppercase() => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::MetavariableInFormula(name),
                });
            }
            other => return Err(unknown(start, other.to_string())),
        };
        toks.push((start, tok));
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str, allow_meta: bool) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: tokenize(text, allow_meta)?,
            pos: 0,
            end: text.chars().count(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn error_here(&self) -> ParseError {
        match self.toks.get(self.pos) {
            Some((p, t)) => ParseError {
                position: *p,
                kind: ParseErrorKind::Unexpected(t.to_string()),
            },
            None => ParseError {
                position: self.end,
                kind: ParseErrorKind::UnexpectedEnd,
            },
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(mut self) -> Result<Pattern, ParseError> {
        let p = self.iff()?;
        if self.pos < self.toks.len() {
            return Err(self.error_here());
        }
        Ok(p)
    }

    fn iff(&mut self) -> Result<Pattern, ParseError> {
        let left = self.implication()?;
        if self.eat(&Tok::Iff) {
            let right = self.iff()?;
            return Ok(Pattern::iff(left, right));
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Pattern, ParseError> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let right = self.implication()?;
            return Ok(Pattern::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Pattern, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let right = self.conjunction()?;
            acc = Pattern::or(acc, right);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Pattern, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            let right = self.unary()?;
            acc = Pattern::and(acc, right);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Pattern, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here());
        };
        match tok {
            Tok::Not => {
                self.pos += 1;
                Ok(Pattern::neg(self.unary()?))
            }
            Tok::Box => {
                self.pos += 1;
                Ok(Pattern::boxed(self.unary()?))
            }
            Tok::Diamond => {
                self.pos += 1;
                Ok(Pattern::diamond(self.unary()?))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Pattern::Var(name))
            }
            Tok::Meta(name) => {
                self.pos += 1;
                Ok(Pattern::Meta(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error_here());
                }
                Ok(inner)
            }
            _ => Err(self.error_here()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn v(s: &str) -> Formula {
        Formula::var(s)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            p("[]p -> p"),
            Formula::implies(Formula::boxed(v("p")), v("p"))
        );
        assert_eq!(
            p("p /\\ q"),
            Formula::neg(Formula::implies(v("p"), Formula::neg(v("q"))))
        );
        assert_eq!(p("<>p"), Formula::neg(Formula::boxed(Formula::neg(v("p")))));
    }

    #[test]
    fn unicode_and_ascii_agree() {
        assert_eq!(
            p("□p → ¬◇q ∧ r ∨ s ↔ t"),
            p("[]p -> ~<>q /\\ r \\/ s <-> t")
        );
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("p -> q -> r"), p("p -> (q -> r)"));
        assert_eq!(p("p /\\ q /\\ r"), p("(p /\\ q) /\\ r"));
        assert_eq!(p("p \\/ q /\\ r"), p("p \\/ (q /\\ r)"));
        assert_eq!(p("p /\\ q -> r"), p("(p /\\ q) -> r"));
        assert_eq!(p("p -> q <-> r"), p("(p -> q) <-> r"));
        assert_eq!(p("~[]~p"), p("<>p"));
        assert_eq!(p("[]p /\\ q"), p("([]p) /\\ q"));
    }

    #[test]
    fn sugar_expansions() {
        assert_eq!(p("p \\/ q"), Formula::implies(Formula::neg(v("p")), v("q")));
        assert_eq!(
            p("p <-> q"),
            Formula::and(
                Formula::implies(v("p"), v("q")),
                Formula::implies(v("q"), v("p"))
            )
        );
    }

    #[test]
    fn print_examples() {
        assert_eq!(
            Formula::implies(Formula::boxed(v("p")), v("p")).print(),
            "[]p -> p"
        );
        assert_eq!(Formula::neg(Formula::neg(v("p"))).print(), "~~p");
        assert_eq!(
            Formula::implies(v("p"), Formula::implies(v("q"), v("p"))).print(),
            "p -> q -> p"
        );
        assert_eq!(p("(p -> q) -> p").print(), "(p -> q) -> p");
        assert_eq!(p("[](p -> q)").print(), "[](p -> q)");
    }

    #[test]
    fn pretty_folds_sugar() {
        assert_eq!(
            p("[]p /\\ ~[]q /\\ q -> []p").pretty(),
            "[]p /\\ ~[]q /\\ q -> []p"
        );
        assert_eq!(p("<>[]p").pretty(), "<>[]p");
        assert_eq!(p("p /\\ (q /\\ r)").pretty(), "p /\\ (q /\\ r)");
        assert_eq!(p("(p -> q) /\\ r").pretty(), "(p -> q) /\\ r");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse("p -> ").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(e.position, 5);

        let e = parse("p & q").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(matches!(e.kind, ParseErrorKind::UnknownToken(_)));

        let e = parse("(p -> q").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);

        let e = parse("p q").unwrap_err();
        assert_eq!(e.position, 2);

        let e = parse("[]A").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MetavariableInFormula(_)));
    }

    #[test]
    fn closure_examples() {
        let c = closure_of([&p("[]p -> p")]);
        assert_eq!(c.items(), &[p("p"), p("[]p"), p("[]p -> p")]);

        let c = closure_of([&p("p -> q"), &p("q -> p")]);
        assert_eq!(c.items(), &[p("p"), p("q"), p("p -> q"), p("q -> p")]);

        let c = closure_of([&p("~~p"), &p("p")]);
        assert_eq!(c.items(), &[p("p"), p("~p"), p("~~p")]);
    }

    #[test]
    fn closure_shapes_point_backwards() {
        let c = closure_of([&p("[](p -> q) -> ([]p -> []q)")]);
        for (i, s) in c.shapes().iter().enumerate() {
            match *s {
                Shape::Var => {}
                Shape::Neg(a) | Shape::Box(a) => assert!(a < i),
                Shape::Impl(a, b) => assert!(a < i && b < i),
            }
        }
    }

    #[test]
    fn instantiate_examples() {
        let s = Schema::parse("[]A -> A").unwrap();
        let sub = Substitution::from([("A".into(), p("p -> q"))]);
        assert_eq!(s.instantiate(&sub).unwrap(), p("[](p -> q) -> (p -> q)"));

        let s = Schema::parse("φ -> ψ -> φ").unwrap();
        let sub = Substitution::from([("φ".into(), p("p")), ("ψ".into(), p("p"))]);
        assert_eq!(s.instantiate(&sub).unwrap(), p("p -> p -> p"));

        let s = Schema::parse("[]A -> []~~A").unwrap();
        let sub = Substitution::from([("A".into(), p("p"))]);
        assert_eq!(s.instantiate(&sub).unwrap(), p("[]p -> []~~p"));
    }

    #[test]
    fn instantiate_missing_binding() {
        let s = Schema::parse("A -> B").unwrap();
        let sub = Substitution::from([("A".into(), p("p"))]);
        assert_eq!(
            s.instantiate(&sub),
            Err(SchemaError::MissingBinding("B".into()))
        );
    }

    #[test]
    fn match_examples() {
        let t = Schema::parse("[]A -> A").unwrap();
        assert_eq!(
            t.matches(&p("[](p -> q) -> (p -> q)")),
            Some(Substitution::from([("A".into(), p("p -> q"))]))
        );
        assert_eq!(t.matches(&p("[]p -> []q")), None);

        let p1 = Schema::parse("A -> B -> A").unwrap();
        assert_eq!(
            p1.matches(&p("p -> q -> p")),
            Some(Substitution::from([
                ("A".into(), p("p")),
                ("B".into(), p("q"))
            ]))
        );
    }

    #[test]
    fn schema_with_object_variable() {
        let s = Schema::parse("A -> p").unwrap();
        assert!(s.matches(&p("q -> p")).is_some());
        assert!(s.matches(&p("q -> r")).is_none());
    }

    #[test]
    fn fresh_instance_uses_distinct_letters() {
        let s = Schema::parse("A -> (B -> C) -> A").unwrap();
        assert_eq!(s.fresh_instance(), p("p -> (q -> r) -> p"));
    }
}
