//! First-order conditions over the accessibility relation.
//!
//! Grammar, loosest first: quantifiers (`forall x y.`, `exists z.`, also `∀`
//! and `∃`) extend as far right as possible; `->` is right associative; then
//! `|`, then `&`, then prefix `~`. Atoms are `R(x,y)` and `x = y`. Variables
//! left unbound are universally closed at the front in order of first
//! occurrence.

use std::fmt;

use thiserror::Error;

use super::Frame;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Rel(String, String),
    Eq(String, String),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Implies(Box<Condition>, Box<Condition>),
    Forall(String, Box<Condition>),
    Exists(String, Box<Condition>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("condition syntax error at {position}: {message}")]
pub struct ConditionError {
    pub position: usize,
    pub message: String,
}

impl Condition {
    /// Variables not bound by an enclosing quantifier, in order of first
    /// occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        fn go(c: &Condition, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let mut note = |v: &String, bound: &Vec<String>| {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            };
            match c {
                Condition::Rel(a, b) | Condition::Eq(a, b) => {
                    note(a, bound);
                    note(b, bound);
                }
                Condition::Not(x) => go(x, bound, out),
                Condition::And(a, b) | Condition::Or(a, b) | Condition::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Condition::Forall(v, x) | Condition::Exists(v, x) => {
                    bound.push(v.clone());
                    go(x, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Universal closure over the free variables.
    pub fn closed(self) -> Condition {
        let free = self.free_variables();
        free.into_iter()
            .rev()
            .fold(self, |body, v| Condition::Forall(v, Box::new(body)))
    }

    fn level(&self) -> u8 {
        match self {
            Condition::Forall(..) | Condition::Exists(..) => 0,
            Condition::Implies(..) => 1,
            Condition::Or(..) => 2,
            Condition::And(..) => 3,
            Condition::Not(_) | Condition::Rel(..) | Condition::Eq(..) => 4,
        }
    }

    fn write(&self, out: &mut String, min: u8, trailing: bool) {
        // A quantifier may only appear unparenthesised where nothing follows it.
        let needs = self.level() < min || (self.level() == 0 && !trailing);
        if needs {
            out.push('(');
        }
        let trailing = trailing || needs;
        match self {
            Condition::Rel(a, b) => out.push_str(&format!("R({a},{b})")),
            Condition::Eq(a, b) => out.push_str(&format!("{a} = {b}")),
            Condition::Not(x) => {
                out.push('~');
                x.write(out, 4, trailing);
            }
            Condition::And(a, b) => {
                a.write(out, 3, false);
                out.push_str(" & ");
                b.write(out, 4, trailing);
            }
            Condition::Or(a, b) => {
                a.write(out, 2, false);
                out.push_str(" | ");
                b.write(out, 3, trailing);
            }
            Condition::Implies(a, b) => {
                a.write(out, 2, false);
                out.push_str(" -> ");
                b.write(out, 1, trailing);
            }
            Condition::Forall(..) | Condition::Exists(..) => {
                let forall = matches!(self, Condition::Forall(..));
                out.push_str(if forall { "forall" } else { "exists" });
                let mut body = self;
                while let (Condition::Forall(v, x), true) | (Condition::Exists(v, x), false) =
                    (body, forall)
                {
                    out.push(' ');
                    out.push_str(v);
                    body = x;
                }
                out.push_str(". ");
                body.write(out, 0, trailing);
            }
        }
        if needs {
            out.push(')');
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut out, 0, true);
        f.write_str(&out)
    }
}

impl std::str::FromStr for Condition {
    type Err = ConditionError;

    fn from_str(s: &str) -> Result<Condition, ConditionError> {
        parse_condition(s)
    }
}

/// Parses a condition and closes it universally.
pub fn parse_condition(text: &str) -> Result<Condition, ConditionError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let c = p.condition()?;
    if let Some((at, tok)) = p.tokens.get(p.pos) {
        return Err(ConditionError {
            position: *at,
            message: format!("unexpected {tok}"),
        });
    }
    Ok(c.closed())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Forall,
    Exists,
    Dot,
    Comma,
    LParen,
    RParen,
    Eq,
    Neq,
    Not,
    And,
    Or,
    Implies,
    Iff,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s:?}"),
            other => write!(f, "{other:?}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ConditionError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let rest = &text[i..];
        let fixed: &[(&str, Tok)] = &[
            ("<->", Tok::Iff),
            ("->", Tok::Implies),
            ("!=", Tok::Neq),
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("∀", Tok::Forall),
            ("∃", Tok::Exists),
            ("→", Tok::Implies),
            ("↔", Tok::Iff),
            ("∧", Tok::And),
            ("∨", Tok::Or),
            ("¬", Tok::Not),
            ("≠", Tok::Neq),
            ("&", Tok::And),
            ("|", Tok::Or),
            ("~", Tok::Not),
            ("=", Tok::Eq),
            (".", Tok::Dot),
            (",", Tok::Comma),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        if let Some((s, tok)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((i, tok.clone()));
            for _ in 0..s.chars().count() {
                it.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&(_, c)) = it.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    it.next();
                } else {
                    break;
                }
            }
            let tok = match word.as_str() {
                "forall" | "all" => Tok::Forall,
                "exists" | "some" => Tok::Exists,
                _ => Tok::Ident(word),
            };
            out.push((i, tok));
            continue;
        }
        return Err(ConditionError {
            position: i,
            message: format!("unknown character {c:?}"),
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(i, _)| *i)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ConditionError> {
        Err(ConditionError {
            position: self.at(),
            message: message.into(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ConditionError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(format!("expected {tok}"))
        }
    }

    fn ident(&mut self) -> Result<String, ConditionError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s != "R" => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected a variable"),
        }
    }

    fn condition(&mut self) -> Result<Condition, ConditionError> {
        if matches!(self.peek(), Some(Tok::Forall | Tok::Exists)) {
            return self.quantified();
        }
        let left = self.implication()?;
        if self.eat(&Tok::Iff) {
            let right = self.condition()?;
            return Ok(Condition::And(
                Box::new(Condition::Implies(
                    Box::new(left.clone()),
                    Box::new(right.clone()),
                )),
                Box::new(Condition::Implies(Box::new(right), Box::new(left))),
            ));
        }
        Ok(left)
    }

    fn quantified(&mut self) -> Result<Condition, ConditionError> {
        let forall = matches!(self.peek(), Some(Tok::Forall));
        self.pos += 1;
        let mut vars = vec![self.ident()?];
        loop {
            self.eat(&Tok::Comma);
            match self.peek() {
                Some(Tok::Ident(v)) if v != "R" => vars.push(self.ident()?),
                _ => break,
            }
        }
        // The dot is optional: `∀x∀y (...)` is accepted too.
        self.eat(&Tok::Dot);
        let body = self.condition()?;
        Ok(vars.into_iter().rev().fold(body, |b, v| {
            if forall {
                Condition::Forall(v, Box::new(b))
            } else {
                Condition::Exists(v, Box::new(b))
            }
        }))
    }

    fn implication(&mut self) -> Result<Condition, ConditionError> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let right = if matches!(self.peek(), Some(Tok::Forall | Tok::Exists)) {
                self.quantified()?
            } else {
                self.implication()?
            };
            return Ok(Condition::Implies(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Condition, ConditionError> {
        let mut left = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let right = self.conjunction()?;
            left = Condition::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Condition, ConditionError> {
        let mut left = self.unary()?;
        while self.eat(&Tok::And) {
            let right = self.unary()?;
            left = Condition::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Condition, ConditionError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Condition::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Forall | Tok::Exists) => self.quantified(),
            Some(Tok::LParen) => {
                self.pos += 1;
                let c = self.condition()?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            Some(Tok::Ident(name)) if name == "R" => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let a = self.ident()?;
                self.expect(Tok::Comma)?;
                let b = self.ident()?;
                self.expect(Tok::RParen)?;
                Ok(Condition::Rel(a, b))
            }
            Some(Tok::Ident(_)) => {
                let a = self.ident()?;
                let negated = match self.peek() {
                    Some(Tok::Eq) => false,
                    Some(Tok::Neq) => true,
                    _ => return self.error("expected = or != after a variable"),
                };
                self.pos += 1;
                let b = self.ident()?;
                let eq = Condition::Eq(a, b);
                Ok(if negated {
                    Condition::Not(Box::new(eq))
                } else {
                    eq
                })
            }
            Some(tok) => self.error(format!("unexpected {tok}")),
            None => self.error("unexpected end of condition"),
        }
    }
}

/// Compiled form: variables resolved to environment slots.
enum Compiled {
    Rel(usize, usize),
    Eq(usize, usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Forall(usize, Box<Compiled>),
    Exists(usize, Box<Compiled>),
}

fn compile(c: &Condition, scope: &mut Vec<String>) -> Compiled {
    let slot = |v: &String, scope: &Vec<String>| {
        scope
            .iter()
            .rposition(|s| s == v)
            .unwrap_or_else(|| panic!("condition variable {v} is unbound; close it first"))
    };
    match c {
        Condition::Rel(a, b) => Compiled::Rel(slot(a, scope), slot(b, scope)),
        Condition::Eq(a, b) => Compiled::Eq(slot(a, scope), slot(b, scope)),
        Condition::Not(x) => Compiled::Not(Box::new(compile(x, scope))),
        Condition::And(a, b) => {
            Compiled::And(Box::new(compile(a, scope)), Box::new(compile(b, scope)))
        }
        Condition::Or(a, b) => {
            Compiled::Or(Box::new(compile(a, scope)), Box::new(compile(b, scope)))
        }
        Condition::Implies(a, b) => {
            Compiled::Implies(Box::new(compile(a, scope)), Box::new(compile(b, scope)))
        }
        Condition::Forall(v, x) | Condition::Exists(v, x) => {
            scope.push(v.clone());
            let at = scope.len() - 1;
            let body = Box::new(compile(x, scope));
            scope.pop();
            if matches!(c, Condition::Forall(..)) {
                Compiled::Forall(at, body)
            } else {
                Compiled::Exists(at, body)
            }
        }
    }
}

fn eval(c: &Compiled, fr: &Frame, env: &mut Vec<usize>) -> bool {
    match c {
        Compiled::Rel(a, b) => fr.related(env[*a], env[*b]),
        Compiled::Eq(a, b) => env[*a] == env[*b],
        Compiled::Not(x) => !eval(x, fr, env),
        Compiled::And(a, b) => eval(a, fr, env) && eval(b, fr, env),
        Compiled::Or(a, b) => eval(a, fr, env) || eval(b, fr, env),
        Compiled::Implies(a, b) => !eval(a, fr, env) || eval(b, fr, env),
        Compiled::Forall(slot, x) | Compiled::Exists(slot, x) => {
            let universal = matches!(c, Compiled::Forall(..));
            if env.len() <= *slot {
                env.resize(*slot + 1, 0);
            }
            for w in 0..fr.size() {
                env[*slot] = w;
                if eval(x, fr, env) != universal {
                    return !universal;
                }
            }
            universal
        }
    }
}

/// Evaluates a condition on a frame; unbound variables are treated as
/// universally quantified.
pub fn eval_condition(fr: &Frame, c: &Condition) -> bool {
    let closed = if c.free_variables().is_empty() {
        None
    } else {
        Some(c.clone().closed())
    };
    let compiled = compile(closed.as_ref().unwrap_or(c), &mut Vec::new());
    eval(&compiled, fr, &mut Vec::new())
}

/// Evaluation helper that compiles once for repeated use.
pub(crate) struct CompiledCondition(Compiled);

impl CompiledCondition {
    pub(crate) fn new(c: &Condition) -> CompiledCondition {
        CompiledCondition(compile(&c.clone().closed(), &mut Vec::new()))
    }

    pub(crate) fn holds(&self, fr: &Frame) -> bool {
        eval(&self.0, fr, &mut Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Condition {
        parse_condition(s).unwrap()
    }

    #[test]
    fn implicit_closure_matches_explicit() {
        assert_eq!(c("R(x,y) -> x = y"), c("forall x y. R(x,y) -> x = y"));
        assert_eq!(
            c("forall x y. R(x,y) -> x = y").to_string(),
            "forall x y. R(x,y) -> x = y"
        );
    }

    #[test]
    fn quantifier_scope_is_maximal() {
        let b7 = c("forall x y. R(x,y) -> exists z. (R(x,z) & R(y,z))");
        assert_eq!(
            b7.to_string(),
            "forall x y. R(x,y) -> (exists z. R(x,z) & R(y,z))"
        );
        assert_eq!(c(&b7.to_string()), b7);
        let scoped = c("exists z. R(x,z) & R(z,z)");
        match scoped {
            Condition::Forall(_, body) => assert!(matches!(*body, Condition::Exists(..))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(
            c("R(x,y) -> x = y | R(x,z) -> x = z"),
            c("R(x,y) -> ((x = y | R(x,z)) -> x = z)")
        );
        assert_eq!(c("R(x,y) & R(y,z) | x = z"), c("(R(x,y) & R(y,z)) | x = z"));
        assert_eq!(c("~R(x,y) & x = y"), c("(~R(x,y)) & x = y"));
    }

    #[test]
    fn unicode_and_aliases() {
        assert_eq!(c("∀x∀y (R(x,y) → x = y)"), c("forall x y. R(x,y) -> x = y"));
        assert_eq!(c("x != y"), c("~(x = y)"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_condition("R(x,y) -> ").unwrap_err();
        assert_eq!(e.position, 10);
        let e = parse_condition("R(x y)").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(parse_condition("x").is_err());
        assert!(parse_condition("R(x,y) $").is_err());
    }

    #[test]
    fn evaluation_examples() {
        let n3 = c("forall x y. R(x,y) -> x = y");
        let identity = Frame::new(2, &[(0, 0), (1, 1)]).unwrap();
        assert!(eval_condition(&identity, &n3));
        let step = Frame::new(2, &[(0, 1)]).unwrap();
        assert!(!eval_condition(&step, &n3));
        let empty = Frame::new(3, &[]).unwrap();
        assert!(eval_condition(&empty, &c("R(x,y) -> R(y,x)")));
        assert!(eval_condition(&empty, &c("R(x,y) & R(y,z) -> R(x,z)")));
    }

    #[test]
    fn shadowing_uses_innermost_binding() {
        let fr = Frame::new(2, &[(0, 1)]).unwrap();
        // The inner z ranges independently of the outer one.
        assert!(eval_condition(
            &fr,
            &c("forall z. exists z. R(z,z) | ~R(z,z)")
        ));
        assert!(!eval_condition(&fr, &c("forall z. exists z. R(z,z)")));
    }
}
