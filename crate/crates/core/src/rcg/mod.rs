//! Positive simple Range Concatenation Grammars.
//!
//! A clause rewrites a predicate over argument strings of terminals and
//! variables into predicate calls over single variables. In a simple grammar
//! every variable occurs exactly once on each side.

mod forest;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub use forest::{count_derivations, enumerate, Fact, Forest, ForestStep, RcgDerivation};
pub use parser::{parse, parse_ordered, NoParse, ParseStats, RcgError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Terminal(String),
    Var(String),
}

impl Term {
    pub fn t(s: &str) -> Term {
        Term::Terminal(s.into())
    }

    pub fn v(s: &str) -> Term {
        Term::Var(s.into())
    }
}

/// A right-hand side predicate call; every argument is one variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Call {
    pub pred: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub pred: String,
    pub args: Vec<Vec<Term>>,
    pub rhs: Vec<Call>,
}

impl Clause {
    pub fn new(pred: &str, args: Vec<Vec<Term>>, rhs: Vec<Call>) -> Self {
        Clause { pred: pred.into(), args, rhs }
    }

    pub fn call(pred: &str, args: &[&str]) -> Call {
        Call { pred: pred.into(), args: args.iter().map(|a| a.to_string()).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleRcg {
    pub clauses: Vec<Clause>,
}

/// Half-open span of input positions; `lo == hi` is the empty range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Range {
    pub lo: usize,
    pub hi: usize,
}

impl Range {
    pub fn new(lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi);
        Range { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }
}

impl Serialize for Range {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

fn write_args<T: fmt::Display>(f: &mut fmt::Formatter<'_>, args: &[Vec<T>]) -> fmt::Result {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        if arg.is_empty() {
            f.write_str("Eps")?;
        }
        for (j, t) in arg.iter().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Terminal(s) | Term::Var(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        write_args(f, &self.args)?;
        f.write_str(") -> ")?;
        if self.rhs.is_empty() {
            return f.write_str("Eps");
        }
        for (i, c) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}({})", c.pred, c.args.join(","))?;
        }
        Ok(())
    }
}

impl SimpleRcg {
    /// One clause per line, sorted by predicate name (stable within a
    /// predicate).
    pub fn dump(&self) -> String {
        let mut lines: Vec<&Clause> = self.clauses.iter().collect();
        lines.sort_by(|a, b| a.pred.cmp(&b.pred));
        lines.iter().map(|c| format!("{c}\n")).collect()
    }
}

impl fmt::Display for SimpleRcg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct RcgSyntaxError {
    pub line: usize,
    pub reason: String,
}

/// Reads the textual clause format. A symbol in an LHS argument is a variable
/// iff it occurs in the clause's right-hand side; `Eps` is the empty string.
impl FromStr for SimpleRcg {
    type Err = RcgSyntaxError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut clauses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let err = |reason: &str| RcgSyntaxError { line: i + 1, reason: reason.into() };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("missing '->'"))?;
            let (pred, args) = split_call(lhs.trim()).ok_or_else(|| err("malformed left-hand side"))?;
            let rhs = rhs.trim();
            let mut calls = Vec::new();
            if rhs != "Eps" {
                let mut rest = rhs;
                while !rest.is_empty() {
                    let close = rest.find(')').ok_or_else(|| err("unclosed call"))?;
                    let (p, a) = split_call(&rest[..=close]).ok_or_else(|| err("malformed call"))?;
                    let vars = a.iter().map(|arg| arg.trim().to_string()).filter(|v| !v.is_empty()).collect::<Vec<_>>();
                    calls.push(Call { pred: p.to_string(), args: vars });
                    rest = rest[close + 1..].trim_start();
                }
            }
            let vars: BTreeSet<&str> = calls.iter().flat_map(|c| c.args.iter().map(String::as_str)).collect();
            let args = args
                .iter()
                .map(|arg| {
                    let arg = arg.trim();
                    if arg == "Eps" {
                        return Vec::new();
                    }
                    arg.split_whitespace().map(|s| if vars.contains(s) { Term::v(s) } else { Term::t(s) }).collect()
                })
                .collect();
            clauses.push(Clause { pred: pred.into(), args, rhs: calls });
        }
        Ok(SimpleRcg { clauses })
    }
}

fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let pred = s[..open].trim();
    if pred.is_empty() {
        return None;
    }
    let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').collect() };
    Some((pred, args))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RcgDiagnostic {
    pub clause: usize,
    pub message: String,
}

impl fmt::Display for RcgDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}: {}", self.clause, self.message)
    }
}

/// Empty iff every clause is simple (linear, non-erasing, single-variable RHS
/// arguments) and predicate arities agree everywhere.
pub fn check_simple<'g>(g: &'g SimpleRcg) -> Vec<RcgDiagnostic> {
    let mut out = Vec::new();
    let mut arity: BTreeMap<&'g str, (usize, usize)> = BTreeMap::new();
    let mut check_arity = |pred: &'g str, n: usize, clause: usize, out: &mut Vec<RcgDiagnostic>| match arity.get(pred) {
        Some(&(m, first)) if m != n => out.push(RcgDiagnostic {
            clause,
            message: format!("predicate {pred} used with arity {n}, but with arity {m} in clause {first}"),
        }),
        Some(_) => {}
        None => {
            arity.insert(pred, (n, clause));
        }
    };

    for (ci, c) in g.clauses.iter().enumerate() {
        check_arity(&c.pred, c.args.len(), ci, &mut out);
        let mut lhs_vars: BTreeMap<&str, usize> = BTreeMap::new();
        for t in c.args.iter().flatten() {
            match t {
                Term::Var(v) => *lhs_vars.entry(v).or_default() += 1,
                Term::Terminal(s) if s.is_empty() => out.push(RcgDiagnostic { clause: ci, message: "empty terminal".into() }),
                Term::Terminal(_) => {}
            }
        }
        let mut rhs_vars: BTreeMap<&str, usize> = BTreeMap::new();
        for call in &c.rhs {
            check_arity(&call.pred, call.args.len(), ci, &mut out);
            for v in &call.args {
                *rhs_vars.entry(v).or_default() += 1;
            }
        }
        for (v, n) in &lhs_vars {
            if *n > 1 {
                out.push(RcgDiagnostic { clause: ci, message: format!("variable {v} occurs {n} times in the LHS") });
            }
            if !rhs_vars.contains_key(v) {
                out.push(RcgDiagnostic { clause: ci, message: format!("variable {v} does not occur in the RHS") });
            }
        }
        for (v, n) in &rhs_vars {
            if *n > 1 {
                out.push(RcgDiagnostic { clause: ci, message: format!("variable {v} occurs {n} times in the RHS") });
            }
            if !lhs_vars.contains_key(v) {
                out.push(RcgDiagnostic { clause: ci, message: format!("variable {v} does not occur in the LHS") });
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const ABC: &str = "S(X Y Z) -> A(X,Y,Z)
A(a X,b Y,c Z) -> A(X,Y,Z)
A(Eps,Eps,Eps) -> Eps";

    #[test]
    fn textbook_grammar_is_simple() {
        let g: SimpleRcg = ABC.parse().unwrap();
        assert_eq!(g.clauses.len(), 3);
        assert_eq!(g.clauses[1].args[0], vec![Term::t("a"), Term::v("X")]);
        assert_eq!(check_simple(&g), vec![]);
    }

    #[test]
    fn text_round_trip() {
        let g: SimpleRcg = ABC.parse().unwrap();
        assert_eq!(g.to_string().trim_end(), ABC);
    }

    #[test]
    fn duplicated_lhs_variable() {
        let g = SimpleRcg { clauses: vec![Clause::new("S", vec![vec![Term::v("X"), Term::v("X")]], vec![Clause::call("A", &["X"])])] };
        let d = check_simple(&g);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("occurs 2 times in the LHS"));
    }

    #[test]
    fn arity_mismatch() {
        let g: SimpleRcg = "S(X) -> A(X)\nA(X,Y) -> B(X) C(Y)\nB(b) -> Eps\nC(c) -> Eps".parse().unwrap();
        let d = check_simple(&g);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("arity"));
    }

    #[test]
    fn erasing_clause() {
        let g = SimpleRcg { clauses: vec![Clause::new("S", vec![vec![Term::v("X")]], vec![])] };
        assert_eq!(check_simple(&g).len(), 1);
    }
}
