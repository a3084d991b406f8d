//! Agenda-driven bottom-up RCG recognition.
//!
//! Facts are instantiated predicates `P(ρ1,…,ρk)`. Each new fact is matched
//! against every clause that calls its predicate; the remaining premises are
//! looked up through an index on (predicate, argument, start/end position)
//! while the clause's left-hand side arguments are walked outward from an
//! already fixed position. The closure is exact: a fact is derived iff some
//! clause instantiation with all premises derived concludes it.

use std::collections::{HashMap, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};

use serde::Serialize;

use super::forest::{Fact, Forest, ForestStep};
use super::{check_simple, Range, RcgDiagnostic, SimpleRcg, Term};

#[derive(Debug, thiserror::Error)]
pub enum RcgError {
    #[error("grammar is not a simple RCG: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    NotSimple(Vec<RcgDiagnostic>),
    #[error("no parse: {} fact(s) derived, none spans the input as the start predicate", .0.facts.len())]
    NoParse(NoParse),
}

/// Everything derived when the start fact was not.
#[derive(Clone, Debug, Default, Serialize)]
pub struct NoParse {
    pub facts: Vec<Fact>,
    pub stats: ParseStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    /// Facts derived over the whole closure, useful or not.
    pub facts: usize,
    /// Distinct clause instantiations over the whole closure.
    pub steps: usize,
}

type PredId = usize;
type FactId = usize;

#[derive(Clone, Copy)]
enum CTerm {
    /// Terminal id; ids never collide with token ids of other terminals.
    T(usize),
    V(usize),
}

struct CClause {
    pred: PredId,
    args: Vec<Vec<CTerm>>,
    rhs: Vec<(PredId, Vec<usize>)>,
    /// Variable → (RHS slot, argument position).
    var_slot: Vec<(usize, usize)>,
}

struct Compiled {
    clauses: Vec<CClause>,
    pred_names: Vec<String>,
    /// Predicate → (clause, slot) pairs calling it.
    callers: Vec<Vec<(usize, usize)>>,
}

fn compile<'g>(g: &'g SimpleRcg, tokens: &[String]) -> (Compiled, Vec<usize>) {
    let mut preds: HashMap<&'g str, PredId> = HashMap::new();
    let mut pred_names = Vec::new();
    let mut intern_pred = |p: &'g str, names: &mut Vec<String>| -> PredId {
        *preds.entry(p).or_insert_with(|| {
            names.push(p.to_string());
            names.len() - 1
        })
    };
    let mut terminals: HashMap<&str, usize> = HashMap::new();
    for t in tokens {
        let next = terminals.len();
        terminals.entry(t.as_str()).or_insert(next);
    }
    let token_ids: Vec<usize> = tokens.iter().map(|t| terminals[t.as_str()]).collect();

    let mut clauses = Vec::with_capacity(g.clauses.len());
    for c in &g.clauses {
        let pred = intern_pred(&c.pred, &mut pred_names);
        let mut vars: HashMap<&str, usize> = HashMap::new();
        let mut var_slot = Vec::new();
        let mut rhs = Vec::with_capacity(c.rhs.len());
        for (s, call) in c.rhs.iter().enumerate() {
            let p = intern_pred(&call.pred, &mut pred_names);
            let mut ids = Vec::with_capacity(call.args.len());
            for (k, v) in call.args.iter().enumerate() {
                vars.insert(v, var_slot.len());
                ids.push(var_slot.len());
                var_slot.push((s, k));
            }
            rhs.push((p, ids));
        }
        let args = c
            .args
            .iter()
            .map(|arg| {
                arg.iter()
                    .map(|t| match t {
                        Term::Var(v) => CTerm::V(vars[v.as_str()]),
                        Term::Terminal(s) => {
                            let next = terminals.len();
                            CTerm::T(*terminals.entry(s.as_str()).or_insert(next))
                        }
                    })
                    .collect()
            })
            .collect();
        clauses.push(CClause { pred, args, rhs, var_slot });
    }
    let mut callers = vec![Vec::new(); pred_names.len()];
    for (ci, c) in clauses.iter().enumerate() {
        for (s, (p, _)) in c.rhs.iter().enumerate() {
            callers[*p].push((ci, s));
        }
    }
    (Compiled { clauses, pred_names, callers }, token_ids)
}

struct StepData {
    clause: usize,
    fact: FactId,
    premises: Vec<FactId>,
    bindings: Vec<Range>,
}

#[derive(Default)]
struct Chart {
    facts: Vec<(PredId, Vec<Range>)>,
    ids: FxHashMap<(PredId, Vec<Range>), FactId>,
    by_pred: Vec<Vec<FactId>>,
    by_start: FxHashMap<(PredId, usize, usize), Vec<FactId>>,
    by_end: FxHashMap<(PredId, usize, usize), Vec<FactId>>,
    steps: Vec<StepData>,
    step_keys: FxHashSet<(usize, Vec<FactId>, FactId)>,
}

impl Chart {
    fn add_fact(&mut self, pred: PredId, ranges: Vec<Range>) -> (FactId, bool) {
        let key = (pred, ranges);
        if let Some(&id) = self.ids.get(&key) {
            return (id, false);
        }
        let ranges = key.1;
        let id = self.facts.len();
        for (k, r) in ranges.iter().enumerate() {
            self.by_start.entry((pred, k, r.lo)).or_default().push(id);
            self.by_end.entry((pred, k, r.hi)).or_default().push(id);
        }
        if self.by_pred.len() <= pred {
            self.by_pred.resize(pred + 1, Vec::new());
        }
        self.by_pred[pred].push(id);
        self.ids.insert((pred, ranges.clone()), id);
        self.facts.push((pred, ranges));
        (id, true)
    }

    fn facts_of(&self, pred: PredId) -> &[FactId] {
        self.by_pred.get(pred).map(Vec::as_slice).unwrap_or(&[])
    }
}

const EMPTY: &[FactId] = &[];

/// One clause instantiation search. The LHS arguments are solved one at a
/// time, each walked right and then left from a pivot position.
struct Search<'a> {
    clause: &'a CClause,
    chart: &'a Chart,
    tokens: &'a [usize],
    bind: Vec<Option<Range>>,
    slot: Vec<Option<FactId>>,
    arg: Vec<Option<Range>>,
    found: Vec<(Vec<Range>, Vec<FactId>, Vec<Range>)>,
    ordered: bool,
}

impl<'a> Search<'a> {
    fn new(clause: &'a CClause, chart: &'a Chart, tokens: &'a [usize], ordered: bool) -> Self {
        Search {
            clause,
            chart,
            tokens,
            bind: vec![None; clause.var_slot.len()],
            slot: vec![None; clause.rhs.len()],
            arg: vec![None; clause.args.len()],
            found: Vec::new(),
            ordered,
        }
    }

    fn n(&self) -> usize {
        self.tokens.len()
    }

    fn bind_slot(&mut self, s: usize, f: FactId) {
        self.slot[s] = Some(f);
        let ranges = &self.chart.facts[f].1;
        for (k, &v) in self.clause.rhs[s].1.iter().enumerate() {
            self.bind[v] = Some(ranges[k]);
        }
    }

    fn unbind_slot(&mut self, s: usize) {
        self.slot[s] = None;
        for &v in &self.clause.rhs[s].1 {
            self.bind[v] = None;
        }
    }

    fn is_bound(&self, t: &CTerm) -> bool {
        matches!(t, CTerm::V(v) if self.bind[*v].is_some())
    }

    fn solve(&mut self) {
        let (clause, chart) = (self.clause, self.chart);
        let args = &clause.args;
        let pending = (0..args.len()).filter(|&a| self.arg[a].is_none());
        let pick = pending
            .clone()
            .find(|&a| args[a].iter().any(|t| self.is_bound(t)))
            .or_else(|| pending.clone().find(|&a| args[a].iter().any(|t| matches!(t, CTerm::T(_)))))
            .or_else(|| pending.clone().next());
        let Some(a) = pick else {
            self.finish(0);
            return;
        };
        let terms = &args[a];
        if terms.is_empty() {
            for p in 0..=self.n() {
                self.arg[a] = Some(Range::new(p, p));
                self.solve();
            }
            self.arg[a] = None;
            return;
        }
        if let Some(i) = terms.iter().position(|t| self.is_bound(t)) {
            let CTerm::V(v) = terms[i] else { unreachable!() };
            let r = self.bind[v].unwrap();
            self.go_right(a, i + 1, r.hi, i, r.lo);
        } else if let Some(i) = terms.iter().position(|t| matches!(t, CTerm::T(_))) {
            let CTerm::T(tok) = terms[i] else { unreachable!() };
            for p in 0..self.n() {
                if self.tokens[p] == tok {
                    self.go_right(a, i + 1, p + 1, i, p);
                }
            }
        } else {
            let CTerm::V(v) = terms[0] else { unreachable!() };
            let (s, k) = clause.var_slot[v];
            let pred = clause.rhs[s].0;
            for &f in chart.facts_of(pred) {
                self.bind_slot(s, f);
                let r = chart.facts[f].1[k];
                self.go_right(a, 1, r.hi, 0, r.lo);
                self.unbind_slot(s);
            }
        }
    }

    fn go_right(&mut self, a: usize, i: usize, pos: usize, pivot: usize, pivot_lo: usize) {
        let (clause, chart) = (self.clause, self.chart);
        let terms = &clause.args[a];
        if i == terms.len() {
            self.go_left(a, pivot as isize - 1, pivot_lo, pos);
            return;
        }
        match terms[i] {
            CTerm::T(tok) => {
                if pos < self.n() && self.tokens[pos] == tok {
                    self.go_right(a, i + 1, pos + 1, pivot, pivot_lo);
                }
            }
            CTerm::V(v) => match self.bind[v] {
                Some(r) => {
                    if r.lo == pos {
                        self.go_right(a, i + 1, r.hi, pivot, pivot_lo);
                    }
                }
                None => {
                    let (s, k) = clause.var_slot[v];
                    let pred = clause.rhs[s].0;
                    let cands = chart.by_start.get(&(pred, k, pos)).map(Vec::as_slice).unwrap_or(EMPTY);
                    for &f in cands {
                        self.bind_slot(s, f);
                        let hi = chart.facts[f].1[k].hi;
                        self.go_right(a, i + 1, hi, pivot, pivot_lo);
                        self.unbind_slot(s);
                    }
                }
            },
        }
    }

    fn go_left(&mut self, a: usize, i: isize, pos: usize, end: usize) {
        let (clause, chart) = (self.clause, self.chart);
        if i < 0 {
            self.arg[a] = Some(Range::new(pos, end));
            self.solve();
            self.arg[a] = None;
            return;
        }
        match clause.args[a][i as usize] {
            CTerm::T(tok) => {
                if pos > 0 && self.tokens[pos - 1] == tok {
                    self.go_left(a, i - 1, pos - 1, end);
                }
            }
            CTerm::V(v) => match self.bind[v] {
                Some(r) => {
                    if r.hi == pos {
                        self.go_left(a, i - 1, r.lo, end);
                    }
                }
                None => {
                    let (s, k) = clause.var_slot[v];
                    let pred = clause.rhs[s].0;
                    let cands = chart.by_end.get(&(pred, k, pos)).map(Vec::as_slice).unwrap_or(EMPTY);
                    for &f in cands {
                        self.bind_slot(s, f);
                        let lo = chart.facts[f].1[k].lo;
                        self.go_left(a, i - 1, lo, end);
                        self.unbind_slot(s);
                    }
                }
            },
        }
    }

    /// All LHS arguments are placed; nullary calls still need a fact.
    fn finish(&mut self, from: usize) {
        if let Some(s) = (from..self.slot.len()).find(|&s| self.slot[s].is_none()) {
            let pred = self.clause.rhs[s].0;
            if !self.clause.rhs[s].1.is_empty() {
                return;
            }
            if let Some(&f) = self.chart.facts_of(pred).first() {
                self.slot[s] = Some(f);
                self.finish(s + 1);
                self.slot[s] = None;
            }
            return;
        }
        let ranges: Vec<Range> = self.arg.iter().map(|r| r.unwrap()).collect();
        if !(if self.ordered { in_order(&ranges) } else { disjoint(&ranges) }) {
            return;
        }
        let premises = self.slot.iter().map(|f| f.unwrap()).collect();
        let bindings = self.bind.iter().map(|r| r.unwrap()).collect();
        self.found.push((ranges, premises, bindings));
    }
}

/// Non-empty ranges of one fact never overlap in a derivation of the whole
/// input, so such facts are not built.
fn disjoint(ranges: &[Range]) -> bool {
    let mut nonempty: Vec<&Range> = ranges.iter().filter(|r| !r.is_empty()).collect();
    nonempty.sort();
    nonempty.windows(2).all(|w| w[0].hi <= w[1].lo)
}

/// Arguments left to right, empty ranges included.
fn in_order(ranges: &[Range]) -> bool {
    ranges.windows(2).all(|w| w[0].hi <= w[1].lo)
}

/// Recognizes `tokens` with start predicate `start` (arity 1) and returns the
/// forest of all derivations of `start(0,n)`.
pub fn parse(g: &SimpleRcg, tokens: &[String], start: &str) -> Result<Forest, RcgError> {
    parse_with(g, tokens, start, false)
}

/// Like [`parse`], for grammars whose predicates always span their arguments
/// left to right in a derivation of the whole input (as the grammars built
/// from TAG do): facts with arguments out of order are never built. The
/// forest is the same; only the closure is smaller.
pub fn parse_ordered(g: &SimpleRcg, tokens: &[String], start: &str) -> Result<Forest, RcgError> {
    parse_with(g, tokens, start, true)
}

fn parse_with(g: &SimpleRcg, tokens: &[String], start: &str, ordered: bool) -> Result<Forest, RcgError> {
    let diags = check_simple(g);
    if !diags.is_empty() {
        return Err(RcgError::NotSimple(diags));
    }
    let (cg, token_ids) = compile(g, tokens);
    let mut chart = Chart::default();
    let mut agenda: VecDeque<FactId> = VecDeque::new();

    let record = |chart: &mut Chart, agenda: &mut VecDeque<FactId>, ci: usize, found: Vec<(Vec<Range>, Vec<FactId>, Vec<Range>)>| {
        for (ranges, premises, bindings) in found {
            let (fact, new) = chart.add_fact(cg.clauses[ci].pred, ranges);
            if new {
                agenda.push_back(fact);
            }
            if chart.step_keys.insert((ci, premises.clone(), fact)) {
                chart.steps.push(StepData { clause: ci, fact, premises, bindings });
            }
        }
    };

    for (ci, c) in cg.clauses.iter().enumerate() {
        if c.rhs.is_empty() {
            let mut s = Search::new(c, &chart, &token_ids, ordered);
            s.solve();
            let found = s.found;
            record(&mut chart, &mut agenda, ci, found);
        }
    }

    while let Some(f) = agenda.pop_front() {
        let pred = chart.facts[f].0;
        for &(ci, slot) in &cg.callers[pred] {
            let c = &cg.clauses[ci];
            let mut s = Search::new(c, &chart, &token_ids, ordered);
            s.bind_slot(slot, f);
            s.solve();
            let found = s.found;
            record(&mut chart, &mut agenda, ci, found);
        }
    }

    let stats = ParseStats { facts: chart.facts.len(), steps: chart.steps.len() };
    log::debug!("rcg closure: {} facts, {} steps", stats.facts, stats.steps);

    let to_fact = |(p, r): &(PredId, Vec<Range>)| Fact { pred: cg.pred_names[*p].clone(), ranges: r.clone() };
    let root = cg
        .pred_names
        .iter()
        .position(|p| p == start)
        .and_then(|p| chart.ids.get(&(p, vec![Range::new(0, tokens.len())])).copied());
    let Some(root) = root else {
        return Err(RcgError::NoParse(NoParse { facts: chart.facts.iter().map(to_fact).collect(), stats }));
    };

    // keep what is reachable from the root, renumbered
    let mut steps_of: Vec<Vec<usize>> = vec![Vec::new(); chart.facts.len()];
    for (i, s) in chart.steps.iter().enumerate() {
        steps_of[s.fact].push(i);
    }
    let mut fact_map: HashMap<FactId, usize> = HashMap::new();
    let mut order = vec![root];
    fact_map.insert(root, 0);
    let mut i = 0;
    while i < order.len() {
        let f = order[i];
        for &s in &steps_of[f] {
            for &p in &chart.steps[s].premises {
                if let std::collections::hash_map::Entry::Vacant(e) = fact_map.entry(p) {
                    e.insert(order.len());
                    order.push(p);
                }
            }
        }
        i += 1;
    }
    let facts: Vec<Fact> = order.iter().map(|&f| to_fact(&chart.facts[f])).collect();
    let mut steps = Vec::new();
    for &f in &order {
        for &s in &steps_of[f] {
            let sd = &chart.steps[s];
            let clause = &g.clauses[sd.clause];
            let names = clause.rhs.iter().flat_map(|c| c.args.iter().cloned());
            steps.push(ForestStep {
                clause: sd.clause,
                fact: fact_map[&sd.fact],
                premises: sd.premises.iter().map(|p| fact_map[p]).collect(),
                bindings: names.zip(sd.bindings.iter().copied()).collect(),
            });
        }
    }
    Ok(Forest::new(facts, steps, 0, tokens.len(), stats))
}
