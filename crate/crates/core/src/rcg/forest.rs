//! Shared derivation forest: facts are or-nodes, clause instantiations
//! (steps) are and-nodes.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::parser::ParseStats;
use super::{Range, SimpleRcg, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Fact {
    pub pred: String,
    pub ranges: Vec<Range>,
}

impl std::fmt::Display for Fact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, r) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}..{}", r.lo, r.hi)?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestStep {
    pub clause: usize,
    pub fact: usize,
    pub premises: Vec<usize>,
    pub bindings: BTreeMap<String, Range>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Forest {
    pub facts: Vec<Fact>,
    pub steps: Vec<ForestStep>,
    pub root: usize,
    pub input_len: usize,
    pub stats: ParseStats,
    /// Steps concluding each fact, ordered by clause id then ranges.
    #[serde(skip)]
    pub derivations_of: Vec<Vec<usize>>,
}

impl Forest {
    pub(crate) fn new(facts: Vec<Fact>, steps: Vec<ForestStep>, root: usize, input_len: usize, stats: ParseStats) -> Self {
        let mut derivations_of = vec![Vec::new(); facts.len()];
        for (i, s) in steps.iter().enumerate() {
            derivations_of[s.fact].push(i);
        }
        for ds in &mut derivations_of {
            ds.sort_by(|&a, &b| {
                let (sa, sb) = (&steps[a], &steps[b]);
                sa.clause.cmp(&sb.clause).then_with(|| {
                    let ra: Vec<_> = sa.premises.iter().map(|&p| &facts[p].ranges).collect();
                    let rb: Vec<_> = sb.premises.iter().map(|&p| &facts[p].ranges).collect();
                    ra.cmp(&rb)
                })
            });
        }
        Forest { facts, steps, root, input_len, stats, derivations_of }
    }

    /// True when some fact can be reached from itself through its premises.
    pub fn is_cyclic(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; self.facts.len()];
        let mut stack: Vec<(usize, usize)> = vec![(self.root, 0)];
        mark[self.root] = 1;
        while let Some(&mut (f, ref mut next)) = stack.last_mut() {
            let children: Vec<usize> = self.derivations_of[f].iter().flat_map(|&s| self.steps[s].premises.iter().copied()).collect();
            if *next < children.len() {
                let c = children[*next];
                *next += 1;
                match mark[c] {
                    1 => return true,
                    0 => {
                        mark[c] = 1;
                        stack.push((c, 0));
                    }
                    _ => {}
                }
            } else {
                mark[f] = 2;
                stack.pop();
            }
        }
        false
    }

    /// JSON export: facts, steps (with conclusion, bindings and premise ids)
    /// and the root fact id.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "facts": self.facts,
            "steps": self.steps,
            "root": self.root,
        })
    }
}

/// One derivation: a resolved choice of step at every fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcgDerivation {
    pub clause: usize,
    pub fact: Fact,
    pub bindings: BTreeMap<String, Range>,
    pub children: Vec<Arc<RcgDerivation>>,
}

impl RcgDerivation {
    /// Re-derives the conclusion bottom-up from the clause instantiations and
    /// the tokens; `None` if any step does not check out.
    pub fn replay(&self, g: &SimpleRcg, tokens: &[String]) -> Option<Fact> {
        let clause = g.clauses.get(self.clause)?;
        if clause.pred != self.fact.pred || clause.rhs.len() != self.children.len() || clause.args.len() != self.fact.ranges.len() {
            return None;
        }
        for (call, child) in clause.rhs.iter().zip(&self.children) {
            let fact = child.replay(g, tokens)?;
            let expected: Option<Vec<Range>> = call.args.iter().map(|v| self.bindings.get(v).copied()).collect();
            if fact.pred != call.pred || Some(fact.ranges) != expected {
                return None;
            }
        }
        for (arg, range) in clause.args.iter().zip(&self.fact.ranges) {
            let mut pos = range.lo;
            for t in arg {
                match t {
                    Term::Terminal(s) => {
                        if tokens.get(pos) != Some(s) {
                            return None;
                        }
                        pos += 1;
                    }
                    Term::Var(v) => {
                        let r = self.bindings.get(v)?;
                        if r.lo != pos {
                            return None;
                        }
                        pos = r.hi;
                    }
                }
            }
            if pos != range.hi {
                return None;
            }
        }
        Some(self.fact.clone())
    }

    /// Positions of the terminals of the clause's LHS, in argument order.
    pub fn terminal_positions(&self, g: &SimpleRcg) -> Vec<usize> {
        let clause = &g.clauses[self.clause];
        let mut out = Vec::new();
        for (arg, range) in clause.args.iter().zip(&self.fact.ranges) {
            let mut pos = range.lo;
            for t in arg {
                match t {
                    Term::Terminal(_) => {
                        out.push(pos);
                        pos += 1;
                    }
                    Term::Var(v) => pos = self.bindings[v].hi,
                }
            }
        }
        out
    }
}

struct Enumerator<'a> {
    forest: &'a Forest,
    limit: usize,
    memo: Option<HashMap<usize, Vec<Arc<RcgDerivation>>>>,
    on_stack: Vec<bool>,
}

impl Enumerator<'_> {
    fn derivations(&mut self, fact: usize) -> Vec<Arc<RcgDerivation>> {
        if let Some(d) = self.memo.as_ref().and_then(|m| m.get(&fact)) {
            return d.clone();
        }
        if self.on_stack[fact] {
            return Vec::new();
        }
        self.on_stack[fact] = true;
        let mut out = Vec::new();
        for &s in &self.forest.derivations_of[fact] {
            if out.len() >= self.limit {
                break;
            }
            let step = &self.forest.steps[s];
            let kids: Vec<Vec<Arc<RcgDerivation>>> = step.premises.iter().map(|&p| self.derivations(p)).collect();
            if kids.iter().any(Vec::is_empty) {
                continue;
            }
            // odometer over the premise alternatives, last premise fastest
            let mut idx = vec![0usize; kids.len()];
            loop {
                out.push(Arc::new(RcgDerivation {
                    clause: step.clause,
                    fact: self.forest.facts[fact].clone(),
                    bindings: step.bindings.clone(),
                    children: idx.iter().zip(&kids).map(|(&i, k)| k[i].clone()).collect(),
                }));
                if out.len() >= self.limit {
                    break;
                }
                let mut j = kids.len();
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < kids[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    if j == 0 {
                        j = usize::MAX;
                        break;
                    }
                }
                if j == usize::MAX || kids.is_empty() {
                    break;
                }
            }
        }
        self.on_stack[fact] = false;
        if let Some(m) = self.memo.as_mut() {
            m.insert(fact, out.clone());
        }
        out
    }
}

/// Up to `limit` derivations of the root, ordered by clause id then ranges
/// at every choice point. A fact never occurs twice on one root-to-leaf path.
pub fn enumerate(forest: &Forest, limit: usize) -> Vec<Arc<RcgDerivation>> {
    if limit == 0 || forest.facts.is_empty() {
        return Vec::new();
    }
    let memo = (!forest.is_cyclic()).then(HashMap::new);
    let mut e = Enumerator { forest, limit, memo, on_stack: vec![false; forest.facts.len()] };
    e.derivations(forest.root)
}

/// Number of derivations of the root (saturating); cyclic forests count the
/// derivations `enumerate` would produce without a limit, capped at `cap`.
pub fn count_derivations(forest: &Forest, cap: u64) -> u64 {
    if forest.is_cyclic() {
        return enumerate(forest, cap as usize).len() as u64;
    }
    let mut memo: Vec<Option<u64>> = vec![None; forest.facts.len()];
    fn go(f: &Forest, fact: usize, memo: &mut Vec<Option<u64>>) -> u64 {
        if let Some(c) = memo[fact] {
            return c;
        }
        let mut total = 0u64;
        for &s in &f.derivations_of[fact] {
            let mut prod = 1u64;
            for &p in &f.steps[s].premises {
                prod = prod.saturating_mul(go(f, p, memo));
            }
            total = total.saturating_add(prod);
        }
        memo[fact] = Some(total);
        total
    }
    go(forest, forest.root, &mut memo).min(cap)
}
