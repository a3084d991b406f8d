//! Polarity-based lexical disambiguation.
//!
//! Every anchored tree brings resources (its root category) and needs (its
//! substitution and foot categories). Choosing one tree per token is a path
//! through a layered automaton whose states sum these counts; only paths
//! ending in a neutral state with a single surplus axiom can lead to a parse.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::ops::Add;

use serde::Serialize;

use crate::lexicon::{AnchoredTree, Anchoring};
use crate::tree::NodeKind;

/// Category → signed count; zero counts are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct PolarityVector(BTreeMap<String, i64>);

impl PolarityVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(category: &str, count: i64) -> Self {
        let mut p = Self::new();
        p.bump(category, count);
        p
    }

    pub fn bump(&mut self, category: &str, delta: i64) {
        let c = self.0.entry(category.to_string()).or_insert(0);
        *c += delta;
        if *c == 0 {
            self.0.remove(category);
        }
    }

    pub fn get(&self, category: &str) -> i64 {
        self.0.get(category).copied().unwrap_or(0)
    }

    pub fn is_neutral(&self) -> bool {
        self.0.is_empty()
    }
}

impl Add<&PolarityVector> for &PolarityVector {
    type Output = PolarityVector;

    fn add(self, rhs: &PolarityVector) -> PolarityVector {
        let mut out = self.clone();
        for (cat, n) in &rhs.0 {
            out.bump(cat, *n);
        }
        out
    }
}

/// Renders like `S+ NP-`, `NP+2`; categories in descending order, `0` when
/// neutral.
impl fmt::Display for PolarityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (cat, n)) in self.0.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let sign = if *n > 0 { '+' } else { '-' };
            match n.abs() {
                1 => write!(f, "{cat}{sign}")?,
                k => write!(f, "{cat}{sign}{k}")?,
            }
        }
        Ok(())
    }
}

pub fn tree_polarity(t: &AnchoredTree) -> PolarityVector {
    let mut p = PolarityVector::single(&t.tree.root.category, 1);
    for n in t.tree.nodes() {
        if matches!(n.kind, NodeKind::Substitution | NodeKind::Foot) {
            p.bump(&n.category, -1);
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct State {
    pub index: usize,
    pub polarity: PolarityVector,
}

/// `Tree(k)` selects the k-th candidate of the token; `Coanchor` lets a
/// co-anchor of another tree consume the token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeLabel {
    Tree(usize),
    Coanchor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarityAutomaton {
    pub axiom: String,
    pub states: Vec<State>,
    pub edges: Vec<Edge>,
    pub accepting: Vec<usize>,
    /// Display name of every candidate, per token.
    pub labels: Vec<Vec<String>>,
    #[serde(skip)]
    out: Vec<Vec<usize>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("token {0} has no candidate tree")]
pub struct FilterError(pub usize);

pub fn build_automaton(anchoring: &Anchoring, axiom: &str) -> Result<PolarityAutomaton, FilterError> {
    let covered = anchoring.coanchor_covered();
    let mut states = vec![State { index: 0, polarity: PolarityVector::new() }];
    let mut edges = Vec::new();
    let mut layer: Vec<usize> = vec![0];

    for (i, (cands, &covered)) in anchoring.candidates.iter().zip(&covered).enumerate() {
        if cands.is_empty() && !covered {
            return Err(FilterError(i));
        }
        let pols: Vec<_> = cands.iter().map(tree_polarity).collect();
        let mut next: HashMap<PolarityVector, usize> = HashMap::new();
        let mut next_layer = Vec::new();
        for &s in &layer {
            let mut moves: Vec<(EdgeLabel, PolarityVector)> =
                pols.iter().enumerate().map(|(k, p)| (EdgeLabel::Tree(k), &states[s].polarity + p)).collect();
            if covered {
                moves.push((EdgeLabel::Coanchor, states[s].polarity.clone()));
            }
            for (label, pol) in moves {
                let to = *next.entry(pol.clone()).or_insert_with(|| {
                    states.push(State { index: i + 1, polarity: pol });
                    next_layer.push(states.len() - 1);
                    states.len() - 1
                });
                edges.push(Edge { from: s, to, label });
            }
        }
        layer = next_layer;
    }

    let goal = PolarityVector::single(axiom, 1);
    let accepting = layer.into_iter().filter(|&s| states[s].polarity == goal).collect();
    let mut out = vec![Vec::new(); states.len()];
    for (e, edge) in edges.iter().enumerate() {
        out[edge.from].push(e);
    }
    let labels = anchoring.candidates.iter().map(|c| c.iter().map(AnchoredTree::label).collect()).collect();
    Ok(PolarityAutomaton { axiom: axiom.into(), states, edges, accepting, labels, out })
}

/// One choice per token: a candidate index, or `None` for a co-anchor slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ValidSet(pub Vec<Option<usize>>);

impl ValidSet {
    pub fn trees<'a>(&self, anchoring: &'a Anchoring) -> Vec<&'a AnchoredTree> {
        self.0.iter().enumerate().filter_map(|(i, c)| c.map(|k| &anchoring.candidates[i][k])).collect()
    }
}

impl PolarityAutomaton {
    /// States from which some accepting state is reachable.
    fn coreachable(&self) -> Vec<bool> {
        let mut ok = vec![false; self.states.len()];
        for &a in &self.accepting {
            ok[a] = true;
        }
        // edges always advance one layer, so a reverse sweep by layer settles it
        let mut order: Vec<usize> = (0..self.states.len()).collect();
        order.sort_by_key(|&s| std::cmp::Reverse(self.states[s].index));
        for s in order {
            if !ok[s] {
                ok[s] = self.out[s].iter().any(|&e| ok[self.edges[e].to]);
            }
        }
        ok
    }

    /// Number of accepting paths, saturating.
    pub fn path_count(&self) -> u64 {
        let mut count = vec![0u64; self.states.len()];
        for &a in &self.accepting {
            count[a] = 1;
        }
        let mut order: Vec<usize> = (0..self.states.len()).collect();
        order.sort_by_key(|&s| std::cmp::Reverse(self.states[s].index));
        for s in order {
            for &e in &self.out[s] {
                count[s] = count[s].saturating_add(count[self.edges[e].to]);
            }
        }
        count[0]
    }

    /// Per token, which candidates occur on at least one accepting path.
    pub fn useful_candidates(&self) -> Vec<Vec<bool>> {
        let ok = self.coreachable();
        let mut reach = vec![false; self.states.len()];
        reach[0] = true;
        let mut useful: Vec<Vec<bool>> = self.labels.iter().map(|l| vec![false; l.len()]).collect();
        let mut order: Vec<usize> = (0..self.states.len()).collect();
        order.sort_by_key(|&s| self.states[s].index);
        for s in order {
            if !reach[s] || !ok[s] {
                continue;
            }
            for &e in &self.out[s] {
                let edge = &self.edges[e];
                if ok[edge.to] {
                    reach[edge.to] = true;
                    if let EdgeLabel::Tree(k) = edge.label {
                        useful[self.states[s].index][k] = true;
                    }
                }
            }
        }
        useful
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph polarity {\n  rankdir=LR;\n");
        for (i, st) in self.states.iter().enumerate() {
            let shape = if self.accepting.contains(&i) { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  q{i} [shape={shape}, label=\"{}\"];", dot_escape(&st.polarity.to_string()));
        }
        for e in &self.edges {
            let label = match e.label {
                EdgeLabel::Tree(k) => self.labels[self.states[e.from].index][k].clone(),
                EdgeLabel::Coanchor => "(co-anchor)".into(),
            };
            let _ = writeln!(s, "  q{} -> q{} [label=\"{}\"];", e.from, e.to, dot_escape(&label));
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Label sequences of all accepting paths, without duplicates, token-major in
/// candidate order.
pub fn valid_sets(a: &PolarityAutomaton) -> Vec<ValidSet> {
    let ok = a.coreachable();
    let mut out = Vec::new();
    if a.states.is_empty() || !ok[0] {
        return out;
    }
    let mut path = Vec::new();
    walk(a, &ok, 0, &mut path, &mut out);
    let mut seen = std::collections::HashSet::new();
    out.retain(|v| seen.insert(v.clone()));
    out
}

fn walk(a: &PolarityAutomaton, ok: &[bool], s: usize, path: &mut Vec<Option<usize>>, out: &mut Vec<ValidSet>) {
    if a.states[s].index == a.labels.len() {
        if a.accepting.contains(&s) {
            out.push(ValidSet(path.clone()));
        }
        return;
    }
    let mut edges: Vec<&Edge> = a.out[s].iter().map(|&e| &a.edges[e]).filter(|e| ok[e.to]).collect();
    edges.sort_by_key(|e| e.label);
    for e in edges {
        path.push(match e.label {
            EdgeLabel::Tree(k) => Some(k),
            EdgeLabel::Coanchor => None,
        });
        walk(a, ok, e.to, path, out);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{ElementaryTree, TreeNode, TreeType};

    fn cand(id: usize, tok: usize, name: &str, root: TreeNode, aux: bool) -> AnchoredTree {
        let ty = if aux { TreeType::Auxiliary } else { TreeType::Initial };
        let mut t = AnchoredTree::unanchored(id, ElementaryTree::new(name, name, ty, root));
        t.token_index = Some(tok);
        t
    }

    fn subst(c: &str) -> TreeNode {
        TreeNode::new(NodeKind::Substitution, c)
    }

    fn leaf(w: &str) -> TreeNode {
        TreeNode::lexical(w)
    }

    #[test]
    fn polarity_of_shapes() {
        let john = cand(0, 0, "proper", TreeNode::internal("NP", vec![leaf("John")]), false);
        assert_eq!(tree_polarity(&john), PolarityVector::single("NP", 1));
        let trans = cand(1, 1, "trans", TreeNode::internal("S", vec![subst("NP"), TreeNode::internal("VP", vec![leaf("eats"), subst("NP")])]), false);
        let p = tree_polarity(&trans);
        assert_eq!((p.get("S"), p.get("NP")), (1, -2));
        assert_eq!((&tree_polarity(&john) + &p).to_string(), "S+ NP-");
        let adv = cand(2, 2, "adv", TreeNode::internal("VP", vec![leaf("often"), TreeNode::new(NodeKind::Foot, "VP")]), true);
        assert!(tree_polarity(&adv).is_neutral());
    }

    #[test]
    fn display_counts() {
        let mut p = PolarityVector::single("NP", 2);
        p.bump("S", -1);
        assert_eq!(p.to_string(), "S- NP+2");
        assert_eq!(PolarityVector::new().to_string(), "0");
    }

    fn anchoring(cands: Vec<Vec<AnchoredTree>>) -> Anchoring {
        let tokens = cands.iter().enumerate().map(|(i, _)| format!("w{i}")).collect();
        Anchoring { tokens, candidates: cands }
    }

    #[test]
    fn single_token() {
        let a = anchoring(vec![vec![cand(0, 0, "s", TreeNode::internal("S", vec![leaf("w0")]), false)]]);
        let aut = build_automaton(&a, "S").unwrap();
        assert_eq!(valid_sets(&aut), vec![ValidSet(vec![Some(0)])]);
        assert_eq!(aut.path_count(), 1);
    }

    #[test]
    fn two_resources_never_accept() {
        let np = |i| cand(i, i, "np", TreeNode::internal("NP", vec![leaf("w")]), false);
        let a = anchoring(vec![vec![np(0)], vec![np(1)]]);
        let aut = build_automaton(&a, "S").unwrap();
        assert!(aut.accepting.is_empty());
        assert_eq!(valid_sets(&aut), vec![]);
    }

    #[test]
    fn empty_token_is_an_error() {
        let a = anchoring(vec![vec![], vec![]]);
        assert_eq!(build_automaton(&a, "S").unwrap_err(), FilterError(0));
    }
}
