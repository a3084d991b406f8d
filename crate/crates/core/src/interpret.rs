//! From RCG derivations back to TAG: derivation trees, derived trees and
//! feature unification.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::fs::{merge_into, Binding, Clash, FeatureStructure, Value};
use crate::lexicon::AnchoredTree;
use crate::rcg::RcgDerivation;
use crate::tag2rcg::{ConvertedGrammar, PredName};
use crate::tree::{Gorn, NodeKind, TreeNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Substitution,
    Adjunction,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Substitution => "substitution",
            OpKind::Adjunction => "adjunction",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivNode {
    pub tree: Arc<AnchoredTree>,
    /// Input position of the anchor, if the tree has one.
    pub token_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DerivEdge {
    pub parent: usize,
    pub child: usize,
    pub op: OpKind,
    pub gorn: Gorn,
}

/// Node 0 is the root. Nodes appear in the order the RCG derivation visits
/// them (parents before children).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTree {
    pub nodes: Vec<DerivNode>,
    pub edges: Vec<DerivEdge>,
}

/// Variable scope of the tree at derivation node `i`; scope 0 is reserved for
/// the grammar's own variables.
pub fn scope_of(i: usize) -> u32 {
    i as u32 + 1
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot interpret predicate '{0}'")]
pub struct ProvenanceError(pub String);

impl DerivationTree {
    pub fn children(&self, i: usize) -> Vec<&DerivEdge> {
        let mut out: Vec<&DerivEdge> = self.edges.iter().filter(|e| e.parent == i).collect();
        out.sort_by(|a, b| (&a.gorn, a.op).cmp(&(&b.gorn, b.op)));
        out
    }

    /// Canonical rendering of the derivation's shape, independent of node
    /// numbering; equal keys mean the same TAG derivation.
    pub fn key(&self) -> String {
        self.key_at(0)
    }

    fn key_at(&self, i: usize) -> String {
        let n = &self.nodes[i];
        let mut s = format!("{}|{}|{}|{}|{:?}", n.tree.base, n.tree.lex_item, n.tree.lemma, n.tree.applied.morph, n.token_index);
        let kids = self.children(i);
        if !kids.is_empty() {
            s.push('(');
            for (k, e) in kids.iter().enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                s.push_str(&format!("{}@{}:{}", e.op, e.gorn, self.key_at(e.child)));
            }
            s.push(')');
        }
        s
    }
}

struct Decoder<'a> {
    conv: &'a ConvertedGrammar,
    nodes: Vec<DerivNode>,
    edges: Vec<DerivEdge>,
}

impl Decoder<'_> {
    /// `Ok(None)` when a tree class is used at a position none of its members
    /// is anchored at.
    fn tree(&mut self, d: &RcgDerivation) -> Result<Option<usize>, ProvenanceError> {
        let bad = || ProvenanceError(d.fact.pred.clone());
        let Some(PredName::Tree(id)) = PredName::parse(&d.fact.pred) else {
            return Err(bad());
        };
        let class = self.conv.classes.get(&id).ok_or_else(bad)?;
        let pos = match class.anchor_terminal {
            Some(k) => Some(*d.terminal_positions(&self.conv.rcg).get(k).ok_or_else(bad)?),
            None => None,
        };
        let Some(member) = class.member_at(pos) else {
            return Ok(None);
        };
        let me = self.nodes.len();
        self.nodes.push(DerivNode { tree: member.clone(), token_index: pos });
        let clause = &self.conv.rcg.clauses[d.clause];
        for (call, child) in clause.rhs.iter().zip(&d.children) {
            match PredName::parse(&call.pred) {
                Some(PredName::Subst(_)) => {
                    let gorn = call.args[0].strip_prefix('X').and_then(|g| g.parse().ok()).ok_or_else(|| ProvenanceError(call.pred.clone()))?;
                    let inner = child.children.first().ok_or_else(|| ProvenanceError(call.pred.clone()))?;
                    let Some(c) = self.tree(inner)? else { return Ok(None) };
                    self.edges.push(DerivEdge { parent: me, child: c, op: OpKind::Substitution, gorn });
                }
                Some(PredName::Adj(_, gorn)) => {
                    if let Some(inner) = child.children.first() {
                        let Some(c) = self.tree(inner)? else { return Ok(None) };
                        self.edges.push(DerivEdge { parent: me, child: c, op: OpKind::Adjunction, gorn });
                    }
                }
                _ => return Err(ProvenanceError(call.pred.clone())),
            }
        }
        Ok(Some(me))
    }
}

/// Reads a TAG derivation off an RCG derivation of a converted grammar.
/// Returns `Ok(None)` if the derivation uses a tree at a token it was not
/// selected for.
pub fn to_tag_derivation(conv: &ConvertedGrammar, d: &RcgDerivation) -> Result<Option<DerivationTree>, ProvenanceError> {
    match PredName::parse(&d.fact.pred) {
        Some(PredName::Start(_)) => {}
        _ => return Err(ProvenanceError(d.fact.pred.clone())),
    }
    let inner = d.children.first().ok_or_else(|| ProvenanceError(d.fact.pred.clone()))?;
    let mut dec = Decoder { conv, nodes: Vec::new(), edges: Vec::new() };
    Ok(dec.tree(inner)?.map(|_| DerivationTree { nodes: dec.nodes, edges: dec.edges }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnifOp {
    Substitution,
    /// Top of the adjunction site against the auxiliary root.
    Adjunction,
    /// Bottom of the adjunction site against the foot.
    Foot,
    /// Final top/bottom merge at a derived node.
    TopBottom,
}

impl fmt::Display for UnifOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnifOp::Substitution => "substitution",
            UnifOp::Adjunction => "adjunction",
            UnifOp::Foot => "foot",
            UnifOp::TopBottom => "top-bottom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnifFailure {
    /// Instance id of the tree owning the node.
    pub instance: usize,
    pub tree: String,
    pub gorn: Gorn,
    pub op: UnifOp,
    pub attribute: String,
    pub left: Value,
    pub right: Value,
}

impl fmt::Display for UnifFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}#{} node {}: {} = {} vs {}", self.op, self.tree, self.instance, self.gorn, self.attribute, self.left, self.right)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unification failed: {0}")]
pub struct UnificationError(pub Box<UnifFailure>);

/// Where a derived node came from: derivation node and elementary address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Origin {
    pub node: usize,
    pub gorn: Gorn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedNode {
    pub category: String,
    pub kind: NodeKind,
    #[serde(skip)]
    pub top: FeatureStructure,
    #[serde(skip)]
    pub bottom: FeatureStructure,
    /// top ⊔ bottom, resolved.
    pub features: FeatureStructure,
    pub origin: Origin,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<DerivedNode>,
}

impl DerivedNode {
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.kind == NodeKind::Lexical {
            out.push(&self.category);
        }
        self.children.iter().for_each(|c| c.collect_words(out));
    }

    pub fn preorder(&self) -> Vec<&DerivedNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.preorder());
        }
        out
    }

    fn foot_mut(&mut self) -> Option<&mut DerivedNode> {
        if self.kind == NodeKind::Foot {
            return Some(self);
        }
        self.children.iter_mut().find_map(DerivedNode::foot_mut)
    }

    /// Bracketed rendering, e.g. `(S (NP John) (VP (V loves) (NP Mary)))`.
    pub fn bracketed(&self) -> String {
        if self.kind == NodeKind::Lexical {
            return self.category.clone();
        }
        let mut s = format!("({}", self.category);
        for c in &self.children {
            s.push(' ');
            s.push_str(&c.bracketed());
        }
        s.push(')');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derived {
    pub tree: DerivedNode,
    pub binding: Binding,
    pub failures: Vec<UnifFailure>,
}

/// A substitution node waiting for the root it receives.
struct Site {
    node: usize,
    gorn: Gorn,
    top: FeatureStructure,
    bottom: FeatureStructure,
}

struct Builder<'a> {
    d: &'a DerivationTree,
    env: Binding,
    failures: Vec<UnifFailure>,
}

impl Builder<'_> {
    fn unify(&mut self, node: usize, gorn: &Gorn, op: UnifOp, a: &FeatureStructure, b: &FeatureStructure) -> FeatureStructure {
        let (merged, clashes) = merge_into(&mut self.env, a, b);
        let tree = &self.d.nodes[node].tree;
        for Clash { attribute, left, right } in clashes {
            self.failures.push(UnifFailure { instance: tree.instance_id, tree: tree.label(), gorn: gorn.clone(), op, attribute, left, right });
        }
        merged
    }

    /// Builds the subtree of derivation node `i`. A substitution site is
    /// merged into the root it receives before anything adjoins there, so the
    /// result does not depend on the order of the two operations.
    fn realize(&mut self, i: usize, site: Option<Site>) -> DerivedNode {
        let mut subs: HashMap<Gorn, DerivedNode> = HashMap::new();
        let mut adjs: HashMap<Gorn, DerivedNode> = HashMap::new();
        let scope = scope_of(i);
        for e in self.d.children(i) {
            match e.op {
                OpKind::Substitution => {
                    let n = self.d.nodes[i].tree.tree.node_at(&e.gorn).expect("substitution address exists");
                    let site = Site { node: i, gorn: e.gorn.clone(), top: n.top.in_scope(scope), bottom: n.bottom.in_scope(scope) };
                    let r = self.realize(e.child, Some(site));
                    subs.insert(e.gorn.clone(), r);
                }
                OpKind::Adjunction => {
                    let r = self.realize(e.child, None);
                    adjs.insert(e.gorn.clone(), r);
                }
            }
        }
        let tree = self.d.nodes[i].tree.clone();
        self.build(i, &tree.tree.root, site, &mut subs, &mut adjs)
    }

    fn build(&mut self, i: usize, n: &TreeNode, site: Option<Site>, subs: &mut HashMap<Gorn, DerivedNode>, adjs: &mut HashMap<Gorn, DerivedNode>) -> DerivedNode {
        if let Some(r) = subs.remove(&n.gorn) {
            return r;
        }
        let scope = scope_of(i);
        let mut top = n.top.in_scope(scope);
        let mut bottom = n.bottom.in_scope(scope);
        if let Some(s) = site {
            top = self.unify(s.node, &s.gorn, UnifOp::Substitution, &s.top, &top);
            bottom = self.unify(s.node, &s.gorn, UnifOp::Substitution, &bottom, &s.bottom);
        }
        let children = n.children.iter().map(|c| self.build(i, c, None, subs, adjs)).collect();
        let node = DerivedNode {
            category: n.category.clone(),
            kind: n.kind,
            top,
            bottom,
            features: FeatureStructure::new(),
            origin: Origin { node: i, gorn: n.gorn.clone() },
            children,
        };
        let Some(mut aux) = adjs.remove(&n.gorn) else { return node };
        aux.top = self.unify(i, &n.gorn, UnifOp::Adjunction, &node.top, &aux.top);
        let (foot_bottom, foot_origin) = {
            let foot = aux.foot_mut().expect("auxiliary tree has a foot");
            (foot.bottom.clone(), foot.origin.clone())
        };
        let merged = self.unify(i, &n.gorn, UnifOp::Foot, &node.bottom, &foot_bottom);
        let foot = aux.foot_mut().expect("auxiliary tree has a foot");
        foot.bottom = merged;
        foot.kind = node.kind;
        foot.children = node.children;
        foot.origin = foot_origin;
        aux
    }

    fn finish(&mut self, n: &mut DerivedNode) {
        if n.kind != NodeKind::Lexical {
            let (top, bottom) = (n.top.clone(), n.bottom.clone());
            n.features = self.unify(n.origin.node, &n.origin.gorn.clone(), UnifOp::TopBottom, &top, &bottom);
        }
        for c in &mut n.children {
            self.finish(c);
        }
    }

    fn resolve(&self, n: &mut DerivedNode) {
        n.top = n.top.resolved(&self.env);
        n.bottom = n.bottom.resolved(&self.env);
        n.features = n.features.resolved(&self.env);
        for c in &mut n.children {
            self.resolve(c);
        }
    }
}

/// Combines the trees of `d` bottom-up, unifying features as it goes, then
/// merges top and bottom at every node. In strict mode the first clash is an
/// error; in robust mode clashes are collected and the left value wins.
pub fn build_derived(d: &DerivationTree, robust: bool) -> Result<Derived, UnificationError> {
    let mut b = Builder { d, env: Binding::new(), failures: Vec::new() };
    let mut tree = b.realize(0, None);
    b.finish(&mut tree);
    b.resolve(&mut tree);
    if !robust {
        if let Some(f) = b.failures.first() {
            return Err(UnificationError(Box::new(f.clone())));
        }
    }
    Ok(Derived { tree, binding: b.env, failures: b.failures })
}
