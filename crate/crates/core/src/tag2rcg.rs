//! TAG to simple RCG conversion.
//!
//! Every tree becomes one clause whose arguments spell out the tree's yield
//! (split at the foot for auxiliary trees). Substitution slots and adjunction
//! sites turn into calls to dispatch predicates, which in turn choose a tree.
//! Features are ignored here; interpretation filters on them afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::lexicon::AnchoredTree;
use crate::rcg::{Call, Clause, SimpleRcg, Term};
use crate::tree::{AdjConstraint, Gorn, NodeKind, TreeNode};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredName {
    Tree(usize),
    Subst(String),
    Adj(usize, Gorn),
    Start(String),
}

impl fmt::Display for PredName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredName::Tree(id) => write!(f, "⟨t{id}⟩"),
            PredName::Subst(c) => write!(f, "sub_{c}"),
            PredName::Adj(id, g) => write!(f, "adj_t{id}_{g}"),
            PredName::Start(c) => write!(f, "{c}_ax"),
        }
    }
}

impl PredName {
    pub fn parse(s: &str) -> Option<PredName> {
        if let Some(id) = s.strip_prefix("⟨t").and_then(|r| r.strip_suffix('⟩')) {
            return id.parse().ok().map(PredName::Tree);
        }
        if let Some(c) = s.strip_prefix("sub_") {
            return (!c.is_empty()).then(|| PredName::Subst(c.into()));
        }
        if let Some(rest) = s.strip_prefix("adj_t") {
            let (id, g) = rest.split_once('_')?;
            return Some(PredName::Adj(id.parse().ok()?, g.parse().ok()?));
        }
        let c = s.strip_suffix("_ax")?;
        (!c.is_empty()).then(|| PredName::Start(c.into()))
    }
}

/// Trees with identical content and lexical item share one tree predicate;
/// the anchor position picks the member at interpretation time.
#[derive(Clone, Debug)]
pub struct TreeClass {
    pub members: Vec<Arc<AnchoredTree>>,
    /// Index of the anchor's word among the clause's terminals.
    pub anchor_terminal: Option<usize>,
}

impl TreeClass {
    pub fn representative(&self) -> &Arc<AnchoredTree> {
        &self.members[0]
    }

    /// The member anchored at input position `pos`.
    pub fn member_at(&self, pos: Option<usize>) -> Option<&Arc<AnchoredTree>> {
        match pos {
            None => Some(self.representative()),
            Some(p) => self.members.iter().find(|m| m.token_index.is_none_or(|t| t == p)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvertedGrammar {
    pub rcg: SimpleRcg,
    pub start: String,
    pub classes: BTreeMap<usize, TreeClass>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConversionError {
    #[error("auxiliary tree '{0}' has no foot node")]
    MissingFoot(String),
    #[error("initial tree '{0}' has a foot node")]
    UnexpectedFoot(String),
    #[error("empty axiom")]
    EmptyAxiom,
}

pub(crate) fn subst_var(g: &Gorn) -> String {
    format!("X{g}")
}

pub(crate) fn adj_vars(g: &Gorn) -> (String, String) {
    (format!("L{g}"), format!("R{g}"))
}

struct Walk {
    id: usize,
    args: Vec<Vec<Term>>,
    rhs: Vec<Call>,
    terminals: usize,
    anchor_terminal: Option<usize>,
    adj_sites: Vec<(Gorn, String, AdjConstraint)>,
}

impl Walk {
    fn push(&mut self, t: Term) {
        self.args.last_mut().expect("at least one argument").push(t);
    }

    fn node(&mut self, n: &TreeNode) {
        match n.kind {
            NodeKind::Lexical => {
                self.push(Term::Terminal(n.category.clone()));
                self.terminals += 1;
            }
            NodeKind::Substitution => {
                let x = subst_var(&n.gorn);
                self.push(Term::Var(x.clone()));
                self.rhs.push(Call { pred: PredName::Subst(n.category.clone()).to_string(), args: vec![x] });
            }
            NodeKind::Foot => self.args.push(Vec::new()),
            NodeKind::Internal | NodeKind::Anchor => {
                if n.kind == NodeKind::Anchor && !n.children.is_empty() {
                    self.anchor_terminal = Some(self.terminals);
                }
                if n.adj == AdjConstraint::Forbidden {
                    n.children.iter().for_each(|c| self.node(c));
                    return;
                }
                let (l, r) = adj_vars(&n.gorn);
                self.push(Term::Var(l.clone()));
                self.rhs.push(Call { pred: PredName::Adj(self.id, n.gorn.clone()).to_string(), args: vec![l, r.clone()] });
                n.children.iter().for_each(|c| self.node(c));
                self.push(Term::Var(r));
                self.adj_sites.push((n.gorn.clone(), n.category.clone(), n.adj));
            }
        }
    }
}

/// Builds the RCG for one set of anchored trees.
pub fn convert<'a>(trees: impl IntoIterator<Item = &'a AnchoredTree>, axiom: &str) -> Result<ConvertedGrammar, ConversionError> {
    if axiom.is_empty() {
        return Err(ConversionError::EmptyAxiom);
    }
    let mut classes: BTreeMap<usize, TreeClass> = BTreeMap::new();
    let mut by_content: HashMap<(&crate::tree::ElementaryTree, &str, &str), usize> = HashMap::new();
    let mut sorted: Vec<&AnchoredTree> = trees.into_iter().collect();
    sorted.sort_by_key(|t| t.instance_id);
    sorted.dedup_by_key(|t| t.instance_id);
    for t in &sorted {
        let key = (&t.tree, t.lex_item.as_str(), t.lemma.as_str());
        match by_content.get(&key) {
            Some(&rep) => classes.get_mut(&rep).unwrap().members.push(Arc::new((*t).clone())),
            None => {
                by_content.insert(key, t.instance_id);
                classes.insert(t.instance_id, TreeClass { members: vec![Arc::new((*t).clone())], anchor_terminal: None });
            }
        }
    }

    let mut clauses = Vec::new();
    let mut initial_roots: Vec<(usize, &str)> = Vec::new();
    let mut aux_roots: Vec<(usize, &str)> = Vec::new();
    let mut sites: Vec<(usize, Gorn, String, AdjConstraint)> = Vec::new();

    for (&id, class) in classes.iter_mut() {
        let tree = &class.members[0].tree;
        let has_foot = tree.foot().is_some();
        if tree.is_auxiliary() && !has_foot {
            return Err(ConversionError::MissingFoot(tree.name.clone()));
        }
        if !tree.is_auxiliary() && has_foot {
            return Err(ConversionError::UnexpectedFoot(tree.name.clone()));
        }
        let mut w = Walk { id, args: vec![Vec::new()], rhs: Vec::new(), terminals: 0, anchor_terminal: None, adj_sites: Vec::new() };
        w.node(&tree.root);
        class.anchor_terminal = w.anchor_terminal;
        clauses.push(Clause { pred: PredName::Tree(id).to_string(), args: w.args, rhs: w.rhs });
        sites.extend(w.adj_sites.into_iter().map(|(g, c, a)| (id, g, c, a)));
    }
    for (&id, class) in &classes {
        let tree = &class.members[0].tree;
        if tree.is_auxiliary() {
            aux_roots.push((id, &tree.root.category));
        } else {
            initial_roots.push((id, &tree.root.category));
        }
    }

    let var = |s: &str| vec![Term::v(s)];
    for &(id, cat) in &initial_roots {
        if cat == axiom {
            clauses.push(Clause { pred: PredName::Start(axiom.into()).to_string(), args: vec![var("X")], rhs: vec![call(PredName::Tree(id), &["X"])] });
        }
    }
    let cats: BTreeSet<&str> = initial_roots.iter().map(|&(_, c)| c).collect();
    for cat in cats {
        for &(id, c) in &initial_roots {
            if c == cat {
                clauses.push(Clause { pred: PredName::Subst(cat.into()).to_string(), args: vec![var("X")], rhs: vec![call(PredName::Tree(id), &["X"])] });
            }
        }
    }
    for (id, g, cat, adj) in sites {
        let pred = PredName::Adj(id, g).to_string();
        for &(beta, c) in &aux_roots {
            if c == cat {
                clauses.push(Clause { pred: pred.clone(), args: vec![var("L"), var("R")], rhs: vec![call(PredName::Tree(beta), &["L", "R"])] });
            }
        }
        if adj != AdjConstraint::Obligatory {
            clauses.push(Clause { pred, args: vec![Vec::new(), Vec::new()], rhs: Vec::new() });
        }
    }

    Ok(ConvertedGrammar { rcg: SimpleRcg { clauses }, start: PredName::Start(axiom.into()).to_string(), classes })
}

fn call(p: PredName, args: &[&str]) -> Call {
    Call { pred: p.to_string(), args: args.iter().map(|a| a.to_string()).collect() }
}
