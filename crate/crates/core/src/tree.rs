//! Feature-based TAG domain model: Gorn addresses, nodes, elementary trees
//! and grammars, plus the JSON grammar loader and structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fs::{FeatureStructure, Value};
use crate::semantics::{Literal, SemTemplate};

/// Path from the root as 0-based child indices; the root is the empty path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gorn(pub Vec<usize>);

impl Gorn {
    pub fn root() -> Self {
        Gorn(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Gorn {
        let mut v = self.0.clone();
        v.push(i);
        Gorn(v)
    }
}

impl fmt::Display for Gorn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl FromStr for Gorn {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s.is_empty() {
            return Ok(Gorn::root());
        }
        s.split('.').map(str::parse).collect::<Result<_, _>>().map(Gorn)
    }
}

impl Serialize for Gorn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Internal,
    Anchor,
    Substitution,
    Foot,
    /// A terminal leaf; its category is the word itself.
    Lexical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjConstraint {
    Allowed,
    Forbidden,
    Obligatory,
}

impl AdjConstraint {
    pub fn default_for(kind: NodeKind) -> Self {
        match kind {
            NodeKind::Internal => AdjConstraint::Allowed,
            _ => AdjConstraint::Forbidden,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub category: String,
    pub kind: NodeKind,
    pub top: FeatureStructure,
    pub bottom: FeatureStructure,
    pub children: Vec<TreeNode>,
    pub adj: AdjConstraint,
    pub name: Option<String>,
    pub gorn: Gorn,
}

impl TreeNode {
    pub fn new(kind: NodeKind, category: impl Into<String>) -> Self {
        TreeNode {
            category: category.into(),
            kind,
            top: FeatureStructure::new(),
            bottom: FeatureStructure::new(),
            children: Vec::new(),
            adj: AdjConstraint::default_for(kind),
            name: None,
            gorn: Gorn::root(),
        }
    }

    pub fn internal(category: &str, children: Vec<TreeNode>) -> Self {
        TreeNode { children, ..TreeNode::new(NodeKind::Internal, category) }
    }

    pub fn lexical(word: &str) -> Self {
        TreeNode::new(NodeKind::Lexical, word)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_top(mut self, top: FeatureStructure) -> Self {
        self.top = top;
        self
    }

    pub fn with_bottom(mut self, bottom: FeatureStructure) -> Self {
        self.bottom = bottom;
        self
    }

    pub fn with_adj(mut self, adj: AdjConstraint) -> Self {
        self.adj = adj;
        self
    }

    /// Recomputes Gorn addresses below this node, taking `at` as its own.
    pub fn renumber(&mut self, at: Gorn) {
        for (i, c) in self.children.iter_mut().enumerate() {
            c.renumber(at.child(i));
        }
        self.gorn = at;
    }

    /// Preorder traversal.
    pub fn preorder(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Lexical leaves left to right.
    pub fn words(&self) -> Vec<&str> {
        self.preorder().into_iter().filter(|n| n.kind == NodeKind::Lexical).map(|n| n.category.as_str()).collect()
    }

    fn map_values(&mut self, f: &mut impl FnMut(&FeatureStructure) -> FeatureStructure) {
        self.top = f(&self.top);
        self.bottom = f(&self.bottom);
        for c in &mut self.children {
            c.map_values(f);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeType {
    Initial,
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryTree {
    pub name: String,
    pub family: String,
    pub tree_type: TreeType,
    pub root: TreeNode,
    pub interface: FeatureStructure,
    pub semantics: SemTemplate,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("address {gorn} does not exist in tree '{tree}'")]
pub struct AddressError {
    pub tree: String,
    pub gorn: Gorn,
}

impl ElementaryTree {
    pub fn new(name: &str, family: &str, tree_type: TreeType, mut root: TreeNode) -> Self {
        root.renumber(Gorn::root());
        ElementaryTree {
            name: name.into(),
            family: family.into(),
            tree_type,
            root,
            interface: FeatureStructure::new(),
            semantics: SemTemplate::default(),
        }
    }

    pub fn is_auxiliary(&self) -> bool {
        self.tree_type == TreeType::Auxiliary
    }

    pub fn node_at(&self, gorn: &Gorn) -> Result<&TreeNode, AddressError> {
        let mut n = &self.root;
        for &i in &gorn.0 {
            n = n.children.get(i).ok_or_else(|| AddressError { tree: self.name.clone(), gorn: gorn.clone() })?;
        }
        Ok(n)
    }

    pub fn node_at_mut(&mut self, gorn: &Gorn) -> Result<&mut TreeNode, AddressError> {
        let name = self.name.clone();
        let mut n = &mut self.root;
        for &i in &gorn.0 {
            n = n.children.get_mut(i).ok_or_else(|| AddressError { tree: name.clone(), gorn: gorn.clone() })?;
        }
        Ok(n)
    }

    pub fn nodes(&self) -> Vec<&TreeNode> {
        self.root.preorder()
    }

    fn find(&self, pred: impl Fn(&TreeNode) -> bool) -> Option<Gorn> {
        self.nodes().into_iter().find(|n| pred(n)).map(|n| n.gorn.clone())
    }

    pub fn anchor(&self) -> Option<Gorn> {
        self.find(|n| n.kind == NodeKind::Anchor)
    }

    pub fn foot(&self) -> Option<Gorn> {
        self.find(|n| n.kind == NodeKind::Foot)
    }

    pub fn named(&self, name: &str) -> Option<Gorn> {
        self.find(|n| n.name.as_deref() == Some(name))
    }

    /// Rewrites every feature value (nodes, interface, semantics) through `f`.
    pub fn map_values(&mut self, mut f: impl FnMut(&Value) -> Value) {
        let mut g = |fs: &FeatureStructure| -> FeatureStructure { fs.iter().map(|(k, v)| (k.clone(), f(v))).collect() };
        self.root.map_values(&mut g);
        self.interface = g(&self.interface);
        for lit in &mut self.semantics.literals {
            for a in &mut lit.args {
                *a = f(a);
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Grammar {
    pub axiom: String,
    pub trees: BTreeMap<String, ElementaryTree>,
    pub families: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum GrammarError {
    #[error("grammar JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate tree name '{0}'")]
    DuplicateTree(String),
}

impl Grammar {
    /// Builds a grammar; families are collected from the trees.
    pub fn new(axiom: &str, trees: impl IntoIterator<Item = ElementaryTree>) -> Result<Self, GrammarError> {
        let mut g = Grammar { axiom: axiom.into(), ..Default::default() };
        for t in trees {
            g.families.entry(t.family.clone()).or_default().insert(t.name.clone());
            if g.trees.contains_key(&t.name) {
                return Err(GrammarError::DuplicateTree(t.name));
            }
            g.trees.insert(t.name.clone(), t);
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, GrammarError> {
        let spec: GrammarSpec = serde_json::from_str(text)?;
        let trees = spec.trees.into_iter().map(TreeSpec::build);
        Grammar::new(&spec.axiom, trees)
    }

    pub fn family(&self, name: &str) -> impl Iterator<Item = &ElementaryTree> {
        self.families.get(name).into_iter().flatten().filter_map(|n| self.trees.get(n))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarSpec {
    axiom: String,
    trees: Vec<TreeSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeSpec {
    name: String,
    family: String,
    #[serde(rename = "type")]
    tree_type: TreeType,
    root: NodeSpec,
    #[serde(default)]
    interface: FeatureStructure,
    #[serde(default)]
    semantics: Vec<Literal>,
}

impl TreeSpec {
    fn build(self) -> ElementaryTree {
        let mut t = ElementaryTree::new(&self.name, &self.family, self.tree_type, self.root.build());
        t.interface = self.interface;
        t.semantics.literals = self.semantics;
        t
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeSpec {
    cat: String,
    #[serde(default = "default_kind")]
    kind: NodeKind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    top: FeatureStructure,
    #[serde(default)]
    bot: FeatureStructure,
    #[serde(default)]
    adj: Option<AdjConstraint>,
    #[serde(default)]
    children: Vec<NodeSpec>,
}

fn default_kind() -> NodeKind {
    NodeKind::Internal
}

impl NodeSpec {
    fn build(self) -> TreeNode {
        TreeNode {
            adj: self.adj.unwrap_or(AdjConstraint::default_for(self.kind)),
            category: self.cat,
            kind: self.kind,
            top: self.top,
            bottom: self.bot,
            children: self.children.into_iter().map(NodeSpec::build).collect(),
            name: self.name,
            gorn: Gorn::root(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub tree: String,
    pub gorn: Option<Gorn>,
    pub rule: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.gorn {
            Some(g) => write!(f, "tree '{}' at {}: {}", self.tree, g, self.rule),
            None => write!(f, "tree '{}': {}", self.tree, self.rule),
        }
    }
}

/// Structural checks on a single tree.
pub fn validate_tree(t: &ElementaryTree) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |gorn: Option<&Gorn>, rule: String| out.push(Diagnostic { tree: t.name.clone(), gorn: gorn.cloned(), rule });

    check_gorn(&t.root, &Gorn::root(), &mut |g, r| diag(Some(g), r));

    let nodes = t.nodes();
    for n in &nodes {
        match n.kind {
            NodeKind::Substitution | NodeKind::Foot | NodeKind::Lexical if !n.children.is_empty() => {
                diag(Some(&n.gorn), format!("{:?} node must not have children", n.kind).to_lowercase());
            }
            NodeKind::Anchor if n.children.len() > 1 || n.children.iter().any(|c| c.kind != NodeKind::Lexical) => {
                diag(Some(&n.gorn), "anchor node may only carry its lexical item".into());
            }
            NodeKind::Lexical if !n.top.is_empty() || !n.bottom.is_empty() => {
                diag(Some(&n.gorn), "lexical node must not carry features".into());
            }
            _ => {}
        }
        if n.category.is_empty() {
            diag(Some(&n.gorn), "empty category".into());
        }
    }

    let feet: Vec<_> = nodes.iter().filter(|n| n.kind == NodeKind::Foot).collect();
    match t.tree_type {
        TreeType::Initial if !feet.is_empty() => diag(Some(&feet[0].gorn), "initial tree has a foot node".into()),
        TreeType::Auxiliary if feet.len() != 1 => diag(None, format!("auxiliary tree has {} foot nodes, expected 1", feet.len())),
        TreeType::Auxiliary if feet[0].category != t.root.category => diag(
            Some(&feet[0].gorn),
            format!("foot category '{}' differs from root category '{}'", feet[0].category, t.root.category),
        ),
        _ => {}
    }
    let anchors = nodes.iter().filter(|n| n.kind == NodeKind::Anchor).count();
    if anchors > 1 {
        diag(None, format!("{anchors} anchor nodes, at most 1 allowed"));
    }
    out
}

fn check_gorn(n: &TreeNode, expect: &Gorn, diag: &mut impl FnMut(&Gorn, String)) {
    if &n.gorn != expect {
        diag(expect, format!("node records address {} but sits at {}", n.gorn, expect));
    }
    for (i, c) in n.children.iter().enumerate() {
        check_gorn(c, &expect.child(i), diag);
    }
}

/// Every violated structural invariant of the grammar; empty when well formed.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if g.axiom.is_empty() {
        out.push(Diagnostic { tree: String::new(), gorn: None, rule: "empty axiom".into() });
    }
    for (key, t) in &g.trees {
        if key != &t.name {
            out.push(Diagnostic { tree: t.name.clone(), gorn: None, rule: format!("registered under name '{key}'") });
        }
        if !g.families.get(&t.family).is_some_and(|f| f.contains(&t.name)) {
            out.push(Diagnostic { tree: t.name.clone(), gorn: None, rule: format!("missing from family '{}'", t.family) });
        }
        out.extend(validate_tree(t));
    }
    for (fam, members) in &g.families {
        for m in members.iter().filter(|m| !g.trees.contains_key(*m)) {
            out.push(Diagnostic { tree: m.clone(), gorn: None, rule: format!("family '{fam}' references a missing tree") });
        }
    }
    out
}
