//! Random small TAGs and a brute-force TAG derivation enumerator that shares
//! no code with the library beyond its data types.

#![allow(dead_code)]

pub mod bench;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use rcgp::fs::{FeatureStructure, Value};
use rcgp::interpret::DerivationTree;
use rcgp::lexicon::Lexicon;
use rcgp::pipeline::Resources;
use rcgp::semantics::ClassTable;
use rcgp::tree::{validate, AdjConstraint, ElementaryTree, Grammar, NodeKind, TreeNode, TreeType};

pub const WORDS: [&str; 3] = ["a", "b", "c"];
const CATS: [&str; 3] = ["S", "NP", "VP"];

pub struct RandomGrammar {
    pub seed: u64,
    pub grammar: Grammar,
    pub morph: String,
    pub lemma: String,
    /// (tree name, word, morphological features) per lexical entry.
    pub entries: Vec<(String, String, FeatureStructure)>,
}

impl RandomGrammar {
    pub fn alphabet(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.iter().map(|(_, w, _)| w.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn resources(&self) -> Resources {
        Resources {
            grammar: self.grammar.clone(),
            lexicon: Lexicon::from_text(&self.morph, &self.lemma).expect("generated lexicon parses"),
            classes: ClassTable::builtin(),
        }
    }
}

fn feature(rng: &mut StdRng, p: f64) -> FeatureStructure {
    let mut fs = FeatureStructure::new();
    if rng.gen_bool(p) {
        let v = ["sg", "pl", "?n"].choose(rng).unwrap();
        fs.insert("num", v.parse().unwrap());
    }
    fs
}

fn decorate(rng: &mut StdRng, n: &mut TreeNode) {
    if n.kind == NodeKind::Lexical {
        return;
    }
    n.top = feature(rng, 0.25);
    n.bottom = feature(rng, 0.15);
    match n.kind {
        NodeKind::Internal => {
            let r: f64 = rng.gen();
            n.adj = if r < 0.75 {
                AdjConstraint::Allowed
            } else if r < 0.95 {
                AdjConstraint::Forbidden
            } else {
                AdjConstraint::Obligatory
            };
        }
        NodeKind::Anchor if rng.gen_bool(0.2) => n.adj = AdjConstraint::Allowed,
        _ => {}
    }
    for c in &mut n.children {
        decorate(rng, c);
    }
}

/// The first two trees are an S and an NP initial tree, so that most
/// grammars have a non-empty language.
fn random_tree(rng: &mut StdRng, k: usize) -> (ElementaryTree, String) {
    let aux = k > 1 && rng.gen_bool(0.5);
    let root_cat = match k {
        0 => "S",
        1 => "NP",
        _ if !aux && rng.gen_bool(0.5) => "S",
        _ => CATS.choose(rng).unwrap(),
    };
    let anchor_cat = *["V", "N"].choose(rng).unwrap();
    let mut leaves = vec![TreeNode::new(NodeKind::Anchor, anchor_cat)];
    if aux {
        leaves.push(TreeNode::new(NodeKind::Foot, root_cat));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let cat = if rng.gen_bool(0.7) { "NP" } else { "S" };
        leaves.push(TreeNode::new(NodeKind::Substitution, cat));
    }
    if rng.gen_bool(0.15) {
        leaves.push(TreeNode::internal(CATS.choose(rng).unwrap(), vec![]));
    }
    leaves.shuffle(rng);
    let mut budget = 7usize.saturating_sub(1 + leaves.len());
    while budget > 0 && rng.gen_bool(0.5) {
        let i = rng.gen_range(0..leaves.len());
        let j = rng.gen_range(i + 1..=leaves.len());
        let inner: Vec<TreeNode> = leaves.drain(i..j).collect();
        leaves.insert(i, TreeNode::internal(CATS.choose(rng).unwrap(), inner));
        budget -= 1;
    }
    let mut root = TreeNode::internal(root_cat, leaves);
    decorate(rng, &mut root);
    let tt = if aux { TreeType::Auxiliary } else { TreeType::Initial };
    let name = format!("t{k}");
    (ElementaryTree::new(&name, &format!("F{k}"), tt, root), anchor_cat.to_lowercase())
}

pub fn random_grammar(seed: u64) -> RandomGrammar {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    let mut trees = Vec::new();
    let mut morph = String::new();
    let mut lemma = String::new();
    let mut entries = Vec::new();
    for k in 0..n {
        let (t, cat) = random_tree(&mut rng, k);
        let word = *WORDS.choose(&mut rng).unwrap();
        let feats = match rng.gen_range(0..10) {
            0..=1 => FeatureStructure::new().with("num", "sg"),
            2 => FeatureStructure::new().with("num", "pl"),
            _ => FeatureStructure::new(),
        };
        morph.push_str(&format!("{word} l{k} {feats}\n"));
        lemma.push_str(&format!("*ENTRY: l{k}\n*CAT: {cat}\n*FAM: F{k}\n\n"));
        entries.push((t.name.clone(), word.to_string(), feats));
        trees.push(t);
    }
    let grammar = Grammar::new("S", trees).unwrap();
    assert!(validate(&grammar).is_empty(), "seed {seed}: {:?}", validate(&grammar));
    RandomGrammar { seed, grammar, morph, lemma, entries }
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Op {
    Sub,
    Adj,
}

struct ONode {
    gorn: Vec<usize>,
    cat: String,
    kind: NodeKind,
    adj: AdjConstraint,
    top: FeatureStructure,
    bottom: FeatureStructure,
    children: Vec<usize>,
}

/// One lexicalized tree: a grammar tree plus the word that anchors it.
struct OTree {
    name: String,
    word: String,
    aux: bool,
    root_cat: String,
    morph: FeatureStructure,
    nodes: Vec<ONode>,
    anchor: usize,
    foot: Option<usize>,
    /// (node, operation, category, obligatory)
    sites: Vec<(usize, Op, String, bool)>,
}

fn flatten(n: &TreeNode, path: Vec<usize>, out: &mut Vec<ONode>) -> usize {
    let me = out.len();
    out.push(ONode {
        gorn: path.clone(),
        cat: n.category.clone(),
        kind: n.kind,
        adj: n.adj,
        top: n.top.clone(),
        bottom: n.bottom.clone(),
        children: vec![],
    });
    let mut kids = Vec::new();
    for (i, c) in n.children.iter().enumerate() {
        let mut p = path.clone();
        p.push(i);
        kids.push(flatten(c, p, out));
    }
    out[me].children = kids;
    me
}

/// (site node, operation, filler) triples of one derivation.
type Ops = Vec<(usize, Op, Rc<Deriv>)>;

struct Deriv {
    tree: usize,
    ops: Ops,
    size: usize,
}

pub struct Oracle {
    trees: Vec<OTree>,
    memo: HashMap<(usize, usize), Vec<Rc<Deriv>>>,
}

impl Oracle {
    pub fn new(g: &RandomGrammar) -> Self {
        let mut trees = Vec::new();
        for (name, word, morph) in &g.entries {
            let t = &g.grammar.trees[name];
            let mut nodes = Vec::new();
            flatten(&t.root, vec![], &mut nodes);
            let anchor = nodes.iter().position(|n| n.kind == NodeKind::Anchor).unwrap();
            // anchoring: the word's features must agree with the anchor's top
            let clash = morph.iter().any(|(a, v)| matches!((nodes[anchor].top.get(a), v), (Some(Value::Atom(x)), Value::Atom(y)) if x != y));
            if clash {
                continue;
            }
            let foot = nodes.iter().position(|n| n.kind == NodeKind::Foot);
            let mut sites = Vec::new();
            for (i, n) in nodes.iter().enumerate() {
                match n.kind {
                    NodeKind::Substitution => sites.push((i, Op::Sub, n.cat.clone(), true)),
                    NodeKind::Internal | NodeKind::Anchor if n.adj != AdjConstraint::Forbidden => {
                        sites.push((i, Op::Adj, n.cat.clone(), n.adj == AdjConstraint::Obligatory))
                    }
                    _ => {}
                }
            }
            trees.push(OTree {
                name: name.clone(),
                word: word.clone(),
                aux: t.tree_type == TreeType::Auxiliary,
                root_cat: t.root.category.clone(),
                morph: morph.clone(),
                nodes,
                anchor,
                foot,
                sites,
            });
        }
        Oracle { trees, memo: HashMap::new() }
    }

    /// All derivations rooted in tree `k` using at most `budget` trees.
    fn derivs(&mut self, k: usize, budget: usize) -> Vec<Rc<Deriv>> {
        if budget == 0 {
            return vec![];
        }
        if let Some(d) = self.memo.get(&(k, budget)) {
            return d.clone();
        }
        let sites = self.trees[k].sites.clone();
        let mut partial: Vec<(Ops, usize)> = vec![(vec![], 1)];
        for (node, op, cat, required) in sites {
            let mut next = Vec::new();
            for (ops, used) in partial {
                if !required {
                    next.push((ops.clone(), used));
                }
                if used >= budget {
                    continue;
                }
                let want_aux = op == Op::Adj;
                let fillers: Vec<usize> = (0..self.trees.len()).filter(|&t| self.trees[t].aux == want_aux && self.trees[t].root_cat == cat).collect();
                for t in fillers {
                    for d in self.derivs(t, budget - used) {
                        let mut o = ops.clone();
                        let s = d.size;
                        o.push((node, op, d));
                        next.push((o, used + s));
                    }
                }
            }
            partial = next;
        }
        let out: Vec<Rc<Deriv>> = partial.into_iter().map(|(ops, size)| Rc::new(Deriv { tree: k, ops, size })).collect();
        self.memo.insert((k, budget), out.clone());
        out
    }

    fn key(&self, d: &Deriv) -> String {
        let t = &self.trees[d.tree];
        let mut kids: Vec<(Vec<usize>, Op, String)> = d.ops.iter().map(|(n, op, c)| (t.nodes[*n].gorn.clone(), *op, self.key(c))).collect();
        kids.sort();
        render_key(&t.name, &t.word, kids)
    }

    /// Yield of a derivation; auxiliary trees yield the parts left and right
    /// of the foot.
    fn yield_of(&self, d: &Deriv) -> (Vec<String>, Vec<String>) {
        let t = &self.trees[d.tree];
        let mut parts = (vec![], vec![]);
        let mut right = false;
        self.walk(d, t.nodes.first().map(|_| 0).unwrap(), &mut parts, &mut right);
        parts
    }

    fn walk(&self, d: &Deriv, n: usize, out: &mut (Vec<String>, Vec<String>), right: &mut bool) {
        let t = &self.trees[d.tree];
        let node = &t.nodes[n];
        let push = |out: &mut (Vec<String>, Vec<String>), right: bool, w: Vec<String>| if right { out.1.extend(w) } else { out.0.extend(w) };
        let op_at = |op: Op| d.ops.iter().find(|(m, o, _)| *m == n && *o == op).map(|(_, _, c)| c.clone());
        match node.kind {
            NodeKind::Lexical => push(out, *right, vec![node.cat.clone()]),
            NodeKind::Foot => *right = true,
            NodeKind::Substitution => {
                let c = op_at(Op::Sub).expect("filled");
                let (y, _) = self.yield_of(&c);
                push(out, *right, y);
            }
            _ => {
                let adj = op_at(Op::Adj).map(|c| self.yield_of(&c));
                if let Some((l, _)) = &adj {
                    push(out, *right, l.clone());
                }
                if n == t.anchor {
                    push(out, *right, vec![t.word.clone()]);
                }
                for &c in &node.children {
                    self.walk(d, c, out, right);
                }
                if let Some((_, r)) = adj {
                    push(out, *right, r);
                }
            }
        }
    }

    /// Whether all feature constraints of the derived tree are consistent.
    fn unifies(&self, d: &Deriv) -> bool {
        let mut u = Unifier::default();
        let mut next = 0;
        u.instance(self, d, &mut next).is_some() && !u.failed
    }

    /// Derivation keys grouped by yield, for all yields up to `max_len`.
    pub fn language(&mut self, axiom: &str, max_len: usize) -> BTreeMap<Vec<String>, BTreeSet<String>> {
        let mut out: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
        let roots: Vec<usize> = (0..self.trees.len()).filter(|&t| !self.trees[t].aux && self.trees[t].root_cat == axiom).collect();
        for k in roots {
            for d in self.derivs(k, max_len) {
                if !self.unifies(&d) {
                    continue;
                }
                let (y, _) = self.yield_of(&d);
                out.entry(y).or_default().insert(self.key(&d));
            }
        }
        out
    }
}

pub fn render_key(name: &str, word: &str, kids: Vec<(Vec<usize>, Op, String)>) -> String {
    let mut s = format!("{name}:{word}");
    if !kids.is_empty() {
        s.push('(');
        let parts: Vec<String> = kids
            .into_iter()
            .map(|(g, op, k)| {
                let g: Vec<String> = g.iter().map(|i| i.to_string()).collect();
                format!("{}@{}:{k}", if op == Op::Sub { "sub" } else { "adj" }, g.join("."))
            })
            .collect();
        s.push_str(&parts.join(" "));
        s.push(')');
    }
    s
}

/// The same key, computed from a pipeline derivation.
pub fn pipeline_key(d: &DerivationTree) -> String {
    fn go(d: &DerivationTree, i: usize) -> String {
        let t = &d.nodes[i].tree;
        let mut kids: Vec<(Vec<usize>, Op, String)> = d
            .edges
            .iter()
            .filter(|e| e.parent == i)
            .map(|e| {
                let op = if e.op == rcgp::interpret::OpKind::Substitution { Op::Sub } else { Op::Adj };
                (e.gorn.0.clone(), op, go(d, e.child))
            })
            .collect();
        kids.sort();
        render_key(&t.base, &t.lex_item, kids)
    }
    go(d, 0)
}

/// Union-find over feature structures (groups) and over values.
#[derive(Default)]
struct Unifier {
    group_parent: Vec<usize>,
    group_attrs: Vec<BTreeMap<String, usize>>,
    val_parent: Vec<usize>,
    val_atom: Vec<Option<String>>,
    vars: HashMap<(usize, String), usize>,
    failed: bool,
}

impl Unifier {
    fn new_val(&mut self, atom: Option<String>) -> usize {
        self.val_parent.push(self.val_parent.len());
        self.val_atom.push(atom);
        self.val_parent.len() - 1
    }

    fn val(&mut self, inst: usize, v: &Value) -> usize {
        match v {
            Value::Atom(a) => self.new_val(Some(a.clone())),
            Value::Var(var) => {
                if let Some(&id) = self.vars.get(&(inst, var.name.clone())) {
                    return id;
                }
                let id = self.new_val(None);
                self.vars.insert((inst, var.name.clone()), id);
                id
            }
        }
    }

    fn find_val(&mut self, mut x: usize) -> usize {
        while self.val_parent[x] != x {
            self.val_parent[x] = self.val_parent[self.val_parent[x]];
            x = self.val_parent[x];
        }
        x
    }

    fn union_val(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find_val(a), self.find_val(b));
        if a == b {
            return;
        }
        match (self.val_atom[a].clone(), self.val_atom[b].clone()) {
            (Some(x), Some(y)) if x != y => self.failed = true,
            (None, Some(_)) => self.val_parent[a] = b,
            _ => self.val_parent[b] = a,
        }
    }

    fn group(&mut self, inst: usize, fs: &FeatureStructure) -> usize {
        let mut attrs = BTreeMap::new();
        for (a, v) in fs.iter() {
            let id = self.val(inst, v);
            attrs.insert(a.clone(), id);
        }
        self.group_parent.push(self.group_parent.len());
        self.group_attrs.push(attrs);
        self.group_parent.len() - 1
    }

    fn find_group(&mut self, mut x: usize) -> usize {
        while self.group_parent[x] != x {
            x = self.group_parent[x];
        }
        x
    }

    fn union_group(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find_group(a), self.find_group(b));
        if a == b {
            return;
        }
        self.group_parent[b] = a;
        let attrs = std::mem::take(&mut self.group_attrs[b]);
        for (attr, vb) in attrs {
            match self.group_attrs[a].get(&attr).copied() {
                Some(va) => self.union_val(va, vb),
                None => {
                    self.group_attrs[a].insert(attr, vb);
                }
            }
        }
    }

    /// Creates the groups of one tree instance and its subderivations;
    /// returns the (top, bottom) groups of every node of the instance.
    fn instance(&mut self, o: &Oracle, d: &Deriv, next: &mut usize) -> Option<Vec<(usize, usize)>> {
        let inst = *next;
        *next += 1;
        let t = &o.trees[d.tree];
        let groups: Vec<(usize, usize)> = t.nodes.iter().map(|n| (self.group(inst, &n.top), self.group(inst, &n.bottom))).collect();
        let morph = self.group(inst, &t.morph);
        self.union_group(groups[t.anchor].0, morph);
        let mut replaced = vec![false; t.nodes.len()];
        for (n, op, c) in &d.ops {
            let cg = self.instance(o, c, next)?;
            let ct = &o.trees[c.tree];
            match op {
                Op::Sub => {
                    self.union_group(groups[*n].0, cg[0].0);
                    self.union_group(groups[*n].1, cg[0].1);
                }
                Op::Adj => {
                    self.union_group(groups[*n].0, cg[0].0);
                    self.union_group(groups[*n].1, cg[ct.foot.unwrap()].1);
                }
            }
            replaced[*n] = true;
        }
        for (i, n) in t.nodes.iter().enumerate() {
            if n.kind != NodeKind::Lexical && !replaced[i] {
                self.union_group(groups[i].0, groups[i].1);
            }
        }
        Some(groups)
    }
}

/// All strings over `alphabet` of length at most `max_len`.
pub fn strings(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<String>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for w in alphabet {
                let mut t = s.clone();
                t.push(w.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
