//! DOT and JSON renderings of derivation trees, derived trees and the
//! dependency view of a derivation.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::interpret::{DerivationTree, DerivedNode, OpKind};
use crate::polarity::dot_escape;
use crate::tree::Gorn;

/// One dependency per derivation edge: the child's anchor depends on the
/// parent's anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dependency {
    pub head: Option<usize>,
    pub head_word: String,
    pub dependent: Option<usize>,
    pub dependent_word: String,
    pub op: OpKind,
    pub gorn: Gorn,
}

impl Dependency {
    pub fn label(&self) -> String {
        format!("{}@{}", self.op, self.gorn)
    }
}

fn anchor_word(d: &DerivationTree, i: usize) -> String {
    let t = &d.nodes[i].tree;
    if t.lex_item.is_empty() {
        t.base.clone()
    } else {
        t.lex_item.clone()
    }
}

pub fn dependencies(d: &DerivationTree) -> Vec<Dependency> {
    d.edges
        .iter()
        .map(|e| Dependency {
            head: d.nodes[e.parent].token_index,
            head_word: anchor_word(d, e.parent),
            dependent: d.nodes[e.child].token_index,
            dependent_word: anchor_word(d, e.child),
            op: e.op,
            gorn: e.gorn.clone(),
        })
        .collect()
}

fn node_label(d: &DerivationTree, i: usize) -> String {
    let n = &d.nodes[i];
    match n.token_index {
        Some(p) => format!("{} [{p}]", n.tree.label()),
        None => n.tree.label(),
    }
}

pub fn derivation_json(d: &DerivationTree) -> Json {
    let nodes: Vec<Json> = d
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "id": i,
                "tree": n.tree.label(),
                "base": n.tree.base,
                "lemma": n.tree.lemma,
                "instance": n.tree.instance_id,
                "token": n.token_index,
            })
        })
        .collect();
    json!({ "nodes": nodes, "edges": d.edges })
}

/// Indented outline, children ordered by address.
pub fn derivation_text(d: &DerivationTree) -> String {
    fn go(d: &DerivationTree, i: usize, depth: usize, out: &mut String) {
        for e in d.children(i) {
            let _ = writeln!(out, "{}{} {}: {}", "  ".repeat(depth), e.op, e.gorn, node_label(d, e.child));
            go(d, e.child, depth + 1, out);
        }
    }
    let mut out = format!("{}\n", node_label(d, 0));
    go(d, 0, 1, &mut out);
    out
}

pub fn derivation_dot(d: &DerivationTree, name: &str) -> String {
    let mut s = format!("digraph {name} {{\n  node [shape=box];\n");
    for i in 0..d.nodes.len() {
        let _ = writeln!(s, "  n{i} [label=\"{}\"];", dot_escape(&node_label(d, i)));
    }
    for e in &d.edges {
        let style = if e.op == OpKind::Adjunction { ", style=dashed" } else { "" };
        let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"{style}];", e.parent, e.child, dot_escape(&e.gorn.to_string()));
    }
    s.push_str("}\n");
    s
}

pub fn derived_dot(t: &DerivedNode, name: &str) -> String {
    fn go(n: &DerivedNode, next: &mut usize, s: &mut String) -> usize {
        let me = *next;
        *next += 1;
        let label = if n.features.is_empty() { n.category.clone() } else { format!("{} {}", n.category, n.features) };
        let shape = if n.children.is_empty() && n.kind == crate::tree::NodeKind::Lexical { ", shape=plaintext" } else { "" };
        let _ = writeln!(s, "  d{me} [label=\"{}\"{shape}];", dot_escape(&label));
        for c in &n.children {
            let k = go(c, next, s);
            let _ = writeln!(s, "  d{me} -> d{k};");
        }
        me
    }
    let mut s = format!("digraph {name} {{\n  node [shape=none];\n");
    go(t, &mut 0, &mut s);
    s.push_str("}\n");
    s
}

pub fn dependency_dot(d: &DerivationTree, tokens: &[String], name: &str) -> String {
    let mut s = format!("digraph {name} {{\n  rankdir=LR;\n");
    for (i, t) in tokens.iter().enumerate() {
        let _ = writeln!(s, "  w{i} [label=\"{}\"];", dot_escape(t));
    }
    let id = |p: Option<usize>, w: &str| match p {
        Some(p) => format!("w{p}"),
        None => format!("\"{}\"", dot_escape(w)),
    };
    for dep in dependencies(d) {
        let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", id(dep.head, &dep.head_word), id(dep.dependent, &dep.dependent_word), dot_escape(&dep.label()));
    }
    s.push_str("}\n");
    s
}
