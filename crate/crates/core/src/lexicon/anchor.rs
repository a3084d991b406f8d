use std::collections::BTreeSet;

use serde::Serialize;

use crate::fs::{merge_into, Binding, FeatureStructure};
use crate::semantics::{instantiate_class, ClassTable, SemError};
use crate::tree::{ElementaryTree, Gorn, Grammar, NodeKind, TreeNode};

use super::{Coanchor, Equation, LemmaEntry, Lexicon, MorphEntry, Side};

/// What the lexicon contributed to an anchored tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct AppliedLex {
    pub morph: FeatureStructure,
    pub filters: FeatureStructure,
    pub equations: Vec<Equation>,
    pub coanchors: Vec<Coanchor>,
}

/// A tree schema instantiated for one input token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchoredTree {
    pub instance_id: usize,
    /// Name of the grammar tree this instance was built from.
    pub base: String,
    /// `None` for trees without an anchor, which are not selected by tokens.
    pub token_index: Option<usize>,
    pub lex_item: String,
    pub lemma: String,
    pub applied: AppliedLex,
    /// The instantiated tree, including the filled-in anchor, co-anchors and
    /// the instantiated semantics.
    pub tree: ElementaryTree,
}

impl AnchoredTree {
    /// Wraps a tree that takes no lexical item (e.g. an ε-initial tree).
    pub fn unanchored(instance_id: usize, tree: ElementaryTree) -> Self {
        AnchoredTree {
            instance_id,
            base: tree.name.clone(),
            token_index: None,
            lex_item: String::new(),
            lemma: String::new(),
            applied: AppliedLex::default(),
            tree,
        }
    }

    pub fn label(&self) -> String {
        if self.lex_item.is_empty() {
            self.base.clone()
        } else {
            format!("{}:{}", self.base, self.lex_item)
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnchorError {
    #[error("tree '{tree}' has no node named '{node}'")]
    UnknownNodeName { tree: String, node: String },
    #[error("co-anchor '{word}' cannot attach to node '{node}' of tree '{tree}'")]
    CoanchorTarget { tree: String, node: String, word: String },
    #[error("tree '{tree}': {source}")]
    Semantics { tree: String, source: SemError },
}

/// Per-token candidate trees for one sentence.
#[derive(Clone, Debug, Default)]
pub struct Anchoring {
    pub tokens: Vec<String>,
    pub candidates: Vec<Vec<AnchoredTree>>,
}

impl Anchoring {
    /// Co-anchor words carried by any candidate.
    pub fn coanchor_words(&self) -> BTreeSet<&str> {
        self.candidates.iter().flatten().flat_map(|t| t.applied.coanchors.iter().map(|c| c.word.as_str())).collect()
    }

    /// Tokens that can be consumed as a co-anchor of some candidate.
    pub fn coanchor_covered(&self) -> Vec<bool> {
        let words = self.coanchor_words();
        self.tokens.iter().map(|t| words.contains(t.as_str())).collect()
    }

    /// Indices of tokens with no candidate tree that no co-anchor covers.
    pub fn gaps(&self) -> Vec<usize> {
        let covered = self.coanchor_covered();
        (0..self.tokens.len()).filter(|&i| self.candidates[i].is_empty() && !covered[i]).collect()
    }

    pub fn all_trees(&self) -> impl Iterator<Item = &AnchoredTree> {
        self.candidates.iter().flatten()
    }
}

/// Selects and instantiates the candidate trees of every token.
pub fn anchor(tokens: &[String], grammar: &Grammar, lexicon: &Lexicon, classes: &ClassTable) -> Result<Anchoring, AnchorError> {
    let mut next_id = 0;
    let mut candidates = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        let mut here = Vec::new();
        for morph in lexicon.analyses(token) {
            for lemma in lexicon.lemma_entries(&morph.lemma) {
                for schema in grammar.family(&lemma.fam) {
                    if let Some(tree) = instantiate(schema, token, morph, lemma, classes)? {
                        here.push(AnchoredTree {
                            instance_id: next_id,
                            base: schema.name.clone(),
                            token_index: Some(i),
                            lex_item: token.clone(),
                            lemma: lemma.entry.clone(),
                            applied: AppliedLex {
                                morph: morph.features.clone(),
                                filters: lemma.filters.clone(),
                                equations: lemma.equations.clone(),
                                coanchors: lemma.coanchors.clone(),
                            },
                            tree,
                        });
                        next_id += 1;
                    }
                }
            }
        }
        log::debug!("token {i} '{token}': {} candidate tree(s)", here.len());
        candidates.push(here);
    }
    Ok(Anchoring { tokens: tokens.to_vec(), candidates })
}

fn unify_in(env: &mut Binding, fs: &mut FeatureStructure, other: &FeatureStructure) -> bool {
    let (merged, clashes) = merge_into(env, fs, other);
    *fs = merged;
    clashes.is_empty()
}

/// Anchors one schema; `Ok(None)` when category, filters or features rule
/// the combination out.
fn instantiate(schema: &ElementaryTree, word: &str, morph: &MorphEntry, lemma: &LemmaEntry, classes: &ClassTable) -> Result<Option<ElementaryTree>, AnchorError> {
    let Some(anchor_at) = schema.anchor() else {
        return Ok(None);
    };
    let mut tree = schema.clone();
    if !tree.node_at(&anchor_at).unwrap().category.eq_ignore_ascii_case(&lemma.cat) {
        return Ok(None);
    }
    let mut env = Binding::new();
    if !unify_in(&mut env, &mut tree.interface, &lemma.filters) {
        return Ok(None);
    }
    let anchor_node = tree.node_at_mut(&anchor_at).unwrap();
    if !unify_in(&mut env, &mut anchor_node.top, &morph.features) {
        return Ok(None);
    }
    anchor_node.children = vec![TreeNode::lexical(word)];

    for eq in &lemma.equations {
        let at = named(&tree, &eq.node)?;
        let node = tree.node_at_mut(&at).unwrap();
        let side = match eq.side {
            Side::Top => &mut node.top,
            Side::Bottom => &mut node.bottom,
        };
        let mut fs = FeatureStructure::new();
        fs.insert(eq.attr.clone(), eq.value.clone());
        if !unify_in(&mut env, side, &fs) {
            return Ok(None);
        }
    }

    for co in &lemma.coanchors {
        let at = named(&tree, &co.node)?;
        let node = tree.node_at_mut(&at).unwrap();
        if node.kind != NodeKind::Internal || !node.children.is_empty() || !node.category.eq_ignore_ascii_case(&co.cat) {
            return Err(AnchorError::CoanchorTarget { tree: schema.name.clone(), node: co.node.clone(), word: co.word.clone() });
        }
        node.children.push(TreeNode::lexical(&co.word));
    }

    if let Some(class) = &lemma.sem {
        let lex = FeatureStructure::new().with("word", &lemma.entry);
        let t = instantiate_class(class, &lex, classes).map_err(|source| AnchorError::Semantics { tree: schema.name.clone(), source })?;
        tree.semantics.literals.extend(t.literals);
        tree.semantics.class = t.class;
    }

    tree.map_values(|v| env.resolve(v));
    tree.root.renumber(Gorn::root());
    Ok(Some(tree))
}

fn named(tree: &ElementaryTree, name: &str) -> Result<Gorn, AnchorError> {
    tree.named(name).ok_or_else(|| AnchorError::UnknownNodeName { tree: tree.name.clone(), node: name.into() })
}
