//! Two-layer lexicon: inflected forms map to lemmas, lemmas select tree
//! families and carry the equations, filters and co-anchors used when the
//! tree schemata are anchored.

mod anchor;
mod text;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fs::{FeatureStructure, Value};
use crate::semantics::SemClass;

pub use anchor::{anchor, AnchorError, AnchoredTree, Anchoring};
pub use text::{parse_lemmas, parse_morph};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MorphEntry {
    pub word: String,
    pub lemma: String,
    pub features: FeatureStructure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Equation {
    pub node: String,
    pub side: Side,
    pub attr: String,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coanchor {
    pub node: String,
    pub cat: String,
    pub word: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub entry: String,
    pub cat: String,
    pub sem: Option<SemClass>,
    /// Kept verbatim, never interpreted.
    pub acc: String,
    pub fam: String,
    pub filters: FeatureStructure,
    /// Kept verbatim, never interpreted.
    pub ex: String,
    pub equations: Vec<Equation>,
    pub coanchors: Vec<Coanchor>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct FormatError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("morphological lexicon, {0}")]
    Morph(FormatError),
    #[error("lemma lexicon, {0}")]
    Lemma(FormatError),
    #[error("lexicon JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconDoc {
    morph: Vec<MorphEntry>,
    lemmas: Vec<LemmaEntry>,
}

#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    morph: Vec<MorphEntry>,
    lemmas: Vec<LemmaEntry>,
    by_word: HashMap<String, Vec<usize>>,
    by_lemma: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Builds a lexicon in canonical order (entries sorted, duplicates kept).
    pub fn new(mut morph: Vec<MorphEntry>, mut lemmas: Vec<LemmaEntry>) -> Self {
        morph.sort();
        lemmas.sort();
        let mut by_word: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, m) in morph.iter().enumerate() {
            by_word.entry(m.word.clone()).or_default().push(i);
        }
        let mut by_lemma: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, l) in lemmas.iter().enumerate() {
            by_lemma.entry(l.entry.clone()).or_default().push(i);
        }
        Lexicon { morph, lemmas, by_word, by_lemma }
    }

    pub fn from_text(morph: &str, lemmas: &str) -> Result<Self, LexiconError> {
        Ok(Lexicon::new(parse_morph(morph).map_err(LexiconError::Morph)?, parse_lemmas(lemmas).map_err(LexiconError::Lemma)?))
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let doc: LexiconDoc = serde_json::from_str(text)?;
        Ok(Lexicon::new(doc.morph, doc.lemmas))
    }

    /// Canonical JSON: pretty printed, entries and attributes sorted, with a
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let doc = LexiconDoc { morph: self.morph.clone(), lemmas: self.lemmas.clone() };
        let mut s = serde_json::to_string_pretty(&doc).expect("lexicon serializes");
        s.push('\n');
        s
    }

    pub fn morph(&self) -> &[MorphEntry] {
        &self.morph
    }

    pub fn lemmas(&self) -> &[LemmaEntry] {
        &self.lemmas
    }

    pub fn analyses(&self, word: &str) -> impl Iterator<Item = &MorphEntry> {
        self.by_word.get(word).into_iter().flatten().map(|&i| &self.morph[i])
    }

    pub fn lemma_entries(&self, lemma: &str) -> impl Iterator<Item = &LemmaEntry> {
        self.by_lemma.get(lemma).into_iter().flatten().map(|&i| &self.lemmas[i])
    }

    /// Words that some lemma attaches as a co-anchor.
    pub fn coanchor_words(&self) -> impl Iterator<Item = &str> {
        self.lemmas.iter().flat_map(|l| l.coanchors.iter().map(|c| c.word.as_str()))
    }
}

/// Converts the two text layers into the canonical machine document.
pub fn convert(morph_text: &str, lemma_text: &str) -> Result<String, LexiconError> {
    Ok(Lexicon::from_text(morph_text, lemma_text)?.to_json())
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Top => "",
            Side::Bottom => ".bot",
        };
        write!(f, "{}{} -> {} = {}", self.node, side, self.attr, self.value)
    }
}
