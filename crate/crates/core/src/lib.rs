//! Parsing with tree-adjoining grammars through simple range concatenation
//! grammars.
//!
//! The pipeline anchors lexicon entries into tree schemata, prunes lexical
//! choices with a polarity automaton, converts each surviving tree set into a
//! simple RCG, parses it, and reads TAG derivations, derived trees and flat
//! semantics back off the RCG derivations.

pub mod export;
pub mod fs;
pub mod interpret;
pub mod lexicon;
pub mod pipeline;
pub mod polarity;
pub mod rcg;
pub mod semantics;
pub mod tag2rcg;
pub mod tree;

pub use fs::{Binding, FeatureStructure, Value, Var};
pub use lexicon::{AnchoredTree, Anchoring, Lexicon};
pub use pipeline::{run, ParseOptions, Resources, Run, Status};
pub use tree::{ElementaryTree, Gorn, Grammar, NodeKind, TreeNode, TreeType};
