//! Flat semantics: per-tree literal templates whose arguments share the
//! variable namespace of the tree's node features, so feature unification
//! during derivation instantiates them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fs::{Binding, FeatureStructure, Value};
use crate::interpret::{scope_of, DerivationTree};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub pred: String,
    pub args: Vec<Value>,
}

impl Literal {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        Literal { pred: pred.into(), args: args.iter().map(|a| a.parse().unwrap()).collect() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A semantic class reference such as `BinaryRel[pred=love]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SemClass {
    #[serde(rename = "class")]
    pub name: String,
    pub params: FeatureStructure,
}

impl fmt::Display for SemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, self.params)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SemTemplate {
    pub literals: Vec<Literal>,
    pub class: Option<SemClass>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SemError {
    #[error("unknown semantic class '{0}'")]
    UnknownClass(String),
    #[error("semantic class '{class}' needs parameter '{param}'")]
    MissingParam { class: String, param: String },
}

/// Literal skeletons per class. In a skeleton an atom written `$name` refers
/// to a class parameter; variables are tree variables.
#[derive(Clone, Debug, Default)]
pub struct ClassTable {
    classes: BTreeMap<String, Vec<Literal>>,
}

impl ClassTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `UnaryRel(pred) → pred(?x)`, `BinaryRel(pred) → pred(?x,?y)`,
    /// `NamedEntity(pred,const,word) → pred(const,word)`.
    pub fn builtin() -> Self {
        let mut t = Self::empty();
        t.define("UnaryRel", vec![Literal::new("$pred", &["?x"])]);
        t.define("BinaryRel", vec![Literal::new("$pred", &["?x", "?y"])]);
        t.define("NamedEntity", vec![Literal::new("$pred", &["$const", "$word"])]);
        t
    }

    pub fn define(&mut self, name: &str, skeleton: Vec<Literal>) {
        self.classes.insert(name.into(), skeleton);
    }
}

/// Expands a class into its literals. Parameters come from the class
/// reference first and from `lex` (lexical defaults such as `word`) second.
pub fn instantiate_class(class: &SemClass, lex: &FeatureStructure, table: &ClassTable) -> Result<SemTemplate, SemError> {
    let skeleton = table.classes.get(&class.name).ok_or_else(|| SemError::UnknownClass(class.name.clone()))?;
    let param = |s: &str| -> Result<String, SemError> {
        match s.strip_prefix('$') {
            None => Ok(s.to_string()),
            Some(p) => class.params.get(p).or_else(|| lex.get(p)).map(|v| v.to_string()).ok_or_else(|| SemError::MissingParam {
                class: class.name.clone(),
                param: p.to_string(),
            }),
        }
    };
    let mut literals = Vec::with_capacity(skeleton.len());
    for lit in skeleton {
        let pred = param(&lit.pred)?;
        let args = lit
            .args
            .iter()
            .map(|a| match a {
                Value::Atom(s) => param(s).map(|s| s.parse().unwrap()),
                var => Ok(var.clone()),
            })
            .collect::<Result<_, _>>()?;
        literals.push(Literal { pred, args });
    }
    Ok(SemTemplate { literals, class: Some(class.clone()) })
}

/// A resolved, sorted, duplicate-free literal set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SemOutput(pub Vec<Literal>);

impl SemOutput {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, rendered: &str) -> bool {
        self.0.iter().any(|l| l.to_string() == rendered)
    }
}

impl fmt::Display for SemOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Collects the literals of every tree in the derivation, resolving their
/// arguments through `binding`. Unbound variables stay symbolic.
pub fn compute(d: &DerivationTree, binding: &Binding) -> SemOutput {
    let mut out: Vec<Literal> = d
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(i, node)| {
            node.tree.tree.semantics.literals.iter().map(move |lit| Literal {
                pred: lit.pred.clone(),
                args: lit.args.iter().map(|a| binding.resolve(&a.in_scope(scope_of(i)))).collect(),
            })
        })
        .collect();
    out.sort();
    out.dedup();
    SemOutput(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(name: &str, params: &str) -> SemClass {
        SemClass { name: name.into(), params: params.parse().unwrap() }
    }

    #[test]
    fn binary_relation() {
        let t = instantiate_class(&class("BinaryRel", "[pred=vergessen]"), &FeatureStructure::new(), &ClassTable::builtin()).unwrap();
        assert_eq!(t.literals, vec![Literal::new("vergessen", &["?x", "?y"])]);
        assert_eq!(t.literals[0].to_string(), "vergessen(?x,?y)");
    }

    #[test]
    fn named_entity() {
        let t = instantiate_class(&class("NamedEntity", "[pred=name,const=j,word=john]"), &FeatureStructure::new(), &ClassTable::builtin())
            .unwrap();
        assert_eq!(t.literals[0].to_string(), "name(j,john)");
    }

    #[test]
    fn word_defaults_from_lexical_item() {
        let lex = FeatureStructure::new().with("word", "mary");
        let t = instantiate_class(&class("NamedEntity", "[pred=name,const=m]"), &lex, &ClassTable::builtin()).unwrap();
        assert_eq!(t.literals[0].to_string(), "name(m,mary)");
    }

    #[test]
    fn unknown_class() {
        let err = instantiate_class(&class("TernaryRel", "[]"), &FeatureStructure::new(), &ClassTable::empty()).unwrap_err();
        assert_eq!(err, SemError::UnknownClass("TernaryRel".into()));
    }

    #[test]
    fn missing_parameter() {
        let err = instantiate_class(&class("UnaryRel", "[]"), &FeatureStructure::new(), &ClassTable::builtin()).unwrap_err();
        assert!(matches!(err, SemError::MissingParam { .. }));
    }
}
