//! Flat feature structures and their unification.
//!
//! Values are either atoms or variables. Variables are scoped: every tree
//! instance taking part in a derivation gets its own scope, so two copies of
//! the same elementary tree never share variables by accident.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A unification variable. `scope` 0 is the grammar-level namespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub scope: u32,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var { name: name.into(), scope: 0 }
    }

    pub fn scoped(name: impl Into<String>, scope: u32) -> Self {
        Var { name: name.into(), scope }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(String),
    Var(Var),
}

impl Value {
    pub fn atom(s: impl Into<String>) -> Self {
        Value::Atom(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        Value::Var(Var::new(s))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Value::Var(_))
    }

    /// Moves a grammar-level variable into `scope`; atoms are unchanged.
    pub fn in_scope(&self, scope: u32) -> Value {
        match self {
            Value::Var(v) => Value::Var(Var::scoped(v.name.clone(), scope)),
            atom => atom.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => f.write_str(a),
            Value::Var(v) => write!(f, "?{}", v.name),
        }
    }
}

impl FromStr for Value {
    type Err = std::convert::Infallible;

    /// `"?X"` is a variable, anything else an atom.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.strip_prefix('?') {
            Some(name) if !name.is_empty() => Value::var(name),
            _ => Value::atom(s),
        })
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap())
    }
}

/// An attribute/value map with atomic or variable values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureStructure(BTreeMap<String, Value>);

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, attr: &str) -> Option<&Value> {
        self.0.get(attr)
    }

    pub fn insert(&mut self, attr: impl Into<String>, value: Value) -> Option<Value> {
        self.0.insert(attr.into(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.0.values()
    }

    pub fn with(mut self, attr: &str, value: &str) -> Self {
        self.insert(attr, value.parse().unwrap());
        self
    }

    pub fn in_scope(&self, scope: u32) -> FeatureStructure {
        FeatureStructure(self.0.iter().map(|(k, v)| (k.clone(), v.in_scope(scope))).collect())
    }

    /// Replaces every value by its representative under `env`.
    pub fn resolved(&self, env: &Binding) -> FeatureStructure {
        FeatureStructure(self.0.iter().map(|(k, v)| (k.clone(), env.resolve(v))).collect())
    }
}

impl FromIterator<(String, Value)> for FeatureStructure {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        FeatureStructure(iter.into_iter().collect())
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FsParseError {
    #[error("missing opening '['")]
    MissingOpen,
    #[error("unclosed bracket")]
    Unclosed,
    #[error("malformed pair '{0}'")]
    BadPair(String),
    #[error("duplicate attribute '{0}'")]
    Duplicate(String),
}

impl FromStr for FeatureStructure {
    type Err = FsParseError;

    /// Parses the bracketed text form `[attr=val,attr=?Var]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let inner = s.strip_prefix('[').ok_or(FsParseError::MissingOpen)?;
        let inner = inner.strip_suffix(']').ok_or(FsParseError::Unclosed)?;
        let mut fs = FeatureStructure::new();
        for pair in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| FsParseError::BadPair(pair.into()))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(FsParseError::BadPair(pair.into()));
            }
            if fs.insert(k, v.parse().unwrap()).is_some() {
                return Err(FsParseError::Duplicate(k.into()));
            }
        }
        Ok(fs)
    }
}

/// Variable bindings. Each bound variable points either at an atom or at
/// another variable; chains always end in an unbound variable or an atom.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    map: HashMap<Var, Value>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn resolve(&self, v: &Value) -> Value {
        let mut cur = v;
        while let Value::Var(var) = cur {
            match self.map.get(var) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    /// Unifies two values. On a clash nothing is modified and the two
    /// resolved values are returned.
    pub fn unify_values(&mut self, a: &Value, b: &Value) -> Result<(), (Value, Value)> {
        let ra = self.resolve(a);
        let rb = self.resolve(b);
        match (&ra, &rb) {
            (Value::Atom(x), Value::Atom(y)) if x == y => Ok(()),
            (Value::Atom(_), Value::Atom(_)) => Err((ra, rb)),
            (Value::Var(x), Value::Var(y)) if x == y => Ok(()),
            (Value::Var(x), _) => {
                self.map.insert(x.clone(), rb);
                Ok(())
            }
            (_, Value::Var(y)) => {
                self.map.insert(y.clone(), ra);
                Ok(())
            }
        }
    }

    /// Bound variables with their resolved values, sorted.
    pub fn resolved_pairs(&self) -> Vec<(Var, Value)> {
        let mut out: Vec<_> = self.map.keys().map(|k| (k.clone(), self.resolve(&Value::Var(k.clone())))).collect();
        out.sort();
        out
    }
}

/// An atom/atom clash on one attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clash {
    pub attribute: String,
    pub left: Value,
    pub right: Value,
}

impl fmt::Display for Clash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} vs {}", self.attribute, self.left, self.right)
    }
}

/// Unifies `a` and `b` under `env`, returning the merged structure (values
/// resolved) and the extended binding. `env` is never modified.
pub fn unify_fs(a: &FeatureStructure, b: &FeatureStructure, env: &Binding) -> Result<(FeatureStructure, Binding), Clash> {
    let mut env = env.clone();
    let (merged, clashes) = merge_into(&mut env, a, b);
    match clashes.into_iter().next() {
        Some(clash) => Err(clash),
        None => Ok((merged.resolved(&env), env)),
    }
}

/// Unifies in place and keeps going past clashes: a clashing attribute keeps
/// the left value. The merged structure is not resolved.
pub fn merge_into(env: &mut Binding, a: &FeatureStructure, b: &FeatureStructure) -> (FeatureStructure, Vec<Clash>) {
    let mut out = a.clone();
    let mut clashes = Vec::new();
    for (attr, vb) in b.iter() {
        match a.get(attr) {
            None => {
                out.insert(attr.clone(), vb.clone());
            }
            Some(va) => {
                if let Err((left, right)) = env.unify_values(va, vb) {
                    clashes.push(Clash { attribute: attr.clone(), left, right });
                }
            }
        }
    }
    (out, clashes)
}
