//! The whole parse: anchoring, polarity filtering, conversion per tree set,
//! RCG parsing, interpretation and semantics.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::export;
use crate::interpret::{build_derived, to_tag_derivation, DerivationTree, Derived, ProvenanceError};
use crate::lexicon::{anchor, AnchorError, AnchoredTree, Anchoring, Lexicon};
use crate::polarity::{build_automaton, valid_sets, PolarityAutomaton};
use crate::rcg::{enumerate, parse_ordered, Forest, RcgError};
use crate::semantics::{compute, ClassTable, SemOutput};
use crate::tag2rcg::{convert, ConversionError, ConvertedGrammar};
use crate::tree::Grammar;

/// Above this many valid sets, one grammar is built from every candidate
/// that occurs in some valid set instead of one grammar per set.
pub const MAX_SEPARATE_SETS: u64 = 64;

/// Derivations read off each forest before feature filtering.
pub const ENUMERATION_CAP: usize = 10_000;

pub struct Resources {
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub classes: ClassTable,
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub axiom: Option<String>,
    pub robust: bool,
    pub no_filter: bool,
    pub max_derivations: usize,
    pub semantics: bool,
    pub timings: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { axiom: None, robust: false, no_filter: false, max_derivations: 64, semantics: false, timings: false }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Anchor(#[from] AnchorError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error(transparent)]
    Rcg(RcgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NoParse,
    LexicalGap,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NoParse | Status::LexicalGap => 1,
        }
    }
}

/// How the tree sets handed to the converter were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// `--no-filter`: every candidate in one set.
    Unfiltered,
    /// One set per accepting automaton path.
    ValidSets,
    /// Too many paths: the union of candidates on accepting paths.
    Union,
    /// No accepting path: fell back to every candidate.
    Fallback,
}

pub struct SetRun {
    pub converted: ConvertedGrammar,
    pub trees: usize,
    pub forest: Option<Forest>,
    pub derivations: usize,
}

#[derive(Clone, Debug)]
pub struct Reading {
    pub set: usize,
    pub derivation: DerivationTree,
    pub derived: Derived,
    pub semantics: Option<SemOutput>,
}

pub struct Run {
    pub tokens: Vec<String>,
    pub axiom: String,
    pub anchoring: Anchoring,
    pub automaton: Option<PolarityAutomaton>,
    pub selection: Selection,
    pub valid_set_count: u64,
    pub sets: Vec<SetRun>,
    pub readings: Vec<Reading>,
    pub status: Status,
    pub timings: Vec<(&'static str, f64)>,
}

pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(String::from).collect()
}

struct Clock(Instant, Vec<(&'static str, f64)>);

impl Clock {
    fn lap(&mut self, stage: &'static str) {
        let ms = self.0.elapsed().as_secs_f64() * 1e3;
        log::info!("{stage}: {ms:.3} ms");
        self.1.push((stage, ms));
        self.0 = Instant::now();
    }
}

fn pick(anchoring: &Anchoring, chosen: &[Vec<bool>]) -> Vec<AnchoredTree> {
    anchoring.candidates.iter().zip(chosen).flat_map(|(c, keep)| c.iter().zip(keep).filter(|(_, &k)| k).map(|(t, _)| t.clone())).collect()
}

pub fn run(res: &Resources, sentence: &str, opts: &ParseOptions) -> Result<Run, PipelineError> {
    let mut clock = Clock(Instant::now(), Vec::new());
    let tokens = tokenize(sentence);
    let axiom = opts.axiom.clone().unwrap_or_else(|| res.grammar.axiom.clone());
    let anchoring = anchor(&tokens, &res.grammar, &res.lexicon, &res.classes)?;
    clock.lap("anchor");
    let mut run = Run {
        tokens,
        axiom,
        anchoring,
        automaton: None,
        selection: Selection::Unfiltered,
        valid_set_count: 0,
        sets: Vec::new(),
        readings: Vec::new(),
        status: Status::NoParse,
        timings: Vec::new(),
    };
    if !run.anchoring.gaps().is_empty() {
        let gaps: Vec<&str> = run.anchoring.gaps().into_iter().map(|i| run.tokens[i].as_str()).collect();
        log::info!("lexical gap: {}", gaps.join(" "));
        run.status = Status::LexicalGap;
        run.timings = clock.1;
        return Ok(run);
    }

    let all: Vec<Vec<bool>> = run.anchoring.candidates.iter().map(|c| vec![true; c.len()]).collect();
    let mut selections: Vec<Vec<AnchoredTree>> = Vec::new();
    if opts.no_filter {
        selections.push(pick(&run.anchoring, &all));
    } else {
        let a = build_automaton(&run.anchoring, &run.axiom).expect("gaps were ruled out");
        let paths = a.path_count();
        run.valid_set_count = paths;
        log::info!("polarity automaton: {} states, {} edges, {paths} accepting path(s)", a.states.len(), a.edges.len());
        if paths == 0 {
            log::warn!("no polarity-compatible tree set; parsing without the filter");
            run.selection = Selection::Fallback;
            selections.push(pick(&run.anchoring, &all));
        } else if paths > MAX_SEPARATE_SETS {
            run.selection = Selection::Union;
            selections.push(pick(&run.anchoring, &a.useful_candidates()));
        } else {
            run.selection = Selection::ValidSets;
            for v in valid_sets(&a) {
                selections.push(v.trees(&run.anchoring).into_iter().cloned().collect());
            }
        }
        run.automaton = Some(a);
    }
    clock.lap("filter");

    let mut seen = HashSet::new();
    for (index, trees) in selections.iter().enumerate() {
        let converted = convert(trees, &run.axiom)?;
        log::debug!("set {index}: {} trees, {} clauses\n{}", trees.len(), converted.rcg.clauses.len(), converted.rcg.dump());
        let forest = match parse_ordered(&converted.rcg, &run.tokens, &converted.start) {
            Ok(f) => Some(f),
            Err(RcgError::NoParse(np)) => {
                log::debug!("set {index}: no parse ({} facts)", np.stats.facts);
                None
            }
            Err(e) => return Err(PipelineError::Rcg(e)),
        };
        let mut count = 0;
        if let Some(f) = &forest {
            log::debug!("set {index}: {} facts, {} steps", f.stats.facts, f.stats.steps);
            for d in enumerate(f, ENUMERATION_CAP) {
                let Some(tag) = to_tag_derivation(&converted, &d)? else { continue };
                count += 1;
                let derived = match build_derived(&tag, opts.robust) {
                    Ok(r) => r,
                    Err(e) => {
                        log::debug!("set {index}: derivation pruned: {e}");
                        continue;
                    }
                };
                debug_assert_eq!(derived.tree.words(), run.tokens.iter().map(String::as_str).collect::<Vec<_>>());
                if !seen.insert(tag.key()) {
                    continue;
                }
                let semantics = opts.semantics.then(|| compute(&tag, &derived.binding));
                run.readings.push(Reading { set: index, derivation: tag, derived, semantics });
            }
        }
        run.sets.push(SetRun { converted, trees: trees.len(), forest, derivations: count });
    }
    clock.lap("parse");
    run.readings.truncate(opts.max_derivations.max(1));
    run.status = if run.readings.is_empty() { Status::NoParse } else { Status::Ok };
    run.timings = clock.1;
    Ok(run)
}

impl Run {
    pub fn gap_tokens(&self) -> Vec<String> {
        self.anchoring.gaps().into_iter().map(|i| self.tokens[i].clone()).collect()
    }

    /// The converted grammars, one block per set.
    pub fn rcg_dump(&self) -> String {
        if self.sets.len() == 1 {
            return self.sets[0].converted.rcg.dump();
        }
        let mut s = String::new();
        for (i, set) in self.sets.iter().enumerate() {
            let _ = writeln!(s, "% set {i}");
            s.push_str(&set.converted.rcg.dump());
        }
        s
    }

    /// Forest JSON of the sets that parsed; `None` if none did.
    pub fn forest_json(&self) -> Option<Json> {
        let forests: Vec<(usize, &Forest)> = self.sets.iter().enumerate().filter_map(|(i, s)| s.forest.as_ref().map(|f| (i, f))).collect();
        match forests.as_slice() {
            [] => None,
            [(_, f)] => Some(f.to_json()),
            many => Some(Json::Array(
                many.iter()
                    .map(|(i, f)| {
                        let mut j = f.to_json();
                        j["set"] = json!(i);
                        j
                    })
                    .collect(),
            )),
        }
    }

    pub fn to_json(&self, timings: bool) -> Json {
        let sets: Vec<Json> = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                json!({
                    "index": i,
                    "trees": s.trees,
                    "clauses": s.converted.rcg.clauses.len(),
                    "facts": s.forest.as_ref().map_or(0, |f| f.facts.len()),
                    "derivations": s.derivations,
                })
            })
            .collect();
        let derivations: Vec<Json> = self
            .readings
            .iter()
            .map(|r| {
                let mut j = json!({
                    "set": r.set,
                    "derivation": export::derivation_json(&r.derivation),
                    "derived": r.derived.tree,
                    "bracketed": r.derived.tree.bracketed(),
                    "dependencies": export::dependencies(&r.derivation),
                    "failures": r.derived.failures,
                });
                if let Some(sem) = &r.semantics {
                    j["semantics"] = json!(sem);
                }
                j
            })
            .collect();
        let mut j = json!({
            "status": self.status,
            "tokens": self.tokens,
            "axiom": self.axiom,
            "candidates": self.anchoring.candidates.iter().map(Vec::len).collect::<Vec<_>>(),
            "selection": self.selection,
            "valid_sets": self.valid_set_count,
            "sets": sets,
            "derivations": derivations,
        });
        if self.status == Status::LexicalGap {
            j["gaps"] = json!(self.gap_tokens());
        }
        if timings {
            j["timings_ms"] = json!(self.timings.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>());
        }
        j
    }

    pub fn to_text(&self, timings: bool) -> String {
        let mut s = String::new();
        let status = match self.status {
            Status::Ok => "ok",
            Status::NoParse => "no-parse",
            Status::LexicalGap => "lexical-gap",
        };
        let _ = writeln!(s, "status: {status}");
        if self.status == Status::LexicalGap {
            let _ = writeln!(s, "unknown tokens: {}", self.gap_tokens().join(" "));
        }
        let counts: Vec<String> = self.anchoring.candidates.iter().map(|c| c.len().to_string()).collect();
        let _ = writeln!(s, "candidates: {}", counts.join(" "));
        if self.status != Status::LexicalGap {
            let _ = writeln!(s, "valid sets: {}", self.valid_set_count);
        }
        for (i, set) in self.sets.iter().enumerate() {
            let facts = set.forest.as_ref().map_or(0, |f| f.facts.len());
            let _ = writeln!(s, "set {i}: {} trees, {} clauses, {facts} facts, {} derivations before unification", set.trees, set.converted.rcg.clauses.len(), set.derivations);
        }
        for (k, r) in self.readings.iter().enumerate() {
            let _ = writeln!(s, "\nderivation {} (set {}):", k + 1, r.set);
            for line in export::derivation_text(&r.derivation).lines() {
                let _ = writeln!(s, "  {line}");
            }
            let _ = writeln!(s, "derived: {}", r.derived.tree.bracketed());
            for dep in export::dependencies(&r.derivation) {
                let _ = writeln!(s, "dependency: {} -> {} ({})", dep.head_word, dep.dependent_word, dep.label());
            }
            for f in &r.derived.failures {
                let _ = writeln!(s, "failure: {f}");
            }
            if let Some(sem) = &r.semantics {
                let _ = writeln!(s, "semantics: {sem}");
            }
        }
        if timings {
            for (stage, ms) in &self.timings {
                let _ = writeln!(s, "time {stage}: {ms:.3} ms");
            }
        }
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        for (k, r) in self.readings.iter().enumerate() {
            s.push_str(&export::derivation_dot(&r.derivation, &format!("derivation_{}", k + 1)));
            s.push_str(&export::derived_dot(&r.derived.tree, &format!("derived_{}", k + 1)));
            s.push_str(&export::dependency_dot(&r.derivation, &self.tokens, &format!("dependencies_{}", k + 1)));
        }
        s
    }
}
