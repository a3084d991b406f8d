//! The human-editable lexicon formats: one morphological entry per line, and
//! lemma entries as blocks of `*FIELD:` lines.

use crate::fs::{FeatureStructure, Value};
use crate::semantics::SemClass;

use super::{Coanchor, Equation, FormatError, LemmaEntry, MorphEntry, Side};

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('%')
}

/// Parses `word lemma [attr=val,...]` lines. `%` starts a comment line.
pub fn parse_morph(text: &str) -> Result<Vec<MorphEntry>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let err = |reason: String| FormatError { line: i + 1, reason };
        let line = line.trim();
        let mut parts = line.splitn(3, char::is_whitespace);
        let word = parts.next().unwrap_or_default();
        let lemma = parts.next().map(str::trim).unwrap_or_default();
        if lemma.is_empty() {
            return Err(err("expected 'word lemma [features]'".into()));
        }
        let rest = parts.next().map(str::trim).unwrap_or_default();
        let features = if rest.is_empty() {
            FeatureStructure::new()
        } else {
            rest.parse().map_err(|e| err(format!("{e}")))?
        };
        out.push(MorphEntry { word: word.into(), lemma: lemma.into(), features });
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Entry,
    Cat,
    Sem,
    Acc,
    Fam,
    Filters,
    Ex,
    Equations,
    Coanchors,
}

impl Field {
    fn parse(name: &str) -> Option<Field> {
        Some(match name {
            "ENTRY" => Field::Entry,
            "CAT" => Field::Cat,
            "SEM" => Field::Sem,
            "ACC" => Field::Acc,
            "FAM" => Field::Fam,
            "FILTERS" => Field::Filters,
            "EX" => Field::Ex,
            "EQUATIONS" => Field::Equations,
            "COANCHORS" => Field::Coanchors,
            _ => return None,
        })
    }
}

struct Block {
    start: usize,
    entry: LemmaEntry,
    has_fam: bool,
    seen: Vec<Field>,
}

impl Block {
    fn finish(self) -> Result<LemmaEntry, FormatError> {
        if !self.has_fam || self.entry.fam.is_empty() {
            return Err(FormatError { line: self.start, reason: format!("entry '{}' has no *FAM", self.entry.entry) });
        }
        Ok(self.entry)
    }
}

fn split_arrow(s: &str) -> Option<(&str, &str)> {
    s.split_once("->").or_else(|| s.split_once('→')).map(|(a, b)| (a.trim(), b.trim()))
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

/// `node -> attr = value`, where `node.bot` / `node.top` pick the side.
fn parse_equation(s: &str) -> Result<Equation, String> {
    let (lhs, rhs) = split_arrow(s).ok_or("equation needs '->'")?;
    let (node, side) = match lhs.rsplit_once('.') {
        Some((n, "top")) => (n, Side::Top),
        Some((n, "bot")) | Some((n, "bottom")) => (n, Side::Bottom),
        _ => (lhs, Side::Top),
    };
    if !is_identifier(node) {
        return Err(format!("bad node name '{node}'"));
    }
    let (attr, value) = rhs.split_once('=').ok_or("equation needs 'attr = value'")?;
    let (attr, value) = (attr.trim(), value.trim());
    if attr.is_empty() || value.is_empty() {
        return Err("equation needs 'attr = value'".into());
    }
    Ok(Equation { node: node.into(), side, attr: attr.into(), value: value.parse::<Value>().unwrap() })
}

/// `node -> word/cat`
fn parse_coanchor(s: &str) -> Result<Coanchor, String> {
    let (node, rhs) = split_arrow(s).ok_or("co-anchor needs '->'")?;
    let (word, cat) = rhs.rsplit_once('/').ok_or("co-anchor needs 'word/cat'")?;
    if !is_identifier(node) || word.trim().is_empty() || cat.trim().is_empty() {
        return Err(format!("malformed co-anchor '{s}'"));
    }
    Ok(Coanchor { node: node.into(), cat: cat.trim().into(), word: word.trim().into() })
}

fn parse_sem(s: &str) -> Result<Option<SemClass>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    let (name, params) = match s.find('[') {
        Some(i) => (s[..i].trim(), s[i..].parse().map_err(|e| format!("*SEM parameters: {e}"))?),
        None => (s, FeatureStructure::new()),
    };
    if name.is_empty() {
        return Err("*SEM needs a class name".into());
    }
    Ok(Some(SemClass { name: name.into(), params }))
}

/// Parses lemma blocks. Each block starts at `*ENTRY:`; the lines following
/// `*EQUATIONS:` and `*COANCHORS:` are list items until the next field.
pub fn parse_lemmas(text: &str) -> Result<Vec<LemmaEntry>, FormatError> {
    let mut out = Vec::new();
    let mut block: Option<Block> = None;
    let mut list_field: Option<Field> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if is_skippable(raw) {
            continue;
        }
        let err = |reason: String| FormatError { line: line_no, reason };
        let line = raw.trim();

        let Some(field_line) = line.strip_prefix('*') else {
            let (Some(b), Some(f)) = (block.as_mut(), list_field) else {
                return Err(err(format!("unexpected line '{line}'")));
            };
            match f {
                Field::Equations => b.entry.equations.push(parse_equation(line).map_err(err)?),
                _ => b.entry.coanchors.push(parse_coanchor(line).map_err(err)?),
            }
            continue;
        };

        let (name, value) = field_line.split_once(':').ok_or_else(|| err(format!("field '*{field_line}' lacks ':'")))?;
        let value = value.trim();
        let field = Field::parse(name.trim()).ok_or_else(|| err(format!("unknown field '*{}'", name.trim())))?;
        list_field = None;

        if field == Field::Entry {
            if let Some(b) = block.take() {
                out.push(b.finish()?);
            }
            if value.is_empty() {
                return Err(err("empty *ENTRY".into()));
            }
            block = Some(Block {
                start: line_no,
                entry: LemmaEntry { entry: value.into(), ..Default::default() },
                has_fam: false,
                seen: vec![Field::Entry],
            });
            continue;
        }

        let b = block.as_mut().ok_or_else(|| err("field outside of an *ENTRY block".into()))?;
        if b.seen.contains(&field) {
            return Err(err(format!("duplicate field '*{}'", name.trim())));
        }
        b.seen.push(field);
        let e = &mut b.entry;
        match field {
            Field::Entry => unreachable!(),
            Field::Cat => e.cat = value.into(),
            Field::Sem => e.sem = parse_sem(value).map_err(err)?,
            Field::Acc => e.acc = value.into(),
            Field::Fam => {
                e.fam = value.into();
                b.has_fam = true;
            }
            Field::Filters => {
                e.filters = if value.is_empty() { FeatureStructure::new() } else { value.parse().map_err(|x| err(format!("*FILTERS: {x}")))? }
            }
            Field::Ex => e.ex = value.into(),
            Field::Equations => {
                list_field = Some(field);
                if !value.is_empty() {
                    e.equations.push(parse_equation(value).map_err(err)?);
                }
            }
            Field::Coanchors => {
                list_field = Some(field);
                if !value.is_empty() {
                    e.coanchors.push(parse_coanchor(value).map_err(err)?);
                }
            }
        }
    }
    if let Some(b) = block {
        out.push(b.finish()?);
    }
    Ok(out)
}
