//! Tab-separated KG files.
//!
//! Facts: one `head<TAB>relation<TAB>tail` per line. Entities: one
//! `id<TAB>gender` per line. Both are written in sorted order.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{EntityId, Fact, Gender, KnowledgeGraph};
use crate::error::{Error, Result};

pub fn format_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let sorted: BTreeSet<&Fact> = facts.into_iter().collect();
    let mut out = String::new();
    for f in sorted {
        let _ = writeln!(out, "{}\t{}\t{}", f.head, f.relation, f.tail);
    }
    out
}

pub fn format_entities(genders: &[Gender]) -> String {
    let mut out = String::new();
    for (i, g) in genders.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{}", g.as_str());
    }
    out
}

fn fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split('\t').collect();
    if parts.len() != n {
        return Err(Error::Parse {
            line: lineno,
            reason: format!("expected {n} tab-separated fields, found {}", parts.len()),
        });
    }
    Ok(parts)
}

fn entity(s: &str, lineno: usize) -> Result<u32> {
    s.parse::<u32>().map_err(|e| Error::Parse {
        line: lineno,
        reason: format!("bad entity id `{s}`: {e}"),
    })
}

/// Parses a fact file. Blank lines are skipped; duplicates are kept.
pub fn parse_facts(text: &str) -> Result<Vec<Fact>> {
    let mut facts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let p = fields(line, 3, lineno)?;
        let relation = p[1].parse().map_err(|reason| Error::Parse { line: lineno, reason })?;
        facts.push(Fact {
            head: EntityId(entity(p[0], lineno)?),
            relation,
            tail: EntityId(entity(p[2], lineno)?),
        });
    }
    Ok(facts)
}

/// Parses an entity file; ids must cover `0..n` exactly once, in any order.
pub fn parse_entities(text: &str) -> Result<Vec<Gender>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let p = fields(line, 2, lineno)?;
        let id = entity(p[0], lineno)?;
        let g: Gender = p[1].parse().map_err(|reason| Error::Parse { line: lineno, reason })?;
        rows.push((id, g, lineno));
    }
    let n = rows.len();
    let mut genders = vec![None; n];
    for (id, g, lineno) in rows {
        let slot = genders.get_mut(id as usize).ok_or_else(|| Error::Parse {
            line: lineno,
            reason: format!("entity id {id} outside the dense range 0..{n}"),
        })?;
        if slot.replace(g).is_some() {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("duplicate entity id {id}"),
            });
        }
    }
    Ok(genders.into_iter().map(|g| g.expect("dense ids")).collect())
}

/// Parses both files into a graph (closed flag unset).
pub fn parse_graph(entities: &str, facts: &str) -> Result<KnowledgeGraph> {
    KnowledgeGraph::from_parts(parse_entities(entities)?, parse_facts(facts)?)
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_facts(path: &Path, facts: &BTreeSet<Fact>) -> Result<()> {
    write(path, &format_facts(facts))
}

pub fn write_graph(entities: &Path, facts: &Path, kg: &KnowledgeGraph) -> Result<()> {
    write(entities, &format_entities(kg.genders()))?;
    write_facts(facts, kg.facts())
}

pub fn read_facts(path: &Path) -> Result<Vec<Fact>> {
    parse_facts(&read(path)?)
}

pub fn read_graph(entities: &Path, facts: &Path) -> Result<KnowledgeGraph> {
    parse_graph(&read(entities)?, &read(facts)?)
}
