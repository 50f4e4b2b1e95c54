//! Closed-world validation.
//!
//! The expected fact set is recomputed directly from the `parentOf` and
//! spouse facts with plain set arithmetic (no rule engine), then diffed
//! against the graph. Each offending fact is reported exactly once.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{EntityId, Fact, Gender, KnowledgeGraph, RelationKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Entailed by the base facts but absent.
    Missing,
    /// Present, but the head's gender contradicts the relation.
    GenderMismatch,
    /// Present but not entailed by the base facts.
    Unentailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub fact: Fact,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub closed_flag: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

type Adj = BTreeMap<u32, BTreeSet<u32>>;

fn expected_facts(kg: &KnowledgeGraph) -> BTreeSet<Fact> {
    use RelationKind::*;
    let gender = |e: u32| kg.gender(EntityId(e));
    let mut parents: Adj = BTreeMap::new();
    let mut children: Adj = BTreeMap::new();
    let mut couples: BTreeSet<(u32, u32)> = BTreeSet::new();
    for f in kg.facts() {
        let (h, t) = (f.head.0, f.tail.0);
        match f.relation {
            ParentOf => {
                parents.entry(t).or_default().insert(h);
                children.entry(h).or_default().insert(t);
            }
            WifeOf | HusbandOf => {
                couples.insert((h.min(t), h.max(t)));
            }
            _ => {}
        }
    }
    let empty = BTreeSet::new();
    let parents_of = |e: u32| parents.get(&e).unwrap_or(&empty);
    let children_of = |e: u32| children.get(&e).unwrap_or(&empty);

    let mut out = BTreeSet::new();
    let gendered = |out: &mut BTreeSet<Fact>, neutral: Option<RelationKind>, female: RelationKind, male: RelationKind, h: u32, t: u32| {
        if let Some(n) = neutral {
            out.insert(Fact::new(n, h, t));
        }
        let r = if gender(h) == Gender::Female { female } else { male };
        out.insert(Fact::new(r, h, t));
    };

    for &(a, b) in &couples {
        if gender(a) != gender(b) {
            let (w, h) = if gender(a) == Gender::Female { (a, b) } else { (b, a) };
            out.insert(Fact::new(WifeOf, w, h));
            out.insert(Fact::new(HusbandOf, h, w));
        }
    }

    let mut siblings: Adj = BTreeMap::new();
    for (&c, ps) in &parents {
        for &p in ps {
            gendered(&mut out, Some(ParentOf), MotherOf, FatherOf, p, c);
            gendered(&mut out, Some(ChildOf), DaughterOf, SonOf, c, p);
            for &s in children_of(p) {
                if s != c {
                    siblings.entry(c).or_default().insert(s);
                }
            }
        }
    }
    for (&a, sibs) in &siblings {
        for &b in sibs {
            gendered(&mut out, Some(SiblingOf), SisterOf, BrotherOf, a, b);
        }
    }
    for &c in parents.keys() {
        let mut grandparents = BTreeSet::new();
        let mut aunts_uncles = BTreeSet::new();
        for &p in parents_of(c) {
            grandparents.extend(parents_of(p).iter().copied());
            if let Some(s) = siblings.get(&p) {
                aunts_uncles.extend(s.iter().copied());
            }
        }
        for g in grandparents {
            gendered(&mut out, None, GrandmotherOf, GrandfatherOf, g, c);
            gendered(&mut out, Some(GrandchildOf), GranddaughterOf, GrandsonOf, c, g);
        }
        let mut cousins = BTreeSet::new();
        for a in aunts_uncles {
            gendered(&mut out, None, AuntOf, UncleOf, a, c);
            gendered(&mut out, None, NieceOf, NephewOf, c, a);
            cousins.extend(children_of(a).iter().copied().filter(|&x| x != c));
        }
        for x in cousins {
            gendered(&mut out, Some(CousinOf), GirlCousinOf, BoyCousinOf, c, x);
        }
    }
    out
}

/// Checks every kinship invariant: inverse pairs, gendered refinements,
/// compositions (grandparents, siblings, aunts/uncles, cousins) and spouse
/// symmetry, all relative to the graph's own `parentOf` and spouse facts.
pub fn validate_closed_world(kg: &KnowledgeGraph) -> ValidationReport {
    let expected = expected_facts(kg);
    let mut violations = Vec::new();
    let actual: HashSet<&Fact> = kg.facts().iter().collect();
    for f in kg.facts() {
        if expected.contains(f) {
            continue;
        }
        let kind = match f.relation.head_gender() {
            Some(g) if kg.gender(f.head) != g => ViolationKind::GenderMismatch,
            _ => ViolationKind::Unentailed,
        };
        violations.push(Violation { kind, fact: *f });
    }
    for f in &expected {
        if !actual.contains(f) {
            violations.push(Violation {
                kind: ViolationKind::Missing,
                fact: *f,
            });
        }
    }
    ValidationReport {
        closed_flag: kg.is_closed(),
        violations,
    }
}
