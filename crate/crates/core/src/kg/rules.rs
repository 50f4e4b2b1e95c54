//! A small forward-chaining engine over binary relations, evaluated
//! semi-naively to the least fixpoint, plus the kinship rule set.

use std::collections::{BTreeSet, HashMap};

use super::{Fact, Gender, KnowledgeGraph, RelationKind};

/// Rule variable, an index into the binding array.
pub type Var = u8;

const MAX_VARS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Atom {
    pub relation: RelationKind,
    pub head: Var,
    pub tail: Var,
}

const fn atom(relation: RelationKind, head: Var, tail: Var) -> Atom {
    Atom { relation, head, tail }
}

/// `head :- body[0], body[1], gender(v) = g ..., a != b`.
///
/// Bodies have one or two atoms; in a two-atom body the second atom must
/// share at least one variable with the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub genders: Vec<(Var, Gender)>,
    pub distinct: Option<(Var, Var)>,
}

impl Rule {
    fn new(head: Atom, body: &[Atom]) -> Self {
        assert!(matches!(body.len(), 1 | 2), "rule bodies have one or two atoms");
        if let [a, b] = body {
            assert!(
                [a.head, a.tail].contains(&b.head) || [a.head, a.tail].contains(&b.tail),
                "second body atom must share a variable with the first"
            );
        }
        Rule {
            head,
            body: body.to_vec(),
            genders: Vec::new(),
            distinct: None,
        }
    }

    fn gender(mut self, v: Var, g: Gender) -> Self {
        self.genders.push((v, g));
        self
    }

    fn distinct(mut self, a: Var, b: Var) -> Self {
        self.distinct = Some((a, b));
        self
    }
}

/// The canonical kinship rule set.
///
/// Siblings share at least one parent; aunts and uncles are siblings of a
/// parent (blood relatives only); cousins are children of a sibling pair;
/// gendered relations refine their neutral relation by the head's gender.
pub fn kinship_rules() -> Vec<Rule> {
    use Gender::{Female, Male};
    use RelationKind::*;
    const X: Var = 0;
    const Y: Var = 1;
    const Z: Var = 2;
    vec![
        Rule::new(atom(ChildOf, X, Y), &[atom(ParentOf, Y, X)]),
        Rule::new(atom(WifeOf, X, Y), &[atom(HusbandOf, Y, X)]),
        Rule::new(atom(HusbandOf, X, Y), &[atom(WifeOf, Y, X)]),
        Rule::new(atom(MotherOf, X, Y), &[atom(ParentOf, X, Y)]).gender(X, Female),
        Rule::new(atom(FatherOf, X, Y), &[atom(ParentOf, X, Y)]).gender(X, Male),
        Rule::new(atom(DaughterOf, X, Y), &[atom(ChildOf, X, Y)]).gender(X, Female),
        Rule::new(atom(SonOf, X, Y), &[atom(ChildOf, X, Y)]).gender(X, Male),
        Rule::new(atom(SiblingOf, X, Z), &[atom(ChildOf, X, Y), atom(ParentOf, Y, Z)]).distinct(X, Z),
        Rule::new(atom(SisterOf, X, Y), &[atom(SiblingOf, X, Y)]).gender(X, Female),
        Rule::new(atom(BrotherOf, X, Y), &[atom(SiblingOf, X, Y)]).gender(X, Male),
        Rule::new(atom(GrandchildOf, X, Z), &[atom(ChildOf, X, Y), atom(ChildOf, Y, Z)]),
        Rule::new(atom(GrandmotherOf, X, Y), &[atom(GrandchildOf, Y, X)]).gender(X, Female),
        Rule::new(atom(GrandfatherOf, X, Y), &[atom(GrandchildOf, Y, X)]).gender(X, Male),
        Rule::new(atom(GranddaughterOf, X, Y), &[atom(GrandchildOf, X, Y)]).gender(X, Female),
        Rule::new(atom(GrandsonOf, X, Y), &[atom(GrandchildOf, X, Y)]).gender(X, Male),
        Rule::new(atom(AuntOf, X, Z), &[atom(SiblingOf, X, Y), atom(ParentOf, Y, Z)]).gender(X, Female),
        Rule::new(atom(UncleOf, X, Z), &[atom(SiblingOf, X, Y), atom(ParentOf, Y, Z)]).gender(X, Male),
        Rule::new(atom(NieceOf, X, Y), &[atom(AuntOf, Y, X)]).gender(X, Female),
        Rule::new(atom(NieceOf, X, Y), &[atom(UncleOf, Y, X)]).gender(X, Female),
        Rule::new(atom(NephewOf, X, Y), &[atom(AuntOf, Y, X)]).gender(X, Male),
        Rule::new(atom(NephewOf, X, Y), &[atom(UncleOf, Y, X)]).gender(X, Male),
        Rule::new(atom(CousinOf, X, Z), &[atom(ChildOf, X, Y), atom(AuntOf, Y, Z)]).distinct(X, Z),
        Rule::new(atom(CousinOf, X, Z), &[atom(ChildOf, X, Y), atom(UncleOf, Y, Z)]).distinct(X, Z),
        Rule::new(atom(GirlCousinOf, X, Y), &[atom(CousinOf, X, Y)]).gender(X, Female),
        Rule::new(atom(BoyCousinOf, X, Y), &[atom(CousinOf, X, Y)]).gender(X, Male),
    ]
}

#[derive(Default)]
struct Table {
    rows: Vec<(u32, u32)>,
    position: HashMap<(u32, u32), usize>,
    by_head: HashMap<u32, Vec<usize>>,
    by_tail: HashMap<u32, Vec<usize>>,
}

impl Table {
    fn insert(&mut self, row: (u32, u32)) -> bool {
        if self.position.contains_key(&row) {
            return false;
        }
        let i = self.rows.len();
        self.rows.push(row);
        self.position.insert(row, i);
        self.by_head.entry(row.0).or_default().push(i);
        self.by_tail.entry(row.1).or_default().push(i);
        true
    }
}

/// Semi-naive evaluator. Facts inserted during round `k` form the delta
/// read in round `k + 1`.
pub struct RuleEngine<'a> {
    rules: &'a [Rule],
    genders: &'a [Gender],
    tables: Vec<Table>,
}

impl<'a> RuleEngine<'a> {
    pub fn new(rules: &'a [Rule], genders: &'a [Gender]) -> Self {
        RuleEngine {
            rules,
            genders,
            tables: (0..RelationKind::ALL.len()).map(|_| Table::default()).collect(),
        }
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.tables[fact.relation.index()].insert((fact.head.0, fact.tail.0))
    }

    /// Runs to the least fixpoint and returns the number of rounds.
    pub fn run(&mut self) -> usize {
        let mut delta_start = vec![0usize; self.tables.len()];
        let mut rounds = 0;
        loop {
            let delta_end: Vec<usize> = self.tables.iter().map(|t| t.rows.len()).collect();
            if delta_start == delta_end {
                return rounds;
            }
            rounds += 1;
            let mut derived = Vec::new();
            for rule in self.rules {
                self.fire(rule, &delta_start, &delta_end, &mut derived);
            }
            delta_start = delta_end;
            for (rel, row) in derived {
                self.tables[rel].insert(row);
            }
        }
    }

    fn fire(&self, rule: &Rule, start: &[usize], end: &[usize], out: &mut Vec<(usize, (u32, u32))>) {
        let first = rule.body[0];
        let t0 = first.relation.index();
        match rule.body.get(1) {
            None => {
                for i in start[t0]..end[t0] {
                    let mut b = [None; MAX_VARS];
                    if bind(&mut b, first, self.tables[t0].rows[i]) {
                        self.emit(rule, &b, out);
                    }
                }
            }
            Some(&second) => {
                let t1 = second.relation.index();
                // delta(first) x all(second), then old(first) x delta(second).
                for i in start[t0]..end[t0] {
                    self.join(rule, self.tables[t0].rows[i], second, 0..end[t1], out);
                }
                for i in 0..start[t0] {
                    self.join(rule, self.tables[t0].rows[i], second, start[t1]..end[t1], out);
                }
            }
        }
    }

    fn join(
        &self,
        rule: &Rule,
        row: (u32, u32),
        second: Atom,
        window: std::ops::Range<usize>,
        out: &mut Vec<(usize, (u32, u32))>,
    ) {
        if window.is_empty() {
            return;
        }
        let mut b = [None; MAX_VARS];
        if !bind(&mut b, rule.body[0], row) {
            return;
        }
        let table = &self.tables[second.relation.index()];
        let candidates: &[usize] = match (b[second.head as usize], b[second.tail as usize]) {
            (Some(h), Some(t)) => {
                if let Some(&i) = table.position.get(&(h, t)) {
                    if window.contains(&i) {
                        self.emit(rule, &b, out);
                    }
                }
                return;
            }
            (Some(h), None) => table.by_head.get(&h).map_or(&[], Vec::as_slice),
            (None, Some(t)) => table.by_tail.get(&t).map_or(&[], Vec::as_slice),
            (None, None) => unreachable!("second atom shares a variable"),
        };
        for &i in candidates {
            if !window.contains(&i) {
                continue;
            }
            let mut b2 = b;
            if bind(&mut b2, second, table.rows[i]) {
                self.emit(rule, &b2, out);
            }
        }
    }

    fn emit(&self, rule: &Rule, b: &[Option<u32>; MAX_VARS], out: &mut Vec<(usize, (u32, u32))>) {
        if let Some((x, y)) = rule.distinct {
            if b[x as usize] == b[y as usize] {
                return;
            }
        }
        for &(v, g) in &rule.genders {
            let e = b[v as usize].expect("gender constraint on bound variable");
            if self.genders[e as usize] != g {
                return;
            }
        }
        let h = b[rule.head.head as usize].expect("head variable bound");
        let t = b[rule.head.tail as usize].expect("head variable bound");
        if h == t {
            return;
        }
        let rel = rule.head.relation.index();
        if !self.tables[rel].position.contains_key(&(h, t)) {
            out.push((rel, (h, t)));
        }
    }

    pub fn facts(&self) -> BTreeSet<Fact> {
        let mut set = BTreeSet::new();
        for (r, table) in self.tables.iter().enumerate() {
            let relation = RelationKind::ALL[r];
            set.extend(table.rows.iter().map(|&(h, t)| Fact::new(relation, h, t)));
        }
        set
    }
}

fn bind(b: &mut [Option<u32>; MAX_VARS], atom: Atom, (h, t): (u32, u32)) -> bool {
    for (v, val) in [(atom.head, h), (atom.tail, t)] {
        match b[v as usize] {
            Some(existing) if existing != val => return false,
            _ => b[v as usize] = Some(val),
        }
    }
    true
}

/// Least fixpoint of the kinship rules over `kg`. The result is a superset
/// of the input and is flagged closed.
pub fn deduce_closure(kg: &KnowledgeGraph) -> KnowledgeGraph {
    if kg.is_closed() {
        return kg.clone();
    }
    let rules = kinship_rules();
    let mut engine = RuleEngine::new(&rules, kg.genders());
    for &f in kg.facts() {
        engine.insert(f);
    }
    engine.run();
    let mut out = KnowledgeGraph::new(kg.genders().to_vec());
    for f in engine.facts() {
        out.insert(f).expect("rules only relate existing, distinct entities");
    }
    out.mark_closed();
    out
}
