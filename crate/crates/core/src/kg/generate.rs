//! Random family-tree growth.
//!
//! Each tree starts from a single root person. Until the tree reaches its
//! entity budget, a person is drawn uniformly among those that can still
//! grow, and one of their feasible actions is applied:
//!
//! * marry: an unmarried person gets a new spouse of the opposite gender in
//!   the same generation;
//! * add parents: a person without parents below generation 0 gets a new
//!   couple one generation up (this is how married-in spouses acquire their
//!   own families);
//! * add child: a married person above the last generation gets a child,
//!   while the couple has fewer than `max_branching` children.
//!
//! Actions are weighted 1 : 1 : 2. Generations run from 0 to `depth - 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Fact, Gender, KnowledgeGraph, RelationKind};
use crate::error::{Error, Result};
use crate::seed::{self, STREAM_TREE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeGenConfig {
    pub n_trees: usize,
    /// Number of generations per tree.
    pub depth: u32,
    pub entities_per_tree: usize,
    pub max_branching: usize,
    pub seed: u64,
}

impl Default for TreeGenConfig {
    fn default() -> Self {
        TreeGenConfig {
            n_trees: 20,
            depth: 3,
            entities_per_tree: 300,
            max_branching: 20,
            seed: 0,
        }
    }
}

impl TreeGenConfig {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_trees", self.n_trees),
            ("depth", self.depth as usize),
            ("entities_per_tree", self.entities_per_tree),
            ("max_branching", self.max_branching),
        ] {
            if v == 0 {
                return Err(Error::domain(name, "must be at least 1"));
            }
        }
        if self.depth == 1 && self.entities_per_tree > 2 {
            return Err(Error::TreeShape(format!(
                "a single generation holds at most one couple, not {} entities",
                self.entities_per_tree
            )));
        }
        if u32::try_from(self.n_trees * self.entities_per_tree).is_err() {
            return Err(Error::domain("entities_per_tree", "total entity count exceeds u32"));
        }
        Ok(())
    }
}

const W_MARRY: u32 = 1;
const W_PARENTS: u32 = 1;
const W_CHILD: u32 = 2;
const MAX_REJECTIONS: usize = 64;

struct Person {
    generation: u32,
    gender: Gender,
    spouse: Option<usize>,
    parents: Option<usize>,
    /// Couple index when married.
    couple: Option<usize>,
}

struct Couple {
    wife: usize,
    husband: usize,
    children: usize,
}

#[derive(Clone, Copy)]
enum Action {
    Marry,
    AddParents,
    AddChild,
}

struct Tree<'a> {
    cfg: &'a TreeGenConfig,
    people: Vec<Person>,
    couples: Vec<Couple>,
    parent_links: Vec<(usize, usize)>,
}

impl<'a> Tree<'a> {
    fn actions(&self, p: usize) -> ([Option<Action>; 3], u32) {
        let person = &self.people[p];
        let budget = self.cfg.entities_per_tree - self.people.len();
        let mut acts = [None; 3];
        let mut total = 0;
        if person.spouse.is_none() {
            acts[0] = Some(Action::Marry);
            total += W_MARRY;
        }
        if person.parents.is_none() && person.generation > 0 && budget >= 2 {
            acts[1] = Some(Action::AddParents);
            total += W_PARENTS;
        }
        if let Some(c) = person.couple {
            if person.generation + 1 < self.cfg.depth && self.couples[c].children < self.cfg.max_branching {
                acts[2] = Some(Action::AddChild);
                total += W_CHILD;
            }
        }
        (acts, total)
    }

    fn push(&mut self, generation: u32, gender: Gender) -> usize {
        self.people.push(Person {
            generation,
            gender,
            spouse: None,
            parents: None,
            couple: None,
        });
        self.people.len() - 1
    }

    fn marry(&mut self, a: usize, b: usize) -> usize {
        let (wife, husband) = if self.people[a].gender == Gender::Female { (a, b) } else { (b, a) };
        self.couples.push(Couple {
            wife,
            husband,
            children: 0,
        });
        let c = self.couples.len() - 1;
        for (x, y) in [(a, b), (b, a)] {
            self.people[x].spouse = Some(y);
            self.people[x].couple = Some(c);
        }
        c
    }

    fn attach_child(&mut self, couple: usize, child: usize) {
        self.people[child].parents = Some(couple);
        self.couples[couple].children += 1;
        let Couple { wife, husband, .. } = self.couples[couple];
        self.parent_links.push((wife, child));
        self.parent_links.push((husband, child));
    }

    fn apply<R: Rng>(&mut self, p: usize, action: Action, rng: &mut R) {
        let generation = self.people[p].generation;
        match action {
            Action::Marry => {
                let s = self.push(generation, self.people[p].gender.opposite());
                self.marry(p, s);
            }
            Action::AddParents => {
                let mother = self.push(generation - 1, Gender::Female);
                let father = self.push(generation - 1, Gender::Male);
                let c = self.marry(mother, father);
                self.attach_child(c, p);
            }
            Action::AddChild => {
                let gender = random_gender(rng);
                let child = self.push(generation + 1, gender);
                let c = self.people[p].couple.expect("married");
                self.attach_child(c, child);
            }
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> Option<(usize, Action)> {
        let choose = |p: usize, rng: &mut R| {
            let (acts, total) = self.actions(p);
            if total == 0 {
                return None;
            }
            let mut x = rng.random_range(0..total);
            for (act, w) in acts.iter().zip([W_MARRY, W_PARENTS, W_CHILD]) {
                if let Some(a) = act {
                    if x < w {
                        return Some(*a);
                    }
                    x -= w;
                }
            }
            unreachable!()
        };
        for _ in 0..MAX_REJECTIONS {
            let p = rng.random_range(0..self.people.len());
            if let Some(a) = choose(p, rng) {
                return Some((p, a));
            }
        }
        // Many rejections in a row: draw from the feasible set explicitly.
        let feasible: Vec<usize> = (0..self.people.len()).filter(|&p| self.actions(p).1 > 0).collect();
        if feasible.is_empty() {
            return None;
        }
        let p = feasible[rng.random_range(0..feasible.len())];
        choose(p, rng).map(|a| (p, a))
    }
}

fn random_gender<R: Rng>(rng: &mut R) -> Gender {
    if rng.random_bool(0.5) {
        Gender::Female
    } else {
        Gender::Male
    }
}

/// Grows `n_trees` disjoint family trees and returns their base facts
/// (`parentOf`, `wifeOf`, `husbandOf`). Entity ids are dense, tree by tree.
pub fn generate_base_population(config: &TreeGenConfig) -> Result<KnowledgeGraph> {
    config.validate()?;
    let mut genders = Vec::with_capacity(config.n_trees * config.entities_per_tree);
    let mut facts = Vec::new();
    for t in 0..config.n_trees {
        let mut rng = seed::rng(config.seed, &[STREAM_TREE, t as u64]);
        let mut tree = Tree {
            cfg: config,
            people: Vec::with_capacity(config.entities_per_tree),
            couples: Vec::new(),
            parent_links: Vec::new(),
        };
        let root_gender = random_gender(&mut rng);
        tree.push(0, root_gender);
        while tree.people.len() < config.entities_per_tree {
            let Some((p, action)) = tree.pick(&mut rng) else {
                return Err(Error::TreeShape(format!(
                    "tree {t} stopped growing at {} of {} entities (depth {}, branching {})",
                    tree.people.len(),
                    config.entities_per_tree,
                    config.depth,
                    config.max_branching
                )));
            };
            tree.apply(p, action, &mut rng);
        }
        let offset = genders.len() as u32;
        genders.extend(tree.people.iter().map(|p| p.gender));
        for c in &tree.couples {
            let (w, h) = (offset + c.wife as u32, offset + c.husband as u32);
            facts.push(Fact::new(RelationKind::WifeOf, w, h));
            facts.push(Fact::new(RelationKind::HusbandOf, h, w));
        }
        for &(parent, child) in &tree.parent_links {
            facts.push(Fact::new(RelationKind::ParentOf, offset + parent as u32, offset + child as u32));
        }
    }
    KnowledgeGraph::from_parts(genders, facts)
}
