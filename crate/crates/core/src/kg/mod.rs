//! Closed-world kinship knowledge graphs.

mod generate;
pub mod io;
mod rules;
mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_base_population, TreeGenConfig};
pub use rules::{deduce_closure, kinship_rules, Atom, Rule, RuleEngine, Var};
pub use validate::{validate_closed_world, ValidationReport, Violation, ViolationKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            other => Err(format!("unknown gender `{other}`")),
        }
    }
}

macro_rules! relations {
    ($($variant:ident => $name:literal, $gender:expr;)*) => {
        /// The 23 kinship relations.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum RelationKind {
            $(
                #[serde(rename = $name)]
                $variant,
            )*
        }

        impl RelationKind {
            pub const ALL: [RelationKind; 23] = [$(RelationKind::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RelationKind::$variant => $name,)*
                }
            }

            /// Gender that the head entity must have, for gendered relations.
            pub fn head_gender(self) -> Option<Gender> {
                match self {
                    $(RelationKind::$variant => $gender,)*
                }
            }
        }

        impl FromStr for RelationKind {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(RelationKind::$variant),)*
                    other => Err(format!("unknown relation `{other}`")),
                }
            }
        }
    };
}

const F: Option<Gender> = Some(Gender::Female);
const M: Option<Gender> = Some(Gender::Male);

relations! {
    ParentOf => "parentOf", None;
    SisterOf => "sisterOf", F;
    BrotherOf => "brotherOf", M;
    SiblingOf => "siblingOf", None;
    MotherOf => "motherOf", F;
    FatherOf => "fatherOf", M;
    WifeOf => "wifeOf", F;
    HusbandOf => "husbandOf", M;
    GrandmotherOf => "grandmotherOf", F;
    GrandfatherOf => "grandfatherOf", M;
    AuntOf => "auntOf", F;
    UncleOf => "uncleOf", M;
    GirlCousinOf => "girlCousinOf", F;
    BoyCousinOf => "boyCousinOf", M;
    CousinOf => "cousinOf", None;
    DaughterOf => "daughterOf", F;
    SonOf => "sonOf", M;
    ChildOf => "childOf", None;
    GranddaughterOf => "granddaughterOf", F;
    GrandsonOf => "grandsonOf", M;
    GrandchildOf => "grandchildOf", None;
    NieceOf => "nieceOf", F;
    NephewOf => "nephewOf", M;
}

impl RelationKind {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `relation(head, tail)`. Ordered by head, then relation, then tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub head: EntityId,
    pub relation: RelationKind,
    pub tail: EntityId,
}

impl Fact {
    pub fn new(relation: RelationKind, head: u32, tail: u32) -> Self {
        Fact {
            head: EntityId(head),
            relation,
            tail: EntityId(tail),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.head, self.tail)
    }
}

/// Entities (dense ids with genders) plus a fact set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeGraph {
    genders: Vec<Gender>,
    facts: BTreeSet<Fact>,
    closed: bool,
}

impl KnowledgeGraph {
    pub fn new(genders: Vec<Gender>) -> Self {
        KnowledgeGraph {
            genders,
            facts: BTreeSet::new(),
            closed: false,
        }
    }

    /// Builds a graph from parts, checking every fact's endpoints.
    pub fn from_parts(genders: Vec<Gender>, facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut kg = KnowledgeGraph::new(genders);
        for fact in facts {
            kg.insert(fact)?;
        }
        Ok(kg)
    }

    /// Inserts a fact; returns whether it was new. Clears the closed flag
    /// when the fact is new.
    pub fn insert(&mut self, fact: Fact) -> Result<bool> {
        let n = self.genders.len();
        if fact.head.index() >= n || fact.tail.index() >= n {
            return Err(Error::domain("fact", format!("{fact} references an unknown entity")));
        }
        if fact.head == fact.tail {
            return Err(Error::domain("fact", format!("{fact} has head == tail")));
        }
        let added = self.facts.insert(fact);
        if added {
            self.closed = false;
        }
        Ok(added)
    }

    pub fn remove(&mut self, fact: &Fact) -> bool {
        self.facts.remove(fact)
    }

    pub fn n_entities(&self) -> usize {
        self.genders.len()
    }

    pub fn gender(&self, e: EntityId) -> Gender {
        self.genders[e.index()]
    }

    pub fn genders(&self) -> &[Gender] {
        &self.genders
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub(crate) fn mark_closed(&mut self) {
        self.closed = true;
    }

    /// Relations that occur in at least one fact.
    pub fn relations(&self) -> BTreeSet<RelationKind> {
        self.facts.iter().map(|f| f.relation).collect()
    }

    pub fn count_by_relation(&self) -> [usize; 23] {
        let mut counts = [0; 23];
        for f in &self.facts {
            counts[f.relation.index()] += 1;
        }
        counts
    }
}
