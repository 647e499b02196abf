//! The compiled-in schema and the lightweight inference over it.

mod builtin;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::ns::rdf;
use crate::rdf::{Dataset, GraphId, Iri, Term};

pub use io::{vocabulary_from_quads, vocabulary_to_quads, vocabulary_to_turtle, VocabImportError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabError {
    #[error("{property} declares inverse {declared} but {declared} declares inverse {other}")]
    ConflictingInverse {
        property: Iri,
        declared: Iri,
        other: Iri,
    },
    #[error("{0} is defined more than once")]
    Duplicate(Iri),
    #[error("subclass cycle among {0:?} not covered by equivalence")]
    Cycle(Vec<Iri>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PropertyKind {
    Object,
    Data,
}

/// `max == None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptDef {
    pub iri: Iri,
    pub label: String,
    pub comment: String,
    pub direct_superclasses: Vec<Iri>,
    pub equivalents: Vec<Iri>,
}

impl ConceptDef {
    pub fn new(iri: &str, label: &str, comment: &str) -> Self {
        Self {
            iri: Iri::new(iri).expect("concept IRI"),
            label: label.into(),
            comment: comment.into(),
            direct_superclasses: Vec::new(),
            equivalents: Vec::new(),
        }
    }

    pub fn sub_of(mut self, sup: &str) -> Self {
        self.direct_superclasses.push(Iri::new(sup).expect("superclass IRI"));
        self
    }

    pub fn equivalent_to(mut self, other: &str) -> Self {
        self.equivalents.push(Iri::new(other).expect("equivalent IRI"));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyDef {
    pub iri: Iri,
    pub label: String,
    pub comment: String,
    pub kind: PropertyKind,
    pub domain_includes: Vec<Iri>,
    /// Class IRIs for object properties, datatype IRIs for data properties.
    pub range_includes: Vec<Iri>,
    pub inverse: Option<Iri>,
    pub cardinality: Option<Cardinality>,
    pub equivalents: Vec<Iri>,
    pub super_properties: Vec<Iri>,
}

impl PropertyDef {
    pub fn new(iri: &str, kind: PropertyKind, label: &str, comment: &str) -> Self {
        Self {
            iri: Iri::new(iri).expect("property IRI"),
            label: label.into(),
            comment: comment.into(),
            kind,
            domain_includes: Vec::new(),
            range_includes: Vec::new(),
            inverse: None,
            cardinality: None,
            equivalents: Vec::new(),
            super_properties: Vec::new(),
        }
    }

    pub fn domain(mut self, classes: &[&str]) -> Self {
        self.domain_includes
            .extend(classes.iter().map(|c| Iri::new(*c).expect("domain IRI")));
        self
    }

    pub fn range(mut self, classes: &[&str]) -> Self {
        self.range_includes
            .extend(classes.iter().map(|c| Iri::new(*c).expect("range IRI")));
        self
    }

    pub fn inverse_of(mut self, other: &str) -> Self {
        self.inverse = Some(Iri::new(other).expect("inverse IRI"));
        self
    }

    pub fn cardinality(mut self, min: u32, max: Option<u32>) -> Self {
        self.cardinality = Some(Cardinality { min, max });
        self
    }

    pub fn sub_property_of(mut self, sup: &str) -> Self {
        self.super_properties.push(Iri::new(sup).expect("super property IRI"));
        self
    }

    pub fn equivalent_to(mut self, other: &str) -> Self {
        self.equivalents.push(Iri::new(other).expect("equivalent IRI"));
        self
    }
}

/// An immutable schema with its closures precomputed.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    concepts: BTreeMap<Iri, ConceptDef>,
    properties: BTreeMap<Iri, PropertyDef>,
    supers: HashMap<Iri, BTreeSet<Iri>>,
    subs: HashMap<Iri, BTreeSet<Iri>>,
    inverses: HashMap<Iri, BTreeSet<Iri>>,
    super_props: HashMap<Iri, BTreeSet<Iri>>,
    cycles: Vec<Vec<Iri>>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts && self.properties == other.properties
    }
}

fn normalize(list: &mut Vec<Iri>) {
    list.sort();
    list.dedup();
}

impl Vocabulary {
    /// Builds a vocabulary, making declared inverses symmetric.
    pub fn new(concepts: Vec<ConceptDef>, properties: Vec<PropertyDef>) -> Result<Self, VocabError> {
        let mut cmap = BTreeMap::new();
        for mut c in concepts {
            normalize(&mut c.direct_superclasses);
            normalize(&mut c.equivalents);
            let iri = c.iri.clone();
            if cmap.insert(iri.clone(), c).is_some() {
                return Err(VocabError::Duplicate(iri));
            }
        }
        let mut pmap: BTreeMap<Iri, PropertyDef> = BTreeMap::new();
        for mut p in properties {
            normalize(&mut p.domain_includes);
            normalize(&mut p.range_includes);
            normalize(&mut p.equivalents);
            normalize(&mut p.super_properties);
            let iri = p.iri.clone();
            if pmap.insert(iri.clone(), p).is_some() {
                return Err(VocabError::Duplicate(iri));
            }
        }
        let declared: Vec<(Iri, Iri)> = pmap
            .values()
            .filter_map(|p| p.inverse.clone().map(|q| (p.iri.clone(), q)))
            .collect();
        for (p, q) in declared {
            if let Some(target) = pmap.get_mut(&q) {
                match &target.inverse {
                    None => target.inverse = Some(p.clone()),
                    Some(existing) if *existing == p => {}
                    Some(existing) => {
                        return Err(VocabError::ConflictingInverse {
                            property: p,
                            declared: q,
                            other: existing.clone(),
                        })
                    }
                }
            }
        }

        let mut v = Self {
            concepts: cmap,
            properties: pmap,
            supers: HashMap::new(),
            subs: HashMap::new(),
            inverses: HashMap::new(),
            super_props: HashMap::new(),
            cycles: Vec::new(),
        };
        v.compute_closures();
        Ok(v)
    }

    pub fn builtin() -> Self {
        builtin::builtin()
    }

    fn compute_closures(&mut self) {
        let class_edges = edges(
            self.concepts
                .values()
                .map(|c| (&c.iri, &c.direct_superclasses, &c.equivalents)),
        );
        self.supers = reach_all(&class_edges);
        self.subs = invert(&self.supers);
        self.cycles = find_cycles(&self.supers, self.concepts.values().map(|c| (&c.iri, &c.equivalents)));

        let prop_edges = edges(
            self.properties
                .values()
                .map(|p| (&p.iri, &p.super_properties, &p.equivalents)),
        );
        self.super_props = reach_all(&prop_edges);

        // Inverses are symmetric and propagate through property equivalence.
        let mut equiv_classes: HashMap<Iri, BTreeSet<Iri>> = HashMap::new();
        for (node, reach) in &self.super_props {
            let group: BTreeSet<Iri> = reach
                .iter()
                .filter(|other| self.super_props.get(*other).is_some_and(|r| r.contains(node)))
                .cloned()
                .collect();
            equiv_classes.insert(node.clone(), group);
        }
        let class_of = |p: &Iri| {
            equiv_classes
                .get(p)
                .cloned()
                .unwrap_or_else(|| BTreeSet::from([p.clone()]))
        };
        let mut inverses: HashMap<Iri, BTreeSet<Iri>> = HashMap::new();
        for p in self.properties.values() {
            if let Some(q) = &p.inverse {
                for a in class_of(&p.iri) {
                    for b in class_of(q) {
                        inverses.entry(a.clone()).or_default().insert(b.clone());
                        inverses.entry(b).or_default().insert(a.clone());
                    }
                }
            }
        }
        self.inverses = inverses;
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptDef> {
        self.concepts.values()
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDef> {
        self.properties.values()
    }

    pub fn concept(&self, iri: &str) -> Option<&ConceptDef> {
        self.concepts.get(iri)
    }

    pub fn property(&self, iri: &str) -> Option<&PropertyDef> {
        self.properties.get(iri)
    }

    pub fn is_concept(&self, iri: &str) -> bool {
        self.concepts.contains_key(iri) || self.supers.contains_key(iri)
    }

    /// True when `sub ⊑ sup` holds in the closure. Every IRI is a subclass
    /// of itself.
    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.supers.get(sub).is_some_and(|s| s.contains(sup))
    }

    /// All superclasses of `class`, including itself.
    pub fn superclasses(&self, class: &Iri) -> BTreeSet<Iri> {
        self.supers
            .get(class)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([class.clone()]))
    }

    /// All subclasses of `class`, including itself.
    pub fn subclasses(&self, class: &Iri) -> BTreeSet<Iri> {
        self.subs
            .get(class)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([class.clone()]))
    }

    /// Every `(sub, super)` pair of the closure, reflexive pairs included.
    pub fn closure_pairs(&self) -> BTreeSet<(Iri, Iri)> {
        self.supers
            .iter()
            .flat_map(|(sub, sups)| sups.iter().map(move |s| (sub.clone(), s.clone())))
            .collect()
    }

    /// The subclass closure, refused when a strict cycle exists outside an
    /// equivalence group.
    pub fn subclass_closure(&self) -> Result<BTreeSet<(Iri, Iri)>, VocabError> {
        match self.cycles.first() {
            Some(cycle) => Err(VocabError::Cycle(cycle.clone())),
            None => Ok(self.closure_pairs()),
        }
    }

    pub fn cycles(&self) -> &[Vec<Iri>] {
        &self.cycles
    }

    /// Symmetric inverse pairs, propagated through property equivalence.
    pub fn inverse_closure(&self) -> BTreeSet<(Iri, Iri)> {
        self.inverses
            .iter()
            .flat_map(|(p, qs)| qs.iter().map(move |q| (p.clone(), q.clone())))
            .collect()
    }

    pub fn inverses_of(&self, property: &str) -> impl Iterator<Item = &Iri> {
        self.inverses.get(property).into_iter().flatten()
    }

    pub fn has_inverse(&self, property: &str) -> bool {
        self.inverses.get(property).is_some_and(|s| !s.is_empty())
    }

    /// Super-properties of `property` (reflexive, through equivalence).
    pub fn super_properties(&self, property: &Iri) -> BTreeSet<Iri> {
        self.super_props
            .get(property)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([property.clone()]))
    }

    /// Pairs `(a, c)` where `a` is a strict sub-property of some `b` that is
    /// inverse to `c`, so `a` is a sub-property of the inverse of `c`.
    pub fn sub_property_inverse_pairs(&self) -> BTreeSet<(Iri, Iri)> {
        let mut out = BTreeSet::new();
        for (a, sups) in &self.super_props {
            for b in sups.iter().filter(|b| *b != a) {
                for c in self.inverses_of(b.as_str()) {
                    if !self.inverses.get(a).is_some_and(|s| s.contains(c)) {
                        out.insert((a.clone(), c.clone()));
                    }
                }
            }
        }
        out
    }

    /// Asserted types of `entity` in any graph of `d`.
    pub fn asserted_types(d: &Dataset, entity: &Term) -> BTreeSet<Iri> {
        let ty = Iri::from_static(rdf::TYPE);
        GraphId::ALL
            .into_iter()
            .flat_map(|g| d.objects(g, entity, &ty))
            .filter_map(|t| t.as_iri().cloned())
            .collect()
    }
}

/// True iff `d` types `entity` with some class that is a subclass of `concept`.
pub fn is_instance_of(d: &Dataset, entity: &Iri, concept: &Iri, v: &Vocabulary) -> bool {
    Vocabulary::asserted_types(d, &Term::Iri(entity.clone()))
        .iter()
        .any(|c| v.is_subclass(c.as_str(), concept.as_str()))
}

type Edges = HashMap<Iri, BTreeSet<Iri>>;

/// Directed edges sub -> super, with equivalence as edges both ways.
fn edges<'a>(defs: impl Iterator<Item = (&'a Iri, &'a Vec<Iri>, &'a Vec<Iri>)>) -> Edges {
    let mut out: Edges = HashMap::new();
    for (iri, sups, equivs) in defs {
        out.entry(iri.clone()).or_default();
        for s in sups {
            out.entry(iri.clone()).or_default().insert(s.clone());
            out.entry(s.clone()).or_default();
        }
        for e in equivs {
            out.entry(iri.clone()).or_default().insert(e.clone());
            out.entry(e.clone()).or_default().insert(iri.clone());
        }
    }
    out
}

/// Reflexive-transitive reachability from every node.
fn reach_all(edges: &Edges) -> HashMap<Iri, BTreeSet<Iri>> {
    let mut out = HashMap::with_capacity(edges.len());
    for start in edges.keys() {
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for next in edges.get(node).into_iter().flatten() {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        out.insert(start.clone(), seen);
    }
    out
}

fn invert(supers: &HashMap<Iri, BTreeSet<Iri>>) -> HashMap<Iri, BTreeSet<Iri>> {
    let mut out: HashMap<Iri, BTreeSet<Iri>> = HashMap::new();
    for (sub, sups) in supers {
        for s in sups {
            out.entry(s.clone()).or_default().insert(sub.clone());
        }
    }
    out
}

/// Groups of mutually reachable classes that are not all linked by
/// declared equivalence.
fn find_cycles<'a>(
    supers: &HashMap<Iri, BTreeSet<Iri>>,
    equivs: impl Iterator<Item = (&'a Iri, &'a Vec<Iri>)>,
) -> Vec<Vec<Iri>> {
    let mut equiv_edges: Edges = HashMap::new();
    for (iri, es) in equivs {
        for e in es {
            equiv_edges.entry(iri.clone()).or_default().insert(e.clone());
            equiv_edges.entry(e.clone()).or_default().insert(iri.clone());
        }
    }
    let equiv_reach = reach_all(&equiv_edges);

    let mut seen: BTreeSet<Iri> = BTreeSet::new();
    let mut cycles = Vec::new();
    let mut nodes: Vec<&Iri> = supers.keys().collect();
    nodes.sort();
    for node in nodes {
        if seen.contains(node) {
            continue;
        }
        let scc: BTreeSet<Iri> = supers[node]
            .iter()
            .filter(|other| supers.get(*other).is_some_and(|r| r.contains(node)))
            .cloned()
            .collect();
        seen.extend(scc.iter().cloned());
        if scc.len() < 2 {
            continue;
        }
        let group = equiv_reach
            .get(node)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([node.clone()]));
        if !scc.is_subset(&group) {
            cycles.push(scc.into_iter().collect());
        }
    }
    cycles
}
