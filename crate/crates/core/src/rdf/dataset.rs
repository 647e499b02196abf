use std::collections::{BTreeSet, HashMap};

use super::term::{GraphId, Iri, Quad, Term};

type Triple = (Term, Iri, Term);

#[derive(Debug, Clone, Default, PartialEq)]
struct GraphIndex {
    spo: BTreeSet<Triple>,
    by_subject: HashMap<Term, BTreeSet<(Iri, Term)>>,
    by_predicate: HashMap<Iri, BTreeSet<(Term, Term)>>,
    by_predicate_object: HashMap<(Iri, Term), BTreeSet<Term>>,
}

impl GraphIndex {
    fn insert(&mut self, s: Term, p: Iri, o: Term) -> bool {
        if !self.spo.insert((s.clone(), p.clone(), o.clone())) {
            return false;
        }
        self.by_subject.entry(s.clone()).or_default().insert((p.clone(), o.clone()));
        self.by_predicate.entry(p.clone()).or_default().insert((s.clone(), o.clone()));
        self.by_predicate_object.entry((p, o)).or_default().insert(s);
        true
    }

    fn remove(&mut self, s: &Term, p: &Iri, o: &Term) -> bool {
        if !self.spo.remove(&(s.clone(), p.clone(), o.clone())) {
            return false;
        }
        remove_nested(&mut self.by_subject, s, &(p.clone(), o.clone()));
        remove_nested(&mut self.by_predicate, p, &(s.clone(), o.clone()));
        remove_nested(&mut self.by_predicate_object, &(p.clone(), o.clone()), s);
        true
    }
}

fn remove_nested<K: std::hash::Hash + Eq + Clone, V: Ord>(map: &mut HashMap<K, BTreeSet<V>>, key: &K, value: &V) {
    if let Some(set) = map.get_mut(key) {
        set.remove(value);
        if set.is_empty() {
            map.remove(key);
        }
    }
}

/// A set of quads over the hub's five named graphs, indexed by graph,
/// (graph, subject), (graph, predicate) and (graph, predicate, object).
///
/// Equality compares quad sets only.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    graphs: [GraphIndex; 5],
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.graphs.iter().zip(&other.graphs).all(|(a, b)| a.spo == b.spo)
    }
}

impl Eq for Dataset {}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_quads(quads: impl IntoIterator<Item = Quad>) -> Self {
        let mut d = Self::new();
        d.extend(quads);
        d
    }

    /// Returns false when the quad was already present.
    pub fn insert(&mut self, quad: Quad) -> bool {
        self.graphs[quad.graph.index()].insert(quad.subject, quad.predicate, quad.object)
    }

    pub fn extend(&mut self, quads: impl IntoIterator<Item = Quad>) {
        for q in quads {
            self.insert(q);
        }
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        self.graphs[quad.graph.index()].remove(&quad.subject, &quad.predicate, &quad.object)
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.graphs[quad.graph.index()]
            .by_subject
            .get(&quad.subject)
            .is_some_and(|po| po.contains(&(quad.predicate.clone(), quad.object.clone())))
    }

    pub fn len(&self) -> usize {
        self.graphs.iter().map(|g| g.spo.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn graph_len(&self, graph: GraphId) -> usize {
        self.graphs[graph.index()].spo.len()
    }

    /// All quads, sorted by graph then subject, predicate, object.
    pub fn iter(&self) -> impl Iterator<Item = Quad> + '_ {
        GraphId::ALL.into_iter().flat_map(move |g| self.graph(g))
    }

    pub fn graph(&self, graph: GraphId) -> impl Iterator<Item = Quad> + '_ {
        self.graphs[graph.index()].spo.iter().map(move |(s, p, o)| Quad {
            graph,
            subject: s.clone(),
            predicate: p.clone(),
            object: o.clone(),
        })
    }

    pub fn to_vec(&self) -> Vec<Quad> {
        self.iter().collect()
    }

    /// Quads matching a pattern; `None` is a wildcard. Uses the most
    /// selective index available.
    pub fn quads_for_pattern(
        &self,
        graph: Option<GraphId>,
        subject: Option<&Term>,
        predicate: Option<&Iri>,
        object: Option<&Term>,
    ) -> Vec<Quad> {
        let graphs: Vec<GraphId> = match graph {
            Some(g) => vec![g],
            None => GraphId::ALL.to_vec(),
        };
        let mut out = Vec::new();
        for g in graphs {
            self.match_in(g, subject, predicate, object, &mut |s, p, o| {
                out.push(Quad {
                    graph: g,
                    subject: s.clone(),
                    predicate: p.clone(),
                    object: o.clone(),
                })
            });
        }
        out
    }

    /// Calls `f` for each triple in `graph` matching the pattern.
    pub fn match_in(
        &self,
        graph: GraphId,
        subject: Option<&Term>,
        predicate: Option<&Iri>,
        object: Option<&Term>,
        f: &mut dyn FnMut(&Term, &Iri, &Term),
    ) {
        let idx = &self.graphs[graph.index()];
        match (subject, predicate, object) {
            (Some(s), _, _) => {
                if let Some(po) = idx.by_subject.get(s) {
                    for (p, o) in po {
                        if predicate.is_none_or(|x| x == p) && object.is_none_or(|x| x == o) {
                            f(s, p, o);
                        }
                    }
                }
            }
            (None, Some(p), Some(o)) => {
                if let Some(subjects) = idx.by_predicate_object.get(&(p.clone(), o.clone())) {
                    for s in subjects {
                        f(s, p, o);
                    }
                }
            }
            (None, Some(p), None) => {
                if let Some(so) = idx.by_predicate.get(p) {
                    for (s, o) in so {
                        f(s, p, o);
                    }
                }
            }
            (None, None, o) => {
                for (s, p, obj) in &idx.spo {
                    if o.is_none_or(|x| x == obj) {
                        f(s, p, obj);
                    }
                }
            }
        }
    }

    /// Unindexed reference implementation of [`Dataset::quads_for_pattern`].
    pub fn scan(
        &self,
        graph: Option<GraphId>,
        subject: Option<&Term>,
        predicate: Option<&Iri>,
        object: Option<&Term>,
    ) -> Vec<Quad> {
        self.iter()
            .filter(|q| {
                graph.is_none_or(|g| g == q.graph)
                    && subject.is_none_or(|s| s == &q.subject)
                    && predicate.is_none_or(|p| p == &q.predicate)
                    && object.is_none_or(|o| o == &q.object)
            })
            .collect()
    }

    pub fn objects(&self, graph: GraphId, subject: &Term, predicate: &Iri) -> Vec<Term> {
        let mut out = Vec::new();
        self.match_in(graph, Some(subject), Some(predicate), None, &mut |_, _, o| out.push(o.clone()));
        out
    }

    pub fn subjects(&self, graph: GraphId, predicate: &Iri, object: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        self.match_in(graph, None, Some(predicate), Some(object), &mut |s, _, _| out.push(s.clone()));
        out
    }

    /// Distinct subjects of a graph.
    pub fn subject_terms(&self, graph: GraphId) -> BTreeSet<Term> {
        self.graphs[graph.index()].by_subject.keys().cloned().collect()
    }
}
