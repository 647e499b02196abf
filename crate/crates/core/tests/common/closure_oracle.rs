//! Naive iterate-until-stable closures, for checking the vocabulary.

use std::collections::{BTreeMap, BTreeSet};

use privgraph::rdf::Iri;
use privgraph::validator::{check_entailments, Axiom};
use privgraph::vocab::{ConceptDef, PropertyDef, PropertyKind, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Pairs = BTreeSet<(Iri, Iri)>;

/// `{(a, d) | (a, b) in left, (b, d) in right}`, joined through an index on
/// the right-hand side.
pub fn compose(left: &Pairs, right: &Pairs) -> Pairs {
    let mut index: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    for (c, d) in right {
        index.entry(c).or_default().push(d);
    }
    let mut out = Pairs::new();
    for (a, b) in left {
        for d in index.get(b).into_iter().flatten() {
            out.insert((a.clone(), (*d).clone()));
        }
    }
    out
}

/// Applies `step` until nothing new appears.
pub fn fixpoint(mut set: Pairs, step: impl Fn(&Pairs) -> Pairs) -> Pairs {
    loop {
        let more = step(&set);
        let before = set.len();
        set.extend(more);
        if set.len() == before {
            return set;
        }
    }
}

pub struct Oracle {
    pub class_nodes: BTreeSet<Iri>,
    pub sub: Pairs,
    pub class_equiv: Pairs,
    pub prop_sub: Pairs,
    pub inverse: Pairs,
}

pub fn symmetric_transitive(seed: Pairs, nodes: &BTreeSet<Iri>) -> Pairs {
    let mut set: Pairs = nodes.iter().map(|n| (n.clone(), n.clone())).collect();
    for (a, b) in seed {
        set.insert((a.clone(), b.clone()));
        set.insert((b, a));
    }
    fixpoint(set, |s| compose(s, s))
}

/// Naive closure straight from the asserted axioms.
pub fn oracle(v: &Vocabulary) -> Oracle {
    let mut class_nodes = BTreeSet::new();
    let mut asserted_sub = Pairs::new();
    let mut asserted_equiv = Pairs::new();
    for c in v.concepts() {
        class_nodes.insert(c.iri.clone());
        for s in &c.direct_superclasses {
            class_nodes.insert(s.clone());
            asserted_sub.insert((c.iri.clone(), s.clone()));
        }
        for e in &c.equivalents {
            class_nodes.insert(e.clone());
            asserted_equiv.insert((c.iri.clone(), e.clone()));
        }
    }
    let class_equiv = symmetric_transitive(asserted_equiv.clone(), &class_nodes);

    let mut start: Pairs = class_nodes.iter().map(|n| (n.clone(), n.clone())).collect();
    start.extend(asserted_sub);
    for (a, b) in &asserted_equiv {
        start.insert((a.clone(), b.clone()));
        start.insert((b.clone(), a.clone()));
    }
    let sub = fixpoint(start, |s| {
        // transitivity, then subclass through equivalence
        let mut out = compose(s, s);
        out.extend(compose(s, &class_equiv));
        out
    });

    let mut prop_start = Pairs::new();
    let mut declared_inverse = Pairs::new();
    for p in v.properties() {
        prop_start.insert((p.iri.clone(), p.iri.clone()));
        for s in &p.super_properties {
            prop_start.insert((s.clone(), s.clone()));
            prop_start.insert((p.iri.clone(), s.clone()));
        }
        for e in &p.equivalents {
            prop_start.insert((e.clone(), e.clone()));
            prop_start.insert((p.iri.clone(), e.clone()));
            prop_start.insert((e.clone(), p.iri.clone()));
        }
        if let Some(q) = &p.inverse {
            declared_inverse.insert((p.iri.clone(), q.clone()));
        }
    }
    let prop_sub = fixpoint(prop_start, |s| compose(s, s));
    let prop_equiv: Pairs = prop_sub
        .iter()
        .filter(|(a, b)| prop_sub.contains(&(b.clone(), a.clone())))
        .cloned()
        .collect();
    let inverse = fixpoint(declared_inverse, |s| {
        let mut out: Pairs = s.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        out.extend(compose(s, &prop_equiv));
        out
    });
    Oracle {
        class_nodes,
        sub,
        class_equiv,
        prop_sub,
        inverse,
    }
}

pub fn oracle_satisfiable(o: &Oracle) -> bool {
    !o.sub.iter().any(|(a, b)| {
        a != b && o.sub.contains(&(b.clone(), a.clone())) && !o.class_equiv.contains(&(a.clone(), b.clone()))
    })
}

pub fn oracle_sub_property_inverse(o: &Oracle) -> Pairs {
    let mut out = Pairs::new();
    for (a, b) in &o.prop_sub {
        if a == b {
            continue;
        }
        for (x, c) in &o.inverse {
            if x == b && !o.inverse.contains(&(a.clone(), c.clone())) {
                out.insert((a.clone(), c.clone()));
            }
        }
    }
    out
}

pub fn check_against_oracle(v: &Vocabulary) {
    let o = oracle(v);
    assert_eq!(v.closure_pairs(), o.sub);
    assert_eq!(v.inverse_closure(), o.inverse);
    assert_eq!(v.sub_property_inverse_pairs(), oracle_sub_property_inverse(&o));
    assert_eq!(v.cycles().is_empty(), oracle_satisfiable(&o));
    assert_eq!(v.subclass_closure().is_ok(), oracle_satisfiable(&o));
    for c in &o.class_nodes {
        let supers: BTreeSet<Iri> = o.sub.iter().filter(|(a, _)| a == c).map(|(_, b)| b.clone()).collect();
        assert_eq!(v.superclasses(c), supers, "superclasses of {c}");
    }

    let report = check_entailments(v);
    assert_eq!(report.satisfiable, oracle_satisfiable(&o));
    // every inferred subclass axiom is in the closure and was not asserted
    for a in &report.inferred {
        if let Axiom::SubClassOf(x, y) = a {
            assert!(o.sub.contains(&(x.clone(), y.clone())));
            assert_ne!(x, y);
            let def = v.concept(x.as_str());
            assert!(!def.is_some_and(|d| d.direct_superclasses.contains(y) || d.equivalents.contains(y)));
        }
    }
}

pub fn random_vocabulary(seed: u64) -> Vocabulary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=200);
    let name = |i: usize| format!("http://r.org/C{i}");
    let mut concepts = Vec::new();
    for i in 0..n {
        let mut c = ConceptDef::new(&name(i), "c", "random concept");
        for _ in 0..rng.gen_range(0..3) {
            // mostly acyclic: point at lower indices, occasionally anywhere
            let j = if i > 0 && rng.gen_bool(0.95) {
                rng.gen_range(0..i)
            } else {
                rng.gen_range(0..n)
            };
            c = c.sub_of(&name(j));
        }
        if rng.gen_bool(0.05) {
            c = c.equivalent_to(&name(rng.gen_range(0..n)));
        }
        concepts.push(c);
    }

    let m = rng.gen_range(0..=40);
    let pname = |i: usize| format!("http://r.org/p{i}");
    let mut props: Vec<PropertyDef> = (0..m)
        .map(|i| PropertyDef::new(&pname(i), PropertyKind::Object, "p", "random property"))
        .collect();
    // disjoint inverse pairs so declarations never conflict
    let mut free: Vec<usize> = (0..m).collect();
    while free.len() >= 2 && rng.gen_bool(0.5) {
        let a = free.swap_remove(rng.gen_range(0..free.len()));
        let b = free.swap_remove(rng.gen_range(0..free.len()));
        props[a] = props[a].clone().inverse_of(&pname(b));
    }
    for i in 0..m {
        if rng.gen_bool(0.1) {
            let j = rng.gen_range(0..m);
            props[i] = props[i].clone().equivalent_to(&pname(j));
        }
        if i > 0 && rng.gen_bool(0.15) {
            let j = rng.gen_range(0..i);
            props[i] = props[i].clone().sub_property_of(&pname(j));
        }
    }
    Vocabulary::new(concepts, props).unwrap()
}
