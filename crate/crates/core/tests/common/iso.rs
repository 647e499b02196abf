//! Blank-node-aware dataset comparison and random datasets.

use std::collections::{BTreeMap, BTreeSet};

use privgraph::rdf::{GraphId, Iri, Literal, Quad, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force isomorphism: tries every bijection between the blank labels.
pub fn isomorphic(a: &[Quad], b: &[Quad]) -> bool {
    let set_a: BTreeSet<Quad> = a.iter().cloned().collect();
    let set_b: BTreeSet<Quad> = b.iter().cloned().collect();
    if set_a.len() != set_b.len() {
        return false;
    }
    let blanks = |s: &BTreeSet<Quad>| -> Vec<String> {
        let mut out = BTreeSet::new();
        for q in s {
            for t in [&q.subject, &q.object] {
                if let Term::BlankNode(l) = t {
                    out.insert(l.clone());
                }
            }
        }
        out.into_iter().collect()
    };
    let la = blanks(&set_a);
    let lb = blanks(&set_b);
    if la.len() != lb.len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..lb.len()).collect();
    loop {
        let map: BTreeMap<&String, &String> = la.iter().zip(perm.iter().map(|i| &lb[*i])).collect();
        let rename = |t: &Term| match t {
            Term::BlankNode(l) => Term::BlankNode(map[l].clone()),
            other => other.clone(),
        };
        let mapped: BTreeSet<Quad> = set_a
            .iter()
            .map(|q| Quad {
                subject: rename(&q.subject),
                predicate: q.predicate.clone(),
                object: rename(&q.object),
                graph: q.graph,
            })
            .collect();
        if mapped == set_b {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}


const IRIS: [&str; 9] = [
    "http://soundcity.example.org/sensor.resource.3230",
    "http://www.w3.org/ns/sosa/observes",
    "http://purl.org/iot/vocab/iot-taxonomy-lite#soundSensor",
    "http://e.org/a",
    "http://e.org/b#frag",
    "http://e.org/with.dot.",
    "urn:privgraph:permission:1",
    "http://e.org/%C3%A9t%C3%A9",
    "http://e.org/ünïcode",
];

const TEXT_PIECES: [&str; 9] = ["\\", "\"", "\n", "\r", "\t", "é", "日本", "a", " "];

fn xsd(local: &str) -> Iri {
    Iri::new(format!("http://www.w3.org/2001/XMLSchema#{local}")).unwrap()
}

fn random_literal(rng: &mut ChaCha8Rng) -> Literal {
    match rng.gen_range(0..8) {
        0 => {
            let n = rng.gen_range(0..7);
            let s: String = (0..n).map(|_| *TEXT_PIECES.choose(rng).unwrap()).collect();
            Literal::string(s)
        }
        1 => {
            let tag = ["en", "fr-BE", "ja"].choose(rng).unwrap();
            let s: String = (0..rng.gen_range(0..5)).map(|_| rng.gen_range('a'..='z')).collect();
            Literal::lang_string(s, *tag).unwrap()
        }
        2 => Literal::typed(rng.gen::<i32>().to_string(), xsd("int")).unwrap(),
        3 => Literal::typed(rng.gen::<i64>().to_string(), xsd("integer")).unwrap(),
        4 => Literal::double(rng.gen_range(-1.0e6..1.0e6)),
        5 => Literal::typed(rng.gen::<bool>().to_string(), xsd("boolean")).unwrap(),
        6 => Literal::date_time(chrono::DateTime::from_timestamp(rng.gen_range(0..4_000_000_000), 0).unwrap()),
        _ => Literal::typed(format!("{}.{}", rng.gen_range(0..10_000), rng.gen_range(0..1000)), xsd("decimal")).unwrap(),
    }
}

fn random_node(rng: &mut ChaCha8Rng) -> Term {
    if rng.gen_bool(0.2) {
        Term::blank(&format!("b{}", rng.gen_range(0..3))).unwrap()
    } else {
        Term::Iri(Iri::new(*IRIS.choose(rng).unwrap()).unwrap())
    }
}

/// Up to 24 quads, in `graph` or spread over every graph.
pub fn random_quads(seed: u64, graph: Option<GraphId>) -> Vec<Quad> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rng.gen_range(0..25))
        .map(|_| {
            let s = random_node(&mut rng);
            let p = Iri::new(*IRIS.choose(&mut rng).unwrap()).unwrap();
            let o = if rng.gen_bool(0.6) {
                Term::Literal(random_literal(&mut rng))
            } else {
                random_node(&mut rng)
            };
            let g = graph.unwrap_or_else(|| *GraphId::ALL.choose(&mut rng).unwrap());
            Quad::new(s, p, o, g).unwrap()
        })
        .collect()
}
