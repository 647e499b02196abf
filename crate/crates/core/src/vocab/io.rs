//! Vocabulary to and from RDF, so the schema can be exported, linted and
//! reloaded like any other document.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Cardinality, ConceptDef, PropertyDef, PropertyKind, VocabError, Vocabulary};
use crate::ns::{owl, rdf, rdfs, schema, xsd};
use crate::rdf::{serialize_turtle, GraphId, Iri, Literal, PrefixMap, Quad, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabImportError {
    #[error("{subject}: {message}")]
    Invalid { subject: String, message: String },
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

fn quad(s: &Iri, p: &str, o: Term) -> Quad {
    Quad {
        graph: GraphId::VocabularyGraph,
        subject: Term::Iri(s.clone()),
        predicate: Iri::new(p).expect("schema predicate"),
        object: o,
    }
}

fn iri_term(s: &str) -> Term {
    Term::Iri(Iri::new(s).expect("schema IRI"))
}

fn count(n: u32) -> Term {
    Term::Literal(Literal::typed(n.to_string(), Iri::from_static(xsd::NON_NEGATIVE_INTEGER)).expect("count literal"))
}

/// The schema as quads in the vocabulary graph, sorted.
pub fn vocabulary_to_quads(v: &Vocabulary) -> Vec<Quad> {
    let mut out = Vec::new();
    for c in v.concepts() {
        out.push(quad(&c.iri, rdf::TYPE, iri_term(owl::CLASS)));
        if !c.label.is_empty() {
            out.push(quad(&c.iri, rdfs::LABEL, Term::Literal(Literal::string(&c.label))));
        }
        if !c.comment.is_empty() {
            out.push(quad(&c.iri, rdfs::COMMENT, Term::Literal(Literal::string(&c.comment))));
        }
        for s in &c.direct_superclasses {
            out.push(quad(&c.iri, rdfs::SUB_CLASS_OF, Term::Iri(s.clone())));
        }
        for e in &c.equivalents {
            out.push(quad(&c.iri, owl::EQUIVALENT_CLASS, Term::Iri(e.clone())));
        }
    }
    for p in v.properties() {
        let kind = match p.kind {
            PropertyKind::Object => owl::OBJECT_PROPERTY,
            PropertyKind::Data => owl::DATATYPE_PROPERTY,
        };
        out.push(quad(&p.iri, rdf::TYPE, iri_term(kind)));
        if !p.label.is_empty() {
            out.push(quad(&p.iri, rdfs::LABEL, Term::Literal(Literal::string(&p.label))));
        }
        if !p.comment.is_empty() {
            out.push(quad(&p.iri, rdfs::COMMENT, Term::Literal(Literal::string(&p.comment))));
        }
        for d in &p.domain_includes {
            out.push(quad(&p.iri, schema::DOMAIN_INCLUDES, Term::Iri(d.clone())));
        }
        for r in &p.range_includes {
            out.push(quad(&p.iri, schema::RANGE_INCLUDES, Term::Iri(r.clone())));
        }
        if let Some(inv) = &p.inverse {
            out.push(quad(&p.iri, owl::INVERSE_OF, Term::Iri(inv.clone())));
        }
        if let Some(card) = p.cardinality {
            out.push(quad(&p.iri, owl::MIN_CARDINALITY, count(card.min)));
            if let Some(max) = card.max {
                out.push(quad(&p.iri, owl::MAX_CARDINALITY, count(max)));
            }
        }
        for s in &p.super_properties {
            out.push(quad(&p.iri, rdfs::SUB_PROPERTY_OF, Term::Iri(s.clone())));
        }
        for e in &p.equivalents {
            out.push(quad(&p.iri, owl::EQUIVALENT_PROPERTY, Term::Iri(e.clone())));
        }
    }
    out.sort();
    out
}

pub fn vocabulary_to_turtle(v: &Vocabulary) -> String {
    serialize_turtle(&vocabulary_to_quads(v), &PrefixMap::builtin())
}

#[derive(Default)]
struct Facts {
    types: BTreeSet<String>,
    by_pred: BTreeMap<String, Vec<Term>>,
}

/// Rebuilds a vocabulary from schema statements. `rdfs:domain` and
/// `rdfs:range` are read like their `schema:` includes counterparts.
pub fn vocabulary_from_quads(quads: &[Quad]) -> Result<Vocabulary, VocabImportError> {
    let mut facts: BTreeMap<Iri, Facts> = BTreeMap::new();
    for q in quads {
        let Term::Iri(s) = &q.subject else { continue };
        let entry = facts.entry(s.clone()).or_default();
        if q.predicate == rdf::TYPE {
            if let Term::Iri(t) = &q.object {
                entry.types.insert(t.as_str().to_string());
            }
        } else {
            entry
                .by_pred
                .entry(q.predicate.as_str().to_string())
                .or_default()
                .push(q.object.clone());
        }
    }

    let mut concepts = Vec::new();
    let mut properties = Vec::new();
    for (iri, f) in &facts {
        let invalid = |message: &str| VocabImportError::Invalid {
            subject: iri.as_str().to_string(),
            message: message.to_string(),
        };
        let iris = |pred: &str| -> Result<Vec<Iri>, VocabImportError> {
            f.by_pred
                .get(pred)
                .into_iter()
                .flatten()
                .map(|t| t.as_iri().cloned().ok_or_else(|| invalid(&format!("<{pred}> needs an IRI object"))))
                .collect()
        };
        let text = |pred: &str| -> String {
            f.by_pred
                .get(pred)
                .into_iter()
                .flatten()
                .filter_map(|t| t.as_literal().map(|l| l.lexical().to_string()))
                .min()
                .unwrap_or_default()
        };
        let number = |pred: &str| -> Result<Option<u32>, VocabImportError> {
            match f.by_pred.get(pred).and_then(|v| v.first()) {
                None => Ok(None),
                Some(t) => t
                    .as_literal()
                    .and_then(|l| l.lexical().parse().ok())
                    .map(Some)
                    .ok_or_else(|| invalid(&format!("<{pred}> needs a count"))),
            }
        };

        let is_property = f
            .types
            .iter()
            .any(|t| t == owl::OBJECT_PROPERTY || t == owl::DATATYPE_PROPERTY || t == rdf::PROPERTY);
        let is_class = f.types.iter().any(|t| t == owl::CLASS || t == rdfs::CLASS)
            || f.by_pred.contains_key(rdfs::SUB_CLASS_OF)
            || f.by_pred.contains_key(owl::EQUIVALENT_CLASS);

        if is_property {
            let mut range = iris(schema::RANGE_INCLUDES)?;
            range.extend(iris(rdfs::RANGE)?);
            let kind = if f.types.contains(owl::DATATYPE_PROPERTY) {
                PropertyKind::Data
            } else if f.types.contains(owl::OBJECT_PROPERTY) {
                PropertyKind::Object
            } else if !range.is_empty() && range.iter().all(|r| r.as_str().starts_with(xsd::NS)) {
                PropertyKind::Data
            } else {
                PropertyKind::Object
            };
            let mut domain = iris(schema::DOMAIN_INCLUDES)?;
            domain.extend(iris(rdfs::DOMAIN)?);
            let inverse = iris(owl::INVERSE_OF)?;
            if inverse.len() > 1 {
                return Err(invalid("more than one declared inverse"));
            }
            let min = number(owl::MIN_CARDINALITY)?;
            let max = number(owl::MAX_CARDINALITY)?;
            let cardinality = match (min, max) {
                (None, None) => None,
                (min, max) => Some(Cardinality {
                    min: min.unwrap_or(0),
                    max,
                }),
            };
            properties.push(PropertyDef {
                iri: iri.clone(),
                label: text(rdfs::LABEL),
                comment: text(rdfs::COMMENT),
                kind,
                domain_includes: domain,
                range_includes: range,
                inverse: inverse.into_iter().next(),
                cardinality,
                equivalents: iris(owl::EQUIVALENT_PROPERTY)?,
                super_properties: iris(rdfs::SUB_PROPERTY_OF)?,
            });
        } else if is_class {
            concepts.push(ConceptDef {
                iri: iri.clone(),
                label: text(rdfs::LABEL),
                comment: text(rdfs::COMMENT),
                direct_superclasses: iris(rdfs::SUB_CLASS_OF)?,
                equivalents: iris(owl::EQUIVALENT_CLASS)?,
            });
        }
    }
    Ok(Vocabulary::new(concepts, properties)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    #[test]
    fn builtin_round_trips_through_turtle() {
        let v = Vocabulary::builtin();
        let text = vocabulary_to_turtle(&v);
        let quads = parse_turtle(&text, None, GraphId::VocabularyGraph).unwrap();
        let back = vocabulary_from_quads(&quads).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn rdfs_domain_reads_as_includes() {
        let doc = "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
                   @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
                   <http://e/p> a owl:ObjectProperty ; rdfs:domain <http://e/A> ; rdfs:range <http://e/B> .";
        let quads = parse_turtle(doc, None, GraphId::VocabularyGraph).unwrap();
        let v = vocabulary_from_quads(&quads).unwrap();
        let p = v.property("http://e/p").unwrap();
        assert_eq!(p.domain_includes.len(), 1);
        assert_eq!(p.range_includes.len(), 1);
    }
}
