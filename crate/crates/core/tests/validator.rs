mod common;

use privgraph::ns::{con, iot_taxonomy, ssn};
use privgraph::rdf::{parse_turtle, Dataset, GraphId, Iri, Term};
use privgraph::validator::{
    check_entailments, has_errors, lint_instances, lint_instances_with_cap, lint_vocabulary, Axiom, Finding,
    FindingCode, Severity,
};
use privgraph::vocab::{vocabulary_from_quads, vocabulary_to_quads, ConceptDef, PropertyDef, PropertyKind, Vocabulary};

const BASE_VOCAB: &str = include_str!("../fixtures/lint/base_vocab.ttl");
const BUILTIN_GOLDEN: &str = include_str!("../fixtures/lint/builtin_vocab.golden");

fn vocab_with(extra: &str) -> Vocabulary {
    let text = format!("{BASE_VOCAB}\n{extra}");
    let quads = parse_turtle(&text, None, GraphId::VocabularyGraph).unwrap();
    vocabulary_from_quads(&quads).unwrap()
}

fn dataset(text: &str) -> Dataset {
    Dataset::from_quads(parse_turtle(text, None, GraphId::ResourceGraph).unwrap())
}

fn codes(findings: &[Finding]) -> Vec<FindingCode> {
    findings.iter().map(|f| f.code).collect()
}

fn home(local: &str) -> Term {
    Term::Iri(Iri::new(format!("http://example.org/home#{local}")).unwrap())
}

fn data(local: &str) -> Term {
    Term::Iri(Iri::new(format!("http://example.org/data#{local}")).unwrap())
}

#[test]
fn builtin_vocabulary_matches_golden() {
    let findings = lint_vocabulary(&Vocabulary::builtin());
    let rendered: String = findings.iter().map(|f| format!("{f}\n")).collect();
    assert_eq!(rendered, BUILTIN_GOLDEN);
}

#[test]
fn builtin_vocabulary_has_no_errors_and_flags_consent_naming() {
    let findings = lint_vocabulary(&Vocabulary::builtin());
    assert!(!has_errors(&findings));
    assert!(!findings.iter().any(|f| f.code == FindingCode::MissingDomainRange));
    let naming: Vec<_> = findings
        .iter()
        .filter(|f| f.code == FindingCode::NamingConvention)
        .collect();
    assert!(!naming.is_empty());
    assert!(naming.iter().all(|f| f.severity == Severity::Warning));
    assert!(naming.iter().any(|f| f.subject == Term::Iri(Iri::from_static(con::NS))));
}

#[test]
fn exported_vocabulary_lints_the_same() {
    let v = Vocabulary::builtin();
    let reloaded = vocabulary_from_quads(&vocabulary_to_quads(&v)).unwrap();
    assert_eq!(lint_vocabulary(&reloaded), lint_vocabulary(&v));
}

#[test]
fn base_fixture_is_clean() {
    assert_eq!(lint_vocabulary(&vocab_with("")), Vec::<Finding>::new());
}

#[test]
fn vocabulary_defects_trigger_their_code() {
    let cases = [
        ("unconnected", include_str!("../fixtures/lint/unconnected.ttl"), FindingCode::UnconnectedElement, "Garden"),
        (
            "missing domain and range",
            include_str!("../fixtures/lint/missing_domain_range.ttl"),
            FindingCode::MissingDomainRange,
            "relatedTo",
        ),
        (
            "suspicious inverse",
            include_str!("../fixtures/lint/suspicious_inverse.ttl"),
            FindingCode::SuspiciousInverse,
            "locatedIn",
        ),
        ("naming", include_str!("../fixtures/lint/naming.ttl"), FindingCode::NamingConvention, ""),
        (
            "missing comment",
            include_str!("../fixtures/lint/missing_label.ttl"),
            FindingCode::MissingLabelOrComment,
            "Lamp",
        ),
    ];
    for (name, text, code, subject) in cases {
        let findings = lint_vocabulary(&vocab_with(text));
        assert_eq!(codes(&findings), vec![code], "{name}: {findings:#?}");
        assert_eq!(findings[0].subject, home(subject), "{name}");
    }
}

#[test]
fn severities_follow_the_mapping() {
    let missing = lint_vocabulary(&vocab_with(include_str!("../fixtures/lint/missing_domain_range.ttl")));
    assert_eq!(missing[0].severity, Severity::Error);
    let suspicious = lint_vocabulary(&vocab_with(include_str!("../fixtures/lint/suspicious_inverse.ttl")));
    assert_eq!(suspicious[0].severity, Severity::Info);
}

#[test]
fn open_domain_of_metadata_is_not_flagged() {
    let v = Vocabulary::new(
        vec![ConceptDef::new("http://e.org/Meta", "Meta", "m.").sub_of(privgraph::ns::iot_lite::METADATA)],
        vec![PropertyDef::new("http://e.org/meta", PropertyKind::Object, "meta", "m.").range(&["http://e.org/Meta"])],
    )
    .unwrap();
    let findings = lint_vocabulary(&v);
    assert!(!findings.iter().any(|f| f.code == FindingCode::MissingDomainRange), "{findings:#?}");
    assert!(!findings.iter().any(|f| f.code == FindingCode::UnconnectedElement), "{findings:#?}");
}

#[test]
fn instance_defects_trigger_their_code() {
    let cases = [
        (include_str!("../fixtures/lint/datatype_mismatch.ttl"), FindingCode::DatatypeMismatch, "result.1"),
        (include_str!("../fixtures/lint/metadata_abuse.ttl"), FindingCode::MetadataAbuse, "sensor.1"),
        (include_str!("../fixtures/lint/cardinality.ttl"), FindingCode::CardinalitySchemaViolation, "sensor.1"),
        (include_str!("../fixtures/lint/missing_inverse.ttl"), FindingCode::MissingInverse, "platform.1"),
    ];
    let v = Vocabulary::builtin();
    for (text, code, subject) in cases {
        let findings = lint_instances(&dataset(text), &v);
        assert_eq!(codes(&findings), vec![code], "{findings:#?}");
        assert_eq!(findings[0].subject, data(subject));
    }
}

#[test]
fn metadata_cap_is_configurable() {
    let d = dataset(include_str!("../fixtures/lint/metadata_abuse.ttl"));
    let v = Vocabulary::builtin();
    assert!(lint_instances_with_cap(&d, &v, 6).is_empty());
    assert_eq!(lint_instances_with_cap(&d, &v, 5)[0].severity, Severity::Warning);
}

#[test]
fn sample_dataset_lints_clean() {
    let engine = common::golden_engine();
    let state = engine.store().snapshot();
    let findings = lint_instances(&state.dataset, engine.store().vocabulary());
    assert_eq!(findings, Vec::<Finding>::new());
}

#[test]
fn linting_is_deterministic_and_pure() {
    let engine = common::golden_engine();
    let state = engine.store().snapshot();
    let before = state.dataset.clone();
    let v = engine.store().vocabulary();
    let a = lint_instances(&state.dataset, v);
    let b = lint_instances(&state.dataset, v);
    assert_eq!(a, b);
    assert_eq!(before, state.dataset);
    let mut sorted = a.clone();
    sorted.sort_by(|x, y| (x.code, &x.subject).cmp(&(y.code, &y.subject)));
    assert_eq!(a, sorted);
}

#[test]
fn builtin_entailments() {
    let report = check_entailments(&Vocabulary::builtin());
    assert!(report.satisfiable);
    assert!(report.inferred.contains(&Axiom::SubClassOf(
        Iri::from_static(iot_taxonomy::SOUND_SENSOR),
        Iri::from_static(ssn::SYSTEM)
    )));
    // asserted axioms are not reported
    assert!(!report.inferred.contains(&Axiom::SubClassOf(
        Iri::from_static(iot_taxonomy::SOUND_SENSOR),
        Iri::from_static(privgraph::ns::sosa::SENSOR)
    )));
}

#[test]
fn strict_cycle_is_unsatisfiable() {
    let v = Vocabulary::new(
        vec![
            ConceptDef::new("http://e.org/A", "A", "a.").sub_of("http://e.org/B"),
            ConceptDef::new("http://e.org/B", "B", "b.").sub_of("http://e.org/A"),
        ],
        vec![],
    )
    .unwrap();
    let report = check_entailments(&v);
    assert!(!report.satisfiable);
    assert_eq!(report.cycles.len(), 1);

    let equivalent = Vocabulary::new(
        vec![
            ConceptDef::new("http://e.org/A", "A", "a.")
                .sub_of("http://e.org/B")
                .equivalent_to("http://e.org/B"),
            ConceptDef::new("http://e.org/B", "B", "b.").sub_of("http://e.org/A"),
        ],
        vec![],
    )
    .unwrap();
    assert!(check_entailments(&equivalent).satisfiable);
}

#[test]
fn flat_vocabulary_infers_nothing() {
    let v = Vocabulary::new(
        vec![ConceptDef::new("http://e.org/A", "A", "a."), ConceptDef::new("http://e.org/B", "B", "b.")],
        vec![],
    )
    .unwrap();
    let report = check_entailments(&v);
    assert!(report.inferred.is_empty());
    assert!(report.satisfiable);
}

#[test]
fn inverse_through_equivalence_is_reported() {
    let v = Vocabulary::new(
        vec![],
        vec![
            PropertyDef::new("http://e.org/p", PropertyKind::Object, "p", "p.").inverse_of("http://e.org/q"),
            PropertyDef::new("http://e.org/q", PropertyKind::Object, "q", "q.").equivalent_to("http://e.org/r"),
            PropertyDef::new("http://e.org/r", PropertyKind::Object, "r", "r."),
        ],
    )
    .unwrap();
    let report = check_entailments(&v);
    let p = Iri::from_static("http://e.org/p");
    let r = Iri::from_static("http://e.org/r");
    assert!(report.inferred.contains(&Axiom::InverseOf(p.clone(), r.clone())));
    assert!(report.inferred.contains(&Axiom::InverseOf(r, p)));
}
