mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{iri, ttl};
use privgraph::consent::{ConsentEngine, ConsentError};
use privgraph::fixtures;
use privgraph::ns::priv_;
use privgraph::rdf::{GraphId, Iri, Quad, Term};
use privgraph::store::{AccessContext, Role, Store, StoreConfig, StoreError, VocabularyMode};
use privgraph::vocab::Vocabulary;

const PREFIXES: &str = "\
@prefix sc: <http://soundcity.example.org/> .
@prefix sosa: <http://www.w3.org/ns/sosa/> .
@prefix iot-lite: <http://purl.oclc.org/NET/UNIS/fiware/iot-lite#> .
@prefix iot-taxonomy: <http://purl.org/iot/vocab/iot-taxonomy-lite#> .
@prefix dul: <http://www.loa.istc.cnr.it/ontologies/DUL.owl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
";

fn admin_ctx() -> AccessContext {
    AccessContext::controller(&iri(fixtures::ADMIN))
}

fn fresh() -> (Arc<Store>, ConsentEngine) {
    let store = Arc::new(Store::with_builtin());
    let engine = ConsentEngine::new(store.clone());
    engine.register_controller(&iri(fixtures::ADMIN)).unwrap();
    (store, engine)
}

fn doc(body: &str, graph: GraphId) -> Vec<Quad> {
    ttl(&format!("{PREFIXES}{body}"), graph)
}

#[test]
fn observation_before_its_sensor_is_rejected() {
    let (store, _) = fresh();
    let before = store.to_nquads();
    let err = store
        .insert_observation(&admin_ctx(), ttl(fixtures::OBSERVATION_TTL, GraphId::ObservationGraph))
        .unwrap_err();
    match err {
        StoreError::UnregisteredProducer { observation, producer } => {
            assert_eq!(observation, Term::iri(fixtures::OBSERVATION).unwrap());
            assert_eq!(producer, Some(Term::iri(fixtures::SENSOR).unwrap()));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(store.to_nquads(), before);

    // in the right order both succeed
    store
        .insert_resource(&admin_ctx(), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph))
        .unwrap();
    store
        .insert_observation(&admin_ctx(), ttl(fixtures::OBSERVATION_TTL, GraphId::ObservationGraph))
        .unwrap();
    assert!(store.snapshot().observations.contains(&Term::iri(fixtures::OBSERVATION).unwrap()));
}

#[test]
fn observation_without_producer_is_rejected() {
    let engine = common::data_engine();
    let store = engine.store();
    let before = store.to_nquads();
    let orphan = doc("sc:obs.9 a sosa:Observation ; sosa:resultTime \"2024-01-01T00:00:00Z\"^^xsd:dateTime .", GraphId::ObservationGraph);
    let err = store.insert_observation(&admin_ctx(), orphan).unwrap_err();
    assert!(matches!(err, StoreError::UnregisteredProducer { producer: None, .. }), "{err:?}");
    assert_eq!(store.to_nquads(), before);
}

#[test]
fn second_owner_is_a_cardinality_violation() {
    let engine = common::data_engine();
    let alice = iri("http://soundcity.example.org/alice");
    let bob = iri("http://soundcity.example.org/bob");
    engine.register_party(&alice, &[Role::ConsentingParty]).unwrap();
    engine.register_party(&bob, &[Role::ConsentingParty]).unwrap();
    let sensor = BTreeSet::from([iri(fixtures::SENSOR)]);
    engine.declare_ownership(&alice, &sensor).unwrap();
    // declaring it again for the same owner changes nothing
    let before = engine.store().to_nquads();
    assert!(engine.declare_ownership(&alice, &sensor).unwrap().is_empty());
    assert_eq!(engine.store().to_nquads(), before);

    let err = engine.declare_ownership(&bob, &sensor).unwrap_err();
    assert!(matches!(err, ConsentError::CardinalityViolation { .. }), "{err:?}");
    assert_eq!(engine.store().to_nquads(), before);

    // a raw write of the same link is caught by the store itself
    let raw = vec![Quad::new(
        Term::Iri(iri(fixtures::SENSOR)),
        Iri::from_static(priv_::OWNED_BY),
        Term::Iri(bob),
        GraphId::ConsentGraph,
    )
    .unwrap()];
    let err = engine.store().insert_privacy(&admin_ctx(), raw).unwrap_err();
    assert!(matches!(err, StoreError::CardinalityViolation { .. }), "{err:?}");
    assert_eq!(engine.store().to_nquads(), before);
}

#[test]
fn ownership_link_materializes_its_inverse() {
    let engine = common::data_engine();
    let alice = iri("http://soundcity.example.org/alice");
    engine.register_party(&alice, &[Role::ConsentingParty]).unwrap();
    engine
        .declare_ownership(&alice, &BTreeSet::from([iri(fixtures::SENSOR)]))
        .unwrap();
    let state = engine.store().snapshot();
    let sensor = Term::Iri(iri(fixtures::SENSOR));
    let owned_by = Iri::from_static(priv_::OWNED_BY);
    assert_eq!(
        state.dataset.objects(GraphId::ConsentGraph, &sensor, &owned_by),
        vec![Term::Iri(alice.clone())]
    );
    assert_eq!(state.owner_of(&sensor), Some(&alice));
}

#[test]
fn rejected_writes_leave_the_dataset_bit_identical() {
    let engine = common::golden_engine();
    let store = engine.store();
    let user = iri(fixtures::EXPERIMENTER);
    let before = store.to_nquads();
    let snapshot = store.snapshot();

    let attempts: Vec<(&str, Result<_, StoreError>)> = vec![
        (
            "wrong graph",
            store.insert_resource(&admin_ctx(), ttl(fixtures::OBSERVATION_TTL, GraphId::ObservationGraph)),
        ),
        (
            "allowed party writes resources",
            store.insert_resource(&AccessContext::allowed_party(&user), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph)),
        ),
        (
            "unheld role",
            store.insert_resource(&AccessContext::controller(&user), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph)),
        ),
        (
            "no resource subject",
            store.insert_resource(&admin_ctx(), doc("sc:thing iot-lite:hasUnit iot-taxonomy:DecibelA .", GraphId::ResourceGraph)),
        ),
        (
            "unknown term",
            store.insert_resource(
                &admin_ctx(),
                doc("sc:s2 a iot-taxonomy:soundSensor ; sosa:madeUpProperty sc:x .", GraphId::ResourceGraph),
            ),
        ),
        (
            "dangling permission target",
            store.insert_privacy(
                &admin_ctx(),
                ttl(
                    "<http://soundcity.example.org/p.9> <http://www.w3.org/2002/07/owl#permission_given_for_data> <http://soundcity.example.org/nowhere> .",
                    GraphId::UserPermissionsGraph,
                )
                .into_iter()
                .map(|q| Quad {
                    predicate: Iri::from_static(privgraph::ns::con::PERMISSION_GIVEN_FOR_DATA),
                    ..q
                })
                .collect(),
            ),
        ),
        (
            "second controller",
            store.insert_privacy(
                &admin_ctx(),
                ttl(
                    "<http://soundcity.example.org/admin2> a <https://w3id.org/GDPRtEXT#Controller> .",
                    GraphId::ConsentGraph,
                ),
            ),
        ),
        (
            "allowed party deletes",
            store.delete_quads(&AccessContext::allowed_party(&user), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph)),
        ),
        (
            "vocabulary delete",
            store.delete_quads(&admin_ctx(), snapshot.dataset.graph(GraphId::VocabularyGraph).take(1).collect()),
        ),
    ];
    for (name, result) in attempts {
        assert!(result.is_err(), "{name} was accepted");
        assert_eq!(store.to_nquads(), before, "{name}");
        assert_eq!(*store.snapshot(), *snapshot, "{name}");
    }
}

#[test]
fn metadata_cap_counts_links() {
    let engine = common::data_engine();
    let store = engine.store();
    let links = |n: usize| -> String {
        (0..n)
            .map(|i| format!("sc:sensor.resource.3230 iot-lite:hasMetadata sc:meta.{i} .\nsc:meta.{i} a iot-lite:Metadata ; iot-lite:metadataType \"t\" ; iot-lite:metadataValue \"v\" .\n"))
            .collect()
    };
    let with_sensor = |n: usize| format!("sc:sensor.resource.3230 a iot-taxonomy:soundSensor .\n{}", links(n));
    let before = store.to_nquads();
    let err = store
        .insert_resource(&admin_ctx(), doc(&with_sensor(6), GraphId::ResourceGraph))
        .unwrap_err();
    assert!(matches!(err, StoreError::MetadataAbuse { count: 6, cap: 5, .. }), "{err:?}");
    assert_eq!(store.to_nquads(), before);
    store
        .insert_resource(&admin_ctx(), doc(&with_sensor(5), GraphId::ResourceGraph))
        .unwrap();
}

#[test]
fn metadata_cap_is_configurable() {
    let store = Store::new(
        Arc::new(Vocabulary::builtin()),
        StoreConfig {
            metadata_cap: 1,
            ..StoreConfig::default()
        },
    );
    let engine = ConsentEngine::new(Arc::new(store));
    engine.register_controller(&iri(fixtures::ADMIN)).unwrap();
    let two = doc(
        "sc:s a iot-taxonomy:soundSensor ; iot-lite:hasMetadata sc:m1 , sc:m2 .\nsc:m1 a iot-lite:Metadata .\nsc:m2 a iot-lite:Metadata .",
        GraphId::ResourceGraph,
    );
    let err = engine.store().insert_resource(&admin_ctx(), two).unwrap_err();
    assert!(matches!(err, StoreError::MetadataAbuse { cap: 1, .. }), "{err:?}");
}

#[test]
fn lenient_mode_accepts_unknown_terms_with_a_warning() {
    let unknown = "sc:s2 a iot-taxonomy:soundSensor ; sosa:madeUpProperty sc:x .";
    let (strict, _) = fresh();
    let err = strict.insert_resource(&admin_ctx(), doc(unknown, GraphId::ResourceGraph)).unwrap_err();
    assert!(matches!(err, StoreError::UnknownVocabularyTerm(_)), "{err:?}");

    let store = Arc::new(Store::new(
        Arc::new(Vocabulary::builtin()),
        StoreConfig {
            vocabulary_mode: VocabularyMode::Lenient,
            ..StoreConfig::default()
        },
    ));
    let engine = ConsentEngine::new(store.clone());
    engine.register_controller(&iri(fixtures::ADMIN)).unwrap();
    let report = store.insert_resource(&admin_ctx(), doc(unknown, GraphId::ResourceGraph)).unwrap();
    assert!(!report.warnings.is_empty());
}

#[test]
fn resources_register_on_write() {
    let (store, _) = fresh();
    let report = store
        .insert_resource(&admin_ctx(), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph))
        .unwrap();
    let state = store.snapshot();
    assert!(state.registered_resources.contains(&iri(fixtures::SENSOR)));
    assert!(state.registered_resources.contains(&iri(fixtures::SERVICE)));
    assert!(state.registered_observable_properties.contains(&iri(fixtures::PROPERTY)));
    assert!(report.registered.contains(&iri(fixtures::SENSOR)));
}

#[test]
fn inverse_links_are_written_in_the_same_graph() {
    let (store, _) = fresh();
    store
        .insert_resource(&admin_ctx(), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph))
        .unwrap();
    let state = store.snapshot();
    let hosts = Iri::from_static(privgraph::ns::sosa::HOSTS);
    let hosted = state
        .dataset
        .objects(GraphId::ResourceGraph, &Term::Iri(iri(fixtures::PLATFORM)), &hosts);
    assert!(hosted.contains(&Term::Iri(iri(fixtures::SENSOR))));
}

#[test]
fn snapshots_share_nothing_with_later_writes() {
    let (store, _) = fresh();
    let early = store.snapshot();
    store
        .insert_resource(&admin_ctx(), ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph))
        .unwrap();
    assert!(early.registered_resources.is_empty());
    assert!(!store.snapshot().registered_resources.is_empty());
}

#[test]
fn consenting_party_deletes_only_what_it_owns() {
    let engine = common::data_engine();
    let alice = iri("http://soundcity.example.org/alice");
    let bob = iri("http://soundcity.example.org/bob");
    engine.register_party(&alice, &[Role::ConsentingParty]).unwrap();
    engine.register_party(&bob, &[Role::ConsentingParty]).unwrap();
    engine
        .declare_ownership(&alice, &BTreeSet::from([iri(fixtures::SERVICE)]))
        .unwrap();
    let endpoint: Vec<Quad> = engine
        .store()
        .snapshot()
        .dataset
        .quads_for_pattern(Some(GraphId::ResourceGraph), Some(&Term::Iri(iri(fixtures::SERVICE))), None, None);
    assert!(!endpoint.is_empty());
    let err = engine
        .store()
        .delete_quads(&AccessContext::consenting_party(&bob), endpoint.clone())
        .unwrap_err();
    assert!(matches!(err, StoreError::Unauthorized(_)));
    engine
        .store()
        .delete_quads(&AccessContext::consenting_party(&alice), endpoint)
        .unwrap();
}

#[test]
fn restore_rejects_inconsistent_snapshots() {
    let (store, _) = fresh();
    let before = store.to_nquads();
    // an observation whose sensor is not described
    let text = "<http://soundcity.example.org/o> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/ns/sosa/Observation> <http://purl.org/iot/ontology/fiesta-priv#observationGraph> .\n";
    let err = store.load_nquads(text).unwrap_err();
    assert!(matches!(err, StoreError::UnregisteredProducer { .. }), "{err:?}");
    assert_eq!(store.to_nquads(), before);
}
