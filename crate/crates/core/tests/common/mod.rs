#![allow(dead_code)]

pub mod closure_oracle;
pub mod iso;
pub mod world;

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use privgraph::consent::{ConsentEngine, Purpose};
use privgraph::fixtures;
use privgraph::ns::iot_taxonomy;
use privgraph::rdf::{parse_turtle, GraphId, Iri};
use privgraph::store::{AccessContext, Role, Store};

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap()
}

pub fn ttl(text: &str, graph: GraphId) -> Vec<privgraph::rdf::Quad> {
    parse_turtle(text, None, graph).unwrap()
}

pub fn discover() -> Iri {
    Iri::from_static(iot_taxonomy::DISCOVER_SENSORS)
}

pub fn know_area() -> Purpose {
    Purpose::Iri(Iri::from_static(iot_taxonomy::KNOW_SENSORS_IN_THE_AREA))
}

/// Controller registered, resources and the observation ingested.
pub fn data_engine() -> ConsentEngine {
    let store = Arc::new(Store::with_builtin());
    let engine = ConsentEngine::new(store.clone());
    let admin = iri(fixtures::ADMIN);
    engine.register_controller(&admin).unwrap();
    let ctx = AccessContext::controller(&admin);
    store
        .insert_resource(&ctx, ttl(fixtures::RESOURCES_TTL, GraphId::ResourceGraph))
        .unwrap();
    store
        .insert_observation(&ctx, ttl(fixtures::OBSERVATION_TTL, GraphId::ObservationGraph))
        .unwrap();
    engine
}

/// The whole sample: data, the experimenter's declared interest and the
/// consent and permission records.
pub fn golden_engine() -> ConsentEngine {
    let engine = data_engine();
    let admin = iri(fixtures::ADMIN);
    let user = iri(fixtures::EXPERIMENTER);
    engine.register_party(&user, &[Role::AllowedParty]).unwrap();
    let out = engine
        .request_access(&user, &discover(), &know_area(), &BTreeSet::from([iri(fixtures::SENSOR)]), t0())
        .unwrap();
    assert!(out.granted.is_empty());
    let ctx = AccessContext::controller(&admin);
    let mut privacy = ttl(fixtures::CONSENT_TTL, GraphId::ConsentGraph);
    privacy.extend(ttl(fixtures::PERMISSIONS_TTL, GraphId::UserPermissionsGraph));
    engine.store().insert_privacy(&ctx, privacy).unwrap();
    engine
}
