//! Randomized hubs for the enforcement properties.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use privgraph::consent::{compile, ConsentEngine, ConsentRecord, PermissionRecord, Purpose};
use privgraph::ns::iot_taxonomy;
use privgraph::rdf::{parse_turtle, GraphId, Iri};
use privgraph::store::{AccessContext, Role, Store};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NS: &str = "http://hub.example.org/";

pub const PREFIXES: &str = "\
@prefix ex: <http://hub.example.org/> .
@prefix sosa: <http://www.w3.org/ns/sosa/> .
@prefix ssn: <http://www.w3.org/ns/ssn/> .
@prefix iot-lite: <http://purl.oclc.org/NET/UNIS/fiware/iot-lite#> .
@prefix iot-taxonomy: <http://purl.org/iot/vocab/iot-taxonomy-lite#> .
@prefix geo: <http://www.w3.org/2003/01/geo/wgs84_pos#> .
@prefix dul: <http://www.loa.istc.cnr.it/ontologies/DUL.owl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
";

/// Query bodies used against every world. All of them avoid the privacy
/// vocabulary, so they are valid user queries.
pub const TEMPLATES: [&str; 8] = [
    "PREFIX sosa: <http://www.w3.org/ns/sosa/>
     PREFIX geo: <http://www.w3.org/2003/01/geo/wgs84_pos#>
     SELECT ?sensor ?lat ?lng WHERE {
       ?sensor sosa:isHostedBy ?platform .
       ?platform geo:location ?loc .
       ?loc geo:lat ?lat .
       ?loc geo:long ?lng .
       FILTER(?lng >= -50 && ?lng <= 50 && ?lat >= 0 && ?lat <= 100)
     }",
    "PREFIX sosa: <http://www.w3.org/ns/sosa/>
     SELECT ?s ?p WHERE { ?s a sosa:Sensor . ?s sosa:observes ?p }",
    "PREFIX sosa: <http://www.w3.org/ns/sosa/>
     PREFIX dul: <http://www.loa.istc.cnr.it/ontologies/DUL.owl#>
     SELECT ?obs ?v WHERE { ?obs sosa:madeBySensor ?s . ?obs sosa:hasResult ?r . ?r dul:hasDataValue ?v }",
    "PREFIX sosa: <http://www.w3.org/ns/sosa/>
     SELECT ?obs ?prop WHERE { ?obs a sosa:Observation . ?obs sosa:observedProperty ?prop }",
    "PREFIX iot-lite: <http://purl.oclc.org/NET/UNIS/fiware/iot-lite#>
     SELECT ?svc ?ep WHERE { ?svc a iot-lite:Service . ?svc iot-lite:endpoint ?ep }",
    "SELECT ?s ?p ?o WHERE { ?s ?p ?o }",
    "PREFIX iot-lite: <http://purl.oclc.org/NET/UNIS/fiware/iot-lite#>
     PREFIX ssn: <http://www.w3.org/ns/ssn/>
     SELECT ?s ?u WHERE { ?s a ssn:System . ?s iot-lite:hasUnit ?u }",
    "PREFIX sosa: <http://www.w3.org/ns/sosa/>
     PREFIX dul: <http://www.loa.istc.cnr.it/ontologies/DUL.owl#>
     SELECT ?obs ?v WHERE { ?obs sosa:hasResult ?r . ?r dul:hasDataValue ?v . FILTER(?v > 50) }",
];

/// Lists every system; used by the visibility oracles.
pub const SYSTEMS_QUERY: &str = "PREFIX ssn: <http://www.w3.org/ns/ssn/>
SELECT ?s WHERE { ?s a ssn:System }";

/// Lists every observation with what produced it.
pub const OBSERVATIONS_QUERY: &str = "PREFIX sosa: <http://www.w3.org/ns/sosa/>
SELECT ?obs WHERE { ?obs a sosa:Observation }";

pub fn ex(local: &str) -> Iri {
    Iri::new(format!("{NS}{local}")).unwrap()
}

pub fn actions() -> [Iri; 2] {
    [
        Iri::from_static(iot_taxonomy::DISCOVER_SENSORS),
        Iri::from_static(iot_taxonomy::GET_WORKPLACE_OBSERVATIONS),
    ]
}

pub fn purposes() -> [Purpose; 2] {
    [
        Purpose::Iri(Iri::from_static(iot_taxonomy::KNOW_SENSORS_IN_THE_AREA)),
        Purpose::Text("noise research".into()),
    ]
}

/// The data a world was built from, for oracles.
#[derive(Debug, Clone)]
pub struct Layout {
    pub admin: Iri,
    pub owners: Vec<Iri>,
    pub users: Vec<Iri>,
    pub sensors: Vec<Iri>,
    pub actuators: Vec<Iri>,
    pub services: Vec<Iri>,
    pub properties: Vec<Iri>,
    /// observation -> (sensor, property)
    pub observations: BTreeMap<Iri, (Iri, Iri)>,
    pub owner_of: BTreeMap<Iri, Iri>,
    pub resources_ttl: String,
    pub observations_ttl: String,
}

impl Layout {
    pub fn resources(&self) -> Vec<Iri> {
        self.sensors
            .iter()
            .chain(&self.actuators)
            .chain(&self.services)
            .cloned()
            .collect()
    }

    pub fn targets(&self) -> Vec<Iri> {
        let mut out = self.resources();
        out.extend(self.properties.iter().cloned());
        out
    }
}

/// Builds the resource and observation documents for `seed`.
pub fn layout(seed: u64) -> Layout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l = Layout {
        admin: ex("admin"),
        owners: Vec::new(),
        users: Vec::new(),
        sensors: Vec::new(),
        actuators: Vec::new(),
        services: Vec::new(),
        properties: Vec::new(),
        observations: BTreeMap::new(),
        owner_of: BTreeMap::new(),
        resources_ttl: String::new(),
        observations_ttl: String::new(),
    };
    let n_props = rng.gen_range(1..=4);
    let mut ttl = String::from(PREFIXES);
    for i in 0..n_props {
        let p = ex(&format!("property.{i}"));
        let class = if rng.gen_bool(0.5) { "SoundPressureLevel" } else { "Temperature" };
        let _ = writeln!(ttl, "{p} a iot-taxonomy:{class} .");
        l.properties.push(p);
    }
    let actuated = ex("property.actuated");
    let n_resources = rng.gen_range(1..=30);
    for i in 0..n_resources {
        let platform = ex(&format!("platform.{i}"));
        let loc = ex(&format!("location.{i}"));
        let lat: f64 = rng.gen_range(-20.0..120.0);
        let lng: f64 = rng.gen_range(-80.0..80.0);
        let _ = writeln!(
            ttl,
            "{platform} a sosa:Platform ; geo:location {loc} .\n{loc} a geo:Point ; geo:lat \"{lat:.3}\"^^xsd:double ; geo:long \"{lng:.3}\"^^xsd:double ."
        );
        match rng.gen_range(0..10) {
            0..=5 => {
                let s = ex(&format!("sensor.{i}"));
                let class = if rng.gen_bool(0.5) { "iot-taxonomy:soundSensor" } else { "iot-taxonomy:TemperatureSensor" };
                let prop = l.properties.choose(&mut rng).unwrap();
                let _ = writeln!(
                    ttl,
                    "{s} a {class} ; sosa:observes {prop} ; sosa:isHostedBy {platform} ; iot-lite:hasUnit iot-taxonomy:DecibelA ."
                );
                l.sensors.push(s);
            }
            6..=7 => {
                let a = ex(&format!("actuator.{i}"));
                let _ = writeln!(
                    ttl,
                    "{a} a sosa:Actuator ; sosa:actsOnProperty {actuated} ; sosa:isHostedBy {platform} .\n{actuated} a sosa:ActuatableProperty ."
                );
                l.actuators.push(a);
            }
            _ => {
                let svc = ex(&format!("service.{i}"));
                let _ = writeln!(
                    ttl,
                    "{svc} a iot-lite:Service ; iot-lite:endpoint \"http://hub.example.org/api/{i}\"^^xsd:anyURI ."
                );
                l.services.push(svc);
            }
        }
    }
    if !l.actuators.is_empty() {
        l.properties.push(actuated);
    }
    l.resources_ttl = ttl;

    let mut obs_ttl = String::from(PREFIXES);
    for (k, s) in l.sensors.clone().iter().enumerate() {
        for j in 0..rng.gen_range(0..3) {
            let o = ex(&format!("observation.{k}.{j}"));
            let r = ex(&format!("result.{k}.{j}"));
            let value: f64 = rng.gen_range(20.0..110.0);
            // sensors observe exactly one property, recorded in the document
            let prop = property_of(&l.resources_ttl, s);
            let _ = writeln!(
                obs_ttl,
                "{o} a sosa:Observation ; sosa:madeBySensor {s} ; sosa:observedProperty {prop} ; sosa:hasResult {r} ; sosa:resultTime \"2024-04-01T00:00:00Z\"^^xsd:dateTime .\n{r} a sosa:Result ; dul:hasDataValue \"{value:.2}\"^^xsd:double ."
            );
            l.observations.insert(o, (s.clone(), prop));
        }
    }
    l.observations_ttl = obs_ttl;

    let n_owners = rng.gen_range(1..=3);
    l.owners = (0..n_owners).map(|i| ex(&format!("owner.{i}"))).collect();
    for t in l.targets() {
        if rng.gen_bool(0.8) {
            let o = l.owners.choose(&mut rng).unwrap().clone();
            l.owner_of.insert(t, o);
        }
    }
    let n_users = rng.gen_range(1..=10);
    l.users = (0..n_users).map(|i| ex(&format!("user.{i}"))).collect();
    l
}

fn property_of(ttl: &str, sensor: &Iri) -> Iri {
    let line = ttl
        .lines()
        .find(|line| line.starts_with(&format!("{sensor}")))
        .unwrap();
    let start = line.find("sosa:observes <").unwrap() + "sosa:observes <".len();
    let end = start + line[start..].find('>').unwrap();
    Iri::new(&line[start..end]).unwrap()
}

/// A hub loaded with a layout, before any consent is given.
pub struct World {
    pub layout: Layout,
    pub engine: ConsentEngine,
}

/// Loads the layout through module calls: controller, resources,
/// observations, parties and ownership.
pub fn build(layout: Layout) -> World {
    let store = Arc::new(Store::with_builtin());
    let engine = ConsentEngine::new(store.clone());
    engine.register_controller(&layout.admin).unwrap();
    let ctx = AccessContext::controller(&layout.admin);
    store
        .insert_resource(&ctx, parse_turtle(&layout.resources_ttl, None, GraphId::ResourceGraph).unwrap())
        .unwrap();
    store
        .insert_observation(&ctx, parse_turtle(&layout.observations_ttl, None, GraphId::ObservationGraph).unwrap())
        .unwrap();
    for o in &layout.owners {
        engine.register_party(o, &[Role::ConsentingParty]).unwrap();
    }
    for u in &layout.users {
        engine.register_party(u, &[Role::AllowedParty]).unwrap();
    }
    let mut by_owner: BTreeMap<&Iri, BTreeSet<Iri>> = BTreeMap::new();
    for (t, o) in &layout.owner_of {
        by_owner.entry(o).or_default().insert(t.clone());
    }
    for (o, targets) in by_owner {
        engine.declare_ownership(o, &targets).unwrap();
    }
    World { layout, engine }
}

/// One random permission, as the controller would record it.
#[derive(Debug, Clone)]
pub struct Grant {
    pub record: PermissionRecord,
    pub consenting_party: Iri,
}

/// Interests for some users and up to 20 permissions with random expiries
/// (none, past, exactly now, future).
pub fn random_consent(l: &Layout, seed: u64, now: DateTime<Utc>) -> (BTreeMap<Iri, (Iri, Purpose)>, Vec<Grant>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut interests = BTreeMap::new();
    for u in &l.users {
        if rng.gen_bool(0.85) {
            let a = actions().choose(&mut rng).unwrap().clone();
            let p = purposes().choose(&mut rng).unwrap().clone();
            interests.insert(u.clone(), (a, p));
        }
    }
    let targets = l.targets();
    let mut grants = Vec::new();
    for i in 0..rng.gen_range(0..=20) {
        let n_parties = rng.gen_range(1..=2.min(l.users.len()));
        let parties: BTreeSet<Iri> = l.users.choose_multiple(&mut rng, n_parties).cloned().collect();
        let n_targets = rng.gen_range(1..=3.min(targets.len()));
        let data_targets: BTreeSet<Iri> = targets.choose_multiple(&mut rng, n_targets).cloned().collect();
        // usually aligned with the holder's interest, sometimes not
        let first = parties.iter().next().unwrap();
        let (action, purpose) = match interests.get(first) {
            Some(x) if rng.gen_bool(0.7) => x.clone(),
            _ => (
                actions().choose(&mut rng).unwrap().clone(),
                purposes().choose(&mut rng).unwrap().clone(),
            ),
        };
        let expires_at = match rng.gen_range(0..5) {
            0 => None,
            1 => Some(now - Duration::seconds(rng.gen_range(1..86_400))),
            2 => Some(now),
            _ => Some(now + Duration::seconds(rng.gen_range(1..86_400))),
        };
        let record = PermissionRecord {
            id: ex(&format!("permission.{seed}.{i}")),
            allowed_parties: parties,
            data_targets,
            action,
            purpose,
            expires_at,
        };
        grants.push(Grant {
            record,
            consenting_party: l.owners.choose(&mut rng).unwrap().clone(),
        });
    }
    (interests, grants)
}

/// Writes interests and permissions through module calls.
pub fn apply_consent(world: &World, interests: &BTreeMap<Iri, (Iri, Purpose)>, grants: &[Grant], now: DateTime<Utc>) {
    for (u, (a, p)) in interests {
        world.engine.register_interest(u, a, p, now).unwrap();
    }
    let mut quads = Vec::new();
    for (i, g) in grants.iter().enumerate() {
        let consent = ConsentRecord {
            id: ex(&format!("consent.{i}")),
            consenting_party: g.consenting_party.clone(),
            permission: g.record.id.clone(),
        };
        quads.extend(compile(&g.record, &consent));
    }
    if !quads.is_empty() {
        world
            .engine
            .store()
            .insert_privacy(&AccessContext::controller(&world.layout.admin), quads)
            .unwrap();
    }
}
