use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use privgraph::fixtures;
use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

struct Hub {
    dir: tempfile::TempDir,
}

impl Hub {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("hub.conf"),
            format!("# test hub\ncontroller = {}\nmetadata_cap = 5\n", fixtures::ADMIN),
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_privgraph"))
            .arg("--config")
            .arg(self.path("hub.conf"))
            .arg("--data")
            .arg(self.path("hub.nq"))
            .args(args)
            .env_remove("PRIVGRAPH_PORT")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }
}

fn fixture(name: &str) -> String {
    Path::new(FIXTURES).join(name).to_string_lossy().into_owned()
}

fn bindings(stdout: &str) -> Vec<Value> {
    let v: Value = serde_json::from_str(stdout).unwrap();
    v["results"]["bindings"].as_array().unwrap().clone()
}

fn seeded() -> Hub {
    let hub = Hub::new();
    hub.ok(&["ingest", &fixture("resources.ttl"), "--graph", "resource"]);
    hub.ok(&["ingest", &fixture("observation.ttl"), "--graph", "observation"]);
    hub
}

#[test]
fn ingest_then_query_with_consent() {
    let hub = seeded();
    let user = fixtures::EXPERIMENTER;
    hub.ok(&["party", user, "--role", "allowed-party"]);
    let query = fixture("bbox.rq");
    assert!(bindings(&hub.ok(&["query", &query, "--as", user])).is_empty());

    hub.ok(&[
        "request",
        "--as",
        user,
        "--action",
        "iot-taxonomy:DiscoverSensors",
        "--purpose",
        "iot-taxonomy:KnowSensorsInTheArea",
        fixtures::SENSOR,
    ]);
    hub.ok(&["ingest", &fixture("consent.ttl"), "--graph", "consent"]);
    hub.ok(&["ingest", &fixture("permissions.ttl"), "--graph", "permissions"]);
    for mode in ["rewrite", "postfilter"] {
        let rows = bindings(&hub.ok(&["query", &query, "--as", user, "--mode", mode]));
        assert_eq!(rows.len(), 1, "{mode}");
        assert_eq!(rows[0]["sensor"]["value"], fixtures::SENSOR);
    }
    let explained = hub.ok(&["query", &query, "--as", user, "--explain"]);
    assert!(explained.contains("iot-taxonomy:DiscoverSensors"), "{explained}");
}

#[test]
fn consent_commands_round_trip() {
    let hub = seeded();
    let user = fixtures::EXPERIMENTER;
    let alice = "http://soundcity.example.org/alice";
    hub.ok(&["party", user, "--role", "allowed-party"]);
    hub.ok(&["party", alice, "--role", "consenting-party"]);
    hub.ok(&["own", alice, fixtures::SENSOR]);
    let out: Value = serde_json::from_str(&hub.ok(&[
        "request",
        "--as",
        user,
        "--action",
        "iot-taxonomy:DiscoverSensors",
        "--purpose",
        "noise research",
        fixtures::SENSOR,
    ]))
    .unwrap();
    let id = out["pending"][0]["id"].as_str().unwrap().to_string();

    let listed: Vec<Value> = serde_json::from_str(&hub.ok(&["consent", "list", "--as", alice, "--status", "pending"])).unwrap();
    assert_eq!(listed.len(), 1);
    let perm: Value = serde_json::from_str(&hub.ok(&[
        "consent",
        "grant",
        &id,
        "--as",
        alice,
        "--expires",
        "2999-01-01T00:00:00Z",
    ]))
    .unwrap();
    let perm_id = perm["id"].as_str().unwrap();
    let failed = hub.run(&["consent", "revoke", perm_id, "--as", user]);
    assert_eq!(failed.status.code(), Some(2));
    hub.ok(&["consent", "revoke", perm_id, "--as", alice]);
    let granted: Vec<Value> = serde_json::from_str(&hub.ok(&["consent", "list", "--status", "granted"])).unwrap();
    assert_eq!(granted.len(), 1);
}

#[test]
fn lint_exit_code_follows_error_findings() {
    let hub = seeded();
    let out = hub.run(&["lint"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let json: Vec<Value> = serde_json::from_str(&hub.ok(&["lint", "--format", "json"])).unwrap();
    assert!(json.iter().all(|f| f["severity"] != "Error"));

    // a mistyped value can only get in through a snapshot
    let snapshot = std::fs::read_to_string(hub.path("hub.nq")).unwrap();
    let broken = snapshot.replace(
        "\"90\"^^<http://www.w3.org/2001/XMLSchema#double>",
        "\"loud\"^^<http://www.w3.org/2001/XMLSchema#string>",
    );
    assert_ne!(broken, snapshot);
    std::fs::write(hub.path("broken.nq"), broken).unwrap();
    hub.ok(&["restore", hub.path("broken.nq").to_str().unwrap()]);
    let out = hub.run(&["lint"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DatatypeMismatch"));
}

#[test]
fn snapshot_restore_is_byte_identical() {
    let hub = seeded();
    let first = hub.path("first.nq");
    hub.ok(&["snapshot", first.to_str().unwrap()]);

    let other = Hub::new();
    other.ok(&["restore", first.to_str().unwrap()]);
    let second = other.path("second.nq");
    other.ok(&["snapshot", second.to_str().unwrap()]);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn rejected_ingest_exits_with_an_error() {
    let hub = Hub::new();
    let out = hub.run(&["ingest", &fixture("observation.ttl"), "--graph", "observation"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    assert!(!hub.path("hub.nq").exists());
}

#[test]
fn vocabulary_export_parses_back() {
    let hub = Hub::new();
    let out = hub.path("vocab.ttl");
    hub.ok(&["vocab", "export", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let quads = privgraph::rdf::parse_turtle(&text, None, privgraph::rdf::GraphId::VocabularyGraph).unwrap();
    let v = privgraph::vocab::vocabulary_from_quads(&quads).unwrap();
    assert_eq!(v, privgraph::vocab::Vocabulary::builtin());
}

#[test]
fn bad_port_override_is_reported() {
    let hub = Hub::new();
    let out = Command::new(env!("CARGO_BIN_EXE_privgraph"))
        .arg("--config")
        .arg(hub.path("hub.conf"))
        .arg("lint")
        .env("PRIVGRAPH_PORT", "seventy")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
