//! Python bindings: a hub object plus a few stateless helpers.

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use privgraph::consent::RequestStatus;
use privgraph::fixtures;
use privgraph::query::AugmentationMode;
use privgraph::rdf::{parse_turtle, serialize_nquads, Iri};
use privgraph::store::Role;
use privgraph::validator::{check_entailments, lint_vocabulary};
use privgraph::vocab::Vocabulary;
use privgraph_server::hub::{finding_json, PolicyRequest};
use privgraph_server::{Clock, Config, Hub, HubError, IngestTarget, ManualClock, SystemClock};
use pyo3::exceptions::{PyPermissionError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

pyo3::create_exception!(privgraph, HubFailure, PyRuntimeError);

fn to_py(e: HubError) -> PyErr {
    use privgraph::consent::ConsentError;
    use privgraph::query::QueryError;
    use privgraph::store::StoreError;
    match e {
        HubError::Forbidden(_)
        | HubError::Store(StoreError::Unauthorized(_))
        | HubError::Consent(ConsentError::Store(StoreError::Unauthorized(_)))
        | HubError::Consent(ConsentError::NotOwner(_) | ConsentError::UnknownRequester(_))
        | HubError::Query(QueryError::Unauthorized(_)) => PyPermissionError::new_err(e.to_string()),
        HubError::BadRequest(_) | HubError::Turtle(_) | HubError::Query(_) => PyValueError::new_err(e.to_string()),
        other => HubFailure::new_err(other.to_string()),
    }
}

fn bad(msg: impl ToString) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn iri(s: &str) -> PyResult<Iri> {
    privgraph_server::hub::parse_iri(s).map_err(to_py)
}

/// Hands serde data to Python through the json module.
fn json_value<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn serde_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &serde_json::to_value(value).map_err(|e| HubFailure::new_err(e.to_string()))?)
}

fn role(s: &str) -> PyResult<Role> {
    match s {
        "consenting_party" => Ok(Role::ConsentingParty),
        "allowed_party" => Ok(Role::AllowedParty),
        other => Err(bad(format!("unknown role {other:?}"))),
    }
}

/// A data hub held in memory, optionally persisted to an N-Quads file.
///
/// Pass `now` to run on a manual clock that only moves through
/// `set_time` and `advance`.
#[pyclass(name = "Hub", module = "privgraph")]
struct PyHub {
    hub: Hub,
    manual: Option<Arc<ManualClock>>,
}

#[pymethods]
impl PyHub {
    #[new]
    #[pyo3(signature = (controller, data_path=None, mode="rewrite", metadata_cap=5, now=None))]
    fn new(
        controller: &str,
        data_path: Option<PathBuf>,
        mode: &str,
        metadata_cap: usize,
        now: Option<DateTime<Utc>>,
    ) -> PyResult<Self> {
        let config = Config {
            controller: Some(iri(controller)?),
            data_path,
            augmentation_mode: mode.parse::<AugmentationMode>().map_err(bad)?,
            metadata_cap,
            ..Config::default()
        };
        let manual = now.map(|t| Arc::new(ManualClock::new(t)));
        let clock: Arc<dyn Clock> = match &manual {
            Some(m) => m.clone(),
            None => Arc::new(SystemClock),
        };
        let hub = Hub::open(config, clock).map_err(to_py)?;
        Ok(Self { hub, manual })
    }

    fn now(&self) -> DateTime<Utc> {
        self.hub.now()
    }

    fn set_time(&self, at: DateTime<Utc>) -> PyResult<()> {
        self.manual_clock()?.set(at);
        Ok(())
    }

    fn advance(&self, seconds: i64) -> PyResult<()> {
        self.manual_clock()?.advance(Duration::seconds(seconds));
        Ok(())
    }

    /// Loads Turtle into `graph` (resource, observation, consent or
    /// permissions) and returns the number of new quads.
    #[pyo3(signature = (turtle, graph, user=None))]
    fn ingest(&self, turtle: &str, graph: &str, user: Option<&str>) -> PyResult<usize> {
        let target: IngestTarget = graph.parse().map_err(bad)?;
        let user = self.acting(user)?;
        let report = self.hub.ingest(user.as_ref(), target, turtle).map_err(to_py)?;
        self.hub.persist().map_err(to_py)?;
        Ok(report.inserted)
    }

    fn register_party(&self, party: &str, roles: Vec<String>) -> PyResult<()> {
        let roles = roles.iter().map(|r| role(r)).collect::<PyResult<Vec<_>>>()?;
        let admin = self.acting(None)?;
        self.hub
            .register_party(admin.as_ref(), &iri(party)?, &roles)
            .map_err(to_py)
    }

    fn declare_ownership(&self, owner: &str, subjects: Vec<String>) -> PyResult<usize> {
        let subjects = subjects.iter().map(|s| iri(s)).collect::<PyResult<_>>()?;
        let admin = self.acting(None)?;
        self.hub
            .declare_ownership(admin.as_ref(), &iri(owner)?, &subjects)
            .map_err(to_py)
    }

    fn register_interest(&self, user: &str, action: &str, purpose: &str) -> PyResult<()> {
        self.hub
            .register_interest(Some(&iri(user)?), action, purpose)
            .map_err(to_py)
    }

    /// Returns `{"granted": [...], "pending": [...]}`.
    fn request_access<'py>(
        &self,
        py: Python<'py>,
        user: &str,
        action: &str,
        purpose: &str,
        targets: Vec<String>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let outcome = self
            .hub
            .request_access(Some(&iri(user)?), action, purpose, &targets)
            .map_err(to_py)?;
        serde_to_py(py, &outcome)
    }

    #[pyo3(signature = (user, status=None))]
    fn consent_requests<'py>(&self, py: Python<'py>, user: &str, status: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let status = status
            .map(|s| serde_json::from_value::<RequestStatus>(serde_json::Value::String(s.into())))
            .transpose()
            .map_err(bad)?;
        let requests = self.hub.consent_requests(Some(&iri(user)?), status).map_err(to_py)?;
        serde_to_py(py, &requests)
    }

    fn grant<'py>(&self, py: Python<'py>, owner: &str, request: &str, expires_at: DateTime<Utc>) -> PyResult<Bound<'py, PyAny>> {
        let perm = self.hub.grant(Some(&iri(owner)?), request, expires_at).map_err(to_py)?;
        serde_to_py(py, &perm)
    }

    fn deny<'py>(&self, py: Python<'py>, owner: &str, request: &str) -> PyResult<Bound<'py, PyAny>> {
        let req = self.hub.deny(Some(&iri(owner)?), request).map_err(to_py)?;
        serde_to_py(py, &req)
    }

    fn revoke(&self, caller: &str, permission: &str) -> PyResult<()> {
        self.hub.revoke(Some(&iri(caller)?), permission).map_err(to_py)
    }

    fn permissions<'py>(&self, py: Python<'py>, user: &str) -> PyResult<Bound<'py, PyAny>> {
        let perms = self.hub.permissions(Some(&iri(user)?)).map_err(to_py)?;
        serde_to_py(py, &perms)
    }

    #[pyo3(signature = (owner, action, purpose, targets, expires_in, future_parties=false))]
    fn set_policy<'py>(
        &self,
        py: Python<'py>,
        owner: &str,
        action: String,
        purpose: String,
        targets: Vec<String>,
        expires_in: i64,
        future_parties: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let req = PolicyRequest {
            action,
            purpose,
            targets,
            expires_in_secs: expires_in,
            future_parties,
        };
        let rule = self.hub.set_policy(Some(&iri(owner)?), &req).map_err(to_py)?;
        serde_to_py(py, &rule)
    }

    /// Runs a SELECT query as `user`; rows come back as dicts of N-Triples terms.
    #[pyo3(signature = (user, text, mode=None))]
    fn query<'py>(&self, py: Python<'py>, user: &str, text: &str, mode: Option<&str>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mode = mode.map(|m| m.parse::<AugmentationMode>()).transpose().map_err(bad)?;
        let rs = self.hub.query(Some(&iri(user)?), text, mode).map_err(to_py)?;
        rs.rows
            .iter()
            .map(|row| {
                let d = PyDict::new(py);
                for (var, term) in row {
                    d.set_item(var, term.to_ntriples())?;
                }
                Ok(d)
            })
            .collect()
    }

    /// The query as it runs after consent conditions are added.
    fn explain(&self, user: &str, text: &str) -> PyResult<String> {
        self.hub.augmented_query(Some(&iri(user)?), text).map_err(to_py)
    }

    fn lint<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.hub.lint().iter().map(|f| json_value(py, &finding_json(f))).collect()
    }

    fn to_nquads(&self) -> String {
        self.hub.engine().store().to_nquads()
    }

    fn snapshot(&self, path: PathBuf) -> PyResult<()> {
        self.hub.snapshot_to(&path).map_err(to_py)
    }

    fn restore(&self, path: PathBuf) -> PyResult<()> {
        self.hub.restore_from(&path).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Hub(controller={:?})", self.hub.config().controller.as_ref().map(Iri::as_str))
    }
}

impl PyHub {
    fn manual_clock(&self) -> PyResult<&ManualClock> {
        self.manual
            .as_deref()
            .ok_or_else(|| PyRuntimeError::new_err("this hub runs on the system clock"))
    }

    fn acting(&self, user: Option<&str>) -> PyResult<Option<Iri>> {
        match user {
            Some(u) => Ok(Some(iri(u)?)),
            None => Ok(self.hub.config().controller.clone()),
        }
    }
}

/// Parses Turtle into the named graph and returns it as N-Quads.
#[pyfunction]
fn turtle_to_nquads(turtle: &str, graph: &str) -> PyResult<String> {
    let target: IngestTarget = graph.parse().map_err(bad)?;
    let quads = parse_turtle(turtle, None, target.graph()).map_err(bad)?;
    Ok(serialize_nquads(&quads))
}

/// Findings on the built-in vocabulary.
#[pyfunction]
fn lint_builtin_vocabulary(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyAny>>> {
    lint_vocabulary(&Vocabulary::builtin())
        .iter()
        .map(|f| json_value(py, &finding_json(f)))
        .collect()
}

/// Whether `sub` is a subclass of `sup` in the built-in vocabulary's closure.
#[pyfunction]
fn is_subclass(sub: &str, sup: &str) -> PyResult<bool> {
    let report = check_entailments(&Vocabulary::builtin());
    let axiom = privgraph::validator::Axiom::SubClassOf(iri(sub)?, iri(sup)?);
    Ok(sub == sup || report.inferred.contains(&axiom))
}

#[pymodule]
#[pyo3(name = "privgraph")]
fn privgraph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHub>()?;
    m.add("HubFailure", m.py().get_type::<HubFailure>())?;
    m.add_function(wrap_pyfunction!(turtle_to_nquads, m)?)?;
    m.add_function(wrap_pyfunction!(lint_builtin_vocabulary, m)?)?;
    m.add_function(wrap_pyfunction!(is_subclass, m)?)?;

    let fx = PyDict::new(m.py());
    for (name, value) in [
        ("admin", fixtures::ADMIN),
        ("experimenter", fixtures::EXPERIMENTER),
        ("consenting_party", fixtures::CONSENTING_PARTY),
        ("sensor", fixtures::SENSOR),
        ("resources_ttl", fixtures::RESOURCES_TTL),
        ("observation_ttl", fixtures::OBSERVATION_TTL),
        ("consent_ttl", fixtures::CONSENT_TTL),
        ("permissions_ttl", fixtures::PERMISSIONS_TTL),
        ("bbox_query", fixtures::BBOX_QUERY),
    ] {
        fx.set_item(name, value)?;
    }
    m.add("fixtures", fx)?;
    Ok(())
}
