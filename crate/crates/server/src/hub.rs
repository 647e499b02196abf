//! The modules wired together; the HTTP routes and the CLI both call this.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, Utc};
use privgraph::consent::{
    ConsentEngine, ConsentError, ConsentRequest, AccessOutcome, PermissionRecord, PolicyRule, PolicySpec, Purpose,
    RequestStatus,
};
use privgraph::query::{augment, execute_as, parse_query, AugmentationMode, QueryError, ResultSet};
use privgraph::rdf::{parse_turtle, GraphId, Iri, TurtleError};
use privgraph::store::{AccessContext, Role, Store, StoreError, WriteReport};
use privgraph::validator::{lint_instances_with_cap, lint_vocabulary, Finding};
use privgraph::vocab::{vocabulary_to_turtle, Vocabulary};
use thiserror::Error;

use crate::clock::Clock;
use crate::config::Config;

#[derive(Debug, Error)]
pub enum HubError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Consent(#[from] ConsentError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Turtle(#[from] TurtleError),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Where an ingested Turtle document goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestTarget {
    Resource,
    Observation,
    Consent,
    Permissions,
}

impl IngestTarget {
    pub fn graph(self) -> GraphId {
        match self {
            Self::Resource => GraphId::ResourceGraph,
            Self::Observation => GraphId::ObservationGraph,
            Self::Consent => GraphId::ConsentGraph,
            Self::Permissions => GraphId::UserPermissionsGraph,
        }
    }
}

impl FromStr for IngestTarget {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "resource" => Ok(Self::Resource),
            "observation" => Ok(Self::Observation),
            "consent" => Ok(Self::Consent),
            "permissions" => Ok(Self::Permissions),
            other => Err(format!("unknown graph {other:?} (resource, observation, consent, permissions)")),
        }
    }
}

/// Parameters of a passive-consent policy, as received from callers.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct PolicyRequest {
    pub action: String,
    pub purpose: String,
    pub targets: Vec<String>,
    pub expires_in_secs: i64,
    #[serde(default)]
    pub future_parties: bool,
}

pub struct Hub {
    engine: ConsentEngine,
    config: Config,
    clock: Arc<dyn Clock>,
    persist_lock: Mutex<()>,
}

impl std::fmt::Debug for Hub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hub").field("config", &self.config).finish()
    }
}

pub fn parse_iri(s: &str) -> Result<Iri, HubError> {
    privgraph::consent::expand_iri(s.trim()).map_err(|e| HubError::BadRequest(e.to_string()))
}

/// Engine state lives next to the snapshot.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".consent.json");
    PathBuf::from(name)
}

impl Hub {
    /// Builds the store, restores persisted state and registers the
    /// configured controller if the store has none.
    pub fn open(config: Config, clock: Arc<dyn Clock>) -> Result<Self, HubError> {
        let store = Arc::new(Store::new(Arc::new(Vocabulary::builtin()), config.store_config()));
        let engine = ConsentEngine::new(store.clone());
        if let Some(path) = &config.data_path {
            if path.exists() {
                store.restore_from(path)?;
            }
            let sidecar = sidecar_path(path);
            if sidecar.exists() {
                engine.load_state(&sidecar)?;
            }
        }
        if let Some(controller) = &config.controller {
            match &store.snapshot().controller {
                None => engine.register_controller(controller)?,
                Some(existing) if existing == controller => {}
                Some(_) => return Err(ConsentError::DuplicateController.into()),
            }
        }
        Ok(Self {
            engine,
            config,
            clock,
            persist_lock: Mutex::new(()),
        })
    }

    pub fn engine(&self) -> &ConsentEngine {
        &self.engine
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Writes the snapshot and engine state, if a data path is configured.
    pub fn persist(&self) -> Result<(), HubError> {
        let Some(path) = &self.config.data_path else { return Ok(()) };
        let _guard = self.persist_lock.lock().unwrap();
        self.engine.store().snapshot_to(path)?;
        self.engine.save_state(&sidecar_path(path))?;
        Ok(())
    }

    pub fn context(&self, user: Option<&Iri>) -> AccessContext {
        match user {
            Some(u) => self.engine.store().context_for(u),
            None => AccessContext::anonymous(),
        }
    }

    fn require_user<'a>(&self, user: Option<&'a Iri>) -> Result<&'a Iri, HubError> {
        user.ok_or_else(|| HubError::Forbidden("an identity is required".into()))
    }

    fn require_controller(&self, user: Option<&Iri>) -> Result<(), HubError> {
        let user = self.require_user(user)?;
        if self.engine.store().roles_of(user).has(Role::Controller) {
            Ok(())
        } else {
            Err(HubError::Forbidden(format!("{user} is not the controller")))
        }
    }

    pub fn ingest(&self, user: Option<&Iri>, target: IngestTarget, turtle: &str) -> Result<WriteReport, HubError> {
        let ctx = self.context(user);
        let quads = parse_turtle(turtle, None, target.graph())?;
        let store = self.engine.store();
        let report = match target {
            IngestTarget::Resource => store.insert_resource(&ctx, quads)?,
            IngestTarget::Observation => store.insert_observation(&ctx, quads)?,
            IngestTarget::Consent | IngestTarget::Permissions => store.insert_privacy(&ctx, quads)?,
        };
        Ok(report)
    }

    pub fn query(&self, user: Option<&Iri>, text: &str, mode: Option<AugmentationMode>) -> Result<ResultSet, HubError> {
        let q = parse_query(text)?;
        let mode = mode.unwrap_or(self.config.augmentation_mode);
        Ok(execute_as(&self.context(user), &q, &self.engine, self.now(), mode)?)
    }

    /// The rewritten query an allowed party's query runs as.
    pub fn augmented_query(&self, user: Option<&Iri>, text: &str) -> Result<String, HubError> {
        let user = self.require_user(user)?;
        let q = parse_query(text)?;
        let interest = self
            .engine
            .interest_of(user)
            .ok_or_else(|| QueryError::NoRegisteredInterest(user.clone()))?;
        let augmented = augment(&q, user, Some(&interest), self.engine.store().vocabulary(), self.now())?;
        Ok(augmented.render())
    }

    pub fn register_party(&self, caller: Option<&Iri>, party: &Iri, roles: &[Role]) -> Result<(), HubError> {
        self.require_controller(caller)?;
        Ok(self.engine.register_party(party, roles)?)
    }

    /// The controller may record ownership for anyone; a consenting party
    /// only for itself.
    pub fn declare_ownership(&self, caller: Option<&Iri>, owner: &Iri, subjects: &BTreeSet<Iri>) -> Result<usize, HubError> {
        let caller = self.require_user(caller)?;
        if caller != owner {
            self.require_controller(Some(caller))?;
        }
        Ok(self.engine.declare_ownership(owner, subjects)?.len())
    }

    pub fn register_interest(&self, caller: Option<&Iri>, action: &str, purpose: &str) -> Result<(), HubError> {
        let user = self.require_user(caller)?;
        let action = parse_iri(action)?;
        Ok(self.engine.register_interest(user, &action, &Purpose::parse(purpose), self.now())?)
    }

    pub fn request_access(
        &self,
        caller: Option<&Iri>,
        action: &str,
        purpose: &str,
        targets: &[String],
    ) -> Result<AccessOutcome, HubError> {
        let user = self.require_user(caller)?;
        let action = parse_iri(action)?;
        let targets = targets.iter().map(|t| parse_iri(t)).collect::<Result<BTreeSet<_>, _>>()?;
        Ok(self
            .engine
            .request_access(user, &action, &Purpose::parse(purpose), &targets, self.now())?)
    }

    /// Requests the caller decides on, or all requests for the controller,
    /// optionally narrowed to one status.
    pub fn consent_requests(&self, caller: Option<&Iri>, status: Option<RequestStatus>) -> Result<Vec<ConsentRequest>, HubError> {
        let user = self.require_user(caller)?;
        let now = self.now();
        if status == Some(RequestStatus::Pending) {
            return Ok(self.engine.list_pending(user, now));
        }
        // listing pending first settles overdue requests
        self.engine.list_pending(user, now);
        let is_controller = self.engine.store().roles_of(user).has(Role::Controller);
        Ok(self
            .engine
            .requests()
            .into_iter()
            .filter(|r| is_controller || &r.owner == user)
            .filter(|r| status.is_none_or(|s| r.status == s))
            .collect())
    }

    pub fn grant(&self, caller: Option<&Iri>, request: &str, expires_at: DateTime<Utc>) -> Result<PermissionRecord, HubError> {
        let user = self.require_user(caller)?;
        Ok(self.engine.grant(user, request, expires_at, self.now())?)
    }

    pub fn deny(&self, caller: Option<&Iri>, request: &str) -> Result<ConsentRequest, HubError> {
        let user = self.require_user(caller)?;
        Ok(self.engine.deny(user, request, self.now())?)
    }

    pub fn revoke(&self, caller: Option<&Iri>, permission: &str) -> Result<(), HubError> {
        let user = self.require_user(caller)?;
        Ok(self.engine.revoke(user, &parse_iri(permission)?)?)
    }

    pub fn permissions(&self, caller: Option<&Iri>) -> Result<Vec<PermissionRecord>, HubError> {
        let user = self.require_user(caller)?;
        Ok(self.engine.effective_permissions(user, self.now())?)
    }

    pub fn set_policy(&self, caller: Option<&Iri>, req: &PolicyRequest) -> Result<PolicyRule, HubError> {
        let owner = self.require_user(caller)?;
        let spec = PolicySpec {
            match_action: parse_iri(&req.action)?,
            match_purpose: Purpose::parse(&req.purpose),
            target_scope: req.targets.iter().map(|t| parse_iri(t)).collect::<Result<_, _>>()?,
            expiry_duration: Duration::seconds(req.expires_in_secs),
            applies_to_future_parties: req.future_parties,
        };
        Ok(self.engine.set_policy(owner, spec, self.now())?)
    }

    /// Vocabulary findings followed by findings on the stored data.
    pub fn lint(&self) -> Vec<Finding> {
        let store = self.engine.store();
        let mut findings = lint_vocabulary(store.vocabulary());
        findings.extend(lint_instances_with_cap(
            &store.snapshot().dataset,
            store.vocabulary(),
            self.config.metadata_cap,
        ));
        findings
    }

    pub fn vocabulary_turtle(&self) -> String {
        vocabulary_to_turtle(self.engine.store().vocabulary())
    }

    pub fn snapshot_to(&self, path: &Path) -> Result<(), HubError> {
        Ok(self.engine.store().snapshot_to(path)?)
    }

    pub fn restore_from(&self, path: &Path) -> Result<(), HubError> {
        Ok(self.engine.store().restore_from(path)?)
    }
}

pub fn finding_json(f: &Finding) -> serde_json::Value {
    serde_json::json!({
        "severity": format!("{:?}", f.severity),
        "code": format!("{:?}", f.code),
        "subject": f.subject.to_ntriples(),
        "message": f.message,
    })
}
