//! Consent lifecycle: registration, ownership, passive policies, active
//! requests and time-bounded permissions.
//!
//! Granted permissions live in the privacy graphs as quads. Requests,
//! policies, interests and notifications are engine-side state and never
//! reach the store.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use parking_lot::Mutex;
use regex::RegexBuilder;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use uuid::Uuid;

use crate::ns::{con, dul, gdprtext, priv_, rdf, rdfs, sosa, xsd};
use crate::rdf::{parse_date_time, GraphId, Iri, Literal, PrefixMap, Quad, Term};
use crate::store::{Change, Role, Store, StoreError, StoreState, VocabularyMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsentError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("a controller is already registered")]
    DuplicateController,
    #[error("{0} cannot be registered as a party role")]
    InvalidRole(Role),
    #[error("{0} is not a registered party")]
    UnknownParty(Iri),
    #[error("{0} is not a registered allowed party")]
    UnknownRequester(Iri),
    #[error("{0} is not a registered resource or property")]
    UnknownTarget(Iri),
    #[error("{0} is not a registered resource, property or observation")]
    UnknownSubject(Iri),
    #[error("{subject} is already owned by {owner}")]
    CardinalityViolation { subject: Iri, owner: Iri },
    #[error("nobody can answer for {0}: it has no owner and no controller is registered")]
    NoOwner(Iri),
    #[error("{0} is not the owner")]
    NotOwner(Iri),
    #[error("request {0} is not pending")]
    NotPending(String),
    #[error("expiry {0} is not in the future")]
    ExpiryInPast(DateTime<Utc>),
    #[error("unknown permission {0}")]
    UnknownPermission(Iri),
    #[error("{0} is not an action")]
    InvalidAction(Iri),
    #[error("{0} is not a purpose")]
    InvalidPurpose(Iri),
    #[error("{0} has no registered interest")]
    NoRegisteredInterest(Iri),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// A purpose: a class IRI or free text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Purpose {
    Iri(Iri),
    Text(String),
}

impl Purpose {
    /// Reads an IRI (absolute or with a built-in prefix) or falls back to text.
    pub fn parse(s: &str) -> Self {
        match expand_iri(s) {
            Ok(iri) if !s.contains(char::is_whitespace) => Purpose::Iri(iri),
            _ => Purpose::Text(s.to_string()),
        }
    }
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Purpose::Iri(i) => f.write_str(i.as_str()),
            Purpose::Text(t) => f.write_str(t),
        }
    }
}

impl Serialize for Purpose {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Purpose {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(|s| Purpose::parse(&s))
    }
}

/// Expands `prefix:local` with a built-in prefix, or accepts an absolute IRI.
pub fn expand_iri(s: &str) -> Result<Iri, crate::rdf::TermError> {
    let builtin = PrefixMap::builtin();
    if let Some((prefix, _)) = s.split_once(':') {
        if builtin.get(prefix).is_some() && !s.contains("://") {
            if let Ok(iri) = builtin.resolve(s) {
                return Ok(iri);
            }
        }
    }
    let trimmed = s.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(s);
    Iri::new(trimmed)
}

/// A granted permission, as recorded in the user-permissions graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionRecord {
    pub id: Iri,
    pub allowed_parties: BTreeSet<Iri>,
    pub data_targets: BTreeSet<Iri>,
    pub action: Iri,
    pub purpose: Purpose,
    pub expires_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentRecord {
    pub id: Iri,
    pub consenting_party: Iri,
    pub permission: Iri,
}

/// A passive-consent rule: matching requests are granted without asking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRule {
    pub id: String,
    pub owner: Iri,
    pub match_action: Iri,
    /// IRI purposes match by subclass; text purposes match case-insensitively,
    /// with `*` as a wildcard.
    pub match_purpose: Purpose,
    pub target_scope: BTreeSet<Iri>,
    #[serde(with = "duration_secs")]
    pub expiry_duration: Duration,
    pub applies_to_future_parties: bool,
    pub created_at: DateTime<Utc>,
    /// Allowed parties registered when the rule was created.
    pub parties_at_creation: BTreeSet<Iri>,
}

mod duration_secs {
    use chrono::Duration;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(d.num_seconds())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        i64::deserialize(d).map(Duration::seconds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestStatus {
    Pending,
    Granted,
    Denied,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentRequest {
    pub id: String,
    pub requester: Iri,
    /// The party asked to decide.
    pub owner: Iri,
    pub requested_action: Iri,
    pub requested_purpose: Purpose,
    pub requested_targets: BTreeSet<Iri>,
    pub status: RequestStatus,
    pub created_at: DateTime<Utc>,
    pub respond_by: DateTime<Utc>,
    pub permission: Option<Iri>,
}

/// The action and purpose a user declared; queries are enforced against it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interest {
    pub action: Iri,
    pub purpose: Purpose,
    pub registered_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub recipient: Iri,
    pub request_id: String,
    pub created_at: DateTime<Utc>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessOutcome {
    pub granted: Vec<PermissionRecord>,
    pub pending: Vec<ConsentRequest>,
}

/// Engine-side state that is deliberately kept out of the quad store.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineState {
    pub policies: Vec<PolicyRule>,
    pub requests: Vec<ConsentRequest>,
    pub interests: BTreeMap<Iri, Interest>,
    pub notifications: Vec<Notification>,
}

/// New policy parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub match_action: Iri,
    pub match_purpose: Purpose,
    pub target_scope: BTreeSet<Iri>,
    #[serde(with = "duration_secs")]
    pub expiry_duration: Duration,
    pub applies_to_future_parties: bool,
}

pub struct ConsentEngine {
    store: Arc<Store>,
    state: Mutex<EngineState>,
    response_window: Duration,
}

impl fmt::Debug for ConsentEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConsentEngine").field("store", &self.store).finish()
    }
}

fn mint(kind: &str) -> Iri {
    Iri::new(format!("urn:privgraph:{kind}:{}", Uuid::new_v4())).expect("minted IRI")
}

fn iri(s: &'static str) -> Iri {
    Iri::from_static(s)
}

fn q(graph: GraphId, s: &Iri, p: &'static str, o: Term) -> Quad {
    Quad {
        graph,
        subject: Term::Iri(s.clone()),
        predicate: iri(p),
        object: o,
    }
}

/// Privacy-graph quads for a permission and the consent backing it.
pub fn compile(permission: &PermissionRecord, consent: &ConsentRecord) -> Vec<Quad> {
    let up = GraphId::UserPermissionsGraph;
    let cg = GraphId::ConsentGraph;
    let perm = &permission.id;
    let action = Iri::new(format!("{}#action", perm.as_str())).expect("action node");
    let purpose = Iri::new(format!("{}#purpose", perm.as_str())).expect("purpose node");
    let mut out = vec![q(up, perm, rdf::TYPE, Term::Iri(iri(con::PERMISSION)))];
    for party in &permission.allowed_parties {
        out.push(q(up, party, priv_::HAS_PERMISSION, Term::Iri(perm.clone())));
    }
    for t in &permission.data_targets {
        out.push(q(up, perm, con::PERMISSION_GIVEN_FOR_DATA, Term::Iri(t.clone())));
    }
    out.push(q(up, perm, con::PERMISSION_GIVEN_FOR_ACTIVITY, Term::Iri(action.clone())));
    out.push(q(up, &action, rdf::TYPE, Term::Iri(permission.action.clone())));
    out.push(q(up, &action, con::ACTIVITY_HAS_PURPOSE, Term::Iri(purpose.clone())));
    match &permission.purpose {
        Purpose::Iri(class) => out.push(q(up, &purpose, rdf::TYPE, Term::Iri(class.clone()))),
        Purpose::Text(text) => {
            out.push(q(up, &purpose, rdf::TYPE, Term::Iri(iri(con::PURPOSE))));
            out.push(q(up, &purpose, rdfs::LABEL, Term::Literal(Literal::string(text))));
        }
    }
    if let Some(expiry) = permission.expires_at {
        out.push(q(up, perm, dul::HAS_DATA_VALUE, Term::Literal(Literal::date_time(expiry))));
    }
    out.push(q(cg, &consent.consenting_party, con::GIVES_CONSENT, Term::Iri(consent.id.clone())));
    out.push(q(cg, &consent.id, rdf::TYPE, Term::Iri(iri(con::CONSENT))));
    out.push(q(cg, &consent.id, priv_::CONSENT_FOR_PERMISSION, Term::Iri(perm.clone())));
    out
}

fn iri_objects(state: &StoreState, g: GraphId, s: &Term, p: &'static str) -> Vec<Iri> {
    state
        .dataset
        .objects(g, s, &iri(p))
        .into_iter()
        .filter_map(|t| t.as_iri().cloned())
        .collect()
}

/// Reads every permission back from the user-permissions graph.
pub fn decompile_permissions(state: &StoreState) -> Vec<PermissionRecord> {
    let up = GraphId::UserPermissionsGraph;
    let vocab_free_action = |types: Vec<Iri>| -> Option<Iri> {
        let mut types = types;
        types.sort();
        types.iter().find(|t| *t != con::ACTION).or(types.first()).cloned()
    };
    let mut ids: BTreeSet<Term> = state
        .dataset
        .subjects(up, &iri(rdf::TYPE), &Term::Iri(iri(con::PERMISSION)))
        .into_iter()
        .collect();
    state
        .dataset
        .match_in(up, None, Some(&iri(con::PERMISSION_GIVEN_FOR_DATA)), None, &mut |s, _, _| {
            ids.insert(s.clone());
        });
    let mut out = Vec::new();
    for id in ids {
        let Term::Iri(perm) = &id else { continue };
        let allowed_parties = state
            .dataset
            .subjects(up, &iri(priv_::HAS_PERMISSION), &id)
            .into_iter()
            .filter_map(|t| t.as_iri().cloned())
            .collect();
        let data_targets = iri_objects(state, up, &id, con::PERMISSION_GIVEN_FOR_DATA).into_iter().collect();
        let Some(action_node) = state
            .dataset
            .objects(up, &id, &iri(con::PERMISSION_GIVEN_FOR_ACTIVITY))
            .into_iter()
            .min()
        else {
            continue;
        };
        let Some(action) = vocab_free_action(iri_objects(state, up, &action_node, rdf::TYPE)) else {
            continue;
        };
        let purpose = state
            .dataset
            .objects(up, &action_node, &iri(con::ACTIVITY_HAS_PURPOSE))
            .into_iter()
            .min()
            .and_then(|node| {
                let mut types = iri_objects(state, up, &node, rdf::TYPE);
                types.sort();
                if let Some(t) = types.iter().find(|t| *t != con::PURPOSE) {
                    return Some(Purpose::Iri(t.clone()));
                }
                let label = state
                    .dataset
                    .objects(up, &node, &iri(rdfs::LABEL))
                    .into_iter()
                    .filter_map(|l| l.as_literal().map(|l| l.lexical().to_string()))
                    .min();
                match label {
                    Some(text) => Some(Purpose::Text(text)),
                    None => types.first().cloned().map(Purpose::Iri),
                }
            });
        let Some(purpose) = purpose else { continue };
        let expires_at = state
            .dataset
            .objects(up, &id, &iri(dul::HAS_DATA_VALUE))
            .into_iter()
            .filter_map(|t| {
                let lit = t.as_literal()?;
                (lit.datatype() == &xsd::DATE_TIME)
                    .then(|| parse_date_time(lit.lexical()))
                    .flatten()
                    .map(|d| d.with_timezone(&Utc))
            })
            .min();
        out.push(PermissionRecord {
            id: perm.clone(),
            allowed_parties,
            data_targets,
            action,
            purpose,
            expires_at,
        });
    }
    out
}

/// Reads every consent back from the consent graph.
pub fn decompile_consents(state: &StoreState) -> Vec<ConsentRecord> {
    let cg = GraphId::ConsentGraph;
    let mut out = Vec::new();
    state
        .dataset
        .match_in(cg, None, Some(&iri(priv_::CONSENT_FOR_PERMISSION)), None, &mut |s, _, o| {
            let (Term::Iri(consent), Term::Iri(perm)) = (s, o) else { return };
            for party in state.dataset.subjects(cg, &iri(con::GIVES_CONSENT), s) {
                if let Term::Iri(party) = party {
                    out.push(ConsentRecord {
                        id: consent.clone(),
                        consenting_party: party,
                        permission: perm.clone(),
                    });
                }
            }
        });
    out.sort_by(|a, b| a.id.cmp(&b.id).then(a.consenting_party.cmp(&b.consenting_party)));
    out
}

/// Every quad that belongs to `permission` and its consents. Action and
/// purpose nodes shared with another permission are kept.
fn permission_quads(state: &StoreState, permission: &Iri) -> Vec<Quad> {
    let up = GraphId::UserPermissionsGraph;
    let cg = GraphId::ConsentGraph;
    let perm = Term::Iri(permission.clone());
    let mut out = state.dataset.quads_for_pattern(Some(up), Some(&perm), None, None);
    out.extend(state.dataset.quads_for_pattern(Some(up), None, None, Some(&perm)));
    let activity = iri(con::PERMISSION_GIVEN_FOR_ACTIVITY);
    for action in state.dataset.objects(up, &perm, &activity) {
        if state.dataset.subjects(up, &activity, &action).len() > 1 {
            continue;
        }
        out.extend(state.dataset.quads_for_pattern(Some(up), Some(&action), None, None));
        let has_purpose = iri(con::ACTIVITY_HAS_PURPOSE);
        for purpose in state.dataset.objects(up, &action, &has_purpose) {
            if state.dataset.subjects(up, &has_purpose, &purpose).len() > 1 {
                continue;
            }
            out.extend(state.dataset.quads_for_pattern(Some(up), Some(&purpose), None, None));
        }
    }
    for consent in state.dataset.subjects(cg, &iri(priv_::CONSENT_FOR_PERMISSION), &perm) {
        out.extend(state.dataset.quads_for_pattern(Some(cg), Some(&consent), None, None));
        out.extend(state.dataset.quads_for_pattern(Some(cg), None, None, Some(&consent)));
    }
    out.sort();
    out.dedup();
    out
}

fn glob_matches(pattern: &str, text: &str) -> bool {
    let re = format!(
        "^{}$",
        pattern.split('*').map(regex::escape).collect::<Vec<_>>().join(".*")
    );
    RegexBuilder::new(&re)
        .case_insensitive(true)
        .build()
        .is_ok_and(|r| r.is_match(text))
}

impl ConsentEngine {
    pub fn new(store: Arc<Store>) -> Self {
        Self {
            store,
            state: Mutex::new(EngineState::default()),
            response_window: Duration::days(7),
        }
    }

    pub fn with_state(store: Arc<Store>, state: EngineState) -> Self {
        let engine = Self::new(store);
        *engine.state.lock() = state;
        engine
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn engine_state(&self) -> EngineState {
        self.state.lock().clone()
    }

    pub fn save_state(&self, path: &Path) -> Result<(), ConsentError> {
        let json = serde_json::to_string_pretty(&*self.state.lock()).map_err(|e| ConsentError::Io(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| ConsentError::Io(e.to_string()))
    }

    pub fn load_state(&self, path: &Path) -> Result<(), ConsentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConsentError::Io(e.to_string()))?;
        let state: EngineState = serde_json::from_str(&text).map_err(|e| ConsentError::Io(e.to_string()))?;
        *self.state.lock() = state;
        Ok(())
    }

    pub fn register_controller(&self, controller: &Iri) -> Result<(), ConsentError> {
        self.store
            .commit_with(|state| {
                if state.controller.is_some() {
                    return Err(ConsentError::DuplicateController);
                }
                let change = Change {
                    insert: vec![q(
                        GraphId::ConsentGraph,
                        controller,
                        rdf::TYPE,
                        Term::Iri(iri(gdprtext::CONTROLLER)),
                    )],
                    delete: Vec::new(),
                };
                Ok((change, ()))
            })
            .map(|_| ())
    }

    /// Registers `party` as consenting and/or allowed party.
    pub fn register_party(&self, party: &Iri, roles: &[Role]) -> Result<(), ConsentError> {
        let mut insert = Vec::new();
        for role in roles {
            match role {
                Role::ConsentingParty => insert.push(q(
                    GraphId::ConsentGraph,
                    party,
                    rdf::TYPE,
                    Term::Iri(iri(con::CONSENTING_PARTY)),
                )),
                Role::AllowedParty => insert.push(q(
                    GraphId::UserPermissionsGraph,
                    party,
                    rdf::TYPE,
                    Term::Iri(iri(con::ALLOWED_PARTY)),
                )),
                other => return Err(ConsentError::InvalidRole(*other)),
            }
        }
        self.store
            .commit_with(|_| Ok::<_, ConsentError>((Change { insert, delete: Vec::new() }, ())))
            .map(|_| ())
    }

    /// Records `owner` as the single owner of each subject.
    pub fn declare_ownership(&self, owner: &Iri, subjects: &BTreeSet<Iri>) -> Result<Vec<Quad>, ConsentError> {
        self.store
            .commit_with(|state| {
                if !state.consenting_parties.contains(owner) {
                    return Err(ConsentError::UnknownParty(owner.clone()));
                }
                let mut insert = Vec::new();
                for s in subjects {
                    let term = Term::Iri(s.clone());
                    let known = state.is_permission_target(s) || state.observations.contains(&term);
                    if !known {
                        return Err(ConsentError::UnknownSubject(s.clone()));
                    }
                    match state.owner_of(&term) {
                        Some(existing) if existing == owner => continue,
                        Some(existing) => {
                            return Err(ConsentError::CardinalityViolation {
                                subject: s.clone(),
                                owner: existing.clone(),
                            })
                        }
                        None => insert.push(q(GraphId::ConsentGraph, owner, priv_::OWNS, term)),
                    }
                }
                let mut written = insert.clone();
                for quad in &insert {
                    if let Term::Iri(s) = &quad.object {
                        written.push(q(GraphId::ConsentGraph, s, priv_::OWNED_BY, quad.subject.clone()));
                    }
                }
                Ok((Change { insert, delete: Vec::new() }, written))
            })
            .map(|(_, quads)| quads)
    }

    /// Remembers what `user` intends to do; consulted when enforcing queries.
    pub fn register_interest(&self, user: &Iri, action: &Iri, purpose: &Purpose, now: DateTime<Utc>) -> Result<(), ConsentError> {
        self.check_action_purpose(action, purpose)?;
        self.state.lock().interests.insert(
            user.clone(),
            Interest {
                action: action.clone(),
                purpose: purpose.clone(),
                registered_at: now,
            },
        );
        Ok(())
    }

    pub fn interest_of(&self, user: &Iri) -> Option<Interest> {
        self.state.lock().interests.get(user).cloned()
    }

    fn check_action_purpose(&self, action: &Iri, purpose: &Purpose) -> Result<(), ConsentError> {
        let vocab = self.store.vocabulary();
        let strict = self.store.config().vocabulary_mode == VocabularyMode::Strict;
        let check = |class: &Iri, root: &str, invalid: fn(Iri) -> ConsentError| {
            if vocab.concept(class.as_str()).is_some() {
                if vocab.is_subclass(class.as_str(), root) {
                    Ok(())
                } else {
                    Err(invalid(class.clone()))
                }
            } else if strict {
                Err(ConsentError::Store(StoreError::UnknownVocabularyTerm(class.clone())))
            } else {
                Ok(())
            }
        };
        check(action, con::ACTION, ConsentError::InvalidAction)?;
        if let Purpose::Iri(p) = purpose {
            check(p, con::PURPOSE, ConsentError::InvalidPurpose)?;
        }
        Ok(())
    }

    pub fn set_policy(&self, owner: &Iri, spec: PolicySpec, now: DateTime<Utc>) -> Result<PolicyRule, ConsentError> {
        let state = self.store.snapshot();
        if !state.consenting_parties.contains(owner) {
            return Err(ConsentError::UnknownParty(owner.clone()));
        }
        self.check_action_purpose(&spec.match_action, &spec.match_purpose)?;
        if spec.expiry_duration <= Duration::zero() {
            return Err(ConsentError::InvalidPolicy("expiry duration must be positive".into()));
        }
        for t in &spec.target_scope {
            if self.owner_for(&state, t)? != *owner {
                return Err(ConsentError::NotOwner(owner.clone()));
            }
        }
        let rule = PolicyRule {
            id: Uuid::new_v4().to_string(),
            owner: owner.clone(),
            match_action: spec.match_action,
            match_purpose: spec.match_purpose,
            target_scope: spec.target_scope,
            expiry_duration: spec.expiry_duration,
            applies_to_future_parties: spec.applies_to_future_parties,
            created_at: now,
            parties_at_creation: state.allowed_parties.clone(),
        };
        self.state.lock().policies.push(rule.clone());
        Ok(rule)
    }

    pub fn policies(&self) -> Vec<PolicyRule> {
        self.state.lock().policies.clone()
    }

    /// Who decides about `target`: its owner; for an unowned property, the
    /// single owner of the resources observing or acting on it; otherwise
    /// the controller.
    fn owner_for(&self, state: &StoreState, target: &Iri) -> Result<Iri, ConsentError> {
        if !state.is_permission_target(target) {
            return Err(ConsentError::UnknownTarget(target.clone()));
        }
        let term = Term::Iri(target.clone());
        if let Some(owner) = state.owner_of(&term) {
            return Ok(owner.clone());
        }
        if state.registered_observable_properties.contains(target) {
            let mut owners = BTreeSet::new();
            for p in [sosa::OBSERVES, sosa::ACTS_ON_PROPERTY] {
                for r in state.dataset.subjects(GraphId::ResourceGraph, &iri(p), &term) {
                    if let Some(o) = state.owner_of(&r) {
                        owners.insert(o.clone());
                    }
                }
            }
            if owners.len() == 1 {
                return Ok(owners.into_iter().next().expect("one owner"));
            }
        }
        state.controller.clone().ok_or_else(|| ConsentError::NoOwner(target.clone()))
    }

    fn policy_matches(&self, rule: &PolicyRule, requester: &Iri, action: &Iri, purpose: &Purpose) -> bool {
        let vocab = self.store.vocabulary();
        let purpose_ok = match (&rule.match_purpose, purpose) {
            (Purpose::Iri(want), Purpose::Iri(got)) => vocab.is_subclass(got.as_str(), want.as_str()),
            (Purpose::Text(pattern), Purpose::Text(got)) => glob_matches(pattern, got),
            _ => false,
        };
        purpose_ok
            && vocab.is_subclass(action.as_str(), rule.match_action.as_str())
            && (rule.applies_to_future_parties || rule.parties_at_creation.contains(requester))
    }

    /// Asks for access. Targets covered by a matching policy are granted at
    /// once; the rest become pending requests, one per owner.
    pub fn request_access(
        &self,
        requester: &Iri,
        action: &Iri,
        purpose: &Purpose,
        targets: &BTreeSet<Iri>,
        now: DateTime<Utc>,
    ) -> Result<AccessOutcome, ConsentError> {
        self.check_action_purpose(action, purpose)?;
        let mut engine = self.state.lock();
        let (_, outcome) = self.store.commit_with(|state| {
            if !state.allowed_parties.contains(requester) {
                return Err(ConsentError::UnknownRequester(requester.clone()));
            }
            let mut by_owner: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
            for t in targets {
                by_owner.entry(self.owner_for(state, t)?).or_default().insert(t.clone());
            }
            let mut insert = Vec::new();
            let mut outcome = AccessOutcome::default();
            for (owner, owned) in by_owner {
                let mut remaining = owned.clone();
                for rule in engine.policies.iter().filter(|r| r.owner == owner) {
                    if !self.policy_matches(rule, requester, action, purpose) {
                        continue;
                    }
                    let covered: BTreeSet<Iri> = remaining.intersection(&rule.target_scope).cloned().collect();
                    if covered.is_empty() {
                        continue;
                    }
                    remaining.retain(|t| !covered.contains(t));
                    let (perm, quads) = self.mint_permission(
                        &owner,
                        requester,
                        covered,
                        action,
                        purpose,
                        Some(now + rule.expiry_duration),
                    );
                    insert.extend(quads);
                    outcome.granted.push(perm);
                }
                if !remaining.is_empty() {
                    outcome.pending.push(ConsentRequest {
                        id: Uuid::new_v4().to_string(),
                        requester: requester.clone(),
                        owner,
                        requested_action: action.clone(),
                        requested_purpose: purpose.clone(),
                        requested_targets: remaining,
                        status: RequestStatus::Pending,
                        created_at: now,
                        respond_by: now + self.response_window,
                        permission: None,
                    });
                }
            }
            Ok((Change { insert, delete: Vec::new() }, outcome))
        })?;
        engine.interests.insert(
            requester.clone(),
            Interest {
                action: action.clone(),
                purpose: purpose.clone(),
                registered_at: now,
            },
        );
        for req in &outcome.pending {
            engine.notifications.push(Notification {
                recipient: req.owner.clone(),
                request_id: req.id.clone(),
                created_at: now,
                message: format!(
                    "{} asks for {} ({}) on {} target(s)",
                    req.requester,
                    req.requested_action,
                    req.requested_purpose,
                    req.requested_targets.len()
                ),
            });
            engine.requests.push(req.clone());
        }
        Ok(outcome)
    }

    fn mint_permission(
        &self,
        owner: &Iri,
        party: &Iri,
        targets: BTreeSet<Iri>,
        action: &Iri,
        purpose: &Purpose,
        expires_at: Option<DateTime<Utc>>,
    ) -> (PermissionRecord, Vec<Quad>) {
        let perm = PermissionRecord {
            id: mint("permission"),
            allowed_parties: BTreeSet::from([party.clone()]),
            data_targets: targets,
            action: action.clone(),
            purpose: purpose.clone(),
            expires_at,
        };
        let consent = ConsentRecord {
            id: mint("consent"),
            consenting_party: owner.clone(),
            permission: perm.id.clone(),
        };
        let quads = compile(&perm, &consent);
        (perm, quads)
    }

    fn expire_requests(state: &mut EngineState, now: DateTime<Utc>) {
        for r in &mut state.requests {
            if r.status == RequestStatus::Pending && now > r.respond_by {
                r.status = RequestStatus::Expired;
            }
        }
    }

    /// Requests waiting for `owner`. The controller sees every pending request.
    pub fn list_pending(&self, owner: &Iri, now: DateTime<Utc>) -> Vec<ConsentRequest> {
        let is_controller = self.store.snapshot().controller.as_ref() == Some(owner);
        let mut engine = self.state.lock();
        Self::expire_requests(&mut engine, now);
        engine
            .requests
            .iter()
            .filter(|r| r.status == RequestStatus::Pending && (is_controller || &r.owner == owner))
            .cloned()
            .collect()
    }

    pub fn requests(&self) -> Vec<ConsentRequest> {
        self.state.lock().requests.clone()
    }

    pub fn notifications_for(&self, recipient: &Iri) -> Vec<Notification> {
        self.state
            .lock()
            .notifications
            .iter()
            .filter(|n| &n.recipient == recipient)
            .cloned()
            .collect()
    }

    fn pending_index(engine: &mut EngineState, request_id: &str, now: DateTime<Utc>) -> Result<usize, ConsentError> {
        Self::expire_requests(engine, now);
        engine
            .requests
            .iter()
            .position(|r| r.id == request_id && r.status == RequestStatus::Pending)
            .ok_or_else(|| ConsentError::NotPending(request_id.to_string()))
    }

    pub fn grant(
        &self,
        owner: &Iri,
        request_id: &str,
        expiry: DateTime<Utc>,
        now: DateTime<Utc>,
    ) -> Result<PermissionRecord, ConsentError> {
        let mut engine = self.state.lock();
        let idx = Self::pending_index(&mut engine, request_id, now)?;
        let request = engine.requests[idx].clone();
        if &request.owner != owner {
            return Err(ConsentError::NotOwner(owner.clone()));
        }
        if expiry <= now {
            return Err(ConsentError::ExpiryInPast(expiry));
        }
        let (_, perm) = self.store.commit_with(|state| {
            // Ownership may have moved since the request was filed.
            for t in &request.requested_targets {
                if &self.owner_for(state, t)? != owner {
                    return Err(ConsentError::NotOwner(owner.clone()));
                }
            }
            let (perm, insert) = self.mint_permission(
                owner,
                &request.requester,
                request.requested_targets.clone(),
                &request.requested_action,
                &request.requested_purpose,
                Some(expiry),
            );
            Ok((Change { insert, delete: Vec::new() }, perm))
        })?;
        let r = &mut engine.requests[idx];
        r.status = RequestStatus::Granted;
        r.permission = Some(perm.id.clone());
        Ok(perm)
    }

    pub fn deny(&self, owner: &Iri, request_id: &str, now: DateTime<Utc>) -> Result<ConsentRequest, ConsentError> {
        let mut engine = self.state.lock();
        let idx = Self::pending_index(&mut engine, request_id, now)?;
        if &engine.requests[idx].owner != owner {
            return Err(ConsentError::NotOwner(owner.clone()));
        }
        engine.requests[idx].status = RequestStatus::Denied;
        Ok(engine.requests[idx].clone())
    }

    /// Withdraws a permission: its quads and its consents' quads go in one write.
    pub fn revoke(&self, caller: &Iri, permission: &Iri) -> Result<(), ConsentError> {
        self.store
            .commit_with(|state| {
                let exists = decompile_permissions(state).iter().any(|p| &p.id == permission);
                if !exists {
                    return Err(ConsentError::UnknownPermission(permission.clone()));
                }
                let is_party = decompile_consents(state)
                    .iter()
                    .any(|c| &c.permission == permission && &c.consenting_party == caller);
                if !is_party && state.controller.as_ref() != Some(caller) {
                    return Err(ConsentError::NotOwner(caller.clone()));
                }
                let delete = permission_quads(state, permission);
                Ok((Change { insert: Vec::new(), delete }, ()))
            })
            .map(|_| ())
    }

    /// Unexpired permissions held by `user`. Expired ones are purged.
    pub fn effective_permissions(&self, user: &Iri, now: DateTime<Utc>) -> Result<Vec<PermissionRecord>, ConsentError> {
        let (_, live) = self.store.commit_with(|state| {
            let mut live = Vec::new();
            let mut delete = Vec::new();
            for p in decompile_permissions(state) {
                match p.expires_at {
                    Some(at) if at <= now => delete.extend(permission_quads(state, &p.id)),
                    _ => {
                        if p.allowed_parties.contains(user) {
                            live.push(p)
                        }
                    }
                }
            }
            Ok::<_, ConsentError>((Change { insert: Vec::new(), delete }, live))
        })?;
        Ok(live)
    }

    pub fn permissions(&self) -> Vec<PermissionRecord> {
        decompile_permissions(&self.store.snapshot())
    }

    pub fn consents(&self) -> Vec<ConsentRecord> {
        decompile_consents(&self.store.snapshot())
    }
}
