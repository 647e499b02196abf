//! The five-graph quad store and its write discipline.
//!
//! Readers take an `Arc` snapshot; writers serialize on one mutex, build a
//! new state from the latest snapshot and swap it in only when every
//! invariant holds, so a rejected write leaves the state untouched.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ns::{con, gdprtext, iot_lite, owl, rdf, rdfs, sosa, ssn};
use crate::rdf::{parse_nquads, serialize_nquads, Dataset, GraphId, Iri, NQuadsError, Quad, Term};
use crate::vocab::{vocabulary_to_quads, Vocabulary};

/// Identity used for requests that carry no user.
pub const ANONYMOUS_USER: &str = "urn:privgraph:anonymous";

/// Predicates accepted in strict mode even though the schema does not define them.
const ANNOTATION_PREDICATES: [&str; 6] = [
    rdf::TYPE,
    rdfs::LABEL,
    rdfs::COMMENT,
    rdfs::SEE_ALSO,
    rdfs::IS_DEFINED_BY,
    owl::SAME_AS,
];

/// Links from an observation or actuation to the resource or property that
/// authorizes access to it.
pub const OBSERVATION_LINKS: [&str; 4] = [
    sosa::MADE_BY_SENSOR,
    sosa::MADE_BY_ACTUATOR,
    sosa::OBSERVED_PROPERTY_P,
    sosa::ACTS_ON_PROPERTY,
];

const PRODUCER_LINKS: [&str; 2] = [sosa::MADE_BY_SENSOR, sosa::MADE_BY_ACTUATOR];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Controller,
    ConsentingParty,
    AllowedParty,
    Anonymous,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Controller => "controller",
            Role::ConsentingParty => "consenting-party",
            Role::AllowedParty => "allowed-party",
            Role::Anonymous => "anonymous",
        };
        f.write_str(s)
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "controller" => Ok(Role::Controller),
            "consenting-party" | "owner" => Ok(Role::ConsentingParty),
            "allowed-party" | "user" => Ok(Role::AllowedParty),
            "anonymous" => Ok(Role::Anonymous),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Who is asking, and in which capacity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessContext {
    pub user: Iri,
    pub role: Role,
}

impl AccessContext {
    pub fn new(user: Iri, role: Role) -> Self {
        Self { user, role }
    }

    pub fn controller(user: &Iri) -> Self {
        Self::new(user.clone(), Role::Controller)
    }

    pub fn consenting_party(user: &Iri) -> Self {
        Self::new(user.clone(), Role::ConsentingParty)
    }

    pub fn allowed_party(user: &Iri) -> Self {
        Self::new(user.clone(), Role::AllowedParty)
    }

    pub fn anonymous() -> Self {
        Self::new(Iri::from_static(ANONYMOUS_USER), Role::Anonymous)
    }
}

/// Roles an IRI holds according to the privacy graphs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Roles {
    pub controller: bool,
    pub consenting_party: bool,
    pub allowed_party: bool,
}

impl Roles {
    pub fn has(&self, role: Role) -> bool {
        match role {
            Role::Controller => self.controller,
            Role::ConsentingParty => self.consenting_party,
            Role::AllowedParty => self.allowed_party,
            Role::Anonymous => true,
        }
    }

    /// The strongest role held.
    pub fn primary(&self) -> Role {
        if self.controller {
            Role::Controller
        } else if self.consenting_party {
            Role::ConsentingParty
        } else if self.allowed_party {
            Role::AllowedParty
        } else {
            Role::Anonymous
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabularyMode {
    #[default]
    Strict,
    Lenient,
}

impl FromStr for VocabularyMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Self::Strict),
            "lenient" => Ok(Self::Lenient),
            other => Err(format!("unknown vocabulary mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreConfig {
    pub vocabulary_mode: VocabularyMode,
    /// Maximum `iot-lite:hasMetadata` links per subject.
    pub metadata_cap: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            vocabulary_mode: VocabularyMode::Strict,
            metadata_cap: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("quad targets the {found} graph, expected {expected}")]
    WrongGraph { expected: String, found: GraphId },
    #[error("unauthorized: {0}")]
    Unauthorized(String),
    #[error("{subject} would have more than one value for {property}")]
    CardinalityViolation { subject: Term, property: Iri },
    #[error("{0} is not part of the vocabulary")]
    UnknownVocabularyTerm(Iri),
    #[error("{subject} carries {count} metadata records, the cap is {cap}")]
    MetadataAbuse { subject: Term, count: usize, cap: usize },
    #[error("the description contains no ssn:System or iot-lite:Service subject")]
    NoResourceSubject,
    #[error("observation {observation} has no registered producer{}", producer.as_ref().map(|p| format!(" ({p} is not registered)")).unwrap_or_default())]
    UnregisteredProducer { observation: Term, producer: Option<Term> },
    #[error("permission {permission} refers to {target}, which is not a registered resource or property")]
    DanglingReference { permission: Term, target: Term },
    #[error("a controller is already registered")]
    DuplicateController,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("snapshot: {0}")]
    Snapshot(#[from] NQuadsError),
    #[error("snapshot contains vocabulary-graph statements")]
    VocabularyInSnapshot,
}

/// Outcome of a successful write.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WriteReport {
    pub inserted: usize,
    pub removed: usize,
    /// Resources that became registered through this write.
    pub registered: Vec<Iri>,
    pub warnings: Vec<String>,
}

/// A dataset plus the registries derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreState {
    pub dataset: Dataset,
    pub registered_resources: BTreeSet<Iri>,
    pub registered_observable_properties: BTreeSet<Iri>,
    pub observations: BTreeSet<Term>,
    pub controller: Option<Iri>,
    pub consenting_parties: BTreeSet<Iri>,
    pub allowed_parties: BTreeSet<Iri>,
    /// subject -> owner, from `priv:ownedBy` in any graph.
    pub owners: BTreeMap<Term, Iri>,
}

fn type_iri() -> Iri {
    Iri::from_static(rdf::TYPE)
}

fn iri(s: &'static str) -> Iri {
    Iri::from_static(s)
}

impl StoreState {
    /// Recomputes every registry from the quads.
    pub fn derive(dataset: Dataset, vocab: &Vocabulary) -> Self {
        let ty = type_iri();
        let mut registered_resources = BTreeSet::new();
        let mut registered_observable_properties = BTreeSet::new();
        let mut observations = BTreeSet::new();
        let mut controllers = Vec::new();
        let mut consenting_parties = BTreeSet::new();
        let mut allowed_parties = BTreeSet::new();

        dataset.match_in(GraphId::ResourceGraph, None, Some(&ty), None, &mut |s, _, o| {
            let (Term::Iri(s), Term::Iri(class)) = (s, o) else { return };
            let c = class.as_str();
            if vocab.is_subclass(c, ssn::SYSTEM) || vocab.is_subclass(c, iot_lite::SERVICE) {
                registered_resources.insert(s.clone());
            }
            if vocab.is_subclass(c, sosa::OBSERVABLE_PROPERTY) || vocab.is_subclass(c, sosa::ACTUATABLE_PROPERTY) {
                registered_observable_properties.insert(s.clone());
            }
        });
        for p in [sosa::OBSERVES, sosa::ACTS_ON_PROPERTY] {
            dataset.match_in(GraphId::ResourceGraph, None, Some(&iri(p)), None, &mut |_, _, o| {
                if let Term::Iri(o) = o {
                    registered_observable_properties.insert(o.clone());
                }
            });
        }
        dataset.match_in(GraphId::ObservationGraph, None, Some(&ty), None, &mut |s, _, o| {
            let Term::Iri(class) = o else { return };
            if vocab.is_subclass(class.as_str(), sosa::OBSERVATION) || vocab.is_subclass(class.as_str(), sosa::ACTUATION) {
                observations.insert(s.clone());
            }
        });
        for p in PRODUCER_LINKS {
            dataset.match_in(GraphId::ObservationGraph, None, Some(&iri(p)), None, &mut |s, _, _| {
                observations.insert(s.clone());
            });
        }
        dataset.match_in(GraphId::ConsentGraph, None, Some(&ty), None, &mut |s, _, o| {
            let (Term::Iri(s), Term::Iri(class)) = (s, o) else { return };
            if vocab.is_subclass(class.as_str(), gdprtext::CONTROLLER) {
                controllers.push(s.clone());
            }
            if vocab.is_subclass(class.as_str(), con::CONSENTING_PARTY) {
                consenting_parties.insert(s.clone());
            }
        });
        dataset.match_in(GraphId::UserPermissionsGraph, None, Some(&ty), None, &mut |s, _, o| {
            let (Term::Iri(s), Term::Iri(class)) = (s, o) else { return };
            if vocab.is_subclass(class.as_str(), con::ALLOWED_PARTY) {
                allowed_parties.insert(s.clone());
            }
        });
        let mut owners = BTreeMap::new();
        let owned_by = iri(crate::ns::priv_::OWNED_BY);
        for g in [GraphId::ResourceGraph, GraphId::ObservationGraph, GraphId::ConsentGraph] {
            dataset.match_in(g, None, Some(&owned_by), None, &mut |s, _, o| {
                if let Term::Iri(o) = o {
                    owners.insert(s.clone(), o.clone());
                }
            });
        }
        controllers.sort();
        Self {
            dataset,
            registered_resources,
            registered_observable_properties,
            observations,
            controller: controllers.into_iter().next(),
            consenting_parties,
            allowed_parties,
            owners,
        }
    }

    pub fn roles_of(&self, user: &Iri) -> Roles {
        Roles {
            controller: self.controller.as_ref() == Some(user),
            consenting_party: self.consenting_parties.contains(user),
            allowed_party: self.allowed_parties.contains(user),
        }
    }

    pub fn owner_of(&self, subject: &Term) -> Option<&Iri> {
        self.owners.get(subject)
    }

    /// Resources and properties a permission may target.
    pub fn is_permission_target(&self, target: &Iri) -> bool {
        self.registered_resources.contains(target) || self.registered_observable_properties.contains(target)
    }

    /// Subjects owned by `user`.
    pub fn owned_by(&self, user: &Iri) -> BTreeSet<Term> {
        self.owners
            .iter()
            .filter(|(_, o)| *o == user)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Observations linked to any of `targets`.
    pub fn observations_linked_to(&self, targets: &BTreeSet<Term>) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for link in OBSERVATION_LINKS {
            let link = iri(link);
            for t in targets {
                out.extend(self.dataset.subjects(GraphId::ObservationGraph, &link, t));
            }
        }
        out
    }

    /// What a consenting party may see raw: owned subjects, observations of
    /// owned resources and properties, and those observations' results.
    pub fn owned_closure(&self, user: &Iri) -> BTreeSet<Term> {
        let owned = self.owned_by(user);
        let observations = self.observations_linked_to(&owned);
        let has_result = iri(sosa::HAS_RESULT);
        let mut out = owned;
        for obs in &observations {
            out.extend(self.dataset.objects(GraphId::ObservationGraph, obs, &has_result));
        }
        out.extend(observations);
        out
    }

    fn check_invariants(&self, vocab: &Vocabulary) -> Result<(), StoreError> {
        // cardinality maxima, counted over distinct objects in every graph
        for prop in vocab.properties() {
            let Some(max) = prop.cardinality.and_then(|c| c.max) else { continue };
            let mut objects: BTreeMap<&Term, BTreeSet<Term>> = BTreeMap::new();
            let quads = self.dataset.quads_for_pattern(None, None, Some(&prop.iri), None);
            for q in &quads {
                objects.entry(&q.subject).or_default().insert(q.object.clone());
            }
            if let Some((subject, _)) = objects.iter().find(|(_, o)| o.len() > max as usize) {
                return Err(StoreError::CardinalityViolation {
                    subject: (*subject).clone(),
                    property: prop.iri.clone(),
                });
            }
        }
        // every observation has a registered producer
        for obs in &self.observations {
            let producers: Vec<Term> = PRODUCER_LINKS
                .iter()
                .flat_map(|p| self.dataset.objects(GraphId::ObservationGraph, obs, &iri(p)))
                .collect();
            if producers.is_empty() {
                return Err(StoreError::UnregisteredProducer {
                    observation: obs.clone(),
                    producer: None,
                });
            }
            for p in producers {
                let registered = p.as_iri().is_some_and(|i| self.registered_resources.contains(i));
                if !registered {
                    return Err(StoreError::UnregisteredProducer {
                        observation: obs.clone(),
                        producer: Some(p),
                    });
                }
            }
        }
        // permissions only point at registered targets
        let for_data = iri(con::PERMISSION_GIVEN_FOR_DATA);
        for g in [GraphId::UserPermissionsGraph, GraphId::ConsentGraph] {
            for q in self.dataset.quads_for_pattern(Some(g), None, Some(&for_data), None) {
                let ok = q.object.as_iri().is_some_and(|t| self.is_permission_target(t));
                if !ok {
                    return Err(StoreError::DanglingReference {
                        permission: q.subject,
                        target: q.object,
                    });
                }
            }
        }
        // a single controller
        let ty = type_iri();
        let mut controllers = BTreeSet::new();
        self.dataset.match_in(GraphId::ConsentGraph, None, Some(&ty), None, &mut |s, _, o| {
            if o.as_iri().is_some_and(|c| vocab.is_subclass(c.as_str(), gdprtext::CONTROLLER)) {
                controllers.insert(s.clone());
            }
        });
        if controllers.len() > 1 {
            return Err(StoreError::DuplicateController);
        }
        Ok(())
    }
}

/// A set of insertions and deletions applied as one unit.
#[derive(Debug, Clone, Default)]
pub struct Change {
    pub insert: Vec<Quad>,
    pub delete: Vec<Quad>,
}

pub struct Store {
    vocab: Arc<Vocabulary>,
    config: StoreConfig,
    current: RwLock<Arc<StoreState>>,
    writer: Mutex<()>,
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Store")
            .field("config", &self.config)
            .field("quads", &self.snapshot().dataset.len())
            .finish()
    }
}

impl Store {
    pub fn new(vocab: Arc<Vocabulary>, config: StoreConfig) -> Self {
        let mut dataset = Dataset::new();
        dataset.extend(vocabulary_to_quads(&vocab));
        let state = StoreState::derive(dataset, &vocab);
        Self {
            vocab,
            config,
            current: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
        }
    }

    pub fn with_builtin() -> Self {
        Self::new(Arc::new(Vocabulary::builtin()), StoreConfig::default())
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn config(&self) -> StoreConfig {
        self.config
    }

    /// The current state. Never blocks on writers for longer than a pointer swap.
    pub fn snapshot(&self) -> Arc<StoreState> {
        self.current.read().clone()
    }

    /// Roles `user` holds right now.
    pub fn roles_of(&self, user: &Iri) -> Roles {
        self.snapshot().roles_of(user)
    }

    /// Context with the strongest role `user` holds.
    pub fn context_for(&self, user: &Iri) -> AccessContext {
        let role = self.roles_of(user).primary();
        if role == Role::Anonymous {
            AccessContext::anonymous()
        } else {
            AccessContext::new(user.clone(), role)
        }
    }

    fn check_claim(state: &StoreState, ctx: &AccessContext) -> Result<(), StoreError> {
        if state.roles_of(&ctx.user).has(ctx.role) {
            Ok(())
        } else {
            Err(StoreError::Unauthorized(format!("{} is not a registered {}", ctx.user, ctx.role)))
        }
    }

    fn require_graph(quads: &[Quad], allowed: &[GraphId]) -> Result<(), StoreError> {
        match quads.iter().find(|q| !allowed.contains(&q.graph)) {
            None => Ok(()),
            Some(q) => Err(StoreError::WrongGraph {
                expected: allowed.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" or "),
                found: q.graph,
            }),
        }
    }

    pub fn insert_resource(&self, ctx: &AccessContext, quads: Vec<Quad>) -> Result<WriteReport, StoreError> {
        self.commit(|state| {
            Self::check_claim(state, ctx)?;
            if !matches!(ctx.role, Role::Controller | Role::ConsentingParty) {
                return Err(StoreError::Unauthorized(format!("{} may not register resources", ctx.role)));
            }
            Self::require_graph(&quads, &[GraphId::ResourceGraph])?;
            if quads.is_empty() {
                return Ok(Change::default());
            }
            let has_resource = quads.iter().any(|q| {
                q.predicate == rdf::TYPE
                    && q.object.as_iri().is_some_and(|c| {
                        self.vocab.is_subclass(c.as_str(), ssn::SYSTEM)
                            || self.vocab.is_subclass(c.as_str(), iot_lite::SERVICE)
                    })
            });
            if !has_resource {
                return Err(StoreError::NoResourceSubject);
            }
            Ok(Change {
                insert: quads.clone(),
                delete: Vec::new(),
            })
        })
    }

    pub fn insert_observation(&self, ctx: &AccessContext, quads: Vec<Quad>) -> Result<WriteReport, StoreError> {
        self.commit(|state| {
            Self::check_claim(state, ctx)?;
            if !matches!(ctx.role, Role::Controller | Role::ConsentingParty) {
                return Err(StoreError::Unauthorized(format!("{} may not publish observations", ctx.role)));
            }
            Self::require_graph(&quads, &[GraphId::ObservationGraph])?;
            Ok(Change {
                insert: quads.clone(),
                delete: Vec::new(),
            })
        })
    }

    pub fn insert_privacy(&self, ctx: &AccessContext, quads: Vec<Quad>) -> Result<WriteReport, StoreError> {
        self.commit(|state| {
            Self::check_claim(state, ctx)?;
            if ctx.role != Role::Controller {
                return Err(StoreError::Unauthorized("only the controller writes privacy graphs".into()));
            }
            Self::require_graph(&quads, &[GraphId::ConsentGraph, GraphId::UserPermissionsGraph])?;
            Ok(Change {
                insert: quads.clone(),
                delete: Vec::new(),
            })
        })
    }

    pub fn delete_quads(&self, ctx: &AccessContext, quads: Vec<Quad>) -> Result<WriteReport, StoreError> {
        self.commit(|state| {
            Self::check_claim(state, ctx)?;
            let owned = (ctx.role == Role::ConsentingParty).then(|| state.owned_closure(&ctx.user));
            for q in &quads {
                let allowed = match q.graph {
                    GraphId::VocabularyGraph => false,
                    g if g.is_privacy() => ctx.role == Role::Controller,
                    _ => {
                        ctx.role == Role::Controller || owned.as_ref().is_some_and(|o| o.contains(&q.subject))
                    }
                };
                if !allowed {
                    return Err(StoreError::Unauthorized(format!(
                        "{} may not delete {:?}",
                        ctx.user, q
                    )));
                }
            }
            Ok(Change {
                insert: Vec::new(),
                delete: quads.clone(),
            })
        })
    }

    /// Raw graph access, filtered by role.
    pub fn read(&self, ctx: &AccessContext, graph: GraphId) -> Result<Vec<Quad>, StoreError> {
        let state = self.snapshot();
        Self::check_claim(&state, ctx)?;
        if graph == GraphId::VocabularyGraph {
            return Ok(state.dataset.graph(graph).collect());
        }
        match (ctx.role, graph.is_privacy()) {
            (Role::Controller, _) => Ok(state.dataset.graph(graph).collect()),
            (Role::Anonymous, _) => Err(StoreError::Unauthorized("anonymous users cannot read graphs".into())),
            (_, true) => {
                let me = Term::Iri(ctx.user.clone());
                Ok(state
                    .dataset
                    .graph(graph)
                    .filter(|q| q.subject == me || q.object == me)
                    .collect())
            }
            (Role::ConsentingParty, false) => {
                let visible = state.owned_closure(&ctx.user);
                Ok(state
                    .dataset
                    .graph(graph)
                    .filter(|q| visible.contains(&q.subject))
                    .collect())
            }
            (Role::AllowedParty, false) => Err(StoreError::Unauthorized(
                "allowed parties read data through the query endpoint".into(),
            )),
        }
    }

    /// Applies a change computed from the latest state under the writer lock.
    pub(crate) fn commit(
        &self,
        build: impl FnOnce(&StoreState) -> Result<Change, StoreError>,
    ) -> Result<WriteReport, StoreError> {
        self.commit_with(|state| build(state).map(|c| (c, ()))).map(|(r, ())| r)
    }

    /// Like [`Store::commit`], also returning a value computed alongside the change.
    pub(crate) fn commit_with<T, E: From<StoreError>>(
        &self,
        build: impl FnOnce(&StoreState) -> Result<(Change, T), E>,
    ) -> Result<(WriteReport, T), E> {
        let _guard = self.writer.lock();
        let current = self.snapshot();
        let (change, value) = build(&current)?;
        let (next, report) = self.apply(&current, change)?;
        if let Some(next) = next {
            *self.current.write() = Arc::new(next);
        }
        Ok((report, value))
    }

    fn with_inverses(&self, quads: &[Quad]) -> Vec<Quad> {
        let mut out = Vec::with_capacity(quads.len() * 2);
        for q in quads {
            out.push(q.clone());
            if q.object.is_literal() {
                continue;
            }
            for inv in self.vocab.inverses_of(q.predicate.as_str()) {
                out.push(Quad {
                    graph: q.graph,
                    subject: q.object.clone(),
                    predicate: inv.clone(),
                    object: q.subject.clone(),
                });
            }
        }
        out
    }

    fn apply(&self, current: &StoreState, change: Change) -> Result<(Option<StoreState>, WriteReport), StoreError> {
        if change.insert.is_empty() && change.delete.is_empty() {
            return Ok((None, WriteReport::default()));
        }
        if let Some(q) = change
            .insert
            .iter()
            .chain(&change.delete)
            .find(|q| q.graph == GraphId::VocabularyGraph)
        {
            return Err(StoreError::WrongGraph {
                expected: "a writable graph".into(),
                found: q.graph,
            });
        }
        let mut dataset = current.dataset.clone();
        let mut removed = 0;
        for q in self.with_inverses(&change.delete) {
            if dataset.remove(&q) {
                removed += 1;
            }
        }
        let inserts = self.with_inverses(&change.insert);
        let mut inserted = 0;
        for q in &inserts {
            if dataset.insert(q.clone()) {
                inserted += 1;
            }
        }
        let next = StoreState::derive(dataset, &self.vocab);
        let warnings = self.check_new_quads(&next, &change.insert)?;
        next.check_invariants(&self.vocab)?;
        let registered = next
            .registered_resources
            .difference(&current.registered_resources)
            .cloned()
            .collect();
        let report = WriteReport {
            inserted,
            removed,
            registered,
            warnings,
        };
        Ok((Some(next), report))
    }

    /// Vocabulary-conformance and metadata checks for newly written quads.
    fn check_new_quads(&self, state: &StoreState, quads: &[Quad]) -> Result<Vec<String>, StoreError> {
        let strict = self.config.vocabulary_mode == VocabularyMode::Strict;
        let mut warnings = Vec::new();
        let ty = type_iri();
        let is_metadata = |t: &Term| {
            GraphId::ALL.into_iter().any(|g| {
                state
                    .dataset
                    .objects(g, t, &ty)
                    .iter()
                    .any(|c| c.as_iri().is_some_and(|c| self.vocab.is_subclass(c.as_str(), iot_lite::METADATA)))
            })
        };
        let mut report = |term: &Iri, what: &str| -> Result<(), StoreError> {
            if strict {
                Err(StoreError::UnknownVocabularyTerm(term.clone()))
            } else {
                warnings.push(format!("unknown {what} {term}"));
                Ok(())
            }
        };
        let mut touched = BTreeSet::new();
        for q in quads {
            touched.insert(&q.subject);
            if is_metadata(&q.subject) {
                continue;
            }
            let p = q.predicate.as_str();
            if self.vocab.property(p).is_none() && !ANNOTATION_PREDICATES.contains(&p) {
                report(&q.predicate, "property")?;
            }
            if q.predicate == rdf::TYPE {
                if let Some(class) = q.object.as_iri() {
                    if self.vocab.concept(class.as_str()).is_none() {
                        report(class, "class")?;
                    }
                }
            }
        }
        let has_metadata = iri(iot_lite::HAS_METADATA);
        for subject in touched {
            let count: BTreeSet<Term> = GraphId::ALL
                .into_iter()
                .filter(|g| g.is_data())
                .flat_map(|g| state.dataset.objects(g, subject, &has_metadata))
                .collect();
            if count.len() > self.config.metadata_cap {
                if strict {
                    return Err(StoreError::MetadataAbuse {
                        subject: subject.clone(),
                        count: count.len(),
                        cap: self.config.metadata_cap,
                    });
                }
                warnings.push(format!(
                    "{subject} carries {} metadata records (cap {})",
                    count.len(),
                    self.config.metadata_cap
                ));
            }
        }
        Ok(warnings)
    }

    /// Writable graphs as canonical N-Quads. The vocabulary graph is left out;
    /// it is rebuilt from the compiled schema.
    pub fn to_nquads(&self) -> String {
        let state = self.snapshot();
        let quads: Vec<Quad> = state
            .dataset
            .iter()
            .filter(|q| q.graph != GraphId::VocabularyGraph)
            .collect();
        serialize_nquads(&quads)
    }

    /// Replaces the whole state with the statements in `text`.
    pub fn load_nquads(&self, text: &str) -> Result<(), StoreError> {
        let quads = parse_nquads(text)?;
        if quads.iter().any(|q| q.graph == GraphId::VocabularyGraph) {
            return Err(StoreError::VocabularyInSnapshot);
        }
        let _guard = self.writer.lock();
        let mut dataset = Dataset::new();
        dataset.extend(vocabulary_to_quads(&self.vocab));
        dataset.extend(self.with_inverses(&quads));
        let next = StoreState::derive(dataset, &self.vocab);
        next.check_invariants(&self.vocab)?;
        *self.current.write() = Arc::new(next);
        Ok(())
    }

    pub fn snapshot_to(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.to_nquads()).map_err(|e| StoreError::Io(e.to_string()))
    }

    pub fn restore_from(&self, path: &Path) -> Result<(), StoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| StoreError::Io(e.to_string()))?;
        self.load_nquads(&text)
    }
}
