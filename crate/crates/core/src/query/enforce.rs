//! Consent enforcement for queries.
//!
//! Every node position of a query is classified from the schema. Nodes that
//! can bind a resource or property need a permission for that exact term;
//! nodes that can only bind observations need a permission for a sensor,
//! actuator or property the observation links to. Other nodes (platforms,
//! points, results) are visible when they are joined to a guarded node and
//! guarded themselves otherwise.
//!
//! The rewrite adds the permission join to the query; the post-filter checks
//! the same conditions on full solutions. Both read one snapshot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::consent::{ConsentEngine, Interest, Purpose};
use crate::ns::{con, dul, iot_lite, priv_, rdf, rdfs, sosa, ssn, xsd};
use crate::rdf::{GraphId, Iri, Literal, PrefixMap, Term};
use crate::store::{AccessContext, Role, StoreState, OBSERVATION_LINKS};
use crate::vocab::{PropertyKind, Vocabulary};

use super::ast::{CmpOp, Element, Expr, GroupPattern, Projection, Query, TermPattern, TriplePattern};
use super::eval::{compare, Evaluator, Solution};
use super::{QueryError, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentationMode {
    #[default]
    Rewrite,
    PostFilter,
}

impl FromStr for AugmentationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rewrite" => Ok(Self::Rewrite),
            "postfilter" | "post-filter" => Ok(Self::PostFilter),
            other => Err(format!("unknown augmentation mode '{other}'")),
        }
    }
}

impl fmt::Display for AugmentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rewrite => "rewrite",
            Self::PostFilter => "postfilter",
        })
    }
}

/// What a solution must satisfy for one node of the query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    /// The node itself is a permitted target.
    Direct(TermPattern),
    /// The node links to a permitted target via one of the observation links.
    Observation(TermPattern),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Target,
    Observation,
    Other,
    /// Literal values and classes.
    Value,
}

fn class_kinds(v: &Vocabulary, class: &Iri) -> BTreeSet<Kind> {
    let mut classes = v.subclasses(class);
    classes.insert(class.clone());
    classes
        .iter()
        .map(|c| {
            let c = c.as_str();
            let target = [ssn::SYSTEM, iot_lite::SERVICE, sosa::OBSERVABLE_PROPERTY, sosa::ACTUATABLE_PROPERTY];
            if target.iter().any(|t| v.is_subclass(c, t)) {
                Kind::Target
            } else if v.is_subclass(c, sosa::OBSERVATION) || v.is_subclass(c, sosa::ACTUATION) {
                Kind::Observation
            } else if c.starts_with(xsd::NS) {
                Kind::Value
            } else {
                Kind::Other
            }
        })
        .collect()
}

fn union_kinds(v: &Vocabulary, classes: &[Iri]) -> Option<BTreeSet<Kind>> {
    if classes.is_empty() {
        return None;
    }
    Some(classes.iter().flat_map(|c| class_kinds(v, c)).collect())
}

#[derive(Default)]
struct NodeInfo {
    constraints: Vec<BTreeSet<Kind>>,
    force_direct: bool,
}

fn is_node(p: &TermPattern) -> bool {
    matches!(p, TermPattern::Var(_) | TermPattern::Term(Term::Iri(_)))
}

/// Guards for every protected node of a conjunctive query, in order of
/// first appearance.
pub fn classify(q: &Query, v: &Vocabulary) -> Vec<Guard> {
    let triples: Vec<&TriplePattern> = q.patterns().collect();
    let mut order: Vec<TermPattern> = Vec::new();
    let mut info: BTreeMap<TermPattern, NodeInfo> = BTreeMap::new();
    let mut note = |node: &TermPattern, constraint: Option<BTreeSet<Kind>>, force: bool| {
        if !is_node(node) {
            return;
        }
        if !order.contains(node) {
            order.push(node.clone());
        }
        let entry = info.entry(node.clone()).or_default();
        if let Some(c) = constraint {
            entry.constraints.push(c);
        }
        entry.force_direct |= force;
    };
    let value_kind = || Some(BTreeSet::from([Kind::Value]));

    for t in &triples {
        match &t.predicate {
            TermPattern::Var(_) => {
                note(&t.subject, None, true);
                note(&t.object, None, true);
            }
            TermPattern::Term(Term::Iri(p)) if p == rdf::TYPE => match &t.object {
                TermPattern::Term(Term::Iri(class)) => {
                    let known = v.concept(class.as_str()).is_some();
                    note(&t.subject, known.then(|| class_kinds(v, class)), false);
                }
                other => {
                    note(&t.subject, None, false);
                    note(other, value_kind(), false);
                }
            },
            TermPattern::Term(Term::Iri(p)) => match v.property(p.as_str()) {
                Some(def) => {
                    note(&t.subject, union_kinds(v, &def.domain_includes), false);
                    match def.kind {
                        PropertyKind::Data => note(&t.object, value_kind(), false),
                        PropertyKind::Object => note(&t.object, union_kinds(v, &def.range_includes), false),
                    }
                }
                None => {
                    note(&t.subject, None, false);
                    note(&t.object, None, false);
                }
            },
            TermPattern::Term(_) => {}
        }
    }

    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Class {
        Direct,
        Observation,
        Other,
        Free,
    }
    let class_of = |n: &NodeInfo| -> Class {
        if n.force_direct || n.constraints.is_empty() {
            return Class::Direct;
        }
        let mut k = n.constraints[0].clone();
        for c in &n.constraints[1..] {
            k = k.intersection(c).copied().collect();
        }
        if k.is_empty() || k.contains(&Kind::Target) {
            Class::Direct
        } else if k.contains(&Kind::Observation) {
            Class::Observation
        } else if k.contains(&Kind::Other) {
            Class::Other
        } else {
            Class::Free
        }
    };
    let classes: BTreeMap<&TermPattern, Class> = info.iter().map(|(n, i)| (n, class_of(i))).collect();

    // components over node-to-node edges; free nodes do not connect
    let mut parent: BTreeMap<&TermPattern, &TermPattern> = classes.keys().map(|n| (*n, *n)).collect();
    fn find<'a>(parent: &mut BTreeMap<&'a TermPattern, &'a TermPattern>, n: &'a TermPattern) -> &'a TermPattern {
        let mut root = n;
        while parent[root] != root {
            root = parent[root];
        }
        parent.insert(n, root);
        root
    }
    for t in &triples {
        let (Some(a), Some(b)) = (classes.get_key_value(&t.subject), classes.get_key_value(&t.object)) else {
            continue;
        };
        if *a.1 == Class::Free || *b.1 == Class::Free {
            continue;
        }
        let (ra, rb) = (find(&mut parent, a.0), find(&mut parent, b.0));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let mut anchored: BTreeSet<&TermPattern> = BTreeSet::new();
    for (n, c) in &classes {
        if matches!(c, Class::Direct | Class::Observation) {
            anchored.insert(find(&mut parent, n));
        }
    }

    let mut guards = Vec::new();
    for n in &order {
        let guard = match classes[n] {
            Class::Direct => Some(Guard::Direct(n.clone())),
            Class::Observation => Some(Guard::Observation(n.clone())),
            Class::Other if !anchored.contains(find(&mut parent, n)) => Some(Guard::Direct(n.clone())),
            Class::Other | Class::Free => None,
        };
        guards.extend(guard);
    }
    guards
}

fn iri(s: &'static str) -> Iri {
    Iri::from_static(s)
}

fn var(name: &str) -> TermPattern {
    TermPattern::Var(name.to_string())
}

fn triple(s: TermPattern, p: &'static str, o: TermPattern) -> Element {
    Element::Triple(TriplePattern::new(s, TermPattern::iri(&iri(p)), o))
}

struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    fn name(&mut self, base: &str, k: usize) -> String {
        let mut candidate = if k == 0 { base.to_string() } else { format!("{base}_{k}") };
        while self.used.contains(&candidate) {
            candidate.push('_');
        }
        self.used.insert(candidate.clone());
        candidate
    }
}

/// The permission join for one target term.
fn permission_block(user: &Iri, target: TermPattern, interest: &Interest, now: &Literal, fresh: &mut Fresh, k: usize) -> Element {
    let perm = fresh.name("perm", k);
    let action = fresh.name("action", k);
    let purpose = fresh.name("purpose", k);
    let expiry = fresh.name("expiry", k);
    let mut inner = vec![
        triple(TermPattern::iri(user), priv_::HAS_PERMISSION, var(&perm)),
        triple(var(&perm), con::PERMISSION_GIVEN_FOR_DATA, target),
        triple(var(&perm), con::PERMISSION_GIVEN_FOR_ACTIVITY, var(&action)),
        triple(var(&action), rdf::TYPE, TermPattern::iri(&interest.action)),
        triple(var(&action), con::ACTIVITY_HAS_PURPOSE, var(&purpose)),
    ];
    inner.push(match &interest.purpose {
        Purpose::Iri(p) => triple(var(&purpose), rdf::TYPE, TermPattern::iri(p)),
        Purpose::Text(text) => triple(var(&purpose), rdfs::LABEL, TermPattern::Term(Term::Literal(Literal::string(text)))),
    });
    inner.push(Element::Optional(GroupPattern {
        elements: vec![triple(var(&perm), dul::HAS_DATA_VALUE, var(&expiry))],
    }));
    inner.push(Element::Filter(Expr::or(
        Expr::Not(Box::new(Expr::Bound(expiry.clone()))),
        Expr::cmp(CmpOp::Gt, Expr::Var(expiry), Expr::Const(Term::Literal(now.clone()))),
    )));
    Element::Graph(iri(GraphId::UserPermissionsGraph.iri()), GroupPattern { elements: inner })
}

/// Rewrites `q` so that only solutions whose protected nodes are covered by
/// a live permission of `user` for the registered interest survive.
pub fn augment(
    q: &Query,
    user: &Iri,
    interest: Option<&Interest>,
    v: &Vocabulary,
    now: DateTime<Utc>,
) -> Result<Query, QueryError> {
    let interest = interest.ok_or_else(|| QueryError::NoRegisteredInterest(user.clone()))?;
    let now = Literal::date_time(now);
    let vars = q.pattern_vars();
    let mut fresh = Fresh {
        used: vars.iter().cloned().collect(),
    };
    let mut elements = q.where_clause.elements.clone();
    for (k, guard) in classify(q, v).into_iter().enumerate() {
        match guard {
            Guard::Direct(node) => elements.push(permission_block(user, node, interest, &now, &mut fresh, k)),
            Guard::Observation(node) => {
                let link = fresh.name("link", k);
                let target = fresh.name("target", k);
                elements.push(Element::Triple(TriplePattern::new(node, var(&link), var(&target))));
                let alternatives = OBSERVATION_LINKS
                    .iter()
                    .map(|l| Expr::cmp(CmpOp::Eq, Expr::Var(link.clone()), Expr::Const(Term::Iri(iri(l)))))
                    .reduce(Expr::or)
                    .expect("observation links");
                elements.push(Element::Filter(alternatives));
                elements.push(permission_block(user, var(&target), interest, &now, &mut fresh, k));
            }
        }
    }
    let inner = Query {
        prefixes: Vec::new(),
        distinct: true,
        projection: Projection::Vars(vars.clone()),
        where_clause: GroupPattern { elements },
    };
    let mut prefixes = q.prefixes.clone();
    let builtin = PrefixMap::builtin();
    let mut wanted = vec!["rdf", "rdfs", "xsd", "dul", "con", "priv", "sosa"];
    let mut needed: Vec<&Iri> = vec![&interest.action];
    if let Purpose::Iri(p) = &interest.purpose {
        needed.push(p);
    }
    for (prefix, ns) in builtin.iter() {
        if needed.iter().any(|i| i.as_str().starts_with(ns)) && !wanted.contains(&prefix) {
            wanted.push(prefix);
        }
    }
    for prefix in wanted {
        let taken = prefixes.iter().any(|(p, _)| p == prefix);
        if let (false, Some(ns)) = (taken, builtin.get(prefix)) {
            prefixes.push((prefix.to_string(), Iri::new(ns).expect("builtin namespace")));
        }
    }
    Ok(Query {
        prefixes,
        distinct: q.distinct,
        projection: Projection::Vars(q.projected_vars()),
        where_clause: GroupPattern {
            elements: vec![Element::SubSelect(Box::new(inner))],
        },
    })
}

/// Terms a solution may expose, and whether observations may be matched
/// directly.
struct Coverage {
    targets: BTreeSet<Term>,
    observations_direct: bool,
}

fn expiry_ok(state: &StoreState, perm: &Term, now: &Literal) -> bool {
    let values = state
        .dataset
        .objects(GraphId::UserPermissionsGraph, perm, &iri(dul::HAS_DATA_VALUE));
    values.is_empty()
        || values
            .iter()
            .any(|v| compare(CmpOp::Gt, v, &Term::Literal(now.clone())) == Ok(true))
}

fn live_permissions<'a>(state: &'a StoreState, user: &Iri, now: &'a Literal) -> impl Iterator<Item = Term> + 'a {
    state
        .dataset
        .objects(GraphId::UserPermissionsGraph, &Term::Iri(user.clone()), &iri(priv_::HAS_PERMISSION))
        .into_iter()
        .filter(move |p| expiry_ok(state, p, now))
}

fn permission_targets(state: &StoreState, perm: &Term) -> Vec<Term> {
    state
        .dataset
        .objects(GraphId::UserPermissionsGraph, perm, &iri(con::PERMISSION_GIVEN_FOR_DATA))
}

/// Targets of `user`'s live permissions for the interest's exact action and
/// purpose.
fn interest_coverage(state: &StoreState, user: &Iri, interest: &Interest, now: &Literal) -> BTreeSet<Term> {
    let up = GraphId::UserPermissionsGraph;
    let d = &state.dataset;
    let ty = iri(rdf::TYPE);
    let purpose_matches = |node: &Term| match &interest.purpose {
        Purpose::Iri(p) => d.objects(up, node, &ty).contains(&Term::Iri(p.clone())),
        Purpose::Text(text) => d
            .objects(up, node, &iri(rdfs::LABEL))
            .contains(&Term::Literal(Literal::string(text))),
    };
    let mut out = BTreeSet::new();
    for perm in live_permissions(state, user, now) {
        let activity_ok = d
            .objects(up, &perm, &iri(con::PERMISSION_GIVEN_FOR_ACTIVITY))
            .iter()
            .any(|action| {
                d.objects(up, action, &ty).contains(&Term::Iri(interest.action.clone()))
                    && d
                        .objects(up, action, &iri(con::ACTIVITY_HAS_PURPOSE))
                        .iter()
                        .any(purpose_matches)
            });
        if activity_ok {
            out.extend(permission_targets(state, &perm));
        }
    }
    out
}

fn linked_targets(state: &StoreState, node: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    for g in [GraphId::ResourceGraph, GraphId::ObservationGraph] {
        for link in OBSERVATION_LINKS {
            out.extend(state.dataset.objects(g, node, &iri(link)));
        }
    }
    out
}

fn admits(state: &StoreState, guards: &[Guard], coverage: &Coverage, sol: &Solution) -> bool {
    let value = |p: &TermPattern| -> Option<Term> {
        match p {
            TermPattern::Var(v) => sol.get(v).cloned(),
            TermPattern::Term(t) => Some(t.clone()),
        }
    };
    guards.iter().all(|g| match g {
        Guard::Direct(p) => value(p).is_some_and(|t| coverage.targets.contains(&t)),
        Guard::Observation(p) => value(p).is_some_and(|t| {
            (coverage.observations_direct && coverage.targets.contains(&t))
                || linked_targets(state, &t).iter().any(|l| coverage.targets.contains(l))
        }),
    })
}

fn post_filter(state: &StoreState, q: &Query, v: &Vocabulary, coverage: &Coverage) -> ResultSet {
    let guards = classify(q, v);
    let solutions = Evaluator::new(&state.dataset, v)
        .solutions(q)
        .into_iter()
        .filter(|s| admits(state, &guards, coverage, s))
        .collect();
    ResultSet::from_solutions(q.projected_vars(), solutions, q.distinct)
}

/// Runs `q` on behalf of `ctx` over one snapshot.
///
/// The controller sees everything. A consenting party sees what it owns and
/// what it holds live permissions for. An allowed party sees what its live
/// permissions cover for its registered interest, and nothing without one.
pub fn execute_as(
    ctx: &AccessContext,
    q: &Query,
    engine: &ConsentEngine,
    now: DateTime<Utc>,
    mode: AugmentationMode,
) -> Result<ResultSet, QueryError> {
    let state = engine.store().snapshot();
    let v = engine.store().vocabulary();
    if ctx.role != Role::Anonymous && !state.roles_of(&ctx.user).has(ctx.role) {
        return Err(QueryError::Unauthorized(format!("{} is not a registered {}", ctx.user, ctx.role)));
    }
    let now_lit = Literal::date_time(now);
    match ctx.role {
        Role::Controller => Ok(Evaluator::new(&state.dataset, v).evaluate(q)),
        Role::Anonymous => Ok(ResultSet::empty(q.projected_vars())),
        Role::ConsentingParty => {
            let mut targets = state.owned_by(&ctx.user);
            for perm in live_permissions(&state, &ctx.user, &now_lit) {
                targets.extend(permission_targets(&state, &perm));
            }
            let coverage = Coverage {
                targets,
                observations_direct: true,
            };
            Ok(post_filter(&state, q, v, &coverage))
        }
        Role::AllowedParty => {
            let Some(interest) = engine.interest_of(&ctx.user) else {
                return Ok(ResultSet::empty(q.projected_vars()));
            };
            match mode {
                AugmentationMode::Rewrite => {
                    let augmented = augment(q, &ctx.user, Some(&interest), v, now)?;
                    Ok(Evaluator::new(&state.dataset, v).evaluate(&augmented))
                }
                AugmentationMode::PostFilter => {
                    let coverage = Coverage {
                        targets: interest_coverage(&state, &ctx.user, &interest, &now_lit),
                        observations_direct: false,
                    };
                    Ok(post_filter(&state, q, v, &coverage))
                }
            }
        }
    }
}
