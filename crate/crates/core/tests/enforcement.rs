mod common;

use std::collections::BTreeSet;

use chrono::Duration;
use common::world;
use common::{iri, t0};
use privgraph::consent::{compile, ConsentEngine, ConsentRecord, PermissionRecord, Purpose};
use privgraph::fixtures;
use privgraph::query::{execute_as, parse_query, AugmentationMode, ResultSet};
use privgraph::rdf::{Iri, Term};
use privgraph::store::{AccessContext, Role};

fn run(engine: &ConsentEngine, user: &Iri, text: &str, at: chrono::DateTime<chrono::Utc>, mode: AugmentationMode) -> ResultSet {
    let q = parse_query(text).unwrap();
    execute_as(&AccessContext::allowed_party(user), &q, engine, at, mode).unwrap()
}

fn iris_in(rs: &ResultSet, var: &str) -> BTreeSet<Iri> {
    rs.column(var)
        .into_iter()
        .flatten()
        .filter_map(|t| t.as_iri().cloned())
        .collect()
}

#[test]
fn rewrite_and_postfilter_agree_on_random_hubs() {
    let now = t0();
    let mut non_empty = 0;
    let mut compared = 0;
    for seed in 0..120 {
        let w = world::build(world::layout(seed));
        let (interests, grants) = world::random_consent(&w.layout, seed, now);
        world::apply_consent(&w, &interests, &grants, now);
        for user in &w.layout.users {
            for text in world::TEMPLATES {
                let a = run(&w.engine, user, text, now, AugmentationMode::Rewrite);
                let b = run(&w.engine, user, text, now, AugmentationMode::PostFilter);
                assert_eq!(a, b, "seed {seed}, user {user}, query {text}");
                compared += 1;
                non_empty += usize::from(!a.is_empty());
            }
        }
    }
    assert!(compared >= 500);
    // the comparison is not vacuous
    assert!(non_empty * 10 > compared, "{non_empty} of {compared}");
}

#[test]
fn default_deny_then_grant_then_revoke() {
    let now = t0();
    for seed in 200..240 {
        let w = world::build(world::layout(seed));
        let l = &w.layout;
        let probe = world::ex("probe");
        w.engine.register_party(&probe, &[Role::AllowedParty]).unwrap();
        let action = world::actions()[0].clone();
        let purpose = world::purposes()[0].clone();
        w.engine.register_interest(&probe, &action, &purpose, now).unwrap();
        for text in world::TEMPLATES {
            for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
                assert!(run(&w.engine, &probe, text, now, mode).is_empty(), "seed {seed}: {text}");
            }
        }

        // one owner grants one request
        let targets = l.targets();
        let pick = targets[seed as usize % targets.len()].clone();
        let chosen: BTreeSet<Iri> = BTreeSet::from([pick]);
        let outcome = w
            .engine
            .request_access(&probe, &action, &purpose, &chosen, now)
            .unwrap();
        assert!(outcome.granted.is_empty());
        assert_eq!(outcome.pending.len(), 1);
        let request = &outcome.pending[0];
        let perm = w
            .engine
            .grant(&request.owner, &request.id, now + Duration::hours(1), now)
            .unwrap();

        let systems: BTreeSet<Iri> = l.sensors.iter().chain(&l.actuators).cloned().collect();
        let expected_systems: BTreeSet<Iri> = chosen.intersection(&systems).cloned().collect();
        let expected_obs: BTreeSet<Iri> = l
            .observations
            .iter()
            .filter(|(_, (s, p))| chosen.contains(s) || chosen.contains(p))
            .map(|(o, _)| o.clone())
            .collect();
        for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
            let sys = run(&w.engine, &probe, world::SYSTEMS_QUERY, now, mode);
            assert_eq!(iris_in(&sys, "s"), expected_systems, "seed {seed} {mode}");
            let obs = run(&w.engine, &probe, world::OBSERVATIONS_QUERY, now, mode);
            assert_eq!(iris_in(&obs, "obs"), expected_obs, "seed {seed} {mode}");
        }

        w.engine.revoke(&request.owner, &perm.id).unwrap();
        for text in world::TEMPLATES {
            for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
                assert!(run(&w.engine, &probe, text, now, mode).is_empty(), "seed {seed}: {text}");
            }
        }
    }
}

/// The sample data plus one permission for the experimenter with `expiry`.
fn sample_with_expiry(offset: Option<Duration>) -> ConsentEngine {
    let engine = common::data_engine();
    let admin = iri(fixtures::ADMIN);
    let user = iri(fixtures::EXPERIMENTER);
    let owner = iri(fixtures::CONSENTING_PARTY);
    engine.register_party(&user, &[Role::AllowedParty]).unwrap();
    engine.register_party(&owner, &[Role::ConsentingParty]).unwrap();
    engine
        .register_interest(&user, &common::discover(), &common::know_area(), t0())
        .unwrap();
    let perm = PermissionRecord {
        id: iri("http://soundcity.example.org/permission.expiring"),
        allowed_parties: BTreeSet::from([user]),
        data_targets: BTreeSet::from([iri(fixtures::SENSOR)]),
        action: common::discover(),
        purpose: common::know_area(),
        expires_at: offset.map(|d| t0() + d),
    };
    let consent = ConsentRecord {
        id: iri("http://soundcity.example.org/consent.expiring"),
        consenting_party: owner,
        permission: perm.id.clone(),
    };
    engine
        .store()
        .insert_privacy(&AccessContext::controller(&admin), compile(&perm, &consent))
        .unwrap();
    engine
}

#[test]
fn expiry_is_strict() {
    let user = iri(fixtures::EXPERIMENTER);
    for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
        let past = sample_with_expiry(Some(-Duration::seconds(1)));
        assert!(run(&past, &user, fixtures::BBOX_QUERY, t0(), mode).is_empty());

        let future = sample_with_expiry(Some(Duration::hours(1)));
        assert_eq!(run(&future, &user, fixtures::BBOX_QUERY, t0(), mode).len(), 1);
        let at_expiry = t0() + Duration::hours(1);
        assert!(run(&future, &user, fixtures::BBOX_QUERY, at_expiry, mode).is_empty());
        let later = at_expiry + Duration::seconds(1);
        assert!(run(&future, &user, fixtures::BBOX_QUERY, later, mode).is_empty());

        let open = sample_with_expiry(None);
        assert_eq!(run(&open, &user, fixtures::BBOX_QUERY, t0() + Duration::days(3650), mode).len(), 1);
    }
}

#[test]
fn interest_mismatch_hides_data() {
    let engine = sample_with_expiry(None);
    let user = iri(fixtures::EXPERIMENTER);
    // a different purpose than the permission's
    engine
        .register_interest(&user, &common::discover(), &Purpose::Text("marketing".into()), t0())
        .unwrap();
    for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
        assert!(run(&engine, &user, fixtures::BBOX_QUERY, t0(), mode).is_empty());
    }
}

#[test]
fn controller_sees_everything_and_anonymous_nothing() {
    let engine = common::golden_engine();
    let q = parse_query(fixtures::BBOX_QUERY).unwrap();
    let admin = iri(fixtures::ADMIN);
    let all = execute_as(&AccessContext::controller(&admin), &q, &engine, t0(), AugmentationMode::Rewrite).unwrap();
    assert_eq!(all.len(), 1);
    let none = execute_as(&AccessContext::anonymous(), &q, &engine, t0(), AugmentationMode::Rewrite).unwrap();
    assert!(none.is_empty());
}

#[test]
fn claimed_role_must_be_held() {
    let engine = common::golden_engine();
    let q = parse_query(fixtures::BBOX_QUERY).unwrap();
    let user = iri(fixtures::EXPERIMENTER);
    let err = execute_as(&AccessContext::controller(&user), &q, &engine, t0(), AugmentationMode::Rewrite);
    assert!(matches!(err, Err(privgraph::query::QueryError::Unauthorized(_))));
}

#[test]
fn owner_sees_own_resources() {
    let engine = common::golden_engine();
    let owner = iri(fixtures::CONSENTING_PARTY);
    let q = parse_query(world::OBSERVATIONS_QUERY).unwrap();
    let rs = execute_as(&AccessContext::consenting_party(&owner), &q, &engine, t0(), AugmentationMode::Rewrite).unwrap();
    assert_eq!(rs.column("obs"), vec![Some(&Term::iri(fixtures::OBSERVATION).unwrap())]);
}

#[test]
fn observations_follow_the_sensor_grant() {
    let engine = common::golden_engine();
    let user = iri(fixtures::EXPERIMENTER);
    let q = parse_query(world::OBSERVATIONS_QUERY).unwrap();
    for mode in [AugmentationMode::Rewrite, AugmentationMode::PostFilter] {
        let rs = execute_as(&AccessContext::allowed_party(&user), &q, &engine, t0(), mode).unwrap();
        assert_eq!(rs.len(), 1, "{mode}");
    }
}
