"""Runs the sample scenario through the Python bindings."""

import datetime as dt
import tempfile
from pathlib import Path

import privgraph

fx = privgraph.fixtures
ADMIN = fx["admin"]
USER = fx["experimenter"]
ALICE = "http://soundcity.example.org/alice"
DISCOVER = "iot-taxonomy:DiscoverSensors"
KNOW_AREA = "iot-taxonomy:KnowSensorsInTheArea"
T0 = dt.datetime(2024, 5, 1, 12, tzinfo=dt.timezone.utc)


def main():
    hub = privgraph.Hub(ADMIN, now=T0)
    hub.ingest(fx["resources_ttl"], "resource")
    hub.ingest(fx["observation_ttl"], "observation")
    hub.register_party(USER, ["allowed_party"])
    hub.register_party(ALICE, ["consenting_party"])
    hub.declare_ownership(ALICE, [fx["sensor"]])

    hub.register_interest(USER, DISCOVER, KNOW_AREA)
    assert hub.query(USER, fx["bbox_query"]) == []

    outcome = hub.request_access(USER, DISCOVER, KNOW_AREA, [fx["sensor"]])
    assert outcome["granted"] == [] and len(outcome["pending"]) == 1
    request = outcome["pending"][0]["id"]
    assert [r["id"] for r in hub.consent_requests(ALICE, "pending")] == [request]

    try:
        hub.grant(ALICE, request, T0 - dt.timedelta(hours=1))
    except privgraph.HubFailure as e:
        assert "not in the future" in str(e), e
    else:
        raise AssertionError("a grant expiring in the past was accepted")

    perm = hub.grant(ALICE, request, T0 + dt.timedelta(hours=1))
    for mode in ("rewrite", "postfilter"):
        rows = hub.query(USER, fx["bbox_query"], mode)
        assert rows == [{"sensor": f"<{fx['sensor']}>"}], rows
    assert "DiscoverSensors" in hub.explain(USER, fx["bbox_query"])

    hub.advance(3600)
    assert hub.query(USER, fx["bbox_query"]) == []

    hub.set_time(T0)
    hub.revoke(ALICE, perm["id"])
    assert hub.query(USER, fx["bbox_query"]) == []

    try:
        hub.ingest(fx["resources_ttl"], "resource", user=USER)
    except PermissionError:
        pass
    else:
        raise AssertionError("an allowed party wrote resources")

    assert not [f for f in hub.lint() if f["severity"] == "Error"]
    assert privgraph.is_subclass(
        "iot-taxonomy:soundSensor", "http://www.w3.org/ns/ssn/System"
    )
    assert "soundSensor" in privgraph.turtle_to_nquads(fx["resources_ttl"], "resource")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "hub.nq"
        hub.snapshot(path)
        other = privgraph.Hub(ADMIN, now=T0)
        other.restore(path)
        assert other.to_nquads() == hub.to_nquads()

    print("python smoke test ok")


if __name__ == "__main__":
    main()
