import pytest
from fastapi.testclient import TestClient

from adaptiflow.errors import AddressInUse
from adaptiflow.events import ConditionalEvent, NotificationStrategy, Subscription, UnHealthyDatabaseEvaluator
from adaptiflow.metrics import LocalDatabaseMetricsCollector, StaticCollector
from adaptiflow.node import NotificationBinding
from adaptiflow.service.app import NodeServer, create_node_app
from adaptiflow.teastore import standard_mesh


@pytest.fixture
def wired(clock):
    mesh = standard_mesh(clock)
    persistence = mesh["persistence"]
    persistence.register_collector(LocalDatabaseMetricsCollector(persistence.sim_db, "local-db"))
    persistence.register_event(
        ConditionalEvent(
            "database_unavailable", persistence.collectors["local-db"], UnHealthyDatabaseEvaluator()
        )
    )
    persistence.subscribe(
        Subscription("database_unavailable", ["EnableCache"], strategy=NotificationStrategy(2, True))
    )
    return mesh


def client_for(node):
    return TestClient(create_node_app(node))


def test_fresh_sample_endpoint_collects_on_demand(wired, clock):
    clock.advance_to(1234)
    client = client_for(wired["persistence"])
    doc = client.get("/adaptiflow/metrics/local-db").json()
    assert doc["source"] == "persistence"
    assert doc["collected_at"] == 1234
    assert doc["values"]["network_ok"] is True


def test_metrics_index_returns_latest_samples(wired):
    node = wired["persistence"]
    client = client_for(node)
    assert client.get("/adaptiflow/metrics").json() == {"node": "persistence", "samples": {}}
    client.get("/adaptiflow/metrics/local-db")
    index = client.get("/adaptiflow/metrics").json()
    assert list(index["samples"]) == ["local-db"]


def test_unknown_collector_404(wired):
    assert client_for(wired["persistence"]).get("/adaptiflow/metrics/ghost").status_code == 404


def test_action_endpoint_applies_and_reports(wired):
    client = client_for(wired["webui"])
    doc = client.post("/adaptiflow/actions/EnableMaintenanceMode").json()
    assert doc["status"] == "applied"
    assert wired["webui"].state.get("maintenance") is True
    again = client.post("/adaptiflow/actions/EnableMaintenanceMode").json()
    assert again["status"] == "already_in_state"


def test_unknown_action_404(wired):
    assert client_for(wired["webui"]).post("/adaptiflow/actions/Ghost").status_code == 404


def test_action_listing_includes_level_and_mode(wired):
    listing = client_for(wired["auth"]).get("/adaptiflow/actions").json()
    assert {"id": "OpenCircuitBreaker", "level": "business", "mode": "sync"} in listing


def test_notify_endpoint_arms_downstream(wired):
    auth = wired["auth"]
    auth.bind_notification(NotificationBinding("malicious_traffic", arm=True))
    client = client_for(auth)
    response = client.post(
        "/adaptiflow/events/notify",
        json={"event_name": "malicious_traffic", "origin": "webui", "sent_at": 7, "payload": {"attack": "ddos"}},
    )
    assert response.json()["status"] == "delivered"
    assert response.json()["armed"] is True
    assert auth.state.get("ddos_armed") is True


def test_notify_rejects_empty_event_name(wired):
    client = client_for(wired["auth"])
    response = client.post(
        "/adaptiflow/events/notify", json={"event_name": "", "origin": "webui", "sent_at": 0}
    )
    assert response.status_code == 422


def test_events_endpoint_exposes_subscriber_state(wired):
    node = wired["persistence"]
    client = client_for(node)
    listing = client.get("/adaptiflow/events").json()
    assert listing[0]["name"] == "database_unavailable"
    assert listing[0]["subscriptions"][0]["strategy"] == {"count": 2, "consecutive": True}
    assert listing[0]["subscriptions"][0]["fired"] is False


def test_fault_endpoint_drives_collector_readings(wired):
    node = wired["persistence"]
    client = client_for(node)
    assert client.post("/sim/fault", json={"kind": "db_down"}).status_code == 200
    doc = client.get("/adaptiflow/metrics/local-db").json()
    assert doc["values"]["network_ok"] is False
    assert client.post("/sim/fault", json={"kind": "db_up"}).status_code == 200


def test_fault_endpoint_rejects_wrong_target_and_bad_kind(wired):
    client = client_for(wired["persistence"])
    assert client.post("/sim/fault", json={"kind": "db_down", "target": "webui"}).status_code == 400
    assert client.post("/sim/fault", json={"kind": "meteor"}).status_code == 400


def test_business_endpoints_reflect_adaptation_state(wired):
    webui_client = client_for(wired["webui"])
    ok = webui_client.get("/storefront").json()
    assert ok["status"] == "ok"
    wired["webui"].apply_action("EnableMaintenanceMode", now=0)
    maintenance = webui_client.get("/storefront").json()
    assert maintenance["status"] == "maintenance"
    wired["webui"].apply_action("DisableMaintenanceMode", now=1)
    wired["webui"].apply_action("OpenCircuitBreaker", now=2)
    rejected = webui_client.get("/storefront").json()
    assert rejected["status"] == "rejected"


def test_cart_and_login_endpoints_exist(wired):
    assert client_for(wired["webui"]).get("/cart").json()["status"] == "ok"
    assert client_for(wired["persistence"]).get("/cart").json()["status"] == "ok"
    assert client_for(wired["auth"]).post("/login").json()["body"]["token"].startswith("session-")


def test_recommend_endpoint_honors_power_mode(wired):
    client = client_for(wired["recommender"])
    assert client.get("/recommend").json()["body"]["recommendations"]
    wired["recommender"].apply_action("LowPowerMode", now=0)
    assert client.get("/recommend").json()["body"]["recommendations"] == []


def test_image_endpoint_path_parameter(wired):
    client = client_for(wired["image"])
    doc = client.get("/image/42").json()
    assert doc["body"]["url"].endswith("/42")


def test_socket_server_round_trip(wired):
    server = NodeServer(wired["persistence"]).start()
    try:
        import httpx

        doc = httpx.get(f"{server.address}/adaptiflow/metrics/local-db", timeout=5).json()
        assert doc["source"] == "persistence"
    finally:
        server.stop()


def test_socket_address_in_use(wired):
    server = NodeServer(wired["persistence"]).start()
    try:
        with pytest.raises(AddressInUse):
            NodeServer(wired["webui"], port=server.port).start()
    finally:
        server.stop()


def test_static_collector_sample_over_http(clock):
    mesh = standard_mesh(clock)
    node = mesh["image"]
    node.register_collector(StaticCollector("probe", {"ready": True, "load": 0.5}))
    doc = client_for(node).get("/adaptiflow/metrics/probe").json()
    assert doc["values"] == {"ready": True, "load": 0.5}
