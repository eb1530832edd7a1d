import json
import urllib.error
import urllib.request

import pytest

from storyarc.service import start_background

from test_generation import table_shaped_request


@pytest.fixture(scope="module")
def server_url(tiny_bundle):
    server, _thread = start_background(tiny_bundle, port=0)
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def get(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, resp.read()


def post(url, body: bytes):
    req = urllib.request.Request(url, data=body,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


def test_health(server_url):
    status, body = get(server_url + "/health")
    assert status == 200
    assert json.loads(body) == {"status": "ok"}


def test_labels(server_url, labels):
    status, body = get(server_url + "/labels")
    assert status == 200
    obj = json.loads(body)
    assert obj["plutchik_labels"] == list(labels.plutchik_labels)
    assert len(obj["maslow_labels"]) == 5
    assert len(obj["reiss_labels"]) == 19


def test_generate_happy_path(server_url, labels):
    body = json.dumps(table_shaped_request(labels)).encode()
    status, raw = post(server_url + "/generate", body)
    assert status == 200
    obj = json.loads(raw)
    assert len(obj["story"]) == 5
    assert obj["story"][0] == "tom found a ball ."
    assert len(obj["traces"]) == 4
    trace = obj["traces"][0]
    assert len(trace["slot_labels"]) == 32
    assert len(trace["psy_attention"]) == len(trace["tokens"])
    assert len(trace["char_gate"]) == len(trace["tokens"])
    assert len(trace["selected_characters"]) == len(trace["tokens"])
    assert obj["seed"] == 0


def test_generate_is_byte_identical_for_greedy(server_url, labels):
    body = json.dumps(table_shaped_request(labels)).encode()
    _, first = post(server_url + "/generate", body)
    _, second = post(server_url + "/generate", body)
    assert first == second


def test_wrong_arc_length_is_422_with_field(server_url, labels):
    obj = table_shaped_request(labels)
    obj["plutchik_arcs"][1] = obj["plutchik_arcs"][1][:3]
    status, raw = post(server_url + "/generate", json.dumps(obj).encode())
    assert status == 422
    err = json.loads(raw)["error"]
    assert err["code"] == "ArcLengthMismatch"
    assert err["field"] == "plutchik_arcs[1]"


def test_unknown_label_is_422(server_url, labels):
    obj = table_shaped_request(labels, reiss=["fame"])
    status, raw = post(server_url + "/generate", json.dumps(obj).encode())
    assert status == 422
    assert json.loads(raw)["error"]["code"] == "UnknownLabel"


def test_malformed_json_is_400(server_url):
    status, raw = post(server_url + "/generate", b"{broken")
    assert status == 400
    assert json.loads(raw)["error"]["code"] == "MalformedJSON"


def test_unknown_path_is_404(server_url):
    status, _ = post(server_url + "/nope", b"{}")
    assert status == 404
