import json
import threading
import time
import urllib.error
import urllib.request

import jsonschema
import numpy as np
import pytest

from manifoldplan import serve as srv
from manifoldplan import world as wd

from conftest import PLANAR_T


@pytest.fixture(scope="module")
def schema():
    with open(srv.api_schema_path(), "r", encoding="utf-8") as fh:
        return json.load(fh)


def _validator(schema, name):
    return jsonschema.Draft202012Validator({"$ref": f"#/$defs/{name}", "$defs": schema["$defs"]})


@pytest.fixture(scope="module")
def server(small_planar_model, arm, two_pillars_scene, tmp_path_factory):
    static = tmp_path_factory.mktemp("static")
    (static / "index.html").write_text("<!doctype html><title>explorer</title>")
    state = srv.SessionState(model=small_planar_model, arm=arm, scene=two_pillars_scene)
    http = srv.make_server(state, port=0, static_dir=static)
    thread = threading.Thread(target=http.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{http.server_address[1]}"
    yield base, state
    http.shutdown()
    http.server_close()


def _get(base, path):
    req = urllib.request.Request(base + path)
    with urllib.request.urlopen(req, timeout=30) as resp:
        return resp.status, dict(resp.headers), resp.read()


def _post(base, path, body):
    data = json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data,
                                 headers={"Content-Type": "application/json"}, method="POST")
    with urllib.request.urlopen(req, timeout=30) as resp:
        return resp.status, dict(resp.headers), resp.read()


def _expect_error(fn, *args):
    try:
        fn(*args)
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode())
    raise AssertionError("expected an HTTP error")


def test_meta(server, schema):
    base, _ = server
    status, headers, body = _get(base, "/api/meta")
    assert status == 200
    assert headers["Access-Control-Allow-Origin"] == "*"
    doc = json.loads(body)
    _validator(schema, "meta_response").validate(doc)
    assert doc["latent_dim"] == 1
    assert doc["z_range"] == [-1.28, 1.28]
    assert len(doc["scene"]["obstacles"]) == 2
    assert doc["T"] == PLANAR_T


def test_not_ready_returns_503():
    http = srv.make_server(srv.SessionState(), port=0)
    thread = threading.Thread(target=http.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{http.server_address[1]}"
    code, doc = _expect_error(_get, base, "/api/meta")
    assert code == 503 and "error" in doc
    http.shutdown()
    http.server_close()


def test_generate_deterministic_and_cached(server, schema):
    base, state = server
    status, _, body1 = _post(base, "/api/generate", {"z": [0.0], "finetune": False})
    assert status == 200
    _, _, body2 = _post(base, "/api/generate", {"z": [0.0], "finetune": False})
    assert body1 == body2
    doc = json.loads(body1)
    _validator(schema, "generate_response").validate(doc)
    assert ((0, ), False) in state.cache
    # sub-quantum z maps to the same cache cell
    _, _, body3 = _post(base, "/api/generate", {"z": [1e-5], "finetune": False})
    assert body3 == body1


def test_generate_latency(server):
    base, _ = server
    _post(base, "/api/generate", {"z": [0.123], "finetune": False})  # warm the process
    times = []
    for i in range(5):
        z = 0.2 + i * 0.01
        t0 = time.perf_counter()
        _post(base, "/api/generate", {"z": [z], "finetune": False})
        times.append(time.perf_counter() - t0)
    assert min(times) < 0.1


def test_generate_bad_inputs(server):
    base, _ = server
    code, _ = _expect_error(_post, base, "/api/generate", {"z": [0.1, 0.2]})
    assert code == 400
    code, _ = _expect_error(_post, base, "/api/generate", {"z": "nope"})
    assert code == 400
    code, _ = _expect_error(_post, base, "/api/generate", {"z": [float("nan")]})
    assert code == 400


def test_generate_clamps_extreme_z(server):
    base, _ = server
    status, _, body = _post(base, "/api/generate", {"z": [9.5]})
    assert status == 200
    assert json.loads(body)["z"] == [4.0]


def test_generate_finetune_resolves_collisions(server, schema):
    base, _ = server
    # scan for a colliding raw output, then ask for its fine-tuned version
    status, _, body = _get(base, "/api/sweep?count=24")
    records = json.loads(body)
    colliding = [r for r in records if not r["collision_free_raw"]]
    if not colliding:
        pytest.skip("model produced no colliding sweep points")
    z = colliding[0]["z"]
    status, _, body = _post(base, "/api/generate", {"z": z, "finetune": True})
    doc = json.loads(body)
    _validator(schema, "generate_response").validate(doc)
    assert doc["collision_free_refined"] in (True, False)  # explicit flag either way
    assert doc["finetune_iterations"] > 0


def test_sweep_contract(server, schema):
    base, _ = server
    status, _, body = _get(base, "/api/sweep?count=2")
    docs = json.loads(body)
    assert [d["z"][0] for d in docs] == [-1.28, 1.28]
    _validator(schema, "sweep_response").validate(docs)
    status, _, body = _get(base, "/api/sweep?count=9")
    zs = [d["z"][0] for d in json.loads(body)]
    assert zs == sorted(zs)
    code, _ = _expect_error(_get, base, "/api/sweep?count=1")
    assert code == 400
    code, _ = _expect_error(_get, base, "/api/sweep?count=65")
    assert code == 400


def test_sweep_has_multiple_homotopy_classes(server):
    base, _ = server
    _, _, body = _get(base, "/api/sweep?count=30")
    labels = {d["homotopy_raw"] for d in json.loads(body)}
    assert len(labels) >= 2


def test_scene_edit_cycle(server, schema):
    base, state = server
    _post(base, "/api/generate", {"z": [0.4]})
    before = json.loads(_post(base, "/api/generate", {"z": [0.4]})[2])
    v0 = state.scene_version

    # far-away obstacle: no collision flags change
    status, _, body = _post(base, "/api/scene/obstacles",
                            {"op": "add", "c": [40.0, 40.0], "r": 0.5})
    doc = json.loads(body)
    _validator(schema, "scene_edit_response").validate(doc)
    assert doc["scene_version"] == v0 + 1
    after = json.loads(_post(base, "/api/generate", {"z": [0.4]})[2])
    assert after["collision_free_raw"] == before["collision_free_raw"]
    assert after["scene_version"] == v0 + 1

    # blocking obstacle on this record's own tip path must flip its flag
    tip = after["tip_path"][len(after["tip_path"]) // 2]
    status, _, body = _post(base, "/api/scene/obstacles", {"op": "add", "c": tip, "r": 0.05})
    doc = json.loads(body)
    blocked = json.loads(_post(base, "/api/generate", {"z": [0.4]})[2])
    assert blocked["collision_free_raw"] is False

    # removing obstacles restores clearance for cached entries
    n = len(doc["scene"]["obstacles"])
    for idx in range(n - 1, 1, -1):
        _post(base, "/api/scene/obstacles", {"op": "remove", "index": idx})
    restored = json.loads(_post(base, "/api/generate", {"z": [0.4]})[2])
    assert restored["collision_free_raw"] == before["collision_free_raw"]

    code, _ = _expect_error(_post, base, "/api/scene/obstacles",
                            {"op": "add", "c": [0.0, 0.0], "r": -1.0})
    assert code == 400
    code, _ = _expect_error(_post, base, "/api/scene/obstacles", {"op": "warp"})
    assert code == 400


def test_scene_edit_revalidates_cache_without_dropping(server):
    base, state = server
    _post(base, "/api/generate", {"z": [-0.9]})
    keys_before = {k for k in state.cache if not k[1]}
    _post(base, "/api/scene/obstacles", {"op": "add", "c": [50.0, 50.0], "r": 0.3})
    keys_after = {k for k in state.cache if not k[1]}
    assert keys_before <= keys_after
    _post(base, "/api/scene/obstacles",
          {"op": "remove", "index": len(state.scene.obstacles) - 1})


def test_static_serving_and_traversal_guard(server):
    base, _ = server
    status, headers, body = _get(base, "/")
    assert status == 200
    assert b"explorer" in body
    assert headers["Content-Type"].startswith("text/html")
    code, _ = _expect_error(_get, base, "/../secrets.txt")
    assert code == 404


def test_unknown_api_endpoint(server):
    base, _ = server
    code, _ = _expect_error(_get, base, "/api/warp")
    assert code == 404
