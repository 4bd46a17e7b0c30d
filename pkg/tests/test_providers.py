import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from slsbench.errors import ConfigurationError, NotFoundError, PreconditionError, UnsupportedQueryError
from slsbench.platforms import DeploymentSpec, get_profile
from slsbench.providers import (
    HttpProvider,
    InvocationRecord,
    function_id_for,
    parse_handler_reply,
)


class _Endpoint(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        route = self.path.rstrip("/").rsplit("/", 1)[-1]
        if route == "slow":
            time.sleep(1.0)
            route = "ok"
        if route == "boom":
            body = b"backend exploded"
            self.send_response(500)
        elif route == "garbage":
            body = b"<html>not json</html>"
            self.send_response(200)
        elif route == "bare":
            body = json.dumps({"answer": 42}).encode()
            self.send_response(200)
        else:
            body = json.dumps(
                {
                    "result": {"value": 7},
                    "exec_ms": 3.5,
                    "first_run": True,
                    "metrics": {"extra": 1},
                }
            ).encode()
            self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def server_url():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Endpoint)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def make_provider(url, route="ok"):
    return HttpProvider(
        profile=get_profile("aws"),
        endpoints={"synthetic": f"{url}/{route}"},
    )


def good_spec():
    return DeploymentSpec(language_name="python", memory_mb=128, timeout_s=60)


# -- identity -----------------------------------------------------------------

def test_function_id_deterministic(synthetic_artifact):
    a = function_id_for(synthetic_artifact, good_spec())
    b = function_id_for(synthetic_artifact, good_spec())
    assert a == b
    assert len(a) == 16
    int(a, 16)


def test_function_id_tracks_spec(synthetic_artifact):
    base = function_id_for(synthetic_artifact, good_spec())
    bumped = function_id_for(
        synthetic_artifact, DeploymentSpec(language_name="python", memory_mb=256, timeout_s=60)
    )
    assert base != bumped


# -- reply parsing -------------------------------------------------------------

def test_parse_full_envelope():
    text = json.dumps({"result": {"v": 1}, "exec_ms": 2.5, "first_run": False, "metrics": {"m": 9}})
    reply = parse_handler_reply(text, ("v", "m"))
    assert reply.status == "ok"
    assert reply.result == {"v": 1, "m": 9}
    assert reply.exec_ms == 2.5
    assert reply.cold_evidence == "warm"


def test_parse_first_run_variants():
    assert parse_handler_reply('{"result": {}, "first_run": true}', ()).cold_evidence == "cold"
    assert parse_handler_reply('{"result": {}, "first_run": false}', ()).cold_evidence == "warm"
    assert parse_handler_reply('{"result": {}}', ()).cold_evidence == "unknown"
    # a truthy non-bool is not evidence
    assert parse_handler_reply('{"result": {}, "first_run": 1}', ()).cold_evidence == "unknown"


def test_parse_bare_document():
    reply = parse_handler_reply('{"answer": 42}', ("answer",))
    assert reply.status == "ok"
    assert reply.result == {"answer": 42}
    assert reply.exec_ms is None


def test_parse_garbage_keeps_raw():
    reply = parse_handler_reply("<html>oops</html>", ())
    assert reply.status == "error"
    assert reply.detail == "<html>oops</html>"


def test_parse_non_object_json():
    assert parse_handler_reply("[1, 2]", ()).status == "error"
    assert parse_handler_reply("3.5", ()).status == "error"


def test_parse_schema_enforcement():
    reply = parse_handler_reply('{"result": {"a": 1}}', ("a", "b", "c"))
    assert reply.status == "error"
    assert "b, c" in reply.detail
    assert '{"result": {"a": 1}}' in reply.detail
    assert reply.result == {"a": 1}  # partial result still surfaced


def test_parse_ignores_bad_exec_ms():
    reply = parse_handler_reply('{"result": {}, "exec_ms": "fast"}', ())
    assert reply.exec_ms is None


# -- invocation records ---------------------------------------------------------

def test_record_rejects_reversed_clock():
    with pytest.raises(ValueError):
        InvocationRecord(handle_ref="f", seq=1, t_start=10, t_end=5, status="ok")


def test_record_rejects_unknown_status():
    with pytest.raises(ValueError):
        InvocationRecord(handle_ref="f", seq=1, t_start=0, t_end=1, status="maybe")
    with pytest.raises(ValueError):
        InvocationRecord(handle_ref="f", seq=1, t_start=0, t_end=1, status="ok", cold_evidence="tepid")


def test_record_round_trip():
    record = InvocationRecord(
        handle_ref="f", seq=2, t_start=1_000_000, t_end=3_500_000, status="ok",
        result={"v": 1}, cold_evidence="cold", exec_ms_reported=1.5, wall_start=123.0,
    )
    assert InvocationRecord.from_dict(record.to_dict()) == record
    assert record.response_ms == pytest.approx(2.5)
    assert record.ok


# -- http adapter ----------------------------------------------------------------

def test_http_rejects_bad_spec_before_contact(synthetic_artifact):
    provider = HttpProvider(profile=get_profile("aws"), endpoints={})
    bad = DeploymentSpec(language_name="python", memory_mb=130, timeout_s=60)
    # validation runs first: no ConfigurationError about missing endpoints
    with pytest.raises(PreconditionError, match="memory"):
        provider.deploy(synthetic_artifact, bad)


def test_http_requires_configured_endpoint(synthetic_artifact):
    provider = HttpProvider(profile=get_profile("aws"), endpoints={"other": "http://x"})
    with pytest.raises(ConfigurationError, match="synthetic"):
        provider.deploy(synthetic_artifact, good_spec())


def test_http_happy_path(server_url, synthetic_artifact):
    provider = make_provider(server_url)
    handle = provider.deploy(synthetic_artifact, good_spec())
    record = provider.invoke(handle, {"n": 1}, timeout_s=5.0)
    assert record.status == "ok"
    assert record.result == {"value": 7, "extra": 1}
    assert record.exec_ms_reported == 3.5
    assert record.cold_evidence == "cold"
    assert record.response_ms > 0
    assert record.wall_start > 0


def test_http_deploy_idempotent(server_url, synthetic_artifact):
    provider = make_provider(server_url)
    first = provider.deploy(synthetic_artifact, good_spec())
    second = provider.deploy(synthetic_artifact, good_spec())
    assert first is second


def test_http_timeout_status(server_url, synthetic_artifact):
    provider = make_provider(server_url, route="slow")
    handle = provider.deploy(synthetic_artifact, good_spec())
    record = provider.invoke(handle, {}, timeout_s=0.2)
    assert record.status == "timeout"
    assert record.response_ms == pytest.approx(200.0)


def test_http_backend_error(server_url, synthetic_artifact):
    provider = make_provider(server_url, route="boom")
    handle = provider.deploy(synthetic_artifact, good_spec())
    record = provider.invoke(handle, {}, timeout_s=5.0)
    assert record.status == "error"
    assert "HTTP 500" in record.detail
    assert "backend exploded" in record.detail


def test_http_unparseable_reply(server_url, synthetic_artifact):
    provider = make_provider(server_url, route="garbage")
    handle = provider.deploy(synthetic_artifact, good_spec())
    record = provider.invoke(handle, {}, timeout_s=5.0)
    assert record.status == "error"
    assert "not json" in record.detail


def test_http_schema_mismatch_keeps_raw(server_url, tmp_path):
    from slsbench.packaging import WorkloadManifest, build_package

    tree = tmp_path / "w"
    tree.mkdir()
    manifest = WorkloadManifest(
        id="synthetic", language_name="python", handler="builtin:synthetic",
        expected_output_schema=("missing_field",),
    )
    artifact = build_package(tree, manifest, out_dir=tmp_path)
    provider = make_provider(server_url, route="bare")
    handle = provider.deploy(artifact, good_spec())
    record = provider.invoke(handle, {}, timeout_s=5.0)
    assert record.status == "error"
    assert "missing_field" in record.detail
    assert '"answer": 42' in record.detail


def test_http_transport_failure(synthetic_artifact):
    provider = HttpProvider(
        profile=get_profile("aws"),
        endpoints={"synthetic": "http://127.0.0.1:1/unroutable"},
    )
    handle = provider.deploy(synthetic_artifact, good_spec())
    record = provider.invoke(handle, {}, timeout_s=1.0)
    assert record.status == "error"
    assert "transport failure" in record.detail


def test_http_lifecycle_errors(server_url, synthetic_artifact):
    provider = make_provider(server_url)
    handle = provider.deploy(synthetic_artifact, good_spec())
    provider.teardown(handle)
    with pytest.raises(NotFoundError):
        provider.teardown(handle)
    with pytest.raises(NotFoundError):
        provider.invoke(handle, {}, timeout_s=1.0)


def test_http_refuses_lifecycle_queries(server_url, synthetic_artifact):
    provider = make_provider(server_url)
    handle = provider.deploy(synthetic_artifact, good_spec())
    with pytest.raises(UnsupportedQueryError):
        provider.force_cold(handle)
    with pytest.raises(UnsupportedQueryError):
        provider.fetch_logs(handle)
