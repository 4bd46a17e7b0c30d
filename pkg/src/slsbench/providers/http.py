"""Generic HTTP adapter for functions already deployed behind an endpoint.

Deployment here is bookkeeping: the function must exist remotely and its URL
is supplied through configuration, keyed by workload id. Invocation POSTs the
payload and parses the reply document. There is no remote lifecycle control,
so eviction and log fetching are refused rather than faked.
"""

from __future__ import annotations

import time
from typing import Any

import requests

from slsbench.errors import ConfigurationError, NotFoundError, UnsupportedQueryError
from slsbench.packaging import PackageArtifact
from slsbench.platforms import DeploymentSpec, PlatformProfile
from slsbench.providers.base import (
    DeploymentHandle,
    InvocationRecord,
    LogEvent,
    Provider,
    function_id_for,
    parse_handler_reply,
)


class HttpProvider(Provider):
    def __init__(
        self,
        profile: PlatformProfile,
        endpoints: dict[str, str],
        headers: dict[str, str] | None = None,
        auth_token: str = "",
        session: requests.Session | None = None,
    ):
        self.name = "http"
        self.profile = profile
        self._endpoints = dict(endpoints)
        self._headers = dict(headers or {})
        if auth_token:
            self._headers["Authorization"] = f"Bearer {auth_token}"
        self._session = session or requests.Session()
        self._live: dict[str, DeploymentHandle] = {}
        self._schemas: dict[str, tuple[str, ...]] = {}

    def deploy(self, artifact: PackageArtifact, spec: DeploymentSpec) -> DeploymentHandle:
        self.check_spec(artifact, spec)
        workload_id = artifact.manifest.id
        if workload_id not in self._endpoints:
            raise ConfigurationError(
                f"no endpoint configured for workload {workload_id!r}; "
                "the http provider only addresses pre-deployed functions"
            )
        function_id = function_id_for(artifact, spec)
        if function_id in self._live:
            return self._live[function_id]
        handle = DeploymentHandle(
            provider=self.name,
            function_id=function_id,
            spec=spec,
            endpoint=self._endpoints[workload_id],
            created_at=time.time(),
        )
        self._live[function_id] = handle
        self._schemas[function_id] = artifact.manifest.expected_output_schema
        return handle

    def invoke(self, handle: DeploymentHandle, payload: dict[str, Any], timeout_s: float) -> InvocationRecord:
        if handle.function_id not in self._live:
            raise NotFoundError(f"function {handle.function_id} is not deployed")
        schema = self._schemas[handle.function_id]
        wall = time.time()
        t_start = self.now_ns()
        try:
            resp = self._session.post(
                handle.endpoint, json=payload, headers=self._headers, timeout=timeout_s
            )
        except requests.Timeout:
            return InvocationRecord(
                handle_ref=handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=t_start + int(timeout_s * 1e9),
                status="timeout",
                wall_start=wall,
                detail=f"no reply within {timeout_s} s",
            )
        except requests.RequestException as exc:
            return InvocationRecord(
                handle_ref=handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=self.now_ns(),
                status="error",
                wall_start=wall,
                detail=f"transport failure: {exc}",
            )
        t_end = self.now_ns()

        if resp.status_code >= 400:
            return InvocationRecord(
                handle_ref=handle.function_id,
                seq=0,
                t_start=t_start,
                t_end=t_end,
                status="error",
                wall_start=wall,
                detail=f"HTTP {resp.status_code}: {resp.text[:4096]}",
            )
        reply = parse_handler_reply(resp.text, schema)
        return InvocationRecord(
            handle_ref=handle.function_id,
            seq=0,
            t_start=t_start,
            t_end=t_end,
            status=reply.status,
            result=reply.result,
            cold_evidence=reply.cold_evidence,
            exec_ms_reported=reply.exec_ms,
            wall_start=wall,
            detail=reply.detail,
        )

    def teardown(self, handle: DeploymentHandle) -> None:
        if handle.function_id not in self._live:
            raise NotFoundError(f"function {handle.function_id} is not deployed")
        del self._live[handle.function_id]
        del self._schemas[handle.function_id]

    def force_cold(self, handle: DeploymentHandle) -> None:
        raise UnsupportedQueryError(
            "the http provider cannot force cold starts on a pre-deployed endpoint"
        )

    def fetch_logs(self, handle: DeploymentHandle, since_ns: int = 0) -> list[LogEvent]:
        raise UnsupportedQueryError("the http provider has no access to provider-side logs")
