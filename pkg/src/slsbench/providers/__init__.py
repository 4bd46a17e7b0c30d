"""Provider adapters: the contract, the generic HTTP client, the local simulator."""

from slsbench.providers.base import (
    DeploymentHandle,
    InvocationRecord,
    LogEvent,
    Provider,
    function_id_for,
    parse_handler_reply,
)
from slsbench.providers.http import HttpProvider
from slsbench.providers.localsim import (
    LocalSimProvider,
    SimInstance,
    SimModel,
    load_sim_model,
    sim_cold_latency,
)

__all__ = [
    "DeploymentHandle",
    "HttpProvider",
    "InvocationRecord",
    "LocalSimProvider",
    "LogEvent",
    "Provider",
    "SimInstance",
    "SimModel",
    "function_id_for",
    "load_sim_model",
    "parse_handler_reply",
    "sim_cold_latency",
]
