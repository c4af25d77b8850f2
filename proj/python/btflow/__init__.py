"""Behavior trees compiled to deterministic reactor networks."""

import json

from ._btflow import (
    RunError,
    check,
    execution_order,
    fuzz,
    generate,
    plant,
    pretty_print,
    to_dot,
    translate,
)
from ._btflow import run as _run

__all__ = [
    "RunError",
    "check",
    "execution_order",
    "fuzz",
    "generate",
    "plant",
    "pretty_print",
    "run",
    "to_dot",
    "translate",
    "trace_events",
]


def run(source, scenario, oracle=False, externs=None, plant_callbacks=True):
    """Run `source` on `scenario` (JSON text or dict).

    `externs` maps callback names to Python functions taking a dict with
    node, label, time, sources and states, and returning a dict with status
    ("success", "failure" or "running") and optional emits/states.
    """
    if not isinstance(scenario, str):
        scenario = json.dumps(scenario)
    return _run(source, scenario, oracle, externs or {}, plant_callbacks)


def trace_events(trace):
    """Decode a JSON-lines trace into a list of dicts."""
    return [json.loads(line) for line in trace.splitlines() if line]
