"""Danger-aware grid planning: LLM danger scores fused into a repulsive cost field."""

import json

from ._core import (
    Backend,
    Error,
    NoPathError,
    ParseError,
    PreconditionError,
    SensorError,
    StateError,
    ValidationError,
    distance_transform,
    posterior_mean,
    update,
)
from ._core import Session as _Session
from ._core import compare as _compare

__all__ = [
    "Backend",
    "Error",
    "NoPathError",
    "ParseError",
    "PreconditionError",
    "SensorError",
    "Session",
    "StateError",
    "ValidationError",
    "compare",
    "distance_transform",
    "posterior_mean",
    "update",
]


class Session:
    """A planning session; methods return decoded JSON."""

    def __init__(self, core):
        self._core = core

    @classmethod
    def from_file(cls, path):
        return cls(_Session.from_file(str(path)))

    @classmethod
    def from_scenario(cls, scenario):
        return cls(_Session.from_text(json.dumps(scenario)))

    @classmethod
    def load(cls, path):
        return cls(_Session.load(str(path)))

    def prompt(self, text, backend=None, trust_n=None):
        return json.loads(self._core.prompt(text, backend or Backend(), trust_n))

    def plan(self, gamma=None, w1=None, w2=None):
        return json.loads(self._core.plan(gamma, w1, w2))

    def undo(self):
        return json.loads(self._core.undo())

    def snapshot(self):
        return json.loads(self._core.snapshot())

    def save(self, path):
        self._core.save(str(path))

    def potential(self):
        return self._core.potential()

    def edf(self):
        return self._core.edf()

    def gains(self):
        return self._core.gains()


def compare(scenario_path, prompts, backend=None):
    """Runs each (label, text) prompt in a fresh session plus a gamma=0 baseline."""
    return json.loads(_compare(str(scenario_path), list(prompts), backend or Backend()))
