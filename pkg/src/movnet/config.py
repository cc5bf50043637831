"""Experiment configuration documents and the built-in fixtures."""

import json
import re
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .consensus import DEFAULT_THRESHOLD, ProtocolParams
from .digraph import WeightedDigraph
from .exceptions import ConfigError, MovnetError
from .neighborhood import MODES, LinkageSpec, uniform_positions

__all__ = ["ExperimentConfig", "FIXTURES", "fixture", "trial_seed", "initial_rng"]

_UNIFORM_RE = re.compile(r"^\s*uniform\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)\s*$")


def trial_seed(master_seed, index):
    """Seed of trial ``index``: first 64-bit word of ``SeedSequence([master_seed, index])``."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def initial_rng(seed):
    """Generator for drawing a trial's initial states and positions.

    Kept separate from the trial's own stream so that ``run_trial`` can be
    re-run from the recorded seed with the recorded initial conditions.
    """
    return np.random.default_rng([int(seed), 1])


@dataclass(frozen=True)
class ExperimentConfig:
    graph: WeightedDigraph
    linkage: LinkageSpec
    epsilon: float
    t_max: int = 20000
    trials: int = 500
    master_seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    x0: Union[tuple, str] = "spread"
    pos0: Union[tuple, str] = "uniform"
    burn_in: int = 1000
    force_epsilon: bool = False
    skip_assumption_checks: bool = False
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        n, m = self.linkage.n, self.graph.m
        for key in ("t_max", "trials", "burn_in"):
            value = getattr(self, key)
            if int(value) != value or value < (0 if key == "burn_in" else 1):
                raise ConfigError(f"must be a positive integer, got {value!r}", field=key)
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ConfigError("must be a non-negative integer", field="master_seed")
        if not self.threshold > 0:
            raise ConfigError("must be positive", field="threshold")
        if isinstance(self.x0, str):
            if self.x0 != "spread" and not _UNIFORM_RE.match(self.x0):
                raise ConfigError(f"unknown generator {self.x0!r}", field="x0")
        else:
            object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
            if len(self.x0) != n or not np.all(np.isfinite(self.x0)):
                raise ConfigError(f"needs {n} finite values", field="x0")
        if isinstance(self.pos0, str):
            if self.pos0 != "uniform":
                raise ConfigError(f"unknown generator {self.pos0!r}", field="pos0")
        else:
            object.__setattr__(self, "pos0", tuple(int(v) for v in self.pos0))
            if len(self.pos0) != n or not all(0 <= p < m for p in self.pos0):
                raise ConfigError(f"needs {n} node indices in [0, {m})", field="pos0")
        try:
            self.params()
        except MovnetError as exc:
            raise ConfigError(str(exc), field="epsilon") from exc

    @property
    def n(self):
        return self.linkage.n

    @property
    def m(self):
        return self.graph.m

    def params(self):
        return ProtocolParams.for_spec(self.linkage, self.epsilon, force=self.force_epsilon)

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self

    def resolve_x0(self, rng):
        if not isinstance(self.x0, str):
            return np.array(self.x0)
        if self.x0 == "spread":
            return np.arange(self.n, dtype=float)
        lo, hi = (float(v) for v in _UNIFORM_RE.match(self.x0).groups())
        return rng.uniform(lo, hi, self.n)

    def resolve_pos0(self, rng):
        if not isinstance(self.pos0, str):
            return np.array(self.pos0, dtype=np.int64)
        return uniform_positions(self.n, self.m, rng)

    def initial_conditions(self, seed):
        rng = initial_rng(seed)
        x0 = self.resolve_x0(rng)
        return x0, self.resolve_pos0(rng)

    def to_dict(self):
        return {
            "name": self.name,
            "graph": {"m": self.m, "weights": self.graph.weights.ravel().tolist()},
            "linkage": {
                "n": self.n,
                "B": self.linkage.B.ravel().tolist(),
                "P": self.linkage.P.ravel().tolist(),
                "mode": self.linkage.mode,
            },
            "epsilon": self.epsilon,
            "t_max": self.t_max,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "threshold": self.threshold,
            "burn_in": self.burn_in,
            "x0": self.x0 if isinstance(self.x0, str) else list(self.x0),
            "pos0": self.pos0 if isinstance(self.pos0, str) else list(self.pos0),
            "overrides": {
                "force_epsilon": self.force_epsilon,
                "skip_assumption_checks": self.skip_assumption_checks,
            },
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("top level must be an object")
        graph = _section(doc, "graph")
        linkage = _section(doc, "linkage")
        m = _int(graph, "m", "graph.m")
        n = _int(linkage, "n", "linkage.n")
        W = _matrix(graph, "weights", m, "graph.weights")
        B = _matrix(linkage, "B", n, "linkage.B")
        P = _matrix(linkage, "P", n, "linkage.P")
        mode = linkage.get("mode", "symmetric")
        if mode not in MODES:
            raise ConfigError(f"must be one of {MODES}", field="linkage.mode")
        try:
            g = WeightedDigraph(W)
        except (MovnetError, ValueError) as exc:
            raise ConfigError(str(exc), field="graph.weights") from exc
        try:
            spec = LinkageSpec(B, P, mode)
        except (MovnetError, ValueError) as exc:
            raise ConfigError(str(exc), field="linkage") from exc
        if "epsilon" not in doc:
            raise ConfigError("missing", field="epsilon")
        overrides = doc.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ConfigError("must be an object", field="overrides")
        unknown = set(doc) - {
            "name", "graph", "linkage", "epsilon", "t_max", "trials", "master_seed",
            "threshold", "burn_in", "x0", "pos0", "overrides",
        }
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        kwargs = {}
        for key in ("t_max", "trials", "master_seed", "burn_in"):
            if key in doc:
                kwargs[key] = _int(doc, key, key)
        for key in ("epsilon", "threshold"):
            if key in doc:
                try:
                    kwargs[key] = float(doc[key])
                except (TypeError, ValueError):
                    raise ConfigError("must be a number", field=key) from None
        for key in ("x0", "pos0"):
            if key in doc:
                kwargs[key] = doc[key] if isinstance(doc[key], str) else tuple(doc[key])
        return cls(
            graph=g,
            linkage=spec,
            name=str(doc.get("name", "custom")),
            force_epsilon=bool(overrides.get("force_epsilon", False)),
            skip_assumption_checks=bool(overrides.get("skip_assumption_checks", False)),
            **kwargs,
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, line=exc.lineno) from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _section(doc, key):
    if key not in doc:
        raise ConfigError("missing section", field=key)
    if not isinstance(doc[key], dict):
        raise ConfigError("must be an object", field=key)
    return doc[key]


def _int(doc, key, name):
    if key not in doc:
        raise ConfigError("missing", field=name)
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"must be an integer, got {value!r}", field=name)
    return value


def _matrix(doc, key, k, name):
    if key not in doc:
        raise ConfigError("missing", field=name)
    flat = doc[key]
    if not isinstance(flat, list) or len(flat) != k * k:
        raise ConfigError(f"must be a flat row-major list of {k}*{k} numbers", field=name)
    try:
        return np.array(flat, dtype=float).reshape(k, k)
    except (TypeError, ValueError):
        raise ConfigError("entries must be numbers", field=name) from None


DEFAULT_ARCS = [
    (0, 0, 1.0),
    (0, 1, 2.0),
    (1, 2, 1.0),
    (1, 3, 3.0),
    (2, 3, 2.0),
    (3, 4, 1.0),
    (3, 0, 1.0),
    (4, 0, 2.0),
    (4, 2, 1.0),
]


def _default():
    return ExperimentConfig(
        graph=WeightedDigraph.from_arcs(5, DEFAULT_ARCS),
        linkage=LinkageSpec.uniform(4, b=1.0, p=0.5),
        epsilon=0.1,
        t_max=20000,
        trials=500,
        x0=(0.0, 1.0, 2.0, 3.0),
        name="default",
    )


def _pair():
    # one node, two agents that always link: xi shrinks by (1 - 2 eps)**2 per step
    return ExperimentConfig(
        graph=WeightedDigraph(np.ones((1, 1))),
        linkage=LinkageSpec.uniform(2, b=1.0, p=1.0),
        epsilon=0.1,
        t_max=200,
        trials=1,
        x0=(-1.0, 1.0),
        pos0=(0, 0),
        burn_in=0,
        name="pair",
    )


FIXTURES = {"default": _default, "pair": _pair}


def fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ConfigError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
