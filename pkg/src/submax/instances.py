"""Instance files and random instance generators.

An instance file is JSON::

    {"version": 1, "n": 8, "seed": 7,
     "function": {"kind": "cut", "edges": [[0, 1, 0.42], ...]},
     "constraint": {"kind": "cardinality", "k": 3},
     "generator": {"kind": "cut", "n": 8, "density": 0.5, "seed": 7}}
"""
import json
from dataclasses import dataclass, field

import numpy as np

from . import polytopes, setfn

FORMAT_VERSION = 1
FUNCTION_KINDS = ("cut", "directed-cut", "coverage", "facility-location")
CONSTRAINT_KINDS = ("box", "cardinality", "partition-matroid", "knapsack")


@dataclass
class InstanceSpec:
    n: int
    function: dict
    constraint: dict
    seed: int = 0
    generator: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def build(self):
        """Materialize ``(f, P)``."""
        return setfn.from_dict(self.function, self.n), polytopes.from_dict(self.constraint, self.n)

    def to_dict(self):
        return {"version": self.version, "n": self.n, "seed": self.seed,
                "function": self.function, "constraint": self.constraint,
                "generator": self.generator}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        version = d.get("version", FORMAT_VERSION)
        if version > FORMAT_VERSION:
            raise ValueError(f"instance format version {version} is newer than supported ({FORMAT_VERSION})")
        missing = [k for k in ("n", "function", "constraint") if k not in d]
        if missing:
            raise ValueError(f"instance is missing fields: {', '.join(missing)}")
        return cls(int(d["n"]), d["function"], d["constraint"], int(d.get("seed", 0)),
                   d.get("generator", {}), version)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


def _unit_weights(rng, size):
    # uniform on (0, 1]
    return 1.0 - rng.random(size)


def _function_spec(kind, n, params, rng):
    if kind in ("cut", "directed-cut"):
        density = float(params.get("density", 0.5))
        if kind == "cut":
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        else:
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        keep = rng.random(len(pairs)) < density
        chosen = [pq for pq, k in zip(pairs, keep) if k]
        w = _unit_weights(rng, len(chosen))
        return {"kind": kind, "edges": [[int(a), int(b), float(x)] for (a, b), x in zip(chosen, w)]}
    if kind == "coverage":
        m = int(params.get("universe", 2 * n))
        density = float(params.get("density", 0.2))
        inc = rng.random((n, m)) < density
        # every element covers at least one item
        for u in range(n):
            if not inc[u].any():
                inc[u, rng.integers(m)] = True
        w = _unit_weights(rng, m)
        return {"kind": kind, "sets": [np.flatnonzero(r).tolist() for r in inc], "weights": w.tolist()}
    if kind == "facility-location":
        clients = int(params.get("clients", n))
        return {"kind": kind, "utility": _unit_weights(rng, (clients, n)).tolist()}
    raise ValueError(f"unknown instance kind {kind!r}")


def constraint_spec(kind, n, params, rng):
    """Random constraint of the given kind."""
    if kind == "box":
        return {"kind": "box"}
    if kind == "cardinality":
        return {"kind": kind, "k": int(params.get("k", max(1, n // 3)))}
    if kind == "partition-matroid":
        nblocks = int(params.get("blocks", max(2, n // 3)))
        owner = rng.integers(nblocks, size=n)
        blocks = [np.flatnonzero(owner == b).tolist() for b in range(nblocks)]
        blocks = [b for b in blocks if b]
        cap = int(params.get("capacity", 1))
        return {"kind": kind, "blocks": blocks, "capacities": [cap] * len(blocks)}
    if kind == "knapsack":
        w = _unit_weights(rng, n)
        frac = float(params.get("budget_fraction", 0.35))
        budget = max(frac * float(w.sum()), float(w.max()))
        return {"kind": kind, "weights": w.tolist(), "budget": budget}
    raise ValueError(f"unknown constraint kind {kind!r}")


def generate_instance(kind, n, params=None, seed=0, constraint="cardinality", constraint_params=None):
    """Reproducible random instance; every random weight is drawn from (0, 1]."""
    params = dict(params or {})
    constraint_params = dict(constraint_params or {})
    if kind not in FUNCTION_KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {FUNCTION_KINDS}")
    if constraint not in CONSTRAINT_KINDS:
        raise ValueError(f"unknown constraint kind {constraint!r}; expected one of {CONSTRAINT_KINDS}")
    n = int(n)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    fspec = _function_spec(kind, n, params, rng)
    cspec = constraint_spec(constraint, n, constraint_params, rng)
    gen = {"kind": kind, "n": n, "seed": int(seed), "params": params,
           "constraint": constraint, "constraint_params": constraint_params}
    return InstanceSpec(n, fspec, cspec, int(seed), gen)


def corpus(count_per_cell=9, sizes=(6, 7, 8, 9, 10), kinds=("cut", "coverage"),
           constraints=("cardinality", "partition-matroid", "knapsack"), base_seed=0):
    """A deterministic grid of small instances used for guarantee checks."""
    specs = []
    idx = 0
    for kind in kinds:
        for cons in constraints:
            for j in range(count_per_cell):
                n = sizes[j % len(sizes)]
                specs.append(generate_instance(kind, n, seed=base_seed + idx, constraint=cons))
                idx += 1
    return specs
