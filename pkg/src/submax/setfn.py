"""Value-oracle set functions.

Subsets of a ground set ``{0, ..., n-1}`` are passed around as boolean
vectors of length ``n``.  Where a whole power set is needed it is indexed by
integer bitmask, with bit ``u`` standing for element ``u``.

All functions in the zoo evaluate a *batch* of subsets at once (a ``(k, n)``
boolean matrix).  Sums are accumulated term by term in a fixed order, so the
value of a subset does not depend on the batch it was evaluated in.
"""
import threading

import numpy as np

TABLE_MAX_N = 20
ENUM_MAX_N = 25
_CHUNK = 1 << 15


class SizeError(ValueError):
    """Raised when an exhaustive routine is asked to enumerate too many subsets."""


def subset_mask(n, ids=()):
    """Boolean membership vector of length ``n`` with ``ids`` set."""
    mask = np.zeros(n, dtype=bool)
    mask[list(ids)] = True
    return mask


def as_mask(S, n):
    mask = np.asarray(S, dtype=bool)
    if mask.shape != (n,):
        raise ValueError(f"subset mask must have length {n}, got shape {mask.shape}")
    return mask


def mask_to_int(mask):
    return int(sum(1 << int(u) for u in np.flatnonzero(mask)))


def int_to_mask(bits, n):
    return (int(bits) >> np.arange(n)) & 1 == 1


def bits_matrix(masks, n):
    """Rows of booleans for an array of integer bitmasks."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


class SetFunction:
    """Base class: a non-negative set function behind a counting value oracle."""

    kind = "abstract"

    def __init__(self, n):
        n = int(n)
        if n < 1:
            raise ValueError("ground set must have at least one element")
        self.n = n
        self._eval_count = 0
        self._lock = threading.Lock()

    # subclasses implement this on a (k, n) boolean matrix
    def _values(self, X):
        raise NotImplementedError

    @property
    def eval_count(self):
        return self._eval_count

    def reset_count(self):
        with self._lock:
            self._eval_count = 0

    def _charge(self, k):
        with self._lock:
            self._eval_count += int(k)

    def evaluate(self, S):
        """f(S) for a single subset; counts one oracle call."""
        X = as_mask(S, self.n)[None, :]
        self._charge(1)
        return float(self._values(X)[0])

    def evaluate_many(self, X):
        """f on every row of a boolean matrix; counts one call per row."""
        X = np.asarray(X, dtype=bool)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected a (k, {self.n}) boolean matrix, got {X.shape}")
        out = np.empty(X.shape[0])
        for lo in range(0, X.shape[0], _CHUNK):
            out[lo:lo + _CHUNK] = self._values(X[lo:lo + _CHUNK])
        self._charge(X.shape[0])
        return out

    def marginal(self, u, S):
        """f(S + u) - f(S); zero without any oracle call when ``u`` is in ``S``."""
        u = int(u)
        if not 0 <= u < self.n:
            raise IndexError(f"element {u} outside ground set of size {self.n}")
        S = as_mask(S, self.n)
        if S[u]:
            return 0.0
        Su = S.copy()
        Su[u] = True
        return self.evaluate(Su) - self.evaluate(S)

    def table(self):
        """All 2^n values, indexed by bitmask."""
        if self.n > ENUM_MAX_N:
            raise SizeError(f"cannot tabulate a function on {self.n} > {ENUM_MAX_N} elements")
        size = 1 << self.n
        out = np.empty(size)
        for lo in range(0, size, _CHUNK):
            masks = np.arange(lo, min(lo + _CHUNK, size), dtype=np.int64)
            out[lo:lo + len(masks)] = self._values(bits_matrix(masks, self.n))
        self._charge(size)
        return out

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


def _check_weights(w, what):
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"{what} must be finite and non-negative")
    return w


class GraphCut(SetFunction):
    """Weighted cut of an undirected graph: total weight of edges leaving S."""

    kind = "cut"
    directed = False

    def __init__(self, n, edges):
        super().__init__(n)
        edges = [tuple(e) for e in edges]
        self.tail = np.array([int(e[0]) for e in edges], dtype=np.int64)
        self.head = np.array([int(e[1]) for e in edges], dtype=np.int64)
        self.weight = _check_weights([e[2] if len(e) > 2 else 1.0 for e in edges], "edge weights")
        if len(edges) and (self.tail.min() < 0 or self.head.min() < 0
                           or max(self.tail.max(), self.head.max()) >= n):
            raise ValueError("edge endpoint outside the ground set")

    def _values(self, X):
        total = np.zeros(X.shape[0])
        for a, b, w in zip(self.tail, self.head, self.weight):
            if self.directed:
                crossing = X[:, a] & ~X[:, b]
            else:
                crossing = X[:, a] != X[:, b]
            total += w * crossing
        return total

    def to_dict(self):
        edges = [[int(a), int(b), float(w)] for a, b, w in zip(self.tail, self.head, self.weight)]
        return {"kind": self.kind, "edges": edges}


class DirectedCut(GraphCut):
    """Weight of arcs (a, b) with a in S and b outside S."""

    kind = "directed-cut"
    directed = True


class Coverage(SetFunction):
    """Weighted coverage: element u covers a subset of a weighted universe."""

    kind = "coverage"

    def __init__(self, sets, weights):
        super().__init__(len(sets))
        self.weights = _check_weights(weights, "universe weights")
        m = len(self.weights)
        self.incidence = np.zeros((self.n, m), dtype=bool)
        for u, items in enumerate(sets):
            for j in items:
                if not 0 <= int(j) < m:
                    raise ValueError(f"element {u} covers unknown universe item {j}")
                self.incidence[u, int(j)] = True

    def _values(self, X):
        total = np.zeros(X.shape[0])
        for j, w in enumerate(self.weights):
            covered = X[:, self.incidence[:, j]].any(axis=1)
            total += w * covered
        return total

    def to_dict(self):
        sets = [np.flatnonzero(row).tolist() for row in self.incidence]
        return {"kind": self.kind, "sets": sets, "weights": self.weights.tolist()}


class FacilityLocation(SetFunction):
    """sum over clients of the best utility among open facilities (0 if none)."""

    kind = "facility-location"

    def __init__(self, utility):
        utility = _check_weights(utility, "utilities")
        if utility.ndim != 2:
            raise ValueError("utility must be a clients x facilities matrix")
        super().__init__(utility.shape[1])
        self.utility = utility

    def _values(self, X):
        total = np.zeros(X.shape[0])
        for row in self.utility:
            total += np.where(X, row[None, :], 0.0).max(axis=1)
        return total

    def to_dict(self):
        return {"kind": self.kind, "utility": self.utility.tolist()}


class TableFunction(SetFunction):
    """Explicit table of all 2^n values, indexed by bitmask."""

    kind = "table"

    def __init__(self, values):
        values = _check_weights(values, "table values")
        size = len(values)
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise ValueError(f"table length must be a power of two >= 2, got {size}")
        if n > TABLE_MAX_N:
            raise SizeError(f"explicit tables are limited to n <= {TABLE_MAX_N}")
        super().__init__(n)
        self.values = values
        self._place = 1 << np.arange(n, dtype=np.int64)

    def _values(self, X):
        idx = (X.astype(np.int64) * self._place).sum(axis=1)
        return self.values[idx]

    def to_dict(self):
        return {"kind": self.kind, "values": self.values.tolist()}


class RestrictedFunction(SetFunction):
    """f restricted to a subset of the ground set, with ids renumbered 0..k-1."""

    def __init__(self, base, keep):
        keep = np.asarray(keep, dtype=np.int64)
        super().__init__(len(keep))
        self.base = base
        self.keep = keep

    @property
    def kind(self):
        return self.base.kind

    def _values(self, X):
        full = np.zeros((X.shape[0], self.base.n), dtype=bool)
        full[:, self.keep] = X
        return self.base._values(full)

    def to_dict(self):
        return {"kind": "restricted", "keep": self.keep.tolist(), "base_n": self.base.n,
                "base": self.base.to_dict()}


def from_dict(d, n=None):
    """Build a set function from its JSON description."""
    kind = d.get("kind")
    if kind in ("cut", "directed-cut"):
        if n is None:
            raise ValueError("cut functions need the ground-set size n")
        cls = GraphCut if kind == "cut" else DirectedCut
        f = cls(n, d["edges"])
    elif kind == "coverage":
        f = Coverage(d["sets"], d["weights"])
    elif kind == "facility-location":
        f = FacilityLocation(d["utility"])
    elif kind == "table":
        f = TableFunction(d["values"])
    elif kind == "restricted":
        base = from_dict(d["base"], n=d["base_n"])
        f = RestrictedFunction(base, d["keep"])
    else:
        raise ValueError(f"unknown function kind {kind!r}")
    if n is not None and f.n != n:
        raise ValueError(f"function describes {f.n} elements but n = {n}")
    return f


def check_submodular_nonneg(f, tol=1e-9):
    """Exhaustively test non-negativity and submodularity.

    Uses the local form f(S+u) + f(S+v) >= f(S+u+v) + f(S), which is
    equivalent to the lattice inequality over all pairs.  Returns
    ``(ok, witness)``; the witness is ``None`` or a pair of boolean masks
    ``(A, B)`` with f(A) + f(B) < f(A | B) + f(A & B), or ``(S, None)``
    when f(S) < 0.
    """
    n = f.n
    if n > 16:
        raise SizeError(f"exhaustive submodularity check is limited to n <= 16 (got {n})")
    vals = f.table()
    slack = tol * max(1.0, float(np.abs(vals).max()))
    neg = np.flatnonzero(vals < -slack)
    if len(neg):
        return False, (int_to_mask(neg[0], n), None)
    masks = np.arange(1 << n, dtype=np.int64)
    best = None
    for u in range(n):
        for v in range(u + 1, n):
            bu, bv = 1 << u, 1 << v
            S = masks[(masks & (bu | bv)) == 0]
            gap = vals[S | bu] + vals[S | bv] - vals[S | bu | bv] - vals[S]
            bad = np.flatnonzero(gap < -slack)
            if len(bad):
                cand = (int(S[bad[0]]), u, v)
                if best is None or cand < best:
                    best = cand
    if best is None:
        return True, None
    S, u, v = best
    return False, (int_to_mask(S | (1 << u), n), int_to_mask(S | (1 << v), n))
