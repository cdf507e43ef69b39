"""Down-closed solvable polytopes.

Each polytope supports membership, exact linear maximization, a vectorized
feasibility test for 0/1 points and restriction to a subset of elements.
Linear maximization is combinatorial (greedy) for every kind; ties are
broken towards the lowest element id.
"""
import numpy as np

from .setfn import SizeError, bits_matrix

TOL = 1e-9
VERTEX_MAX_N = 16
RANK_MAX_N = 20


def _greedy_order(w):
    # decreasing weight, lowest id first among ties; only positive weights
    ids = np.flatnonzero(w > 0)
    return ids[np.argsort(-w[ids], kind="stable")]


class Polytope:
    kind = "abstract"

    def __init__(self, n):
        self.n = int(n)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point must have length {self.n}, got shape {x.shape}")
        return x

    def contains(self, x, tol=TOL):
        x = self._check(x)
        if np.any(x < -tol) or np.any(x > 1 + tol):
            return False
        return self._contains(x, tol)

    def _contains(self, x, tol):
        raise NotImplementedError

    def maximize_linear(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape != (self.n,):
            raise ValueError(f"weight vector must have length {self.n}")
        return self._maximize(w)

    def _maximize(self, w):
        raise NotImplementedError

    def feasible_sets(self, X):
        """Vectorized membership of 1_S for every row S of a boolean matrix."""
        return np.array([self.contains(row.astype(float)) for row in X], dtype=bool)

    def feasible_table(self):
        """Membership of 1_S for every bitmask S."""
        if self.n > RANK_MAX_N:
            raise SizeError(f"cannot enumerate subsets of {self.n} > {RANK_MAX_N} elements")
        size = 1 << self.n
        out = np.empty(size, dtype=bool)
        step = 1 << 15
        for lo in range(0, size, step):
            masks = np.arange(lo, min(lo + step, size), dtype=np.int64)
            out[lo:lo + len(masks)] = self.feasible_sets(bits_matrix(masks, self.n))
        return out

    def enumerate_vertices(self):
        raise NotImplementedError

    def restrict(self, keep):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class Matroid(Polytope):
    """Matroid polytope given by an independence oracle on boolean masks."""

    kind = "matroid"

    def __init__(self, n, independent):
        super().__init__(n)
        self._independent = independent
        self._rank = None

    def is_independent(self, S):
        return bool(self._independent(np.asarray(S, dtype=bool)))

    def feasible_sets(self, X):
        return np.array([self.is_independent(row) for row in X], dtype=bool)

    def _maximize(self, w):
        x = np.zeros(self.n)
        chosen = np.zeros(self.n, dtype=bool)
        for u in _greedy_order(w):
            chosen[u] = True
            if self.is_independent(chosen):
                x[u] = 1.0
            else:
                chosen[u] = False
        return x

    def rank_table(self):
        """Rank of every subset, from greedy bases built in id order."""
        if self._rank is None:
            n = self.n
            if n > RANK_MAX_N:
                raise SizeError(f"rank enumeration limited to n <= {RANK_MAX_N}")
            size = 1 << n
            basis = np.zeros(size, dtype=np.int64)
            rank = np.zeros(size, dtype=np.int64)
            for S in range(1, size):
                top = S.bit_length() - 1
                prev = S & ~(1 << top)
                cand = basis[prev] | (1 << top)
                if self.is_independent((cand >> np.arange(n)) & 1 == 1):
                    basis[S], rank[S] = cand, rank[prev] + 1
                else:
                    basis[S], rank[S] = basis[prev], rank[prev]
            self._rank = rank
        return self._rank

    def _contains(self, x, tol):
        # x(S) <= r(S) for every S
        rank = self.rank_table()
        size = 1 << self.n
        step = 1 << 15
        for lo in range(0, size, step):
            masks = np.arange(lo, min(lo + step, size), dtype=np.int64)
            sums = bits_matrix(masks, self.n).astype(float) @ x
            if np.any(sums > rank[masks] + tol):
                return False
        return True

    def enumerate_vertices(self):
        if self.n > VERTEX_MAX_N:
            raise SizeError(f"vertex enumeration limited to n <= {VERTEX_MAX_N}")
        feas = self.feasible_table()
        masks = np.flatnonzero(feas)
        return list(bits_matrix(masks, self.n).astype(float))

    def restrict(self, keep):
        keep = np.asarray(keep, dtype=np.int64)
        base = self

        def independent(S):
            full = np.zeros(base.n, dtype=bool)
            full[keep] = S
            return base.is_independent(full)

        return Matroid(len(keep), independent)

    def to_dict(self):
        raise TypeError("matroids given by an independence callback cannot be serialized")


class Box(Matroid):
    """The unit cube (free matroid)."""

    kind = "box"

    def __init__(self, n):
        super().__init__(n, lambda S: True)

    def _contains(self, x, tol):
        return True

    def _maximize(self, w):
        return (w > 0).astype(float)

    def feasible_sets(self, X):
        return np.ones(X.shape[0], dtype=bool)

    def restrict(self, keep):
        return Box(len(keep))

    def to_dict(self):
        return {"kind": self.kind}


class Cardinality(Matroid):
    """{x : sum x <= k} (uniform matroid)."""

    kind = "cardinality"

    def __init__(self, n, k):
        self.k = int(k)
        if self.k < 0:
            raise ValueError("cardinality bound must be non-negative")
        super().__init__(n, lambda S: int(np.count_nonzero(S)) <= self.k)

    def _contains(self, x, tol):
        return x.sum() <= self.k + tol

    def _maximize(self, w):
        x = np.zeros(self.n)
        x[_greedy_order(w)[: self.k]] = 1.0
        return x

    def feasible_sets(self, X):
        return X.sum(axis=1) <= self.k

    def restrict(self, keep):
        return Cardinality(len(keep), self.k)

    def to_dict(self):
        return {"kind": self.kind, "k": self.k}


class PartitionMatroid(Matroid):
    """At most capacities[i] elements (fractionally) from each block i.

    Elements not listed in any block are unconstrained.
    """

    kind = "partition-matroid"

    def __init__(self, n, blocks, capacities):
        self.blocks = [sorted(int(u) for u in b) for b in blocks]
        self.capacities = [int(c) for c in capacities]
        if len(self.blocks) != len(self.capacities):
            raise ValueError("one capacity per block is required")
        if any(c < 0 for c in self.capacities):
            raise ValueError("capacities must be non-negative")
        seen = [u for b in self.blocks for u in b]
        if len(seen) != len(set(seen)) or any(not 0 <= u < n for u in seen):
            raise ValueError("blocks must be disjoint subsets of the ground set")
        self._block_of = np.full(n, -1, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            self._block_of[b] = i
        super().__init__(n, self._independent_mask)

    def _independent_mask(self, S):
        S = np.asarray(S, dtype=bool)
        return all(np.count_nonzero(S[b]) <= c for b, c in zip(self.blocks, self.capacities))

    def _contains(self, x, tol):
        return all(x[b].sum() <= c + tol for b, c in zip(self.blocks, self.capacities))

    def _maximize(self, w):
        x = np.zeros(self.n)
        used = [0] * len(self.blocks)
        for u in _greedy_order(w):
            i = self._block_of[u]
            if i < 0:
                x[u] = 1.0
            elif used[i] < self.capacities[i]:
                used[i] += 1
                x[u] = 1.0
        return x

    def feasible_sets(self, X):
        ok = np.ones(X.shape[0], dtype=bool)
        for b, c in zip(self.blocks, self.capacities):
            ok &= X[:, b].sum(axis=1) <= c
        return ok

    def restrict(self, keep):
        keep = [int(u) for u in keep]
        new_id = {u: i for i, u in enumerate(keep)}
        blocks = [[new_id[u] for u in b if u in new_id] for b in self.blocks]
        return PartitionMatroid(len(keep), blocks, self.capacities)

    def to_dict(self):
        return {"kind": self.kind, "blocks": self.blocks, "capacities": self.capacities}


class GraphicMatroid(Matroid):
    """Elements are the edges of a multigraph; independent sets are forests."""

    kind = "graphic-matroid"

    def __init__(self, edges):
        self.edges = [(int(a), int(b)) for a, b in edges]
        super().__init__(len(self.edges), self._acyclic)

    def _acyclic(self, S):
        parent = {}

        def find(a):
            while parent.get(a, a) != a:
                parent[a] = parent.get(parent[a], parent[a])
                a = parent[a]
            return a

        for i in np.flatnonzero(S):
            a, b = self.edges[i]
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def restrict(self, keep):
        return GraphicMatroid([self.edges[int(u)] for u in keep])

    def to_dict(self):
        return {"kind": self.kind, "edges": [list(e) for e in self.edges]}


class Knapsack(Polytope):
    """{x in [0,1]^n : weights . x <= budget}."""

    kind = "knapsack"

    def __init__(self, weights, budget):
        self.weights = np.asarray(weights, dtype=float)
        self.budget = float(budget)
        if np.any(self.weights < 0) or self.budget < 0:
            raise ValueError("knapsack weights and budget must be non-negative")
        super().__init__(len(self.weights))

    def _contains(self, x, tol):
        return float(self.weights @ x) <= self.budget + tol

    def _maximize(self, w):
        # fractional greedy by value density; free items first
        x = np.zeros(self.n)
        ids = np.flatnonzero(w > 0)
        free = ids[self.weights[ids] == 0]
        x[free] = 1.0
        paid = ids[self.weights[ids] > 0]
        density = w[paid] / self.weights[paid]
        room = self.budget
        for u in paid[np.argsort(-density, kind="stable")]:
            if room <= 0:
                break
            take = min(1.0, room / self.weights[u])
            x[u] = take
            room -= take * self.weights[u]
        return x

    def feasible_sets(self, X):
        total = np.zeros(X.shape[0])
        for u in range(self.n):
            total += self.weights[u] * X[:, u]
        return total <= self.budget + TOL

    def enumerate_vertices(self):
        """0/1 feasible points plus points with one fractional coordinate on the budget face."""
        if self.n > VERTEX_MAX_N:
            raise SizeError(f"vertex enumeration limited to n <= {VERTEX_MAX_N}")
        masks = np.flatnonzero(self.feasible_table())
        X = bits_matrix(masks, self.n).astype(float)
        verts = list(X)
        used = X @ self.weights
        for row, spent in zip(X, used):
            for u in np.flatnonzero(row == 0):
                if self.weights[u] <= 0:
                    continue
                frac = (self.budget - spent) / self.weights[u]
                if TOL < frac < 1 - TOL:
                    v = row.copy()
                    v[u] = frac
                    verts.append(v)
        return verts

    def restrict(self, keep):
        keep = np.asarray(keep, dtype=np.int64)
        return Knapsack(self.weights[keep], self.budget)

    def to_dict(self):
        return {"kind": self.kind, "weights": self.weights.tolist(), "budget": self.budget}


def from_dict(d, n):
    kind = d.get("kind")
    if kind == "box":
        P = Box(n)
    elif kind == "cardinality":
        P = Cardinality(n, d["k"])
    elif kind == "partition-matroid":
        P = PartitionMatroid(n, d["blocks"], d["capacities"])
    elif kind == "graphic-matroid":
        P = GraphicMatroid(d["edges"])
    elif kind == "knapsack":
        P = Knapsack(d["weights"], d["budget"])
    else:
        raise ValueError(f"unknown constraint kind {kind!r}")
    if P.n != n:
        raise ValueError(f"constraint describes {P.n} elements but n = {n}")
    return P


def normalize_ground_set(f, P):
    """Drop every element u with 1_u outside P.

    Returns ``(f', P', kept, removed)``; ``kept[i]`` is the original id of
    reduced element ``i``.  When nothing is removed the inputs are returned
    unchanged.
    """
    from .setfn import RestrictedFunction

    n = P.n
    singles = np.eye(n, dtype=bool)
    ok = P.feasible_sets(singles)
    kept = np.flatnonzero(ok)
    removed = np.flatnonzero(~ok)
    if len(removed) == 0:
        return f, P, kept, removed
    if len(kept) == 0:
        raise ValueError("no element fits the constraint on its own; the problem is trivial")
    return RestrictedFunction(f, kept), P.restrict(kept), kept, removed


def lift(x, kept, n):
    """Embed a point on the reduced ground set back into the original one."""
    out = np.zeros(n)
    out[np.asarray(kept, dtype=np.int64)] = x
    return out


def is_normalized(P):
    return bool(P.feasible_sets(np.eye(P.n, dtype=bool)).all())
