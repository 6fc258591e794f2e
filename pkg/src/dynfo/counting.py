"""Counting tuples of pairwise far vertices, one per colour.

The number of tuples ``(z_1..z_c)`` with ``z_j`` in colour ``j`` and no
edge between any two of them is computed by inclusion-exclusion over the
sets ``K`` of required edges: the product of the colour sizes minus the
alternating sum of the counts of tuples that do have every edge in ``K``.
The pattern ``([c], K)`` splits into connected components and its count is
the product of per-component counts. Each component count is kept as a sum
of per-vertex anchored counts, so a local change only needs the anchored
counts near it recomputed.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import prod

from .graph import ColoredGraph, Delta
from .instrument import OPS

MAX_COLOURS = 5
BRUTE_FORCE_LIMIT = 10 ** 3


def ordered_pairs(c: int) -> list[tuple[int, int]]:
    return [(j, jj) for j in range(c) for jj in range(c) if j != jj]


def pattern_components(c: int, K) -> list[tuple[tuple[int, ...], frozenset]]:
    """Connected components of the pattern graph on ``range(c)`` with edges ``K``.

    Edges are returned unordered, since the underlying edge relation is
    symmetric.
    """
    parent = list(range(c))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j, jj in K:
        parent[find(j)] = find(jj)
    groups: dict[int, list[int]] = {}
    for j in range(c):
        groups.setdefault(find(j), []).append(j)
    out = []
    for members in sorted(groups.values()):
        mset = set(members)
        edges = frozenset(frozenset(e) for e in K if e[0] in mset)
        out.append((tuple(members), edges))
    return out


class _Pattern:
    """A connected pattern, matched by extending from its smallest variable."""

    __slots__ = ("vars", "edges", "order", "checks")

    def __init__(self, variables: tuple[int, ...], edges: frozenset):
        self.vars = variables
        self.edges = edges
        adj = {v: set() for v in variables}
        for e in edges:
            a, b = tuple(e) if len(e) == 2 else (next(iter(e)),) * 2
            adj[a].add(b)
            adj[b].add(a)
        order = [variables[0]]
        seen = {variables[0]}
        i = 0
        while i < len(order):
            for w in sorted(adj[order[i]]):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
            i += 1
        self.order = order
        # for each later variable: the earlier variables it must be adjacent to
        self.checks = []
        for idx, v in enumerate(order):
            earlier = [u for u in order[:idx] if u in adj[v]]
            self.checks.append(earlier)

    def anchored(self, graph: ColoredGraph, v) -> int:
        first = self.order[0]
        if v not in graph.colours[first]:
            return 0
        if len(self.order) == 1:
            return 1
        assign = {first: v}
        return self._extend(graph, assign, 1)

    def _extend(self, graph: ColoredGraph, assign: dict, idx: int) -> int:
        if idx == len(self.order):
            return 1
        var = self.order[idx]
        must = self.checks[idx]
        colour = graph.colours[var]
        total = 0
        for cand in graph.adj.get(assign[must[0]], ()):
            OPS.tick()
            if cand not in colour:
                continue
            if all(cand in graph.adj.get(assign[u], ()) for u in must[1:]):
                assign[var] = cand
                total += self._extend(graph, assign, idx + 1)
        assign.pop(var, None)
        return total


@lru_cache(maxsize=None)
def _layout(c: int):
    """Patterns shared by all counters with ``c`` colours.

    Returns the ordered pairs, the distinct connected patterns, the pattern
    ids of every nonempty ``K`` and, per pattern, the indices of the ``K``
    that use it.
    """
    pairs = ordered_pairs(c)
    patterns: list[_Pattern] = []
    index: dict = {}
    K_patterns: list[tuple[tuple, list[int]]] = []
    for mask in range(1, 1 << len(pairs)):
        K = tuple(p for b, p in enumerate(pairs) if mask >> b & 1)
        ids = []
        for variables, edges in pattern_components(c, K):
            key = (variables, edges)
            if key not in index:
                index[key] = len(patterns)
                patterns.append(_Pattern(variables, edges))
            ids.append(index[key])
        K_patterns.append((K, ids))
    users: list[list[int]] = [[] for _ in patterns]
    for q, (_, ids) in enumerate(K_patterns):
        for pid in set(ids):
            users[pid].append(q)
    return pairs, patterns, K_patterns, users


class CountState:
    """Maintains the number of far tuples of a coloured graph under deltas."""

    def __init__(self, graph: ColoredGraph):
        c = graph.c
        if c > MAX_COLOURS:
            raise ValueError(f"counting supports at most {MAX_COLOURS} colours, got {c}")
        self.c = c
        self.pairs, self.patterns, self.K_patterns, self._users = _layout(c)
        self.cnt: list[dict] = [{} for _ in self.patterns]
        self.m = [0] * len(self.patterns)
        self.phiK: dict[tuple, int] = {K: 0 for K, _ in self.K_patterns}
        self.n1 = self.n2 = self.n3 = 0
        self._pending: set = set()
        graph.subscribe(self)
        if graph.vertices():
            self._recount_all(graph)

    @property
    def count(self) -> int:
        return self.n3

    def _touched(self, deltas: list[Delta]) -> set:
        out = set()
        for d in deltas:
            out.update(d.touched())
        return out

    def before(self, graph: ColoredGraph, deltas: list[Delta]) -> None:
        self._pending = graph.ball(self._touched(deltas), self.c)

    def after(self, graph: ColoredGraph, deltas: list[Delta]) -> None:
        region = self._pending | graph.ball(self._touched(deltas), self.c)
        self._pending = set()
        changed = set()
        for pid, pat in enumerate(self.patterns):
            if len(pat.vars) == 1:
                size = len(graph.colours[pat.vars[0]])
                if size != self.m[pid]:
                    self.m[pid] = size
                    changed.add(pid)
                continue
            cnt = self.cnt[pid]
            for v in region:
                new = pat.anchored(graph, v)
                old = cnt.get(v, 0)
                if new != old:
                    self.m[pid] += new - old
                    changed.add(pid)
                    if new:
                        cnt[v] = new
                    else:
                        del cnt[v]
        self._combine(graph, changed)

    def _recount_all(self, graph: ColoredGraph) -> None:
        vertices = graph.vertices()
        for pid, pat in enumerate(self.patterns):
            if len(pat.vars) == 1:
                self.m[pid] = len(graph.colours[pat.vars[0]])
                continue
            cnt = {}
            for v in vertices:
                n = pat.anchored(graph, v)
                if n:
                    cnt[v] = n
            self.cnt[pid] = cnt
            self.m[pid] = sum(cnt.values())
        self._combine(graph, range(len(self.patterns)))

    def _combine(self, graph: ColoredGraph, changed) -> None:
        """Refresh the products of the ``K`` that use a changed pattern."""
        self.n1 = prod(len(col) for col in graph.colours)
        redo = set()
        for pid in changed:
            redo.update(self._users[pid])
        n2 = self.n2
        for q in redo:
            OPS.tick()
            K, ids = self.K_patterns[q]
            size = prod(self.m[i] for i in ids)
            diff = size - self.phiK[K]
            self.phiK[K] = size
            n2 += diff if len(K) % 2 else -diff
        self.n2 = n2
        self.n3 = self.n1 - n2

    def to_state(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "n3": self.n3, "m": list(self.m),
                "cnt": [sorted((repr(v), n) for v, n in cnt.items()) for cnt in self.cnt]}


def count_phiK_bruteforce(graph: ColoredGraph, K, limit: int = BRUTE_FORCE_LIMIT) -> int:
    """Tuples with ``z_j`` in colour ``j`` having an edge for every pair in ``K``."""
    K = tuple(K)
    if not K:
        raise ValueError("K must be nonempty")
    for j, jj in K:
        if j == jj or not (0 <= j < graph.c and 0 <= jj < graph.c):
            raise ValueError(f"bad pair {(j, jj)}")
    _size_guard(graph, limit)
    return sum(1 for z in itertools.product(*[list(col) for col in graph.colours])
               if all(graph.has_edge(z[j], z[jj]) for j, jj in K))


def phiK_table_bruteforce(graph: ColoredGraph, limit: int = BRUTE_FORCE_LIMIT) -> dict[tuple, int]:
    """``count_phiK_bruteforce`` for every nonempty ``K`` in one pass over the tuples.

    Each tuple contributes to every ``K`` contained in its own set of
    present edges, so a histogram of those sets summed over supersets gives
    all counts at once.
    """
    _size_guard(graph, limit)
    pairs = ordered_pairs(graph.c)
    width = len(pairs)
    hist = [0] * (1 << width)
    for z in itertools.product(*[list(col) for col in graph.colours]):
        mask = 0
        for b, (j, jj) in enumerate(pairs):
            if graph.has_edge(z[j], z[jj]):
                mask |= 1 << b
        hist[mask] += 1
    for b in range(width):
        bit = 1 << b
        for mask in range(1 << width):
            if not mask & bit:
                hist[mask] += hist[mask | bit]
    return {tuple(p for b, p in enumerate(pairs) if mask >> b & 1): hist[mask] for mask in range(1, 1 << width)}


def count_far_bruteforce(graph: ColoredGraph, limit: int = BRUTE_FORCE_LIMIT) -> int:
    return len(far_tuples_bruteforce(graph, limit))


def far_tuples_bruteforce(graph: ColoredGraph, limit: int = BRUTE_FORCE_LIMIT) -> list[tuple]:
    _size_guard(graph, limit)
    pairs = ordered_pairs(graph.c)
    return [z for z in itertools.product(*[list(col) for col in graph.colours])
            if not any(graph.has_edge(z[j], z[jj]) for j, jj in pairs)]


def _size_guard(graph: ColoredGraph, limit: int) -> None:
    size = prod(len(col) for col in graph.colours)
    if size > limit:
        raise ValueError(f"brute force over {size} tuples exceeds the limit of {limit}")
