"""Constant-delay enumeration of far tuples in a coloured graph.

Both procedures pick one vertex per colour, never taking a neighbour of a
vertex already chosen. Colours with few members ("small" colours) are
handled first from a precomputed set of compatible prefixes; every other
colour is large enough that some candidate always survives, so the search
never backtracks empty-handed.

The fast variant jumps over blocked list members with ``skip`` tables.
For a vertex ``y`` of colour ``i`` the table stores, for every small set
``V`` of blockers drawn from the support of ``y``, the first list member at
or after ``y`` that has no neighbour in ``V``. Blockers outside the support
never matter, so a query intersects ``V`` with the support and looks the
answer up.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .graph import ColoredGraph, Delta
from .instrument import OPS


class _EndMarker:
    __slots__ = ()

    def __repr__(self) -> str:
        return "END_OF_ENUMERATION"


END = _EndMarker()


def scan_skip(graph: ColoredGraph, i: int, y, blockers) -> object:
    """First member of colour ``i`` at or after ``y`` with no neighbour in ``blockers``."""
    lst = graph.colours[i]
    adj = graph.adj
    while y is not None:
        nbrs = adj.get(y, ())
        if not any(v in nbrs for v in blockers):
            return y
        y = lst.succ(y)
    return None


class SkipState:
    def __init__(self, graph: ColoredGraph):
        self.graph = graph
        c = graph.c
        self.c = c
        self.levels: list[dict] = [{} for _ in range(c)]
        self.support: list[dict] = [{} for _ in range(c)]
        self.tables: list[dict] = [{} for _ in range(c)]
        self._sdeps: list[dict] = [{} for _ in range(c)]
        self._srev: list[dict] = [{} for _ in range(c)]
        self._tdeps: list[dict] = [{} for _ in range(c)]
        self._trev: list[dict] = [{} for _ in range(c)]
        self.small: tuple[int, ...] = ()
        self.order: tuple[int, ...] = tuple(range(c))
        self.prefixes: list[tuple] = [()]
        self._pending = None
        graph.subscribe(self)
        self._rebuild_all()

    # -- queries ---------------------------------------------------------

    def skip(self, i: int, y, chosen) -> object:
        if y is None:
            return None
        support = self.support[i][y]
        OPS.tick(len(chosen) + 1)
        key = frozenset(v for v in chosen if v in support)
        return self.tables[i][y][key]

    def threshold(self) -> int:
        return self.c * self.graph.max_degree

    # -- construction ----------------------------------------------------

    def _rebuild_all(self) -> None:
        for i in range(self.c):
            for y in list(self.support[i]):
                self._drop(i, y)
            for y in self.graph.colours[i]:
                self._compute_support(i, y)
                self._compute_table(i, y)
        self._rebuild_prefixes()

    def _index(self, deps: dict, rev: dict, y, new: set) -> None:
        for x in deps.get(y, ()):
            ys = rev.get(x)
            if ys is not None:
                ys.discard(y)
                if not ys:
                    del rev[x]
        deps[y] = new
        for x in new:
            rev.setdefault(x, set()).add(y)

    def _drop(self, i: int, y) -> None:
        self._index(self._sdeps[i], self._srev[i], y, set())
        self._index(self._tdeps[i], self._trev[i], y, set())
        del self._sdeps[i][y]
        del self._tdeps[i][y]
        self.levels[i].pop(y, None)
        self.support[i].pop(y, None)
        self.tables[i].pop(y, None)

    def _compute_support(self, i: int, y) -> bool:
        """Recompute the chain rows for ``y``; True if its support changed."""
        adj = self.graph.adj
        lst = self.graph.colours[i]
        deps = {y}
        first = set(adj.get(y, ()))
        OPS.tick(len(first) + 1)
        levels = [first]
        frontier = first
        current = first
        for _ in range(self.c - 1):
            grown = set(current)
            for v in frontier:
                deps.add(v)
                for z in adj.get(v, ()):
                    OPS.tick()
                    deps.add(z)
                    if z not in lst:
                        continue
                    w = lst.succ(z)
                    if w is None:
                        continue
                    deps.add(w)
                    for u in adj.get(w, ()):
                        OPS.tick()
                        grown.add(u)
            frontier = grown - current
            current = grown
            levels.append(current)
        self.levels[i][y] = levels
        self._index(self._sdeps[i], self._srev[i], y, deps)
        old = self.support[i].get(y)
        self.support[i][y] = frozenset(current)
        return old != self.support[i][y]

    def _compute_table(self, i: int, y) -> None:
        adj = self.graph.adj
        lst = self.graph.colours[i]
        support = sorted(self.support[i][y], key=repr)
        deps = set(support)
        table = {}
        for size in range(min(self.c - 1, len(support)) + 1):
            for blockers in itertools.combinations(support, size):
                z = y
                while z is not None:
                    OPS.tick()
                    deps.add(z)
                    nbrs = adj.get(z, ())
                    if not any(v in nbrs for v in blockers):
                        break
                    z = lst.succ(z)
                table[frozenset(blockers)] = z
        self.tables[i][y] = table
        self._index(self._tdeps[i], self._trev[i], y, deps)

    def _rebuild_prefixes(self) -> None:
        graph = self.graph
        limit = self.threshold()
        small = tuple(i for i in range(self.c) if len(graph.colours[i]) <= limit)
        self.small = small
        self.order = small + tuple(i for i in range(self.c) if i not in small)
        found = []
        adj = graph.adj

        def grow(prefix: list) -> None:
            if len(prefix) == len(small):
                found.append(tuple(prefix))
                return
            for u in graph.colours[small[len(prefix)]]:
                OPS.tick()
                nbrs = adj.get(u, ())
                if not any(p in nbrs for p in prefix):
                    prefix.append(u)
                    grow(prefix)
                    prefix.pop()

        grow([])
        found.sort(key=repr)
        self.prefixes = found

    # -- maintenance -----------------------------------------------------

    def before(self, graph: ColoredGraph, deltas: list[Delta]) -> None:
        touched = set()
        per_colour = [set() for _ in range(self.c)]
        small_before = set(self.small)
        prefix_dirty = False
        for d in deltas:
            touched.update(d.touched())
            if d.kind == "col-":
                lst = graph.colours[d.colour]
                prev = lst.pred(d.u)
                if prev is not None:
                    per_colour[d.colour].add(prev)
            if d.kind in ("col+", "col-"):
                per_colour[d.colour].add(d.u)
                if d.colour in small_before:
                    prefix_dirty = True
        if not prefix_dirty:
            members = [graph.colours[i] for i in small_before]
            prefix_dirty = any(v in lst for v in touched for lst in members)
        self._pending = (touched, per_colour, prefix_dirty, self.threshold())

    def after(self, graph: ColoredGraph, deltas: list[Delta]) -> None:
        touched, per_colour, prefix_dirty, old_threshold = self._pending
        self._pending = None
        for i in range(self.c):
            lst = graph.colours[i]
            changed = touched | per_colour[i]
            support_hit = set()
            table_hit = set()
            for x in changed:
                support_hit.update(self._srev[i].get(x, ()))
                table_hit.update(self._trev[i].get(x, ()))
            for d in deltas:
                if d.colour == i and d.kind == "col-":
                    self._drop(i, d.u)
                    support_hit.discard(d.u)
                    table_hit.discard(d.u)
            for d in deltas:
                if d.colour == i and d.kind == "col+":
                    support_hit.add(d.u)
                    table_hit.add(d.u)
            for y in support_hit:
                if y in lst and self._compute_support(i, y):
                    table_hit.add(y)
            for y in table_hit:
                if y in lst:
                    self._compute_table(i, y)
        small_now = tuple(i for i in range(self.c) if len(graph.colours[i]) <= self.threshold())
        if prefix_dirty or small_now != self.small:
            self._rebuild_prefixes()
        else:
            members = [graph.colours[i] for i in self.small]
            if any(v in lst for v in touched for lst in members):
                self._rebuild_prefixes()

    def to_state(self) -> dict:
        return {
            "order": list(self.order),
            "prefixes": [repr(p) for p in self.prefixes],
            "support": [sorted((repr(y), sorted(map(repr, s))) for y, s in sup.items()) for sup in self.support],
            "tables": [sorted((repr(y), sorted((sorted(map(repr, k)), repr(v)) for k, v in t.items()))
                              for y, t in tab.items()) for tab in self.tables],
        }

    # -- reference recomputation (tests) --------------------------------

    def fresh_levels(self, i: int, y) -> list[set]:
        adj = self.graph.adj
        lst = self.graph.colours[i]
        levels = [set(adj.get(y, ()))]
        for _ in range(self.c - 1):
            prev = levels[-1]
            nxt = set(prev)
            for v in prev:
                for z in adj.get(v, ()):
                    if z in lst and lst.succ(z) is not None:
                        nxt.update(adj.get(lst.succ(z), ()))
            levels.append(nxt)
        return levels


def _emit(order: tuple[int, ...], chosen: list) -> tuple:
    out = [None] * len(order)
    for pos, colour in enumerate(order):
        out[colour] = chosen[pos]
    return tuple(out)


def enumerate_naive(graph: ColoredGraph, state: SkipState, stats: dict | None = None) -> Iterator:
    """Search over large colours testing neighbourhoods directly."""
    order = state.order
    n_small = len(state.small)
    c = graph.c
    adj = graph.adj

    def extend(chosen: list) -> Iterator:
        depth = len(chosen)
        if depth == c:
            yield _emit(order, chosen)
            return
        calls = 0
        for u in graph.colours[order[depth]]:
            OPS.tick(depth + 1)
            nbrs = adj.get(u, ())
            if any(v in nbrs for v in chosen):
                continue
            calls += 1
            chosen.append(u)
            yield from extend(chosen)
            chosen.pop()
        if stats is not None:
            stats["calls"] = stats.get("calls", 0) + 1
            if calls == 0:
                stats["dead_ends"] = stats.get("dead_ends", 0) + 1

    for prefix in state.prefixes:
        if n_small == c:
            yield _emit(order, list(prefix))
        else:
            yield from extend(list(prefix))
    yield END


def enumerate_fast(graph: ColoredGraph, state: SkipState) -> Iterator:
    """Same results as ``enumerate_naive``, jumping with the skip tables."""
    order = state.order
    c = graph.c
    lists = graph.colours
    skip = state.skip

    def extend(chosen: list) -> Iterator:
        depth = len(chosen)
        if depth == c:
            yield _emit(order, chosen)
            return
        colour = order[depth]
        lst = lists[colour]
        y = skip(colour, lst.first, chosen)
        while y is not None:
            chosen.append(y)
            yield from extend(chosen)
            chosen.pop()
            y = skip(colour, lst.succ(y), chosen)

    for prefix in state.prefixes:
        yield from extend(list(prefix))
    yield END


def skip_query(state: SkipState, i: int, y, blockers) -> object:
    if len(blockers) > state.c - 1:
        raise ValueError(f"at most {state.c - 1} blockers allowed")
    return state.skip(i, y, blockers)
