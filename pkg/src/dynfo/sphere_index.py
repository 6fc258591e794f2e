"""Index of connected tuples and their neighbourhood types.

The index holds every tuple of arity at most ``k`` over the active domain
whose radius-``r`` neighbourhood is connected, together with the interned id
of that neighbourhood's type. Two indexed tuples conflict when some pair of
their constants is within distance ``2r+1``; their neighbourhoods would
then touch or overlap.

An update can only change the type, or the connectivity, of tuples having a
constant within ``r`` of the updated constants (in whichever database
contains the updated tuple), and only conflicts involving such a tuple. The
index recomputes exactly those and hands the changes to the signature views
that watch the affected types.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .counting import CountState
from .database import Database, Outcome, UpdateCmd, ball, bfs_ball, induced_on
from .enumeration import SkipState
from .graph import ColoredGraph, Delta
from .instrument import OPS
from .nbtypes import REGISTRY, TypeRegistry, _canonical, _Prepared


class _Distances:
    """Bounded balls memoised for the duration of one update."""

    def __init__(self, db: Database, reach: int):
        self.db = db
        self.reach = reach
        self._balls: dict[int, set[int]] = {}

    def close(self, a: int) -> set[int]:
        hit = self._balls.get(a)
        if hit is None:
            hit = set(bfs_ball(self.db.neighbors, (a,), self.reach))
            self._balls[a] = hit
        return hit

    def near(self, tup: Sequence[int]) -> set[int]:
        out = set()
        for a in set(tup):
            out |= self.close(a)
        return out


class SphereIndex:
    def __init__(self, db: Database, radius: int, k: int, registry: TypeRegistry = REGISTRY):
        if k < 1:
            raise ValueError("the index needs k >= 1")
        self.db = db
        self.radius = radius
        self.k = k
        self.reach = 2 * radius + 1
        self.registry = registry
        self.gamma: dict[tuple, int] = {}
        self.by_elem: dict[int, set[tuple]] = {}
        self.by_elem_type: dict[tuple[int, int], set[tuple]] = {}
        self.extents: dict[int, set[tuple]] = {}
        # type ids with a nonempty extent, by arity
        self.live: dict[int, set[int]] = {m: set() for m in range(1, k + 1)}
        self._woke: list[int] = []
        self._watchers: dict[int, list] = {}
        self.last_batch_size = 0

    # -- lookups ---------------------------------------------------------

    def lookup(self, tup: Sequence[int]) -> int | None:
        OPS.tick()
        return self.gamma.get(tuple(tup))

    def extent(self, tid: int) -> set[tuple]:
        return self.extents.get(tid, set())

    def conflict_neighbors(self, tup: Sequence[int], type_ids: Iterable[int], dist: _Distances | None = None) -> set[tuple]:
        """Indexed tuples of the given types that conflict with ``tup``."""
        dist = dist or _Distances(self.db, self.reach)
        out = set()
        type_ids = tuple(type_ids)
        for e in dist.near(tup):
            for tid in type_ids:
                OPS.tick()
                hit = self.by_elem_type.get((e, tid))
                if hit:
                    out |= hit
        return out

    def watch(self, tid: int, view) -> None:
        self._watchers.setdefault(tid, []).append(view)

    # -- updates ---------------------------------------------------------

    def prepare(self, db: Database, cmd: UpdateCmd) -> set[int]:
        return ball(db, cmd.args, self.radius)

    def _connected_sets(self, db: Database, region: set[int], dist: _Distances) -> list[frozenset]:
        seen: set[frozenset] = set()
        stack = [frozenset((a,)) for a in region if db.in_adom(a)]
        out = []
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            out.append(s)
            if len(s) == self.k:
                continue
            grow = set()
            for a in s:
                grow |= dist.close(a)
            for e in grow - s:
                OPS.tick()
                if db.in_adom(e):
                    bigger = s | {e}
                    if bigger not in seen:
                        stack.append(bigger)
        return out

    def _types_over(self, db: Database, elems: frozenset) -> dict[tuple, int]:
        structure = induced_on(db, ball(db, tuple(elems), self.radius))
        prep = _Prepared(structure)
        out = {}
        size = len(elems)
        for m in range(size, self.k + 1):
            for tup in itertools.product(sorted(elems), repeat=m):
                if len(set(tup)) != size:
                    continue
                OPS.tick()
                out[tup] = self.registry.intern(_canonical(prep, tup))
        return out

    def finish(self, db: Database, cmd: UpdateCmd, region: set[int]) -> tuple[list, list[int]]:
        """Bring the index up to date; returns (changes, woken ids).

        ``changes`` lists ``(tuple, old id, new id)`` for every tuple whose
        entry or conflicts may have changed; ids are None when absent.
        Woken ids are types whose extent was empty and is not any more.
        """
        dist = _Distances(db, self.reach)
        fresh: dict[tuple, int] = {}
        for elems in self._connected_sets(db, region, dist):
            fresh.update(self._types_over(db, elems))
        stale = set()
        for a in region:
            stale |= self.by_elem.get(a, set())
        changes = []
        self._woke = []
        for tup in sorted(stale | fresh.keys()):
            old = self.gamma.get(tup)
            new = fresh.get(tup)
            changes.append((tup, old, new))
            if old == new:
                continue
            if old is not None:
                self._unindex(tup, old)
            if new is not None:
                self._index(tup, new)
        woken = [tid for tid in dict.fromkeys(self._woke) if self.extents.get(tid)]
        self.last_batch_size = len(changes)
        self._dist = dist
        return changes, woken

    def apply_update(self, cmd: UpdateCmd) -> tuple[Outcome, list]:
        """Apply ``cmd`` to the database and this index alone; returns (outcome, changes)."""
        db = self.db
        outcome = db.check_update(cmd)
        if outcome is not Outcome.APPLIED:
            return outcome, []
        if cmd.is_insert:
            db._add(cmd.relation, cmd.args)
            region = self.prepare(db, cmd)
        else:
            region = self.prepare(db, cmd)
            db._remove(cmd.relation, cmd.args)
        changes, _ = self.finish(db, cmd, region)
        self.notify(changes)
        return outcome, changes

    def notify(self, changes: list) -> None:
        """Forward a change batch to the views watching the types involved."""
        per_view: dict[int, tuple] = {}
        for change in changes:
            _, old, new = change
            for tid in {old, new}:
                if tid is None:
                    continue
                for view in self._watchers.get(tid, ()):
                    slot = per_view.get(id(view))
                    if slot is None:
                        per_view[id(view)] = slot = (view, [])
                    slot[1].append(change)
        dist = getattr(self, "_dist", None) or _Distances(self.db, self.reach)
        for view, batch in per_view.values():
            # duplicates arise when old and new type are both watched
            view.apply_changes(list(dict.fromkeys(batch)), dist)
        self._dist = None

    def _index(self, tup: tuple, tid: int) -> None:
        self.gamma[tup] = tid
        ext = self.extents.setdefault(tid, set())
        if not ext:
            self.live[len(tup)].add(tid)
            self._woke.append(tid)
        ext.add(tup)
        for a in set(tup):
            self.by_elem.setdefault(a, set()).add(tup)
            self.by_elem_type.setdefault((a, tid), set()).add(tup)

    def _unindex(self, tup: tuple, tid: int) -> None:
        del self.gamma[tup]
        ext = self.extents[tid]
        ext.discard(tup)
        if not ext:
            self.live[len(tup)].discard(tid)
        for a in set(tup):
            s = self.by_elem[a]
            s.discard(tup)
            if not s:
                del self.by_elem[a]
            s = self.by_elem_type[(a, tid)]
            s.discard(tup)
            if not s:
                del self.by_elem_type[(a, tid)]

    def to_state(self) -> dict:
        return {"gamma": sorted(self.gamma.items()), "live": {m: sorted(ids) for m, ids in self.live.items()}}

    # -- reference rebuild (tests) ---------------------------------------

    def rebuild_reference(self) -> dict[tuple, int]:
        """Types of all connected tuples, recomputed from scratch."""
        db = self.db
        dist = _Distances(db, self.reach)
        out = {}
        for elems in self._connected_sets(db, set(db.adom), dist):
            out.update(self._types_over(db, elems))
        return out


class SignatureView:
    """Coloured graph of one colour sequence, kept in sync with the index.

    Colour ``j`` holds the tuples whose type is the ``j``-th entry of
    ``colours``; edges are conflicts. A sequence with one colour needs no
    edges.
    """

    def __init__(self, index: SphereIndex, colours: tuple[int, ...], with_enumeration: bool = True):
        self.index = index
        self.colours = tuple(colours)
        self.c = len(self.colours)
        self.type_set = frozenset(self.colours)
        self.graph = ColoredGraph(self.c)
        self.counter = CountState(self.graph)
        self.skips = SkipState(self.graph) if with_enumeration else None
        for tid in self.type_set:
            index.watch(tid, self)
        deltas = []
        members = set()
        for j, tid in enumerate(self.colours):
            for tup in sorted(index.extent(tid)):
                deltas.append(Delta.add_colour(j, tup))
                members.add(tup)
        if self.c > 1:
            dist = _Distances(index.db, index.reach)
            seen = set()
            for tup in sorted(members):
                for other in index.conflict_neighbors(tup, self.type_set, dist):
                    key = frozenset((tup, other))
                    if key not in seen:
                        seen.add(key)
                        deltas.append(Delta.add_edge(tup, other))
        if deltas:
            self.graph.apply(deltas)

    @property
    def count(self) -> int:
        return self.counter.n3

    def apply_changes(self, changes: list, dist: _Distances) -> None:
        graph = self.graph
        colour_deltas = []
        edges_old: set[frozenset] = set()
        edges_new: set[frozenset] = set()
        for tup, old, new in changes:
            for j, tid in enumerate(self.colours):
                was = old == tid
                now = new == tid
                if was and not now:
                    colour_deltas.append(Delta.del_colour(j, tup))
                elif now and not was:
                    colour_deltas.append(Delta.add_colour(j, tup))
            if self.c == 1:
                continue
            for other in graph.adj.get(tup, ()):
                edges_old.add(frozenset((tup, other)))
            if new in self.type_set:
                for other in self.index.conflict_neighbors(tup, self.type_set, dist):
                    edges_new.add(frozenset((tup, other)))
        deltas = colour_deltas
        for e in sorted(edges_old - edges_new, key=sorted):
            u, v = tuple(e) if len(e) == 2 else (next(iter(e)),) * 2
            deltas.append(Delta.del_edge(u, v))
        for e in sorted(edges_new - edges_old, key=sorted):
            u, v = tuple(e) if len(e) == 2 else (next(iter(e)),) * 2
            deltas.append(Delta.add_edge(u, v))
        if deltas:
            graph.apply(deltas)

    def to_state(self) -> dict:
        state = {"colours": list(self.colours), "graph": self.graph.to_state(), "count": self.counter.to_state()}
        if self.skips is not None:
            state["skips"] = self.skips.to_state()
        return state
