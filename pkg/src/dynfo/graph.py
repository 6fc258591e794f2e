"""Coloured graphs with delta batches.

Vertices carry any number of colours ``0..c-1``; each colour class is a
doubly linked list where new members are prepended. The edge relation is
symmetric and may contain self-loops. Structures built on top of a graph
(counting, enumeration) subscribe to it and see every batch twice: once
before the mutation and once after.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator

from .instrument import OPS

Vertex = Hashable


@dataclass(frozen=True)
class Delta:
    """``kind`` is one of "col+", "col-", "edge+", "edge-".

    Colour deltas use ``colour`` and ``u``; edge deltas use ``u`` and ``v``
    (equal for a self-loop).
    """

    kind: str
    u: Vertex
    v: Vertex = None
    colour: int = -1

    @classmethod
    def add_colour(cls, colour: int, u: Vertex) -> "Delta":
        return cls("col+", u, None, colour)

    @classmethod
    def del_colour(cls, colour: int, u: Vertex) -> "Delta":
        return cls("col-", u, None, colour)

    @classmethod
    def add_edge(cls, u: Vertex, v: Vertex) -> "Delta":
        return cls("edge+", u, v)

    @classmethod
    def del_edge(cls, u: Vertex, v: Vertex) -> "Delta":
        return cls("edge-", u, v)

    def touched(self) -> tuple:
        return (self.u,) if self.v is None or self.v == self.u else (self.u, self.v)


class ColourList:
    __slots__ = ("_next", "_prev", "head")

    def __init__(self) -> None:
        self._next: dict = {}
        self._prev: dict = {}
        self.head = None

    def __contains__(self, v) -> bool:
        return v in self._next

    def __len__(self) -> int:
        return len(self._next)

    def __iter__(self) -> Iterator:
        v = self.head
        while v is not None:
            yield v
            v = self._next[v]

    @property
    def first(self):
        return self.head

    def succ(self, v):
        return None if v is None else self._next[v]

    def pred(self, v):
        return self._prev[v]

    def prepend(self, v) -> None:
        if v in self._next:
            raise ValueError(f"{v!r} already in list")
        self._next[v] = self.head
        self._prev[v] = None
        if self.head is not None:
            self._prev[self.head] = v
        self.head = v

    def remove(self, v) -> None:
        nxt = self._next.pop(v)
        prv = self._prev.pop(v)
        if prv is None:
            self.head = nxt
        else:
            self._next[prv] = nxt
        if nxt is not None:
            self._prev[nxt] = prv


class ColoredGraph:
    def __init__(self, c: int):
        if c < 1:
            raise ValueError("need at least one colour")
        self.c = c
        self.colours = [ColourList() for _ in range(c)]
        self.adj: dict = {}
        self._subscribers: list = []
        self._degree_hist: dict[int, int] = {}
        self.max_degree = 0

    def subscribe(self, sub) -> None:
        self._subscribers.append(sub)

    def vertices(self) -> set:
        out = set(self.adj)
        for col in self.colours:
            out.update(col._next)
        return out

    def colours_of(self, v) -> list[int]:
        return [j for j, col in enumerate(self.colours) if v in col]

    def neighbors(self, v):
        return self.adj.get(v, ())

    def has_edge(self, u, v) -> bool:
        return v in self.adj.get(u, ())

    def edges(self) -> set[frozenset]:
        return {frozenset((u, v)) for u, nbrs in self.adj.items() for v in nbrs}

    def _set_degree(self, old: int, new: int) -> None:
        hist = self._degree_hist
        if old:
            hist[old] -= 1
            if not hist[old]:
                del hist[old]
        if new:
            hist[new] = hist.get(new, 0) + 1
        if new > self.max_degree:
            self.max_degree = new
        while self.max_degree and self.max_degree not in hist:
            self.max_degree -= 1

    def _link(self, u, v) -> None:
        for a, b in ((u, v), (v, u)):
            nbrs = self.adj.setdefault(a, set())
            if b not in nbrs:
                nbrs.add(b)
                self._set_degree(len(nbrs) - 1, len(nbrs))
            if a == b:
                break

    def _unlink(self, u, v) -> None:
        for a, b in ((u, v), (v, u)):
            nbrs = self.adj[a]
            nbrs.discard(b)
            self._set_degree(len(nbrs) + 1, len(nbrs))
            if not nbrs:
                del self.adj[a]
            if a == b:
                break

    def check(self, deltas: Iterable[Delta]) -> None:
        """Reject a batch that is inconsistent with the current state."""
        cols = {}
        edges = {}
        for d in deltas:
            if d.kind in ("col+", "col-"):
                if not 0 <= d.colour < self.c:
                    raise ValueError(f"colour {d.colour} out of range")
                key = (d.colour, d.u)
                present = cols.get(key, d.u in self.colours[d.colour])
                if present == (d.kind == "col+"):
                    raise ValueError(f"{d.kind} on {d.u!r} does not change colour {d.colour}")
                cols[key] = not present
            elif d.kind in ("edge+", "edge-"):
                key = frozenset((d.u, d.v))
                present = edges.get(key, self.has_edge(d.u, d.v))
                if present == (d.kind == "edge+"):
                    raise ValueError(f"{d.kind} on {d.u!r},{d.v!r} does not change the edge set")
                edges[key] = not present
            else:
                raise ValueError(f"unknown delta kind {d.kind!r}")

    def apply(self, deltas: list[Delta]) -> None:
        self.check(deltas)
        for sub in self._subscribers:
            sub.before(self, deltas)
        for d in deltas:
            OPS.tick()
            if d.kind == "col+":
                self.colours[d.colour].prepend(d.u)
            elif d.kind == "col-":
                self.colours[d.colour].remove(d.u)
            elif d.kind == "edge+":
                self._link(d.u, d.v)
            else:
                self._unlink(d.u, d.v)
        for sub in self._subscribers:
            sub.after(self, deltas)

    def ball(self, sources: Iterable, radius: int) -> set:
        seen = set(sources)
        frontier = list(seen)
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for w in self.adj.get(u, ()):
                    OPS.tick()
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
        return seen

    def to_state(self) -> dict:
        return {
            "colours": [[repr(v) for v in col] for col in self.colours],
            "edges": sorted(sorted(map(repr, e)) for e in self.edges()),
        }
