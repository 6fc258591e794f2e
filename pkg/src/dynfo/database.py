"""Degree-bounded relational databases with single-tuple updates.

Constants are positive integers. The Gaifman graph is kept as reference
counted adjacency so that deleting one of several tuples that connect the
same pair of constants leaves the edge in place.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .instrument import OPS

Fact = tuple  # (relation name, argument tuple)


class Schema:
    """Relation names with their arities, in declaration order."""

    def __init__(self, relations: dict[str, int] | Iterable[tuple[str, int]]):
        items = list(relations.items()) if isinstance(relations, dict) else list(relations)
        self.relations: dict[str, int] = {}
        for name, arity in items:
            if name in self.relations:
                raise ValueError(f"duplicate relation {name!r}")
            if not isinstance(arity, int) or arity < 1:
                raise ValueError(f"relation {name!r} needs a positive arity, got {arity!r}")
            self.relations[name] = arity

    def arity(self, name: str) -> int:
        try:
            return self.relations[name]
        except KeyError:
            raise ValueError(f"unknown relation {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.relations

    def __iter__(self):
        return iter(self.relations.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and self.relations == other.relations

    def __repr__(self) -> str:
        return f"Schema({self.relations!r})"


@dataclass(frozen=True)
class UpdateCmd:
    op: str  # "+" or "-"
    relation: str
    args: tuple[int, ...]

    def __post_init__(self):
        if self.op not in ("+", "-"):
            raise ValueError(f"update op must be '+' or '-', got {self.op!r}")
        for a in self.args:
            if not isinstance(a, int) or isinstance(a, bool) or a < 1:
                raise ValueError(f"constants must be positive integers, got {a!r}")

    @classmethod
    def insert(cls, relation: str, *args: int) -> "UpdateCmd":
        return cls("+", relation, tuple(args))

    @classmethod
    def delete(cls, relation: str, *args: int) -> "UpdateCmd":
        return cls("-", relation, tuple(args))

    @property
    def is_insert(self) -> bool:
        return self.op == "+"

    def __str__(self) -> str:
        return " ".join([self.op, self.relation, *map(str, self.args)])


class Outcome(Enum):
    APPLIED = "applied"
    NO_CHANGE = "no-change"
    REJECTED_DEGREE = "rejected-degree"


class Database:
    def __init__(self, schema: Schema, degree_bound: int):
        if degree_bound < 2:
            raise ValueError("degree bound must be at least 2")
        self.schema = schema
        self.degree_bound = degree_bound
        self.relations: dict[str, set[tuple[int, ...]]] = {name: set() for name in schema.relations}
        self._adj: dict[int, dict[int, int]] = {}
        self._facts_of: dict[int, set[Fact]] = {}

    # -- reads -----------------------------------------------------------

    @property
    def adom(self):
        return self._facts_of.keys()

    def in_adom(self, a: int) -> bool:
        return a in self._facts_of

    def neighbors(self, a: int):
        nbrs = self._adj.get(a)
        return nbrs.keys() if nbrs else ()

    def degree(self, a: int) -> int:
        return len(self._adj.get(a, ()))

    def facts_of(self, a: int) -> set[Fact]:
        return self._facts_of.get(a, set())

    def contains(self, relation: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations[relation]

    def facts(self) -> Iterable[Fact]:
        for name, tuples in self.relations.items():
            for t in tuples:
                yield (name, t)

    def __len__(self) -> int:
        return sum(len(t) for t in self.relations.values())

    # -- updates ---------------------------------------------------------

    def _validate(self, cmd: UpdateCmd) -> None:
        arity = self.schema.arity(cmd.relation)
        if len(cmd.args) != arity:
            raise ValueError(f"{cmd.relation} has arity {arity}, got {len(cmd.args)} arguments")

    def check_update(self, cmd: UpdateCmd) -> Outcome:
        """Outcome ``apply_update`` would produce, without touching state."""
        self._validate(cmd)
        present = cmd.args in self.relations[cmd.relation]
        if cmd.is_insert:
            if present:
                return Outcome.NO_CHANGE
            distinct = set(cmd.args)
            for a in distinct:
                nbrs = self._adj.get(a, {})
                fresh = sum(1 for b in distinct if b != a and b not in nbrs)
                if len(nbrs) + fresh > self.degree_bound:
                    return Outcome.REJECTED_DEGREE
            return Outcome.APPLIED
        return Outcome.APPLIED if present else Outcome.NO_CHANGE

    def apply_update(self, cmd: UpdateCmd) -> Outcome:
        outcome = self.check_update(cmd)
        if outcome is Outcome.APPLIED:
            if cmd.is_insert:
                self._add(cmd.relation, cmd.args)
            else:
                self._remove(cmd.relation, cmd.args)
        return outcome

    def _add(self, relation: str, args: tuple[int, ...]) -> None:
        self.relations[relation].add(args)
        fact = (relation, args)
        distinct = set(args)
        for a in distinct:
            self._facts_of.setdefault(a, set()).add(fact)
            if len(distinct) > 1:
                nbrs = self._adj.setdefault(a, {})
                for b in distinct:
                    if b != a:
                        nbrs[b] = nbrs.get(b, 0) + 1

    def _remove(self, relation: str, args: tuple[int, ...]) -> None:
        self.relations[relation].discard(args)
        fact = (relation, args)
        distinct = set(args)
        for a in distinct:
            fs = self._facts_of[a]
            fs.discard(fact)
            if not fs:
                del self._facts_of[a]
            if len(distinct) == 1:
                continue
            nbrs = self._adj[a]
            for b in distinct:
                if b != a:
                    nbrs[b] -= 1
                    if nbrs[b] == 0:
                        del nbrs[b]
            if not nbrs:
                del self._adj[a]

    # -- serialization ---------------------------------------------------

    def to_state(self) -> dict:
        return {
            "degree_bound": self.degree_bound,
            "relations": {name: sorted(ts) for name, ts in sorted(self.relations.items())},
            "adjacency": {str(a): sorted(nbrs.items()) for a, nbrs in sorted(self._adj.items())},
        }

    def serialize(self) -> bytes:
        return json.dumps(self.to_state(), sort_keys=True).encode()

    @classmethod
    def from_facts(cls, schema: Schema, degree_bound: int, facts: Iterable[Fact]) -> "Database":
        db = cls(schema, degree_bound)
        for relation, args in facts:
            outcome = db.apply_update(UpdateCmd.insert(relation, *args))
            if outcome is Outcome.REJECTED_DEGREE:
                raise ValueError(f"fact {relation}{tuple(args)} violates the degree bound")
        return db


class Neighborhood:
    """A finite structure: an element set plus facts over those elements.

    Elements without facts are allowed (an isolated centre, or a constant
    outside the active domain).
    """

    __slots__ = ("elements", "facts", "_adj", "_hash")

    def __init__(self, elements: Iterable[int], facts: Iterable[Fact]):
        self.elements = frozenset(elements)
        self.facts = frozenset((rel, tuple(args)) for rel, args in facts)
        for _, args in self.facts:
            for a in args:
                if a not in self.elements:
                    raise ValueError(f"fact mentions {a!r} outside the element set")
        self._adj = None
        self._hash = None

    @property
    def adjacency(self) -> dict:
        if self._adj is None:
            adj = {e: set() for e in self.elements}
            for _, args in self.facts:
                for a in args:
                    for b in args:
                        if a != b:
                            adj[a].add(b)
            self._adj = adj
        return self._adj

    def neighbors(self, a):
        return self.adjacency.get(a, ())

    def degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def restrict(self, elements: Iterable[int]) -> "Neighborhood":
        keep = frozenset(elements)
        return Neighborhood(keep, (f for f in self.facts if all(a in keep for a in f[1])))

    def __eq__(self, other) -> bool:
        return isinstance(other, Neighborhood) and self.elements == other.elements and self.facts == other.facts

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.elements, self.facts))
        return self._hash

    def __repr__(self) -> str:
        return f"Neighborhood({sorted(self.elements)}, {sorted(self.facts)})"


def bfs_ball(neighbors: Callable[[int], Iterable[int]], centres: Iterable[int], radius: int) -> dict[int, int]:
    """Distances from the nearest centre, for every element within ``radius``."""
    dist = {}
    queue = deque()
    for c in centres:
        if c not in dist:
            dist[c] = 0
            queue.append(c)
    while queue:
        a = queue.popleft()
        OPS.tick()
        da = dist[a]
        if da == radius:
            continue
        for b in neighbors(a):
            if b not in dist:
                dist[b] = da + 1
                queue.append(b)
    return dist


def ball(db: Database, centres: Sequence[int], radius: int) -> set[int]:
    return set(bfs_ball(db.neighbors, centres, radius))


def induced_neighborhood(db: Database, centres: Sequence[int], radius: int) -> Neighborhood:
    elems = ball(db, centres, radius)
    return induced_on(db, elems)


def induced_on(db: Database, elems: set[int]) -> Neighborhood:
    facts = set()
    for e in elems:
        for fact in db.facts_of(e):
            if fact not in facts and all(a in elems for a in fact[1]):
                facts.add(fact)
    return Neighborhood(elems, facts)


def dist_leq(db: Database, a: int, b: int, t: int) -> bool:
    if a == b:
        return True
    if t <= 0:
        return False
    return b in bfs_ball(db.neighbors, (a,), t)


def tuples_connected(db: Database, tup: Sequence[int], radius: int) -> bool:
    """Whether the radius-ball around ``tup`` is connected.

    Two positions are linked when their constants are within 2*radius+1;
    the ball is connected exactly when that position graph is.
    """
    k = len(tup)
    if k <= 1:
        return True
    reach = 2 * radius + 1
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(k):
            if j not in seen and dist_leq(db, tup[i], tup[j], reach):
                seen.add(j)
                stack.append(j)
    return len(seen) == k


def _profile(nb: Neighborhood, e) -> tuple:
    inc = sorted((rel, tuple(i for i, a in enumerate(args) if a == e)) for rel, args in nb.facts if e in args)
    return (len(nb.neighbors(e)), tuple(inc))


def isomorphic(n1: Neighborhood, c1: Sequence[int], n2: Neighborhood, c2: Sequence[int]) -> bool:
    """Brute-force isomorphism test fixing the centres position by position.

    Candidate images are pruned by degree and by the multiset of incident
    relation positions; every partial map is checked against the facts
    whose arguments are all mapped.
    """
    if len(c1) != len(c2) or len(n1.elements) != len(n2.elements) or len(n1.facts) != len(n2.facts):
        return False
    fwd: dict = {}
    back: dict = {}
    for a, b in zip(c1, c2):
        if fwd.get(a, b) != b or back.get(b, a) != a:
            return False
        fwd[a] = b
        back[b] = a
    prof1 = {e: _profile(n1, e) for e in n1.elements}
    prof2 = {e: _profile(n2, e) for e in n2.elements}
    if sorted(prof1.values()) != sorted(prof2.values()):
        return False
    if any(prof1[a] != prof2[b] for a, b in fwd.items()):
        return False
    facts_of1: dict = {e: [] for e in n1.elements}
    for f in n1.facts:
        for a in set(f[1]):
            facts_of1[a].append(f)

    def consistent(a) -> bool:
        for rel, args in facts_of1[a]:
            if all(x in fwd for x in args) and (rel, tuple(fwd[x] for x in args)) not in n2.facts:
                return False
        return True

    if not all(consistent(a) for a in list(fwd)):
        return False
    # expand along adjacency so pruning by mapped facts kicks in early
    order = []
    placed = set(fwd)
    frontier = deque(sorted(fwd))
    rest = set(n1.elements) - placed
    while rest:
        if not frontier:
            start = min(rest)
            frontier.append(start)
            order.append(start)
            placed.add(start)
            rest.discard(start)
        a = frontier.popleft()
        for b in sorted(n1.neighbors(a)):
            if b not in placed:
                placed.add(b)
                rest.discard(b)
                order.append(b)
                frontier.append(b)

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in n2.elements:
            if b in back or prof2[b] != prof1[a]:
                continue
            fwd[a] = b
            back[b] = a
            if consistent(a) and extend(i + 1):
                return True
            del fwd[a]
            del back[b]
        return False

    return extend(0)
