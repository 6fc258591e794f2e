"""Neighbourhood types: canonical forms, interning, decomposition, signatures.

A type is a structure together with a tuple of centres and a radius, where
every element lies within the radius of some centre. Types are identified
up to centre-preserving isomorphism by a canonical key, and keys are
interned to small integer ids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .database import Database, Neighborhood, bfs_ball, induced_neighborhood
from .instrument import OPS


class CapExceeded(Exception):
    def __init__(self, found: int, cap: int):
        super().__init__(f"type enumeration exceeded the cap of {cap} candidates ({found} types so far)")
        self.found = found
        self.cap = cap


@dataclass(frozen=True)
class NeighborhoodType:
    structure: Neighborhood
    centres: tuple
    radius: int
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "centres", tuple(self.centres))
        for c in self.centres:
            if c not in self.structure.elements:
                raise ValueError(f"centre {c!r} is not an element of the structure")

    def __eq__(self, other) -> bool:
        return (isinstance(other, NeighborhoodType) and self.radius == other.radius
                and self.centres == other.centres and self.structure == other.structure)

    def __hash__(self) -> int:
        return hash((self.structure, self.centres, self.radius))

    @property
    def arity(self) -> int:
        return len(self.centres)

    def is_valid(self) -> bool:
        """Every element lies within ``radius`` of a centre."""
        near = bfs_ball(self.structure.neighbors, self.centres, self.radius)
        return set(near) == set(self.structure.elements)

    def restrict(self, positions: Sequence[int], radius: int) -> "NeighborhoodType":
        """The ``radius``-type of the sub-tuple of centres at ``positions``."""
        centres = tuple(self.centres[p] for p in positions)
        near = bfs_ball(self.structure.neighbors, centres, radius)
        return NeighborhoodType(self.structure.restrict(near), centres, radius)


# -- canonical forms -----------------------------------------------------

def _compress(values: list) -> list[int]:
    ranks = {v: i for i, v in enumerate(sorted(set(values)))}
    return [ranks[v] for v in values]


class _Prepared:
    """Integer-relabelled copy of a structure, reused across centre tuples."""

    __slots__ = ("elements", "index", "facts", "incidence")

    def __init__(self, structure: Neighborhood):
        self.elements = sorted(structure.elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.facts = [(rel, tuple(self.index[a] for a in args)) for rel, args in sorted(structure.facts)]
        self.incidence: list[list] = [[] for _ in self.elements]
        for rel, args in self.facts:
            for i in set(args):
                pos = tuple(p for p, a in enumerate(args) if a == i)
                self.incidence[i].append((rel, pos, args))


def _refine(prep: _Prepared, colours: list[int]) -> list[int]:
    classes = len(set(colours))
    while True:
        sig = []
        for i, inc in enumerate(prep.incidence):
            OPS.tick()
            sig.append((colours[i], tuple(sorted((rel, pos, tuple(colours[a] for a in args)) for rel, pos, args in inc))))
        refined = _compress(sig)
        count = len(set(refined))
        if count == classes:
            return refined
        colours, classes = refined, count


def _canonical(prep: _Prepared, centres: tuple) -> tuple:
    n = len(prep.elements)
    cidx = tuple(prep.index[c] for c in centres)
    initial = [tuple(p for p, c in enumerate(cidx) if c == i) for i in range(n)]
    best = None

    def search(colours: list[int]) -> None:
        nonlocal best
        colours = _refine(prep, colours)
        if len(set(colours)) == n:
            enc = (n, tuple(colours[c] for c in cidx),
                   tuple(sorted((rel, tuple(colours[a] for a in args)) for rel, args in prep.facts)))
            if best is None or enc < best:
                best = enc
            return
        sizes: dict[int, int] = {}
        for col in colours:
            sizes[col] = sizes.get(col, 0) + 1
        target = min(col for col, s in sizes.items() if s > 1)
        for i in range(n):
            if colours[i] == target:
                search(_compress([(col, 0 if j != i else -1) for j, col in enumerate(colours)]))

    search(_compress(initial))
    return best


def canonical_key(structure: Neighborhood, centres: Sequence) -> tuple:
    """Canonical encoding of ``(structure, centres)``.

    Equal keys mean isomorphic via a centre-fixing bijection. The search
    individualises one vertex at a time and refines colours between steps,
    keeping the smallest encoding over all leaves of the search tree.
    """
    return _canonical(_Prepared(structure), tuple(centres))


class TypeRegistry:
    """Interns canonical keys to dense integer ids."""

    def __init__(self) -> None:
        self._ids: dict[tuple, int] = {}
        self._keys: list[tuple] = []

    def intern(self, key: tuple) -> int:
        tid = self._ids.get(key)
        if tid is None:
            tid = len(self._keys)
            self._ids[key] = tid
            self._keys.append(key)
        return tid

    def lookup(self, key: tuple) -> int | None:
        return self._ids.get(key)

    def key(self, tid: int) -> tuple:
        return self._keys[tid]

    def arity(self, tid: int) -> int:
        return len(self._keys[tid][1])

    def representative(self, tid: int, radius: int) -> NeighborhoodType:
        n, centres, facts = self._keys[tid]
        return NeighborhoodType(Neighborhood(range(n), facts), centres, radius)

    def __len__(self) -> int:
        return len(self._keys)


REGISTRY = TypeRegistry()


def canonicalize(tau: NeighborhoodType, registry: TypeRegistry = REGISTRY, degree_bound: int | None = None) -> int:
    if degree_bound is not None and tau.structure.degree() > degree_bound:
        raise ValueError(f"type has degree {tau.structure.degree()} above the bound {degree_bound}")
    return registry.intern(canonical_key(tau.structure, tau.centres))


def type_of(db: Database, tup: Sequence[int], radius: int) -> NeighborhoodType:
    return NeighborhoodType(induced_neighborhood(db, tup, radius), tuple(tup), radius)


# -- decomposition and signatures ---------------------------------------

@dataclass(frozen=True, order=True)
class Component:
    positions: tuple[int, ...]
    type_id: int

    @property
    def arity(self) -> int:
        return len(self.positions)


@dataclass(frozen=True, order=True)
class Signature:
    """Connected components of a type, ordered by their smallest centre position."""

    components: tuple[Component, ...]

    @property
    def c(self) -> int:
        return len(self.components)

    @property
    def colours(self) -> tuple[int, ...]:
        return tuple(comp.type_id for comp in self.components)

    @property
    def arity(self) -> int:
        return sum(comp.arity for comp in self.components)


def _position_components(adjacent, k: int) -> list[tuple[int, ...]]:
    comps = []
    seen = set()
    for start in range(k):
        if start in seen:
            continue
        members = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(k):
                if j not in members and adjacent(i, j):
                    members.add(j)
                    stack.append(j)
        seen |= members
        comps.append(tuple(sorted(members)))
    return comps


def decompose(tau: NeighborhoodType, registry: TypeRegistry = REGISTRY) -> tuple[Signature, list[NeighborhoodType]]:
    """Split a type into its connected components."""
    adj = tau.structure.adjacency
    # component label of every element, grown from the centres
    label: dict = {}
    for c in tau.centres:
        if c in label:
            continue
        label[c] = c
        stack = [c]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in label:
                    label[b] = c
                    stack.append(b)
    if len(label) != len(tau.structure.elements):
        raise ValueError("type has elements unreachable from every centre")
    blocks = _position_components(lambda i, j: label[tau.centres[i]] == label[tau.centres[j]], tau.arity)
    comps = []
    types = []
    for positions in blocks:
        root = label[tau.centres[positions[0]]]
        elems = [e for e, lab in label.items() if lab == root]
        sub = NeighborhoodType(tau.structure.restrict(elems), tuple(tau.centres[p] for p in positions), tau.radius)
        types.append(sub)
        comps.append(Component(positions, canonicalize(sub, registry)))
    return Signature(tuple(comps)), types


def signature_of_tuple(db: Database, tup: Sequence[int], radius: int, registry: TypeRegistry = REGISTRY) -> Signature:
    return decompose(type_of(db, tup, radius), registry)[0]


def assemble(signature: Signature, radius: int, registry: TypeRegistry = REGISTRY) -> NeighborhoodType:
    """A type with the given signature: the disjoint union of its components."""
    k = signature.arity
    centres = [None] * k
    elements = []
    facts = []
    offset = 0
    for comp in signature.components:
        n, ccentres, cfacts = registry.key(comp.type_id)
        elements.extend(range(offset, offset + n))
        facts.extend((rel, tuple(a + offset for a in args)) for rel, args in cfacts)
        for p, c in zip(comp.positions, ccentres):
            centres[p] = c + offset
        offset += n
    return NeighborhoodType(Neighborhood(elements, facts), tuple(centres), radius)


def set_partitions(k: int) -> list[tuple[tuple[int, ...], ...]]:
    """Partitions of range(k) into blocks, blocks ordered by smallest member."""
    result = []

    def grow(i: int, blocks: list[list[int]]) -> None:
        if i == k:
            result.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            grow(i + 1, blocks)
            b.pop()
        blocks.append([i])
        grow(i + 1, blocks)
        blocks.pop()

    grow(0, [])
    return result


# -- index predicate -----------------------------------------------------

def hnf_index_predicate(query, true_sentences: Iterable[int], tau: NeighborhoodType, registry: TypeRegistry = REGISTRY) -> bool:
    """Evaluate a Hanf-normal-form query on a type, given the true sentences.

    A sphere atom over variables ``v`` holds when the restriction of ``tau``
    to the atom radius around the matching centres is isomorphic to the
    atom's type.
    """
    true_sentences = frozenset(true_sentences)
    if tau.arity != len(query.free_vars):
        raise ValueError(f"type has {tau.arity} centres but the query has {len(query.free_vars)} free variables")
    return query.fold(lambda atom: atom_holds(query, atom, tau), lambda j: j in true_sentences)


def atom_holds(query, atom, tau: NeighborhoodType) -> bool:
    positions = query.positions(atom)
    sub = tau.restrict(positions, atom.type.radius)
    return canonical_key(sub.structure, sub.centres) == atom.key


def compute_index_set(query, true_sentences: Iterable[int], types: Sequence[NeighborhoodType]) -> set[int]:
    return {i for i, tau in enumerate(types) if hnf_index_predicate(query, true_sentences, tau)}


# -- exhaustive enumeration (test oracle) -------------------------------

def enumerate_types(schema, degree_bound: int, radius: int, k: int, cap: int = 200_000) -> list[NeighborhoodType]:
    """All types up to isomorphism, by brute force over small structures.

    Only usable for tiny parameters; raises ``CapExceeded`` once more than
    ``cap`` candidate structures have been examined.
    """
    bound = k * degree_bound ** (radius + 1)
    seen: dict[tuple, NeighborhoodType] = {}
    examined = 0
    for n in range(1, bound + 1):
        elems = list(range(n))
        slots = [(rel, args) for rel, arity in schema for args in itertools.product(elems, repeat=arity)]
        for mask in range(1 << len(slots)):
            facts = [slots[i] for i in range(len(slots)) if mask >> i & 1]
            structure = Neighborhood(elems, facts)
            if structure.degree() > degree_bound:
                continue
            for centres in itertools.product(elems, repeat=k):
                examined += 1
                if examined > cap:
                    raise CapExceeded(len(seen), cap)
                tau = NeighborhoodType(structure, centres, radius)
                if not tau.is_valid():
                    continue
                key = canonical_key(structure, centres)
                seen.setdefault(key, tau)
    return list(seen.values())
