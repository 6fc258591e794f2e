"""Membership testing through signatures.

A tuple's neighbourhood type is determined by how its positions group into
connected components and by the type of each component. The catalog
assembles every signature that can be built from component types seen so
far and records, for each assignment of truth values to the Hanf
sentences, whether the query accepts it. Testing a tuple then costs one
index lookup per pair of positions and one per component.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .instrument import OPS
from .logic import HnfQuery
from .nbtypes import REGISTRY, Component, Signature, TypeRegistry, decompose, set_partitions
from .sphere_index import SphereIndex

MAX_SENTENCES = 10


class SignatureCatalog:
    def __init__(self, query: HnfQuery, radius: int, registry: TypeRegistry = REGISTRY):
        if len(query.sentences) > MAX_SENTENCES:
            raise ValueError(f"at most {MAX_SENTENCES} Hanf sentences are supported")
        self.query = query
        self.k = query.k
        self.radius = radius
        self.registry = registry
        self.partitions = set_partitions(self.k)
        self.by_arity: dict[int, list[int]] = {m: [] for m in range(1, self.k + 1)}
        self.known: set[int] = set()
        self.accept_masks: dict[Signature, int] = {}
        # insertion-ordered, which fixes the enumeration order
        self.K_by_J: list[dict[Signature, None]] = [{} for _ in range(1 << len(query.sentences))]
        # each atom as a signature over its own argument positions
        self._atom_shapes = [(query.positions(atom), atom.type.radius, decompose(atom.type, registry)[0])
                            for atom in query.atoms]
        self._eval = query.compile()
        self._pieces: dict[tuple, list[tuple[tuple[int, ...], int]]] = {}

    def accepted(self, j_mask: int) -> dict[Signature, None]:
        return self.K_by_J[j_mask]

    def add_type(self, tid: int, arity: int, live: dict[int, set[int]] | None = None) -> list[Signature]:
        """Register a component type that has just become realized.

        Signatures combine ``tid`` with the ids in ``live`` (by arity), or
        with every id seen so far when ``live`` is None. A signature only has
        tuples while all its component types are realized, so passing the
        currently realized ids keeps the catalog to combinations that occur.
        Returns the new signatures accepted under at least one truth
        assignment to the sentences.
        """
        if arity > self.k:
            return []
        if tid not in self.known:
            self.known.add(tid)
            self.by_arity[arity].append(tid)
        source = self.by_arity if live is None else {m: sorted(ids) for m, ids in live.items()}
        fresh = set()
        for blocks in self.partitions:
            pools = [source[len(b)] for b in blocks]
            for slot, block in enumerate(blocks):
                if len(block) != arity:
                    continue
                choices = [pool if i != slot else [tid] for i, pool in enumerate(pools)]
                for ids in itertools.product(*choices):
                    fresh.add(Signature(tuple(Component(b, t) for b, t in zip(blocks, ids))))
        out = []
        for sig in sorted(fresh):
            if sig in self.accept_masks:
                continue
            mask = self._evaluate(sig)
            self.accept_masks[sig] = mask
            if mask:
                out.append(sig)
                for j_mask in range(len(self.K_by_J)):
                    if mask >> j_mask & 1:
                        self.K_by_J[j_mask][sig] = None
        return out

    def _pieces_of(self, tid: int, centres: tuple[int, ...], radius: int) -> list[tuple[tuple[int, ...], int]]:
        """Components of the ``radius``-type around some centres of type ``tid``."""
        key = (tid, centres, radius)
        hit = self._pieces.get(key)
        if hit is None:
            sub = self.registry.representative(tid, self.radius).restrict(centres, radius)
            sig, _ = decompose(sub, self.registry)
            hit = self._pieces[key] = [(comp.positions, comp.type_id) for comp in sig.components]
        return hit

    def _atom_holds(self, shape, sig: Signature) -> bool:
        # A ball around centres in a disjoint union is the union of the balls
        # taken inside each part, so the atom's type splits part by part.
        positions, radius, wanted = shape
        parts = []
        for comp in sig.components:
            picked = [(i, comp.positions.index(p)) for i, p in enumerate(positions) if p in comp.positions]
            if not picked:
                continue
            outer = [i for i, _ in picked]
            for sub_positions, tid in self._pieces_of(comp.type_id, tuple(c for _, c in picked), radius):
                parts.append(Component(tuple(outer[q] for q in sub_positions), tid))
        parts.sort()
        return Signature(tuple(parts)) == wanted

    def _evaluate(self, sig: Signature) -> int:
        truth = [self._atom_holds(shape, sig) for shape in self._atom_shapes]
        mask = 0
        for j_mask in range(len(self.K_by_J)):
            if self._eval(truth, j_mask):
                mask |= 1 << j_mask
        return mask


def sentence_mask(true_sentences) -> int:
    mask = 0
    for j in true_sentences:
        mask |= 1 << j
    return mask


class Tester:
    def __init__(self, index: SphereIndex, catalog: SignatureCatalog):
        self.index = index
        self.catalog = catalog
        self.j_mask = 0

    @property
    def K(self) -> dict[Signature, None]:
        return self.catalog.accepted(self.j_mask)

    def signature(self, tup: Sequence[int]) -> Signature | None:
        """Signature of ``tup`` from index lookups; None if it has no type."""
        k = self.catalog.k
        if len(tup) != k:
            raise ValueError(f"expected a {k}-tuple, got {len(tup)} values")
        db = self.index.db
        for a in tup:
            OPS.tick()
            if not db.in_adom(a):
                return None
        lookup = self.index.lookup
        linked = [[False] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                if lookup((tup[i], tup[j])) is not None:
                    linked[i][j] = linked[j][i] = True
        comps = []
        seen = [False] * k
        for start in range(k):
            if seen[start]:
                continue
            members = [start]
            seen[start] = True
            for i in members:
                for j in range(k):
                    OPS.tick()
                    if linked[i][j] and not seen[j]:
                        seen[j] = True
                        members.append(j)
            members.sort()
            tid = lookup(tuple(tup[p] for p in members))
            if tid is None:
                return None
            comps.append(Component(tuple(members), tid))
        return Signature(tuple(comps))

    def test(self, tup: Sequence[int]) -> bool:
        sig = self.signature(tuple(tup))
        OPS.tick()
        return sig is not None and sig in self.catalog.K_by_J[self.j_mask]
