"""A dynamic query session: one database plus every structure answering the query."""

from __future__ import annotations

from typing import Iterator, Sequence

from .boolean import HanfCounter
from .database import Database, Outcome, Schema, UpdateCmd
from .enumeration import END, enumerate_fast
from .instrument import OPS
from .logic import FoQuery, HnfQuery, eval_query_oracle
from .nbtypes import REGISTRY, Signature, TypeRegistry
from .sphere_index import SignatureView, SphereIndex
from .tester import SignatureCatalog, Tester, sentence_mask


class ActiveEnumeration(RuntimeError):
    pass


class Engine:
    """Maintains answer, membership test, count and enumeration under updates.

    ``with_enumeration=False`` skips the skip-table structures when only counts and
    tests are needed.
    """

    def __init__(self, schema: Schema, degree_bound: int, query: HnfQuery,
                 with_enumeration: bool = True, registry: TypeRegistry = REGISTRY):
        if not isinstance(query, HnfQuery):
            raise TypeError("the engine needs a query in Hanf normal form")
        self.schema = schema
        self.query = query
        self.k = query.k
        self.radius = query.radius
        self.db = Database(schema, degree_bound)
        self.registry = registry
        self.version = 0
        self.hanf = HanfCounter(query.sentences)
        self._with_enum = with_enumeration
        self._enumerating = False
        self.views: dict[tuple[int, ...], SignatureView] = {}
        self._layouts: dict[Signature, tuple] = {}
        self._mult = None
        self.total = 0
        self._answer = False
        if self.k:
            self.index = SphereIndex(self.db, self.radius, self.k, registry)
            self.catalog = SignatureCatalog(query, self.radius, registry)
            self.tester = Tester(self.index, self.catalog)
            self.tester.j_mask = sentence_mask(self.hanf.true_sentences)
        self._refresh()

    # -- updates ---------------------------------------------------------

    def update(self, cmd: UpdateCmd) -> Outcome:
        if self._enumerating:
            raise ActiveEnumeration("cannot update while an enumeration is running")
        outcome = self.db.check_update(cmd)
        if outcome is not Outcome.APPLIED:
            return outcome
        db = self.db
        if cmd.is_insert:
            db._add(cmd.relation, cmd.args)
            tokens = self._prepare(cmd)
        else:
            tokens = self._prepare(cmd)
            db._remove(cmd.relation, cmd.args)
        hanf_region, index_region = tokens
        self.hanf.finish(db, cmd, hanf_region)
        if self.k:
            changes, woken = self.index.finish(db, cmd, index_region)
            self.index.notify(changes)
            for tid in woken:
                for sig in self.catalog.add_type(tid, self.registry.arity(tid), self.index.live):
                    self._ensure_view(sig)
                    if self._mult is not None and sig in self.catalog.accepted(self._mult[0]):
                        key = self._layout(sig)[0]
                        self._mult[1][key] = self._mult[1].get(key, 0) + 1
            self.tester.j_mask = sentence_mask(self.hanf.true_sentences)
        self._refresh()
        self.version += 1
        return outcome

    def _prepare(self, cmd: UpdateCmd):
        return (self.hanf.prepare(self.db, cmd),
                self.index.prepare(self.db, cmd) if self.k else None)

    def _ensure_view(self, sig: Signature) -> SignatureView:
        # colour sequences that are permutations of each other have the same
        # far-tuple count, so they share one view with sorted colours
        key = tuple(sorted(sig.colours))
        view = self.views.get(key)
        if view is None:
            view = SignatureView(self.index, key, with_enumeration=self._with_enum)
            self.views[key] = view
        return view

    def _layout(self, sig: Signature) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
        """View key of ``sig`` and its component positions in view colour order."""
        hit = self._layouts.get(sig)
        if hit is None:
            perm = sorted(range(sig.c), key=lambda j: sig.components[j].type_id)
            hit = self._layouts[sig] = (tuple(sig.colours[j] for j in perm),
                                        [sig.components[j].positions for j in perm])
        return hit

    def _multiplicity(self) -> dict[tuple[int, ...], int]:
        """Number of accepted signatures per view under the current sentence values."""
        if self._mult is None or self._mult[0] != self.tester.j_mask:
            mult: dict[tuple[int, ...], int] = {}
            for sig in self.tester.K:
                key = self._layout(sig)[0]
                mult[key] = mult.get(key, 0) + 1
            self._mult = (self.tester.j_mask, mult)
        return self._mult[1]

    def _refresh(self) -> None:
        truth = self.hanf.truth
        if self.k == 0:
            self._answer = self.query.fold(lambda atom: False, lambda j: truth[j])
            self.total = int(self._answer)
            return
        views = self.views
        self.total = sum(n * views[key].count for key, n in self._multiplicity().items())
        self._answer = self.total > 0

    def apply_stream(self, cmds) -> list[Outcome]:
        return [self.update(cmd) for cmd in cmds]

    # -- queries ---------------------------------------------------------

    def answer(self) -> bool:
        OPS.tick()
        return self._answer

    def count(self) -> int:
        OPS.tick()
        return self.total

    def test(self, tup: Sequence[int]) -> bool:
        if len(tup) != self.k:
            raise ValueError(f"expected a {self.k}-tuple, got {len(tup)} values")
        if self.k == 0:
            return self._answer
        return self.tester.test(tuple(tup))

    def accepted_signatures(self) -> list[Signature]:
        """Accepted signatures in the order they were first accepted."""
        return list(self.tester.K) if self.k else []

    def enumerate(self) -> Iterator:
        """Yield result tuples, then ``END``. Updates are refused meanwhile."""
        if not self._with_enum:
            raise RuntimeError("engine was built without enumeration structures")
        if self._enumerating:
            raise ActiveEnumeration("an enumeration is already running")
        self._enumerating = True
        try:
            if self.k == 0:
                if self._answer:
                    yield ()
            else:
                k = self.k
                for sig in self.tester.K:
                    key, positions = self._layout(sig)
                    view = self.views[key]
                    if not view.count:
                        continue
                    for item in enumerate_fast(view.graph, view.skips):
                        if item is END:
                            break
                        out = [0] * k
                        for pos, part in zip(positions, item):
                            for p, a in zip(pos, part):
                                out[p] = a
                        yield tuple(out)
            yield END
        finally:
            self._enumerating = False

    def results(self) -> list[tuple]:
        return [t for t in self.enumerate() if t is not END]

    # -- state -----------------------------------------------------------

    def to_state(self) -> dict:
        state = {"version": self.version, "db": self.db.to_state(), "hanf": self.hanf.to_state(),
                 "total": self.total}
        if self.k:
            state["index"] = self.index.to_state()
            state["j_mask"] = self.tester.j_mask
            state["views"] = {repr(key): view.to_state() for key, view in sorted(self.views.items())}
        return state


class OracleSession:
    """Same interface as ``Engine``, answering everything by brute force."""

    def __init__(self, schema: Schema, degree_bound: int, query: HnfQuery | FoQuery):
        self.schema = schema
        self.query = query
        self.k = len(query.free_vars)
        self.db = Database(schema, degree_bound)
        self.version = 0

    def update(self, cmd: UpdateCmd) -> Outcome:
        outcome = self.db.apply_update(cmd)
        if outcome is Outcome.APPLIED:
            self.version += 1
        return outcome

    def _results(self) -> set[tuple]:
        return eval_query_oracle(self.db, self.query)

    def answer(self) -> bool:
        return bool(self._results())

    def count(self) -> int:
        return len(self._results())

    def test(self, tup: Sequence[int]) -> bool:
        if len(tup) != self.k:
            raise ValueError(f"expected a {self.k}-tuple, got {len(tup)} values")
        return tuple(tup) in self._results()

    def enumerate(self) -> Iterator:
        yield from sorted(self._results())
        yield END

    def results(self) -> list[tuple]:
        return sorted(self._results())
