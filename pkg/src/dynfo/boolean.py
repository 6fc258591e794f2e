"""Counters for Hanf sentences, maintained under updates.

For every distinct (type, radius) a sentence mentions we keep the set of
active-domain elements whose neighbourhood has that type. An update can
only change the type of elements within the radius of the updated
constants, so each update re-examines just that ball.
"""

from __future__ import annotations

from .database import Database, Outcome, UpdateCmd, ball, induced_neighborhood
from .instrument import OPS
from .logic import HanfSentence, HnfQuery
from .nbtypes import canonical_key


class HanfCounter:
    def __init__(self, sentences: list[HanfSentence]):
        self.sentences = list(sentences)
        self.keys: list[tuple] = []
        self.radii: list[int] = []
        self._slot: list[int] = []
        for s in self.sentences:
            key = (s.key, s.type.radius)
            if key not in self.keys:
                self.keys.append(key)
                self.radii.append(s.type.radius)
            self._slot.append(self.keys.index(key))
        self.members: list[set[int]] = [set() for _ in self.keys]
        self.truth: list[bool] = [self._holds(j) for j in range(len(self.sentences))]

    @property
    def counts(self) -> list[int]:
        return [len(m) for m in self.members]

    def _holds(self, j: int) -> bool:
        return self.sentences[j].holds(len(self.members[self._slot[j]]))

    @property
    def true_sentences(self) -> frozenset[int]:
        return frozenset(j for j, t in enumerate(self.truth) if t)

    def prepare(self, db: Database, cmd: UpdateCmd) -> dict[int, set[int]]:
        """Balls to revisit, computed on the database that holds the tuple."""
        return {r: ball(db, cmd.args, r) for r in set(self.radii)}

    def finish(self, db: Database, cmd: UpdateCmd, regions: dict[int, set[int]]) -> None:
        by_radius: dict[int, list[int]] = {}
        for slot, r in enumerate(self.radii):
            by_radius.setdefault(r, []).append(slot)
        for r, slots in by_radius.items():
            for a in regions[r]:
                OPS.tick()
                key = None
                if db.in_adom(a):
                    key = canonical_key(induced_neighborhood(db, (a,), r), (a,))
                for slot in slots:
                    members = self.members[slot]
                    if key == self.keys[slot][0]:
                        members.add(a)
                    else:
                        members.discard(a)
        self.truth = [self._holds(j) for j in range(len(self.sentences))]

    def to_state(self) -> dict:
        return {"members": [sorted(m) for m in self.members], "truth": self.truth}


class BoolState:
    """Answer of a sentence: a Boolean combination of Hanf sentences."""

    def __init__(self, query: HnfQuery):
        if query.k != 0:
            raise ValueError("Boolean answering needs a sentence (no free variables)")
        if query.atoms:
            raise ValueError("a sentence cannot contain sphere atoms")
        self.query = query
        self.counter = HanfCounter(query.sentences)
        self.answer = self._fold()

    def _fold(self) -> bool:
        truth = self.counter.truth
        return self.query.fold(lambda atom: False, lambda j: truth[j])

    def prepare(self, db: Database, cmd: UpdateCmd):
        return self.counter.prepare(db, cmd)

    def finish(self, db: Database, cmd: UpdateCmd, regions) -> None:
        self.counter.finish(db, cmd, regions)
        self.answer = self._fold()

    def to_state(self) -> dict:
        return {"counter": self.counter.to_state(), "answer": self.answer}


def bool_init(query: HnfQuery) -> BoolState:
    return BoolState(query)


def bool_update(state: BoolState, db: Database, cmd: UpdateCmd) -> Outcome:
    """Apply ``cmd`` to ``db`` and bring ``state`` up to date."""
    outcome = db.check_update(cmd)
    if outcome is not Outcome.APPLIED:
        return outcome
    if cmd.is_insert:
        db._add(cmd.relation, cmd.args)
        regions = state.prepare(db, cmd)
    else:
        regions = state.prepare(db, cmd)
        db._remove(cmd.relation, cmd.args)
    state.finish(db, cmd, regions)
    return outcome


def bool_answer(state: BoolState) -> bool:
    OPS.tick()
    return state.answer
