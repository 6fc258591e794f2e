import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynfo.boolean import bool_answer, bool_init, bool_update
from dynfo.database import Database, Outcome, Schema, UpdateCmd
from dynfo.logic import HnfQuery, Not, eval_query_oracle, parse_query, sentence_values
from dynfo.workloads import DEFAULT_SCHEMA, random_hnf_query, random_stream

SCHEMA = Schema({"E": 2})
LONE = "(type LONE (elems 1) (centres 1) (tuples) (radius 0))"
# with E directed, a degree-1 element at radius 1 has an out-edge or an in-edge
OUT = "(type OUT (elems 1 2) (centres 1) (tuples (E 1 2)) (radius 1))"
IN = "(type IN (elems 1 2) (centres 2) (tuples (E 1 2)) (radius 1))"


def test_initial_answers():
    assert not bool_answer(bool_init(parse_query(LONE + "(query () (hanf atleast 1 LONE))", SCHEMA)))
    assert bool_answer(bool_init(parse_query(LONE + "(query () (hanf mod 0 2 LONE))", SCHEMA)))
    assert bool_answer(bool_init(parse_query(LONE + "(query () (not (hanf atleast 1 LONE)))", SCHEMA)))


def test_needs_a_sentence():
    with pytest.raises(ValueError):
        bool_init(parse_query(LONE + "(query (x) (sphere LONE (x)))", SCHEMA))


def test_degree_one_census():
    q = parse_query(OUT + IN + "(query () (or (hanf atleast 1 OUT) (hanf atleast 1 IN)))", SCHEMA)
    db = Database(SCHEMA, 2)
    state = bool_init(q)
    assert sum(state.counter.counts) == 0 and not bool_answer(state)
    assert bool_update(state, db, UpdateCmd.insert("E", 1, 2)) is Outcome.APPLIED
    assert sum(state.counter.counts) == 2 and bool_answer(state)
    assert bool_answer(state) == bool_answer(state)
    bool_update(state, db, UpdateCmd.delete("E", 1, 2))
    assert sum(state.counter.counts) == 0 and not bool_answer(state)


def test_far_update_leaves_the_census():
    q = parse_query(OUT + "(query () (hanf atleast 1 OUT))", SCHEMA)
    db = Database(SCHEMA, 2)
    state = bool_init(q)
    bool_update(state, db, UpdateCmd.insert("E", 1, 2))
    before = state.to_state()
    bool_update(state, db, UpdateCmd.insert("E", 10, 10))
    assert state.to_state() == before


def test_rejected_update_changes_nothing():
    q = parse_query(OUT + "(query () (hanf atleast 1 OUT))", SCHEMA)
    db = Database(SCHEMA, 2)
    state = bool_init(q)
    for b in (2, 3):
        bool_update(state, db, UpdateCmd.insert("E", 1, b))
    before = state.to_state()
    assert bool_update(state, db, UpdateCmd.insert("E", 1, 4)) is Outcome.REJECTED_DEGREE
    assert state.to_state() == before


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_census_and_answer_track_a_rescan(seed):
    rng = random.Random(seed)
    d = rng.choice([2, 3])
    q = random_hnf_query(rng, DEFAULT_SCHEMA, d, 0, rng.randint(0, 1), rng.randint(1, 3))
    if not q.sentences:
        q = HnfQuery((), Not(q.formula))
    db = Database(DEFAULT_SCHEMA, d)
    state = bool_init(q)
    for cmd in random_stream(rng, DEFAULT_SCHEMA, d, 12, 40):
        bool_update(state, db, cmd)
        assert state.counter.truth == sentence_values(db, q.sentences)
        assert bool_answer(state) == bool(eval_query_oracle(db, q))
