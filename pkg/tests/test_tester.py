import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynfo.database import Database, Schema, UpdateCmd
from dynfo.logic import And, HnfQuery, eval_query_oracle, parse_query, sentence_values
from dynfo.nbtypes import REGISTRY, assemble, hnf_index_predicate
from dynfo.sphere_index import SphereIndex
from dynfo.tester import SignatureCatalog, sentence_mask
from dynfo.tester import Tester as MembershipTester
from dynfo.workloads import DEFAULT_SCHEMA, random_hnf_query, random_stream

SCHEMA = Schema({"E": 2, "P": 1})

EDGE = "(type EDGE (elems 1 2) (centres 1 2) (tuples (E 1 2)) (radius 0))"
LOOSE = "(type LOOSE (elems 1 2) (centres 1 2) (tuples) (radius 0))"
LABEL = "(type LABEL (elems 1) (centres 1) (tuples (P 1)) (radius 0))"


def rig(text):
    query = parse_query(text, SCHEMA) if isinstance(text, str) else text
    db = Database(SCHEMA, 2)
    index = SphereIndex(db, query.radius, query.k)
    catalog = SignatureCatalog(query, query.radius)
    return query, db, index, MembershipTester(index, catalog)


def feed(index, tester, cmd):
    _, changes = index.apply_update(cmd)
    for _, _, tid in changes:
        if tid is not None:
            tester.catalog.add_type(tid, REGISTRY.arity(tid))


def test_directed_edge():
    query, db, index, tester = rig(EDGE + "(query (x y) (sphere EDGE (x y)))")
    feed(index, tester, UpdateCmd.insert("E", 1, 2))
    assert tester.test((1, 2))
    assert not tester.test((2, 1))
    assert not tester.test((1, 7))
    with pytest.raises(ValueError):
        tester.test((1,))


def test_true_query_accepts_the_active_domain():
    query, db, index, tester = rig(HnfQuery(("x",), And(())))
    assert not tester.test((1,))
    for cmd in (UpdateCmd.insert("E", 1, 2), UpdateCmd.insert("P", 5)):
        feed(index, tester, cmd)
    assert [a for a in range(1, 8) if tester.test((a,))] == [1, 2, 5]


def test_sentence_truth_swaps_the_accepted_signatures():
    query, db, index, tester = rig(EDGE + LOOSE + LABEL + """(query (x y) (or
        (and (hanf atleast 1 LABEL) (sphere EDGE (x y)))
        (and (not (hanf atleast 1 LABEL)) (sphere LOOSE (x y)))))""")
    for cmd in (UpdateCmd.insert("E", 1, 2), UpdateCmd.insert("E", 5, 6)):
        feed(index, tester, cmd)
    loose = {t for t in itertools.product(range(1, 7), repeat=2) if tester.test(t)}
    assert loose == eval_query_oracle(db, query)
    assert (1, 5) in loose and (1, 2) not in loose
    before = set(tester.K)
    tester.j_mask = sentence_mask({0})
    after = set(tester.K)
    assert before and after and not before & after
    assert tester.test((1, 2)) and not tester.test((2, 1)) and not tester.test((1, 5))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_catalog_agrees_with_the_type_predicate(seed):
    rng = random.Random(seed)
    k, r = rng.choice([(1, 0), (1, 1), (2, 0), (2, 1), (3, 0)])
    query = random_hnf_query(rng, DEFAULT_SCHEMA, 2, k, r, rng.randint(0, 2))
    db = Database(DEFAULT_SCHEMA, 2)
    index = SphereIndex(db, query.radius, k)
    catalog = SignatureCatalog(query, query.radius)
    tester = MembershipTester(index, catalog)
    for cmd in random_stream(rng, DEFAULT_SCHEMA, 2, 8, 25):
        feed(index, tester, cmd)
    for sig, mask in catalog.accept_masks.items():
        tau = assemble(sig, query.radius)
        for j_mask in range(1 << len(query.sentences)):
            true_set = {j for j in range(len(query.sentences)) if j_mask >> j & 1}
            assert bool(mask >> j_mask & 1) == hnf_index_predicate(query, true_set, tau)
    # with the sentence values frozen, membership equals the oracle over sphere atoms
    truth = sentence_values(db, query.sentences)
    tester.j_mask = sentence_mask(j for j, v in enumerate(truth) if v)
    expected = eval_query_oracle(db, query)
    for tup in itertools.product(sorted(db.adom), repeat=k):
        assert tester.test(tup) == (tup in expected)
