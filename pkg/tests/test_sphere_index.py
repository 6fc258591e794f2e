import random

from hypothesis import given, settings
from hypothesis import strategies as st

from dynfo.counting import far_tuples_bruteforce
from dynfo.database import Database, Outcome, UpdateCmd, dist_leq
from dynfo.nbtypes import canonicalize, type_of
from dynfo.sphere_index import SignatureView, SphereIndex
from dynfo.workloads import DEFAULT_SCHEMA, random_stream

SCHEMA = DEFAULT_SCHEMA


def fresh_index(k, r, d=2):
    db = Database(SCHEMA, d)
    return db, SphereIndex(db, r, k)


def view_snapshot(view):
    graph = view.graph
    return [set(col) for col in graph.colours], graph.edges()


def test_first_edge_indexes_all_connected_tuples():
    db, index = fresh_index(2, 0)
    outcome, changes = index.apply_update(UpdateCmd.insert("E", 1, 2))
    assert outcome is Outcome.APPLIED
    assert set(index.gamma) == {(1,), (2,), (1, 2), (2, 1), (1, 1), (2, 2)}
    assert {tup for tup, old, new in changes} == set(index.gamma)


def test_deleting_the_only_tuple_empties_the_index():
    db, index = fresh_index(2, 0)
    index.apply_update(UpdateCmd.insert("E", 1, 2))
    index.apply_update(UpdateCmd.delete("E", 1, 2))
    assert index.gamma == {} and index.by_elem == {} and index.by_elem_type == {}


def test_lookup_examples():
    db, index = fresh_index(2, 0)
    index.apply_update(UpdateCmd.insert("E", 1, 2))
    assert index.lookup((1, 2)) == canonicalize(type_of(db, (1, 2), 0))
    assert index.lookup((1, 9)) is None
    assert all(index.lookup((a,)) is not None for a in db.adom)


def test_far_update_keeps_types():
    db, index = fresh_index(1, 1)
    for i in range(1, 12):
        index.apply_update(UpdateCmd.insert("E", i, i + 1))
    before = index.lookup((2,))
    index.apply_update(UpdateCmd.insert("P", 9))
    assert index.lookup((2,)) == before


def test_single_colour_view_is_the_extent():
    db, index = fresh_index(1, 0)
    for i in range(1, 5):
        index.apply_update(UpdateCmd.insert("E", i, i + 1))
    tid = index.lookup((1,))
    view = SignatureView(index, (tid,))
    assert set(view.graph.colours[0]) == index.extent(tid)
    assert view.graph.edges() == set() and view.count == len(index.extent(tid))


def test_two_singletons_on_a_path():
    db, index = fresh_index(1, 0)
    for i in range(1, 5):
        index.apply_update(UpdateCmd.insert("E", i, i + 1))
    tid = index.lookup((1,))
    view = SignatureView(index, (tid, tid))
    far = set(far_tuples_bruteforce(view.graph, limit=10 ** 4))
    assert ((1,), (5,)) in far
    # a tuple conflicts with itself, so it never pairs with itself
    assert all(a != b for a, b in far)
    assert far == {(a, b) for a in view.graph.colours[0] for b in view.graph.colours[1]
                   if not dist_leq(db, a[0], b[0], 1)}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([(1, 1), (2, 0), (2, 1), (3, 0)]), st.sampled_from([2, 3]))
def test_index_and_views_match_a_rebuild(seed, kr, d):
    k, r = kr
    rng = random.Random(seed)
    db, index = fresh_index(k, r, d)
    stream = random_stream(rng, SCHEMA, d, 10, 60)
    views = []
    for step, cmd in enumerate(stream):
        index.apply_update(cmd)
        if step == 20 and index.gamma:
            # views created mid-stream must see the same graph as later rebuilds
            ids = sorted(set(index.gamma.values()))
            for _ in range(3):
                colours = tuple(rng.choice(ids) for _ in range(rng.randint(1, 3)))
                views.append(SignatureView(index, colours))
    assert index.gamma == index.rebuild_reference()
    for view in views:
        assert view_snapshot(view) == view_snapshot(SignatureView(index, view.colours))
        assert view.count == len(far_tuples_bruteforce(view.graph, limit=10 ** 7))
    for tup, tid in index.gamma.items():
        assert tid == canonicalize(type_of(db, tup, r))
