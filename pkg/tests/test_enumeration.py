import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynfo.counting import CountState, far_tuples_bruteforce
from dynfo.enumeration import END, SkipState, enumerate_fast, enumerate_naive, scan_skip, skip_query
from dynfo.graph import ColoredGraph, Delta

from helpers import random_delta


def build(c, deltas):
    graph = ColoredGraph(c)
    skips = SkipState(graph)
    if deltas:
        graph.apply(deltas)
    return graph, skips


def test_empty_view_only_ends():
    graph, skips = build(2, [])
    assert list(enumerate_fast(graph, skips)) == [END]
    assert list(enumerate_naive(graph, skips)) == [END]


def test_edge_leaves_one_pair():
    graph, skips = build(2, [Delta.add_colour(0, "u"), Delta.add_colour(0, "v"), Delta.add_colour(1, "w"),
                             Delta.add_edge("u", "w")])
    assert list(enumerate_naive(graph, skips)) == [("v", "w"), END]
    assert list(enumerate_fast(graph, skips)) == [("v", "w"), END]


def test_singleton_colours_emit_one_tuple():
    graph, skips = build(3, [Delta.add_colour(j, f"v{j}") for j in range(3)])
    assert list(enumerate_fast(graph, skips)) == [("v0", "v1", "v2"), END]


def test_skip_trivial_cases():
    graph, skips = build(2, [Delta.add_colour(0, "a"), Delta.add_colour(1, "b"), Delta.add_edge("a", "b")])
    assert skip_query(skips, 0, "a", ()) == "a"
    assert skip_query(skips, 0, None, ("b",)) is None
    assert skip_query(skips, 0, "a", ("b",)) is None
    with pytest.raises(ValueError):
        skip_query(skips, 0, "a", ("a", "b"))


def test_first_vertex_of_a_colour_heads_the_list():
    graph, skips = build(2, [Delta.add_colour(1, "x"), Delta.add_colour(0, "v"), Delta.add_edge("v", "x")])
    lst = graph.colours[0]
    assert lst.first == "v" and lst.succ("v") is None
    assert skips.support[0]["v"] >= {"x"}


def test_green_list_walkthrough():
    greens = [f"g{i}" for i in range(1, 21)]
    deltas = [Delta.add_colour(3, g) for g in reversed(greens)]
    deltas += [Delta.add_colour(0, "b"), Delta.add_colour(1, "r"), Delta.add_colour(2, "y")]
    deltas += [Delta.add_edge("b", g) for g in ("g1", "g2", "g3")]
    deltas += [Delta.add_edge("r", "g4"), Delta.add_edge("y", "g6")]
    graph, skips = build(4, deltas)
    assert list(graph.colours[3])[:6] == greens[:6]
    assert skips.skip(3, "g1", ["b", "r", "y"]) == "g5"
    items = list(enumerate_fast(graph, skips))
    assert items[0] == ("b", "r", "y", "g5")
    expected = {("b", "r", "y", g) for g in greens if g not in ("g1", "g2", "g3", "g4", "g6")}
    assert set(items[:-1]) == expected and items[-1] is END


def test_isolated_delete_matches_rebuild():
    rng = random.Random(3)
    graph = ColoredGraph(3)
    skips = SkipState(graph)
    for _ in range(60):
        graph.apply([random_delta(graph, rng, 12)])
    lonely = [v for v in graph.vertices() if not graph.adj.get(v) and graph.colours_of(v)]
    assert lonely
    v = lonely[0]
    graph.apply([Delta.del_colour(j, v) for j in graph.colours_of(v)])
    fresh = SkipState(graph)
    assert fresh.to_state() == skips.to_state()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_enumerations_match_bruteforce_and_tables_match_scan(seed, c):
    rng = random.Random(seed)
    graph = ColoredGraph(c)
    skips = SkipState(graph)
    counter = CountState(graph)
    for _ in range(30):
        graph.apply([random_delta(graph, rng, 10)])
        far = set(far_tuples_bruteforce(graph, limit=10 ** 5))
        for run in (enumerate_fast, enumerate_naive):
            items = list(run(graph, skips))
            assert items[-1] is END and items.count(END) == 1
            assert len(items) - 1 == len(far) == counter.n3
            assert set(items[:-1]) == far
        for i in range(c):
            for y, levels in skips.levels[i].items():
                fresh = skips.fresh_levels(i, y)
                assert levels == fresh
                assert all(a <= b for a, b in zip(levels, levels[1:]))
    vertices = sorted(graph.vertices(), key=repr)
    for i in range(c):
        for y in list(graph.colours[i]) + [None]:
            for size in range(c):
                for blockers in itertools.combinations(vertices, size):
                    assert skips.skip(i, y, blockers) == scan_skip(graph, i, y, blockers)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_large_colours_never_dead_end(seed, c):
    rng = random.Random(seed)
    graph = ColoredGraph(c)
    skips = SkipState(graph)
    for _ in range(60):
        graph.apply([random_delta(graph, rng, 30, p_colour=0.7)])
    stats = {}
    list(enumerate_naive(graph, skips, stats))
    assert stats.get("dead_ends", 0) == 0
