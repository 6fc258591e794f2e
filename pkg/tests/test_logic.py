import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynfo.database import Database, Schema
from dynfo.logic import (
    And, FoQuery, HanfSentence, HnfQuery, Not, OracleTooLarge, ParseError, Sphere, eval_oracle,
    eval_query_oracle, free_variables, parse_formula, parse_query, quantifier_rank, sentence_values,
)
from dynfo.nbtypes import type_of
from dynfo.workloads import DEFAULT_SCHEMA, random_hnf_query, random_stream

SCHEMA = Schema({"E": 2, "P": 1})

T0 = "(type T0 (elems 1) (centres 1) (tuples) (radius 0))"
T1 = "(type T1 (elems 1 2) (centres 1 2) (tuples (E 1 2)) (radius 0))"


def db_of(facts, d=2):
    return Database.from_facts(SCHEMA, d, facts)


def test_counting_quantifier_over_a_sphere_is_a_sentence():
    q = parse_query(T0 + "(query () (exists>= 1 x (sphere T0 (x))))", SCHEMA)
    assert isinstance(q, HnfQuery)
    (s,) = q.sentences
    assert s.kind == "atleast" and s.m == 1 and s.type.arity == 1


def test_boolean_tree_with_atom_and_sentence():
    q = parse_query(T0 + T1 + "(query (x y) (and (sphere T1 (x y)) (not (hanf mod 0 2 T0))))", SCHEMA)
    assert isinstance(q, HnfQuery)
    assert len(q.atoms) == 1 and len(q.sentences) == 1
    assert q.k == 2 and q.radius == 0


def test_modulus_errors():
    with pytest.raises(ParseError):
        parse_query("(query (x) (existsmod 2 2 y (E x y)))", SCHEMA)
    with pytest.raises(ValueError):
        HanfSentence("mod", 1, 0, type_of(db_of([("P", (1,))]), (1,), 0))


def test_parse_errors_report_problems():
    for text in ["(query (x) (Q x))", "(query (x) (E x))", "(query (x) (and (P x)", "(query (x) (P y))",
                 "(type T (elems 1) (centres 2) (tuples) (radius 0)) (query (x) (sphere T (x)))"]:
        with pytest.raises(ParseError):
            parse_query(text, SCHEMA)


def test_first_order_queries_stay_first_order():
    q = parse_query("(query (x) (exists y (and (E x y) (P y))))", SCHEMA)
    assert isinstance(q, FoQuery)
    assert free_variables(q.formula) == {"x"}
    assert quantifier_rank(q.formula) == 1


def test_oracle_examples():
    assert not eval_oracle(Database(SCHEMA, 2), parse_formula("(exists x (E x x))", SCHEMA))
    two = db_of([("E", (1, 2)), ("E", (1, 3))])
    assert eval_oracle(two, parse_formula("(exists>= 2 y (E x y))", SCHEMA), {"x": 1})
    one = db_of([("E", (1, 2))])
    assert eval_oracle(one, parse_formula("(existsmod 0 2 y (E x y))", SCHEMA), {"x": 2})
    with pytest.raises(ValueError):
        eval_oracle(one, parse_formula("(E x y)", SCHEMA), {"x": 1})


def test_query_oracle_examples():
    sentence = parse_query("(query () (exists x (P x)))", SCHEMA)
    assert eval_query_oracle(db_of([("P", (4,))]), sentence) == {()}
    assert eval_query_oracle(db_of([("E", (4, 5))]), sentence) == set()
    # E is directed, so "one neighbour at radius 1" is the out-edge or the in-edge shape
    q = parse_query("""
        (type OUT (elems 1 2) (centres 1) (tuples (E 1 2)) (radius 1))
        (type IN (elems 1 2) (centres 2) (tuples (E 1 2)) (radius 1))
        (query (x) (or (sphere OUT (x)) (sphere IN (x))))""", SCHEMA)
    assert eval_query_oracle(db_of([("E", (1, 2)), ("E", (2, 3))]), q) == {(1,), (3,)}
    everything = parse_query("(query (x) (= x x))", SCHEMA)
    assert eval_query_oracle(db_of([("E", (1, 2)), ("P", (7,))]), everything) == {(1,), (2,), (7,)}


def test_oracle_size_guard():
    db = db_of([("E", (i, i + 1)) for i in range(1, 200)])
    deep = parse_query("(query (a b c) (exists x (exists y (exists z (= x y)))))", SCHEMA)
    with pytest.raises(OracleTooLarge):
        eval_query_oracle(db, deep)


def test_implies_iff_forall():
    db = db_of([("E", (1, 2)), ("P", (1,)), ("P", (2,))])
    assert eval_oracle(db, parse_formula("(forall x (implies (P x) (P x)))", SCHEMA))
    assert eval_oracle(db, parse_formula("(forall x (P x))", SCHEMA))
    assert not eval_oracle(db, parse_formula("(iff (P x) (E x x))", SCHEMA), {"x": 1})


def test_sphere_atoms_with_unlisted_variables_are_rejected():
    tau = type_of(db_of([("P", (1,))]), (1,), 0)
    with pytest.raises(ValueError):
        HnfQuery(("x",), Sphere(tau, ("y",)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sentence_values_match_first_order_counting(seed):
    rng = random.Random(seed)
    db = Database(DEFAULT_SCHEMA, 2)
    for cmd in random_stream(rng, DEFAULT_SCHEMA, 2, 10, 30):
        db.apply_update(cmd)
    q = random_hnf_query(rng, DEFAULT_SCHEMA, 2, 0, 1, 2)
    for s, value in zip(q.sentences, sentence_values(db, q.sentences)):
        count = sum(1 for a in db.adom if eval_oracle(db, Sphere(s.type, ("x",)), {"x": a}))
        assert value == s.holds(count)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_compiled_query_agrees_with_fold(seed):
    rng = random.Random(seed)
    q = random_hnf_query(rng, DEFAULT_SCHEMA, 2, 2, 1, 2)
    run = q.compile()
    for _ in range(20):
        truth = [rng.random() < 0.5 for _ in q.atoms]
        mask = rng.randrange(1 << len(q.sentences))
        lookup = dict(zip(q.atoms, truth))
        assert run(truth, mask) == q.fold(lookup.__getitem__, lambda j: bool(mask >> j & 1))


def test_empty_conjunction_is_true():
    q = HnfQuery(("x",), And(()))
    assert q.fold(lambda atom: False, lambda j: False)
    assert not HnfQuery(("x",), Not(And(()))).fold(lambda atom: False, lambda j: False)
