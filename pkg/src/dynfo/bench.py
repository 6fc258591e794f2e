"""Operation-count benchmarks on growing databases.

Each run builds a database of the requested size by replaying generator
updates, then measures, in elementary operations, a batch of updates near
the middle of the structure, membership tests on random tuples, the count
query, and the gap between consecutive emissions of an enumeration.
"""

from __future__ import annotations

import random
import time

from .database import Database, Schema, UpdateCmd
from .engine import Engine
from .enumeration import END
from .instrument import OPS, measure
from .logic import HnfQuery, Sphere
from .nbtypes import type_of
from .workloads import DEFAULT_SCHEMA

GENERATORS = ("path", "ladder", "random")


def far_pair_query(radius: int = 0, schema: Schema = DEFAULT_SCHEMA) -> HnfQuery:
    """``(x1, x2)`` far apart, ``x1`` labelled, ``x2`` unlabelled.

    Both neighbourhoods are taken from a path labelled at every third
    vertex, so on the benchmark generators the query has many answers.
    """
    first = 5
    second = first + 3 * (radius + 1) + 1
    db = Database(schema, 2)
    for i in range(1, second + radius + 2):
        db.apply_update(UpdateCmd.insert("E", i, i + 1))
        if i % 3 == 2:
            db.apply_update(UpdateCmd.insert("P", i))
    tau = type_of(db, (first, second), radius)
    return HnfQuery(("x1", "x2"), Sphere(tau, ("x1", "x2")))


def generator_facts(name: str, size: int, rng: random.Random, label_every: int = 3):
    """Facts of a degree-2 or degree-3 structure on ``size`` elements."""
    if name == "path":
        for i in range(1, size):
            yield ("E", (i, i + 1))
    elif name == "ladder":
        half = max(size // 2, 1)
        for i in range(1, half):
            yield ("E", (i, i + 1))
            yield ("E", (half + i, half + i + 1))
        for i in range(1, half + 1, 2):
            yield ("E", (i, half + i))
    elif name == "random":
        # a long path with sparse random chords, degree at most 3
        for i in range(1, size):
            yield ("E", (i, i + 1))
        used = set()
        for _ in range(size // 10):
            a, b = rng.randint(2, size - 1), rng.randint(2, size - 1)
            if abs(a - b) > 1 and a not in used and b not in used:
                used |= {a, b}
                yield ("E", (a, b))
    else:
        raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
    for i in range(1, size + 1, label_every):
        yield ("P", (i,))


def degree_for(name: str) -> int:
    return 2 if name == "path" else 3


def middle_updates(db: Database, rng: random.Random, count: int, window: int = 12) -> list[UpdateCmd]:
    """Label toggles and edge deletions/re-insertions near the middle element."""
    mid = max(len(db.adom) // 2, 1)
    shadow = {fact for fact in db.facts() if any(mid - window <= a <= mid + window for a in fact[1])}
    out = []
    for _ in range(count):
        a = rng.randint(max(mid - window, 1), mid + window)
        if rng.random() < 0.5:
            fact = ("P", (a,))
        else:
            fact = ("E", (a, a + 1))
        if fact in shadow:
            shadow.discard(fact)
            out.append(UpdateCmd.delete(fact[0], *fact[1]))
        else:
            shadow.add(fact)
            out.append(UpdateCmd.insert(fact[0], *fact[1]))
    return out


def run_one(size: int, generator: str = "path", radius: int = 0, seed: int = 0, updates: int = 200,
            tests: int = 200, emissions: int = 500) -> dict:
    rng = random.Random(seed)
    started = time.perf_counter()
    engine = Engine(DEFAULT_SCHEMA, degree_for(generator), far_pair_query(radius))
    with measure() as pre:
        for relation, args in generator_facts(generator, size, rng):
            engine.update(UpdateCmd.insert(relation, *args))
    update_ops = []
    for cmd in middle_updates(engine.db, rng, updates):
        with measure() as m:
            engine.update(cmd)
        update_ops.append(m.ops)
    with measure() as m:
        engine.count()
    count_ops = m.ops
    adom = sorted(engine.db.adom)
    test_ops = []
    for _ in range(tests):
        tup = (rng.choice(adom), rng.choice(adom))
        with measure() as m:
            engine.test(tup)
        test_ops.append(m.ops)
    delays = []
    last = OPS.count
    emitted = 0
    for item in engine.enumerate():
        now = OPS.count
        delays.append(now - last)
        last = now
        if item is END:
            break
        emitted += 1
        if emitted >= emissions:
            break
    return {
        "size": size,
        "generator": generator,
        "radius": radius,
        "preprocess_ops": pre.ops,
        "updates": len(update_ops),
        "max_update_ops": max(update_ops, default=0),
        "mean_update_ops": sum(update_ops) / len(update_ops) if update_ops else 0.0,
        "count_ops": count_ops,
        "max_test_ops": max(test_ops, default=0),
        "emissions": emitted,
        "max_delay_ops": max(delays, default=0),
        "mean_delay_ops": sum(delays) / len(delays) if delays else 0.0,
        "result_count": engine.count(),
        "seconds": round(time.perf_counter() - started, 3),
    }


def run_bench(sizes, generator: str = "path", radius: int = 0, seed: int = 0, **kw) -> list[dict]:
    return [run_one(size, generator, radius, seed, **kw) for size in sizes]


def ratios(rows: list[dict]) -> dict[str, float]:
    """max/min of each per-operation metric across the rows."""
    out = {}
    for key in ("max_update_ops", "count_ops", "max_test_ops", "max_delay_ops"):
        values = [row[key] for row in rows]
        if values:
            out[key] = max(values) / max(min(values), 1)
    return out
