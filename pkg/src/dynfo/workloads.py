"""Random and structured workloads for differential tests and benchmarks."""

from __future__ import annotations

import random
from typing import Iterator

from .database import Database, Outcome, Schema, UpdateCmd
from .logic import And, Formula, HanfSentence, HnfQuery, Not, Or, Sphere
from .nbtypes import NeighborhoodType, type_of

DEFAULT_SCHEMA = Schema({"E": 2, "P": 1})


def random_command(rng: random.Random, schema: Schema, n_constants: int, db: Database | None = None,
                   p_insert: float = 0.6) -> UpdateCmd:
    """A random update; with ``db`` given, deletes pick an existing fact."""
    if db is not None and len(db) and rng.random() > p_insert:
        facts = sorted(db.facts())
        rel, args = rng.choice(facts)
        return UpdateCmd.delete(rel, *args)
    rel = rng.choice(sorted(schema.relations))
    args = [rng.randint(1, n_constants) for _ in range(schema.arity(rel))]
    return UpdateCmd("+" if db is not None or rng.random() < p_insert else "-", rel, tuple(args))


def random_stream(rng: random.Random, schema: Schema, degree_bound: int, n_constants: int, steps: int,
                  p_insert: float = 0.6) -> list[UpdateCmd]:
    """Updates that mostly apply: deletes target present facts."""
    shadow = Database(schema, degree_bound)
    out = []
    for _ in range(steps):
        cmd = random_command(rng, schema, n_constants, shadow, p_insert)
        shadow.apply_update(cmd)
        out.append(cmd)
    return out


def sample_types(rng: random.Random, schema: Schema, degree_bound: int, radius: int, arity: int,
                 count: int, n_constants: int = 10) -> list[NeighborhoodType]:
    """Types that actually occur in small random databases."""
    db = Database(schema, degree_bound)
    for cmd in random_stream(rng, schema, degree_bound, n_constants, 4 * n_constants, p_insert=0.8):
        db.apply_update(cmd)
    adom = sorted(db.adom) or [1]
    out = []
    for _ in range(count):
        tup = tuple(rng.choice(adom) for _ in range(arity))
        if arity > 1 and rng.random() < 0.5:
            # bias towards connected tuples, which random picks rarely hit
            a = rng.choice(adom)
            nbrs = sorted(db.neighbors(a)) or [a]
            tup = (a,) + tuple(rng.choice(nbrs + [a]) for _ in range(arity - 1))
        out.append(type_of(db, tup, radius))
    return out


def random_hnf_query(rng: random.Random, schema: Schema, degree_bound: int, k: int, radius: int,
                     n_sentences: int, n_atoms: int = 2) -> HnfQuery:
    """A random Boolean combination of sphere atoms and Hanf sentences."""
    free = tuple(f"x{i + 1}" for i in range(k))
    sentences = []
    for _ in range(n_sentences):
        tau = sample_types(rng, schema, degree_bound, rng.randint(0, radius), 1, 1)[0]
        if rng.random() < 0.5:
            sentences.append(HanfSentence("atleast", rng.randint(1, 3), 0, tau))
        else:
            m = rng.randint(2, 3)
            sentences.append(HanfSentence("mod", m, rng.randrange(m), tau))
    atoms: list[Formula] = []
    if k:
        for idx in range(n_atoms):
            if idx == 0:
                positions = list(range(k))
            else:
                size = rng.randint(1, k)
                positions = sorted(rng.sample(range(k), size))
            r = radius if idx == 0 else rng.randint(0, radius)
            tau = sample_types(rng, schema, degree_bound, r, len(positions), 1)[0]
            atoms.append(Sphere(tau, tuple(free[p] for p in positions)))
    leaves = atoms + sentences
    if not leaves:
        return HnfQuery(free, And(()))

    def build(depth: int) -> Formula:
        if depth == 0 or rng.random() < 0.3:
            leaf = rng.choice(leaves)
            return Not(leaf) if rng.random() < 0.3 else leaf
        parts = tuple(build(depth - 1) for _ in range(rng.randint(2, 3)))
        return And(parts) if rng.random() < 0.5 else Or(parts)

    formula = build(2)
    if atoms:
        # keep the result set selective: anchor on the full-width atom
        formula = And((atoms[0], formula)) if rng.random() < 0.7 else formula
    return HnfQuery(free, formula)


def gated_query(rng: random.Random, schema: Schema, degree_bound: int, k: int, radius: int) -> HnfQuery:
    """``chi and sph1 or not chi and sph2`` for a random sentence ``chi``."""
    free = tuple(f"x{i + 1}" for i in range(k))
    chi = HanfSentence("atleast", rng.randint(1, 2), 0,
                       sample_types(rng, schema, degree_bound, radius, 1, 1)[0])
    t1, t2 = sample_types(rng, schema, degree_bound, radius, k, 2)
    s1, s2 = Sphere(t1, free), Sphere(t2, free)
    return HnfQuery(free, Or((And((chi, s1)), And((Not(chi), s2)))))


def path_facts(n: int, label_every: int = 0) -> Iterator[tuple[str, tuple[int, ...]]]:
    """A directed path ``1 -> 2 -> ... -> n``, optionally with unary labels."""
    for i in range(1, n):
        yield ("E", (i, i + 1))
    if label_every:
        for i in range(1, n + 1, label_every):
            yield ("P", (i,))


def apply_all(session, cmds) -> list[Outcome]:
    return [session.update(cmd) for cmd in cmds]
