"""Shared pieces for the test-suite: random views and structural bound checks."""

from __future__ import annotations

import random

from dynfo.database import ball
from dynfo.graph import ColoredGraph, Delta
from dynfo.logic import And, HanfSentence, Not, Or, Truth


def random_delta(graph: ColoredGraph, rng: random.Random, n: int, p_colour: float = 0.5,
                 p_loop: float = 0.15) -> Delta:
    """A delta that changes the graph: toggles a colour or an edge on ``range(n)``."""
    if rng.random() < p_colour:
        j = rng.randrange(graph.c)
        u = rng.randrange(n)
        return Delta.del_colour(j, u) if u in graph.colours[j] else Delta.add_colour(j, u)
    u = rng.randrange(n)
    v = u if rng.random() < p_loop else rng.randrange(n)
    return Delta.del_edge(u, v) if graph.has_edge(u, v) else Delta.add_edge(u, v)


def capped_delta(graph: ColoredGraph, rng: random.Random, n: int, cap: int) -> Delta:
    """Like ``random_delta`` but never grows a colour class beyond ``cap``."""
    while True:
        d = random_delta(graph, rng, n)
        if d.kind == "col+" and len(graph.colours[d.colour]) >= cap:
            continue
        return d


class BoundLog:
    """Counts structural-bound checks and collects violations."""

    def __init__(self) -> None:
        self.checks = 0
        self.violations: list[str] = []

    def check(self, ok: bool, what: str) -> None:
        self.checks += 1
        if not ok:
            self.violations.append(what)


def check_skip_bounds(skips, log: BoundLog, where: str = "") -> None:
    """Prefix-set size against (c*d)^c and support sizes against (d+1)^(2c).

    ``d`` is the view's current maximum degree, floored at 1.
    """
    graph = skips.graph
    c = graph.c
    d = max(graph.max_degree, 1)
    log.check(len(skips.prefixes) <= (c * d) ** c, f"{where} |S|={len(skips.prefixes)} > (cd)^c with c={c}, d={d}")
    limit = (d + 1) ** (2 * c)
    for i in range(c):
        for y, support in skips.support[i].items():
            log.check(len(support) <= limit, f"{where} support of {y!r} in colour {i} has {len(support)} > {limit}")


def check_engine_bounds(engine, log: BoundLog, cmd=None) -> None:
    d = engine.db.degree_bound
    r = engine.radius
    k = engine.k
    if cmd is not None:
        region = ball(engine.db, cmd.args, r)
        m = len(set(cmd.args))
        log.check(len(region) <= m * d ** (r + 1), f"ball of {cmd.args} has {len(region)} elements")
    for key, view in engine.views.items():
        limit = d ** (2 * k * k * (2 * r + 1))
        log.check(view.graph.max_degree <= limit, f"view {key} degree {view.graph.max_degree} > {limit}")
        if view.skips is not None:
            check_skip_bounds(view.skips, log, f"view {key}")


def fix_sentences(formula, true_set: frozenset[int], sentences: list[HanfSentence]):
    """Replace every Hanf sentence by its given truth value."""
    if isinstance(formula, HanfSentence):
        return Truth(sentences.index(formula) in true_set)
    if isinstance(formula, Not):
        return Not(fix_sentences(formula.body, true_set, sentences))
    if isinstance(formula, And):
        return And(tuple(fix_sentences(p, true_set, sentences) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(fix_sentences(p, true_set, sentences) for p in formula.parts))
    return formula
