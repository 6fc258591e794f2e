"""Command-line front end.

Loads a schema, a query and an update stream, replays the stream, then runs
one mode (answer, test, count, enum, check, bench) or a script of commands.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 divergence found by ``check``.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from typing import Iterable, TextIO

from .database import Outcome, Schema, UpdateCmd
from .engine import ActiveEnumeration, Engine, OracleSession
from .enumeration import END
from .logic import HnfQuery, ParseError, eval_query_oracle, parse_query, read_sexprs
from .workloads import random_stream

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_DIVERGENCE = 0, 1, 2, 3

# check mode tests every k-tuple over the active domain up to this many tuples
CHECK_TUPLE_LIMIT = 20_000


class UsageError(Exception):
    pass


def parse_schema(text: str) -> Schema:
    """``(schema (R 2) (P 1) ...)``."""
    forms = read_sexprs(text)
    if len(forms) != 1 or not isinstance(forms[0], list) or not forms[0] or forms[0][0] != "schema":
        raise ParseError("expected a single (schema (R arity) ...) form")
    relations = []
    for entry in forms[0][1:]:
        if not isinstance(entry, list) or len(entry) != 2 or isinstance(entry[0], list):
            raise ParseError(f"expected (name arity), got {entry!r}", getattr(entry, "pos", None))
        try:
            relations.append((entry[0], int(entry[1])))
        except (TypeError, ValueError):
            raise ParseError(f"arity of {entry[0]} must be an integer", getattr(entry, "pos", None)) from None
    try:
        return Schema(relations)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_update(line: str, schema: Schema) -> UpdateCmd | None:
    """One stream line; None for blank and comment lines."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    if parts[0] not in ("+", "-") or len(parts) < 2:
        raise ParseError(f"expected '+ R a1 ...' or '- R a1 ...', got {body!r}")
    op, relation, args = parts[0], parts[1], parts[2:]
    if relation not in schema:
        raise ParseError(f"unknown relation {relation!r}")
    if len(args) != schema.arity(relation):
        raise ParseError(f"{relation} has arity {schema.arity(relation)}, got {len(args)} arguments")
    try:
        values = tuple(int(a) for a in args)
        return UpdateCmd(op, relation, values)
    except ValueError:
        raise ParseError(f"constants must be positive integers: {body!r}") from None


def parse_stream(text: str, schema: Schema) -> list[tuple[int, UpdateCmd]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            cmd = parse_update(line, schema)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if cmd is not None:
            out.append((lineno, cmd))
    return out


class Session:
    """A query session plus the bookkeeping the command loop needs."""

    def __init__(self, schema: Schema, degree_bound: int, query, oracle_only: bool = False):
        self.schema = schema
        self.degree_bound = degree_bound
        self.query = query
        if oracle_only:
            self.backend = OracleSession(schema, degree_bound, query)
        else:
            if not isinstance(query, HnfQuery):
                raise UsageError("the query is not a Boolean combination of sphere atoms and Hanf "
                                 "sentences; use --oracle-only to evaluate it by brute force")
            self.backend = Engine(schema, degree_bound, query)
        self.oracle_only = oracle_only
        self.k = len(query.free_vars)

    @property
    def version(self) -> int:
        return self.backend.version

    def update(self, cmd: UpdateCmd) -> Outcome:
        return self.backend.update(cmd)


def preprocess(schema: Schema, degree_bound: int, query, stream: Iterable[tuple[int, UpdateCmd]],
               oracle_only: bool = False, log: TextIO | None = None) -> Session:
    """Start from the empty database and replay ``stream``; rejected lines are reported."""
    session = Session(schema, degree_bound, query, oracle_only)
    for lineno, cmd in stream:
        if session.update(cmd) is Outcome.REJECTED_DEGREE and log is not None:
            print(f"line {lineno}: rejected by the degree bound: {cmd}", file=log)
    return session


def first_divergence(engine: Engine, query) -> str | None:
    """Compare every facility of ``engine`` with brute force; None if all agree."""
    truth = eval_query_oracle(engine.db, query)
    if engine.answer() != bool(truth):
        return f"answer: engine {engine.answer()}, oracle {bool(truth)}"
    if engine.count() != len(truth):
        return f"count: engine {engine.count()}, oracle {len(truth)}"
    emitted = engine.results()
    if len(emitted) != len(set(emitted)):
        return "enumerate: duplicate tuples"
    if set(emitted) != truth:
        extra = sorted(set(emitted) - truth)[:1]
        missing = sorted(truth - set(emitted))[:1]
        return f"enumerate: extra {extra}, missing {missing}"
    adom = sorted(engine.db.adom)
    if engine.k and len(adom) ** engine.k <= CHECK_TUPLE_LIMIT:
        for tup in itertools.product(adom, repeat=engine.k):
            if engine.test(tup) != (tup in truth):
                return f"test {' '.join(map(str, tup))}: engine {engine.test(tup)}, oracle {tup in truth}"
    return None


def _format_tuple(tup) -> str:
    return " ".join(map(str, tup))


def run_command(session: Session, line: str) -> list[str]:
    """Run one command and return its output lines."""
    parts = line.split("#", 1)[0].split()
    if not parts:
        return []
    name, args = parts[0], parts[1:]
    backend = session.backend
    if name == "update":
        cmd = parse_update(" ".join(args), session.schema)
        if cmd is None:
            raise ParseError("update needs '+ R a1 ...' or '- R a1 ...'")
        return [session.update(cmd).value]
    if name == "answer":
        return ["yes" if backend.answer() else "no"]
    if name == "count":
        return [str(backend.count())]
    if name == "test":
        try:
            tup = tuple(int(a) for a in args)
        except ValueError:
            raise ParseError(f"test needs integers, got {' '.join(args)!r}") from None
        if len(tup) != session.k:
            raise UsageError(f"test needs {session.k} constants, got {len(tup)}")
        return ["member" if backend.test(tup) else "nonmember"]
    if name in ("enumerate", "enum"):
        out = [_format_tuple(t) for t in backend.enumerate() if t is not END]
        return out + ["#done"]
    if name == "check":
        if session.oracle_only:
            return ["OK"]
        problem = first_divergence(backend, session.query)
        return ["OK" if problem is None else f"divergence: {problem}"]
    raise UsageError(f"unknown command {name!r}")


def check_stream(schema: Schema, degree_bound: int, query, stream: list[tuple[int, UpdateCmd]]) -> str | None:
    """Replay ``stream`` and compare with brute force after every applied update."""
    engine = Engine(schema, degree_bound, query)
    problem = first_divergence(engine, query)
    if problem:
        return f"before any update: {problem}"
    for lineno, cmd in stream:
        if engine.update(cmd) is Outcome.APPLIED:
            problem = first_divergence(engine, query)
            if problem:
                return f"after {cmd} (line {lineno}): {problem}"
    return None


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dynfo", description=__doc__.splitlines()[0])
    p.add_argument("--schema", help="schema file: (schema (R 2) (P 1) ...)")
    p.add_argument("--query", help="query file with type declarations and one (query (vars) formula)")
    p.add_argument("--stream", help="update stream: one '+ R a1 ...' or '- R a1 ...' per line")
    p.add_argument("--degree", type=int, default=2, help="degree bound of the Gaifman graph")
    p.add_argument("--mode", choices=["answer", "test", "count", "enum", "check", "bench"], default="count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-only", action="store_true", help="answer everything by brute-force evaluation")
    p.add_argument("--tuple", nargs="*", type=int, default=[], help="constants for --mode test")
    p.add_argument("--random-updates", type=int, default=0, metavar="N",
                   help="append N random updates (seeded by --seed) to the stream")
    p.add_argument("--constants", type=int, default=20, help="constant range for random updates")
    p.add_argument("--commands", metavar="FILE", help="run a command script ('-' for stdin) instead of --mode")
    p.add_argument("--sizes", default="1000,10000", help="bench: comma-separated database sizes")
    p.add_argument("--generator", default="path", help="bench: path, ladder or random")
    p.add_argument("--radius", type=int, default=0, help="bench: query radius")
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def main(argv: list[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.mode == "bench" and not args.commands:
        from .bench import GENERATORS, run_bench

        if args.generator not in GENERATORS:
            print(f"unknown generator {args.generator!r}", file=sys.stderr)
            return EXIT_USAGE
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError:
            print(f"--sizes must be comma-separated integers, got {args.sizes!r}", file=sys.stderr)
            return EXIT_USAGE
        rows = run_bench(sizes, args.generator, args.radius, args.seed)
        for row in rows:
            row.pop("seconds")
        print(json.dumps(rows, sort_keys=True), file=out)
        return EXIT_OK
    if not args.schema or not args.query:
        print("--schema and --query are required", file=sys.stderr)
        return EXIT_USAGE
    try:
        schema = parse_schema(_read(args.schema))
        query = parse_query(_read(args.query), schema)
        stream = parse_stream(_read(args.stream), schema) if args.stream else []
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValueError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.random_updates:
        rng = random.Random(args.seed)
        extra = random_stream(rng, schema, args.degree, args.constants, args.random_updates)
        stream += [(0, cmd) for cmd in extra]
    try:
        if args.mode == "check" and not args.commands:
            if args.oracle_only:
                print("OK", file=out)
                return EXIT_OK
            if not isinstance(query, HnfQuery):
                raise UsageError("check needs a query in Hanf normal form")
            problem = check_stream(schema, args.degree, query, stream)
            print("OK" if problem is None else f"divergence {problem}", file=out)
            return EXIT_OK if problem is None else EXIT_DIVERGENCE
        session = preprocess(schema, args.degree, query, stream, args.oracle_only, log=sys.stderr)
        if args.commands:
            lines = _read(args.commands).splitlines()
        elif args.mode == "test":
            lines = ["test " + _format_tuple(args.tuple)]
        else:
            lines = [{"answer": "answer", "count": "count", "enum": "enumerate"}[args.mode]]
        status = EXIT_OK
        for line in lines:
            for text in run_command(session, line):
                print(text, file=out)
                if text.startswith("divergence"):
                    status = EXIT_DIVERGENCE
        return status
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ActiveEnumeration as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
