"""First-order logic with counting and modulo quantifiers, plus sphere atoms.

Formulas are written as s-expressions::

    (type T0 (elems 1 2) (centres 1) (tuples (E 1 2)) (radius 1))
    (query (x y) (and (sphere T1 (x y)) (not (hanf mod 0 2 T0))))

The evaluator here is a direct recursive model checker under active-domain
semantics. It is exponential in the quantifier rank and serves as the
reference the dynamic structures are checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .database import Database, Neighborhood, Schema, induced_neighborhood, isomorphic
from .nbtypes import NeighborhoodType, canonical_key

ORACLE_LIMIT = 10 ** 8


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message if pos is None else f"{message} (at offset {pos})")
        self.pos = pos


class OracleTooLarge(RuntimeError):
    pass


# -- AST -----------------------------------------------------------------

class Formula:
    pass


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsAtLeast(Formula):
    m: int
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsMod(Formula):
    i: int
    m: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.m < 2 or not 0 <= self.i < self.m:
            raise ValueError(f"modulo quantifier needs m >= 2 and 0 <= i < m, got i={self.i}, m={self.m}")


@dataclass(frozen=True)
class Sphere(Formula):
    type: NeighborhoodType
    vars: tuple[str, ...]
    key: tuple = field(compare=False, hash=False, repr=False, default=None)

    def __post_init__(self):
        if len(self.vars) != self.type.arity:
            raise ValueError(f"sphere atom over {len(self.vars)} variables needs a type with as many centres")
        if self.key is None:
            object.__setattr__(self, "key", canonical_key(self.type.structure, self.type.centres))


@dataclass(frozen=True)
class HanfSentence(Formula):
    """``kind`` is "atleast" (count >= m) or "mod" (count == i mod m)."""

    kind: str
    m: int
    i: int
    type: NeighborhoodType
    key: tuple = field(compare=False, hash=False, repr=False, default=None)

    def __post_init__(self):
        if self.type.arity != 1:
            raise ValueError("Hanf sentences count single elements; the type needs one centre")
        if self.kind == "atleast":
            if self.m < 1:
                raise ValueError("threshold must be at least 1")
        elif self.kind == "mod":
            if self.m < 2 or not 0 <= self.i < self.m:
                raise ValueError(f"modulo needs m >= 2 and 0 <= i < m, got i={self.i}, m={self.m}")
        else:
            raise ValueError(f"unknown Hanf sentence kind {self.kind!r}")
        if self.key is None:
            object.__setattr__(self, "key", canonical_key(self.type.structure, self.type.centres))

    def holds(self, count: int) -> bool:
        return count >= self.m if self.kind == "atleast" else count % self.m == self.i


def free_variables(f: Formula) -> set[str]:
    if isinstance(f, Truth):
        return set()
    if isinstance(f, Eq):
        return {f.left, f.right}
    if isinstance(f, (Rel, Sphere)):
        return set(f.args if isinstance(f, Rel) else f.vars)
    if isinstance(f, HanfSentence):
        return set()
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or)):
        return set().union(*(free_variables(p) for p in f.parts))
    if isinstance(f, (Exists, ExistsAtLeast, ExistsMod)):
        return free_variables(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, HanfSentence):
        return 1
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, (And, Or)):
        return max((quantifier_rank(p) for p in f.parts), default=0)
    if isinstance(f, (Exists, ExistsAtLeast, ExistsMod)):
        return 1 + quantifier_rank(f.body)
    return 0


# -- queries -------------------------------------------------------------

@dataclass(frozen=True)
class FoQuery:
    free_vars: tuple[str, ...]
    formula: Formula


class HnfQuery:
    """A Boolean combination of sphere atoms and Hanf sentences."""

    def __init__(self, free_vars: Sequence[str], formula: Formula):
        self.free_vars = tuple(free_vars)
        if len(set(self.free_vars)) != len(self.free_vars):
            raise ValueError("free variables must be distinct")
        self.formula = formula
        self.atoms: list[Sphere] = []
        self.sentences: list[HanfSentence] = []
        self._collect(formula)
        self._positions = {}
        for atom in self.atoms:
            for v in atom.vars:
                if v not in self.free_vars:
                    raise ValueError(f"sphere atom uses {v!r}, which is not a free variable of the query")
            self._positions[atom] = tuple(self.free_vars.index(v) for v in atom.vars)

    def _collect(self, f: Formula) -> None:
        if isinstance(f, Sphere):
            if f not in self.atoms:
                self.atoms.append(f)
        elif isinstance(f, HanfSentence):
            if f not in self.sentences:
                self.sentences.append(f)
        elif isinstance(f, Not):
            self._collect(f.body)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                self._collect(p)
        elif not isinstance(f, Truth):
            raise ValueError(f"{type(f).__name__} is not allowed in Hanf normal form")

    @property
    def k(self) -> int:
        return len(self.free_vars)

    @property
    def radius(self) -> int:
        return max((a.type.radius for a in self.atoms), default=0)

    def positions(self, atom: Sphere) -> tuple[int, ...]:
        return self._positions[atom]

    def compile(self) -> Callable[[Sequence[bool], int], bool]:
        """Evaluator taking atom truths (in ``atoms`` order) and a bitmask of true sentences."""
        atom_index = {a: i for i, a in enumerate(self.atoms)}
        sentence_index = {s: j for j, s in enumerate(self.sentences)}

        def build(f: Formula):
            if isinstance(f, Truth):
                value = f.value
                return lambda atoms, mask: value
            if isinstance(f, Sphere):
                i = atom_index[f]
                return lambda atoms, mask: atoms[i]
            if isinstance(f, HanfSentence):
                j = sentence_index[f]
                return lambda atoms, mask: bool(mask >> j & 1)
            if isinstance(f, Not):
                body = build(f.body)
                return lambda atoms, mask: not body(atoms, mask)
            parts = [build(p) for p in f.parts]
            if isinstance(f, And):
                return lambda atoms, mask: all(p(atoms, mask) for p in parts)
            return lambda atoms, mask: any(p(atoms, mask) for p in parts)

        return build(self.formula)

    def fold(self, atom_value: Callable[[Sphere], bool], sentence_value: Callable[[int], bool]) -> bool:
        sentence_index = {s: j for j, s in enumerate(self.sentences)}

        def go(f: Formula) -> bool:
            if isinstance(f, Truth):
                return f.value
            if isinstance(f, Sphere):
                return atom_value(f)
            if isinstance(f, HanfSentence):
                return sentence_value(sentence_index[f])
            if isinstance(f, Not):
                return not go(f.body)
            if isinstance(f, And):
                return all(go(p) for p in f.parts)
            return any(go(p) for p in f.parts)

        return go(self.formula)

    def as_fo(self) -> FoQuery:
        return FoQuery(self.free_vars, self.formula)


def to_hnf(query: FoQuery) -> HnfQuery | None:
    try:
        return HnfQuery(query.free_vars, query.formula)
    except ValueError:
        return None


# -- s-expression reader -------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == ";" or ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            start = i
            while i < n and text[i] not in " \t\r\n();":
                i += 1
            tokens.append((text[start:i], start))
    return tokens


class _Node(list):
    pos = 0


def read_sexprs(text: str) -> list:
    tokens = _tokenize(text)
    pos = 0

    def read():
        nonlocal pos
        tok, at = tokens[pos]
        pos += 1
        if tok == "(":
            node = _Node()
            node.pos = at
            while True:
                if pos >= len(tokens):
                    raise ParseError("unbalanced parenthesis", at)
                if tokens[pos][0] == ")":
                    pos += 1
                    return node
                node.append(read())
        if tok == ")":
            raise ParseError("unexpected ')'", at)
        return tok

    out = []
    while pos < len(tokens):
        out.append(read())
    return out


def _where(node) -> int | None:
    return getattr(node, "pos", None)


def _int(tok, what: str, node=None) -> int:
    if isinstance(tok, list):
        raise ParseError(f"expected {what}, got a list", _where(tok))
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected {what}, got {tok!r}", _where(node)) from None


def _symbol(tok, what: str, node=None) -> str:
    if isinstance(tok, list):
        raise ParseError(f"expected {what}, got a list", _where(tok))
    return tok


def parse_type(node, schema: Schema | None = None) -> NeighborhoodType:
    if not isinstance(node, list) or not node or node[0] != "type" or len(node) < 2:
        raise ParseError("expected (type <name> ...)", _where(node))
    name = _symbol(node[1], "type name", node)
    fields: dict[str, list] = {}
    for part in node[2:]:
        if not isinstance(part, list) or not part:
            raise ParseError("malformed type field", _where(node))
        fields[part[0]] = part[1:]
    for required in ("elems", "centres", "radius"):
        if required not in fields:
            raise ParseError(f"type {name} is missing ({required} ...)", _where(node))
    elems = [_int(e, "element", node) for e in fields["elems"]]
    centres = [_int(c, "centre", node) for c in fields["centres"]]
    facts = []
    for t in fields.get("tuples", []):
        if not isinstance(t, list) or not t:
            raise ParseError(f"malformed tuple in type {name}", _where(node))
        rel = _symbol(t[0], "relation name", node)
        args = tuple(_int(a, "element", node) for a in t[1:])
        if schema is not None:
            if rel not in schema:
                raise ParseError(f"unknown relation {rel!r} in type {name}", _where(t))
            if schema.arity(rel) != len(args):
                raise ParseError(f"{rel} has arity {schema.arity(rel)} in type {name}", _where(t))
        facts.append((rel, args))
    if len(fields["radius"]) != 1:
        raise ParseError(f"type {name} needs exactly one radius", _where(node))
    radius = _int(fields["radius"][0], "radius", node)
    try:
        tau = NeighborhoodType(Neighborhood(elems, facts), tuple(centres), radius, name)
    except ValueError as exc:
        raise ParseError(f"type {name}: {exc}", _where(node)) from None
    if not tau.is_valid():
        raise ParseError(f"type {name} has elements farther than radius {radius} from every centre", _where(node))
    return tau


class _FormulaReader:
    def __init__(self, schema: Schema | None, types: dict[str, NeighborhoodType]):
        self.schema = schema
        self.types = types

    def type_ref(self, tok, node) -> NeighborhoodType:
        name = _symbol(tok, "type name", node)
        try:
            return self.types[name]
        except KeyError:
            raise ParseError(f"unknown type {name!r}", _where(node)) from None

    def vars(self, node, ctx) -> tuple[str, ...]:
        if not isinstance(node, list):
            raise ParseError("expected a variable list", _where(ctx))
        return tuple(_symbol(v, "variable", ctx) for v in node)

    def read(self, node) -> Formula:
        if not isinstance(node, list):
            if node == "true":
                return Truth(True)
            if node == "false":
                return Truth(False)
            raise ParseError(f"unexpected atom {node!r}")
        if not node:
            raise ParseError("empty formula", _where(node))
        head = node[0]
        args = node[1:]
        try:
            return self._read(head, args, node)
        except ParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise ParseError(str(exc) or f"malformed ({head} ...)", _where(node)) from None

    def _arity(self, n: int, args, node, head) -> None:
        if len(args) != n:
            raise ParseError(f"({head} ...) takes {n} arguments, got {len(args)}", _where(node))

    def _read(self, head, args, node) -> Formula:
        if head == "not":
            self._arity(1, args, node, head)
            return Not(self.read(args[0]))
        if head == "and":
            return And(tuple(self.read(a) for a in args))
        if head == "or":
            return Or(tuple(self.read(a) for a in args))
        if head == "implies":
            self._arity(2, args, node, head)
            return Or((Not(self.read(args[0])), self.read(args[1])))
        if head == "iff":
            self._arity(2, args, node, head)
            a, b = self.read(args[0]), self.read(args[1])
            return Or((And((a, b)), And((Not(a), Not(b)))))
        if head == "=":
            self._arity(2, args, node, head)
            return Eq(_symbol(args[0], "variable", node), _symbol(args[1], "variable", node))
        if head == "exists":
            self._arity(2, args, node, head)
            return Exists(_symbol(args[0], "variable", node), self.read(args[1]))
        if head == "forall":
            self._arity(2, args, node, head)
            return Not(Exists(_symbol(args[0], "variable", node), Not(self.read(args[1]))))
        if head == "exists>=":
            self._arity(3, args, node, head)
            m = _int(args[0], "threshold", node)
            if m < 1:
                raise ParseError("threshold must be at least 1", _where(node))
            var = _symbol(args[1], "variable", node)
            body = self.read(args[2])
            return self._maybe_sentence("atleast", m, 0, var, body) or ExistsAtLeast(m, var, body)
        if head == "existsmod":
            self._arity(4, args, node, head)
            i = _int(args[0], "residue", node)
            m = _int(args[1], "modulus", node)
            if m < 2 or not 0 <= i < m:
                raise ParseError(f"modulo quantifier needs m >= 2 and 0 <= i < m, got i={i}, m={m}", _where(node))
            var = _symbol(args[2], "variable", node)
            body = self.read(args[3])
            return self._maybe_sentence("mod", m, i, var, body) or ExistsMod(i, m, var, body)
        if head == "sphere":
            self._arity(2, args, node, head)
            tau = self.type_ref(args[0], node)
            return Sphere(tau, self.vars(args[1], node))
        if head == "hanf":
            if not args:
                raise ParseError("(hanf ...) needs a kind", _where(node))
            kind = args[0]
            if kind == "atleast":
                self._arity(3, args, node, head)
                return HanfSentence("atleast", _int(args[1], "threshold", node), 0, self.type_ref(args[2], node))
            if kind == "mod":
                self._arity(4, args, node, head)
                i = _int(args[1], "residue", node)
                m = _int(args[2], "modulus", node)
                if m < 2 or not 0 <= i < m:
                    raise ParseError(f"modulo needs m >= 2 and 0 <= i < m, got i={i}, m={m}", _where(node))
                return HanfSentence("mod", m, i, self.type_ref(args[3], node))
            raise ParseError(f"unknown Hanf sentence kind {kind!r}", _where(node))
        if isinstance(head, list):
            raise ParseError("formula head must be a symbol", _where(node))
        if self.schema is not None and head not in self.schema:
            raise ParseError(f"unknown relation or connective {head!r}", _where(node))
        if self.schema is not None and self.schema.arity(head) != len(args):
            raise ParseError(f"{head} has arity {self.schema.arity(head)}, got {len(args)}", _where(node))
        return Rel(head, tuple(_symbol(a, "variable", node) for a in args))

    @staticmethod
    def _maybe_sentence(kind, m, i, var, body) -> HanfSentence | None:
        if isinstance(body, Sphere) and body.vars == (var,):
            return HanfSentence(kind, m, i, body.type)
        return None


def parse_query(text: str, schema: Schema | None = None) -> HnfQuery | FoQuery:
    """Parse type declarations and one ``(query (vars) formula)`` form.

    A formula that is already a Boolean combination of sphere atoms and
    Hanf sentences comes back as an ``HnfQuery``; anything else as a
    ``FoQuery`` for the reference evaluator.
    """
    forms = read_sexprs(text)
    types: dict[str, NeighborhoodType] = {}
    query_form = None
    for form in forms:
        if not isinstance(form, list) or not form:
            raise ParseError(f"unexpected top-level token {form!r}")
        if form[0] == "type":
            tau = parse_type(form, schema)
            if tau.name in types:
                raise ParseError(f"type {tau.name} declared twice", _where(form))
            types[tau.name] = tau
        elif form[0] == "query":
            if query_form is not None:
                raise ParseError("more than one query form", _where(form))
            query_form = form
        else:
            raise ParseError(f"unknown top-level form {form[0]!r}", _where(form))
    reader = _FormulaReader(schema, types)
    if query_form is None:
        if len(forms) == 1 and forms[0][0] != "type":
            query_form = ["query", [], forms[0]]
        else:
            raise ParseError("missing (query (vars) formula)")
    if len(query_form) != 3:
        raise ParseError("expected (query (vars) formula)", _where(query_form))
    free = reader.vars(query_form[1], query_form)
    formula = reader.read(query_form[2])
    stray = free_variables(formula) - set(free)
    if stray:
        raise ParseError(f"formula has free variables {sorted(stray)} not listed in the query", _where(query_form))
    fo = FoQuery(free, formula)
    return to_hnf(fo) or fo


def parse_formula(text: str, schema: Schema | None = None, types: dict[str, NeighborhoodType] | None = None) -> Formula:
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise ParseError("expected exactly one formula")
    return _FormulaReader(schema, types or {}).read(forms[0])


# -- reference evaluation -----------------------------------------------

class _Oracle:
    def __init__(self, db: Database):
        self.db = db
        self.adom = sorted(db.adom)
        self._sphere_cache: dict = {}
        self._sentence_cache: dict = {}

    def sphere(self, atom: Sphere, values: tuple[int, ...]) -> bool:
        key = (atom, values)
        hit = self._sphere_cache.get(key)
        if hit is None:
            nb = induced_neighborhood(self.db, values, atom.type.radius)
            hit = isomorphic(nb, values, atom.type.structure, atom.type.centres)
            self._sphere_cache[key] = hit
        return hit

    def sentence(self, s: HanfSentence) -> bool:
        hit = self._sentence_cache.get(s)
        if hit is None:
            atom = Sphere(s.type, ("_",))
            count = sum(1 for a in self.adom if self.sphere(atom, (a,)))
            hit = s.holds(count)
            self._sentence_cache[s] = hit
        return hit

    def eval(self, f: Formula, env: dict[str, int]) -> bool:
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Rel):
            return self.db.contains(f.name, tuple(env[v] for v in f.args))
        if isinstance(f, Sphere):
            return self.sphere(f, tuple(env[v] for v in f.vars))
        if isinstance(f, HanfSentence):
            return self.sentence(f)
        if isinstance(f, Not):
            return not self.eval(f.body, env)
        if isinstance(f, And):
            return all(self.eval(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.eval(p, env) for p in f.parts)
        if isinstance(f, (Exists, ExistsAtLeast, ExistsMod)):
            saved = env.get(f.var)
            count = 0
            for a in self.adom:
                env[f.var] = a
                if self.eval(f.body, env):
                    count += 1
                    if isinstance(f, Exists) or (isinstance(f, ExistsAtLeast) and count >= f.m):
                        break
            if saved is None:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
            if isinstance(f, Exists):
                return count > 0
            if isinstance(f, ExistsAtLeast):
                return count >= f.m
            return count % f.m == f.i
        raise TypeError(f"not a formula: {f!r}")


def _guard(db: Database, f: Formula, extra_vars: int = 0) -> None:
    work = max(len(db.adom), 1) ** (quantifier_rank(f) + extra_vars)
    if work > ORACLE_LIMIT:
        raise OracleTooLarge(f"reference evaluation would take about {work} steps")


def eval_oracle(db: Database, formula: Formula, assignment: dict[str, int] | None = None) -> bool:
    assignment = dict(assignment or {})
    missing = free_variables(formula) - set(assignment)
    if missing:
        raise ValueError(f"unassigned free variables {sorted(missing)}")
    _guard(db, formula)
    return _Oracle(db).eval(formula, assignment)


def eval_query_oracle(db: Database, query: HnfQuery | FoQuery, k: int | None = None) -> set[tuple[int, ...]]:
    """All tuples over the active domain that satisfy the query."""
    free = query.free_vars
    if k is not None and k != len(free):
        raise ValueError(f"query has {len(free)} free variables, not {k}")
    _guard(db, query.formula, len(free))
    oracle = _Oracle(db)
    out = set()
    env: dict[str, int] = {}
    for values in itertools.product(oracle.adom, repeat=len(free)):
        env.update(zip(free, values))
        if oracle.eval(query.formula, env):
            out.add(values)
    return out


def sentence_values(db: Database, sentences: Iterable[HanfSentence]) -> list[bool]:
    oracle = _Oracle(db)
    return [oracle.sentence(s) for s in sentences]
