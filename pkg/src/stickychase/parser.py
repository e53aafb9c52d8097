"""Reading and writing programs, queries, instances and position sets.

Surface syntax::

    % comment
    R(a,b).
    R(X,Y), R(Y,Z) -> S(X,Y,Z).
    R(X,Y) -> exists Z R(Y,Z).
    ?Q(X) :- R(X,Y).

Variables start with an uppercase letter, constants with a lowercase letter or a
digit (or are single-quoted). Instances may also mention nulls `_:n<k>` and frozen
nulls `_:f<k>`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable

from .errors import ArityMismatch, ExistentialInBody, ParseError, UnsafeHeadVariable, UnsafeQuery
from .model import (
    FROZEN,
    NULL,
    VAR,
    Atom,
    ConjunctiveQuery,
    Instance,
    Position,
    Program,
    Rule,
    Term,
    const,
    frozen,
    null,
    render_atom,
    var,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<arrow>->)
  | (?P<neck>:-)
  | (?P<null>_:[nf][0-9]+)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*')
  | (?P<ident>[A-Za-z0-9_]+)
  | (?P<punct>[(),.?])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "<string>") -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            out.append(Token(kind if kind != "punct" else tok, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Reader:
    def __init__(self, text: str, source: str, allow_nulls: bool = False):
        self.toks = tokenize(text, source)
        self.i = 0
        self.source = source
        self.allow_nulls = allow_nulls
        self.arity: dict[str, int] = {}
        # positions of the current statement's variable tokens, for error reporting
        self.var_sites: dict[Term, list[Token]] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None, cls: type[ParseError] = ParseError) -> ParseError:
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col, self.source)

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what or repr(kind)}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            t = self.tok
            self.i += 1
            return t
        return None

    def term(self) -> Term:
        t = self.tok
        if t.kind == "quoted":
            self.i += 1
            body = t.text[1:-1]
            return const(re.sub(r"\\(.)", r"\1", body))
        if t.kind == "null":
            if not self.allow_nulls:
                raise self.error("nulls are not allowed here")
            self.i += 1
            k = int(t.text[3:])
            return null(k) if t.text[2] == "n" else frozen(k)
        if t.kind == "ident":
            self.i += 1
            if t.text[0].isupper():
                v = var(t.text)
                self.var_sites.setdefault(v, []).append(t)
                return v
            if t.text[0] == "_":
                raise self.error(f"identifier {t.text!r} is neither a variable nor a constant", t)
            return const(t.text)
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def atom(self) -> Atom:
        name = self.expect("ident", "a predicate name")
        if name.text == "exists":
            raise self.error("'exists' is reserved", name)
        self.expect("(", "'('")
        args: list[Term] = []
        if self.tok.kind != ")":
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
        self.expect(")", "')'")
        known = self.arity.setdefault(name.text, len(args))
        if known != len(args):
            raise self.error(
                f"predicate {name.text} used with arity {len(args)}, previously {known}", name, ArityMismatch
            )
        return Atom(name.text, tuple(args))

    def atom_list(self) -> list[Atom]:
        atoms = [self.atom()]
        while self.accept(","):
            atoms.append(self.atom())
        return atoms


def _finish_rule(r: _Reader, body: list[Atom], start: Token, index: int) -> Rule:
    exist: list[tuple[Term, Token]] = []
    if r.tok.kind == "ident" and r.tok.text == "exists":
        r.i += 1
        while True:
            t = r.expect("ident", "an existential variable")
            if not t.text[0].isupper():
                raise r.error(f"{t.text!r} is not a variable", t)
            exist.append((var(t.text), t))
            if not r.accept(","):
                break
    head = r.atom()
    if r.tok.kind == ",":
        raise r.error("rules must have exactly one head atom")
    r.expect(".", "'.'")
    body_vars = {t for a in body for t in a.args if t.kind == VAR}
    for v, t in exist:
        if v in body_vars:
            site = next(s for s in r.var_sites[v] if (s.line, s.col) < (t.line, t.col))
            raise r.error(f"existential variable {v.label} occurs in the body", site, ExistentialInBody)
        if v not in head.args:
            raise r.error(f"existential variable {v.label} does not occur in the head", t)
    ex = {v for v, _ in exist}
    for v in head.args:
        if v.kind == VAR and v not in body_vars and v not in ex:
            site = r.var_sites[v][-1]
            raise r.error(f"head variable {v.label} is neither in the body nor existential", site, UnsafeHeadVariable)
    return Rule(f"r{index}", tuple(body), head, frozenset(ex))


def _query(r: _Reader) -> ConjunctiveQuery:
    r.expect("?", "'?'")
    name = r.expect("ident", "a query name")
    free: list[Term] = []
    if r.accept("("):
        while True:
            t = r.expect("ident", "a variable")
            if not t.text[0].isupper():
                raise r.error(f"query head terms must be variables, found {t.text!r}", t)
            v = var(t.text)
            if v in free:
                raise r.error(f"variable {t.text} repeated in query head", t)
            free.append(v)
            r.var_sites.setdefault(v, []).append(t)
            if not r.accept(","):
                break
        r.expect(")", "')'")
    r.expect("neck", "':-'")
    body = r.atom_list()
    r.expect(".", "'.'")
    body_vars = {t for a in body for t in a.args if t.kind == VAR}
    for v in free:
        if v not in body_vars:
            raise r.error(f"answer variable {v.label} does not occur in the body", r.var_sites[v][0], UnsafeQuery)
    return ConjunctiveQuery(name.text, tuple(free), tuple(body))


def parse_program(text: str, source: str = "<string>") -> Program:
    """Parse facts, rules and (optionally) queries; rules get ids r1, r2, ... in source order."""
    r = _Reader(text, source)
    rules: list[Rule] = []
    facts: set[Atom] = set()
    queries: list[ConjunctiveQuery] = []
    while r.tok.kind != "eof":
        r.var_sites = {}
        start = r.tok
        if start.kind == "?":
            queries.append(_query(r))
            continue
        body = r.atom_list()
        if r.accept("arrow"):
            rules.append(_finish_rule(r, body, start, len(rules) + 1))
            continue
        r.expect(".", "'->' or '.'")
        if len(body) > 1:
            raise r.error("a fact must consist of a single atom", start)
        if not body[0].is_ground():
            raise r.error("facts must not contain variables", start)
        facts.add(body[0])
    return Program(tuple(rules), frozenset(facts), tuple(queries))


def parse_query(text: str, source: str = "<string>", schema: dict[str, int] | None = None) -> ConjunctiveQuery:
    """Parse a single query; if `schema` is given, arities are checked against it."""
    r = _Reader(text, source)
    if schema:
        r.arity.update(schema)
    q = _query(r)
    if r.tok.kind != "eof":
        raise r.error("expected end of input after the query")
    return q


def parse_instance(text: str, source: str = "<string>") -> Instance:
    """Parse an instance in either the fact syntax or the JSON form."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
            return Instance(Atom(a["pred"], tuple(_json_term(x) for x in a["args"])) for a in data["atoms"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"malformed JSON instance: {exc}", 1, 1, source) from None
    r = _Reader(text, source, allow_nulls=True)
    atoms = []
    while r.tok.kind != "eof":
        start = r.tok
        a = r.atom()
        r.expect(".", "'.'")
        if not a.is_ground():
            raise r.error("instance atoms must be ground", start)
        atoms.append(a)
    return Instance(atoms)


_POSITION = re.compile(r"([A-Za-z0-9_]+)\[([0-9]+)\]")


def parse_positions(text: str, source: str = "<string>") -> frozenset[Position]:
    """Parse `R[1], U[1]` style lists (whitespace/commas) or a JSON list of such strings."""
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            items = json.loads(stripped)
        except ValueError:
            items = None
        if isinstance(items, list):
            stripped = " ".join(map(str, items))
    out = set()
    rest = _POSITION.sub(lambda m: out.add(Position(m.group(1), int(m.group(2)))) or "", stripped)
    leftover = re.sub(r"%[^\n]*", "", rest).replace(",", " ").strip()
    if leftover:
        raise ParseError(f"cannot read position list near {leftover.split()[0]!r}", 1, 1, source)
    return frozenset(out)


# -- rendering ------------------------------------------------------------

def _json_term(x: str) -> Term:
    m = re.fullmatch(r"_:([nf])([0-9]+)", x)
    if m:
        k = int(m.group(2))
        return null(k) if m.group(1) == "n" else frozen(k)
    return const(x)


def term_json(t: Term) -> str:
    if t.kind == NULL:
        return f"_:n{t.ordinal}"
    if t.kind == FROZEN:
        return f"_:f{t.ordinal}"
    return t.label


def instance_json(inst: Iterable[Atom]) -> dict:
    return {"atoms": [{"pred": a.pred, "args": [term_json(t) for t in a.args]} for a in sorted(inst)]}


def render_instance(inst: Iterable[Atom], fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(instance_json(inst), sort_keys=True)
    return "\n".join(render_atom(a) + "." for a in sorted(inst))


def render_program(program: Program, include_facts: bool = True) -> str:
    lines = []
    if include_facts:
        lines += [render_atom(a) + "." for a in sorted(program.edb)]
    lines += [str(r) for r in program.rules]
    lines += [str(q) for q in program.queries]
    return "\n".join(lines)


def render_query(q: ConjunctiveQuery) -> str:
    return str(q)


def render_position(p: Position) -> str:
    return f"{p.pred}[{p.index}]"


def render_positions(ps: Iterable[Position]) -> list[str]:
    return [render_position(p) for p in sorted(ps)]

