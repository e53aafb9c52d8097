"""Terms, atoms, rules, programs, instances and the homomorphism machinery.

Terms and atoms are named tuples so that hashing and ordering stay cheap; the
natural tuple order doubles as the canonical lexicographic order used for
deterministic output (constants < frozen nulls < nulls < variables).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import UnboundVariable

CONST, FROZEN, NULL, VAR = 0, 1, 2, 3


class Term(NamedTuple):
    kind: int
    label: str = ""
    ordinal: int = 0

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_null(self) -> bool:
        """True for labeled nulls only; frozen nulls behave as constants."""
        return self.kind == NULL

    @property
    def is_nullish(self) -> bool:
        """True for nulls and frozen nulls, i.e. values invented by a chase."""
        return self.kind in (NULL, FROZEN)

    def __repr__(self) -> str:
        return render_term(self)


def const(label: str) -> Term:
    return Term(CONST, label)


def var(label: str) -> Term:
    return Term(VAR, label)


def null(k: int) -> Term:
    return Term(NULL, "", k)


def frozen(k: int) -> Term:
    return Term(FROZEN, "", k)


def render_term(t: Term) -> str:
    if t.kind == NULL:
        return f"_:n{t.ordinal}"
    if t.kind == FROZEN:
        return f"_:f{t.ordinal}"
    if t.kind == CONST and not _plain_constant(t.label):
        return "'" + t.label.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return t.label


def _plain_constant(label: str) -> bool:
    return bool(label) and (label[0].islower() or label[0].isdigit()) and label.isascii() and all(
        c.isalnum() or c == "_" for c in label
    )


class Position(NamedTuple):
    pred: str
    index: int  # 1-based

    def __repr__(self) -> str:
        return f"{self.pred}[{self.index}]"


class Atom(NamedTuple):
    pred: str
    args: tuple[Term, ...]

    def __repr__(self) -> str:
        return render_atom(self)

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> list[Term]:
        return [t for t in self.args if t.kind == VAR]

    def is_ground(self) -> bool:
        return all(t.kind != VAR for t in self.args)

    def has_nulls(self) -> bool:
        return any(t.kind in (NULL, FROZEN) for t in self.args)

    def positions(self) -> Iterator[tuple[Position, Term]]:
        for i, t in enumerate(self.args, 1):
            yield Position(self.pred, i), t


def atom(pred: str, *args: Term | str) -> Atom:
    """Convenience constructor: strings starting uppercase are variables, others constants."""
    terms = []
    for a in args:
        if isinstance(a, str):
            a = var(a) if a[:1].isupper() else const(a)
        terms.append(a)
    return Atom(pred, tuple(terms))


def render_atom(a: Atom) -> str:
    return f"{a.pred}({','.join(render_term(t) for t in a.args)})"


@dataclass(frozen=True)
class Rule:
    """A tgd: body atoms, one head atom and the existential variables of the head."""

    id: str
    body: tuple[Atom, ...]
    head: Atom
    exist_vars: frozenset[Term] = frozenset()

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError(f"rule {self.id} has an empty body")
        bvars = set(self.body_vars)
        if self.exist_vars & bvars:
            raise ValueError(f"rule {self.id}: existential variable also occurs in the body")
        for t in self.head.args:
            if t.kind == VAR and t not in bvars and t not in self.exist_vars:
                raise ValueError(f"rule {self.id}: head variable {t.label} is unsafe")

    @property
    def body_vars(self) -> tuple[Term, ...]:
        seen: dict[Term, None] = {}
        for a in self.body:
            for t in a.args:
                if t.kind == VAR:
                    seen.setdefault(t)
        return tuple(seen)

    @property
    def frontier(self) -> tuple[Term, ...]:
        """Body variables that also occur in the head, in body order."""
        head = set(self.head.args)
        return tuple(v for v in self.body_vars if v in head)

    def body_positions(self, x: Term) -> frozenset[Position]:
        return frozenset(p for a in self.body for p, t in a.positions() if t == x)

    def head_positions(self, x: Term) -> frozenset[Position]:
        return frozenset(p for p, t in self.head.positions() if t == x)

    def occurrences(self, x: Term) -> int:
        return sum(1 for a in self.body for t in a.args if t == x)

    def __str__(self) -> str:
        body = ", ".join(render_atom(a) for a in self.body)
        ex = ""
        if self.exist_vars:
            ordered = [t for t in self.head.args if t in self.exist_vars]
            ordered = list(dict.fromkeys(ordered))
            ex = "exists " + ",".join(t.label for t in ordered) + " "
        return f"{body} -> {ex}{render_atom(self.head)}."


@dataclass(frozen=True)
class ConjunctiveQuery:
    name: str
    free_vars: tuple[Term, ...]
    body: tuple[Atom, ...]
    exist_vars: frozenset[Term] = field(default=frozenset())

    def __post_init__(self) -> None:
        if not self.exist_vars:
            free = set(self.free_vars)
            ex = frozenset(t for a in self.body for t in a.args if t.kind == VAR and t not in free)
            object.__setattr__(self, "exist_vars", ex)

    @property
    def m_q(self) -> int:
        return len(self.exist_vars)

    @property
    def is_boolean(self) -> bool:
        return not self.free_vars

    def variables(self) -> set[Term]:
        return set(self.free_vars) | set(self.exist_vars)

    def __str__(self) -> str:
        head = f"?{self.name}"
        if self.free_vars:
            head += "(" + ",".join(v.label for v in self.free_vars) + ")"
        return f"{head} :- {', '.join(render_atom(a) for a in self.body)}."


class Instance:
    """A finite set of ground atoms with per-predicate and per-argument indexes."""

    __slots__ = ("_atoms", "_by_pred", "_index")

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: set[Atom] = set()
        self._by_pred: dict[str, set[Atom]] = defaultdict(set)
        self._index: dict[tuple[str, int, Term], set[Atom]] = defaultdict(set)
        for a in atoms:
            self.add(a)

    def add(self, a: Atom) -> bool:
        if a in self._atoms:
            return False
        self._atoms.add(a)
        self._by_pred[a.pred].add(a)
        for i, t in enumerate(a.args):
            self._index[(a.pred, i, t)].add(a)
        return True

    def __contains__(self, a: object) -> bool:
        return a in self._atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Instance):
            return self._atoms == other._atoms
        if isinstance(other, (set, frozenset)):
            return self._atoms == other
        return NotImplemented

    def __repr__(self) -> str:
        return "{" + ", ".join(map(render_atom, self.sorted())) + "}"

    def with_pred(self, pred: str) -> set[Atom]:
        return self._by_pred.get(pred, set())

    def lookup(self, pred: str, i: int, t: Term) -> set[Atom]:
        """Atoms of `pred` whose 0-based argument `i` is `t`."""
        return self._index.get((pred, i, t), set())

    def atoms(self) -> frozenset[Atom]:
        return frozenset(self._atoms)

    def sorted(self) -> list[Atom]:
        return sorted(self._atoms)

    def predicates(self) -> set[str]:
        return {p for p, s in self._by_pred.items() if s}

    def nulls(self) -> set[Term]:
        return {t for a in self._atoms for t in a.args if t.kind == NULL}

    def copy(self) -> "Instance":
        return Instance(self._atoms)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    edb: frozenset[Atom] = frozenset()
    queries: tuple[ConjunctiveQuery, ...] = ()

    @property
    def schema(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rules:
            for a in (*r.body, r.head):
                out.setdefault(a.pred, a.arity)
        for a in self.edb:
            out.setdefault(a.pred, a.arity)
        return out

    def positions(self) -> list[Position]:
        return sorted(Position(p, i) for p, n in self.schema.items() for i in range(1, n + 1))

    def intensional(self) -> set[str]:
        return {r.head.pred for r in self.rules}

    def extensional(self) -> set[str]:
        return set(self.schema) - self.intensional()

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)


def rule_positions(rules: Sequence[Rule]) -> list[Position]:
    seen: dict[str, int] = {}
    for r in rules:
        for a in (*r.body, r.head):
            seen.setdefault(a.pred, a.arity)
    return sorted(Position(p, i) for p, n in seen.items() for i in range(1, n + 1))


# -- assignments ----------------------------------------------------------

Assignment = Mapping[Term, Term]


def apply_assignment(theta: Assignment, atoms: Sequence[Atom]) -> list[Atom]:
    out = []
    for a in atoms:
        args = []
        for t in a.args:
            if t.kind == VAR:
                try:
                    t = theta[t]
                except KeyError:
                    raise UnboundVariable(f"variable {t.label} is not bound in {render_atom(a)}") from None
            args.append(t)
        out.append(Atom(a.pred, tuple(args)))
    return out


def substitute(a: Atom, theta: Assignment) -> Atom:
    """Like apply_assignment on one atom, but leaves unbound variables in place."""
    return Atom(a.pred, tuple(theta.get(t, t) if t.kind == VAR else t for t in a.args))


def unify(pattern: Atom, fact: Atom, theta: dict[Term, Term]) -> dict[Term, Term] | None:
    if pattern.pred != fact.pred or len(pattern.args) != len(fact.args):
        return None
    out = theta
    copied = False
    for p, f in zip(pattern.args, fact.args):
        if p.kind == VAR:
            bound = out.get(p)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[p] = f
            elif bound != f:
                return None
        elif p != f:
            return None
    return out


def candidates(pattern: Atom, inst: Instance, theta: Mapping[Term, Term]) -> Iterable[Atom]:
    best: set[Atom] | None = None
    for i, t in enumerate(pattern.args):
        v = theta.get(t) if t.kind == VAR else t
        if v is None:
            continue
        s = inst.lookup(pattern.pred, i, v)
        if best is None or len(s) < len(best):
            best = s
            if not best:
                break
    return inst.with_pred(pattern.pred) if best is None else best


def match_atoms(
    atoms: Sequence[Atom],
    inst: Instance,
    theta: Mapping[Term, Term] | None = None,
    pinned: tuple[int, Instance] | None = None,
) -> Iterator[dict[Term, Term]]:
    """Enumerate assignments mapping every atom into `inst`.

    `pinned=(j, delta)` restricts atom j to match inside `delta` instead; that atom is
    matched first. After it, the atom with the most already-bound arguments goes next.
    The set of assignments does not depend on this order.
    """
    start = dict(theta or {})
    first = pinned[0] if pinned is not None else None

    def boundness(i: int, th: Mapping[Term, Term]) -> int:
        return sum(1 for t in atoms[i].args if t.kind != VAR or t in th)

    def go(todo: tuple[int, ...], th: dict[Term, Term]) -> Iterator[dict[Term, Term]]:
        if not todo:
            yield th
            return
        k = first if first in todo else max(todo, key=lambda i: (boundness(i, th), -i))
        rest = tuple(i for i in todo if i != k)
        src = pinned[1] if k == first else inst
        pat = atoms[k]
        for fact in list(candidates(pat, src, th)):
            nxt = unify(pat, fact, th)
            if nxt is not None:
                yield from go(rest, nxt)

    yield from go(tuple(range(len(atoms))), start)


# -- homomorphisms --------------------------------------------------------

def is_pi_homomorphic(a: Atom, b: Atom, pi: Iterable[Position] | frozenset[Position] = frozenset()) -> bool:
    """Is there a null mapping h with h(a) = b that fixes every argument of `a` at a position in `pi`?"""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return False
    if not isinstance(pi, (set, frozenset)):
        pi = frozenset(pi)
    h: dict[Term, Term] = {}
    for i, (s, t) in enumerate(zip(a.args, b.args), 1):
        if s.kind == NULL:
            if t != s and Position(a.pred, i) in pi:
                return False
            if h.setdefault(s, t) != t:
                return False
        elif s != t:
            return False
    return True


def freeze_atom(a: Atom, mapping: Mapping[Term, Term]) -> Atom:
    if not any(t.kind == NULL for t in a.args):
        return a
    return Atom(a.pred, tuple(mapping.get(t, t) for t in a.args))


def freeze_nulls(inst: Instance | Iterable[Atom]) -> tuple[Instance, dict[Term, Term]]:
    """Replace every null by the frozen null with the same ordinal."""
    atoms = list(inst)
    mapping = {t: frozen(t.ordinal) for a in atoms for t in a.args if t.kind == NULL}
    return Instance(freeze_atom(a, mapping) for a in atoms), mapping


# -- query evaluation -----------------------------------------------------

def evaluate_cq(q: ConjunctiveQuery, inst: Instance | Iterable[Atom]) -> set[tuple[Term, ...]]:
    """All answers of `q` over `inst`, nulls included; Boolean queries give {()} or the empty set."""
    if not isinstance(inst, Instance):
        inst = Instance(inst)
    out: set[tuple[Term, ...]] = set()
    for th in match_atoms(q.body, inst):
        out.add(tuple(th[v] for v in q.free_vars))
        if q.is_boolean:
            break
    return out


def null_free(tuples: Iterable[tuple[Term, ...]]) -> set[tuple[Term, ...]]:
    return {t for t in tuples if not any(x.kind in (NULL, FROZEN) for x in t)}


# -- comparison up to null renaming ---------------------------------------

def isomorphic(left: Iterable[Atom], right: Iterable[Atom]) -> bool:
    """Equality of two atom sets up to a bijective renaming of nulls (frozen nulls kept apart)."""
    a, b = set(left), set(right)
    if len(a) != len(b):
        return False
    ground_a = {x for x in a if not x.has_nulls()}
    ground_b = {x for x in b if not x.has_nulls()}
    if ground_a != ground_b:
        return False
    rest_a = sorted(a - ground_a, key=lambda x: -sum(t.is_nullish for t in x.args))
    rest_b = Instance(b - ground_b)

    def go(k: int, fwd: dict[Term, Term], bwd: dict[Term, Term], used: set[Atom]) -> bool:
        if k == len(rest_a):
            return True
        x = rest_a[k]
        for y in rest_b.with_pred(x.pred):
            if y in used or len(y.args) != len(x.args):
                continue
            f, g, ok = dict(fwd), dict(bwd), True
            for s, t in zip(x.args, y.args):
                if s.kind in (NULL, FROZEN) or t.kind in (NULL, FROZEN):
                    if s.kind != t.kind or f.setdefault(s, t) != t or g.setdefault(t, s) != s:
                        ok = False
                        break
                elif s != t:
                    ok = False
                    break
            if ok and go(k + 1, f, g, used | {y}):
                return True
        return False

    return go(0, {}, {}, set())
