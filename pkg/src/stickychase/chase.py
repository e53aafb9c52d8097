"""The classic chase, the chase/derivation relations and the bounded S-stickiness refuter."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .classes import SelectionFunction, select
from .errors import UnknownAtom
from .model import (
    Atom,
    Instance,
    Program,
    Rule,
    Term,
    VAR,
    apply_assignment,
    candidates,
    null,
    render_atom,
    unify,
)
from .parser import term_json

PairKey = tuple[str, tuple[Atom, ...]]


@dataclass(frozen=True)
class ChaseStep:
    index: int  # 1-based
    rule_id: str
    assignment: dict[Term, Term] = field(hash=False)
    consumed: tuple[Atom, ...]
    produced: Atom

    def to_json(self) -> dict:
        return {
            "step": self.index,
            "rule": self.rule_id,
            "assignment": {v.label: term_json(t) for v, t in sorted(self.assignment.items())},
            "consumed": [render_atom(a) for a in self.consumed],
            "produced": render_atom(self.produced),
        }


class DerivationRelation:
    """Direct pairs A < B recorded by chase steps; the transitive closure is computed on demand."""

    def __init__(self) -> None:
        self.children: dict[Atom, set[Atom]] = {}
        self.known: set[Atom] = set()
        self._order: list[Atom] = []
        self._closure: dict[Atom, frozenset[Atom]] | None = None

    def note(self, a: Atom) -> None:
        if a not in self.known:
            self.known.add(a)
            self._order.append(a)

    def record(self, consumed: Sequence[Atom], produced: Atom) -> None:
        self.note(produced)
        for a in consumed:
            self.note(a)
            self.children.setdefault(a, set()).add(produced)
        self._closure = None

    @property
    def direct(self) -> set[tuple[Atom, Atom]]:
        return {(a, b) for a, bs in self.children.items() for b in bs}

    def descendants(self, a: Atom) -> frozenset[Atom]:
        if a not in self.known:
            raise UnknownAtom(render_atom(a))
        if self._closure is None:
            # produced atoms come after their premises in _order, so one backward sweep suffices
            closure: dict[Atom, frozenset[Atom]] = {}
            for x in reversed(self._order):
                acc: set[Atom] = set()
                for y in self.children.get(x, ()):
                    acc.add(y)
                    acc |= closure.get(y, frozenset())
                closure[x] = frozenset(acc)
            self._closure = closure
        return self._closure[a]


def derives(rel: DerivationRelation, a: Atom, b: Atom) -> bool:
    if b not in rel.known:
        raise UnknownAtom(render_atom(b))
    return b in rel.descendants(a)


@dataclass
class ChaseResult:
    instance: Instance
    derivation: DerivationRelation
    terminated: bool
    steps: list[ChaseStep]


# -- shared level-saturation machinery ------------------------------------

def exist_order(rule: Rule) -> list[Term]:
    """Existential variables in order of first head occurrence."""
    return list(dict.fromkeys(t for t in rule.head.args if t in rule.exist_vars))


class LevelPairs:
    """Semi-naive pair enumeration over a level-by-level chase.

    `full` is the instance as it stood when the current level began, `delta` the atoms
    the previous level added and `old` the rest. Pairs come out lazily in canonical
    order (lexicographic body image first, rule index second), so a caller that stops
    early pays only for the pairs it consumed. Each pair touches `delta`, except on
    the first level, which matches everything.
    """

    def __init__(self, rules: Sequence[Rule], inst: Instance):
        self.rules = rules
        self.full = Instance(inst)
        self.old: Instance | None = None
        self.delta: Instance | None = None

    def pairs(self, memo: set[PairKey], live: Instance) -> Iterator[tuple[tuple[Atom, ...], int, dict[Term, Term]]]:
        """`live` is the instance being extended; a Datalog pair whose head is already in it is never produced."""
        cache: dict[tuple, list[Atom]] = {}
        gens = []
        for i, r in enumerate(self.rules):
            n = len(r.body)
            if self.delta is None:
                layouts = [(self.full,) * n]
            else:
                # image whose first delta atom sits at j: old before j, anything after
                layouts = [(self.old,) * j + (self.delta,) + (self.full,) * (n - j - 1) for j in range(n)]
            for srcs in layouts:
                gens.append(_tagged(i, _lex_images(r, srcs, cache, live)))
        for img, i, th in heapq.merge(*gens, key=lambda x: (x[0], x[1])):
            if (self.rules[i].id, img) not in memo:
                yield img, i, th

    def advance(self, added: Iterable[Atom]) -> bool:
        """Close the level; False when it added nothing."""
        added = list(added)
        if self.delta is None:
            self.old = Instance(self.full)
        else:
            for a in self.delta:
                self.old.add(a)
        for a in added:
            self.full.add(a)
        self.delta = Instance(added)
        return bool(added)


def _tagged(i: int, images: Iterator[tuple[tuple[Atom, ...], dict[Term, Term]]]):
    for img, th in images:
        yield img, i, th


def _lex_images(
    rule: Rule, srcs: Sequence[Instance], cache: dict[tuple, list[Atom]], live: Instance
) -> Iterator[tuple[tuple[Atom, ...], dict[Term, Term]]]:
    """Matches of the body with atom k drawn from srcs[k], in ascending image order."""
    body = rule.body
    n = len(body)
    # depth after which a Datalog head is fully bound; its subtree is dead once that head exists
    ready = -1
    if not rule.exist_vars:
        need = set(rule.head.variables())
        ready = next(k for k in range(n + 1) if need <= {t for a in body[:k] for t in a.args})
    img: list[Atom] = []

    def go(k: int, th: dict[Term, Term], head: Atom | None) -> Iterator[tuple[tuple[Atom, ...], dict[Term, Term]]]:
        if k == ready:
            head = apply_assignment(th, [rule.head])[0]
        if k == n:
            if head is None or head not in live:
                yield tuple(img), th
            return
        pat, src = body[k], srcs[k]
        key = (id(src), pat.pred, tuple(th.get(t) if t.kind == VAR else t for t in pat.args))
        cands = cache.get(key)
        if cands is None:
            cands = cache[key] = sorted(candidates(pat, src, th))
        for fact in cands:
            # the generator may run ahead of the consumer, so the head can appear mid-subtree
            if head is not None and head in live:
                return
            nxt = unify(pat, fact, th)
            if nxt is not None:
                img.append(fact)
                yield from go(k + 1, nxt, head)
                img.pop()

    yield from go(0, {}, None)


def instantiate_head(rule: Rule, theta: dict[Term, Term], fresh: Callable[[], Term]) -> tuple[Atom, dict[Term, Term]]:
    full = dict(theta)
    for z in exist_order(rule):
        full[z] = fresh()
    return apply_assignment(full, [rule.head])[0], full


# -- classic chase --------------------------------------------------------

def classic_chase(program: Program, budget: int = 1000) -> ChaseResult:
    """Oblivious breadth-first chase, stopping after `budget` steps that add an atom."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    inst = Instance(program.edb)
    rel = DerivationRelation()
    for a in sorted(program.edb):
        rel.note(a)
    memo: set[PairKey] = set()
    steps: list[ChaseStep] = []
    counter = [0]

    def fresh() -> Term:
        counter[0] += 1
        return null(counter[0])

    levels = LevelPairs(program.rules, inst)
    while True:
        added = []
        for image, i, th in levels.pairs(memo, inst):
            r = program.rules[i]
            key = (r.id, image)
            if key in memo:
                continue
            if not r.exist_vars:
                head = apply_assignment(th, [r.head])[0]
                if head in inst:
                    memo.add(key)
                    continue
            if len(steps) >= budget:
                return ChaseResult(inst, rel, False, steps)
            memo.add(key)
            head, full = instantiate_head(r, th, fresh)
            inst.add(head)
            added.append(head)
            rel.record(image, head)
            steps.append(ChaseStep(len(steps) + 1, r.id, full, image, head))
        if not levels.advance(added):
            return ChaseResult(inst, rel, True, steps)


# -- bounded semantic refuter ---------------------------------------------

@dataclass(frozen=True)
class StickinessWitness:
    step: int
    rule: str
    variable: str
    value: Term
    offending: Atom

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "rule": self.rule,
            "variable": self.variable,
            "value": term_json(self.value),
            "offending_atom": render_atom(self.offending),
        }

    def __str__(self) -> str:
        return (
            f"step {self.step} ({self.rule}): value {term_json(self.value)} of join variable "
            f"{self.variable} is missing from {render_atom(self.offending)}"
        )


@dataclass(frozen=True)
class StickinessVerdict:
    violated: bool
    witnesses: tuple[StickinessWitness, ...]
    steps: int
    terminated: bool

    @property
    def label(self) -> str:
        return "violation" if self.violated else "no-violation-within-budget"

    def to_json(self) -> dict:
        return {
            "verdict": self.label,
            "steps": self.steps,
            "chase_terminated": self.terminated,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def check_s_stickiness(
    program: Program, sel: SelectionFunction | str, budget: int = 500, first_only: bool = False
) -> StickinessVerdict:
    """Search the bounded classic chase for a join value that fails to stick."""
    chosen = select(sel, program)
    res = classic_chase(program, budget)
    joins: dict[str, list[Term]] = {}
    for r in program.rules:
        joins[r.id] = [x for x in r.body_vars if r.occurrences(x) > 1 and not (r.body_positions(x) & chosen)]
    found: list[StickinessWitness] = []
    for st in res.steps:
        for x in joins[st.rule_id]:
            v = st.assignment[x]
            for b in (st.produced, *sorted(res.derivation.descendants(st.produced))):
                if v not in b.args:
                    found.append(StickinessWitness(st.index, st.rule_id, x.label, v, b))
                    break
            if first_only and found:
                return StickinessVerdict(True, tuple(found), len(res.steps), res.terminated)
    return StickinessVerdict(bool(found), tuple(found), len(res.steps), res.terminated)

