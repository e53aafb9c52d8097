"""The query-dependent chase with Π-homomorphism blocking, freezing and resumptions, and SChQA."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .chase import ChaseStep, LevelPairs, PairKey, check_s_stickiness, classic_chase, exist_order
from .classes import SelectionFunction, is_syn_sch, select, selection
from .errors import NotInClass
from .model import (
    NULL,
    Atom,
    ConjunctiveQuery,
    Instance,
    Position,
    Program,
    Rule,
    Term,
    apply_assignment,
    evaluate_cq,
    freeze_atom,
    freeze_nulls,
    is_pi_homomorphic,
    null,
    null_free,
)


def _blocking_atom(head: Atom, inst: Instance, pi: frozenset[Position]) -> Atom | None:
    """An atom of `inst` that `head` is Π-homomorphic to, if any."""
    best: set[Atom] | None = None
    for i, t in enumerate(head.args):
        if t.kind != NULL or Position(head.pred, i + 1) in pi:
            s = inst.lookup(head.pred, i, t)
            if best is None or len(s) < len(best):
                best = s
                if not best:
                    return None
    for b in inst.with_pred(head.pred) if best is None else best:
        if is_pi_homomorphic(head, b, pi):
            return b
    return None


@dataclass
class ChaseState:
    """Working state of the query-dependent chase; owned by one run at a time."""

    program: Program
    sel_positions: frozenset[Position]
    instance: Instance
    applied: set[PairKey] = field(default_factory=set)
    resumptions_done: int = 0
    null_counter: int = 0
    steps: list[ChaseStep] = field(default_factory=list)
    budget: int | None = None
    exhausted: bool = False

    def copy(self) -> "ChaseState":
        return ChaseState(
            self.program,
            self.sel_positions,
            self.instance.copy(),
            set(self.applied),
            self.resumptions_done,
            self.null_counter,
            list(self.steps),
            self.budget,
            self.exhausted,
        )

    def head_image(self, rule: Rule, theta: dict[Term, Term], commit: bool) -> tuple[Atom, dict[Term, Term]]:
        """θ'(head): existential variables become fresh nulls (placeholders unless `commit`)."""
        full = dict(theta)
        k = self.null_counter
        for z in exist_order(rule):
            k += 1
            full[z] = null(k)
        if commit:
            self.null_counter = k
        return apply_assignment(full, [rule.head])[0], full

    def is_applicable(self, rule: Rule, theta: dict[Term, Term]) -> bool:
        image = tuple(apply_assignment(theta, rule.body))
        if any(a not in self.instance for a in image):
            return False
        if (rule.id, image) in self.applied:
            return False
        head, _ = self.head_image(rule, theta, commit=False)
        return _blocking_atom(head, self.instance, self.sel_positions) is None

    def saturate(self) -> None:
        """Step 1: apply applicable pairs level by level until none is left.

        The first level rematches the whole instance so that pairs blocked before a
        freeze are reconsidered.
        """
        rules = self.program.rules
        levels = LevelPairs(rules, self.instance)
        while True:
            added = []
            for image, i, th in levels.pairs(self.applied, self.instance):
                r = rules[i]
                key = (r.id, image)
                if key in self.applied:
                    continue
                head, full = self.head_image(r, th, commit=False)
                if _blocking_atom(head, self.instance, self.sel_positions) is not None:
                    continue  # blocked pairs are not memoized; freezing may unblock them
                if self.budget is not None and len(self.steps) >= self.budget:
                    self.exhausted = True
                    return
                self.applied.add(key)
                head, full = self.head_image(r, th, commit=True)
                if self.instance.add(head):
                    added.append(head)
                    self.steps.append(ChaseStep(len(self.steps) + 1, r.id, full, image, head))
            if not levels.advance(added):
                return

    def freeze(self) -> dict[Term, Term]:
        inst, mapping = freeze_nulls(self.instance)
        self.instance = inst
        self.applied = {(rid, tuple(freeze_atom(a, mapping) for a in img)) for rid, img in self.applied}
        return mapping

    def resume_round(self) -> None:
        """Step 2, once: freeze every null and saturate again."""
        self.freeze()
        self.resumptions_done += 1
        self.saturate()

    def answers(self, query: ConjunctiveQuery) -> "AnswerSet":
        raw = evaluate_cq(query, self.instance)
        return AnswerSet(frozenset(null_free(raw)), frozenset(raw), query.is_boolean)

    def selected_values(self) -> set[Term]:
        """Distinct values at selected positions (the measured `s` of the height bound)."""
        return {t for a in self.instance for p, t in a.positions() if p in self.sel_positions}


@dataclass(frozen=True)
class AnswerSet:
    tuples: frozenset[tuple[Term, ...]]
    raw: frozenset[tuple[Term, ...]]
    boolean: bool = False

    @property
    def truth(self) -> bool:
        return bool(self.tuples)

    def sorted(self) -> list[tuple[Term, ...]]:
        return sorted(self.tuples)


def qchase(
    program: Program,
    query: ConjunctiveQuery,
    sel: SelectionFunction | str | frozenset[Position],
    resumptions: int | None = None,
    budget: int | None = None,
) -> ChaseState:
    """Saturate, then freeze-and-saturate `resumptions` times (default: the query's ∃-variable count)."""
    positions = sel if isinstance(sel, (set, frozenset)) else select(selection(sel), program)
    state = ChaseState(program, frozenset(positions), Instance(program.edb), budget=budget)
    state.saturate()
    return resume(state, query.m_q if resumptions is None else resumptions, in_place=True)


def resume(state: ChaseState, extra: int, in_place: bool = False) -> ChaseState:
    if extra < 0:
        raise ValueError("extra must be non-negative")
    out = state if in_place else state.copy()
    for _ in range(extra):
        if out.exhausted:
            break
        out.resume_round()
    return out


def strict_gate(program: Program, sel: SelectionFunction | str, refute_budget: int = 500) -> None:
    """Raise NotInClass when the syntactic test fails and the bounded refuter finds a violation.

    A program that fails the syntactic test but shows no violation within the budget is let through.
    """
    sel = selection(sel)
    if is_syn_sch(program, sel)[0]:
        return
    verdict = check_s_stickiness(program, sel, refute_budget, first_only=True)
    if verdict.violated:
        raise NotInClass(f"program is not in the class for selection {sel}", verdict.witnesses)


def schqa(
    program: Program,
    query: ConjunctiveQuery,
    sel: SelectionFunction | str,
    strict: bool = False,
    resumptions: int | None = None,
    refute_budget: int = 500,
    budget: int | None = None,
) -> AnswerSet:
    """Answer `query` on the query-dependent chase; null-bearing tuples are dropped."""
    sel = selection(sel)
    if strict:
        strict_gate(program, sel, refute_budget)
    return qchase(program, query, sel, resumptions, budget).answers(query)


def proof_height_bound(program: Program, query: ConjunctiveQuery, s: int) -> int:
    """p·(s+q+1)^r with p predicates, r the maximum arity and q query variables."""
    schema = program.schema
    for a in query.body:
        schema.setdefault(a.pred, a.arity)
    p = len(schema)
    r = max(schema.values(), default=0)
    q = len(query.variables())
    return p * (s + q + 1) ** r


def oracle_answers(program: Program, query: ConjunctiveQuery, budget: int = 10000) -> tuple[AnswerSet, bool]:
    """Certain answers from the classic chase; exact only when the chase terminated within `budget`."""
    res = classic_chase(program, budget)
    raw = evaluate_cq(query, res.instance)
    return AnswerSet(frozenset(null_free(raw)), frozenset(raw), query.is_boolean), res.terminated


def certain(tuples: Iterable[tuple[Term, ...]]) -> frozenset[tuple[Term, ...]]:
    return frozenset(null_free(tuples))
