"""Variable marking, selection functions and syntactic class membership (Sticky, WS, JWS, syn-sch)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import UnknownPosition
from .graphs import finite_existential_positions, finite_rank_positions, is_jointly_acyclic, is_weakly_acyclic
from .model import VAR, Position, Program, Rule, Term, rule_positions

RuleSource = Union[Program, Sequence[Rule]]


def _rules(src: RuleSource) -> tuple[Rule, ...]:
    return src.rules if isinstance(src, Program) else tuple(src)


def _positions(src: RuleSource) -> list[Position]:
    return src.positions() if isinstance(src, Program) else rule_positions(src)


@dataclass(frozen=True)
class Marking:
    """Marked variables per rule; every occurrence of a marked variable in its body is marked."""

    marked_vars: frozenset[tuple[str, Term]]
    rules: tuple[Rule, ...] = field(repr=False)

    def is_marked(self, rule_id: str, x: Term) -> bool:
        return (rule_id, x) in self.marked_vars

    @property
    def marked(self) -> frozenset[tuple[str, int, int]]:
        """Marked occurrences as (rule id, body-atom index, argument index), both 0-based."""
        return frozenset(
            (r.id, i, j)
            for r in self.rules
            for i, a in enumerate(r.body)
            for j, t in enumerate(a.args)
            if (r.id, t) in self.marked_vars
        )

    def render(self, r: Rule) -> str:
        """The rule with marked occurrences hatted, e.g. `R(^X,^Y) -> exists Z R(Y,Z).`"""
        def term(t: Term) -> str:
            return ("^" if (r.id, t) in self.marked_vars else "") + (t.label if t.kind == VAR else repr(t))

        body = ", ".join(f"{a.pred}({','.join(term(t) for t in a.args)})" for a in r.body)
        return f"{body} -> {str(r).split(' -> ', 1)[1]}"


def mark_variables(rules: RuleSource, order: Sequence[int] | None = None) -> Marking:
    """Least fixpoint of the propagation step, seeded by the preliminary step.

    `order` permutes the rule visiting order; the result does not depend on it.
    """
    rs = _rules(rules)
    idx = list(order) if order is not None else list(range(len(rs)))
    marked: set[tuple[str, Term]] = set()
    for k in idx:
        r = rs[k]
        head = set(r.head.args)
        marked.update((r.id, x) for x in r.body_vars if x not in head)
    changed = True
    while changed:
        changed = False
        hot = {p for r in rs for a in r.body for p, t in a.positions() if (r.id, t) in marked}
        for k in idx:
            r = rs[k]
            for p, t in r.head.positions():
                if t.kind == VAR and p in hot and t not in r.exist_vars and (r.id, t) not in marked:
                    marked.add((r.id, t))
                    changed = True
    return Marking(frozenset(marked), rs)


@dataclass(frozen=True)
class SelectionFunction:
    kind: str  # bottom | rank | exists | oracle
    payload: frozenset[Position] = frozenset()

    def __post_init__(self) -> None:
        if self.kind not in ("bottom", "rank", "exists", "oracle"):
            raise ValueError(f"unknown selection kind {self.kind!r}")

    def __str__(self) -> str:
        return self.kind


BOTTOM = SelectionFunction("bottom")
RANK = SelectionFunction("rank")
EXISTS = SelectionFunction("exists")


def oracle(positions: Iterable[Position]) -> SelectionFunction:
    return SelectionFunction("oracle", frozenset(positions))


def selection(spec: str | SelectionFunction) -> SelectionFunction:
    if isinstance(spec, SelectionFunction):
        return spec
    aliases = {"bot": "bottom", "bottom": "bottom", "rank": "rank", "exists": "exists", "ex": "exists"}
    if spec not in aliases:
        raise ValueError(f"unknown selection {spec!r}")
    return SelectionFunction(aliases[spec])


def select(sel: SelectionFunction | str, program: RuleSource) -> frozenset[Position]:
    sel = selection(sel)
    rules, positions = _rules(program), _positions(program)
    if sel.kind == "bottom":
        return frozenset()
    if sel.kind == "rank":
        return finite_rank_positions(rules, positions)[0]
    if sel.kind == "exists":
        return finite_existential_positions(rules, positions)[0]
    unknown = sel.payload - set(positions)
    if unknown:
        raise UnknownPosition("oracle mentions unknown positions: " + ", ".join(map(repr, sorted(unknown))))
    return sel.payload


@dataclass(frozen=True)
class Witness:
    rule: str
    variable: str
    positions: tuple[Position, ...]

    def to_json(self) -> dict:
        return {"rule": self.rule, "variable": self.variable, "positions": [repr(p) for p in self.positions]}

    def __str__(self) -> str:
        return f"{self.rule}: {self.variable} at {', '.join(map(repr, self.positions))}"


def is_syn_sch(
    program: RuleSource, sel: SelectionFunction | str | frozenset[Position], marking: Marking | None = None
) -> tuple[bool, list[Witness]]:
    """Every repeated body variable must be unmarked or occur at a selected position."""
    rules = _rules(program)
    chosen = sel if isinstance(sel, (set, frozenset)) else select(sel, program)
    marking = marking or mark_variables(rules)
    out = []
    for r in rules:
        for x in r.body_vars:
            if r.occurrences(x) < 2 or not marking.is_marked(r.id, x):
                continue
            bpos = r.body_positions(x)
            if not bpos & chosen:
                out.append(Witness(r.id, x.label, tuple(sorted(bpos))))
    return not out, out


def is_sticky(program: RuleSource) -> bool:
    return is_syn_sch(program, BOTTOM)[0]


def is_weakly_sticky(program: RuleSource) -> bool:
    return is_syn_sch(program, RANK)[0]


def is_jointly_weakly_sticky(program: RuleSource) -> bool:
    return is_syn_sch(program, EXISTS)[0]


@dataclass(frozen=True)
class ClassReport:
    wa: bool
    ja: bool
    sticky: bool
    ws: bool
    jws: bool
    witnesses: dict[str, list[Witness]]
    finite_rank: frozenset[Position]
    finite_existential: frozenset[Position]

    def flags(self) -> dict[str, bool]:
        return {"WA": self.wa, "JA": self.ja, "Sticky": self.sticky, "WS": self.ws, "JWS": self.jws}

    def to_json(self) -> dict:
        return {
            **self.flags(),
            "witnesses": {k: [w.to_json() for w in v] for k, v in self.witnesses.items() if v},
            "finite_rank_positions": [repr(p) for p in sorted(self.finite_rank)],
            "finite_existential_positions": [repr(p) for p in sorted(self.finite_existential)],
        }


def classify(program: RuleSource) -> ClassReport:
    rules = _rules(program)
    marking = mark_variables(rules)
    pi_f = select(RANK, program)
    pi_e = select(EXISTS, program)
    sticky, w_sticky = is_syn_sch(program, frozenset(), marking)
    ws, w_ws = is_syn_sch(program, pi_f, marking)
    jws, w_jws = is_syn_sch(program, pi_e, marking)
    return ClassReport(
        wa=is_weakly_acyclic(rules),
        ja=is_jointly_acyclic(rules),
        sticky=sticky,
        ws=ws,
        jws=jws,
        witnesses={"Sticky": w_sticky, "WS": w_ws, "JWS": w_jws},
        finite_rank=pi_f,
        finite_existential=pi_e,
    )
