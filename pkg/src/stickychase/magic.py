"""MagicD+ magic-sets rewriting for programs with existential rules.

Pipeline: adorn rules reachable from the query (never binding an ∃-variable
position), guard every adorned rule with its magic atom, derive magic rules and
seeds along the sips, and add load rules for intentional predicates that also
carry extensional data.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .classes import classify
from .model import CONST, FROZEN, VAR, Atom, ConjunctiveQuery, Program, Rule, Term, var


def adorned_name(pred: str, pattern: str) -> str:
    return f"{pred}__{pattern}"


def magic_name(pred: str, pattern: str) -> str:
    return f"mg__{pred}__{pattern}"


@dataclass(frozen=True)
class Sips:
    """Processing order of the body atoms plus, for each atom, the atoms that pass it bindings."""

    order: tuple[int, ...]
    head_bound: frozenset[Term]
    preceding: dict[int, tuple[int, ...]] = field(hash=False)

    def bound_before(self, rule: Rule, i: int) -> frozenset[Term]:
        out = set(self.head_bound)
        for j in self.preceding[i]:
            out.update(t for t in rule.body[j].args if t.kind == VAR)
        return frozenset(out)

    def f(self, rule: Rule) -> dict[Atom, frozenset[Term]]:
        """Bound variables after each atom is processed; the head maps to its bound variables."""
        out = {rule.head: self.head_bound}
        for i in self.order:
            out[rule.body[i]] = self.bound_before(rule, i) | {t for t in rule.body[i].args if t.kind == VAR}
        return out


SipsFn = Callable[[Rule, str], Sips]


def _head_bound(rule: Rule, pattern: str) -> frozenset[Term]:
    return frozenset(t for t, c in zip(rule.head.args, pattern) if c == "b" and t.kind == VAR)


def default_sips(rule: Rule, pattern: str) -> Sips:
    """Left to right: each atom receives the head bindings and every variable of the atoms before it."""
    order = tuple(range(len(rule.body)))
    return Sips(order, _head_bound(rule, pattern), {i: order[:k] for k, i in enumerate(order)})


def random_sips(seed: int | random.Random) -> SipsFn:
    """A sips with a random atom order where each atom hears from a random prefix of its predecessors."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)

    def sips(rule: Rule, pattern: str) -> Sips:
        order = list(range(len(rule.body)))
        rng.shuffle(order)
        cut, preceding = 0, {}
        for k, i in enumerate(order):
            # prefix lengths never shrink along the order, which keeps the relation transitive
            cut = rng.randint(cut, k)
            preceding[i] = tuple(order[:cut])
        return Sips(tuple(order), _head_bound(rule, pattern), preceding)

    return sips


def _pattern(a: Atom, bound: frozenset[Term]) -> str:
    return "".join("b" if t.kind in (CONST, FROZEN) or t in bound else "f" for t in a.args)


def _magic_atom(a: Atom, pred: str, pattern: str) -> Atom:
    return Atom(magic_name(pred, pattern), tuple(t for t, c in zip(a.args, pattern) if c == "b"))


@dataclass(frozen=True)
class AdornedRule:
    source: Rule
    pattern: str
    sips: Sips
    rule: Rule  # body in sips order, intentional predicates renamed
    body_patterns: tuple[str | None, ...]  # per adorned body atom; None for extensional atoms


@dataclass
class Adornment:
    rules: list[AdornedRule]
    query: ConjunctiveQuery
    predicates: list[tuple[str, str]]
    trace: list[str]
    query_patterns: tuple[str | None, ...] = ()


def adorn(program: Program, query: ConjunctiveQuery, sips: SipsFn = default_sips) -> Adornment:
    idb = program.intensional()
    seen: list[tuple[str, str]] = []
    work: deque[tuple[str, str]] = deque()
    trace: list[str] = []

    def want(pred: str, pattern: str) -> None:
        if (pred, pattern) not in seen:
            seen.append((pred, pattern))
            work.append((pred, pattern))
            trace.append(f"new {adorned_name(pred, pattern)}")

    q_body, q_pats = [], []
    for a in query.body:
        if a.pred in idb:
            pat = _pattern(a, frozenset())
            want(a.pred, pat)
            q_body.append(Atom(adorned_name(a.pred, pat), a.args))
            q_pats.append(pat)
        else:
            q_body.append(a)
            q_pats.append(None)
    q_m = ConjunctiveQuery(query.name, query.free_vars, tuple(q_body), query.exist_vars)

    out: list[AdornedRule] = []
    while work:
        pred, pat = work.popleft()
        for r in program.rules:
            if r.head.pred != pred:
                continue
            if any(c == "b" and t in r.exist_vars for t, c in zip(r.head.args, pat)):
                trace.append(f"skip {r.id} for {adorned_name(pred, pat)}: binds an existential position")
                continue
            s = sips(r, pat)
            body, pats = [], []
            for i in s.order:
                a = r.body[i]
                if a.pred in idb:
                    p = _pattern(a, s.bound_before(r, i))
                    want(a.pred, p)
                    body.append(Atom(adorned_name(a.pred, p), a.args))
                    pats.append(p)
                else:
                    body.append(a)
                    pats.append(None)
            head = Atom(adorned_name(pred, pat), r.head.args)
            rule = Rule(f"{r.id}__{pat}", tuple(body), head, r.exist_vars)
            out.append(AdornedRule(r, pat, s, rule, tuple(pats)))
            trace.append(f"adorn {r.id} as {rule}")
    return Adornment(out, q_m, seen, trace, tuple(q_pats))


def add_magic_atoms(adorned: Sequence[AdornedRule]) -> list[Rule]:
    out = []
    for ar in adorned:
        guard = _magic_atom(ar.source.head, ar.source.head.pred, ar.pattern)
        out.append(Rule(ar.rule.id, (guard, *ar.rule.body), ar.rule.head, ar.rule.exist_vars))
    return out


def magic_rules_and_seeds(
    adorned: Sequence[AdornedRule], query: ConjunctiveQuery, query_patterns: Sequence[str | None]
) -> tuple[list[Rule], list[Atom]]:
    """Magic rules along each adorned rule's sips, and one seed per adorned query atom.

    `query` is the original query; `query_patterns` holds the adornment of each of its
    atoms (None for extensional atoms).
    """
    rules: list[Rule] = []
    seen: set[tuple[tuple[Atom, ...], Atom]] = set()
    for ar in adorned:
        guard = _magic_atom(ar.source.head, ar.source.head.pred, ar.pattern)
        for k, i in enumerate(ar.sips.order):
            pat = ar.body_patterns[k]
            if pat is None:
                continue
            src = ar.source.body[i]
            head = _magic_atom(src, src.pred, pat)
            before = [ar.rule.body[ar.sips.order.index(j)] for j in ar.sips.order if j in ar.sips.preceding[i]]
            body = (guard, *before)
            if head in body or (body, head) in seen:
                continue
            seen.add((body, head))
            rules.append(Rule(f"m{len(rules) + 1}", body, head))
    seeds = []
    for a, pat in zip(query.body, query_patterns):
        if pat is not None:
            seed = _magic_atom(a, a.pred, pat)
            if seed not in seeds:
                seeds.append(seed)
    return rules, seeds


def load_rules(program: Program, predicates: Sequence[tuple[str, str]]) -> list[Rule]:
    """Copy extensional data of adorned intentional predicates into their adorned versions.

    The step is triggered by the program as a whole: it applies only when some
    intentional predicate has facts, and then every adorned predicate gets a rule.
    """
    idb = program.intensional()
    if not any(a.pred in idb for a in program.edb):
        return []
    out = []
    for pred, pat in predicates:
        xs = tuple(var(f"X{i}") for i in range(1, len(pat) + 1))
        a = Atom(pred, xs)
        out.append(Rule(f"l{len(out) + 1}", (_magic_atom(a, pred, pat), a), Atom(adorned_name(pred, pat), xs)))
    return out


@dataclass
class MagicProgram:
    adorned_rules: list[Rule]
    guarded_rules: list[Rule]
    magic_rules: list[Rule]
    seeds: list[Atom]
    load_rules: list[Rule]
    query: ConjunctiveQuery
    adorned_names: dict[tuple[str, str], str]
    magic_names: dict[tuple[str, str], str]
    program: Program
    trace: list[str]

    @property
    def rules(self) -> list[Rule]:
        return [*self.guarded_rules, *self.magic_rules, *self.load_rules]


def magicd_plus(program: Program, query: ConjunctiveQuery, sips: SipsFn = default_sips) -> tuple[MagicProgram, dict]:
    ad = adorn(program, query, sips)
    guarded = add_magic_atoms(ad.rules)
    magic, seeds = magic_rules_and_seeds(ad.rules, query, ad.query_patterns)
    loads = load_rules(program, ad.predicates)
    rules = tuple(guarded + magic + loads)
    pm = Program(rules, frozenset(program.edb) | frozenset(seeds), (ad.query,))
    mp = MagicProgram(
        [ar.rule for ar in ad.rules],
        guarded,
        magic,
        seeds,
        loads,
        ad.query,
        {k: adorned_name(*k) for k in ad.predicates},
        {k: magic_name(*k) for k in ad.predicates},
        pm,
        ad.trace,
    )
    before, after = classify(program), classify(pm)
    report = {
        "input": before.to_json(),
        "output": after.to_json(),
        "closure": {"input_JWS": before.jws, "output_JWS": after.jws, "holds": (not before.jws) or after.jws},
        "adorned_predicates": {f"{p}^{a}": n for (p, a), n in sorted(mp.adorned_names.items())},
        "magic_predicates": {f"{p}^{a}": n for (p, a), n in sorted(mp.magic_names.items())},
        "seeds": [repr(s) for s in seeds],
    }
    return mp, report


def canonical_rule(r: Rule) -> str:
    """Rule text with variables renamed by first occurrence, for comparisons that ignore names and ids."""
    names: dict[Term, Term] = {}
    for a in (*r.body, r.head):
        for t in a.args:
            if t.kind == VAR and t not in names:
                names[t] = var(f"V{len(names) + 1}")
    ren = lambda a: Atom(a.pred, tuple(names.get(t, t) for t in a.args))  # noqa: E731
    return str(Rule("_", tuple(map(ren, r.body)), ren(r.head), frozenset(names[z] for z in r.exist_vars)))


def is_magic_predicate(pred: str) -> bool:
    return pred.startswith("mg__")
