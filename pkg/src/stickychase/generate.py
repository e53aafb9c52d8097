"""Seeded random programs, instances and queries for property tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import Atom, ConjunctiveQuery, Program, Rule, Term, const, var


@dataclass(frozen=True)
class Shape:
    preds: tuple[int, int] = (2, 4)
    max_arity: int = 3
    rules: tuple[int, int] = (1, 4)
    max_body: int = 3
    p_exist: float = 0.35
    facts: tuple[int, int] = (1, 20)
    constants: int = 4
    var_pool: int = 4


def random_program(seed: int | random.Random, shape: Shape = Shape()) -> Program:
    """Rules use variables only (no constants in rule bodies); facts range over c0, c1, ..."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n_preds = rng.randint(*shape.preds)
    arity = {f"P{i}": rng.randint(1, shape.max_arity) for i in range(n_preds)}
    names = sorted(arity)
    rules = []
    for k in range(rng.randint(*shape.rules)):
        pool = [var(f"X{i}") for i in range(rng.randint(1, shape.var_pool))]
        body = []
        for _ in range(rng.randint(1, shape.max_body)):
            p = rng.choice(names)
            body.append(Atom(p, tuple(rng.choice(pool) for _ in range(arity[p]))))
        used = list(dict.fromkeys(t for a in body for t in a.args))
        head_pred = rng.choice(names)
        exist: list[Term] = []
        args = []
        for _ in range(arity[head_pred]):
            if rng.random() < shape.p_exist:
                if exist and rng.random() < 0.3:
                    args.append(rng.choice(exist))
                else:
                    z = var(f"Z{len(exist) + 1}")
                    exist.append(z)
                    args.append(z)
            else:
                args.append(rng.choice(used))
        rules.append(Rule(f"r{k + 1}", tuple(body), Atom(head_pred, tuple(args)), frozenset(exist)))
    consts = [const(f"c{i}") for i in range(shape.constants)]
    facts = set()
    for _ in range(rng.randint(*shape.facts)):
        p = rng.choice(names)
        facts.add(Atom(p, tuple(rng.choice(consts) for _ in range(arity[p]))))
    return Program(tuple(rules), frozenset(facts))


def random_query(seed: int | random.Random, program: Program, max_atoms: int = 2, p_const: float = 0.3) -> ConjunctiveQuery:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    schema = program.schema
    names = sorted(schema)
    consts = sorted({t for a in program.edb for t in a.args}) or [const("c0")]
    pool = [var(f"Y{i}") for i in range(3)]
    body = []
    for _ in range(rng.randint(1, max_atoms)):
        p = rng.choice(names)
        body.append(Atom(p, tuple(rng.choice(consts) if rng.random() < p_const else rng.choice(pool) for _ in range(schema[p]))))
    vs = list(dict.fromkeys(t for a in body for t in a.args if t.kind == 3))
    free = tuple(v for v in vs if rng.random() < 0.5)
    return ConjunctiveQuery("Q", free, tuple(body))


def algs_family(n: int) -> Program:
    """The resumption example's program over a chain of n links: |EDB| = 2n."""
    from .parser import parse_program

    rules = "P(X,Y), V(Y) -> exists Z P(Y,Z).\nP(X,Y), P(Y,Z) -> U(X).\n"
    facts = "".join(f"P(a{i},a{i + 1}). V(a{i + 1}).\n" for i in range(n))
    return parse_program(facts + rules)


def magic_family(n: int) -> Program:
    """The magic-sets example with n pairs U(b_i), R(a_i,b_i)."""
    from .parser import parse_program

    facts = "".join(f"U(b{i}). R(a{i},b{i}).\n" for i in range(1, n + 1))
    return parse_program(facts + "R(X,Y), R(Y,Z) -> P(X,Z).\nU(Y), R(X,Y) -> exists Z R(Y,Z).\n")
