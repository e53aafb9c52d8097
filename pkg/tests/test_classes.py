import pytest
from hypothesis import given
from hypothesis import strategies as st

from stickychase.classes import (
    BOTTOM,
    EXISTS,
    RANK,
    classify,
    is_syn_sch,
    mark_variables,
    oracle,
    select,
    selection,
)
from stickychase.errors import UnknownPosition
from stickychase.generate import random_program
from stickychase.model import Position
from stickychase.parser import parse_program

import paper_programs as pp


def flags(text):
    return classify(parse_program(text)).flags()


def test_marking_after_propagation():
    prog = parse_program(pp.STICKY_P)
    m = mark_variables(prog)
    assert [m.render(r) for r in prog.rules] == [
        "R(^X,^Y) -> exists Z R(Y,Z).",
        "R(X,Y), R(Y,Z) -> S(X,Y,Z).",
    ]


def test_marking_of_non_sticky_program():
    prog = parse_program(pp.STICKY_P_PRIME)
    m = mark_variables(prog)
    assert [m.render(r) for r in prog.rules] == [
        "R(^X,^Y) -> exists Z R(Y,Z).",
        "R(X,^Y), R(^Y,Z) -> S(X,Y,Z).",
        "S(X,^Y,Z) -> P(X,Z).",
    ]


@pytest.mark.parametrize(
    "text, expected",
    [
        (pp.DG_P, {"WA": True, "JA": True, "Sticky": False, "WS": True, "JWS": True}),
        (pp.EDG, {"JA": True}),
        (pp.STICKY_P, {"Sticky": True, "JA": False}),
        (pp.STICKY_P_PRIME, {"Sticky": False, "WS": False, "JWS": False}),
        (pp.WS_P, {"WS": True, "WA": False}),
        (pp.WS_P_PRIME, {"WS": False}),
        (pp.JWS, {"WA": False, "Sticky": False, "WS": False, "JWS": True}),
        (pp.NOT_CLOSED, {"WS": True}),
        (pp.MAGIC_RULES, {"JWS": True}),
    ],
)
def test_classification(text, expected):
    got = flags(text)
    assert {k: got[k] for k in expected} == expected


def test_program_without_joins_is_sticky_whatever_its_ranks():
    assert flags(pp.DG_P_PRIME) == {"WA": False, "JA": False, "Sticky": True, "WS": True, "JWS": True}


def test_witness_names_variable_and_positions():
    ok, ws = is_syn_sch(parse_program(pp.WS_P_PRIME), RANK)
    assert not ok
    assert [(w.rule, w.variable, w.positions) for w in ws] == [("r2", "Y", (Position("R", 1), Position("R", 2)))]


def test_selection_parsing_and_oracle():
    assert selection("bot") == BOTTOM and selection("ex") == EXISTS
    with pytest.raises(ValueError):
        selection("top")
    prog = parse_program(pp.WS_P)
    assert select(oracle({Position("U", 1)}), prog) == {Position("U", 1)}
    with pytest.raises(UnknownPosition):
        select(oracle({Position("Nope", 1)}), prog)


@given(st.integers(0, 10_000), st.randoms())
def test_marking_is_order_independent(seed, rnd):
    rs = random_program(seed).rules
    order = list(range(len(rs)))
    rnd.shuffle(order)
    assert mark_variables(rs).marked_vars == mark_variables(rs, order).marked_vars


@given(st.integers(0, 10_000))
def test_class_inclusions(seed):
    f = classify(random_program(seed)).flags()
    assert not f["Sticky"] or f["WS"]
    assert not f["WS"] or f["JWS"]
    assert not f["WA"] or f["JA"]


@given(st.integers(0, 10_000), st.data())
def test_syn_sch_is_monotone_in_the_selection(seed, data):
    prog = random_program(seed)
    pos = prog.positions()
    small = set(data.draw(st.sets(st.sampled_from(pos)))) if pos else set()
    big = small | (set(data.draw(st.sets(st.sampled_from(pos)))) if pos else set())
    if is_syn_sch(prog, frozenset(small))[0]:
        assert is_syn_sch(prog, frozenset(big))[0]
