"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line; the run ends with a summary table.

Randomized criteria derive their program seeds from `--seed` (default pinned in conftest).
"""

import math
import random
import statistics
import time

from stickychase.chase import check_s_stickiness, classic_chase
from stickychase.classes import classify, is_syn_sch
from stickychase.generate import algs_family, random_program, random_query
from stickychase.graphs import finite_existential_positions, finite_rank_positions, is_weakly_acyclic
from stickychase.magic import canonical_rule, default_sips, is_magic_predicate, magicd_plus, random_sips
from stickychase.model import Position, isomorphic
from stickychase.parser import parse_instance, parse_program
from stickychase.qa import oracle_answers, qchase, resume, schqa

import paper_programs as pp
from test_magic import EXPECTED_GUARDED, EXPECTED_LOAD, EXPECTED_MAGIC

# pinned limits
GOLDEN_SECONDS = 1.0
SLOPE_LIMIT = 2.5
SWEEP_SECONDS = 60.0
SEMANTIC_BUDGET = 500
ORACLE_BUDGET = 2000
CLOSURE_SAMPLES = 200
SEMANTIC_SAMPLES = 200
ORACLE_SAMPLES = 100
SELECTIONS = ("bot", "rank", "exists")


def _new_atoms(inst, prog):
    return {a for a in inst if a not in prog.edb}


def _seeds(seed, salt):
    rng = random.Random(seed * 1009 + salt)
    while True:
        yield rng.randrange(2**32)


def test_criterion_1_golden_chase(verdict):
    prog = parse_program(pp.CHASE_INTRO)
    t0 = time.perf_counter()
    res = classic_chase(prog, 6)
    elapsed = time.perf_counter() - t0
    expected = parse_instance(
        "R(b,_:n1). S(a,b,_:n1). R(_:n1,_:n2). S(b,_:n1,_:n2). R(_:n2,_:n3). S(_:n1,_:n2,_:n3)."
    )
    ok = isomorphic(_new_atoms(res.instance, prog), expected) and elapsed < GOLDEN_SECONDS
    verdict("criterion 1", ok, f"{len(res.steps)} steps in {elapsed:.3f}s")


def test_criterion_2_classification_goldens(verdict):
    # (program, flags the worked examples state)
    cases = {
        "dg P": (pp.DG_P, {"WA": True}),
        "dg P'": (pp.DG_P_PRIME, {"WA": False, "WS": True}),
        "edg": (pp.EDG, {"JA": True}),
        "sticky P": (pp.STICKY_P, {"Sticky": True}),
        "sticky P'": (pp.STICKY_P_PRIME, {"Sticky": False}),
        "ws P": (pp.WS_P, {"WS": True, "WA": False}),
        "ws P'": (pp.WS_P_PRIME, {"WS": False}),
        "jws": (pp.JWS, {"WA": False, "Sticky": False, "WS": False, "JWS": True}),
        "notclosed": (pp.NOT_CLOSED, {"WS": True}),
    }
    bad = []
    for name, (text, expected) in cases.items():
        got = classify(parse_program(text)).flags()
        if {k: got[k] for k in expected} != expected:
            bad.append(f"{name}: {got}")
    prog = parse_program(pp.NOT_CLOSED)
    out = classify(magicd_plus(prog, prog.queries[0])[0].program).flags()
    if out["WS"] or not out["JWS"]:
        bad.append(f"notclosed P_m: {out}")
    verdict("criterion 2", not bad, "; ".join(bad) or f"{len(cases)} programs and P_m")


def test_criterion_3_rank_tables(verdict):
    P = lambda s: Position(s[0], int(s[1]))  # noqa: E731
    _, dg = finite_rank_positions(parse_program(pp.DG_P).rules)
    dg_ok = [dg[P(s)] for s in ("R1", "R2", "P1", "P2")] == [0, 0, 0, 1]
    _, er = finite_existential_positions(parse_program(pp.EDG).rules)
    expected = {"R2": 2, "S3": 2, "P2": 1, "R1": 1, "S2": 1, "S1": 0, "U1": 0, "P1": 0}
    er_ok = {k: er[P(k)] for k in expected} == expected
    verdict("criterion 3", dg_ok and er_ok, f"dg={dg_ok} exists-rank={er_ok}")


def test_criterion_4_schqa_goldens(verdict):
    fails = []
    slowest = 0.0

    def timed(fn):
        nonlocal slowest
        t0 = time.perf_counter()
        out = fn()
        slowest = max(slowest, time.perf_counter() - t0)
        return out

    alg = parse_program(pp.ALG)
    q = alg.queries[0]
    st = timed(lambda: qchase(alg, q, "bot"))
    if not isomorphic(_new_atoms(st.instance, alg), parse_instance("P(b,_:f1). R(a,b). P(_:f1,_:n2). R(b,_:f1).")):
        fails.append("alg instance")
    if {r[0].label for r in st.answers(q).tuples} != {"a", "b"}:
        fails.append("alg answers")

    algs = parse_program(pp.ALGS)
    q = algs.queries[0]
    ex = timed(lambda: qchase(algs, q, "exists"))
    if not isomorphic(_new_atoms(ex.instance, algs), parse_instance("P(c,_:n1). U(a). U(b). P(_:n1,_:n2). U(c).")):
        fails.append("algS exists instance")
    got = {r[0].label for r in ex.answers(q).tuples}
    if got != {"a", "b", "c"}:
        fails.append(f"algS exists answers {sorted(got)}")
    rk = timed(lambda: qchase(algs, q, "rank"))
    if not isomorphic(_new_atoms(rk.instance, algs), parse_instance("P(c,_:n1). U(a). U(b).")):
        fails.append("algS rank instance")
    if {r[0].label for r in schqa(algs, q, "rank").tuples} != {"a", "b"}:
        fails.append("algS rank answers")

    more = timed(lambda: resume(ex, 1))
    extended = parse_instance("P(c,_:f1). U(a). U(b). P(_:f1,_:n2). U(c). P(_:n2,_:n3). U(_:f1).")
    if not isomorphic(_new_atoms(more.instance, algs), extended):
        fails.append("resumption instance")
    if slowest >= GOLDEN_SECONDS:
        fails.append(f"slowest run {slowest:.2f}s")
    verdict("criterion 4", not fails, "; ".join(fails) or f"slowest run {slowest:.3f}s")


def test_criterion_5_magic_golden(verdict):
    fails = []
    prog = parse_program(pp.magic_example(1))
    q = prog.queries[0]
    mp, _ = magicd_plus(prog, q)
    if {canonical_rule(r) for r in mp.guarded_rules} != EXPECTED_GUARDED:
        fails.append("guarded rules")
    if {canonical_rule(r) for r in mp.magic_rules} != EXPECTED_MAGIC:
        fails.append("magic rules")
    if {canonical_rule(r) for r in mp.load_rules} != EXPECTED_LOAD:
        fails.append("load rules")
    st = qchase(mp.program, mp.query, "exists")
    i_m = parse_instance(
        "mg__P__bf(a1). mg__R__bf(a1). R__bf(a1,b1). mg__R__fb(b1). R__bf(b1,_:f1). P__bf(a1,_:f1)."
    )
    got = _new_atoms(st.instance, prog)
    if not isomorphic(got, i_m):
        fails.append(f"I_m has {len(got)} atoms beyond D, expected 6: {sorted(map(repr, got))}")
    if not (st.answers(mp.query).truth and qchase(prog, q, "exists").answers(q).truth):
        fails.append("Q or Q_m false")

    big = parse_program(pp.magic_example(50))
    mp50, _ = magicd_plus(big, big.queries[0])
    st50 = qchase(mp50.program, mp50.query, "exists")
    plain = sum(1 for a in _new_atoms(st50.instance, big) if not is_magic_predicate(a.pred))
    classic = len(classic_chase(big, 1000).instance)
    if plain > 6 or classic <= 100:
        fails.append(f"n=50: non-magic {plain}, classic {classic}")
    verdict("criterion 5", not fails, "; ".join(fails) or f"n=50: non-magic {plain}, classic {classic}")


def test_criterion_6_jws_closure(seed, verdict):
    checked, broken = 0, []
    for s in _seeds(seed, 6):
        prog = random_program(s)
        if not classify(prog).jws:
            continue
        q = random_query(s, prog)
        for sips in (default_sips, random_sips(s)):
            _, report = magicd_plus(prog, q, sips)
            if not report["closure"]["output_JWS"]:
                broken.append(s)
        checked += 1
        if checked == CLOSURE_SAMPLES:
            break
    verdict("criterion 6", not broken, f"{len(broken)} of {2 * checked} rewritings not JWS; program seeds {sorted(set(broken))[:5]}")


def test_criterion_7_syntactic_implies_semantic(seed, verdict):
    bad = []
    for k, sel in enumerate(SELECTIONS):
        found = 0
        for s in _seeds(seed, 70 + k):
            prog = random_program(s)
            if not is_syn_sch(prog, sel)[0]:
                continue
            if check_s_stickiness(prog, sel, SEMANTIC_BUDGET, first_only=True).violated:
                bad.append((sel, s))
            found += 1
            if found == SEMANTIC_SAMPLES:
                break
    verdict("criterion 7", not bad, f"{len(bad)} violations over {SEMANTIC_SAMPLES} programs per selection")


def test_criterion_8_oracle_equivalence(seed, verdict):
    compared, bad, used = 0, [], 0
    for s in _seeds(seed, 8):
        prog = random_program(s)
        if not is_weakly_acyclic(prog.rules):
            continue
        q = random_query(s, prog)
        expected, done = oracle_answers(prog, q, ORACLE_BUDGET)
        if not done:
            continue
        for sel in SELECTIONS:
            if is_syn_sch(prog, sel)[0]:
                compared += 1
                if schqa(prog, q, sel).tuples != expected.tuples:
                    bad.append((s, sel))
        used += 1
        if used == ORACLE_SAMPLES:
            break
    verdict("criterion 8", not bad and compared > 0, f"{len(bad)} mismatches in {compared} comparisons")


def test_criterion_9_polynomial_growth(verdict):
    t0 = time.perf_counter()
    xs, ys = [], []
    for n in (5, 10, 20, 40, 80, 160):
        prog = algs_family(n)
        q = parse_program(pp.ALGS).queries[0]
        inst = qchase(prog, q, "exists").instance
        xs.append(math.log(len(prog.edb)))
        ys.append(math.log(len(inst)))
    slope = statistics.linear_regression(xs, ys).slope
    elapsed = time.perf_counter() - t0
    verdict("criterion 9", slope <= SLOPE_LIMIT and elapsed < SWEEP_SECONDS, f"slope {slope:.3f}, sweep {elapsed:.2f}s")
