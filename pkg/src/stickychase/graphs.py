"""Dependency graph (ranks, weak acyclicity) and existential dependency graph (∃-ranks, joint acyclicity)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .model import VAR, Position, Rule, Term, rule_positions, var

INF = math.inf


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset[Position]
    normal_edges: frozenset[tuple[Position, Position]]
    special_edges: frozenset[tuple[Position, Position]]

    def to_json(self) -> dict:
        def edges(es, kind):
            return [{"from": repr(a), "to": repr(b), "kind": kind} for a, b in sorted(es)]

        return {
            "nodes": [repr(p) for p in sorted(self.nodes)],
            "edges": edges(self.normal_edges, "normal") + edges(self.special_edges, "special"),
        }


ExVar = tuple[str, str]  # (rule id, existential variable name)


@dataclass(frozen=True)
class ExistentialDependencyGraph:
    nodes: tuple[ExVar, ...]
    edges: frozenset[tuple[ExVar, ExVar]]
    targets: dict[ExVar, frozenset[Position]] = field(hash=False)

    def to_json(self) -> dict:
        name = lambda z: f"{z[0]}.{z[1]}"  # noqa: E731
        return {
            "nodes": [name(z) for z in self.nodes],
            "edges": [{"from": name(a), "to": name(b)} for a, b in sorted(self.edges)],
            "targets": {name(z): [repr(p) for p in sorted(ps)] for z, ps in self.targets.items()},
        }

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class RankTable:
    rank: dict[Position, float]
    erank: dict[Position, float]

    def to_json(self) -> dict:
        enc = lambda v: "inf" if v == INF else int(v)  # noqa: E731
        return {
            "rank": {repr(p): enc(v) for p, v in sorted(self.rank.items())},
            "erank": {repr(p): enc(v) for p, v in sorted(self.erank.items())},
        }


# -- dependency graph -----------------------------------------------------

def build_dg(rules: Sequence[Rule], positions: Sequence[Position] | None = None) -> DependencyGraph:
    normal: set[tuple[Position, Position]] = set()
    special: set[tuple[Position, Position]] = set()
    for r in rules:
        ex_pos = [p for p, t in r.head.positions() if t in r.exist_vars]
        # special edges leave every body variable, not only the frontier: a new value at a
        # non-frontier position re-triggers the rule under the oblivious chase
        for x in r.body_vars:
            hpos = r.head_positions(x)
            for p in r.body_positions(x):
                normal.update((p, q) for q in hpos)
                special.update((p, q) for q in ex_pos)
    nodes = set(positions if positions is not None else rule_positions(rules))
    return DependencyGraph(frozenset(nodes), frozenset(normal), frozenset(special))


def _ranks(dg: DependencyGraph) -> dict[Position, float]:
    g = nx.DiGraph()
    g.add_nodes_from(dg.nodes)
    for a, b in dg.normal_edges:
        g.add_edge(a, b, w=0)
    for a, b in dg.special_edges:
        g.add_edge(a, b, w=1)
    cond = nx.condensation(g)
    member = cond.graph["mapping"]
    rank: dict[int, float] = {}
    for c in nx.topological_sort(cond):
        inner = cond.nodes[c]["members"]
        cyclic_special = any(member[b] == c and g[a][b]["w"] for a in inner for b in g.successors(a))
        best = INF if cyclic_special else 0.0
        for a in inner:
            for pred in g.predecessors(a):
                pc = member[pred]
                if pc != c:
                    best = max(best, rank[pc] + g[pred][a]["w"])
        rank[c] = best
    return {p: rank[member[p]] for p in g.nodes}


def finite_rank_positions(
    rules: Sequence[Rule], positions: Sequence[Position] | None = None
) -> tuple[frozenset[Position], dict[Position, float]]:
    """Π_F and the rank of every position (math.inf for infinite rank)."""
    ranks = _ranks(build_dg(rules, positions))
    return frozenset(p for p, v in ranks.items() if v != INF), ranks


def is_weakly_acyclic(rules: Sequence[Rule]) -> bool:
    finite, ranks = finite_rank_positions(rules)
    return len(finite) == len(ranks)


# -- existential dependency graph -----------------------------------------

def standardize_apart(rules: Sequence[Rule]) -> list[Rule]:
    """Qualify every variable with its rule id so no variable is shared between rules."""
    out = []
    for r in rules:
        ren = lambda t: var(f"{r.id}.{t.label}") if t.kind == VAR else t  # noqa: E731
        body = tuple(a._replace(args=tuple(map(ren, a.args))) for a in r.body)
        head = r.head._replace(args=tuple(map(ren, r.head.args)))
        out.append(Rule(r.id, body, head, frozenset(map(ren, r.exist_vars))))
    return out


def build_edg(rules: Sequence[Rule]) -> ExistentialDependencyGraph:
    std = standardize_apart(rules)
    # (B_x, H_x) for every body variable of every rule
    body_vars: list[tuple[Rule, Term, frozenset[Position], frozenset[Position]]] = []
    for r in std:
        for x in r.body_vars:
            body_vars.append((r, x, r.body_positions(x), r.head_positions(x)))
    nodes: list[ExVar] = []
    targets: dict[ExVar, frozenset[Position]] = {}
    for r, orig in zip(std, rules):
        for z in sorted(r.exist_vars, key=lambda t: r.head.args.index(t)):
            node = (orig.id, z.label.split(".", 1)[1])
            nodes.append(node)
            t = set(r.head_positions(z))
            changed = True
            while changed:
                changed = False
                for _, _, b, h in body_vars:
                    if h and b <= t and not h <= t:
                        t |= h
                        changed = True
            targets[node] = frozenset(t)
    edges = set()
    by_rule: dict[str, list[frozenset[Position]]] = {}
    for r, _, b, _ in body_vars:
        by_rule.setdefault(r.id, []).append(b)
    for z in nodes:
        tz = targets[z]
        for z2 in nodes:
            if any(b <= tz for b in by_rule.get(z2[0], ())):
                edges.add((z, z2))
    return ExistentialDependencyGraph(tuple(nodes), frozenset(edges), targets)


def is_jointly_acyclic(rules: Sequence[Rule]) -> bool:
    return nx.is_directed_acyclic_graph(build_edg(rules).graph())


def _path_counts(edg: ExistentialDependencyGraph) -> dict[ExVar, float]:
    """Maximum number of nodes on a path ending at each node; inf if a cycle reaches it."""
    g = edg.graph()
    cond = nx.condensation(g)
    member = cond.graph["mapping"]
    best: dict[int, float] = {}
    for c in nx.topological_sort(cond):
        inner = cond.nodes[c]["members"]
        cyclic = len(inner) > 1 or any(g.has_edge(z, z) for z in inner)
        val = INF if cyclic else 1.0
        for pc in cond.predecessors(c):
            val = max(val, best[pc] + 1)
        best[c] = val
    return {z: best[member[z]] for z in g.nodes}


def finite_existential_positions(
    rules: Sequence[Rule], positions: Sequence[Position] | None = None
) -> tuple[frozenset[Position], dict[Position, float]]:
    """Π_F^∃ and the ∃-rank of every position."""
    edg = build_edg(rules)
    counts = _path_counts(edg)
    erank = {p: 0.0 for p in (positions if positions is not None else rule_positions(rules))}
    for z, tz in edg.targets.items():
        for p in tz:
            erank[p] = max(erank.get(p, 0.0), counts[z])
    return frozenset(p for p, v in erank.items() if v != INF), erank


def rank_table(rules: Sequence[Rule], positions: Sequence[Position] | None = None) -> RankTable:
    _, rank = finite_rank_positions(rules, positions)
    _, erank = finite_existential_positions(rules, positions)
    return RankTable(rank, erank)
