"""Ollivier-Ricci curvature per edge plus the structural sets behind the
bottleneck inequalities.

kappa(u,v) = 1 - W1(m_u, m_v)/d(u,v), exact rationals throughout. For
adjacent pairs the support-to-support distances are computed with BFS capped
at depth 3: any p in N_u reaches any q in N_v through p-u-v-q.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .graphs import Graph, bfs_distances, neighborhoods
from .transport import local_measure, wasserstein1


class SameVertex(Exception):
    pass


class NotAnEdge(Exception):
    pass


def frac_str(x: Fraction) -> str:
    """Canonical "p/q" rendering; whole numbers keep an explicit /1."""
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class BottleneckSets:
    """S_statement is the extended-neighborhood connecting-edge set from the
    lemma statement; (n0, n1) are the proof-side counts: n0 mutual neighbors,
    n1 vertex-disjoint connecting edges between the exclusive neighborhoods
    (a maximum matching; disjointness is what makes the proof's transport
    plan feasible)."""

    s_statement: tuple[tuple[int, int], ...]
    n0: int
    n1: int
    hypothesis_holds: bool


@dataclass(frozen=True)
class EdgeCurvatureReport:
    edge: tuple[int, int]
    kappa: Fraction
    w1: Fraction
    deg_u: int
    deg_v: int
    common_neighbors: int
    sets: BottleneckSets

    @property
    def kappa_float(self) -> float:
        return float(self.kappa)


@dataclass(frozen=True)
class CurvatureProfile:
    reports: tuple[EdgeCurvatureReport, ...]

    def summary(self) -> dict:
        ks = [r.kappa for r in self.reports]
        return {
            "edge_count": len(ks),
            "kappa_min": min(ks),
            "kappa_max": max(ks),
            "kappa_mean": sum(ks, Fraction(0)) / len(ks),
            "negative_count": sum(1 for k in ks if k < 0),
            "positive_count": sum(1 for k in ks if k > 0),
        }


def ricci_curvature(g: Graph, u: int, v: int) -> Fraction:
    """Exact curvature for any distinct vertex pair; d(u,v) > 1 uses the
    general definition with the distance in the denominator."""
    if u == v:
        raise SameVertex(f"curvature needs two distinct vertices, got {u} twice")
    mu, mv = local_measure(g, u), local_measure(g, v)
    if g.has_edge(u, v):
        w1 = wasserstein1(g, mu, mv, depth_limit=3).cost
        return 1 - w1
    d = bfs_distances(g, u).dist[v]
    w1 = wasserstein1(g, mu, mv).cost
    return 1 - Fraction(w1, d)


def edge_report(g: Graph, u: int, v: int) -> EdgeCurvatureReport:
    if not g.has_edge(u, v):
        raise NotAnEdge(f"({u},{v}) is not an edge")
    mu, mv = local_measure(g, u), local_measure(g, v)
    w1 = wasserstein1(g, mu, mv, depth_limit=3).cost
    nu, _ = neighborhoods(g, u)
    nv, _ = neighborhoods(g, v)
    return EdgeCurvatureReport(
        edge=(min(u, v), max(u, v)),
        kappa=1 - w1,
        w1=w1,
        deg_u=g.degree(min(u, v)),
        deg_v=g.degree(max(u, v)),
        common_neighbors=len(nu & nv),
        sets=bottleneck_sets(g, u, v),
    )


def curvature_profile(g: Graph, threads: int = 1) -> CurvatureProfile:
    """One report per edge in canonical order. Thread count never changes the
    result; edges are independent and collected by index."""
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads == 1 or len(g.edges) < 2:
        reports = [edge_report(g, u, v) for u, v in g.edges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda e: edge_report(g, *e), g.edges))
    return CurvatureProfile(reports=tuple(reports))


def shared_neighbor_bound(report: EdgeCurvatureReport) -> tuple[bool, Fraction]:
    """Common-neighbor lower bound: |N_u cap N_v| / max(deg) >= kappa.

    Returns (holds, slack) with slack = lhs - kappa, both exact.
    """
    lhs = Fraction(report.common_neighbors, max(report.deg_u, report.deg_v))
    slack = lhs - report.kappa
    return slack >= 0, slack


def _max_bipartite_matching(left: list[int], adj: dict[int, list[int]]) -> int:
    match: dict[int, int] = {}

    def augment(p: int, seen: set[int]) -> bool:
        for q in adj.get(p, ()):
            if q in seen:
                continue
            seen.add(q)
            if q not in match or augment(match[q], seen):
                match[q] = p
                return True
        return False

    count = 0
    for p in left:
        if augment(p, set()):
            count += 1
    return count


def bottleneck_sets(g: Graph, u: int, v: int) -> BottleneckSets:
    if not g.has_edge(u, v):
        raise NotAnEdge(f"({u},{v}) is not an edge")
    # orientation convention: deg(hu) = n >= m = deg(hv)
    hu, hv = (u, v) if g.degree(u) >= g.degree(v) else (v, u)
    n, m = g.degree(hu), g.degree(hv)
    n_u, nt_u = neighborhoods(g, hu)
    n_v, nt_v = neighborhoods(g, hv)

    side_u = nt_u - {hv}
    side_v = nt_v - {hu}
    s_statement = tuple(
        e
        for e in g.edges
        if (e[0] in side_u and e[1] in side_v) or (e[1] in side_u and e[0] in side_v)
    )

    n0 = len(n_u & n_v)
    excl_u = sorted(n_u - {hv} - n_v)
    excl_v = n_v - {hu} - n_u
    adj = {p: [q for q in g.adjacency[p] if q in excl_v] for p in excl_u}
    n1 = _max_bipartite_matching(excl_u, adj)

    participation: dict[int, int] = {}
    for a, b in s_statement:
        participation[a] = participation.get(a, 0) + 1
        participation[b] = participation.get(b, 0) + 1
    limit = Fraction(n, m)
    hypothesis = all(c <= limit for c in participation.values())
    return BottleneckSets(
        s_statement=s_statement, n0=n0, n1=n1, hypothesis_holds=hypothesis
    )


@dataclass(frozen=True)
class BottleneckBounds:
    """statement_holds is None when the per-vertex hypothesis fails (the
    statement inequality is then not claimed, so it is skipped, not passed)."""

    statement_holds: bool | None
    statement_lhs: int
    statement_rhs: Fraction
    strong_holds: bool
    strong_lhs: int
    strong_rhs: Fraction


def bottleneck_bound(g: Graph, u: int, v: int, kappa: Fraction) -> BottleneckBounds:
    sets = bottleneck_sets(g, u, v)
    n = max(g.degree(u), g.degree(v))
    statement_lhs = len(sets.s_statement)
    statement_rhs = n * (kappa + 2) / 2
    strong_lhs = 3 * sets.n0 + 2 * sets.n1
    strong_rhs = n * (kappa + 2)
    statement_holds = None
    if sets.hypothesis_holds:
        statement_holds = statement_lhs <= statement_rhs
    return BottleneckBounds(
        statement_holds=statement_holds,
        statement_lhs=statement_lhs,
        statement_rhs=statement_rhs,
        strong_holds=strong_lhs <= strong_rhs,
        strong_lhs=strong_lhs,
        strong_rhs=strong_rhs,
    )


def profile_to_json_obj(profile: CurvatureProfile) -> dict:
    """Schema-shaped dict: rationals as "p/q" strings with advisory floats."""
    edges = []
    for r in profile.reports:
        edges.append(
            {
                "u": r.edge[0],
                "v": r.edge[1],
                "kappa": frac_str(r.kappa),
                "kappa_float": r.kappa_float,
                "w1": frac_str(r.w1),
                "common_neighbors": r.common_neighbors,
                "s_size": len(r.sets.s_statement),
                "n0": r.sets.n0,
                "n1": r.sets.n1,
            }
        )
    s = profile.summary()
    return {
        "edges": edges,
        "summary": {
            "edge_count": s["edge_count"],
            "kappa_min": frac_str(s["kappa_min"]),
            "kappa_min_float": float(s["kappa_min"]),
            "kappa_max": frac_str(s["kappa_max"]),
            "kappa_max_float": float(s["kappa_max"]),
            "kappa_mean": frac_str(s["kappa_mean"]),
            "kappa_mean_float": float(s["kappa_mean"]),
            "negative_count": s["negative_count"],
            "positive_count": s["positive_count"],
        },
    }
