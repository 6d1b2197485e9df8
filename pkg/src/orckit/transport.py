"""Exact discrete Wasserstein-1 between local measures.

Two independent solvers: the production path scales both measures to a
common integer grid and runs successive shortest augmenting paths with
Dijkstra potentials; the oracle solves the same integer transportation
problem with the classical simplex (northwest-corner start + MODI pivots).
Every number in either path is an int or a Fraction; no floats anywhere.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .graphs import Graph, UNREACHABLE, bfs_distances


class TooLarge(Exception):
    """Oracle support product exceeds the configured cap."""


@dataclass(frozen=True)
class LocalMeasure:
    """Probability distribution with rational masses on a sorted vertex support."""

    support: tuple[int, ...]
    mass: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass lengths differ")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError("support must be sorted and distinct")
        if any(m <= 0 for m in self.mass):
            raise ValueError("masses must be strictly positive")
        if sum(self.mass) != 1:
            raise ValueError("masses must sum to exactly 1")

    def as_dict(self) -> dict[int, Fraction]:
        return dict(zip(self.support, self.mass))


@dataclass(frozen=True)
class TransportPlan:
    """A coupling between two local measures together with its exact cost."""

    entries: tuple[tuple[int, int, Fraction], ...]
    cost: Fraction


def local_measure(g: Graph, u: int) -> LocalMeasure:
    """Uniform random-walk measure: mass 1/deg(u) on each neighbor of u."""
    deg = g.degree(u)
    if deg == 0:
        raise ValueError(f"vertex {u} is isolated")
    w = Fraction(1, deg)
    return LocalMeasure(support=g.adjacency[u], mass=(w,) * deg)


def _support_distances(
    g: Graph, rows: tuple[int, ...], cols: tuple[int, ...], depth_limit: int | None
) -> list[list[int]]:
    out = []
    for p in rows:
        dist = bfs_distances(g, p, depth_limit).dist
        row = []
        for q in cols:
            if dist[q] == UNREACHABLE:
                raise ValueError(
                    f"distance {p}->{q} exceeds depth limit {depth_limit}; "
                    "supports are farther apart than the caller assumed"
                )
            row.append(dist[q])
        out.append(row)
    return out


def _integer_problem(mu: LocalMeasure, mv: LocalMeasure) -> tuple[int, list[int], list[int]]:
    """Common scale T plus integer supplies/demands (each summing to T)."""
    T = lcm(*(m.denominator for m in mu.mass + mv.mass))
    supplies = [int(m * T) for m in mu.mass]
    demands = [int(m * T) for m in mv.mass]
    return T, supplies, demands


def wasserstein1(
    g: Graph, mu: LocalMeasure, mv: LocalMeasure, depth_limit: int | None = None
) -> TransportPlan:
    """Optimal transport between mu and mv with hop-count ground distance.

    Returns one optimal plan; entries are reported for explainability but the
    plan is just one optimizer among possibly many. Cost is contractual.
    """
    cost_m = _support_distances(g, mu.support, mv.support, depth_limit)
    T, supplies, demands = _integer_problem(mu, mv)
    flow = _min_cost_flow_ssp(supplies, demands, cost_m)

    entries = []
    total = 0
    for i, p in enumerate(mu.support):
        for j, q in enumerate(mv.support):
            f = flow[i][j]
            if f:
                entries.append((p, q, Fraction(f, T)))
                total += f * cost_m[i][j]
    plan = TransportPlan(entries=tuple(entries), cost=Fraction(total, T))
    _check_marginals(mu, mv, plan)
    return plan


def _check_marginals(mu: LocalMeasure, mv: LocalMeasure, plan: TransportPlan) -> None:
    row: dict[int, Fraction] = {p: Fraction(0) for p in mu.support}
    col: dict[int, Fraction] = {q: Fraction(0) for q in mv.support}
    for p, q, m in plan.entries:
        row[p] += m
        col[q] += m
    if row != mu.as_dict() or col != mv.as_dict():
        raise RuntimeError("transport plan marginals do not match the measures")


# ---------------------------------------------------------------------------
# Production solver: successive shortest augmenting paths with potentials.
# Node layout: 0..m-1 sources, m..m+n-1 sinks. All arcs integer.


def _min_cost_flow_ssp(
    supplies: list[int], demands: list[int], cost: list[list[int]]
) -> list[list[int]]:
    m, n = len(supplies), len(demands)
    flow = [[0] * n for _ in range(m)]
    remaining_supply = list(supplies)
    remaining_demand = list(demands)
    # potentials keep reduced costs non-negative; costs are >= 0 initially
    pot = [0] * (m + n)
    total_left = sum(supplies)

    while total_left > 0:
        # Dijkstra over the residual bipartite graph from all sources with
        # remaining supply (implicit super-source at distance 0)
        INF = None
        dist: list[int | None] = [INF] * (m + n)
        prev: list[int] = [-1] * (m + n)
        pq: list[tuple[int, int]] = []
        for i in range(m):
            if remaining_supply[i] > 0:
                dist[i] = 0
                heapq.heappush(pq, (0, i))
        while pq:
            d, node = heapq.heappop(pq)
            if dist[node] is not None and d > dist[node]:
                continue
            if node < m:
                i = node
                for j in range(n):
                    rc = cost[i][j] + pot[i] - pot[m + j]
                    nd = d + rc
                    if dist[m + j] is None or nd < dist[m + j]:
                        dist[m + j] = nd
                        prev[m + j] = i
                        heapq.heappush(pq, (nd, m + j))
            else:
                j = node - m
                for i in range(m):
                    if flow[i][j] > 0:
                        rc = -cost[i][j] + pot[m + j] - pot[i]
                        nd = d + rc
                        if dist[i] is None or nd < dist[i]:
                            dist[i] = nd
                            prev[i] = m + j
                            heapq.heappush(pq, (nd, i))

        # pick the reachable sink with remaining demand at minimum distance
        best_j = -1
        for j in range(n):
            if remaining_demand[j] > 0 and dist[m + j] is not None:
                if best_j < 0 or dist[m + j] < dist[m + best_j]:
                    best_j = j
        if best_j < 0:
            raise RuntimeError("unbalanced transportation problem")
        dist_t = dist[m + best_j]

        # walk the path back, finding the bottleneck
        path = []
        node = m + best_j
        while prev[node] != -1:
            path.append((prev[node], node))
            node = prev[node]
        start = node
        bottleneck = min(remaining_supply[start], remaining_demand[best_j])
        for a, b in path:
            if a < m:
                pass  # forward arc, uncapacitated
            else:
                bottleneck = min(bottleneck, flow[b][a - m])
        for a, b in path:
            if a < m:
                flow[a][b - m] += bottleneck
            else:
                flow[b][a - m] -= bottleneck
        remaining_supply[start] -= bottleneck
        remaining_demand[best_j] -= bottleneck
        total_left -= bottleneck

        # cap at the augmenting distance so reduced costs stay non-negative
        # even for arcs into vertices this Dijkstra pass never reached
        for node in range(m + n):
            d = dist[node]
            pot[node] += dist_t if d is None else min(d, dist_t)

    return flow


# ---------------------------------------------------------------------------
# Oracle: integer transportation simplex (northwest corner + MODI).
# Deliberately a different algorithm family from the production solver.

ORACLE_SUPPORT_CAP = 64


def wasserstein1_oracle(
    g: Graph, mu: LocalMeasure, mv: LocalMeasure, cap: int = ORACLE_SUPPORT_CAP
) -> Fraction:
    if len(mu.support) * len(mv.support) > cap:
        raise TooLarge(
            f"support product {len(mu.support)}x{len(mv.support)} exceeds cap {cap}"
        )
    cost_m = _support_distances(g, mu.support, mv.support, None)
    T, supplies, demands = _integer_problem(mu, mv)
    total = _transportation_simplex(supplies, demands, cost_m)
    return Fraction(total, T)


def _transportation_simplex(
    supplies: list[int], demands: list[int], cost: list[list[int]]
) -> int:
    m, n = len(supplies), len(demands)
    x = [[0] * n for _ in range(m)]
    basis: set[tuple[int, int]] = set()

    # northwest-corner start; keep zero cells basic so the basis is a
    # spanning tree of m+n-1 cells even under degeneracy
    a = list(supplies)
    b = list(demands)
    i = j = 0
    while len(basis) < m + n - 1:
        basis.add((i, j))
        t = min(a[i], b[j])
        x[i][j] = t
        a[i] -= t
        b[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if a[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1

    while True:
        u, v = _solve_duals(m, n, cost, basis)
        entering = None
        for ii in range(m):  # Bland: first negative reduced cost in row-major order
            for jj in range(n):
                if (ii, jj) in basis:
                    continue
                if cost[ii][jj] - u[ii] - v[jj] < 0:
                    entering = (ii, jj)
                    break
            if entering:
                break
        if entering is None:
            return sum(
                x[i][j] * cost[i][j] for i in range(m) for j in range(n) if x[i][j]
            )

        cycle = _basis_cycle(basis, entering)
        minus = cycle[1::2]
        theta = min(x[i][j] for i, j in minus)
        leaving = min((c for c in minus if x[c[0]][c[1]] == theta))
        for k, (ci, cj) in enumerate(cycle):
            x[ci][cj] += theta if k % 2 == 0 else -theta
        basis.add(entering)
        basis.remove(leaving)


def _solve_duals(m, n, cost, basis):
    """Solve u_i + v_j = c_ij over the basis spanning tree, anchored at u_0 = 0."""
    u: list[int | None] = [None] * m
    v: list[int | None] = [None] * n
    u[0] = 0
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for i, j in basis:
        by_row.setdefault(i, []).append(j)
        by_col.setdefault(j, []).append(i)
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in by_row.get(k, ()):
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    stack.append(("c", j))
        else:
            for i in by_col.get(k, ()):
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    stack.append(("r", i))
    if any(val is None for val in u) or any(val is None for val in v):
        raise RuntimeError("basis is not a spanning tree")
    return u, v


def _basis_cycle(basis, entering):
    """Unique alternating cycle formed by the entering cell and the basis tree.

    Returns cells starting at `entering`, alternating row/column moves, so
    even positions gain flow and odd positions lose it.
    """
    ei, ej = entering
    # find a path from row ei to column ej through basis cells
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for i, j in basis:
        by_row.setdefault(i, []).append(j)
        by_col.setdefault(j, []).append(i)

    # DFS over alternating row/col moves; nodes are ("r", i) / ("c", j)
    target = ("c", ej)
    stack: list[tuple[tuple[str, int], list[tuple[int, int]]]] = [(("r", ei), [])]
    seen = {("r", ei)}
    while stack:
        (kind, k), path = stack.pop()
        if (kind, k) == target:
            return [entering] + path[::-1]
        if kind == "r":
            for j in by_row.get(k, ()):
                node = ("c", j)
                if node not in seen:
                    seen.add(node)
                    stack.append((node, path + [(k, j)]))
        else:
            for i in by_col.get(k, ()):
                node = ("r", i)
                if node not in seen:
                    seen.add(node)
                    stack.append((node, path + [(i, k)]))
    raise RuntimeError("entering cell closes no cycle; basis is inconsistent")
