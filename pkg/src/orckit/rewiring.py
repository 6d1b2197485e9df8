"""Curvature-guided rewiring.

Edges whose curvature exceeds tau_pos get trimmed (most positive first);
edges below tau_neg get one extra support edge bridging their exclusive
neighborhoods, placed to spread load rather than concentrate it on one
vertex. The loop recomputes curvature every iteration and rolls back any
step that increases the number of out-of-band edges, so the out-of-band
count is non-increasing across accepted steps.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction

from .curvature import CurvatureProfile, bottleneck_sets, curvature_profile
from .graphs import Graph, GraphInvalid, UNREACHABLE, from_edges, neighborhoods

HISTOGRAM_BINS = 12  # width 1/4 over [-2, 1], last bin closed


class NoActionPossible(Exception):
    """No edge crosses either threshold."""


@dataclass(frozen=True)
class RewireConfig:
    tau_neg: float = -0.5
    tau_pos: float = 0.99
    max_iterations: int = 10
    additions_per_step: int = 1
    removals_per_step: int = 1
    seed: int = 0
    preserve_connectivity: bool = True

    def __post_init__(self):
        if not self.tau_neg < self.tau_pos:
            raise ValueError(f"tau_neg {self.tau_neg} must be below tau_pos {self.tau_pos}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.additions_per_step < 1 or self.removals_per_step < 1:
            raise ValueError("per-step budgets must be positive")

    def to_json_obj(self) -> dict:
        return {
            "tau_neg": self.tau_neg,
            "tau_pos": self.tau_pos,
            "max_iterations": self.max_iterations,
            "additions_per_step": self.additions_per_step,
            "removals_per_step": self.removals_per_step,
            "seed": self.seed,
            "preserve_connectivity": self.preserve_connectivity,
        }


@dataclass(frozen=True)
class RewireStep:
    """One iteration's actions; after-fields are filled by the loop once the
    new profile exists, and stay None for a standalone step."""

    added: tuple[tuple[int, int], ...]
    removed: tuple[tuple[int, int], ...]
    out_of_band_before: int
    histogram_before: tuple[int, ...]
    out_of_band_after: int | None = None
    histogram_after: tuple[int, ...] | None = None
    rolled_back: bool = False

    def to_json_obj(self) -> dict:
        return {
            "added": [list(e) for e in self.added],
            "removed": [list(e) for e in self.removed],
            "out_of_band_before": self.out_of_band_before,
            "out_of_band_after": self.out_of_band_after,
            "histogram_before": list(self.histogram_before),
            "histogram_after": (
                None if self.histogram_after is None else list(self.histogram_after)
            ),
            "rolled_back": self.rolled_back,
        }


@dataclass(frozen=True)
class RewireTrace:
    config: RewireConfig
    steps: tuple[RewireStep, ...]
    initial_out_of_band: int
    final_out_of_band: int

    def to_json_obj(self) -> dict:
        return {
            "config": self.config.to_json_obj(),
            "histogram_bins": HISTOGRAM_BINS,
            "initial_out_of_band": self.initial_out_of_band,
            "final_out_of_band": self.final_out_of_band,
            "steps": [s.to_json_obj() for s in self.steps],
        }


def kappa_histogram(profile: CurvatureProfile) -> tuple[int, ...]:
    """Edge counts in 12 quarter-width curvature bins spanning [-2, 1]."""
    counts = [0] * HISTOGRAM_BINS
    for r in profile.reports:
        # exact bin index; kappa = 1 lands in the closed last bin
        idx = min(int((r.kappa + 2) * 4), HISTOGRAM_BINS - 1)
        counts[idx] += 1
    return tuple(counts)


def out_of_band_count(profile: CurvatureProfile, cfg: RewireConfig) -> int:
    return sum(1 for r in profile.reports if r.kappa < cfg.tau_neg or r.kappa > cfg.tau_pos)


def _connected_without(g: Graph, drop: tuple[int, int]) -> bool:
    if g.vertex_count <= 1:
        return True
    seen = [False] * g.vertex_count
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for w in g.adjacency[u]:
            if (u, w) in (drop, drop[::-1]):
                continue
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return all(seen)


def _support_candidate(g: Graph, u: int, v: int) -> tuple[int, int] | None:
    """Best absent edge bridging the exclusive neighborhoods of (u, v).

    Candidates run p in N_u \\ N~_v against q in N_v \\ N~_u; the winner
    minimizes the max per-vertex edge count of the enlarged connecting
    set, then breaks ties lexicographically. None when no pair is absent.
    """
    nb_u, nt_u = neighborhoods(g, u)
    nb_v, nt_v = neighborhoods(g, v)
    left = sorted(nb_u - nt_v)
    right = sorted(nb_v - nt_u)
    if not left or not right:
        return None
    base: dict[int, int] = {}
    for (a, b) in bottleneck_sets(g, u, v).s_statement:
        base[a] = base.get(a, 0) + 1
        if b != a:
            base[b] = base.get(b, 0) + 1
    best = None
    for p in left:
        for q in right:
            if g.has_edge(p, q):
                continue
            edge = (min(p, q), max(p, q))
            loaded = max(base.get(p, 0) + 1, base.get(q, 0) + 1, max(base.values(), default=0))
            key = (loaded, edge)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


def rewire_step(
    g: Graph, profile: CurvatureProfile, cfg: RewireConfig
) -> tuple[Graph, RewireStep]:
    """Apply one round of removals and additions guided by the profile.

    Raises NoActionPossible when no edge crosses either threshold. The
    returned graph may equal the input when every action was skipped
    (connectivity guard, no absent support pair).
    """
    too_pos = [r for r in profile.reports if r.kappa > cfg.tau_pos]
    too_neg = [r for r in profile.reports if r.kappa < cfg.tau_neg]
    if not too_pos and not too_neg:
        raise NoActionPossible(
            f"all edge curvatures lie inside [{cfg.tau_neg}, {cfg.tau_pos}]"
        )
    before = RewireStep(
        added=(),
        removed=(),
        out_of_band_before=len(too_pos) + len(too_neg),
        histogram_before=kappa_histogram(profile),
    )

    work = from_edges(g.vertex_count, g.edges)
    removed: list[tuple[int, int]] = []
    too_pos.sort(key=lambda r: (-r.kappa, r.edge))
    for r in too_pos[: cfg.removals_per_step]:
        if cfg.preserve_connectivity and not _connected_without(work, r.edge):
            continue
        kept = [e for e in work.edges if e != r.edge]
        try:
            work = from_edges(work.vertex_count, kept)
        except GraphInvalid:
            # the graph type itself requires connectivity, so a
            # disconnecting removal is skipped even with the guard off
            continue
        removed.append(r.edge)

    added: list[tuple[int, int]] = []
    too_neg.sort(key=lambda r: (r.kappa, r.edge))
    for r in too_neg[: cfg.additions_per_step]:
        u, v = r.edge
        if not work.has_edge(u, v):
            continue
        candidate = _support_candidate(work, u, v)
        if candidate is None:
            continue
        work = from_edges(work.vertex_count, list(work.edges) + [candidate])
        added.append(candidate)

    record = dataclasses.replace(before, added=tuple(added), removed=tuple(removed))
    return work, record


def rewire_loop(g: Graph, cfg: RewireConfig) -> tuple[Graph, RewireTrace]:
    """Iterate rewire_step with fresh curvature until nothing changes.

    Stops at max_iterations, when no edge is out of band, when a step
    cannot act, or after reverting a step that raised the out-of-band
    count (that step is recorded with rolled_back set).
    """
    profile = curvature_profile(g)
    initial = out_of_band_count(profile, cfg)
    steps: list[RewireStep] = []
    current, current_profile, current_oob = g, profile, initial
    for _ in range(cfg.max_iterations):
        try:
            candidate, record = rewire_step(current, current_profile, cfg)
        except NoActionPossible:
            break
        if candidate.edges == current.edges:
            break
        new_profile = curvature_profile(candidate)
        new_oob = out_of_band_count(new_profile, cfg)
        record = dataclasses.replace(
            record,
            out_of_band_after=new_oob,
            histogram_after=kappa_histogram(new_profile),
        )
        if new_oob > current_oob:
            steps.append(dataclasses.replace(record, rolled_back=True))
            break
        steps.append(record)
        current, current_profile, current_oob = candidate, new_profile, new_oob
    return current, RewireTrace(
        config=cfg,
        steps=tuple(steps),
        initial_out_of_band=initial,
        final_out_of_band=current_oob,
    )
