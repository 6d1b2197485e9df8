"""Graph representation, shortest-path distances, generators, and the test corpus.

Vertices are dense 0-based integers. Graphs are simple, undirected, and
connected; those invariants are enforced at construction time because the
curvature definitions downstream are meaningless without them.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field


class GraphError(Exception):
    """Base class for graph construction problems."""


class ParseError(GraphError):
    """Malformed edge-list or JSON input."""


class GraphInvalid(GraphError):
    """Structurally invalid graph (self-loop, duplicate edge, disconnected)."""


class Unsatisfiable(GraphError):
    """A random family could not produce a connected graph within its retry budget."""


UNREACHABLE = -1


@dataclass(frozen=True)
class Graph:
    """Immutable simple connected undirected graph.

    adjacency[u] is sorted ascending; edges are canonical (u < v, sorted
    lexicographically). id_map holds the original vertex labels when the
    input used sparse ids (id_map[i] = original label of vertex i), and is
    None for dense inputs.
    """

    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    id_map: tuple[int, ...] | None = field(default=None, compare=False)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adjacency[u]
        # adjacency lists are short at desk scale; binary search is not worth it
        return v in a

    def to_json_obj(self) -> dict:
        return {"n": self.vertex_count, "edges": [[u, v] for u, v in self.edges]}

    def to_edge_list_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)


def _build(vertex_count: int, edge_pairs, id_map=None) -> Graph:
    seen = set()
    adj: list[list[int]] = [[] for _ in range(vertex_count)]
    for u, v in edge_pairs:
        if u == v:
            raise GraphInvalid(f"self-loop at vertex {u}")
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise GraphInvalid(f"edge ({u},{v}) out of range for {vertex_count} vertices")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphInvalid(f"duplicate edge ({key[0]},{key[1]})")
        seen.add(key)
        adj[u].append(v)
        adj[v].append(u)
    g = Graph(
        vertex_count=vertex_count,
        adjacency=tuple(tuple(sorted(ns)) for ns in adj),
        edges=tuple(sorted(seen)),
        id_map=tuple(id_map) if id_map is not None else None,
    )
    _check_connected(g)
    return g


def _check_connected(g: Graph) -> None:
    if g.vertex_count == 0:
        raise GraphInvalid("empty graph")
    if g.vertex_count == 1:
        return
    dist = bfs_distances(g, 0).dist
    bad = [v for v in range(g.vertex_count) if dist[v] == UNREACHABLE]
    if bad:
        raise GraphInvalid(f"graph is disconnected ({len(bad)} vertices unreachable from 0)")


def from_edges(vertex_count: int, edge_pairs) -> Graph:
    """Build a validated Graph from explicit edge pairs over 0..vertex_count-1."""
    return _build(vertex_count, edge_pairs)


def parse_edge_list(text: str) -> Graph:
    """Parse whitespace-separated "u v" lines; '#' starts a comment line.

    Sparse vertex ids are compacted to 0..k-1 with the original labels kept
    in id_map for report emission.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id in {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex id in {line!r}")
        pairs.append((u, v))
    if not pairs:
        raise ParseError("no edges found")
    used = sorted({x for e in pairs for x in e})
    dense = used == list(range(len(used)))
    remap = {orig: i for i, orig in enumerate(used)}
    return _build(
        len(used),
        [(remap[u], remap[v]) for u, v in pairs],
        id_map=None if dense else used,
    )


def parse_graph_json(text: str) -> Graph:
    """Parse the JSON graph format {"n": int, "edges": [[u,v],...]}."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise ParseError('graph JSON must be an object with "n" and "edges"')
    n = obj["n"]
    if not isinstance(n, int) or n < 0:
        raise ParseError('"n" must be a non-negative integer')
    edges = obj["edges"]
    if not isinstance(edges, list):
        raise ParseError('"edges" must be a list of [u, v] pairs')
    pairs = []
    for e in edges:
        if (
            not isinstance(e, list)
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        ):
            raise ParseError(f"bad edge entry {e!r}")
        pairs.append((e[0], e[1]))
    return _build(n, pairs)


@dataclass(frozen=True)
class DistanceOracle:
    """Hop distances from one source vertex; UNREACHABLE marks cut-off vertices."""

    source: int
    dist: tuple[int, ...]


def bfs_distances(g: Graph, source: int, depth_limit: int | None = None) -> DistanceOracle:
    if not (0 <= source < g.vertex_count):
        raise ValueError(f"source {source} out of range")
    dist = [UNREACHABLE] * g.vertex_count
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier and (depth_limit is None or d < depth_limit):
        d += 1
        nxt = []
        for u in frontier:
            for w in g.adjacency[u]:
                if dist[w] == UNREACHABLE:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return DistanceOracle(source=source, dist=tuple(dist))


def neighborhoods(g: Graph, u: int) -> tuple[frozenset[int], frozenset[int]]:
    """Return (N_u, N_u with u itself added)."""
    n = frozenset(g.adjacency[u])
    return n, n | {u}


# ---------------------------------------------------------------------------
# Generators


def _complete(n: int) -> Graph:
    return _build(n, itertools.combinations(range(n), 2))


def _path(n: int) -> Graph:
    return _build(n, ((i, i + 1) for i in range(n - 1)))


def _cycle(n: int) -> Graph:
    if n < 3:
        raise GraphInvalid("cycle needs at least 3 vertices")
    return _build(n, [(i, (i + 1) % n) for i in range(n)])


def _star(n: int) -> Graph:
    # n leaves around center 0, n+1 vertices total
    if n < 1:
        raise GraphInvalid("star needs at least 1 leaf")
    return _build(n + 1, ((0, i) for i in range(1, n + 1)))


def _double_star(a: int, b: int) -> Graph:
    # centers 0 and 1 adjacent with degrees a and b: a-1 leaves on 0, b-1 on 1
    if a < 1 or b < 1:
        raise GraphInvalid("center degrees must be at least 1")
    edges = [(0, 1)]
    edges += [(0, 2 + i) for i in range(a - 1)]
    edges += [(1, 1 + a + i) for i in range(b - 1)]
    return _build(a + b, edges)


def _barbell(k: int) -> Graph:
    # two k-cliques {0..k-1} and {k..2k-1} joined by the bridge (k-1, k)
    if k < 3:
        raise GraphInvalid("barbell cliques need at least 3 vertices")
    edges = list(itertools.combinations(range(k), 2))
    edges += [(k + i, k + j) for i, j in itertools.combinations(range(k), 2)]
    edges.append((k - 1, k))
    return _build(2 * k, edges)


def _cocktail_party(m: int) -> Graph:
    # K_{2m} minus the perfect matching {(2i, 2i+1)}
    if m < 2:
        raise GraphInvalid("cocktail_party needs at least 2 pairs")
    edges = [
        (u, v)
        for u, v in itertools.combinations(range(2 * m), 2)
        if not (u // 2 == v // 2)
    ]
    return _build(2 * m, edges)


_ER_RETRY_BUDGET = 1000


def _erdos_renyi(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise GraphInvalid("p must lie in [0, 1]")
    for salt in range(_ER_RETRY_BUDGET):
        # string seeds hash stably (sha512) across processes and versions,
        # unlike tuple seeds which go through randomized hash()
        rng = random.Random(f"er:{n}:{seed}:{salt}")
        pairs = [e for e in itertools.combinations(range(n), 2) if rng.random() < p]
        try:
            return _build(n, pairs)
        except GraphInvalid:
            continue
    raise Unsatisfiable(
        f"erdos_renyi(n={n}, p={p}, seed={seed}) stayed disconnected after {_ER_RETRY_BUDGET} tries"
    )


def _random_tree(n: int, seed: int) -> Graph:
    if n < 2:
        raise GraphInvalid("random_tree needs at least 2 vertices")
    if n == 2:
        return _build(2, [(0, 1)])
    rng = random.Random(f"tree:{n}:{seed}")
    prufer = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    # standard Prufer decode: repeatedly attach the smallest leaf
    import heapq

    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for x in prufer:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return _build(n, edges)


def generate(family: str, **params) -> Graph:
    """Deterministic graph families for the corpus and the CLI.

    Families: complete(n), path(n), cycle(n), star(n), double_star(a, b),
    barbell(k), cocktail_party(m), erdos_renyi(n, p, seed), random_tree(n, seed).
    """
    try:
        if family == "complete":
            return _complete(params["n"])
        if family == "path":
            return _path(params["n"])
        if family == "cycle":
            return _cycle(params["n"])
        if family == "star":
            return _star(params["n"])
        if family == "double_star":
            return _double_star(params["a"], params["b"])
        if family == "barbell":
            return _barbell(params["k"])
        if family == "cocktail_party":
            return _cocktail_party(params["m"])
        if family == "erdos_renyi":
            return _erdos_renyi(params["n"], params["p"], params["seed"])
        if family == "random_tree":
            return _random_tree(params["n"], params["seed"])
    except KeyError as e:
        raise ValueError(f"family {family!r} is missing parameter {e.args[0]!r}") from None
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Test corpus


def enumerate_connected_five_vertex() -> list[Graph]:
    """All connected simple graphs on 5 vertices, one labeled representative
    per isomorphism class (there are 21)."""
    pair_list = list(itertools.combinations(range(5), 2))
    perms = list(itertools.permutations(range(5)))
    seen_masks: set[int] = set()
    reps: list[Graph] = []
    for mask in range(1 << 10):
        if mask in seen_masks:
            continue
        edges = [e for i, e in enumerate(pair_list) if mask >> i & 1]
        try:
            g = _build(5, edges)
        except GraphInvalid:
            continue
        reps.append(g)
        # mark the whole isomorphism orbit as seen
        index = {e: i for i, e in enumerate(pair_list)}
        for perm in perms:
            pm = 0
            for u, v in edges:
                a, b = perm[u], perm[v]
                pm |= 1 << index[(min(a, b), max(a, b))]
            seen_masks.add(pm)
    return reps


def corpus() -> list[tuple[str, Graph]]:
    """Deterministic named graph corpus used by the verification suite and tests."""
    out: list[tuple[str, Graph]] = []
    for n in range(3, 9):
        out.append((f"complete_{n}", _complete(n)))
    for n in (2, 3, 4, 5, 10, 20):
        out.append((f"path_{n}", _path(n)))
    for n in (3, 4, 5, 6, 10, 20):
        out.append((f"cycle_{n}", _cycle(n)))
    for n in (3, 4, 5, 10, 19):
        out.append((f"star_{n}", _star(n)))
    for a, b in ((3, 3), (2, 4), (5, 5)):
        out.append((f"double_star_{a}_{b}", _double_star(a, b)))
    for k in (3, 4, 5):
        out.append((f"barbell_{k}", _barbell(k)))
    for m in (2, 3, 4, 5):
        out.append((f"cocktail_party_{m}", _cocktail_party(m)))
    for seed in range(50):
        out.append((f"erdos_renyi_20_03_s{seed}", _erdos_renyi(20, 0.3, seed)))
    for n in (10, 20):
        for seed in range(3):
            out.append((f"random_tree_{n}_s{seed}", _random_tree(n, seed)))
    for i, g in enumerate(enumerate_connected_five_vertex()):
        out.append((f"five_vertex_{i:02d}", g))
    return out
