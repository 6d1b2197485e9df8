"""Message-passing forward simulation, linear-case Jacobians, influence
distributions, and the Jacobian-ratio quantities.

Layer rule: X^{k+1}_u = phi_k( agg_{p in N~_u} psi_k(X^k_p) ), aggregation
always over the extended neighborhood (self included); mean divides by
deg(u)+1. Features are float64; walk counts and ratio arithmetic are exact
(ints and Fractions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curvature import NotAnEdge, bottleneck_sets, ricci_curvature
from .graphs import Graph, neighborhoods


class DimensionMismatch(Exception):
    pass


class NotLinear(Exception):
    pass


class DegenerateNormalizer(Exception):
    pass


class SpecError(Exception):
    """Malformed MpnnSpec JSON."""


# safety factor applied wherever a numerically computed operator norm is
# used on the bound side of an inequality
_NORM_SAFETY = 1 + 1e-9


@dataclass(frozen=True)
class Update:
    """Update map phi with a certified Lipschitz constant.

    kinds: identity; linear (matrix); clamp to [-bound, bound]; abs;
    leaky (x for x>0 else slope*x, |slope| <= 1); composition (parts applied
    left to right).
    """

    kind: str
    matrix: np.ndarray | None = None
    bound: float | None = None
    slope: float | None = None
    parts: tuple["Update", ...] = ()

    def apply(self, y: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return y
        if self.kind == "linear":
            return y @ self.matrix.T
        if self.kind == "clamp":
            return np.clip(y, -self.bound, self.bound)
        if self.kind == "abs":
            return np.abs(y)
        if self.kind == "leaky":
            return np.where(y > 0, y, self.slope * y)
        if self.kind == "composition":
            for part in self.parts:
                y = part.apply(y)
            return y
        raise SpecError(f"unknown update kind {self.kind!r}")

    def lipschitz(self) -> float:
        if self.kind == "identity":
            return 1.0
        if self.kind == "linear":
            return float(np.linalg.norm(self.matrix, 2)) * _NORM_SAFETY
        if self.kind in ("clamp", "abs"):
            return 1.0
        if self.kind == "leaky":
            return max(1.0, abs(self.slope))
        if self.kind == "composition":
            out = 1.0
            for part in self.parts:
                out *= part.lipschitz()
            return out
        raise SpecError(f"unknown update kind {self.kind!r}")

    def linear_matrix(self, dim: int) -> np.ndarray | None:
        """The Jacobian matrix when the map is linear, else None."""
        if self.kind == "identity":
            return np.eye(dim)
        if self.kind == "linear":
            return np.array(self.matrix, dtype=float)
        if self.kind == "composition":
            acc = np.eye(dim)
            for part in self.parts:
                m = part.linear_matrix(acc.shape[0])
                if m is None:
                    return None
                acc = m @ acc
            return acc
        return None

    def out_dim(self, d_in: int) -> int:
        if self.kind == "linear":
            if self.matrix.shape[1] != d_in:
                raise DimensionMismatch(
                    f"update matrix expects {self.matrix.shape[1]} channels, got {d_in}"
                )
            return self.matrix.shape[0]
        if self.kind == "composition":
            for part in self.parts:
                d_in = part.out_dim(d_in)
        return d_in


@dataclass(frozen=True)
class LayerSpec:
    aggregator: str  # "sum" | "mean"
    message: np.ndarray  # psi as a (d_out, d_in) matrix
    update: Update

    def operator_bound(self) -> float:
        """Certified M with |psi(x)| <= M |x| (spectral norm, bound side)."""
        return float(np.linalg.norm(self.message, 2)) * _NORM_SAFETY


@dataclass(frozen=True)
class MpnnSpec:
    layers: tuple[LayerSpec, ...]

    def is_linear(self) -> bool:
        return all(
            layer.update.linear_matrix(layer.message.shape[0]) is not None
            for layer in self.layers
        )


def identity_spec(channels: int, layers: int, aggregator: str) -> MpnnSpec:
    """Pure message passing: identity psi and phi at every layer."""
    eye = np.eye(channels)
    layer = LayerSpec(aggregator=aggregator, message=eye, update=Update("identity"))
    return MpnnSpec(layers=(layer,) * layers)


def _parse_update(obj: dict) -> Update:
    kind = obj.get("kind")
    if kind == "identity":
        return Update("identity")
    if kind == "linear":
        if "matrix" not in obj:
            raise SpecError('linear update needs a "matrix"')
        return Update("linear", matrix=np.array(obj["matrix"], dtype=float))
    if kind == "clamp":
        if "bound" not in obj or obj["bound"] <= 0:
            raise SpecError('clamp update needs a positive "bound"')
        return Update("clamp", bound=float(obj["bound"]))
    if kind == "abs":
        return Update("abs")
    if kind == "leaky":
        slope = float(obj.get("slope", 0.01))
        if abs(slope) > 1:
            raise SpecError("leaky slope must have magnitude <= 1")
        return Update("leaky", slope=slope)
    if kind == "composition":
        parts = obj.get("parts")
        if not parts:
            raise SpecError('composition update needs non-empty "parts"')
        return Update("composition", parts=tuple(_parse_update(p) for p in parts))
    raise SpecError(f"unknown update kind {kind!r}")


def parse_spec(text: str) -> MpnnSpec:
    """Parse the layer-spec JSON: {"layers": [{"aggregator", "message", "update"}]}."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"invalid JSON: {e}") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("layers"), list):
        raise SpecError('spec JSON must be an object with a "layers" list')
    layers = []
    for i, lo in enumerate(obj["layers"]):
        agg = lo.get("aggregator")
        if agg not in ("sum", "mean"):
            raise SpecError(f'layer {i}: aggregator must be "sum" or "mean"')
        if "message" not in lo:
            raise SpecError(f'layer {i}: missing "message" matrix')
        message = np.array(lo["message"], dtype=float)
        if message.ndim != 2:
            raise SpecError(f"layer {i}: message must be a 2-d matrix")
        update = _parse_update(lo.get("update", {"kind": "identity"}))
        layers.append(LayerSpec(aggregator=agg, message=message, update=update))
    return MpnnSpec(layers=tuple(layers))


def _check_features(g: Graph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != g.vertex_count:
        raise DimensionMismatch(
            f"feature matrix must be ({g.vertex_count}, d), got {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    return x


def forward(g: Graph, x: np.ndarray, spec: MpnnSpec) -> list[np.ndarray]:
    """Run every layer; returns [X^0, X^1, ..., X^K]."""
    x = _check_features(g, x)
    out = [x]
    for layer in spec.layers:
        if layer.message.shape[1] != x.shape[1]:
            raise DimensionMismatch(
                f"message matrix expects {layer.message.shape[1]} channels, "
                f"got {x.shape[1]}"
            )
        msgs = x @ layer.message.T
        layer.update.out_dim(msgs.shape[1])
        agg = np.empty((g.vertex_count, msgs.shape[1]))
        for u in range(g.vertex_count):
            block = msgs[list(g.adjacency[u]) + [u]]
            s = block.sum(axis=0)
            agg[u] = s / (g.degree(u) + 1) if layer.aggregator == "mean" else s
        x = layer.update.apply(agg)
        out.append(x)
    return out


def dirichlet_energy(g: Graph, x: np.ndarray) -> float:
    """Sum over edges of the Euclidean gap |X_u - X_v|."""
    return float(
        sum(np.linalg.norm(x[u] - x[v]) for u, v in g.edges)
    )


def smoothing_demo(
    g: Graph, x: np.ndarray, iterations: int
) -> tuple[list[np.ndarray], list[float]]:
    """Pure averaging (mean aggregation, identity maps) for a number of steps.

    Returns (trajectory of length iterations+1, Dirichlet energy per step).
    """
    x = _check_features(g, x)
    spec = identity_spec(x.shape[1], iterations, "mean")
    traj = forward(g, x, spec)
    return traj, [dirichlet_energy(g, xs) for xs in traj]


def demo_instance() -> tuple[Graph, np.ndarray]:
    """The 6-vertex demo: an octahedron whose vertices carry four rough color
    classes (red / two green / two blue / gray)."""
    from .graphs import generate

    g = generate("cocktail_party", m=3)
    x = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.5],
        ]
    )
    return g, x


# ---------------------------------------------------------------------------
# Linear-case structure: walk counts, Jacobians, influence, alpha/beta.


def walk_counts(g: Graph, depth: int) -> list[list[int]]:
    """((A+I)^depth) with exact integer entries: counts of self-loop-augmented
    walks between vertex pairs."""
    n = g.vertex_count
    base = [[0] * n for _ in range(n)]
    for u in range(n):
        base[u][u] = 1
        for w in g.adjacency[u]:
            base[u][w] = 1
    result = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(depth):
        result = [
            [sum(row[t] * base[t][j] for t in range(n)) for j in range(n)]
            for row in result
        ]
    return result


@dataclass(frozen=True)
class JacobianStack:
    depth: int
    walk_counts: tuple[tuple[int, ...], ...]
    layer_product: np.ndarray  # ordered product of per-layer Jacobians

    def block(self, u: int, w: int) -> np.ndarray:
        return self.walk_counts[u][w] * self.layer_product


def _require_linear_sum(spec: MpnnSpec, depth: int) -> list[np.ndarray]:
    if depth > len(spec.layers):
        raise SpecError(f"depth {depth} exceeds the {len(spec.layers)}-layer spec")
    mats = []
    for i, layer in enumerate(spec.layers[:depth]):
        if layer.aggregator != "sum":
            raise NotLinear(f"layer {i} aggregates by {layer.aggregator!r}, not sum")
        phi = layer.update.linear_matrix(layer.message.shape[0])
        if phi is None:
            raise NotLinear(f"layer {i} has a nonlinear update")
        mats.append(phi @ layer.message)
    return mats


def linear_jacobians(g: Graph, spec: MpnnSpec, depth: int) -> JacobianStack:
    """For a linear sum-aggregation spec the Jacobian of X^depth w.r.t. X^0
    factors exactly: block(u, w) = walk_counts[u][w] * (M_{depth-1} ... M_0)
    with M_k = J_phi_k @ J_psi_k."""
    mats = _require_linear_sum(spec, depth)
    product = np.eye(spec.layers[0].message.shape[1] if spec.layers else 1)
    for m in mats:
        product = m @ product
    counts = walk_counts(g, depth)
    return JacobianStack(
        depth=depth,
        walk_counts=tuple(tuple(row) for row in counts),
        layer_product=product,
    )


def influence_distribution(
    g: Graph, spec: MpnnSpec, depth: int, u: int
) -> list[Fraction]:
    """I_u(v) = entrywise sum of the (u,v) Jacobian block over the total across
    all source vertices. For the factored linear case the per-block matrix sum
    cancels, leaving exact walk-count ratios."""
    stack = linear_jacobians(g, spec, depth)
    t = float(stack.layer_product.sum())
    if t == 0.0:
        raise DegenerateNormalizer("layer product entries sum to zero")
    row = stack.walk_counts[u]
    total = sum(row)
    if total == 0:
        raise DegenerateNormalizer("all walk counts are zero")
    return [Fraction(c, total) for c in row]


@dataclass(frozen=True)
class AlphaBeta:
    """Realized Jacobian-ratio maxima for one edge, with their bounds.

    alpha pairs vertex u with senders q near v; beta symmetrically. The
    *_proof_rhs bounds use the denominator over N~ of the receiving vertex
    (the pairing the derivation actually supports); the *_statement_rhs
    values swap in the other endpoint's denominator and are reported without
    being asserted.
    """

    alpha: Fraction
    beta: Fraction
    alpha_structural_rhs: Fraction
    beta_structural_rhs: Fraction
    alpha_proof_rhs: Fraction
    beta_proof_rhs: Fraction
    alpha_statement_rhs: Fraction
    beta_statement_rhs: Fraction
    bound_ok: bool


def alpha_beta(g: Graph, spec: MpnnSpec, u: int, v: int, k: int = 0) -> AlphaBeta:
    """Jacobian mass ratios across the edge (u,v) two layers after layer k."""
    if not g.has_edge(u, v):
        raise NotAnEdge(f"({u},{v}) is not an edge")
    if len(spec.layers) < k + 2:
        raise SpecError(f"need at least {k + 2} layers, spec has {len(spec.layers)}")
    _require_linear_sum(spec, k + 2)

    counts2 = walk_counts(g, 2)
    row_u, row_v = counts2[u], counts2[v]
    denom_u, denom_v = sum(row_u), sum(row_v)
    _, nt_u = neighborhoods(g, u)
    _, nt_v = neighborhoods(g, v)

    alpha = max(Fraction(row_u[q], denom_u) for q in sorted(nt_v - {u}))
    beta = max(Fraction(row_v[p], denom_v) for p in sorted(nt_u - {v}))

    sets = bottleneck_sets(g, u, v)
    s_size = len(sets.s_statement)
    kappa = ricci_curvature(g, u, v)
    n = max(g.degree(u), g.degree(v))
    kappa_form = n * (kappa + 2) + 4

    alpha_structural = Fraction(s_size + 2, denom_u)
    beta_structural = Fraction(s_size + 2, denom_v)
    alpha_proof = kappa_form / (2 * denom_u)
    beta_proof = kappa_form / (2 * denom_v)
    alpha_statement = kappa_form / (2 * denom_v)
    beta_statement = kappa_form / (2 * denom_u)

    return AlphaBeta(
        alpha=alpha,
        beta=beta,
        alpha_structural_rhs=alpha_structural,
        beta_structural_rhs=beta_structural,
        alpha_proof_rhs=alpha_proof,
        beta_proof_rhs=beta_proof,
        alpha_statement_rhs=alpha_statement,
        beta_statement_rhs=beta_statement,
        bound_ok=(
            alpha <= alpha_structural
            and beta <= beta_structural
            and alpha <= alpha_proof
            and beta <= beta_proof
        ),
    )
