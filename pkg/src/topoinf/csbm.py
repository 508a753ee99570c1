"""Contextual stochastic block model: SBM topology plus noisy center features.

Nodes split into c balanced communities (round-robin assignment, then a
seeded shuffle). Each unordered pair is an edge independently with
probability p inside a community and q across communities (q > p, the
heterophilic regime, is allowed). Features are X = F + N where row v of F is
its community's center vector and N is i.i.d. Gaussian noise with standard
deviation sigma.

The two runnable checks cover what a nonnegative, sum-one filter does to
such data after row normalization: the largest distance from a node to any
node of a different community never grows, and the total noise variance
never grows (equivalently ||RowNorm(f)||_F^2 <= n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filters import apply_filter, as_filter
from .graphs import Graph, LabelData, normalized_adjacency

__all__ = [
    "CsbmParams",
    "CsbmSample",
    "generate_csbm",
    "cora_like_params",
    "check_distance_contraction",
    "check_variance_reduction",
    "ContractionReport",
    "VarianceReport",
]

MU_SCHEMES = ("orthogonal_scaled", "gaussian_random")


@dataclass(frozen=True)
class CsbmParams:
    n: int
    c: int
    p: float
    q: float
    d: int
    sigma: float
    mu_scheme: str = "orthogonal_scaled"
    mu_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.c < 2 or self.n < self.c:
            raise ValueError("need n >= c >= 2")
        for name in ("p", "q"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.d < 1:
            raise ValueError("feature dimension must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.mu_scheme not in MU_SCHEMES:
            raise ValueError(f"mu_scheme must be one of {MU_SCHEMES}")
        if self.mu_scheme == "orthogonal_scaled" and self.d < self.c:
            raise ValueError("orthogonal_scaled centers need d >= c")

    def to_dict(self) -> dict:
        return {
            "n": self.n, "c": self.c, "p": self.p, "q": self.q, "d": self.d,
            "sigma": self.sigma, "mu_scheme": self.mu_scheme,
            "mu_scale": self.mu_scale, "seed": self.seed,
        }


@dataclass
class CsbmSample:
    graph: Graph
    labels: LabelData
    mu: np.ndarray        # c x d community centers
    F: np.ndarray         # n x d, row v equals its community center
    X: np.ndarray         # F + noise
    params: CsbmParams


def _community_centers(params: CsbmParams, rng) -> np.ndarray:
    if params.mu_scheme == "orthogonal_scaled":
        mu = np.zeros((params.c, params.d))
        mu[np.arange(params.c), np.arange(params.c)] = params.mu_scale
        return mu
    return params.mu_scale * rng.normal(size=(params.c, params.d))


def generate_csbm(params: CsbmParams) -> CsbmSample:
    """Fully seeded draw. RNG consumption order is fixed (communities, edges
    row by row, centers, noise), so samples are bit-reproducible."""
    rng = np.random.default_rng(params.seed)
    n, c = params.n, params.c

    communities = np.arange(n, dtype=np.int64) % c   # balanced within +/- 1
    rng.shuffle(communities)

    edges = []
    for i in range(n - 1):
        draws = rng.random(n - 1 - i)
        js = np.arange(i + 1, n)
        prob = np.where(communities[js] == communities[i], params.p, params.q)
        hit = js[draws < prob]
        if hit.size:
            edges.append(np.column_stack([np.full(hit.size, i, dtype=np.int64), hit]))
    edge_arr = np.concatenate(edges) if edges else np.empty((0, 2), dtype=np.int64)
    graph = Graph.from_edges(n, edge_arr)

    mu = _community_centers(params, rng)
    F = mu[communities]
    noise = rng.normal(size=(n, params.d))
    X = F + params.sigma * noise

    labels = LabelData(c, communities, mask=np.ones(n, dtype=bool))
    return CsbmSample(graph=graph, labels=labels, mu=mu, F=F, X=X, params=params)


def cora_like_params(mix=(0.9, 0.1), sigma: float = 1.0, seed: int = 0) -> CsbmParams:
    """Parameter bundle matching a citation-graph profile: n=2708 nodes,
    7 classes, 1433 feature dimensions, ~5278 expected edges. The (p, q) pair
    keeps the requested intra/inter mix ratio, scaled so the expected edge
    count hits the target."""
    n, c, d, m_target = 2708, 7, 1433, 5278
    a, b = float(mix[0]), float(mix[1])
    if a <= 0 or b < 0:
        raise ValueError("mix must be positive (intra) and non-negative (inter)")
    sizes = np.full(c, n // c, dtype=np.int64)
    sizes[: n % c] += 1
    intra_pairs = int((sizes * (sizes - 1) // 2).sum())
    inter_pairs = n * (n - 1) // 2 - intra_pairs
    t = m_target / (a * intra_pairs + b * inter_pairs)
    return CsbmParams(n=n, c=c, p=t * a, q=t * b, d=d, sigma=sigma, seed=seed)


@dataclass
class ContractionReport:
    """Per-node farthest-different-community distances before/after filtering."""

    before: np.ndarray
    after: np.ndarray
    violations: np.ndarray     # node ids where after > before + tol
    vacuous: bool = False
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.vacuous or self.violations.size == 0


def _require_low_pass(pf):
    pf = as_filter(pf)
    if not pf.nonnegative or abs(math.fsum(pf.gamma) - 1.0) > 1e-9:
        raise ValueError(
            "check requires nonnegative coefficients summing to 1 "
            f"(got {pf.gamma})")
    return pf


def _row_normalized_apply(pf, adj, m: np.ndarray) -> np.ndarray:
    stacked = np.hstack([m, np.ones((m.shape[0], 1))])
    out = apply_filter(pf, adj, stacked)
    return out[:, :-1] / out[:, -1:]


def check_distance_contraction(sample: CsbmSample, pf) -> ContractionReport:
    """For every node, the distance to its farthest different-community node
    must not grow when the row-normalized filter is applied to the clean
    feature matrix."""
    pf = _require_low_pass(pf)
    adj = normalized_adjacency(sample.graph)
    comm = sample.labels.labels
    diff_mask = comm[:, None] != comm[None, :]
    if not diff_mask.any():
        empty = np.empty(0)
        return ContractionReport(before=empty, after=empty,
                                 violations=np.empty(0, dtype=np.int64), vacuous=True)

    filtered = _row_normalized_apply(pf, adj, sample.F)

    def farthest(mat):
        sq = np.sum(mat ** 2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (mat @ mat.T)
        np.maximum(d2, 0.0, out=d2)
        d2[~diff_mask] = -1.0
        return np.sqrt(np.max(d2, axis=1))

    before = farthest(sample.F)
    after = farthest(filtered)
    tol = 1e-9
    violations = np.flatnonzero(after > before + tol)
    return ContractionReport(before=before, after=after, violations=violations, tol=tol)


@dataclass
class VarianceReport:
    """Deterministic operator bound plus a Monte Carlo noise comparison."""

    frobenius_sq: float
    n: int
    mean_noise_before: float
    mean_noise_after: float
    trials: int
    slack: float

    @property
    def deterministic_ok(self) -> bool:
        return self.frobenius_sq <= self.n + 1e-9

    @property
    def empirical_ok(self) -> bool:
        return self.mean_noise_after <= self.mean_noise_before * (1.0 + self.slack)

    @property
    def ok(self) -> bool:
        return self.deterministic_ok and self.empirical_ok


def check_variance_reduction(params: CsbmParams, pf, trials: int,
                             seed: int | None = None) -> VarianceReport:
    """Checks that filtering cannot inflate noise: the row-normalized
    operator has squared Frobenius norm at most n, and over fresh noise draws
    the mean filtered noise energy stays below the raw energy (up to
    3/sqrt(trials) Monte Carlo slack)."""
    pf = _require_low_pass(pf)
    if trials < 1:
        raise ValueError("need at least one trial")
    sample = generate_csbm(params)
    adj = normalized_adjacency(sample.graph)
    n = params.n

    operator = _row_normalized_apply(pf, adj, np.eye(n))
    frob_sq = float(np.sum(operator ** 2))

    rng = np.random.default_rng(params.seed + 1 if seed is None else seed)
    before = np.empty(trials)
    after = np.empty(trials)
    for t in range(trials):
        noise = params.sigma * rng.normal(size=(n, params.d))
        before[t] = np.sum(noise ** 2)
        after[t] = np.sum((operator @ noise) ** 2)
    slack = 3.0 / math.sqrt(trials)
    return VarianceReport(frobenius_sq=frob_sq, n=n,
                          mean_noise_before=float(before.mean()),
                          mean_noise_after=float(after.mean()),
                          trials=trials, slack=slack)


def write_features(x: np.ndarray) -> str:
    """Dense feature rows, whitespace separated, one node per line."""
    lines = [" ".join(f"{val:.12g}" for val in row) for row in x]
    return "\n".join(lines) + "\n"
