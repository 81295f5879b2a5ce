"""Product quadrature over two chart domains, from 2-D (l=0) up to 6-D (l=1) and beyond.

Tensor grids pair a uniform half-step-offset rule on periodic coordinates
(spectrally accurate for smooth periodic integrands) with Gauss-Legendre
nodes on non-periodic box coordinates.  Both rules keep every node strictly
inside the open chart, so tan-compactified and polar-angle singularities are
never touched.  Monte Carlo sampling uses a seeded generator and a fixed
chunk size, making every estimate bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .cycles import ChartDomain, ParamCycle
from .errors import InputError

_MC_CHUNK = 1 << 18
_GENERIC_CHUNK = 1 << 16


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution, method and convergence targets for the double cycle integral."""

    method: str = "tensor_trapezoid"
    points_per_dim: int = 64
    sample_budget: int = 1_000_000
    refinement_levels: int = 3
    target_rel_error: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("tensor_trapezoid", "monte_carlo"):
            raise InputError(f"unknown quadrature method {self.method!r}")
        if self.points_per_dim < 4:
            raise InputError("points_per_dim must be >= 4")
        if self.sample_budget < 10_000:
            raise InputError("sample_budget must be >= 10000")
        if not 1 <= self.refinement_levels <= 8:
            raise InputError("refinement_levels must be in 1..8")
        if not 0.0 < self.target_rel_error < 0.5:
            raise InputError("target_rel_error must lie in (0, 0.5)")

    @staticmethod
    def default_for(l: int) -> "QuadratureSpec":
        """Desk-scale defaults per ambient dimension."""
        points = {0: 256, 1: 24}.get(l, 6)
        return QuadratureSpec(points_per_dim=points)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "points_per_dim": self.points_per_dim,
            "sample_budget": self.sample_budget,
            "refinement_levels": self.refinement_levels,
            "target_rel_error": self.target_rel_error,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict, l: int = 0) -> "QuadratureSpec":
        base = QuadratureSpec.default_for(l)
        if obj is None:
            return base
        if not isinstance(obj, dict):
            raise InputError("quadrature spec must be a JSON object")
        known = {f: obj.get(f, getattr(base, f)) for f in
                 ("method", "points_per_dim", "sample_budget",
                  "refinement_levels", "target_rel_error", "seed")}
        unknown = set(obj) - set(known)
        if unknown:
            raise InputError(f"unknown quadrature fields: {sorted(unknown)}")
        return QuadratureSpec(**known)


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error": self.error_estimate,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


@lru_cache(maxsize=32)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def chart_grid(domain: ChartDomain, points_per_dim: int):
    """Tensor nodes (m, d) and weights (m,) for one chart domain."""
    axes_x = []
    axes_w = []
    for lo, hi, per in zip(domain.lower, domain.upper, domain.periodic):
        if per:
            h = (hi - lo) / points_per_dim
            axes_x.append(lo + (np.arange(points_per_dim) + 0.5) * h)
            axes_w.append(np.full(points_per_dim, h))
        else:
            xg, wg = _leggauss(points_per_dim)
            axes_x.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * xg)
            axes_w.append(0.5 * (hi - lo) * wg)
    xs = np.meshgrid(*axes_x, indexing="ij")
    ws = np.meshgrid(*axes_w, indexing="ij")
    nodes = np.stack([x.ravel() for x in xs], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in ws], axis=0), axis=0)
    return np.ascontiguousarray(nodes), np.ascontiguousarray(weights)


def _level_resolutions(spec: QuadratureSpec):
    res = sorted({max(4, spec.points_per_dim >> j) for j in range(spec.refinement_levels)})
    return res


def _tensor_level(integrand, dom1, dom2, points):
    nodes1, w1 = chart_grid(dom1, points)
    nodes2, w2 = chart_grid(dom2, points)
    if hasattr(integrand, "grid_reduce"):
        return integrand.grid_reduce(nodes1, w1, nodes2, w2)
    m1 = nodes1.shape[0]
    m2 = nodes2.shape[0]
    rows_per_block = max(1, _GENERIC_CHUNK // m2)
    sums = []
    for a0 in range(0, m1, rows_per_block):
        a1 = min(a0 + rows_per_block, m1)
        s_block = np.repeat(nodes1[a0:a1], m2, axis=0)
        t_block = np.tile(nodes2, (a1 - a0, 1))
        vals = np.asarray(integrand(s_block, t_block), dtype=np.float64)
        sums.append(float(vals @ np.outer(w1[a0:a1], w2).ravel()))
    return math.fsum(sums), m1 * m2


def _finish(value, error, evaluations, spec) -> IntegralEstimate:
    converged = error <= spec.target_rel_error * max(abs(value), 1e-3)
    return IntegralEstimate(value, error, evaluations, converged)


def integrate_product(integrand, dom1: ChartDomain, dom2: ChartDomain,
                      spec: QuadratureSpec) -> IntegralEstimate:
    """Integrate a pure pairwise integrand over the product of two chart domains.

    The integrand is either a vectorized callable f(S, T) -> values on paired
    parameter batches, or an object additionally exposing grid_reduce(...)
    for fused product-grid evaluation (the hot path for linking kernels).
    The tensor method estimates its error by comparing consecutive grid
    refinements; Monte Carlo reports the standard error of the mean.  A
    budget that runs out before the target is met yields converged=False
    rather than an exception.
    """
    if spec.method == "monte_carlo":
        return _monte_carlo(integrand, dom1, dom2, spec)
    values = []
    evaluations = 0
    for points in _level_resolutions(spec):
        value, evals = _tensor_level(integrand, dom1, dom2, points)
        values.append(value)
        evaluations += evals
    error = abs(values[-1] - values[-2]) if len(values) > 1 else math.inf
    return _finish(values[-1], error, evaluations, spec)


def _monte_carlo(integrand, dom1, dom2, spec) -> IntegralEstimate:
    rng = np.random.default_rng(spec.seed)
    lo1, hi1 = np.asarray(dom1.lower), np.asarray(dom1.upper)
    lo2, hi2 = np.asarray(dom2.lower), np.asarray(dom2.upper)
    volume = dom1.volume * dom2.volume
    total = []
    total_sq = []
    remaining = spec.sample_budget
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        remaining -= m
        s = rng.uniform(lo1, hi1, size=(m, dom1.dim))
        t = rng.uniform(lo2, hi2, size=(m, dom2.dim))
        vals = np.asarray(integrand(s, t), dtype=np.float64)
        total.append(float(np.sum(vals)))
        total_sq.append(float(vals @ vals))
    n = spec.sample_budget
    mean = math.fsum(total) / n
    var = max(0.0, (math.fsum(total_sq) - n * mean * mean) / (n - 1))
    value = volume * mean
    error = volume * math.sqrt(var / n)
    return _finish(value, error, n, spec)


# ---------------------------------------------------------------------------
# cycle separation probe
# ---------------------------------------------------------------------------

def _probe_nodes(domain: ChartDomain, total_points: int) -> np.ndarray:
    per_dim = max(3, int(round(total_points ** (1.0 / domain.dim))))
    axes = [lo + (np.arange(per_dim) + 0.5) * (hi - lo) / per_dim
            for lo, hi in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([x.ravel() for x in mesh], axis=1)


def _sample_cycle(c: ParamCycle, total_points: int):
    params = []
    points = []
    for i, chart in enumerate(c.charts):
        p = _probe_nodes(chart.domain, total_points)
        params.append((i, p))
        points.append(c.point(p, chart=i))
    return params, np.concatenate(points, axis=0)


def _pair_probe(c1: ParamCycle, c2: ParamCycle, probe_points: int):
    params1, x1 = _sample_cycle(c1, probe_points)
    params2, x2 = _sample_cycle(c2, probe_points)
    best = math.inf
    best_idx = (0, 0)
    d_all = []
    block = max(1, _GENERIC_CHUNK // max(1, x2.shape[0]))
    for a0 in range(0, x1.shape[0], block):
        a1 = min(a0 + block, x1.shape[0])
        diff = x1[a0:a1, None, :] - x2[None, :, :]
        dist = np.sqrt(np.einsum("abn,abn->ab", diff, diff))
        d_all.append(dist.ravel())
        i = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[i] < best:
            best = float(dist[i])
            best_idx = (a0 + i[0], i[1])
    median = float(np.median(np.concatenate(d_all)))
    flat1 = np.concatenate([p for _, p in params1], axis=0)
    flat2 = np.concatenate([p for _, p in params2], axis=0)
    return best, median, flat1[best_idx[0]], flat2[best_idx[1]]


def _refined_separation(c1: ParamCycle, c2: ParamCycle, probe_points: int):
    """(min distance after local descent, median probe distance)."""
    best, median, s0, t0 = _pair_probe(c1, c2, probe_points)
    d1 = len(s0)

    def objective(z):
        diff = (c1.point(z[:d1]) - c2.point(z[d1:]))[0]
        return float(diff @ diff)

    res = minimize(objective, np.concatenate([s0, t0]), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
    refined = math.inf if math.isnan(res.fun) else math.sqrt(max(res.fun, 0.0))
    return min(best, refined), median


def min_pair_distance(c1: ParamCycle, c2: ParamCycle, probe_points: int = 1024) -> float:
    """Lower-bound estimate of min |x(s) - y(t)| by dense sampling plus local descent.

    The squared distance is smooth and periodic through every chart seam
    (tan charts revisit the same affine points with period pi), so the local
    refinement runs unconstrained from the best sampled pair.
    """
    if probe_points < 100:
        raise InputError("probe_points must be >= 100")
    return _refined_separation(c1, c2, probe_points)[0]
