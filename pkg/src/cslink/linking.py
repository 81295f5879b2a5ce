"""Linking numbers, framed self-linking, boundary scans and the 3-D intersection oracle."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .cycles import Chart, ParamCycle
from .errors import (DegenerateCrossingError, FramingInstabilityError, InputError,
                     SingularityError)
from .kernel import PairKernelIntegrand, normalization
from .quadrature import (IntegralEstimate, QuadratureSpec, _refined_separation,
                         integrate_product)

DISTANCE_FLOOR = 1e-9
CLOSE_FRACTION = 0.05


@dataclass(frozen=True)
class LinkingResult:
    """Raw double integral, its nearest integer, and the rounding residual."""

    raw: IntegralEstimate
    rounded: int
    residual: float
    method: str = "tensor_trapezoid"

    def to_json(self) -> dict:
        return {
            "value": self.raw.value,
            "error": self.raw.error_estimate,
            "rounded": self.rounded,
            "residual": self.residual,
            "evaluations": self.raw.evaluations,
            "converged": self.raw.converged,
            "method": self.method,
        }


@dataclass(frozen=True)
class Framing:
    """Self-linking regularization: either the zero choice or a push-off field."""

    kind: str
    normal_field: Callable[[np.ndarray], np.ndarray] | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero_regularization", "pushoff"):
            raise InputError(f"unknown framing kind {self.kind!r}")
        if self.kind == "pushoff":
            if self.epsilon <= 0:
                raise InputError("pushoff framing needs epsilon > 0")
            if self.normal_field is None:
                raise InputError("pushoff framing needs a normal field")

    @staticmethod
    def zero() -> "Framing":
        return Framing("zero_regularization")

    @staticmethod
    def push(normal_field, epsilon: float) -> "Framing":
        return Framing("pushoff", normal_field, float(epsilon))


def _check_separation(c1: ParamCycle, c2: ParamCycle, probe_points: int = 900):
    """Raise on touching cycles; warn when the gap is small against typical separations."""
    dmin, median = _refined_separation(c1, c2, probe_points)
    if dmin <= DISTANCE_FLOOR:
        raise SingularityError(f"cycles intersect (min distance {dmin:.3e})")
    if dmin < CLOSE_FRACTION * median:
        warnings.warn(
            f"cycles are close (gap {dmin:.3g} vs typical separation {median:.3g}); "
            "consider raising the quadrature resolution",
            stacklevel=3,
        )
    return dmin


def _linking(c1: ParamCycle, c2: ParamCycle, kind: str, spec: QuadratureSpec | None,
             check_distance: bool = True) -> LinkingResult:
    if c1.dims.l != c2.dims.l:
        raise InputError(f"cycles must share l (got {c1.dims.l} and {c2.dims.l})")
    if spec is None:
        spec = QuadratureSpec.default_for(c1.dims.l)
    if check_distance:
        _check_separation(c1, c2)
    value = 0.0
    error = 0.0
    evaluations = 0
    converged = True
    for i, j in product(range(len(c1.charts)), range(len(c2.charts))):
        kern = PairKernelIntegrand(c1, c2, kind, chart1=i, chart2=j)
        est = integrate_product(kern, kern.domain1, kern.domain2, spec)
        value += est.value
        error += est.error_estimate
        evaluations += est.evaluations
        converged = converged and est.converged
    if kind == "gauss":
        prefactor = normalization(c1.dims.l).det_form_prefactor
        value *= prefactor
        error *= prefactor
    rounded = int(round(value))
    raw = IntegralEstimate(value, error, evaluations, converged)
    return LinkingResult(raw, rounded, abs(value - rounded), spec.method)


def gauss_linking(c1: ParamCycle, c2: ParamCycle,
                  spec: QuadratureSpec | None = None) -> LinkingResult:
    """Linking number as the normalized double integral of the solid-angle determinant."""
    return _linking(c1, c2, "gauss", spec)


def field_theory_linking(c1: ParamCycle, c2: ParamCycle,
                         spec: QuadratureSpec | None = None) -> LinkingResult:
    """Linking number through the gauge-propagator contraction: the independent route.

    Uses the minor-expansion kernel and its own normalization constant; must
    agree with gauss_linking to quadrature accuracy.
    """
    return _linking(c1, c2, "propagator", spec)


# ---------------------------------------------------------------------------
# framing / self-linking
# ---------------------------------------------------------------------------

_FD_STEP = 1e-6


def pushoff(c: ParamCycle, f: Framing) -> ParamCycle:
    """Displace a cycle along its framing field: s -> x(s) + epsilon * nu(s)."""
    if f.kind != "pushoff":
        raise InputError("pushoff requires a pushoff framing")
    _validate_normal_field(c, f)
    eps = f.epsilon
    nu = f.normal_field

    def wrap(chart: Chart) -> Chart:
        base_point, base_tangents = chart.point, chart.tangents
        lo = np.asarray(chart.domain.lower)
        hi = np.asarray(chart.domain.upper)
        per = np.asarray(chart.domain.periodic)

        def point(p):
            return base_point(p) + eps * np.asarray(nu(p), dtype=np.float64)

        def tangents(p):
            frames = base_tangents(p).copy()
            for j in range(p.shape[1]):
                h = np.full(p.shape[0], _FD_STEP)
                if not per[j]:
                    h = np.minimum(h, 0.5 * (p[:, j] - lo[j]))
                    h = np.minimum(h, 0.5 * (hi[j] - p[:, j]))
                plus = p.copy()
                minus = p.copy()
                plus[:, j] += h
                minus[:, j] -= h
                dnu = (np.asarray(nu(plus)) - np.asarray(nu(minus))) / (2.0 * h)[:, None]
                frames[:, :, j] += eps * dnu
            return frames

        return Chart(chart.domain, point, tangents)

    return replace(c, charts=tuple(wrap(ch) for ch in c.charts),
                   label=c.label + f"+pushoff({eps:g})")


def _validate_normal_field(c: ParamCycle, f: Framing, n_samples: int = 160):
    rng = np.random.default_rng(7)
    for i, chart in enumerate(c.charts):
        lo = np.asarray(chart.domain.lower)
        hi = np.asarray(chart.domain.upper)
        # keep clear of open-box edges where frames may degenerate
        span = hi - lo
        p = rng.uniform(lo + 0.05 * span, hi - 0.05 * span, size=(n_samples, chart.domain.dim))
        nu = np.asarray(f.normal_field(p), dtype=np.float64)
        if nu.shape != (n_samples, c.dims.ambient_dim):
            raise InputError("normal field must map (m, d) parameters to (m, 4l+3) vectors")
        norms = np.linalg.norm(nu, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-8:
            raise InputError("framing normal field is not unit length (tolerance 1e-8)")
        frames = c.tangent_frames(p, chart=i)
        dots = np.einsum("mn,mnj->mj", nu, frames)
        scale = np.linalg.norm(frames, axis=1)
        if np.max(np.abs(dots) / np.maximum(scale, 1e-300)) > 1e-8:
            raise InputError("framing normal field is not orthogonal to the tangents (1e-8)")


def self_linking(c: ParamCycle, f: Framing, spec: QuadratureSpec | None = None) -> int:
    """Self-linking under a framing policy.

    Zero regularization fixes every self-linking to 0 by definition.  A
    push-off framing links the cycle with its displaced copy and demands the
    same integer at epsilon and epsilon/2, guarding against offsets too large
    for the local curvature.
    """
    if f.kind == "zero_regularization":
        return 0
    with warnings.catch_warnings():
        # an epsilon-sized gap is the point of a push-off; the close-gap
        # warning would fire on every call
        warnings.simplefilter("ignore", UserWarning)
        full = gauss_linking(c, pushoff(c, f), spec)
        half = gauss_linking(c, pushoff(c, replace(f, epsilon=f.epsilon / 2)), spec)
    if full.rounded != half.rounded:
        raise FramingInstabilityError(
            f"self-linking changed from {full.rounded} to {half.rounded} when halving "
            f"epsilon={f.epsilon:g}; choose a smaller offset")
    return full.rounded


# ---------------------------------------------------------------------------
# boundary scan of the swept direction region
# ---------------------------------------------------------------------------

def zodiacus_boundary_scan(c1: ParamCycle, c2: ParamCycle, grid: int = 64,
                           tol: float = 1e-3) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grid points where the solid-angle element (nearly) vanishes.

    These satisfy the stationarity condition of the direction map: the unit
    vector between the evaluation points lies in the span of the tangents.
    An empty list at a reasonable tolerance is the signature of a linked
    configuration, where the direction map sweeps the full sphere.
    """
    if grid < 2:
        raise InputError("grid must be >= 2")
    dom1 = c1.chart.domain
    dom2 = c2.chart.domain
    p1 = _midpoint_nodes(dom1, grid)
    p2 = _midpoint_nodes(dom2, grid)
    if p1.shape[0] * p2.shape[0] > 20_000_000:
        raise InputError("scan grid too fine; reduce grid")
    x1 = c1.point(p1)
    j1 = c1.tangent_frames(p1)
    x2 = c2.point(p2)
    j2 = c2.tangent_frames(p2)
    norm1 = np.prod(np.linalg.norm(j1, axis=1), axis=1)
    norm2 = np.prod(np.linalg.norm(j2, axis=1), axis=1)
    n = c1.dims.ambient_dim
    p = c1.dims.cycle_dim
    hits = []
    block = max(1, 4_000_000 // max(1, p2.shape[0]))
    for a0 in range(0, p1.shape[0], block):
        a1 = min(a0 + block, p1.shape[0])
        diff = x1[a0:a1, None, :] - x2[None, :, :]
        r = np.sqrt(np.einsum("abn,abn->ab", diff, diff))
        mats = np.empty((a1 - a0, p2.shape[0], n, n))
        mats[:, :, :, :p] = j1[a0:a1, None, :, :]
        mats[:, :, :, p:2 * p] = j2[None, :, :, :]
        mats[:, :, :, n - 1] = diff
        dets = np.abs(np.linalg.det(mats)) / r  # determinant against the unit direction
        mask = dets < tol * norm1[a0:a1, None] * norm2[None, :]
        for a, b in np.argwhere(mask):
            hits.append((p1[a0 + a].copy(), p2[b].copy()))
    return hits


def _midpoint_nodes(domain, per_dim: int) -> np.ndarray:
    axes = [lo + (np.arange(per_dim) + 0.5) * (hi - lo) / per_dim
            for lo, hi in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# ---------------------------------------------------------------------------
# 3-D intersection oracle
# ---------------------------------------------------------------------------

def intersection_oracle_3d(c_disk_spanning: ParamCycle, c_other: ParamCycle,
                           samples: int = 4096) -> int:
    """Signed crossings of c_other through the flat disk bounded by a planar circle.

    Independent of the integral machinery: recovers the disk geometrically
    from samples, then counts transversal plane crossings that land strictly
    inside the disk, signed by crossing direction and both orientations.
    """
    if c_disk_spanning.dims.l != 0 or c_other.dims.l != 0:
        raise InputError("the intersection oracle works in ambient dimension 3 only")
    center, radius, nrm = _recover_planar_circle(c_disk_spanning)
    dom = c_other.chart.domain
    lo, hi = dom.lower[0], dom.upper[0]
    t_nodes = lo + (np.arange(samples) + 0.5) * (hi - lo) / samples
    g = (c_other.point(t_nodes.reshape(-1, 1)) - center) @ nrm
    if np.any(g == 0.0):
        # a crossing sits exactly on a node; shift the whole grid a quarter step
        t_nodes = t_nodes + (hi - lo) / (4.0 * samples)
        g = (c_other.point(t_nodes.reshape(-1, 1)) - center) @ nrm
    total = 0
    for i in np.nonzero(g[:-1] * g[1:] < 0)[0]:
        t_star = brentq(
            lambda t: float((c_other.point([[t]])[0] - center) @ nrm),
            t_nodes[i], t_nodes[i + 1], xtol=1e-14)
        y_star = c_other.point([[t_star]])[0]
        tangent = c_other.tangent_frames([[t_star]])[0, :, 0]
        cross_cos = (tangent @ nrm) / np.linalg.norm(tangent)
        if abs(cross_cos) < 1e-4:
            raise DegenerateCrossingError(
                f"tangential crossing at parameter {t_star:.6g} (angle cosine {cross_cos:.2e})")
        in_plane = y_star - center - ((y_star - center) @ nrm) * nrm
        rho = float(np.linalg.norm(in_plane))
        if abs(rho - radius) < 1e-6 * max(1.0, radius):
            raise DegenerateCrossingError(
                f"crossing grazes the disk boundary at parameter {t_star:.6g}")
        if rho < radius:
            total += 1 if cross_cos > 0 else -1
    return total * c_other.orientation


def _recover_planar_circle(c: ParamCycle, samples: int = 512):
    dom = c.chart.domain
    lo, hi = dom.lower[0], dom.upper[0]
    s = (lo + (np.arange(samples) + 0.5) * (hi - lo) / samples).reshape(-1, 1)
    x = c.point(s)
    center = x.mean(axis=0)
    radial = x - center
    dists = np.linalg.norm(radial, axis=1)
    radius = float(dists.mean())
    if np.max(np.abs(dists - radius)) > 1e-8 * max(1.0, radius):
        raise InputError("spanning cycle is not a round circle")
    nrm = np.sum(np.cross(radial, np.roll(radial, -1, axis=0)), axis=0)
    nrm_len = np.linalg.norm(nrm)
    if nrm_len < 1e-12:
        raise InputError("could not orient the spanning circle")
    nrm = nrm / nrm_len
    if np.max(np.abs(radial @ nrm)) > 1e-8 * max(1.0, radius):
        raise InputError("spanning cycle is not planar")
    return center, radius, nrm * c.orientation
