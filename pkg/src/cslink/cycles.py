"""Parametrized closed cycles of dimension 2l+1 embedded in R^(4l+3).

A cycle is described by one or more charts.  Each chart carries a parameter
domain and two pure evaluators: a point map into the ambient space and the
tangent frame (the map's Jacobian columns with respect to the chart
coordinates).  Because the tangents are taken with respect to the chart
coordinates, every chart Jacobian factor (e.g. the 1+y^2 of a tangent-
compactified axis) is already contained in the frame and no separate measure
bookkeeping is needed downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import InputError

TAU = 2.0 * np.pi
HALF_PI = 0.5 * np.pi

# Evaluator contracts (m = number of parameter tuples, d = chart dim, n = ambient dim):
#   point:    (m, d) float64 -> (m, n) float64
#   tangents: (m, d) float64 -> (m, n, d) float64, [:, :, j] = d(point)/d(param_j)
PointFn = Callable[[np.ndarray], np.ndarray]
TangentsFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Dimensions:
    """Dimension bookkeeping: a (2l+1)-cycle lives in R^(4l+3)."""

    l: int

    def __post_init__(self):
        if not isinstance(self.l, (int, np.integer)) or isinstance(self.l, bool):
            raise InputError(f"l must be a non-negative integer, got {self.l!r}")
        if self.l < 0:
            raise InputError(f"l must be non-negative, got {self.l}")
        if self.l > 2:
            warnings.warn(
                f"l={self.l} (ambient dimension {4 * self.l + 3}) is untested territory; "
                "shipped configurations cover l <= 2",
                stacklevel=2,
            )

    @property
    def cycle_dim(self) -> int:
        return 2 * self.l + 1

    @property
    def ambient_dim(self) -> int:
        return 4 * self.l + 3


@dataclass(frozen=True)
class ChartDomain:
    """Parameter box of one chart, with per-coordinate periodicity flags.

    kind is one of "torus", "box", "compactified_plane".  A compactified
    plane chart covers R^d through y_i = tan(theta_i) with theta_i in
    (-pi/2, pi/2); the open box never includes the tan singularities.
    """

    kind: str
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        if self.kind not in ("torus", "box", "compactified_plane"):
            raise InputError(f"unknown chart kind {self.kind!r}")
        if self.dim < 1:
            raise InputError("chart dimension must be >= 1")
        for name, t in (("lower", self.lower), ("upper", self.upper), ("periodic", self.periodic)):
            if len(t) != self.dim:
                raise InputError(f"{name} must have length {self.dim}")
        if any(u <= lo for lo, u in zip(self.lower, self.upper)):
            raise InputError("chart box must have positive extent in every coordinate")

    @staticmethod
    def torus(d: int) -> "ChartDomain":
        return ChartDomain("torus", d, (0.0,) * d, (TAU,) * d, (True,) * d)

    @staticmethod
    def box(d: int, lower: Sequence[float], upper: Sequence[float],
            periodic: Sequence[bool] | None = None) -> "ChartDomain":
        per = tuple(bool(p) for p in periodic) if periodic is not None else (False,) * d
        return ChartDomain("box", d, tuple(map(float, lower)), tuple(map(float, upper)), per)

    @staticmethod
    def compactified_plane(d: int) -> "ChartDomain":
        return ChartDomain("compactified_plane", d,
                           (-HALF_PI,) * d, (HALF_PI,) * d, (False,) * d)

    @property
    def ranges(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.ranges))


@dataclass(frozen=True)
class Chart:
    domain: ChartDomain
    point: PointFn
    tangents: TangentsFn


@dataclass(frozen=True)
class ParamCycle:
    """A closed (2l+1)-cycle with pure chart evaluators and an orientation sign."""

    dims: Dimensions
    charts: tuple[Chart, ...]
    orientation: int = 1
    label: str = ""

    def __post_init__(self):
        if self.orientation not in (-1, 1):
            raise InputError("orientation must be +1 or -1")
        if not self.charts:
            raise InputError("a cycle needs at least one chart")

    @property
    def chart(self) -> Chart:
        """The single chart of a shipped canonical cycle."""
        return self.charts[0]

    def point(self, params, chart: int = 0) -> np.ndarray:
        return self.charts[chart].point(as_params(params, self.charts[chart].domain.dim))

    def tangent_frames(self, params, chart: int = 0) -> np.ndarray:
        return self.charts[chart].tangents(as_params(params, self.charts[chart].domain.dim))


def as_params(params, d: int) -> np.ndarray:
    """Coerce a scalar / tuple / array of parameter tuples into an (m, d) float64 array."""
    a = np.asarray(params, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # A length-d vector is one point; for d == 1 treat it as m points.
        a = a.reshape(-1, 1) if d == 1 else a.reshape(1, -1)
    if a.ndim != 2 or a.shape[1] != d:
        raise InputError(f"expected parameters of chart dimension {d}, got shape {a.shape}")
    return a


# ---------------------------------------------------------------------------
# canonical cycles
# ---------------------------------------------------------------------------

def unit_circle_xy(radius: float = 1.0, offset: Sequence[float] = (0.0, 0.0, 0.0)) -> ParamCycle:
    """Planar circle (offset + radius*(cos s, sin s, 0)) in R^3, counterclockwise."""
    if radius <= 0:
        raise InputError(f"radius must be positive, got {radius}")
    r = float(radius)
    off = np.asarray(offset, dtype=np.float64)
    if off.shape != (3,):
        raise InputError("offset must be a 3-vector")

    def point(p):
        s = p[:, 0]
        out = np.empty((len(s), 3))
        out[:, 0] = off[0] + r * np.cos(s)
        out[:, 1] = off[1] + r * np.sin(s)
        out[:, 2] = off[2]
        return out

    def tangents(p):
        s = p[:, 0]
        out = np.zeros((len(s), 3, 1))
        out[:, 0, 0] = -r * np.sin(s)
        out[:, 1, 0] = r * np.cos(s)
        return out

    return ParamCycle(Dimensions(0), (Chart(ChartDomain.torus(1), point, tangents),),
                      label=f"circle(r={r:g})")


def vertical_line_z(y_offset: float = 0.0) -> ParamCycle:
    """The straight line {(0, y_offset, y3)} in R^3 on a tangent-compactified chart.

    The point at infinity closes the cycle; its neighbourhood contributes
    nothing to the linking integral thanks to the |x-y|^(-(4l+2)) decay, so
    only the affine part is represented.
    """
    y0 = float(y_offset)

    def point(p):
        th = p[:, 0]
        out = np.zeros((len(th), 3))
        out[:, 1] = y0
        out[:, 2] = np.tan(th)
        return out

    def tangents(p):
        th = p[:, 0]
        out = np.zeros((len(th), 3, 1))
        out[:, 2, 0] = 1.0 + np.tan(th) ** 2
        return out

    return ParamCycle(Dimensions(0), (Chart(ChartDomain.compactified_plane(1), point, tangents),),
                      label=f"line(y={y0:g})")


def _sphere_point(p: np.ndarray, r: float, d: int, n: int) -> np.ndarray:
    # x_k = r * prod_{i<k} sin(phi_i) * cos(phi_k), x_{d+1} = r * prod sin(phi_i)
    m = p.shape[0]
    out = np.zeros((m, n))
    sin_cum = np.full(m, r)
    for k in range(d):
        out[:, k] = sin_cum * np.cos(p[:, k])
        sin_cum = sin_cum * np.sin(p[:, k])
    out[:, d] = sin_cum
    return out


def _sphere_tangents(p: np.ndarray, r: float, d: int, n: int) -> np.ndarray:
    m = p.shape[0]
    c = np.cos(p)
    s = np.sin(p)
    out = np.zeros((m, n, d))
    # division-free: stays exact where sin(phi_i) vanishes (poles, azimuth = pi)
    for j in range(d):
        s_mod = s.copy()
        s_mod[:, j] = 1.0
        # prod_mod[:, k] = r * prod_{i<k, i != j} sin(phi_i)
        prod_mod = np.empty((m, d + 1))
        prod_mod[:, 0] = r
        np.cumprod(s_mod, axis=1, out=prod_mod[:, 1:])
        prod_mod[:, 1:] *= r
        out[:, j, j] = -prod_mod[:, j] * s[:, j]
        for k in range(j + 1, d):
            out[:, k, j] = prod_mod[:, k] * c[:, j] * c[:, k]
        out[:, d, j] = prod_mod[:, d] * c[:, j]
    return out


def round_sphere(l: int, radius: float = 1.0) -> ParamCycle:
    """Round (2l+1)-sphere of given radius in the first 2l+2 coordinates of R^(4l+3).

    Hyperspherical chart: polar angles in (0, pi), final azimuth in (0, 2pi).
    The frame is positively oriented for the outward normal, which makes the
    canonical sphere + orthogonal-hyperplane configuration link with value +1.
    """
    if radius <= 0:
        raise InputError(f"radius must be positive, got {radius}")
    dims = Dimensions(l)
    d = dims.cycle_dim
    n = dims.ambient_dim
    r = float(radius)

    def point(p):
        return _sphere_point(p, r, d, n)

    def tangents(p):
        return _sphere_tangents(p, r, d, n)

    if d == 1:
        domain = ChartDomain.torus(1)
    else:
        domain = ChartDomain.box(
            d, (0.0,) * d, (np.pi,) * (d - 1) + (TAU,), (False,) * (d - 1) + (True,))
    return ParamCycle(dims, (Chart(domain, point, tangents),), label=f"sphere(l={l},r={r:g})")


def orthogonal_hyperplane(l: int) -> ParamCycle:
    """The (2l+1)-plane spanned by the last 2l+1 coordinates, tangent-compactified.

    Complements round_sphere(l): the two intersect the sphere's spanning ball
    exactly once, a configuration of linking number +1.
    """
    dims = Dimensions(l)
    d = dims.cycle_dim
    n = dims.ambient_dim
    first = n - d  # = 2l+2

    def point(p):
        out = np.zeros((p.shape[0], n))
        out[:, first:] = np.tan(p)
        return out

    def tangents(p):
        out = np.zeros((p.shape[0], n, d))
        fac = 1.0 + np.tan(p) ** 2
        for j in range(d):
            out[:, first + j, j] = fac[:, j]
        return out

    return ParamCycle(dims, (Chart(ChartDomain.compactified_plane(d), point, tangents),),
                      label=f"hyperplane(l={l})")


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def transform(c: ParamCycle, rotation=None, translation=None, scale: float = 1.0) -> ParamCycle:
    """Apply x -> scale * R x + b to a cycle. R must be special orthogonal."""
    n = c.dims.ambient_dim
    if scale <= 0:
        raise InputError(f"scale must be positive, got {scale}")
    rot = np.eye(n) if rotation is None else np.asarray(rotation, dtype=np.float64)
    if rot.shape != (n, n):
        raise InputError(f"rotation must be {n}x{n}")
    gram = rot.T @ rot - np.eye(n)
    if np.max(np.abs(gram)) > 1e-10:
        raise InputError("rotation matrix is not orthogonal (Gram residual > 1e-10)")
    if np.linalg.det(rot) < 0:
        raise InputError("rotation matrix must have determinant +1")
    tr = np.zeros(n) if translation is None else np.asarray(translation, dtype=np.float64)
    if tr.shape != (n,):
        raise InputError(f"translation must be a {n}-vector")
    sc = float(scale)

    def wrap(chart: Chart) -> Chart:
        base_point, base_tangents = chart.point, chart.tangents

        def point(p):
            return sc * (base_point(p) @ rot.T) + tr

        def tangents(p):
            fr = base_tangents(p)
            return sc * np.einsum("ij,mjk->mik", rot, fr)

        return Chart(chart.domain, point, tangents)

    return replace(c, charts=tuple(wrap(ch) for ch in c.charts),
                   label=c.label + "+transform")


def reverse_orientation(c: ParamCycle) -> ParamCycle:
    """Flip the orientation sign; downstream kernels negate accordingly."""
    return replace(c, orientation=-c.orientation)


# ---------------------------------------------------------------------------
# JSON construction
# ---------------------------------------------------------------------------

def from_json(obj: dict) -> ParamCycle:
    """Build a cycle from its JSON description.

    Kinds: circle {radius, offset}, line {y_offset}, sphere {l, radius},
    hyperplane {l}, transformed {base, rotation, translation, scale}.
    Any kind accepts "reversed": true.
    """
    if not isinstance(obj, dict):
        raise InputError(f"cycle description must be an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == "circle":
        c = unit_circle_xy(obj.get("radius", 1.0), obj.get("offset", (0.0, 0.0, 0.0)))
    elif kind == "line":
        c = vertical_line_z(obj.get("y_offset", 0.0))
    elif kind == "sphere":
        c = round_sphere(_as_l(obj.get("l", 0)), obj.get("radius", 1.0))
    elif kind == "hyperplane":
        c = orthogonal_hyperplane(_as_l(obj.get("l", 0)))
    elif kind == "transformed":
        if "base" not in obj:
            raise InputError('"transformed" cycle needs a "base" cycle')
        c = transform(from_json(obj["base"]), obj.get("rotation"),
                      obj.get("translation"), obj.get("scale", 1.0))
    else:
        raise InputError(f"unknown cycle kind {kind!r}")
    if obj.get("reversed", False):
        c = reverse_orientation(c)
    return c


def _as_l(value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InputError(f"l must be an integer, got {value!r}")
    return int(value)
