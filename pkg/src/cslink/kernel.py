"""Pointwise kernels of the linking integral and their normalization constants.

Two deliberately independent evaluation routes are kept side by side:

* the determinant route: the oriented solid-angle element is the determinant
  of the (4l+3)x(4l+3) matrix whose columns are the two tangent frames and
  the unit direction vector between the evaluation points;
* the contraction route: the same quantity assembled from (2l+1)-column
  minors of each frame via a generalized Laplace expansion, i.e. an explicit
  Levi-Civita contraction, normalized by the gauge-propagator constant.

Both integrate to the same linking number; agreement of the two routes is a
structural self-check of all combinatorial factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import backends
from .cycles import ParamCycle, as_params
from .errors import InputError, SingularityError

DEFAULT_SINGULAR_FLOOR = 1e-12


def gamma_half_integer(x: float) -> float:
    """Gamma(x); exact big-integer recursion from Gamma(1/2)=sqrt(pi) at half-integers."""
    two_x = 2.0 * x
    if x > 0 and two_x == round(two_x):
        k = int(round(two_x))
        if k % 2 == 0:
            return float(math.factorial(k // 2 - 1))
        m = (k - 1) // 2  # x = m + 1/2
        return math.factorial(2 * m) / (4**m * math.factorial(m)) * math.sqrt(math.pi)
    return math.gamma(x)


def sphere_surface(n: int) -> float:
    """Surface content of the unit n-sphere: 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    if n < 0:
        raise InputError("sphere dimension must be non-negative")
    return 2.0 * math.pi ** ((n + 1) / 2) / gamma_half_integer((n + 1) / 2)


def linking_normalization(l: int) -> float:
    """Prefactor of the component-form (coordinate-differential) linking integral."""
    fact = math.factorial(2 * l + 1)
    return gamma_half_integer((4 * l + 3) / 2) / (
        (8 * l + 2) * math.pi ** ((4 * l + 3) / 2) * fact * fact)


def propagator_constant(l: int) -> float:
    """Gauge-field two-point kernel prefactor: Gamma((4l+3)/2) / (2 pi^((4l+3)/2))."""
    return gamma_half_integer((4 * l + 3) / 2) / (2.0 * math.pi ** ((4 * l + 3) / 2))


@dataclass(frozen=True)
class KernelConstants:
    """All normalization constants for one value of l."""

    l: int
    n_l: float            # component-form normalization
    s_2l: float           # surface of S^(2l)
    s_2l1: float          # surface of S^(2l+1)
    s_4l2: float          # surface of S^(4l+2) = total solid angle in 4l+3 dims
    propagator: float     # two-point kernel prefactor

    @property
    def det_form_prefactor(self) -> float:
        """1 / S_(4l+2): prefactor of the solid-angle determinant integral."""
        return 1.0 / self.s_4l2

    @property
    def component_form_prefactor(self) -> float:
        """N_l collapsed onto the parameter-space determinant; equals 1/S_(4l+2)."""
        fact = math.factorial(2 * self.l + 1)
        return self.n_l * (4 * self.l + 1) * fact * fact

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "N_l": self.n_l,
            "S_2l": self.s_2l,
            "S_2l+1": self.s_2l1,
            "S_4l+2": self.s_4l2,
            "propagator_constant": self.propagator,
        }


def normalization(l: int) -> KernelConstants:
    if l < 0:
        raise InputError("l must be non-negative")
    return KernelConstants(
        l=l,
        n_l=linking_normalization(l),
        s_2l=sphere_surface(2 * l),
        s_2l1=sphere_surface(2 * l + 1),
        s_4l2=sphere_surface(4 * l + 2),
        propagator=propagator_constant(l),
    )


# ---------------------------------------------------------------------------
# solid-angle element
# ---------------------------------------------------------------------------

def solid_angle_element(tangents_x, tangents_y, e_xy) -> float:
    """Oriented solid-angle element: det of the columns [frame_x | frame_y | e].

    tangents_x and tangents_y are (2l+1, 4l+3) arrays whose rows are tangent
    vectors; e_xy must be a unit vector.  Vanishes exactly when e_xy lies in
    the span of the tangents, the stationarity condition that marks candidate
    boundary points of the swept direction region.
    """
    tx = np.atleast_2d(np.asarray(tangents_x, dtype=np.float64))
    ty = np.atleast_2d(np.asarray(tangents_y, dtype=np.float64))
    e = np.asarray(e_xy, dtype=np.float64)
    n = e.shape[0]
    p = (n - 1) // 2
    if e.ndim != 1 or n != 2 * p + 1:
        raise InputError("e_xy must be a vector of odd length 4l+3")
    if tx.shape != (p, n):
        raise InputError(f"tangents_x must have shape ({p}, {n}), got {tx.shape}")
    if ty.shape != (p, n):
        raise InputError(f"tangents_y must have shape ({p}, {n}), got {ty.shape}")
    norm = np.linalg.norm(e)
    if abs(norm - 1.0) > 1e-9:
        raise InputError(f"e_xy must be unit (|e| = {norm:.3e})")
    mat = np.empty((n, n))
    mat[:, :p] = tx.T
    mat[:, p:2 * p] = ty.T
    mat[:, -1] = e
    return float(np.linalg.det(mat))


# ---------------------------------------------------------------------------
# Levi-Civita contraction tables (generalized Laplace expansion)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def minor_terms(n: int, p: int):
    """Index tables of the expansion det[A|B|c] = sum sign * minor_A(I) * minor_B(K) * c[rho].

    Returns (subsets, ix, iy, rho, sign): `subsets` is the (n_sub, p) array of
    sorted row subsets; each term t picks minor rows subsets[ix[t]] for the
    first block, subsets[iy[t]] for the second, and the leftover row rho[t]
    for the final column, weighted by the parity sign[t] of the combined row
    permutation.
    """
    subs = list(combinations(range(n), p))
    index = {s: i for i, s in enumerate(subs)}
    ix, iy, rho, sgn = [], [], [], []
    for i_set in subs:
        rest = [r for r in range(n) if r not in i_set]
        for k_set in combinations(rest, p):
            leftover = [r for r in rest if r not in k_set]
            perm = list(i_set) + list(k_set) + leftover
            inv = 0
            for a in range(n):
                for b in range(a + 1, n):
                    if perm[a] > perm[b]:
                        inv += 1
            ix.append(index[i_set])
            iy.append(index[k_set])
            rho.append(leftover[0])
            sgn.append(-1.0 if inv % 2 else 1.0)
    return (np.asarray(subs, dtype=np.int64),
            np.asarray(ix, dtype=np.int64),
            np.asarray(iy, dtype=np.int64),
            np.asarray(rho, dtype=np.int64),
            np.asarray(sgn, dtype=np.float64))


def frame_minors(frames: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """All (2l+1)x(2l+1) row-subset minors of a batch of tangent frames."""
    m = frames.shape[0]
    n_sub, p = subsets.shape
    out = np.empty((m, n_sub))
    block = max(1, 50_000_000 // (n_sub * p * p))  # caps the scratch allocation
    for a0 in range(0, m, block):
        a1 = min(a0 + block, m)
        out[a0:a1] = np.linalg.det(frames[a0:a1][:, subsets, :])
    return out


# ---------------------------------------------------------------------------
# paired integrands
# ---------------------------------------------------------------------------

class PairKernelIntegrand:
    """Linking-integral integrand over the product parameter space of two cycles.

    kind "gauss": orientation * det[frame_x | frame_y | x-y] / |x-y|^(4l+3);
    the caller applies the 1/S_(4l+2) prefactor.
    kind "propagator": the independent minor-expansion contraction, already
    multiplied by the propagator constant (no further prefactor needed).

    Callable on paired parameter batches; exposes grid_reduce / sample-style
    evaluation hooks the quadrature driver dispatches to compiled backends.
    """

    def __init__(self, c1: ParamCycle, c2: ParamCycle, kind: str = "gauss",
                 chart1: int = 0, chart2: int = 0,
                 singular_floor: float = DEFAULT_SINGULAR_FLOOR):
        if kind not in ("gauss", "propagator"):
            raise InputError(f"unknown kernel kind {kind!r}")
        if c1.dims.l != c2.dims.l:
            raise InputError(
                f"cycles live in different ambient dimensions (l={c1.dims.l} vs l={c2.dims.l})")
        self.c1 = c1
        self.c2 = c2
        self.kind = kind
        self.chart1 = chart1
        self.chart2 = chart2
        self.singular_floor = float(singular_floor)
        self.l = c1.dims.l
        self.sign = float(c1.orientation * c2.orientation)
        self.scale = propagator_constant(self.l) if kind == "propagator" else 1.0
        n = c1.dims.ambient_dim
        p = c1.dims.cycle_dim
        self._terms = minor_terms(n, p) if kind == "propagator" else None

    @property
    def domain1(self):
        return self.c1.charts[self.chart1].domain

    @property
    def domain2(self):
        return self.c2.charts[self.chart2].domain

    def _bundle1(self, params: np.ndarray):
        ch = self.c1.charts[self.chart1]
        return (np.ascontiguousarray(ch.point(params)),
                np.ascontiguousarray(ch.tangents(params)))

    def _bundle2(self, params: np.ndarray):
        ch = self.c2.charts[self.chart2]
        return (np.ascontiguousarray(ch.point(params)),
                np.ascontiguousarray(ch.tangents(params)))

    def __call__(self, s, t) -> np.ndarray:
        """Evaluate on paired parameter batches s: (m, d1), t: (m, d2)."""
        p1 = as_params(s, self.domain1.dim)
        p2 = as_params(t, self.domain2.dim)
        if p1.shape[0] != p2.shape[0]:
            raise InputError("paired evaluation needs equally many s and t tuples")
        x, jx = self._bundle1(p1)
        y, jy = self._bundle2(p2)
        kern = backends.get_kernels()
        if self.kind == "gauss":
            vals, min_r2 = kern.pairs_det(x, jx, y, jy, self.l)
        else:
            subsets, ix, iy, rho, sgn = self._terms
            mx = frame_minors(jx, subsets)
            my = frame_minors(jy, subsets)
            vals, min_r2 = kern.pairs_minor(x, mx, y, my, ix, iy, rho, sgn, self.l)
        self._check_floor(float(np.min(min_r2)))
        return (self.sign * self.scale) * vals

    def grid_reduce(self, nodes1, weights1, nodes2, weights2):
        """Weighted sum over the full product grid; returns (value, evaluations)."""
        x, jx = self._bundle1(np.ascontiguousarray(nodes1))
        y, jy = self._bundle2(np.ascontiguousarray(nodes2))
        w1 = np.ascontiguousarray(weights1)
        w2 = np.ascontiguousarray(weights2)
        kern = backends.get_kernels()
        if self.kind == "gauss":
            partials, min_r2 = kern.grid_reduce_det(x, jx, w1, y, jy, w2, self.l)
        else:
            subsets, ix, iy, rho, sgn = self._terms
            mx = frame_minors(jx, subsets)
            my = frame_minors(jy, subsets)
            partials, min_r2 = kern.grid_reduce_minor(x, mx, w1, y, my, w2,
                                                      ix, iy, rho, sgn, self.l)
        self._check_floor(float(np.min(min_r2)))
        value = (self.sign * self.scale) * float(np.sum(partials))
        return value, x.shape[0] * y.shape[0]

    def _check_floor(self, min_r2: float):
        if min_r2 < self.singular_floor**2:
            raise SingularityError(
                f"cycles touch: evaluation points closer than {self.singular_floor:g}")


def _pointwise(kernel: PairKernelIntegrand, s, t):
    vals = kernel(s, t)
    return float(vals[0]) if vals.shape[0] == 1 and np.ndim(s) <= 1 else vals


def gauss_integrand(c1: ParamCycle, c2: ParamCycle, s, t,
                    singular_floor: float = DEFAULT_SINGULAR_FLOOR):
    """Solid-angle determinant integrand at chart parameters (s, t), orientation included.

    All chart Jacobian factors ride inside the tangent frames; the caller
    still owes the global 1/S_(4l+2) prefactor.
    """
    return _pointwise(PairKernelIntegrand(c1, c2, "gauss", singular_floor=singular_floor), s, t)


def propagator_integrand(c1: ParamCycle, c2: ParamCycle, s, t,
                         singular_floor: float = DEFAULT_SINGULAR_FLOOR):
    """Field-theory two-point contraction at (s, t): the independent code path.

    Evaluated by explicit Levi-Civita minor expansion (never by the full
    determinant) and carries the propagator constant, so no extra prefactor
    is applied downstream.
    """
    return _pointwise(PairKernelIntegrand(c1, c2, "propagator", singular_floor=singular_floor), s, t)


# ---------------------------------------------------------------------------
# radial cross-check
# ---------------------------------------------------------------------------

def radial_integral_check(l: int, points: int = 256) -> tuple[float, float]:
    """The radial factor of the sphere/hyperplane configuration, two ways.

    Returns (quadrature value, Gamma closed form) of
    integral_0^inf y^(2l) / (1+y^2)^((4l+3)/2) dy, evaluated by Gauss-Legendre
    quadrature after y = tan(theta) and by
    Gamma(l+1/2) Gamma(l+1) / (2 Gamma(2l+3/2)).
    """
    if l < 0:
        raise InputError("l must be non-negative")
    pts = getattr(points, "points_per_dim", points)
    x, w = np.polynomial.legendre.leggauss(int(pts))
    theta = 0.25 * math.pi * (x + 1.0)
    wt = 0.25 * math.pi * w
    numeric = float(np.sum(np.sin(theta) ** (2 * l) * np.cos(theta) ** (2 * l + 1) * wt))
    exact = (gamma_half_integer(l + 0.5) * gamma_half_integer(l + 1.0)
             / (2.0 * gamma_half_integer(2 * l + 1.5)))
    return numeric, exact
