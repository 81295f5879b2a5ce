"""Exact Wilson-loop expectation values of the abelian Chern-Simons theory.

Everything here is integer / rational arithmetic: the expectation value of a
charged link is either exactly zero (homology selection) or a root of unity
exp(2 i pi * phase) with phase = -(q^T L q)/(4k) mod 1 computed in Fractions.
No floating point enters; floats appear only in display helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import cos, pi, sin
from numbers import Rational

from .errors import InputError, QuantizationError


def _as_int(value, what: str) -> int:
    """Strict integer coercion: booleans and non-integral numbers are rejected."""
    if isinstance(value, bool):
        raise InputError(f"{what} must be an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, Rational) and value.denominator == 1:
        return int(value)
    raise InputError(f"{what} must be an integer, got {value!r}")


@dataclass(frozen=True)
class Level:
    """Coupling level k; a nonzero integer because the action lives in R/Z."""

    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or isinstance(self.k, bool):
            raise QuantizationError("the level must be an integer (level quantization)")
        if self.k == 0:
            raise QuantizationError("the level must be nonzero (the phase denominator is 4k)")

    @property
    def period(self) -> int:
        """Charge period 2|k| of the nilpotency reduction."""
        return 2 * abs(self.k)


def validate_level(x) -> Level:
    """Accept integers (including integral floats/rationals); reject everything else."""
    try:
        k = _as_int(x, "level")
    except InputError as exc:
        raise QuantizationError(
            f"the level must be an integer, got {x!r} (level quantization)") from exc
    return Level(k)


@dataclass(frozen=True)
class ChargeVector:
    q: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(_as_int(v, "charge") for v in self.q))

    def __len__(self):
        return len(self.q)


@dataclass(frozen=True)
class LinkingMatrix:
    """Symmetric integer linking matrix with a framing policy per diagonal entry."""

    entries: tuple[tuple[int, ...], ...]
    framing_policy: tuple[str, ...] = ()

    def __post_init__(self):
        rows = tuple(tuple(_as_int(v, "linking entry") for v in row) for row in self.entries)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise InputError("linking matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise InputError(
                        f"linking matrix must be symmetric (entries [{i}][{j}] and [{j}][{i}] differ)")
        policy = self.framing_policy or ("zero",) * n
        if len(policy) != n:
            raise InputError("framing policy must name one choice per loop")
        for i, kind in enumerate(policy):
            if kind not in ("zero", "pushoff"):
                raise InputError(f"unknown framing policy {kind!r}")
            if kind == "zero" and rows[i][i] != 0:
                raise InputError(
                    f"zero-regularized diagonal entry [{i}][{i}] must vanish, got {rows[i][i]}")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "framing_policy", tuple(policy))

    @property
    def n(self) -> int:
        return len(self.entries)

    def quadratic_form(self, charges: ChargeVector) -> int:
        q = charges.q
        return sum(q[i] * self.entries[i][j] * q[j]
                   for i in range(self.n) for j in range(self.n))


@dataclass(frozen=True)
class ManifoldDescriptor:
    """Closed torsion-free (4l+3)-manifold, known through its middle Betti number."""

    kind: str
    betti: int

    def __post_init__(self):
        if self.kind in ("with_torsion", "torsion"):
            raise InputError(
                "manifolds with torsion are not supported (free homology only)")
        if self.kind not in ("sphere_4l3", "product_s2l1_s2l2", "generic_torsion_free"):
            raise InputError(f"unknown manifold kind {self.kind!r}")
        if self.betti < 0:
            raise InputError("betti number must be non-negative")
        if self.kind == "sphere_4l3" and self.betti != 0:
            raise InputError("the sphere has betti number 0")
        if self.kind == "product_s2l1_s2l2" and self.betti != 1:
            raise InputError("the sphere product has betti number 1")

    @staticmethod
    def sphere() -> "ManifoldDescriptor":
        return ManifoldDescriptor("sphere_4l3", 0)

    @staticmethod
    def sphere_product() -> "ManifoldDescriptor":
        return ManifoldDescriptor("product_s2l1_s2l2", 1)

    @staticmethod
    def generic(betti: int) -> "ManifoldDescriptor":
        return ManifoldDescriptor("generic_torsion_free", betti)


@dataclass(frozen=True)
class HomologyVector:
    v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(_as_int(x, "homology component") for x in self.v))

    def __len__(self):
        return len(self.v)


@dataclass(frozen=True)
class RationalPhase:
    """Element of Q/Z in lowest terms with representative in [0, 1)."""

    fraction: Fraction

    def __post_init__(self):
        object.__setattr__(self, "fraction", self.fraction % 1)

    @property
    def numerator(self) -> int:
        return self.fraction.numerator

    @property
    def denominator(self) -> int:
        return self.fraction.denominator

    def unit_circle_value(self) -> complex:
        """Display helper exp(2 i pi * phase); the fraction is the source of truth."""
        angle = 2.0 * pi * float(self.fraction)
        return complex(cos(angle), sin(angle))


@dataclass(frozen=True)
class ExpectationValue:
    """Either exactly zero or a rational phase on the unit circle."""

    phase: RationalPhase | None
    homology_warning: bool = False

    @property
    def is_zero(self) -> bool:
        return self.phase is None

    @staticmethod
    def zero() -> "ExpectationValue":
        return ExpectationValue(None)

    def value(self) -> complex:
        return 0j if self.phase is None else self.phase.unit_circle_value()

    def to_json(self) -> dict:
        if self.phase is None:
            return {"result": "zero"}
        val = self.value()
        out = {
            "result": "phase",
            "phase": {"num": self.phase.numerator, "den": self.phase.denominator},
            "value_re": float(f"{val.real:.15g}"),
            "value_im": float(f"{val.imag:.15g}"),
        }
        if self.homology_warning:
            out["homology_warning"] = True
        return out


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def selection_rule(v: HomologyVector, k: Level) -> bool:
    """True iff every homology component vanishes modulo 2k."""
    return all(x % k.period == 0 for x in v.v)


def expectation_value(charges: ChargeVector, matrix: LinkingMatrix, k: Level,
                      manifold: ManifoldDescriptor, v: HomologyVector) -> ExpectationValue:
    """Expectation value of the Wilson loop of a charged link, exactly.

    Vanishes unless the link is homologically trivial modulo 2k; otherwise
    the value is exp(-2 i pi (q^T L q) / 4k) as an exact rational phase.  A
    selection pass with a nonzero homology vector is flagged: the reduction
    to the trivial class leans on nilpotency alone.
    """
    if len(charges) != matrix.n:
        raise InputError(f"{len(charges)} charges for a {matrix.n}x{matrix.n} linking matrix")
    if len(v) != manifold.betti:
        raise InputError(
            f"homology vector length {len(v)} does not match betti number {manifold.betti}")
    if not selection_rule(v, k):
        return ExpectationValue.zero()
    phase = RationalPhase(Fraction(-matrix.quadratic_form(charges), 4 * k.k))
    return ExpectationValue(phase, homology_warning=any(x != 0 for x in v.v))


def nilpotency_reduce(charges: ChargeVector, k: Level) -> ChargeVector:
    """Reduce each charge modulo 2k: into [0, 2k) for k>0, into (-2|k|, 0] for k<0."""
    period = k.period
    if k.k > 0:
        return ChargeVector(tuple(q % period for q in charges.q))
    return ChargeVector(tuple(q % period - period if q % period else 0 for q in charges.q))


def nilpotency_invariance_check(charges: ChargeVector, matrix: LinkingMatrix, k: Level,
                                manifold: ManifoldDescriptor, v: HomologyVector) -> bool:
    """Expectation value is unchanged by reducing charges mod 2k (zero-framed diagonal)."""
    if any(kind != "zero" for kind in matrix.framing_policy):
        raise InputError("nilpotency check requires zero-regularized diagonals")
    full = expectation_value(charges, matrix, k, manifold, v)
    reduced = expectation_value(nilpotency_reduce(charges, k), matrix, k, manifold, v)
    if full.is_zero or reduced.is_zero:
        return full.is_zero == reduced.is_zero
    return full.phase == reduced.phase


def link_from_geometry(cycles, charges: ChargeVector, f, spec=None, rounding_tol: float = 1e-3):
    """Assemble the linking matrix and homology vector of a link of cycles in R^(4l+3).

    Off-diagonal entries come from the double-integral linking number,
    diagonal entries from the framed self-linking.  Ambient space is
    contractible, so the homology vector is empty (sphere-like selection).
    """
    from .linking import Framing, gauss_linking, self_linking

    cycles = list(cycles)
    if len(cycles) != len(charges):
        raise InputError(f"{len(charges)} charges for {len(cycles)} cycles")
    if not isinstance(f, Framing):
        raise InputError("f must be a Framing")
    n = len(cycles)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = self_linking(cycles[i], f, spec)
        for j in range(i + 1, n):
            result = gauss_linking(cycles[i], cycles[j], spec)
            if not result.raw.converged or result.residual > rounding_tol:
                raise InputError(
                    f"linking number of cycles {i},{j} did not resolve to an integer "
                    f"(value {result.raw.value:.6g}, residual {result.residual:.2e})")
            rows[i][j] = rows[j][i] = result.rounded
    policy = ("zero",) * n if f.kind == "zero_regularization" else ("pushoff",) * n
    return (LinkingMatrix(tuple(tuple(r) for r in rows), policy), HomologyVector(()))


# ---------------------------------------------------------------------------
# JSON link descriptors
# ---------------------------------------------------------------------------

def manifold_from_json(obj) -> ManifoldDescriptor:
    if obj is None:
        return ManifoldDescriptor.sphere()
    if not isinstance(obj, dict):
        raise InputError("manifold must be a JSON object")
    kind = obj.get("kind", "sphere_4l3")
    aliases = {
        "sphere": "sphere_4l3",
        "sphere_4l3": "sphere_4l3",
        "product": "product_s2l1_s2l2",
        "product_s2l1_s2l2": "product_s2l1_s2l2",
        "generic": "generic_torsion_free",
        "generic_torsion_free": "generic_torsion_free",
    }
    resolved = aliases.get(kind, kind)
    default_betti = {"sphere_4l3": 0, "product_s2l1_s2l2": 1}.get(resolved)
    betti = obj.get("betti", default_betti)
    if betti is None:
        raise InputError("generic manifolds need an explicit betti number")
    return ManifoldDescriptor(resolved, _as_int(betti, "betti"))


def link_descriptor_from_json(obj: dict):
    """Parse {"l", "k", "manifold", "charges", "linking_matrix", "homology", "framing"}."""
    if not isinstance(obj, dict):
        raise InputError("link descriptor must be a JSON object")
    k = validate_level(obj.get("k"))
    charges = ChargeVector(tuple(obj.get("charges", ())))
    manifold = manifold_from_json(obj.get("manifold"))
    framing = obj.get("framing", "zero")
    if framing == "zero":
        policy = ("zero",) * len(charges)
    elif isinstance(framing, dict) and "pushoff" in framing:
        policy = ("pushoff",) * len(charges)
    else:
        raise InputError(f'framing must be "zero" or {{"pushoff": {{...}}}}, got {framing!r}')
    rows = obj.get("linking_matrix")
    if rows is None:
        raise InputError("link descriptor needs a linking_matrix")
    matrix = LinkingMatrix(tuple(tuple(row) for row in rows), policy)
    v = HomologyVector(tuple(obj.get("homology", (0,) * manifold.betti)))
    return charges, matrix, k, manifold, v
