"""Command-line front end: linking numbers, Wilson phases and the verification suite.

All results go to stdout as JSON; diagnostics and the human-readable verify
table go to stderr.  Exit codes: 0 success, 1 input error, 2 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import csinvariant, cycles, kernel, linking
from .errors import CslinkError, InputError, QuantizationError, SingularityError
from .quadrature import QuadratureSpec

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _spec_from(config: dict, args, l: int) -> QuadratureSpec:
    obj = dict(config.get("quadrature") or {})
    if args.method is not None:
        obj["method"] = args.method
    if args.points is not None:
        obj["points_per_dim"] = args.points
    if args.budget is not None:
        obj["sample_budget"] = args.budget
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.tol is not None:
        obj["target_rel_error"] = args.tol
    return QuadratureSpec.from_json(obj, l)


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _two_cycles(config: dict):
    specs = config.get("cycles")
    if not isinstance(specs, list) or len(specs) != 2:
        raise InputError('config needs "cycles": [first, second]')
    c1 = cycles.from_json(specs[0])
    c2 = cycles.from_json(specs[1])
    if c1.dims.l != c2.dims.l:
        raise InputError(f"cycles must share l (got {c1.dims.l} and {c2.dims.l})")
    return c1, c2


def _cmd_link(args) -> int:
    config = _load_config(args.config)
    c1, c2 = _two_cycles(config)
    spec = _spec_from(config, args, c1.dims.l)
    gauss = linking.gauss_linking(c1, c2, spec)
    ft = linking.field_theory_linking(c1, c2, spec)
    _emit({
        "gauss": gauss.to_json(),
        "field_theory": ft.to_json(),
        "path_difference": abs(gauss.raw.value - ft.raw.value),
    })
    return EXIT_OK if gauss.raw.converged and ft.raw.converged else EXIT_NOT_CONVERGED


def _normal_field_from_json(cycle_obj: dict, normal_obj):
    if normal_obj is None:
        raise InputError('pushoff framing needs a "normal" field')
    kind = normal_obj.get("kind") if isinstance(normal_obj, dict) else None
    if kind == "constant":
        vec = np.asarray(normal_obj.get("vector", ()), dtype=np.float64)
        if vec.ndim != 1 or not vec.size:
            raise InputError('constant normal needs a "vector"')
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InputError("constant normal vector must be nonzero")
        unit = vec / norm

        return lambda p: np.tile(unit, (p.shape[0], 1))
    if kind == "radial":
        if cycle_obj.get("kind") != "circle":
            raise InputError('radial normals are defined for plain "circle" cycles only')

        def radial(p):
            out = np.zeros((p.shape[0], 3))
            out[:, 0] = np.cos(p[:, 0])
            out[:, 1] = np.sin(p[:, 0])
            return out

        return radial
    raise InputError('normal must be {"kind": "constant", "vector": [...]} or {"kind": "radial"}')


def _framing_from_json(cycle_obj: dict, obj) -> linking.Framing:
    if obj in (None, "zero"):
        return linking.Framing.zero()
    if isinstance(obj, dict) and "pushoff" in obj:
        push = obj["pushoff"]
        eps = push.get("epsilon")
        if eps is None or not isinstance(eps, (int, float)) or eps <= 0:
            raise InputError("pushoff framing needs epsilon > 0")
        field = _normal_field_from_json(cycle_obj, push.get("normal"))
        return linking.Framing.push(field, float(eps))
    raise InputError(f'framing must be "zero" or {{"pushoff": {{...}}}}, got {obj!r}')


def _cmd_selflink(args) -> int:
    config = _load_config(args.config)
    cycle_obj = config.get("cycle")
    if cycle_obj is None:
        raise InputError('config needs a "cycle"')
    c = cycles.from_json(cycle_obj)
    framing = _framing_from_json(cycle_obj, config.get("framing", "zero"))
    spec = _spec_from(config, args, c.dims.l)
    value = linking.self_linking(c, framing, spec)
    _emit({"self_linking": value, "framing": framing.kind})
    return EXIT_OK


def _cmd_wilson(args) -> int:
    config = _load_config(args.config)
    charges, matrix, k, manifold, v = csinvariant.link_descriptor_from_json(config)
    result = csinvariant.expectation_value(charges, matrix, k, manifold, v)
    _emit(result.to_json())
    return EXIT_OK


def _cmd_zodiacus(args) -> int:
    config = _load_config(args.config)
    c1, c2 = _two_cycles(config)
    grid = args.grid if args.grid is not None else int(config.get("grid", 64))
    tol = args.tol if args.tol is not None else float(config.get("tol", 1e-3))
    hits = linking.zodiacus_boundary_scan(c1, c2, grid=grid, tol=tol)
    limit = 10_000
    payload = {
        "count": len(hits),
        "points": [{"s": list(s), "t": list(t)} for s, t in hits[:limit]],
    }
    if len(hits) > limit:
        payload["truncated"] = True
    _emit(payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_checks(level: str):
    corrupt = os.environ.get("CSLINK_VERIFY_CORRUPT") == "1"
    poison = 1e-3 if corrupt else 0.0
    checks = []

    def add(name, expected, computed, tol):
        checks.append({
            "name": name,
            "expected": expected,
            "computed": computed,
            "tolerance": tol,
            "pass": bool(abs(computed - expected) <= tol),
        })

    k0 = kernel.normalization(0)
    add("N_0 = 1/(4 pi)", 1.0 / (4.0 * math.pi) + poison, k0.n_l, 1e-13 / (4.0 * math.pi))
    add("S_2 = 4 pi", 4.0 * math.pi + poison, kernel.sphere_surface(2), 4e-13 * math.pi)
    add("S_6 = 16 pi^3 / 15", 16.0 * math.pi**3 / 15.0 + poison,
        kernel.sphere_surface(6), 1e-13 * 16 * math.pi**3)
    for l in (0, 1, 2):
        numeric, exact = kernel.radial_integral_check(l)
        add(f"radial integral l={l}", exact + poison, numeric, 1e-10)
    add("determinant vs component prefactor", k0.det_form_prefactor + poison,
        k0.component_form_prefactor, 1e-15)

    rng = np.random.default_rng(11)
    circle = cycles.unit_circle_xy(1.0)
    line_in = cycles.vertical_line_z(0.5)
    line_out = cycles.vertical_line_z(2.0)
    s = rng.uniform(0, 2 * math.pi, size=(200, 1))
    t = rng.uniform(-1.2, 1.2, size=(200, 1))
    g = kernel.gauss_integrand(circle, line_in, s, t)
    p = kernel.propagator_integrand(circle, line_in, s, t)
    ratio_dev = float(np.max(np.abs(p / g * k0.s_4l2 - 1.0)))
    add("contraction/determinant ratio constancy", 0.0 + poison, ratio_dev, 1e-10)

    spec0 = QuadratureSpec.default_for(0)
    linked = linking.gauss_linking(circle, line_in, spec0)
    unlinked = linking.gauss_linking(circle, line_out, spec0)
    ft = linking.field_theory_linking(circle, line_in, spec0)
    add("circle+line(0.5) linking", 1.0 + poison, linked.raw.value, 1e-6)
    add("circle+line(2.0) linking", 0.0 + poison, unlinked.raw.value, 1e-6)
    add("two-path agreement (l=0)", 0.0 + poison, abs(linked.raw.value - ft.raw.value), 1e-8)
    add("intersection oracle (linked)", 1 + poison,
        linking.intersection_oracle_3d(circle, line_in), 0.0)
    add("intersection oracle (unlinked)", 0 + poison,
        linking.intersection_oracle_3d(circle, line_out), 0.0)

    add("boundary scan empty when linked", 0 + poison,
        len(linking.zodiacus_boundary_scan(circle, line_in, grid=256, tol=1e-3)), 0.0)
    add("boundary scan nonempty when unlinked", 1 + poison,
        min(1, len(linking.zodiacus_boundary_scan(circle, line_out, grid=256, tol=1e-3))), 0.0)

    hopf = csinvariant.expectation_value(
        csinvariant.ChargeVector((1, 1)),
        csinvariant.LinkingMatrix(((0, 1), (1, 0))),
        csinvariant.Level(1), csinvariant.ManifoldDescriptor.sphere(),
        csinvariant.HomologyVector(()))
    add("two-loop phase q=(1,1)", 0.5 + poison, float(hopf.phase.fraction), 0.0)
    doubled = csinvariant.expectation_value(
        csinvariant.ChargeVector((2, 2)),
        csinvariant.LinkingMatrix(((0, 1), (1, 0))),
        csinvariant.Level(1), csinvariant.ManifoldDescriptor.sphere(),
        csinvariant.HomologyVector(()))
    add("two-loop phase q=(2,2)", 0.0 + poison, float(doubled.phase.fraction), 0.0)

    ok = 0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        mat = rng.integers(-10, 11, size=(n, n))
        mat = mat + mat.T
        np.fill_diagonal(mat, 0)
        q = csinvariant.ChargeVector(tuple(int(x) for x in rng.integers(-20, 21, size=n)))
        k = csinvariant.Level(int(rng.choice([-5, -3, -2, -1, 1, 2, 3, 5])))
        ok += csinvariant.nilpotency_invariance_check(
            q, csinvariant.LinkingMatrix(tuple(tuple(int(x) for x in row) for row in mat)),
            k, csinvariant.ManifoldDescriptor.sphere(), csinvariant.HomologyVector(()))
    add("charge-period invariance (50 random links)", 50 + poison, ok, 0.0)

    if level == "full":
        sphere = cycles.round_sphere(1, 1.0)
        plane = cycles.orthogonal_hyperplane(1)
        spec1 = QuadratureSpec.default_for(1)
        high = linking.gauss_linking(sphere, plane, spec1)
        high_ft = linking.field_theory_linking(sphere, plane, spec1)
        add("sphere+hyperplane (l=1) linking", 1.0 + poison, high.raw.value, 1e-3)
        add("two-path agreement (l=1)", 0.0 + poison,
            abs(high.raw.value - high_ft.raw.value), 1e-8)
        mc_spec = QuadratureSpec(method="monte_carlo", sample_budget=10**7, seed=20,
                                 target_rel_error=0.4)
        mc = linking.gauss_linking(sphere, plane, mc_spec)
        sigmas = abs(mc.raw.value - high.raw.value) / max(mc.raw.error_estimate, 1e-300)
        add("Monte Carlo cross-check (l=1, sigmas)", 0.0 + poison, sigmas, 3.0)

    return checks


def _cmd_verify(args) -> int:
    checks = _verify_checks(args.level)
    passed = all(c["pass"] for c in checks)
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        line = (f"{c['name']:<{width}}  expected={c['expected']:< 22.15g} "
                f"computed={c['computed']:< 22.15g} tol={c['tolerance']:<9.3g} "
                f"{'PASS' if c['pass'] else 'FAIL'}")
        print(line, file=sys.stderr)
    print(f"verify[{args.level}]: {'all checks passed' if passed else 'FAILURES detected'}",
          file=sys.stderr)
    constants = [kernel.normalization(l).to_json() for l in (0, 1, 2)]
    _emit({"level": args.level, "passed": passed, "constants": constants, "checks": checks})
    return EXIT_OK if passed else EXIT_INPUT


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_quadrature_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["tensor_trapezoid", "monte_carlo"], default=None)
    p.add_argument("--points", type=int, default=None, help="tensor points per dimension")
    p.add_argument("--budget", type=int, default=None, help="Monte Carlo sample budget")
    p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    p.add_argument("--tol", type=float, default=None, help="relative convergence target")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cslink",
        description="Linking numbers of odd-dimensional cycles and exact "
                    "abelian Chern-Simons Wilson-loop phases.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_link = sub.add_parser("link", help="linking number of two cycles, both integral routes")
    p_link.add_argument("config", help="JSON file with two cycles and quadrature options")
    _add_quadrature_flags(p_link)
    p_link.set_defaults(func=_cmd_link)

    p_self = sub.add_parser("selflink", help="framed self-linking of one cycle")
    p_self.add_argument("config")
    _add_quadrature_flags(p_self)
    p_self.set_defaults(func=_cmd_selflink)

    p_wilson = sub.add_parser("wilson", help="exact Wilson-loop expectation value")
    p_wilson.add_argument("config", help="JSON link descriptor")
    p_wilson.set_defaults(func=_cmd_wilson)

    p_zod = sub.add_parser("zodiacus", help="scan for boundary points of the direction sweep")
    p_zod.add_argument("config")
    p_zod.add_argument("--grid", type=int, default=None, help="scan nodes per dimension")
    p_zod.add_argument("--tol", type=float, default=None, help="vanishing threshold")
    p_zod.set_defaults(func=_cmd_zodiacus)

    p_verify = sub.add_parser("verify", help="run the built-in verification table")
    p_verify.add_argument("--level", choices=["quick", "full"], default="quick")
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SingularityError as exc:
        print(f"error: cycles intersect: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, QuantizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CslinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
