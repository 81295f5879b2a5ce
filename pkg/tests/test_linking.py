import numpy as np
import pytest

from cslink import (DegenerateCrossingError, Framing, FramingInstabilityError, InputError,
                    QuadratureSpec, SingularityError, field_theory_linking, gauss_linking,
                    intersection_oracle_3d, pushoff, reverse_orientation, self_linking,
                    transform, unit_circle_xy, vertical_line_z, zodiacus_boundary_scan)
from conftest import random_rotation


def radial_normal(p):
    out = np.zeros((p.shape[0], 3))
    out[:, 0] = np.cos(p[:, 0])
    out[:, 1] = np.sin(p[:, 0])
    return out


def constant_z(p):
    out = np.zeros((p.shape[0], 3))
    out[:, 2] = 1.0
    return out


def test_gauss_linking_linked(circle, line_linked, spec0):
    res = gauss_linking(circle, line_linked, spec0)
    assert res.rounded == 1
    assert res.residual < 1e-3
    assert res.raw.converged


def test_gauss_linking_unlinked(circle, line_unlinked, spec0):
    res = gauss_linking(circle, line_unlinked, spec0)
    assert res.rounded == 0
    assert abs(res.raw.value) < 1e-6


def test_field_theory_agrees(circle, line_linked, line_unlinked, spec0):
    g = gauss_linking(circle, line_linked, spec0)
    ft = field_theory_linking(circle, line_linked, spec0)
    assert abs(g.raw.value - ft.raw.value) < 1e-8
    assert field_theory_linking(circle, line_unlinked, spec0).rounded == 0


def test_orientation_reversal_negates(circle, line_linked, spec0):
    base = gauss_linking(circle, line_linked, spec0)
    rev = gauss_linking(reverse_orientation(circle), line_linked, spec0)
    assert rev.raw.value == pytest.approx(-base.raw.value, abs=1e-12)
    rev2 = field_theory_linking(reverse_orientation(circle), line_linked, spec0)
    assert rev2.rounded == -1
    both = gauss_linking(reverse_orientation(circle), reverse_orientation(line_linked), spec0)
    assert both.rounded == 1


def test_symmetry_under_argument_swap(circle, line_linked, spec0):
    a = gauss_linking(circle, line_linked, spec0)
    b = gauss_linking(line_linked, circle, spec0)
    assert abs(a.raw.value - b.raw.value) <= a.raw.error_estimate + b.raw.error_estimate + 1e-9


def test_rigid_motion_invariance(circle, line_linked, spec0):
    rng = np.random.default_rng(12)
    ref = gauss_linking(circle, line_linked, spec0).raw.value
    for _ in range(10):
        rot = random_rotation(rng, 3)
        tr = rng.normal(scale=2.0, size=3)
        a = transform(circle, rotation=rot, translation=tr)
        b = transform(line_linked, rotation=rot, translation=tr)
        moved = gauss_linking(a, b, spec0).raw.value
        assert moved == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_scale_invariance(circle, line_linked, spec0, lam):
    ref = gauss_linking(circle, line_linked, spec0).raw.value
    a = transform(circle, scale=lam)
    b = transform(line_linked, scale=lam)
    assert gauss_linking(a, b, spec0).raw.value == pytest.approx(ref, rel=1e-6)


def test_mixed_l_rejected(circle):
    from cslink import orthogonal_hyperplane

    with pytest.raises(InputError):
        gauss_linking(circle, orthogonal_hyperplane(1))


def test_touching_cycles_raise(circle):
    with pytest.raises(SingularityError):
        gauss_linking(circle, vertical_line_z(1.0))


def test_close_cycles_warn(circle):
    with pytest.warns(UserWarning, match="close"):
        gauss_linking(circle, vertical_line_z(0.999), QuadratureSpec(points_per_dim=64))


# ---------------------------------------------------------------------------
# framing
# ---------------------------------------------------------------------------

def test_pushoff_radial_grows_radius(circle):
    pushed = pushoff(circle, Framing.push(radial_normal, 0.1))
    p = np.linspace(0, 6.2, 17).reshape(-1, 1)
    x = pushed.point(p)
    assert np.max(np.abs(np.linalg.norm(x[:, :2], axis=1) - 1.1)) < 1e-12


def test_pushoff_constant_lifts(circle):
    pushed = pushoff(circle, Framing.push(constant_z, 0.1))
    x = pushed.point([[0.3]])[0]
    assert x[2] == pytest.approx(0.1)
    np.testing.assert_allclose(x[:2], circle.point([[0.3]])[0][:2], atol=1e-15)


def test_pushoff_rejects_bad_framings(circle):
    with pytest.raises(InputError):
        Framing.push(constant_z, 0.0)
    with pytest.raises(InputError):
        pushoff(circle, Framing.zero())
    not_unit = lambda p: 2.0 * constant_z(p)
    with pytest.raises(InputError):
        pushoff(circle, Framing.push(not_unit, 0.1))
    not_orthogonal = lambda p: np.tile([0.0, 1.0, 0.0], (p.shape[0], 1))
    with pytest.raises(InputError):
        pushoff(circle, Framing.push(not_orthogonal, 0.1))


def test_self_linking_zero_regularization(circle):
    assert self_linking(circle, Framing.zero()) == 0
    assert self_linking(reverse_orientation(circle), Framing.zero()) == 0


def test_self_linking_vertical_pushoff(circle):
    spec = QuadratureSpec(points_per_dim=1024)
    framing = Framing.push(constant_z, 0.05)
    assert self_linking(circle, framing, spec) == 0
    # independent check: the lifted copy never crosses the spanning disk
    assert intersection_oracle_3d(circle, pushoff(circle, framing)) == 0
    assert self_linking(reverse_orientation(circle), framing, spec) == 0


def test_self_linking_radial_pushoff(circle):
    spec = QuadratureSpec(points_per_dim=1024)
    assert self_linking(circle, Framing.push(radial_normal, 0.1), spec) == 0


def spiral_normal(p):
    # one full turn of the normal per revolution: nu = cos(s) r_hat + sin(s) z_hat
    s = p[:, 0]
    return np.stack([np.cos(s) * np.cos(s), np.cos(s) * np.sin(s), np.sin(s)], axis=1)


def test_self_linking_spiral_framing(circle):
    # below the singular offset (epsilon = 2) the spiral push-off winds once
    spec = QuadratureSpec(points_per_dim=512)
    assert abs(self_linking(circle, Framing.push(spiral_normal, 0.2), spec)) == 1


def test_self_linking_instability_detected(circle):
    # epsilon = 2.5 and epsilon/2 = 1.25 straddle the singular transition at 2,
    # where the pushed copy crosses the core: the rounded integers disagree
    spec = QuadratureSpec(points_per_dim=512)
    with pytest.raises(FramingInstabilityError):
        self_linking(circle, Framing.push(spiral_normal, 2.5), spec)


# ---------------------------------------------------------------------------
# boundary scan
# ---------------------------------------------------------------------------

def test_zodiacus_empty_when_linked(circle, line_linked):
    assert zodiacus_boundary_scan(circle, line_linked, grid=256, tol=1e-3) == []


def test_zodiacus_hits_match_prediction(circle, line_unlinked):
    hits = zodiacus_boundary_scan(circle, line_unlinked, grid=256, tol=1e-3)
    assert hits
    # stationarity condition 1 - y sin(s) = 0 at y = 2
    best = min(abs(1.0 - 2.0 * np.sin(s[0])) for s, _ in hits)
    assert best < 2e-2


def test_zodiacus_coplanar_far_circles(circle):
    far = transform(circle, translation=(10.0, 0.0, 0.0))
    hits = zodiacus_boundary_scan(circle, far, grid=24, tol=1e-3)
    # all tangents and the direction vector share the plane: every node is stationary
    assert len(hits) == 24 * 24


# ---------------------------------------------------------------------------
# intersection oracle
# ---------------------------------------------------------------------------

def test_oracle_counts_signed_crossings(circle, line_linked, line_unlinked):
    assert intersection_oracle_3d(circle, line_linked) == 1
    assert intersection_oracle_3d(circle, line_unlinked) == 0
    assert intersection_oracle_3d(circle, reverse_orientation(line_linked)) == -1
    assert intersection_oracle_3d(reverse_orientation(circle), line_linked) == -1


def test_oracle_transformed_disk(line_linked):
    grown = transform(unit_circle_xy(1.0), scale=2.0)
    assert intersection_oracle_3d(grown, line_linked) == 1


def test_oracle_rejects_boundary_graze(circle):
    with pytest.raises(DegenerateCrossingError):
        intersection_oracle_3d(circle, vertical_line_z(1.0))


def test_oracle_rejects_tangential_crossing(circle):
    # a nearly in-plane circle crosses the disk plane at a vanishing angle
    beta = 5e-5
    rot = np.array([[1.0, 0.0, 0.0],
                    [0.0, np.cos(beta), -np.sin(beta)],
                    [0.0, np.sin(beta), np.cos(beta)]])
    flat = transform(unit_circle_xy(1.0), rotation=rot, translation=(0.3, 0.0, 0.0))
    with pytest.raises(DegenerateCrossingError):
        intersection_oracle_3d(circle, flat)


def test_oracle_requires_planar_circle(circle, line_linked):
    with pytest.raises(InputError):
        intersection_oracle_3d(line_linked, circle)
