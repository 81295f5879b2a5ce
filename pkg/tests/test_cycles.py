import numpy as np
import pytest

from cslink import (InputError, from_json, orthogonal_hyperplane, reverse_orientation,
                    round_sphere, transform, unit_circle_xy, vertical_line_z)
from cslink.quadrature import chart_grid

ALL_CANONICAL = [
    unit_circle_xy(1.0),
    unit_circle_xy(2.5, offset=(1.0, -2.0, 0.5)),
    vertical_line_z(0.5),
    round_sphere(1, 1.0),
    orthogonal_hyperplane(1),
]


def test_circle_anchor_points():
    c = unit_circle_xy(1.0)
    np.testing.assert_allclose(c.point([0.0])[0], [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(c.tangent_frames([0.0])[0, :, 0], [0.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(c.point([np.pi])[0], [-1.0, 0.0, 0.0], atol=1e-12)


def test_circle_arc_length():
    c = unit_circle_xy(1.0)
    nodes, weights = chart_grid(c.chart.domain, 256)
    speed = np.linalg.norm(c.tangent_frames(nodes)[:, :, 0], axis=1)
    assert abs(speed @ weights - 2 * np.pi) < 1e-10


def test_circle_rejects_bad_radius():
    with pytest.raises(InputError):
        unit_circle_xy(0.0)
    with pytest.raises(InputError):
        unit_circle_xy(-1.0)


def test_line_anchor_points():
    ln = vertical_line_z(0.5)
    np.testing.assert_allclose(ln.point([0.0])[0], [0.0, 0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(ln.tangent_frames([0.0])[0, :, 0], [0.0, 0.0, 1.0], atol=1e-15)
    far = ln.point([[np.pi / 2 - 1e-6]])[0]
    assert far[2] > 1e5


def test_sphere_l0_matches_circle():
    s = round_sphere(0, 1.0)
    params = np.linspace(0.1, 6.2, 40).reshape(-1, 1)
    x = s.point(params)
    assert np.max(np.abs(x[:, 0] ** 2 + x[:, 1] ** 2 - 1.0)) < 1e-12
    assert np.max(np.abs(x[:, 2])) == 0.0


def test_sphere_l1_quadric():
    s = round_sphere(1, 1.0)
    rng = np.random.default_rng(3)
    p = rng.uniform([0.1, 0.1, 0.1], [3.0, 3.0, 6.1], size=(200, 3))
    x = s.point(p)
    assert np.max(np.abs(np.sum(x[:, :4] ** 2, axis=1) - 1.0)) < 1e-12
    assert np.max(np.abs(x[:, 4:])) == 0.0


def test_sphere_l1_surface_content():
    # Gram-determinant quadrature against the closed form 2 pi^2
    s = round_sphere(1, 1.0)
    nodes, weights = chart_grid(s.chart.domain, 48)
    frames = s.tangent_frames(nodes)
    gram = np.einsum("mni,mnj->mij", frames, frames)
    area = np.sqrt(np.linalg.det(gram)) @ weights
    assert abs(area - 2 * np.pi**2) < 1e-8


def test_hyperplane_l0_is_z_axis():
    hp = orthogonal_hyperplane(0)
    ln = vertical_line_z(0.0)
    params = np.linspace(-1.2, 1.2, 17).reshape(-1, 1)
    np.testing.assert_allclose(hp.point(params), ln.point(params), atol=1e-15)


def test_hyperplane_l1_coordinates():
    hp = orthogonal_hyperplane(1)
    rng = np.random.default_rng(4)
    p = rng.uniform(-1.4, 1.4, size=(100, 3))
    y = hp.point(p)
    assert np.max(np.abs(y[:, :4])) == 0.0
    np.testing.assert_allclose(hp.point([[0.0, 0.0, 0.0]])[0], np.zeros(7), atol=1e-15)


def test_transform_identity_and_translation():
    c = unit_circle_xy(1.0)
    same = transform(c)
    p = np.linspace(0, 6.0, 11).reshape(-1, 1)
    np.testing.assert_array_equal(same.point(p), c.point(p))
    moved = transform(c, translation=(5.0, 0.0, 0.0))
    np.testing.assert_allclose(moved.point([0.0])[0], [6.0, 0.0, 0.0], atol=1e-15)


def test_transform_scale_doubles_tangents():
    c = unit_circle_xy(1.0)
    doubled = transform(c, scale=2.0)
    p = np.linspace(0, 6.0, 7).reshape(-1, 1)
    np.testing.assert_allclose(doubled.tangent_frames(p), 2.0 * c.tangent_frames(p), rtol=1e-15)


def test_transform_rejects_non_orthogonal():
    c = unit_circle_xy(1.0)
    bad = np.eye(3)
    bad[0, 1] = 1e-6
    with pytest.raises(InputError):
        transform(c, rotation=bad)
    with pytest.raises(InputError):
        transform(c, scale=0.0)
    reflection = np.diag([-1.0, 1.0, 1.0])
    with pytest.raises(InputError):
        transform(c, rotation=reflection)


def test_reverse_orientation_is_involution():
    c = unit_circle_xy(1.0)
    assert c.orientation == 1
    assert reverse_orientation(c).orientation == -1
    assert reverse_orientation(reverse_orientation(c)).orientation == 1


@pytest.mark.parametrize("cycle", ALL_CANONICAL, ids=lambda c: c.label)
def test_evaluators_are_pure(cycle):
    rng = np.random.default_rng(5)
    dom = cycle.chart.domain
    lo, hi = np.asarray(dom.lower), np.asarray(dom.upper)
    p = rng.uniform(lo + 0.01, hi - 0.01, size=(32, dom.dim))
    assert np.array_equal(cycle.point(p), cycle.point(p))
    assert np.array_equal(cycle.tangent_frames(p), cycle.tangent_frames(p))


@pytest.mark.parametrize("cycle", ALL_CANONICAL, ids=lambda c: c.label)
def test_torus_periodicity(cycle):
    dom = cycle.chart.domain
    for j, per in enumerate(dom.periodic):
        if not per:
            continue
        rng = np.random.default_rng(6)
        base = rng.uniform(np.asarray(dom.lower) + 0.2, np.asarray(dom.upper) - 0.2,
                           size=(8, dom.dim))
        left = base.copy()
        right = base.copy()
        left[:, j] = dom.lower[j]
        right[:, j] = dom.upper[j]
        assert np.max(np.abs(cycle.point(left) - cycle.point(right))) < 1e-12


@pytest.mark.parametrize("cycle", ALL_CANONICAL + [transform(
    unit_circle_xy(1.0),
    rotation=[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    translation=(0.3, -0.2, 1.0), scale=1.7)],
    ids=lambda c: c.label)
def test_tangents_match_finite_differences(cycle):
    rng = np.random.default_rng(7)
    dom = cycle.chart.domain
    lo, hi = np.asarray(dom.lower), np.asarray(dom.upper)
    span = hi - lo
    p = rng.uniform(lo + 0.05 * span, hi - 0.05 * span, size=(100, dom.dim))
    frames = cycle.tangent_frames(p)
    h = 1e-6
    for j in range(dom.dim):
        plus = p.copy()
        minus = p.copy()
        plus[:, j] += h
        minus[:, j] -= h
        fd = (cycle.point(plus) - cycle.point(minus)) / (2 * h)
        scale = np.maximum(np.linalg.norm(frames[:, :, j], axis=1), 1e-12)
        rel = np.linalg.norm(frames[:, :, j] - fd, axis=1) / scale
        assert np.max(rel) < 1e-6


def test_sphere_tangents_finite_at_degenerate_angles():
    # azimuth exactly pi and polar angles at the chart edge must stay finite
    s = round_sphere(1, 1.0)
    frames = s.tangent_frames([[0.3, 0.2, np.pi], [0.0, 1.0, 2.0], [np.pi, 0.5, np.pi]])
    assert np.all(np.isfinite(frames))
    h = 1e-6
    p = np.array([[0.3, 0.2, np.pi]])
    for j in range(3):
        plus, minus = p.copy(), p.copy()
        plus[0, j] += h
        minus[0, j] -= h
        fd = (s.point(plus) - s.point(minus))[0] / (2 * h)
        np.testing.assert_allclose(s.tangent_frames(p)[0, :, j], fd, atol=1e-9)
    circle_like = round_sphere(0, 1.0)
    np.testing.assert_allclose(circle_like.tangent_frames([[0.0]])[0, :, 0],
                               [0.0, 1.0, 0.0], atol=1e-15)


def test_from_json_all_kinds():
    configs = [
        {"kind": "circle", "radius": 2.0, "offset": [0, 0, 1]},
        {"kind": "line", "y_offset": 0.5},
        {"kind": "sphere", "l": 1, "radius": 1.0},
        {"kind": "hyperplane", "l": 1},
        {"kind": "transformed", "base": {"kind": "circle"}, "translation": [1, 0, 0]},
        {"kind": "circle", "reversed": True},
    ]
    for cfg in configs:
        from_json(cfg)
    assert from_json({"kind": "circle", "reversed": True}).orientation == -1


def test_from_json_rejects_garbage():
    with pytest.raises(InputError):
        from_json({"kind": "torus"})
    with pytest.raises(InputError):
        from_json({"kind": "circle", "radius": -2.0})
    with pytest.raises(InputError):
        from_json({"kind": "transformed"})
    with pytest.raises(InputError):
        from_json([1, 2, 3])


def test_high_l_is_flagged():
    with pytest.warns(UserWarning):
        round_sphere(3, 1.0)
