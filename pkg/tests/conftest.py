import numpy as np
import pytest

from cslink import QuadratureSpec, unit_circle_xy, vertical_line_z


@pytest.fixture(scope="session")
def circle():
    return unit_circle_xy(1.0)


@pytest.fixture(scope="session")
def line_linked():
    return vertical_line_z(0.5)


@pytest.fixture(scope="session")
def line_unlinked():
    return vertical_line_z(2.0)


@pytest.fixture(scope="session")
def spec0():
    return QuadratureSpec.default_for(0)


def random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish special-orthogonal matrix from the QR of a Gaussian sample."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
