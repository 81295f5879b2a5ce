"""Backend selection for the pairwise reduction kernels.

CSLINK_BACKEND chooses the implementation: "numba" (compiled, parallel),
"numpy" (pure-numpy blocked fallback) or "auto" (numba when importable,
default).  CSLINK_THREADS caps the numba worker count.  Both backends use
fixed evaluation and reduction orders, so repeated runs are bit-identical.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

from .errors import InputError

_BLOCK_A = 32
_BLOCK_B = 2048
_PAIR_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# pure-numpy fallback
# ---------------------------------------------------------------------------

def _rho_groups(ix, iy, rho, sign):
    groups = []
    for r in np.unique(rho):
        sel = rho == r
        groups.append((int(r), ix[sel], iy[sel], sign[sel]))
    return groups


def _np_grid_reduce_det(X, JX, WX, Y, JY, WY, l):
    m1, n = X.shape
    m2 = Y.shape[0]
    p = JX.shape[2]
    expo = 2 * l + 1
    partials = np.zeros(m1)
    min_r2 = np.full(m1, np.inf)
    for a0 in range(0, m1, _BLOCK_A):
        a1 = min(a0 + _BLOCK_A, m1)
        for b0 in range(0, m2, _BLOCK_B):
            b1 = min(b0 + _BLOCK_B, m2)
            d = X[a0:a1, None, :] - Y[None, b0:b1, :]
            r2 = np.einsum("abn,abn->ab", d, d)
            np.minimum(min_r2[a0:a1], r2.min(axis=1), out=min_r2[a0:a1])
            mats = np.empty((a1 - a0, b1 - b0, n, n))
            mats[:, :, :, :p] = JX[a0:a1, None, :, :]
            mats[:, :, :, p:2 * p] = JY[None, b0:b1, :, :]
            mats[:, :, :, n - 1] = d
            dets = np.linalg.det(mats.reshape(-1, n, n)).reshape(a1 - a0, b1 - b0)
            with np.errstate(divide="ignore", invalid="ignore"):
                # coincident points yield inf/nan here; the caller checks
                # min_r2 against the singularity floor and raises first
                partials[a0:a1] += (dets / (r2**expo * np.sqrt(r2))) @ WY[b0:b1]
    return partials * WX, min_r2


def _np_grid_reduce_minor(X, MX, WX, Y, MY, WY, ix, iy, rho, sign, l):
    m1 = X.shape[0]
    m2 = Y.shape[0]
    expo = 2 * l + 1
    groups = _rho_groups(ix, iy, rho, sign)
    partials = np.zeros(m1)
    min_r2 = np.full(m1, np.inf)
    for a0 in range(0, m1, _BLOCK_A):
        a1 = min(a0 + _BLOCK_A, m1)
        for b0 in range(0, m2, _BLOCK_B):
            b1 = min(b0 + _BLOCK_B, m2)
            d = X[a0:a1, None, :] - Y[None, b0:b1, :]
            r2 = np.einsum("abn,abn->ab", d, d)
            np.minimum(min_r2[a0:a1], r2.min(axis=1), out=min_r2[a0:a1])
            contr = np.zeros((a1 - a0, b1 - b0))
            for r, gx, gy, gs in groups:
                contr += ((MX[a0:a1][:, gx] * gs) @ MY[b0:b1][:, gy].T) * d[:, :, r]
            with np.errstate(divide="ignore", invalid="ignore"):
                partials[a0:a1] += (contr / (r2**expo * np.sqrt(r2))) @ WY[b0:b1]
    return partials * WX, min_r2


def _np_pairs_det(X, JX, Y, JY, l):
    m, n = X.shape
    p = JX.shape[2]
    expo = 2 * l + 1
    vals = np.empty(m)
    min_r2 = np.full(m, np.inf)
    for c0 in range(0, m, _PAIR_CHUNK):
        c1 = min(c0 + _PAIR_CHUNK, m)
        d = X[c0:c1] - Y[c0:c1]
        r2 = np.einsum("an,an->a", d, d)
        min_r2[c0:c1] = r2
        mats = np.empty((c1 - c0, n, n))
        mats[:, :, :p] = JX[c0:c1]
        mats[:, :, p:2 * p] = JY[c0:c1]
        mats[:, :, n - 1] = d
        with np.errstate(divide="ignore", invalid="ignore"):
            vals[c0:c1] = np.linalg.det(mats) / (r2**expo * np.sqrt(r2))
    return vals, min_r2


def _np_pairs_minor(X, MX, Y, MY, ix, iy, rho, sign, l):
    m = X.shape[0]
    expo = 2 * l + 1
    groups = _rho_groups(ix, iy, rho, sign)
    vals = np.empty(m)
    min_r2 = np.full(m, np.inf)
    for c0 in range(0, m, _PAIR_CHUNK):
        c1 = min(c0 + _PAIR_CHUNK, m)
        d = X[c0:c1] - Y[c0:c1]
        r2 = np.einsum("an,an->a", d, d)
        min_r2[c0:c1] = r2
        contr = np.zeros(c1 - c0)
        for r, gx, gy, gs in groups:
            contr += np.einsum("at,at->a", MX[c0:c1][:, gx] * gs, MY[c0:c1][:, gy]) * d[:, r]
        with np.errstate(divide="ignore", invalid="ignore"):
            vals[c0:c1] = contr / (r2**expo * np.sqrt(r2))
    return vals, min_r2


_NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    grid_reduce_det=_np_grid_reduce_det,
    grid_reduce_minor=_np_grid_reduce_minor,
    pairs_det=_np_pairs_det,
    pairs_minor=_np_pairs_minor,
)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

_numba_kernels = None
_numba_error = None


def _load_numba():
    global _numba_kernels, _numba_error
    if _numba_kernels is not None or _numba_error is not None:
        return
    try:
        from . import _kernels_numba as knb

        _numba_kernels = SimpleNamespace(
            name="numba",
            grid_reduce_det=knb.grid_reduce_det,
            grid_reduce_minor=knb.grid_reduce_minor,
            pairs_det=knb.pairs_det,
            pairs_minor=knb.pairs_minor,
        )
    except ImportError as exc:  # numba genuinely unavailable
        _numba_error = exc


def _apply_thread_cap():
    cap = os.environ.get("CSLINK_THREADS")
    if not cap:
        return
    import numba

    try:
        want = int(cap)
    except ValueError as exc:
        raise InputError(f"CSLINK_THREADS must be an integer, got {cap!r}") from exc
    numba.set_num_threads(max(1, min(want, numba.config.NUMBA_NUM_THREADS)))


def available_backends() -> tuple[str, ...]:
    _load_numba()
    return ("numba", "numpy") if _numba_kernels is not None else ("numpy",)


def active_backend() -> str:
    """Resolve CSLINK_BACKEND to the backend name used for the next kernel call."""
    choice = os.environ.get("CSLINK_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise InputError(f"CSLINK_BACKEND must be auto|numba|numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    _load_numba()
    if _numba_kernels is not None:
        return "numba"
    if choice == "numba":
        raise InputError(f"numba backend requested but unavailable: {_numba_error}")
    return "numpy"


def get_kernels():
    if active_backend() == "numba":
        _apply_thread_cap()
        return _numba_kernels
    return _NUMPY_KERNELS
