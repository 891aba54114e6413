"""Fundamental solutions of the Stokes equations (unit viscosity)."""

from __future__ import annotations

import numpy as np

_COINCIDENT_TOL = 1e-14


def stokeslet(x, y) -> np.ndarray:
    """Single-layer kernel G_ij = (1/8pi)(delta_ij/r + r_i r_j / r^3), r = x - y."""
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    dist = np.linalg.norm(r)
    if dist < _COINCIDENT_TOL:
        raise ValueError("stokeslet is singular at coincident points")
    return (np.eye(3) / dist + np.outer(r, r) / dist ** 3) / (8.0 * np.pi)


def stresslet(x, y, n) -> np.ndarray:
    """Contracted double-layer kernel T_ijk n_k = -(3/4pi) r_i r_j (r.n) / r^5."""
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    dist = np.linalg.norm(r)
    if dist < _COINCIDENT_TOL:
        raise ValueError("stresslet is singular at coincident points")
    return -(3.0 / (4.0 * np.pi)) * np.outer(r, r) * np.dot(r, n) / dist ** 5


def stokeslet_batch(r: np.ndarray) -> np.ndarray:
    """Vectorized stokeslet for difference vectors r of shape (..., 3)."""
    dist = np.sqrt(np.sum(r * r, axis=-1))
    inv = 1.0 / dist
    inv3 = inv ** 3
    out = r[..., :, None] * r[..., None, :] * inv3[..., None, None]
    idx = np.arange(3)
    out[..., idx, idx] += inv[..., None]
    out *= 1.0 / (8.0 * np.pi)
    return out


def stresslet_batch(r: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vectorized contracted stresslet; r and n broadcastable to (..., 3)."""
    dist = np.sqrt(np.sum(r * r, axis=-1))
    rn = np.sum(r * n, axis=-1)
    coef = -(3.0 / (4.0 * np.pi)) * rn / dist ** 5
    return coef[..., None, None] * (r[..., :, None] * r[..., None, :])
