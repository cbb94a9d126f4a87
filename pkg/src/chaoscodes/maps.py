"""Tent map and folded baker's map kernels.

All kernels accept scalars or numpy arrays and are pure. ``sign(0)`` is
taken as ``+1`` everywhere, which matches the ``x >= 0`` branch of the
baker's map.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

DOMAIN_TOL = 1e-9


class DomainError(ValueError):
    """Raised when a map is evaluated outside its state space."""


class PlanePoint(NamedTuple):
    x: float
    y: float


def _check_beta(beta: float) -> None:
    if not 1.0 < beta <= 2.0:
        raise ValueError(f"tent slope beta must satisfy 1 < beta <= 2, got {beta}")


def _check_range(v, lo: float, hi: float, what: str) -> None:
    arr = np.asarray(v, dtype=float)
    if np.any(arr < lo - DOMAIN_TOL) or np.any(arr > hi + DOMAIN_TOL) or np.any(np.isnan(arr)):
        raise DomainError(f"{what} outside [{lo}, {hi}]")


def sign(x):
    """Sign with the tie-break ``sign(0) = +1``."""
    out = np.where(np.asarray(x) >= 0, 1, -1)
    return int(out) if out.ndim == 0 else out


def tent_forward(x, beta: float = 2.0):
    _check_beta(beta)
    _check_range(x, -1.0, beta - 1.0, "tent input")
    out = beta - 1.0 - beta * np.abs(x)
    return float(out) if np.ndim(out) == 0 else out


def tent_inverse(x_next, s, beta: float = 2.0, *, strict: bool = True):
    """Preimage of ``x_next`` on the branch with sign ``s``.

    With ``strict=False`` the affine inverse is applied without a domain
    check (used when propagating noisy observations backwards).
    """
    _check_beta(beta)
    if strict:
        _check_range(x_next, -1.0, beta - 1.0, "tent inverse input")
    if np.ndim(x_next) or np.ndim(s):
        return np.asarray(s) * (beta - 1.0 - np.asarray(x_next, dtype=float)) / beta
    return s * (beta - 1.0 - float(x_next)) / beta


def tent_orbit(x0, n: int, beta: float = 2.0) -> np.ndarray:
    """Orbit ``(x_0, ..., x_{n-1})``; for array seeds the orbit runs along the last axis."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    x = np.asarray(x0, dtype=float)
    _check_range(x, -1.0, beta - 1.0, "tent seed")
    out = np.empty(x.shape + (n,))
    out[..., 0] = x
    for i in range(1, n):
        x = tent_forward(x, beta)
        out[..., i] = x
    return out


def symbolic_coding(orbit) -> np.ndarray:
    """Signs of ``orbit[..., :-1]``; the last state's sign is never used by the codes."""
    orbit = np.asarray(orbit, dtype=float)
    if orbit.shape[-1] < 2:
        raise ValueError("symbolic coding needs an orbit of length >= 2")
    return np.where(orbit[..., :-1] >= 0, 1, -1)


def baker_forward(x, y):
    """One step of the folded baker's map on ``[-1, 1]^2``; returns ``(x', y')``."""
    _check_range(x, -1.0, 1.0, "baker x")
    _check_range(y, -1.0, 1.0, "baker y")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    neg = x < 0
    xn = np.where(neg, 2.0 * x + 1.0, 1.0 - 2.0 * x)
    yn = np.where(neg, 0.5 * y - 0.5, 0.5 - 0.5 * y)
    if xn.ndim == 0:
        return PlanePoint(float(xn), float(yn))
    return xn, yn


def baker_orbit(seed_x, seed_y, n: int) -> np.ndarray:
    """Orbit of the baker's map, shape ``seed.shape + (n, 2)`` with ``[..., i, :] = (x_i, y_i)``."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    x = np.asarray(seed_x, dtype=float)
    y = np.asarray(seed_y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape + (n, 2))
    out[..., 0, 0] = x
    out[..., 0, 1] = y
    for i in range(1, n):
        x, y = baker_forward(x, y)
        out[..., i, 0] = x
        out[..., i, 1] = y
    return out
