"""Positive real branch of Lambert's W function.

W is the inverse of w -> w e^w on [-1, inf). The solver runs Halley's
iteration on w e^w - t and switches to the square-root series about the
branch point t = -1/e, where the derivative of W is unbounded and Halley
loses digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SolverSettings",
    "LambertDomainError",
    "LambertConvergenceError",
    "lambert_w",
    "lambert_w_prime",
    "BRANCH_POINT",
]

BRANCH_POINT = -math.exp(-1.0)

# 1/e split into a double and its rounding error, so that t + 1/e is
# computed without cancellation near the branch point.
_INV_E_HI = math.exp(-1.0)
_INV_E_LO = -1.2428753672788363e-17

# Series of W about the branch point in p = sqrt(2 (e t + 1)).
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
)

_BRANCH_WINDOW = 1e-6


class LambertDomainError(ValueError):
    """Argument lies below the branch point of the positive branch."""


class LambertConvergenceError(ArithmeticError):
    """Halley iteration did not meet the residual bound."""


@dataclass(frozen=True)
class SolverSettings:
    """Controls for the W solver.

    Attributes
    ----------
    max_iterations : int
        Upper bound on Halley steps.
    abs_tol, rel_tol : float
        The returned w satisfies ``|w e^w - t| <= max(abs_tol, rel_tol |t|)``.
    """

    max_iterations: int = 50
    abs_tol: float = 1e-13
    rel_tol: float = 1e-13

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_SETTINGS = SolverSettings()


def _offset_from_branch(t):
    # t + 1/e, exact for t close to -1/e by Sterbenz' lemma
    return (t + _INV_E_HI) + _INV_E_LO


def _branch_p(t):
    d = np.maximum(_offset_from_branch(t), 0.0)
    return np.sqrt(2.0 * math.e * d)


def _branch_series(p, skip_constant=False):
    coeffs = _BRANCH_SERIES[1:] if skip_constant else _BRANCH_SERIES
    acc = np.zeros_like(p)
    for c in reversed(coeffs):
        acc = acc * p + c
    return acc * p if skip_constant else acc


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def lambert_w(t, settings: SolverSettings = DEFAULT_SETTINGS):
    """Evaluate the positive branch W(t) for t >= -1/e.

    Parameters
    ----------
    t : float or array_like
        Arguments. Values within ``abs_tol`` below -1/e are treated as the
        branch point.
    settings : SolverSettings
        Iteration limit and residual tolerances.

    Returns
    -------
    float or ndarray
        W(t), with exactly -1 at the branch point and exactly 0 at 0.

    Raises
    ------
    LambertDomainError
        If some t < -1/e - abs_tol or is not a number.
    LambertConvergenceError
        If the residual bound is not met within ``max_iterations``.
    """
    t, scalar = _as_array(t)
    flat = t.ravel()
    if np.any(np.isnan(flat)) or np.any(flat < BRANCH_POINT - settings.abs_tol):
        bad = flat[np.isnan(flat) | (flat < BRANCH_POINT - settings.abs_tol)][0]
        raise LambertDomainError(f"W undefined at t={bad!r} (below -1/e)")

    w = np.empty_like(flat)
    at_branch = flat <= BRANCH_POINT
    near = ~at_branch & (_offset_from_branch(flat) <= _BRANCH_WINDOW)
    zero = flat == 0.0
    inf = np.isposinf(flat)
    iterate = ~(at_branch | near | zero | inf)

    w[at_branch] = -1.0
    w[zero] = 0.0
    w[inf] = np.inf
    if np.any(near):
        w[near] = _branch_series(_branch_p(flat[near]))

    if np.any(iterate):
        w[iterate] = _halley(flat[iterate], settings)

    w = w.reshape(t.shape)
    return float(w) if scalar else w


def _initial_guess(t):
    guess = np.log1p(np.maximum(t, 0.0))
    neg = t < 0
    if np.any(neg):
        p = _branch_p(t[neg])
        guess[neg] = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    return guess


def _halley(t, settings):
    w = _initial_guess(t)
    active = np.ones(t.shape, dtype=bool)
    for _ in range(settings.max_iterations):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        wa, ta = w[idx], t[idx]
        ew = np.exp(wa)
        f = wa * ew - ta
        wp1 = wa + 1.0
        step = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        step = np.where(np.isfinite(step), step, 0.0)
        w[idx] = wa - step
        done = np.abs(step) <= 4.0 * np.finfo(float).eps * (1.0 + np.abs(w[idx]))
        active[idx[done]] = False

    residual = np.abs(w * np.exp(w) - t)
    bound = np.maximum(settings.abs_tol, settings.rel_tol * np.abs(t))
    failed = ~(residual <= bound)
    if np.any(failed):
        k = np.flatnonzero(failed)[0]
        raise LambertConvergenceError(
            f"W({t[k]!r}) residual {residual[k]:.3e} exceeds {bound[k]:.3e} "
            f"after {settings.max_iterations} iterations"
        )
    return w


def lambert_w_prime(t, settings: SolverSettings = DEFAULT_SETTINGS):
    """Derivative W'(t) on (-1/e, inf).

    Uses W/(t (1 + W)) away from zero and 1/(t + e^W) near zero. Close to
    the branch point 1 + W is taken from the series so that the small factor
    is not formed by cancellation.

    Raises
    ------
    LambertDomainError
        At or below the branch point, where W' is unbounded.
    """
    t, scalar = _as_array(t)
    flat = t.ravel()
    if np.any(~(_offset_from_branch(flat) > 0.0)):
        bad = flat[~(_offset_from_branch(flat) > 0.0)][0]
        raise LambertDomainError(f"W' unbounded or undefined at t={bad!r}")

    w = np.asarray(lambert_w(flat, settings), dtype=float)
    one_plus_w = 1.0 + w
    near = _offset_from_branch(flat) <= _BRANCH_WINDOW
    if np.any(near):
        one_plus_w[near] = _branch_series(_branch_p(flat[near]), skip_constant=True)

    small = np.abs(flat) < 1e-3
    out = np.empty_like(flat)
    out[small] = 1.0 / (flat[small] + np.exp(w[small]))
    big = ~small
    out[big] = w[big] / (flat[big] * one_plus_w[big])
    out = out.reshape(t.shape)
    return float(out) if scalar else out
