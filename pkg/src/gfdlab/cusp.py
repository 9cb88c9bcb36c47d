"""Cusp construction on a small disk around the origin.

The disk of radius r0 is split by the curves theta = +-gamma(r) and
theta = +-(pi - gamma(r)) into two sectors A1, A2 = -A1 and two cusps
B1, B2 = -B1 pinching at the origin. The first coordinate of f is
-log log(1/r) everywhere; the second is h(r) theta in A1 and the linear
interpolation of the A-boundary values across B1. On A2 and B2 the map is
f(z) = f(-z).

All formulas are written in the log-radius L = log(1/r). With
hs = r h'(r) and gs = r gamma'(r), the derivative scaled by r is

    A1:  [[1/L, 0], [hs theta, h]]
    B1:  [[1/L, 0], [(pi/2 + theta) hs - (pi theta / 2) (hs/gamma - h gs/gamma^2),
                     h (1 - pi / (2 gamma))]]

so every field is evaluated without forming r when L is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .core import (
    DegeneratePointError,
    FieldBatch,
    InterfaceError,
    OutOfDomainError,
    PolarPoint,
    opnorm_sq,
    wrap_angle,
)

REGIMES = ("lp_duality", "sigma_ls", "exp_k")
REGION_TAGS = ("A1", "A2", "B1", "B2")
INTERFACE_TAG = "interface"
OUTSIDE_TAG = "outside"
INTERFACES = ("gamma", "minus_gamma", "pi_minus_gamma", "minus_pi_plus_gamma")

PI = math.pi
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class CuspParams:
    """Parameters of one cusp regime.

    Attributes
    ----------
    regime : {"lp_duality", "sigma_ls", "exp_k"}
    p : float
        Integrability exponent of K (lp_duality, sigma_ls); h(r) = r^(2/p).
    eps : float
        Cusp opening exponent for lp_duality, gamma = log^-eps(1/r).
    mu : float
        Zygmund exponent targeted by exp_k.
    nu : float or None
        exp_k exponent, h = log^-nu(1/r), gamma = log^(1-nu)(1/r). Defaults to
        the midpoint (mu + 2) / 2 of the admissible interval (mu, 2).
    r0 : float or None
        Disk radius; defaults to e^-e (e^-4 for sigma_ls).
    """

    regime: str
    p: float = 2.0
    eps: float = 0.5
    mu: float = 1.5
    nu: float | None = None
    r0: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown cusp regime {self.regime!r}")
        if self.regime == "exp_k":
            if not 1.0 < self.mu < 2.0:
                raise ValueError("exp_k needs mu in (1, 2)")
            if self.nu is None:
                object.__setattr__(self, "nu", 0.5 * (self.mu + 2.0))
            if not self.mu < self.nu < 2.0:
                raise ValueError("exp_k needs nu in (mu, 2)")
        else:
            if not self.p > 1.0:
                raise ValueError("p must exceed 1")
        if self.regime == "lp_duality" and not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.r0 is None:
            r0 = math.exp(-4.0) if self.regime == "sigma_ls" else math.exp(-math.e)
            object.__setattr__(self, "r0", r0)
        if not 0.0 < self.r0 <= math.exp(-math.e):
            raise ValueError("r0 must lie in (0, e^-e]")
        self._check_curves()

    @property
    def log_inv_r0(self) -> float:
        return -math.log(self.r0)

    def curves(self, L):
        """Return h, r h', gamma, r gamma' as functions of L = log(1/r)."""
        L = np.asarray(L, dtype=float)
        if self.regime == "exp_k":
            nu = self.nu
            h = L ** (-nu)
            hs = nu * L ** (-nu - 1.0)
            gamma = L ** (1.0 - nu)
            gs = (nu - 1.0) * L ** (-nu)
            return h, hs, gamma, gs
        h = np.exp(-2.0 * L / self.p)
        hs = (2.0 / self.p) * h
        if self.regime == "lp_duality":
            gamma = L ** (-self.eps)
            gs = self.eps * L ** (-self.eps - 1.0)
        else:
            gamma = h * L
            gs = h * (2.0 * L / self.p - 1.0)
        return h, hs, gamma, gs

    def log_h(self, L):
        """log h as a function of L, finite where h itself underflows."""
        L = np.asarray(L, dtype=float)
        if self.regime == "exp_k":
            return -self.nu * np.log(L)
        return -2.0 * L / self.p

    def h(self, r):
        return self.curves(-np.log(r))[0]

    def gamma(self, r):
        return self.curves(-np.log(r))[2]

    def _check_curves(self):
        # gamma increasing in r means r gamma' > 0; gamma(r0) < 1.
        # stop where h = r^(2/p) would underflow
        span = 500.0 if self.regime == "exp_k" else min(500.0, 300.0 * self.p)
        L = self.log_inv_r0 + np.concatenate([[0.0], np.geomspace(1e-6, span, 400)])
        h, hs, gamma, gs = self.curves(L)
        if not (gamma[0] < 1.0 and np.all(gs > 0) and np.all(np.diff(gamma) <= 0)):
            raise ValueError(f"gamma is not increasing below 1 on (0, r0] for {self}")
        if not (np.all(hs >= 0) and np.all(np.diff(h) <= 0)):
            raise ValueError(f"h is not increasing on (0, r0] for {self}")


def _antipode(theta):
    theta = np.asarray(theta, dtype=float)
    return np.where(theta > 0, theta - PI, theta + PI)


def region_tags(params: CuspParams, L, theta, angular_tol=1e-12):
    """Vectorized region classification; theta is wrapped to (-pi, pi]."""
    L = np.asarray(L, dtype=float)
    theta = np.asarray(wrap_angle(theta), dtype=float)
    inside = L > params.log_inv_r0
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = params.curves(np.where(inside, L, params.log_inv_r0 + 1.0))[2]
    a = np.abs(theta)
    tags = np.where(a < gamma, "B1", np.where(a > PI - gamma, "B2", np.where(theta > 0, "A1", "A2")))
    near = (np.abs(a - gamma) <= angular_tol) | (np.abs(a - (PI - gamma)) <= angular_tol)
    tags = np.where(near, INTERFACE_TAG, tags)
    return np.where(inside, tags, OUTSIDE_TAG).astype(object)


def angular_bounds(params: CuspParams, region: str, L):
    """Angular interval [lo, hi] of a region at log-radius L (B2 straddles pi)."""
    gamma = params.curves(L)[2]
    if region == "A1":
        return gamma, PI - gamma
    if region == "A2":
        return -PI + gamma, -gamma
    if region == "B1":
        return -gamma, gamma
    if region == "B2":
        return PI - gamma, PI + gamma
    raise ValueError(f"unknown cusp region {region!r}")


def fields(params: CuspParams, region: str, L, theta) -> FieldBatch:
    """Closed-form f, r*Df, K and log Sigma on points of one region.

    No domain or interface checks are made; points are taken to lie in
    ``region``. Angles for A2 and B2 are reflected through the origin.
    """
    L = np.atleast_1d(np.asarray(L, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    L, theta = np.broadcast_arrays(L, theta)
    base = theta if region in ("A1", "B1") else _antipode(wrap_angle(theta))
    h, hs, gamma, gs = params.curves(L)

    n = L.shape[0]
    # second row of r Df over h: it stays representable when h underflows
    hs_h = 2.0 / params.p if params.regime != "exp_k" else params.nu / L
    row = np.zeros((n, 2))
    m = np.zeros((n, 2, 2))
    m[:, 0, 0] = 1.0 / L
    f = np.empty((n, 2))
    f[:, 0] = -np.log(L)

    if region in ("A1", "A2"):
        row[:, 0] = hs_h * base
        row[:, 1] = 1.0
        f[:, 1] = h * base
    elif region in ("B1", "B2"):
        ratio_d = (hs_h - gs / gamma) / gamma
        row[:, 0] = (HALF_PI + base) * hs_h - HALF_PI * base * ratio_d
        row[:, 1] = 1.0 - HALF_PI / gamma
        f[:, 1] = 0.5 * h * (PI + 2.0 * base - PI * base / gamma)
    else:
        raise ValueError(f"unknown cusp region {region!r}")
    m[:, 1, :] = h[:, None] * row
    det_row = row[:, 1] / L  # det(r Df) / h
    with np.errstate(divide="ignore"):
        log_op = np.log(opnorm_sq(m))
    if region in ("A1", "A2"):
        if np.any(~(det_row > 0)):
            raise DegeneratePointError("J_f vanishes at a point of region A")
        log_sigma = np.full(n, -np.inf)
    else:
        log_sigma = math.log(2.0) + log_op + 2.0 * L
    log_K = np.maximum(0.0, log_op - params.log_h(L) - np.log(np.abs(det_row)))
    with np.errstate(over="ignore"):
        K = np.exp(log_K)
    return FieldBatch(L, theta, f, m, K, log_sigma, region, log_K=log_K)


def _check_domain(params: CuspParams, pt: PolarPoint):
    if not (pt.r > 0.0 and pt.r < params.r0):
        raise OutOfDomainError(f"r={pt.r!r} outside (0, {params.r0!r})")


def classify(params: CuspParams, pt: PolarPoint, angular_tol: float = 1e-12) -> str:
    """Return the region tag of a point: A1, A2, B1, B2 or interface."""
    _check_domain(params, pt)
    return str(region_tags(params, pt.log_inv_r, pt.theta, angular_tol)[()])


def eval_f(params: CuspParams, pt: PolarPoint):
    """f at a point of the disk; continuous, so interface points are fine."""
    tag = classify(params, pt, angular_tol=0.0)
    if tag == INTERFACE_TAG:
        tag = "A1" if wrap_angle(pt.theta) > 0 else "A2"
    return fields(params, tag, pt.log_inv_r, wrap_angle(pt.theta)).f[0]


def _single(params, pt, angular_tol):
    tag = classify(params, pt, angular_tol)
    if tag == INTERFACE_TAG:
        raise InterfaceError(f"{pt} lies on a region boundary")
    return fields(params, tag, pt.log_inv_r, wrap_angle(pt.theta))


def eval_Df(params: CuspParams, pt: PolarPoint, angular_tol: float = 1e-12):
    """Polar-frame derivative [[d_r f1, r^-1 d_theta f1], [d_r f2, r^-1 d_theta f2]]."""
    return _single(params, pt, angular_tol).df[0]


def eval_K_sigma(params: CuspParams, pt: PolarPoint, angular_tol: float = 1e-12):
    """(K, Sigma) with K = max(1, |Df|^2/|J_f|), Sigma = 0 on A and 2|Df|^2 on B."""
    batch = _single(params, pt, angular_tol)
    return float(batch.K[0]), float(batch.sigma[0])


class CuspMap:
    """Map-family view of a cusp regime used by the checks and quadrature."""

    regions = REGION_TAGS
    interfaces = INTERFACES
    discontinuous_at_origin = True
    fd_step = 1e-4
    # f(z) = f(-z): A2 and B2 carry the fields of A1 and B1 at the antipode.
    # B2 straddles pi, where angles finer than 1e-16 are lost to rounding.
    mirror_parts = {"A2": "A1", "B2": "B1"}

    def __init__(self, params: CuspParams, name: str | None = None):
        self.params = params
        self.name = name or f"cusp-{params.regime}"

    def fields(self, region, log_inv_r, theta, r=None):
        return fields(self.params, region, log_inv_r, theta)

    def region_of(self, log_inv_r, theta, r=None, tol=0.0):
        return region_tags(self.params, log_inv_r, theta, tol)

    @property
    def log_inv_r_outer(self):
        return self.params.log_inv_r0

    @property
    def max_log_inv_r(self):
        # sigma_ls sectors have half-width r^(2/p) log(1/r); keep it above 1e-260
        return 300.0 * self.params.p if self.params.regime == "sigma_ls" else math.inf

    def angular_bounds(self, region, log_inv_r):
        return angular_bounds(self.params, region, log_inv_r)

    def sample(self, region, u, lo=None, hi=None, margin=1e-3, log_spacing=False, resolvable=False):
        """Map unit-square points into a region's (log 1/r, theta) box.

        Log-radii run over [lo, hi], by default from log(1/r0) + margin to 60
        beyond it, so radial stencils stay inside r < r0.
        With ``resolvable`` the depth stops where gamma drops below 1e-4: finer
        angular offsets from +-pi are lost to rounding, which would swamp
        angular finite differences in A2 and B2.
        """
        u = np.asarray(u, dtype=float)
        lo = self.params.log_inv_r0 + max(margin, 1e-9) if lo is None else lo
        hi = lo + 60.0 if hi is None else hi
        if resolvable:
            hi = min(hi, self._resolvable_depth(lo, hi))
        L = lo * (hi / lo) ** u[:, 0] if log_spacing else lo + (hi - lo) * u[:, 0]
        a, b = self.angular_bounds(region, L)
        theta = a + (margin + (1.0 - 2.0 * margin) * u[:, 1]) * (b - a)
        return L, np.asarray(wrap_angle(theta)), None

    def distortion_constant(self, samples: int = 4096, seed: int = 0, depth: float = 500.0) -> float:
        """Smallest C with K <= C log^(nu-1)(1/r) over sampled points (exp_k only).

        The bound holds with an unnamed constant; this reports the empirical one
        over log-spaced depths up to ``depth`` beyond r0.
        """
        if self.params.regime != "exp_k":
            raise ValueError("the log^(nu-1) distortion bound belongs to the exp_k regime")
        u = np.random.default_rng(seed).random((samples, 2))
        lo = self.params.log_inv_r0 + 1e-6
        worst = -math.inf
        for reg in self.regions:
            L, theta, _ = self.sample(reg, u, lo=lo, hi=lo + depth, log_spacing=True)
            log_K = self.fields(reg, L, theta).log_K
            worst = max(worst, float(np.max(log_K - (self.params.nu - 1.0) * np.log(L))))
        return math.exp(worst)

    def _resolvable_depth(self, lo, hi):
        floor = 1e-4
        if self.params.curves(hi)[2] >= floor:
            return hi
        return optimize.brentq(lambda L: float(self.params.curves(L)[2]) - floor, lo, hi)

    def local_scales(self, region, log_inv_r, theta, r=None):
        # radial scale is relative (r itself); angular scale is the region width
        lo, hi = self.angular_bounds(region, log_inv_r)
        return np.ones_like(np.asarray(log_inv_r, dtype=float)), hi - lo

    def interface_params(self, u, depth=60.0):
        """Radii for interface checks: log(1/r) spread uniformly over ``depth`` below r0."""
        L = self.params.log_inv_r0 * (1.0 + 1e-9) + depth * np.asarray(u, dtype=float)
        return np.exp(-L)

    def interface_pair(self, interface, r, offset):
        """Points either side of an interface curve at radius r.

        ``offset`` is an angular offset relative to gamma(r).
        """
        L = -np.log(np.asarray(r, dtype=float))
        gamma = self.params.curves(L)[2]
        d = offset * gamma
        if interface == "gamma":
            return ("A1", L, gamma + d, None), ("B1", L, gamma - d, None)
        if interface == "minus_gamma":
            return ("B1", L, -gamma + d, None), ("A2", L, -gamma - d, None)
        if interface == "pi_minus_gamma":
            return ("B2", L, PI - gamma + d, None), ("A1", L, PI - gamma - d, None)
        if interface == "minus_pi_plus_gamma":
            return ("A2", L, -PI + gamma + d, None), ("B2", L, -PI + gamma - d, None)
        raise ValueError(f"unknown cusp interface {interface!r}")

    def interface_parameter_range(self):
        return 0.0, self.params.r0

    def blowup_log_radius(self, M):
        # |f| >= |f1| = log L >= M once L >= e^M
        return max(math.exp(M), self.params.log_inv_r0)

    def from_cartesian(self, x, y):
        rho = np.hypot(x, y)
        return -np.log(rho), np.arctan2(y, x), None

    def continuous_at(self, x0):
        return not (x0[0] == 0.0 and x0[1] == 0.0)
