"""Double-spiral construction in the winding parametrization.

Points are written as (r, theta) with theta >= theta0 unwrapped and
g(theta + 2 pi) <= r < g(theta), where g(theta) = 1/(theta log theta). The
middle spiral h(theta) = (g(theta) + g(theta + 2 pi))/2 splits each turn
into an inner strip A and an outer strip B:

    B (h <= r < g):      f = (phi(r), -log log theta)
    A (g(tau) <= r < h): f = (phi(r), -log W(u)),  u = 1/(2r - g(tau))

with tau = theta + 2 pi. The Lambert W gluing makes f continuous across
both spirals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate

from .core import (
    TWO_PI,
    DegeneratePointError,
    FieldBatch,
    InterfaceError,
    OutOfDomainError,
    distortion_ratio,
    opnorm_sq,
)
from .special_fn import lambert_w

REGIMES = ("bounded_sigma", "lp")
REGION_TAGS = ("A", "B")
INTERFACE_TAG = "interface"
INTERFACES = ("h", "g_tau")
# J_f and theta^2 leave the float range a little past this winding angle
THETA_MAX = 1e150


def g_curve(theta):
    theta = np.asarray(theta, dtype=float)
    return 1.0 / (theta * np.log(theta))


def g_prime(theta):
    theta = np.asarray(theta, dtype=float)
    lg = np.log(theta)
    return -(1.0 + lg) / (theta * lg) ** 2


def g_step(theta):
    """g(theta) - g(theta + 2 pi) without cancellation."""
    theta = np.asarray(theta, dtype=float)
    tau = theta + TWO_PI
    num = TWO_PI * np.log(tau) + theta * np.log1p(TWO_PI / theta)
    return num * g_curve(theta) * g_curve(tau)


def g_inverse(r):
    """theta with g(theta) = r, via theta log theta = 1/r."""
    r = np.asarray(r, dtype=float)
    out = np.exp(lambert_w(1.0 / r))
    return out if out.ndim else float(out)


def theta_from_log_inv_r(L):
    """theta with g(theta) = e^-L, i.e. log theta + log log theta = L."""
    L = float(L)
    w = max(L - math.log(max(L, 1.0)), 0.5)
    for _ in range(60):
        step = (w + math.log(w) - L) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * w:
            break
    return math.exp(w)


class _PhiTable:
    """phi(r) = int_0^r phi' for phi'(r) = r^(2/p-2) log^(b)(1/r).

    In L = log(1/r), phi = int_L^inf exp(-a s) s^b ds with a = 2/p - 1 and
    b = -7/4 + 1/p. Node values on a geometric L-grid are accumulated from a
    tail integral; values between nodes add a fixed Gauss-Legendre correction
    from the nearest node below, which keeps differences of nearby phi values
    accurate to rounding.
    """

    def __init__(self, p: float, L_min: float, nodes: int = 10_000, L_max: float = 1e6):
        self.a = 2.0 / p - 1.0
        self.b = -1.75 + 1.0 / p
        self.grid = np.geomspace(L_min, L_max, nodes)
        self._x, self._w = np.polynomial.legendre.leggauss(24)
        tail = self._tail(self.grid[-1])
        seg = self._gl(self.grid[:-1], self.grid[1:])
        self.values = np.concatenate([np.cumsum(seg[::-1])[::-1] + tail, [tail]])
        self.L_min = L_min

    def density(self, L):
        return np.exp(-self.a * L) * L**self.b

    def _gl(self, lo, hi):
        lo = np.asarray(lo, dtype=float)[..., None]
        hi = np.asarray(hi, dtype=float)[..., None]
        half = 0.5 * (hi - lo)
        s = lo + half * (self._x + 1.0)
        return np.sum(self._w * self.density(s), axis=-1) * half[..., 0]

    def _tail(self, L):
        c = self.b + 1.0
        if self.a == 0.0:
            return L**c / -c
        log_al = math.log(self.a * L)

        # s = L e^v; the integrand dies once a L e^v passes a few hundred
        def integrand(v):
            x = v + log_al
            return 0.0 if x > 7.0 else math.exp(-math.exp(x) + c * v)

        val = sp_integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        return val * L**c

    def __call__(self, L):
        L = np.asarray(L, dtype=float)
        if np.any(L < self.L_min):
            raise OutOfDomainError("radius beyond the tabulated range of phi")
        idx = np.clip(np.searchsorted(self.grid, L, side="right") - 1, 0, len(self.grid) - 1)
        out = self.values[idx] - self._gl(self.grid[idx], L)
        far = L > self.grid[-1]
        if np.any(far):
            out[far] = [self._tail(x) for x in L[far]]
        return out


@dataclass(frozen=True)
class SpiralParams:
    """Regime of the spiral construction.

    ``bounded_sigma`` takes phi(r) = r on theta >= 2 pi; ``lp`` takes
    phi'(r) = r^(2/p - 2) log^(-7/4 + 1/p)(1/r) on theta >= 4 pi.
    """

    regime: str
    p: float = 2.0
    theta0: float | None = None
    r0: float | None = None
    _phi: _PhiTable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown spiral regime {self.regime!r}")
        if self.theta0 is None:
            object.__setattr__(self, "theta0", TWO_PI if self.regime == "bounded_sigma" else 2.0 * TWO_PI)
        if self.theta0 < TWO_PI:
            raise ValueError("theta0 must be at least 2 pi")
        if self.r0 is None:
            object.__setattr__(self, "r0", 1.0 if self.regime == "bounded_sigma" else float(g_curve(self.theta0)))
        if not self.r0 >= g_curve(self.theta0) * (1.0 - 1e-15):
            raise ValueError("r0 must cover the first turn of the spiral")
        if self.regime == "lp":
            if not 1.0 <= self.p <= 2.0:
                raise ValueError("lp regime needs p in [1, 2]")
            if self.r0 >= 1.0:
                raise ValueError("lp regime needs r0 < 1")
            object.__setattr__(self, "_phi", _PhiTable(self.p, -math.log(self.r0)))

    def scaled_phi_prime(self, L, r=None):
        """r * phi'(r)."""
        L = np.asarray(L, dtype=float)
        if self.regime == "bounded_sigma":
            return np.exp(-L) if r is None else np.asarray(r, dtype=float)
        return np.exp(-(2.0 / self.p - 1.0) * L) * L ** (-1.75 + 1.0 / self.p)

    def log_phi_prime(self, L, r=None):
        return np.log(self.scaled_phi_prime(L, r)) + np.asarray(L, dtype=float)

    def phi(self, L, r=None):
        if self.regime == "bounded_sigma":
            return np.exp(-np.asarray(L, dtype=float)) if r is None else np.asarray(r, dtype=float)
        return self._phi(L)


@dataclass(frozen=True)
class SpiralCoords:
    """Point of the parameter set U: unwrapped angle and radius."""

    theta: float
    r: float

    def cartesian(self):
        return self.r * math.cos(self.theta), self.r * math.sin(self.theta)


def spiral_curves(params: SpiralParams, theta):
    """(g(theta), h(theta)) for theta >= theta0."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < params.theta0):
        raise OutOfDomainError(f"theta below theta0={params.theta0}")
    g = g_curve(theta)
    h = g - 0.5 * g_step(theta)
    return (float(g), float(h)) if theta.ndim == 0 else (g, h)


def region_tags(params: SpiralParams, theta, r, rel_tol=0.0):
    """A, B or interface for points of U (given by unwrapped angle and radius)."""
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    g = g_curve(theta)
    step = g_step(theta)
    h = g - 0.5 * step
    g_tau = g - step
    tol = rel_tol * step
    tags = np.where(r >= h, "B", "A").astype(object)
    near = (np.abs(r - h) <= tol) | (np.abs(r - g_tau) <= tol)
    tags = np.where(near, INTERFACE_TAG, tags)
    outside = (theta < params.theta0) | (r >= g) | (r < g_tau) | ~(r > 0)
    return np.where(outside, "outside", tags).astype(object)


def _check_in_u(params, c: SpiralCoords):
    if not (c.theta >= params.theta0 and c.r > 0.0):
        raise OutOfDomainError(f"{c} outside the parameter set")
    g = float(g_curve(c.theta))
    if not (float(g_curve(c.theta + TWO_PI)) <= c.r < g):
        raise OutOfDomainError(f"{c} outside the parameter set")


def unwrap(params: SpiralParams, z) -> SpiralCoords:
    """Inverse of (r, theta) -> r e^(i theta) on U.

    The base angle is taken in (theta0, theta0 + 2 pi]; the winding k is the
    one whose turn g(theta_b + 2 pi (k + 1)) <= |z| < g(theta_b + 2 pi k)
    contains |z|, started from g^-1(|z|) and corrected by monotonicity.
    """
    x, y = float(z[0]), float(z[1])
    rho = math.hypot(x, y)
    if rho == 0.0:
        raise OutOfDomainError("the origin has no spiral coordinates")
    base = math.atan2(y, x)
    base = params.theta0 + ((base - params.theta0) % TWO_PI)
    if base <= params.theta0:
        base += TWO_PI
    if rho >= g_curve(base):
        raise OutOfDomainError(f"|z|={rho!r} lies outside the spiral domain")
    k = max(0, math.ceil((g_inverse(rho) - base) / TWO_PI) - 1)
    while k > 0 and rho >= g_curve(base + TWO_PI * k):
        k -= 1
    while rho < g_curve(base + TWO_PI * (k + 1)):
        k += 1
    return SpiralCoords(theta=base + TWO_PI * k, r=rho)


def fields(params: SpiralParams, region: str, L, theta, r=None) -> FieldBatch:
    """Closed-form fields on points of one strip; no region checks."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if r is None:
        L = np.atleast_1d(np.asarray(L, dtype=float))
        r = np.exp(-L)
    else:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        L = -np.log(r)
    L, theta, r = np.broadcast_arrays(L, theta, r)
    n = L.shape[0]

    rphi = params.scaled_phi_prime(L, r)
    log_phi_p = np.log(rphi) + L
    m = np.zeros((n, 2, 2))
    m[:, 0, 0] = rphi
    f = np.empty((n, 2))
    f[:, 0] = params.phi(L, r)
    extras = {}

    if region == "B":
        g = g_curve(theta)
        m[:, 1, 1] = -g
        f[:, 1] = -np.log(np.log(theta))
        K = np.maximum(np.exp(log_phi_p), 1.0)
        # log(6 + 3 phi'^2) without overflow for huge phi'
        log_sigma = np.logaddexp(math.log(6.0), math.log(3.0) + 2.0 * log_phi_p)
    elif region == "A":
        tau = theta + TWO_PI
        u = 1.0 / (2.0 * r - g_curve(tau))
        w = lambert_w(u)
        lt = np.log(tau)
        m[:, 1, 0] = 2.0 * r * u / (1.0 + w)
        m[:, 1, 1] = (1.0 + lt) / ((1.0 + w) * lt * lt) * (u / tau) / tau
        f[:, 1] = -np.log(w)
        if np.any(~(det2_pos(m))):
            raise DegeneratePointError("J_f vanishes at a point of region A")
        K = np.maximum(1.0, distortion_ratio(m))
        log_sigma = np.full(n, -np.inf)
        extras = {"u": u, "w": w}
    else:
        raise ValueError(f"unknown spiral region {region!r}")
    return FieldBatch(L, theta, f, m, K, log_sigma, region, extras)


def det2_pos(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0] > 0


def _single(params, c, rel_tol):
    _check_in_u(params, c)
    tag = str(region_tags(params, c.theta, c.r, rel_tol)[()])
    if tag == INTERFACE_TAG:
        raise InterfaceError(f"{c} lies on a spiral interface")
    return fields(params, tag, None, c.theta, c.r)


def classify(params: SpiralParams, c: SpiralCoords, rel_tol: float = 1e-12) -> str:
    _check_in_u(params, c)
    return str(region_tags(params, c.theta, c.r, rel_tol)[()])


def eval_f(params: SpiralParams, c: SpiralCoords):
    """f on U; at r = h(theta) both formulas agree, B is used."""
    _check_in_u(params, c)
    tag = str(region_tags(params, c.theta, c.r)[()])
    return fields(params, tag, None, c.theta, c.r).f[0]


def eval_Df(params: SpiralParams, c: SpiralCoords, rel_tol: float = 1e-12):
    return _single(params, c, rel_tol).df[0]


def eval_K_sigma(params: SpiralParams, c: SpiralCoords, rel_tol: float = 1e-12):
    """(K, Sigma): B takes max(phi', 1) and 6 + 3 phi'^2; A the exact ratio and 0."""
    batch = _single(params, c, rel_tol)
    return float(batch.K[0]), float(batch.sigma[0])


def radial_bounds(params: SpiralParams, region: str, theta):
    """Radial interval [lo, hi] of a strip at angle theta."""
    theta = np.asarray(theta, dtype=float)
    g = g_curve(theta)
    step = g_step(theta)
    if region == "A":
        return g - step, g - 0.5 * step
    if region == "B":
        return g - 0.5 * step, g
    raise ValueError(f"unknown spiral region {region!r}")


class SpiralMap:
    """Map-family view of a spiral regime."""

    regions = REGION_TAGS
    interfaces = INTERFACES
    discontinuous_at_origin = True
    fd_step = 1e-3

    def __init__(self, params: SpiralParams, name: str | None = None):
        self.params = params
        self.name = name or f"spiral-{params.regime}"

    def fields(self, region, log_inv_r, theta, r=None):
        return fields(self.params, region, log_inv_r, theta, r)

    @property
    def max_log_inv_r(self):
        return math.log(THETA_MAX) + math.log(math.log(THETA_MAX))

    def region_of(self, log_inv_r, theta, r=None, tol=0.0):
        if r is None:
            r = np.exp(-np.asarray(log_inv_r, dtype=float))
        return region_tags(self.params, theta, r, tol)

    @property
    def log_inv_r_outer(self):
        return -math.log(g_curve(self.params.theta0))

    def radial_bounds(self, region, theta):
        return radial_bounds(self.params, region, theta)

    def sample(self, region, u, lo=None, hi=None, margin=1e-3, log_spacing=True, resolvable=False):
        """Map unit-square points into a strip.

        The first coordinate picks the winding angle between the angles
        whose turns sit at log-radii ``lo`` and ``hi`` (default: theta from
        theta0 to 1e4, log-spaced); the second is the fraction across the strip.
        ``margin`` keeps points that far (relative) from the strip edges and
        margin * pi radians above theta0, where U ends.
        """
        u = np.asarray(u, dtype=float)
        t_lo = self.params.theta0 if lo is None else max(self.params.theta0, theta_from_log_inv_r(lo))
        t_lo = max(t_lo, self.params.theta0 + margin * math.pi)
        t_hi = 1e4 if hi is None else theta_from_log_inv_r(hi)
        if log_spacing:
            theta = t_lo * (t_hi / t_lo) ** u[:, 0]
        else:
            theta = t_lo + (t_hi - t_lo) * u[:, 0]
        rlo, rhi = radial_bounds(self.params, region, theta)
        r = rlo + (margin + (1.0 - 2.0 * margin) * u[:, 1]) * (rhi - rlo)
        return -np.log(r), theta, r

    def local_scales(self, region, log_inv_r, theta, r=None):
        # radial: strip width over r; angular: a strip spans about pi at fixed r
        lo, hi = radial_bounds(self.params, region, theta)
        if r is None:
            r = np.exp(-np.asarray(log_inv_r, dtype=float))
        return (hi - lo) / r, np.full(np.shape(theta), math.pi)

    def interface_params(self, u, theta_max=1e6):
        """Winding angles for interface checks, log-spaced in [theta0, theta_max]."""
        t0 = self.params.theta0
        return t0 * (theta_max / t0) ** np.asarray(u, dtype=float)

    def interface_pair(self, interface, theta, offset):
        """Points either side of a spiral interface at angle theta.

        ``offset`` is relative to the local strip width. For ``g_tau`` the
        A-side point sits at angle theta just outside g(theta + 2 pi) and the
        B-side point on the next turn, at angle theta + 2 pi just inside.
        """
        theta = np.asarray(theta, dtype=float)
        g = g_curve(theta)
        step = g_step(theta)
        if interface == "h":
            h = g - 0.5 * step
            d = offset * 0.5 * step
            ra, rb = h - d, h + d
            return ("A", None, theta, ra), ("B", None, theta, rb)
        if interface == "g_tau":
            g_tau = g - step
            tau = theta + TWO_PI
            d_b = offset * 0.5 * g_step(tau)
            d_a = offset * 0.5 * step
            return ("A", None, theta, g_tau + d_a), ("B", None, tau, g_tau - d_b)
        raise ValueError(f"unknown spiral interface {interface!r}")

    def blowup_log_radius(self, M):
        # |Im f| >= M on B once theta >= exp(exp(M)); on A, -log W(u) >= log log theta
        log_theta = max(math.exp(M), math.log(self.params.theta0))
        # -log g(theta + 2 pi) = log(theta + 2 pi) + log log(theta + 2 pi), kept in logs for large M
        lt = log_theta + math.log1p(TWO_PI * math.exp(-log_theta))
        return lt + math.log(lt)

    def from_cartesian(self, x, y):
        c = unwrap(self.params, (x, y))
        return -math.log(c.r), c.theta, c.r

    def continuous_at(self, x0):
        return not (x0[0] == 0.0 and x0[1] == 0.0)
