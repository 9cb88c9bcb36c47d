"""Radial maps on a disk: the triple-log and power-log maps and test fixtures.

All of them are defined on a disk {r < r_outer} that forms a single region
called ``disk``. The triple-log and power-log maps have a vanishing
Jacobian, so they are given K = 1 and Sigma = |Df|^2, which makes the
inclusion |Df|^2 <= K J_f + Sigma an equality.
"""

from __future__ import annotations

import math

import numpy as np

from .core import FieldBatch, UnsupportedError, opnorm_sq


class DiskMap:
    """Common plumbing for maps given on the punctured disk r < r_outer."""

    regions = ("disk",)
    interfaces = ()
    discontinuous_at_origin = False
    r_outer = 1.0
    fd_step = 1e-4

    def _radial(self, L, theta, r):
        """Return (f, r*Df, K, log Sigma) at the given points."""
        raise NotImplementedError

    def fields(self, region, log_inv_r, theta, r=None):
        if region != "disk":
            raise ValueError(f"{self.name} has the single region 'disk', not {region!r}")
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if r is None:
            L = np.atleast_1d(np.asarray(log_inv_r, dtype=float))
            r = np.exp(-L)
        else:
            r = np.atleast_1d(np.asarray(r, dtype=float))
            L = -np.log(r)
        L, theta, r = np.broadcast_arrays(L, theta, r)
        f, m, K, log_sigma = self._radial(L, theta, r)
        return FieldBatch(L, theta, f, m, K, log_sigma, "disk")

    def region_of(self, log_inv_r, theta, r=None, tol=0.0):
        L = np.asarray(log_inv_r, dtype=float)
        inside = L > self.log_inv_r_outer
        return np.where(inside, "disk", "outside").astype(object)

    @property
    def log_inv_r_outer(self):
        return -math.log(self.r_outer)

    def sample(self, region, u, lo=None, hi=None, margin=0.0, log_spacing=False, resolvable=False):
        u = np.asarray(u, dtype=float)
        lo = self.log_inv_r_outer + 1e-9 if lo is None else lo
        hi = lo + 60.0 if hi is None else hi
        L = lo * (hi / lo) ** u[:, 0] if log_spacing else lo + (hi - lo) * u[:, 0]
        theta = -math.pi + 2.0 * math.pi * u[:, 1]
        return L, theta, None

    def local_scales(self, region, log_inv_r, theta, r=None):
        one = np.ones_like(np.asarray(log_inv_r, dtype=float))
        return one, one

    def interface_pair(self, interface, param, offset):
        raise ValueError(f"{self.name} has no interfaces")

    def blowup_log_radius(self, M):
        raise UnsupportedError(f"{self.name} is continuous at the origin")

    def from_cartesian(self, x, y):
        return -np.log(np.hypot(x, y)), np.arctan2(y, x), None

    def continuous_at(self, x0):
        return True


def _radial_gradient(L, scaled_dr):
    """Polar-frame scaled matrix of a map (F(r), 0): only d_r f1 is nonzero."""
    m = np.zeros(L.shape + (2, 2))
    m[..., 0, 0] = scaled_dr
    return m


class TripleLogMap(DiskMap):
    """f(x) = (log log log(e^e/|x|), 0) on the unit disk.

    With L = log(1/r) the first coordinate is log log(e + L), and
    r d_r f1 = -1/((e + L) log(e + L)).
    """

    name = "triple-log"
    discontinuous_at_origin = True

    def _radial(self, L, theta, r):
        m_ = math.e + L
        f = np.zeros(L.shape + (2,))
        f[:, 0] = np.log(np.log(m_))
        m = _radial_gradient(L, -1.0 / (m_ * np.log(m_)))
        log_sigma = np.log(opnorm_sq(m)) + 2.0 * L
        return f, m, np.ones_like(L), log_sigma

    def blowup_log_radius(self, M):
        # log log(e + L) >= M  iff  L >= exp(exp(M)) - e
        if math.exp(M) > 709.0:
            return math.inf  # the witness radius underflows to 0
        return max(math.exp(math.exp(M)) - math.e, self.log_inv_r_outer)

    def continuous_at(self, x0):
        return not (x0[0] == 0.0 and x0[1] == 0.0)


class PowerLogMap(DiskMap):
    """f(x) = (log^-alpha(1/|x|), 0), continuous at 0 with f(0) = 0.

    Defined on the disk of radius 1/e so that log(1/r) > 1.
    """

    name = "power-log"
    r_outer = math.exp(-1.0)

    def __init__(self, alpha: float = 1.0):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)

    def _radial(self, L, theta, r):
        f = np.zeros(L.shape + (2,))
        f[:, 0] = L ** (-self.alpha)
        m = _radial_gradient(L, self.alpha * L ** (-self.alpha - 1.0))
        log_sigma = np.log(opnorm_sq(m)) + 2.0 * L
        return f, m, np.ones_like(L), log_sigma

    def value_at_origin(self):
        return np.zeros(2)

    def eval_cartesian(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        rho = np.hypot(x, y)
        out = np.zeros(rho.shape + (2,))
        nz = rho > 0
        out[nz, 0] = (-np.log(rho[nz])) ** (-self.alpha)
        return out


class IdentityMap(DiskMap):
    """f(x) = x; K = 1, Sigma = 0.

    In the polar frame Df is the rotation by theta; it is the identity
    matrix in Cartesian coordinates.
    """

    name = "identity"

    def _radial(self, L, theta, r):
        c, s = np.cos(theta), np.sin(theta)
        f = np.stack([r * c, r * s], axis=-1)
        m = np.empty(L.shape + (2, 2))
        m[..., 0, 0] = r * c
        m[..., 0, 1] = -r * s
        m[..., 1, 0] = r * s
        m[..., 1, 1] = r * c
        return f, m, np.ones_like(L), np.full(L.shape, -np.inf)

    def eval_cartesian(self, x, y):
        return np.stack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)], axis=-1)


class ConstantMap(DiskMap):
    """f(x) = c; Df = 0, K = 1, Sigma = 0."""

    name = "constant"

    def __init__(self, value=(1.0, -2.0)):
        self.value = np.asarray(value, dtype=float)

    def _radial(self, L, theta, r):
        f = np.broadcast_to(self.value, L.shape + (2,)).copy()
        m = np.zeros(L.shape + (2, 2))
        return f, m, np.ones_like(L), np.full(L.shape, -np.inf)

    def eval_cartesian(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.value, x.shape + (2,)).copy()
