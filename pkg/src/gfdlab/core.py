"""Shared point types, errors and 2x2 matrix helpers.

Derivative matrices are stored in the orthonormal polar frame
(d/dr, r^-1 d/dtheta). Families hand back the matrix scaled by r, which
keeps every entry bounded as r -> 0 for the logarithmic constructions; the
true Df is ``scaled / r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
SPHERE_MEASURE_2D = TWO_PI  # length of the unit circle
BALL_VOLUME_2D = math.pi


class OutOfDomainError(ValueError):
    """Point lies outside the domain of a map family."""


class InterfaceError(ValueError):
    """Point lies on (or a stencil crosses) a region boundary."""


class DegeneratePointError(ArithmeticError):
    """Jacobian vanishes where the construction needs it nonzero."""


class UnsupportedError(NotImplementedError):
    """Operation does not apply to this map family."""


@dataclass(frozen=True)
class PolarPoint:
    """Point (r, theta) in the plane, theta in radians."""

    r: float
    theta: float

    @property
    def log_inv_r(self) -> float:
        return -math.log(self.r)

    def cartesian(self):
        return self.r * math.cos(self.theta), self.r * math.sin(self.theta)


def wrap_angle(theta):
    """Map angles to (-pi, pi]; angles already there are returned untouched."""
    theta = np.asarray(theta, dtype=float)
    out = np.mod(theta + math.pi, TWO_PI) - math.pi
    out = np.where(out == -math.pi, math.pi, out)
    # keep tiny angles exact instead of rounding them through theta + pi
    out = np.where((theta > -math.pi) & (theta <= math.pi), theta, out)
    return out if out.ndim else float(out)


def det2(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def frob2(m):
    return np.sum(m * m, axis=(-2, -1))


def opnorm_sq(m):
    """Largest squared singular value of stacked 2x2 matrices.

    Closed form (F + sqrt(F^2 - 4 det^2)) / 2 with F the squared Frobenius
    norm; the discriminant is written as a sum of squares so it never goes
    negative through rounding.
    """
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    f = a * a + b * b + c * c + d * d
    # F^2 - 4 det^2 = ((a-d)^2 + (b+c)^2) ((a+d)^2 + (b-c)^2)
    disc = np.sqrt(((a - d) ** 2 + (b + c) ** 2) * ((a + d) ** 2 + (b - c) ** 2))
    return 0.5 * (f + disc)


def distortion_ratio(m):
    """|M|^2 / |det M|, the minimal K for a matrix with nonzero Jacobian."""
    return opnorm_sq(m) / np.abs(det2(m))


@dataclass
class FieldBatch:
    """Fields of one map family on a batch of points of one region.

    Attributes
    ----------
    log_inv_r, theta : ndarray
        Point coordinates; theta is the family's own angle (unwrapped for
        the spiral).
    f : ndarray, shape (n, 2)
    scaled_df : ndarray, shape (n, 2, 2)
        r * Df in the polar frame.
    K : ndarray
    log_sigma : ndarray
        log of Sigma, -inf where Sigma vanishes.
    region : str
    log_K : ndarray, optional
        log of K; defaults to log(K). Families fill it in where K itself
        overflows before its log does.
    """

    log_inv_r: np.ndarray
    theta: np.ndarray
    f: np.ndarray
    scaled_df: np.ndarray
    K: np.ndarray
    log_sigma: np.ndarray
    region: str
    extras: dict = field(default_factory=dict)
    log_K: np.ndarray | None = None

    def __post_init__(self):
        if self.log_K is None:
            self.log_K = np.log(self.K)

    @property
    def r(self):
        return np.exp(-self.log_inv_r)

    @property
    def df(self):
        return self.scaled_df * np.exp(self.log_inv_r)[..., None, None]

    @property
    def jac(self):
        d = det2(self.scaled_df)
        # exp(2L) overflows before a nonzero scaled determinant can make up for it
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(d == 0.0, d, d * np.exp(2.0 * self.log_inv_r))

    @property
    def log_opnorm_sq(self):
        return np.log(opnorm_sq(self.scaled_df)) + 2.0 * self.log_inv_r

    @property
    def opnorm_sq(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_opnorm_sq)

    @property
    def sigma(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_sigma)

    def __len__(self):
        return len(self.log_inv_r)


@dataclass(frozen=True)
class FieldSample:
    """f, Df, J_f, |Df|, K and Sigma at a single point."""

    point: object
    f: tuple
    df: tuple
    jac: float
    op_norm: float
    K: float
    sigma: float

    @classmethod
    def from_batch(cls, point, batch: FieldBatch, i: int = 0):
        df = batch.df[i]
        return cls(
            point=point,
            f=(float(batch.f[i, 0]), float(batch.f[i, 1])),
            df=((float(df[0, 0]), float(df[0, 1])), (float(df[1, 0]), float(df[1, 1]))),
            jac=float(batch.jac[i]),
            op_norm=float(math.sqrt(batch.opnorm_sq[i])),
            K=float(batch.K[i]),
            sigma=float(batch.sigma[i]),
        )
