"""Map-agnostic pointwise checks.

Every map family exposes the same small surface (``fields``, ``region_of``,
``sample``, ``local_scales``, ``interface_pair``, ``blowup_log_radius``), so
the checks here work on cusp, spiral and disk maps alike. Batch versions
take one region at a time and return arrays; the single-point versions
locate the point first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .core import (
    InterfaceError,
    OutOfDomainError,
    PolarPoint,
    UnsupportedError,
    det2,
    opnorm_sq,
)
from .spiral import SpiralCoords


class DiscontinuousPointError(ValueError):
    """Map is not continuous at the requested center."""


@dataclass(frozen=True)
class InclusionReport:
    """|Df|^n against K J_f + Sigma (or K J_f + |f - y0|^n Sigma).

    ``relative`` is residual / (1 + lhs). For a batch, the fields describe
    the sample with the largest relative residual and ``count`` the batch size.
    |Df| is the operator norm; ``lhs_frobenius`` repeats lhs with the
    Frobenius norm, which is larger by at most a factor 2^(n/2).
    """

    lhs: float
    rhs: float
    residual: float
    relative: float
    worst_point: tuple
    region: str
    count: int = 1
    lhs_frobenius: float = math.nan


@dataclass(frozen=True)
class BlowupWitness:
    """Radius inside which |f| >= M; the radius may underflow, its log does not."""

    M: float
    log_inv_radius: float

    @property
    def radius(self) -> float:
        return math.exp(-self.log_inv_radius)


def locate(family, pt, tol=1e-12):
    """(region, L, theta, r) of a single point; raises off-region."""
    if isinstance(pt, SpiralCoords):
        L, theta, r = -math.log(pt.r), pt.theta, pt.r
        tag = str(family.region_of(L, theta, r, tol)[()])
    elif isinstance(pt, PolarPoint):
        if not pt.r > 0:
            raise OutOfDomainError("the origin is excluded")
        L, theta, r = pt.log_inv_r, pt.theta, None
        tag = str(family.region_of(L, theta, None, tol)[()])
    else:
        raise TypeError(f"unsupported point type {type(pt).__name__}")
    if tag == "interface":
        raise InterfaceError(f"{pt} lies on an interface of {family.name}")
    if tag == "outside":
        raise OutOfDomainError(f"{pt} lies outside the domain of {family.name}")
    return tag, L, theta, r


def unit_samples(n: int, seed: int, dim: int = 2):
    """First n points of a scrambled Sobol sequence in [0, 1)^dim."""
    m = max(1, math.ceil(math.log2(max(n, 2))))
    return qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m)[:n]


def _inclusion_arrays(batch, y0=None, n=2):
    m = batch.scaled_df
    L = batch.log_inv_r
    if n == 2:
        # everything scaled by r^2, so no overflow deep inside the cusp
        lhs_s = opnorm_sq(m)
        sigma_s = np.exp(batch.log_sigma - 2.0 * L)
        if y0 is not None:
            sigma_s = sigma_s * np.sum((batch.f - np.asarray(y0)) ** 2, axis=-1)
        rhs_s = batch.K * det2(m) + sigma_s
        r2 = np.exp(-2.0 * L)
        relative = (lhs_s - rhs_s) / (r2 + lhs_s)
        scale = np.exp(2.0 * L)
        return lhs_s * scale, rhs_s * scale, (lhs_s - rhs_s) * scale, relative
    lhs = batch.opnorm_sq ** (0.5 * n)
    sigma = batch.sigma
    if y0 is not None:
        sigma = sigma * np.linalg.norm(batch.f - np.asarray(y0), axis=-1) ** n
    rhs = batch.K * batch.jac + sigma
    res = lhs - rhs
    return lhs, rhs, res, res / (1.0 + lhs)


def inclusion_batch(family, region, L, theta, r=None, y0=None, n=2) -> InclusionReport:
    """Worst relative inclusion residual over a batch of points of one region."""
    batch = family.fields(region, L, theta, r)
    lhs, rhs, res, rel = _inclusion_arrays(batch, y0, n)
    k = int(np.argmax(rel))
    worst = (float(batch.log_inv_r[k]), float(batch.theta[k]))
    frob_sq = float(np.sum(batch.scaled_df[k] ** 2))
    with np.errstate(over="ignore", divide="ignore"):
        frob = float(np.exp(0.5 * n * (np.log(frob_sq) + 2.0 * batch.log_inv_r[k])))
    return InclusionReport(float(lhs[k]), float(rhs[k]), float(res[k]), float(rel[k]), worst, region, len(batch),
                           frob)


def inclusion_residual(family, pt, y0=None, n: int = 2) -> InclusionReport:
    """Residual |Df|^n - (K J_f + Sigma) at one point.

    With ``y0`` the inhomogeneous term becomes |f - y0|^n Sigma. ``worst_point``
    is (log 1/r, theta).
    """
    region, L, theta, r = locate(family, pt)
    return inclusion_batch(family, region, L, theta, r, y0, n)


def inclusion_sweep(family, samples: int, seed: int, y0=None, **sample_kw):
    """Inclusion residuals on ``samples`` Sobol points split over all regions."""
    u = unit_samples(samples, seed)
    chunks = np.array_split(u, len(family.regions))
    return [inclusion_batch(family, reg, *family.sample(reg, c, **sample_kw), y0=y0) for reg, c in zip(family.regions, chunks)]


def _stencil(family, region, L, theta, r, step):
    rad, ang = family.local_scales(region, L, theta, r)
    s = step * rad
    d = step * ang
    L = np.asarray(L, dtype=float)
    if r is None:
        rp, rm = None, None
        Lp, Lm = L - np.log1p(s), L - np.log1p(-s)
    else:
        r = np.asarray(r, dtype=float)
        rp, rm = r * (1.0 + s), r * (1.0 - s)
        Lp, Lm = -np.log(rp), -np.log(rm)
    theta = np.asarray(theta, dtype=float)
    pts = [(Lp, theta, rp), (Lm, theta, rm), (L, theta + d, r), (L, theta - d, r)]
    for pL, pth, pr in pts:
        tags = family.region_of(pL, pth, pr)
        if np.any(tags != region):
            raise InterfaceError(f"finite-difference stencil leaves region {region} of {family.name}")
    fs = [family.fields(region, *p).f for p in pts]
    m = np.empty(fs[0].shape[:-1] + (2, 2))
    m[..., :, 0] = (fs[0] - fs[1]) / (2.0 * s)[..., None]
    m[..., :, 1] = (fs[2] - fs[3]) / (2.0 * d)[..., None]
    return m


def fd_scaled_batch(family, region, L, theta, r=None, step=1e-4, richardson=True):
    """Central-difference r*Df in the polar frame, optionally Richardson-extrapolated.

    ``step`` is relative to the family's local radial and angular scales.
    """
    L, theta = np.atleast_1d(L), np.atleast_1d(theta)
    r = None if r is None else np.atleast_1d(r)
    coarse = _stencil(family, region, L, theta, r, step)
    if not richardson:
        return coarse
    fine = _stencil(family, region, L, theta, r, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def _to_cartesian(m, theta):
    # columns of the polar-frame matrix are derivatives along e_r, e_theta
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return m @ rot.T


def fd_jacobian(family, pt, step: float = 1e-4, frame: str = "polar", richardson: bool = True):
    """Finite-difference Df at one point (polar or Cartesian frame)."""
    region, L, theta, r = locate(family, pt)
    m = fd_scaled_batch(family, region, L, theta, r, step, richardson)[0]
    df = m * math.exp(L)
    if frame == "cartesian":
        return _to_cartesian(df, theta)
    if frame != "polar":
        raise ValueError(f"unknown frame {frame!r}")
    return df


def fd_relative_errors(family, region, L, theta, r=None, step=1e-4):
    """Relative Frobenius error between analytic and Richardson FD derivatives."""
    exact = family.fields(region, L, theta, r).scaled_df
    approx = fd_scaled_batch(family, region, L, theta, r, step)
    return np.linalg.norm(approx - exact, axis=(-2, -1)) / np.linalg.norm(exact, axis=(-2, -1))


def fd_sweep(family, samples: int, seed: int, step=None, margin=0.05, **sample_kw):
    """Worst FD error per region over Sobol samples kept away from interfaces.

    The default step is the family's ``fd_step``.
    """
    step = family.fd_step if step is None else step
    u = unit_samples(samples, seed + 1)
    out = {}
    for reg, c in zip(family.regions, np.array_split(u, len(family.regions))):
        L, theta, r = family.sample(reg, c, margin=margin, resolvable=True, **sample_kw)
        out[reg] = float(np.max(fd_relative_errors(family, reg, L, theta, r, step)))
    return out


def interface_gaps(family, interface_id, params, offset=1e-6):
    """Richardson-extrapolated |f(side+) - f(side-)| at each curve parameter.

    The signed difference d(offset) is extrapolated as 2 d(offset/2) - d(offset)
    before taking the norm.
    """
    if interface_id not in family.interfaces:
        raise ValueError(f"{family.name} has no interface {interface_id!r}; known: {family.interfaces}")

    def diff(off):
        (ra, La, ta, rra), (rb, Lb, tb, rrb) = family.interface_pair(interface_id, params, off)
        return family.fields(ra, La, ta, rra).f - family.fields(rb, Lb, tb, rrb).f

    d0 = 2.0 * diff(0.5 * offset) - diff(offset)
    return np.linalg.norm(d0, axis=-1)


def interface_gap(family, interface_id, t, offset=1e-6) -> float:
    """Gap across one interface at curve parameter t (radius for the cusp, angle for the spiral)."""
    return float(interface_gaps(family, interface_id, np.atleast_1d(float(t)), offset)[0])


def blowup_witness(family, M: float) -> BlowupWitness:
    """Closed-form radius r(M) with |f| >= M on the punctured disk of that radius."""
    if not M > 0:
        raise ValueError("M must be positive")
    if not family.discontinuous_at_origin:
        raise UnsupportedError(f"{family.name} is continuous at the origin")
    return BlowupWitness(M, family.blowup_log_radius(M))


def confirm_blowup(family, M, samples=4096, seed=0, depth=60.0):
    """Smallest |f| over Sobol points inside the witness radius.

    Points are log-spaced in log(1/r) from the witness value L_M up to
    L_M + max(depth, L_M).
    """
    w = blowup_witness(family, M)
    u = unit_samples(samples, seed + 2)
    worst = math.inf
    for reg, c in zip(family.regions, np.array_split(u, len(family.regions))):
        L, theta, r = family.sample(reg, c, lo=w.log_inv_radius, hi=w.log_inv_radius + max(depth, w.log_inv_radius), log_spacing=True)
        f = family.fields(reg, L, theta, r).f
        inside = L >= w.log_inv_radius
        if np.any(inside):
            worst = min(worst, float(np.min(np.linalg.norm(f[inside], axis=-1))))
    return w, worst


def eval_f_cartesian(family, x, y):
    """f at Cartesian points, routing each point to its region."""
    if hasattr(family, "eval_cartesian"):
        return family.eval_cartesian(x, y)
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    out = np.empty(x.shape + (2,))
    for i, (a, b) in enumerate(zip(x.ravel(), y.ravel())):
        L, theta, r = family.from_cartesian(a, b)
        tag = str(family.region_of(L, theta, r)[()])
        if tag == "interface":
            tag = family.regions[0]
        if tag == "outside":
            raise OutOfDomainError(f"({a}, {b}) lies outside {family.name}")
        out.reshape(-1, 2)[i] = family.fields(tag, L, theta, r).f[0]
    return out


def _modulus_once(family, x0, radius, n_ang, n_rad):
    phi = np.linspace(-math.pi, math.pi, n_ang, endpoint=False)
    rho = radius * np.arange(1, n_rad + 1) / n_rad
    P, R = np.meshgrid(phi, rho)
    x = x0[0] + R * np.cos(P)
    y = x0[1] + R * np.sin(P)
    if x0[0] == 0.0 and x0[1] == 0.0:
        f0 = family.value_at_origin()
    else:
        f0 = eval_f_cartesian(family, np.array([x0[0]]), np.array([x0[1]]))[0]
    f = eval_f_cartesian(family, x.ravel(), y.ravel())
    return float(np.max(np.linalg.norm(f - f0, axis=-1)))


def modulus_samples(family, x0, radii, angular: int = 256, radial: int = 64):
    """Sampled modulus of continuity [(r, omega(r))] at x0.

    omega is the largest |f(x) - f(x0)| over a polar grid of ``angular`` x
    ``radial`` points in the disk of radius r about x0; a running maximum over
    increasing radii keeps it nondecreasing.
    """
    x0 = (float(x0[0]), float(x0[1]))
    if not family.continuous_at(x0) or (x0 == (0.0, 0.0) and not hasattr(family, "value_at_origin")):
        raise DiscontinuousPointError(f"{family.name} is not continuous at {x0}")
    radii = sorted(float(r) for r in radii)
    out, running = [], 0.0
    for rad in radii:
        running = max(running, _modulus_once(family, x0, rad, angular, radial))
        out.append((rad, running))
    return out


def modulus_stability(family, x0, radii, angular: int = 256, radial: int = 64):
    """Largest relative change of omega when both sample counts double."""
    a = modulus_samples(family, x0, radii, angular, radial)
    b = modulus_samples(family, x0, radii, 2 * angular, 2 * radial)
    return max(abs(wb - wa) / max(wb, 1e-300) for (_, wa), (_, wb) in zip(a, b))
