"""Numerical checks of the standalone inequalities behind the continuity theory.

* exp-Young: ab < exp(lambda a^(1/kappa)) + C b log^kappa(e + b) with an
  explicit C(kappa, lambda);
* a first-order differential inequality and its integrated decay bound;
* the triple-Jensen lower bound for the radial integral of 1/K;
* an empirical reverse Hoelder constant for a map family;
* log-exponent fits for sampled moduli of continuity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, stats

from .core import OutOfDomainError, opnorm_sq

__all__ = [
    "ExpYoungCase",
    "exp_young_A",
    "exp_young_constant",
    "exp_young_margin",
    "exp_young_suite",
    "DiffIneqInstance",
    "DiffIneqReport",
    "HypothesisOrderError",
    "check_diff_ineq",
    "random_diff_ineq_instance",
    "diff_ineq_suite",
    "TripleJensenInstance",
    "TripleJensenReport",
    "jensen_constant",
    "admissible_outer_radius",
    "triple_jensen_check",
    "ReverseHolderReport",
    "reverse_holder_ratio",
    "cubes_in_annulus",
    "fit_log_exponent",
]


# --------------------------------------------------------------------------
# exp-Young


@dataclass(frozen=True)
class ExpYoungCase:
    a: float
    b: float
    kappa: float
    lam: float

    def __post_init__(self):
        vals = (self.a, self.b, self.kappa, self.lam)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("exp-Young case fields must be finite")
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be nonnegative")
        if self.kappa <= 0 or self.lam <= 0:
            raise ValueError("kappa and lambda must be positive")


def exp_young_A(kappa: float) -> float:
    """Largest A with exp(t) >= A t^(2 kappa) for all t >= 0.

    e^t / t^(2 kappa) is minimized at t = 2 kappa, which gives
    A = (e / (2 kappa))^(2 kappa).
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return (math.e / (2.0 * kappa)) ** (2.0 * kappa)


def exp_young_constant(kappa: float, lam: float) -> float:
    """C(kappa, lambda) = (2/lambda)^kappa |log(1/(A lambda^(2 kappa)))|^kappa + (4/lambda)^kappa."""
    if not (kappa > 0 and lam > 0):
        raise ValueError("kappa and lambda must be positive")
    A = exp_young_A(kappa)
    log_term = abs(math.log(A) + 2.0 * kappa * math.log(lam))
    return (2.0 / lam) ** kappa * log_term**kappa + (4.0 / lam) ** kappa


def exp_young_margin(a, b, kappa, lam):
    """log(RHS) - log(LHS) of the exp-Young inequality, vectorized.

    Positive means the strict inequality holds; +inf when ab = 0. Everything
    is compared in log space since lambda a^(1/kappa) easily exceeds 700.
    """
    a, b, kappa, lam = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, kappa, lam)))
    C = np.vectorize(exp_young_constant, otypes=[float])(kappa, lam)
    with np.errstate(divide="ignore"):
        log_lhs = np.log(a) + np.log(b)
        log_exp = lam * a ** (1.0 / kappa)
        log_young = np.log(C) + np.log(b) + kappa * np.log(np.log(math.e + b))
    return np.logaddexp(log_exp, log_young) - log_lhs


def exp_young_suite(cases: int = 100_000, seed: int = 0, a_range=(1e-6, 1e6), b_range=(1e-6, 1e6),
                    kappa_range=(0.25, 4.0), lam_range=(0.25, 4.0)) -> dict:
    """Random exp-Young cases with log-uniform a, b and uniform kappa, lambda.

    Returns the number of violations, the smallest log-margin and the case
    attaining it.
    """
    rng = np.random.default_rng(seed)

    def log_uniform(lo, hi):
        return np.exp(rng.uniform(math.log(lo), math.log(hi), cases))

    a = log_uniform(*a_range)
    b = log_uniform(*b_range)
    kappa = rng.uniform(*kappa_range, cases)
    lam = rng.uniform(*lam_range, cases)
    margin = exp_young_margin(a, b, kappa, lam)
    k = int(np.argmin(margin))
    return {
        "cases": cases,
        "seed": seed,
        "violations": int(np.count_nonzero(~(margin > 0))),
        "min_log_margin": float(margin[k]),
        "worst_case": ExpYoungCase(float(a[k]), float(b[k]), float(kappa[k]), float(lam[k])),
    }


# --------------------------------------------------------------------------
# differential inequality  Phi <= A (Psi / Psi') Phi' + Gamma


Fn = Callable[[np.ndarray], np.ndarray]


@dataclass
class DiffIneqInstance:
    """Increasing functions on [0, R] with Phi(0) = 0 and Phi <= S.

    Each function comes with its derivative; all handles take and return
    numpy arrays.
    """

    A: float
    R: float
    S: float
    phi: Fn
    dphi: Fn
    psi: Fn
    dpsi: Fn
    gamma: Fn
    dgamma: Fn
    label: str = ""

    def __post_init__(self):
        if not (self.A > 0 and self.R > 0 and self.S > 0):
            raise ValueError("A, R and S must be positive")


class HypothesisOrderError(ValueError):
    """Input functions are not nondecreasing, or Phi(0) != 0, or Phi > S."""


@dataclass
class DiffIneqReport:
    status: str  # "holds", "fails" or "hypothesis_violated"
    max_excess: float  # max over the grid of (Phi - bound) / S
    hypothesis_excess: float  # max of (Phi - A Psi Phi'/Psi' - Gamma) / S
    constant: float
    r: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)

    @property
    def holds(self):
        return self.status == "holds"


def _diff_ineq_grid(R, n):
    geo = np.geomspace(R * 1e-8, R, n // 2)
    lin = np.linspace(R / n, R, n - n // 2)
    return np.unique(np.concatenate([geo, lin]))


def check_diff_ineq(inst: DiffIneqInstance, grid: int = 200, tol: float = 1e-8) -> DiffIneqReport:
    """Check the integrated decay bound on a grid of (0, R].

    The bound is
        Gamma(r) + Psi^(1/A)(r) [ (S - Gamma(R)) / Psi^(1/A)(R) + int_r^R Gamma'(s) / Psi^(1/A)(s) ds ],
    with the inner integral by adaptive quadrature between grid points.
    Excesses are measured relative to S.
    """
    r = _diff_ineq_grid(inst.R, grid)
    phi, psi, gam = (np.asarray(f(r), dtype=float) for f in (inst.phi, inst.psi, inst.gamma))
    slack = tol * inst.S
    for name, v in (("Phi", phi), ("Psi", psi), ("Gamma", gam)):
        if np.any(np.diff(v) < -slack):
            raise HypothesisOrderError(f"{name} is not nondecreasing on the grid")
    if abs(float(np.asarray(inst.phi(np.array([0.0])))[0])) > slack:
        raise HypothesisOrderError("Phi(0) must vanish")
    if np.any(phi > inst.S + slack):
        raise HypothesisOrderError("Phi exceeds S")
    if np.any(psi <= 0):
        raise HypothesisOrderError("Psi must be positive on (0, R]")

    rhs_h = inst.A * psi / np.asarray(inst.dpsi(r)) * np.asarray(inst.dphi(r)) + gam
    hyp = float(np.max(phi - rhs_h)) / inst.S
    inv_a = 1.0 / inst.A
    psi_R = float(np.asarray(inst.psi(np.array([inst.R])))[0])
    gam_R = float(np.asarray(inst.gamma(np.array([inst.R])))[0])
    C = (inst.S - gam_R) / psi_R**inv_a
    if hyp > tol:
        return DiffIneqReport("hypothesis_violated", math.nan, hyp, C, r, phi, np.full_like(r, math.nan))

    def integrand(s):
        s = np.array([s])
        return float(np.asarray(inst.dgamma(s))[0] / np.asarray(inst.psi(s))[0] ** inv_a)

    # tail[i] = int_{r_i}^{R} integrand
    pieces = [integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=200)[0] for a, b in zip(r[:-1], r[1:])]
    tail = np.append(np.cumsum(pieces[::-1])[::-1], 0.0)
    bound = gam + psi**inv_a * (C + tail)
    excess = float(np.max(phi - bound)) / inst.S
    return DiffIneqReport("holds" if excess <= tol else "fails", excess, hyp, C, r, phi, bound)


_PSI_FAMILIES = {
    "power": (lambda k: (lambda r: r**k, lambda r: k * r ** (k - 1.0))),
    "expm1": (lambda k: (lambda r: np.expm1(k * r), lambda r: k * np.exp(k * r))),
    "saturating": (lambda k: (lambda r: r / (1.0 + k * r), lambda r: 1.0 / (1.0 + k * r) ** 2)),
}


def _gamma_family(rng):
    kind = rng.choice(["power", "expm1", "offset_power", "zero"])
    c = rng.uniform(0.0, 2.0)
    if kind == "power":
        al = rng.uniform(0.3, 3.0)
        return kind, (lambda r: c * r**al), (lambda r: c * al * r ** (al - 1.0))
    if kind == "expm1":
        be = rng.uniform(0.2, 3.0)
        return kind, (lambda r: c * np.expm1(be * r)), (lambda r: c * be * np.exp(be * r))
    if kind == "offset_power":
        c0, al = rng.uniform(0.0, 0.5), rng.uniform(1.0, 3.0)
        return kind, (lambda r: c0 + c * r**al), (lambda r: c * al * r ** (al - 1.0))
    return kind, (lambda r: np.zeros_like(r)), (lambda r: np.zeros_like(r))


def _solve_phi(A, R, phi_R, psi, dpsi, gamma, sigma, floor):
    """Phi with Phi' = sigma(r) Psi'/(A Psi) max(Phi - Gamma, floor Phi), Phi(R) = phi_R.

    Since sigma >= 1, Phi - Gamma <= A (Psi/Psi') Phi' holds by construction.
    Below r_min = 1e-8 R, Phi continues as Phi(r_min) (Psi(r)/Psi(r_min))^(1/A),
    which also satisfies the hypothesis and reaches 0 at r = 0.
    """
    r_min = R * 1e-8

    def rate(r, phi):
        g = gamma(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(phi > 0, np.maximum(1.0 - g / phi, floor), floor)
        return sigma(r) * dpsi(r) / (A * psi(r)) * frac

    # y = log Phi, integrated from R down to r_min
    def rhs(r, y):
        return rate(r, math.exp(y[0]))

    sol = integrate.solve_ivp(rhs, (R, r_min), [math.log(phi_R)], method="DOP853",
                              rtol=1e-12, atol=1e-13, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"Phi generator failed: {sol.message}")
    phi_min = math.exp(sol.sol(r_min)[0])
    psi_min = float(psi(np.array([r_min]))[0])

    def phi(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        hi = r >= r_min
        out[hi] = np.exp(sol.sol(r[hi])[0]) if np.any(hi) else out[hi]
        lo = ~hi
        out[lo] = phi_min * (psi(r[lo]) / psi_min) ** (1.0 / A)
        return out

    def dphi(r):
        r = np.asarray(r, dtype=float)
        p = phi(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            below = np.where(r > 0, p * dpsi(r) / (A * psi(r)), 0.0)
        return np.where(r >= r_min, rate(r, p) * p, below)

    return phi, dphi


def random_diff_ineq_instance(rng: np.random.Generator, label: str = "") -> DiffIneqInstance:
    """An instance satisfying the hypothesis by construction (see _solve_phi)."""
    A = rng.uniform(0.3, 3.0)
    R = rng.uniform(0.5, 2.0)
    psi_kind = rng.choice(sorted(_PSI_FAMILIES))
    psi, dpsi = _PSI_FAMILIES[psi_kind](rng.uniform(0.5, 3.0))
    gamma_kind, gamma, dgamma = _gamma_family(rng)
    amp, freq, shift = rng.uniform(0.0, 3.0), rng.uniform(0.5, 10.0), rng.uniform(0.0, 2 * math.pi)

    def sigma(r):
        return 1.0 + 0.5 * amp * (1.0 + np.sin(freq * r + shift))

    floor = rng.uniform(0.05, 0.5)
    phi_R = rng.uniform(0.5, 5.0)
    phi, dphi = _solve_phi(A, R, phi_R, psi, dpsi, gamma, sigma, floor)
    S = phi_R * (1.0 + rng.uniform(0.0, 1.0))
    label = label or f"psi={psi_kind} gamma={gamma_kind}"
    return DiffIneqInstance(A, R, S, phi, dphi, psi, dpsi, gamma, dgamma, label)


def diff_ineq_suite(instances: int = 20, seed: int = 0, grid: int = 200, tol: float = 1e-8) -> list[DiffIneqReport]:
    """Check the decay bound on randomized instances; one child seed per instance."""
    seeds = np.random.SeedSequence(seed).spawn(instances)
    return [check_diff_ineq(random_diff_ineq_instance(np.random.default_rng(s), f"case {i}"), grid, tol)
            for i, s in enumerate(seeds)]


# --------------------------------------------------------------------------
# triple Jensen


@dataclass
class TripleJensenInstance:
    """Radial distortion profile K(s) about a center, on the ball of radius ``domain_radius``."""

    n: int
    lam: float
    K: Callable[[float], float]
    R: float
    r: float
    domain_radius: float
    center: tuple = (0.0, 0.0)
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if not (self.lam > 0 and self.R > 0 and self.r > 0 and self.domain_radius > 0):
            raise ValueError("lambda and all radii must be positive")

    def K_tilde(self, s):
        return max(float(self.K(s)), (self.n - 2) / self.lam)


@dataclass
class TripleJensenReport:
    lhs: float
    rhs: float
    margin: float
    constant: float
    R0: float
    window: tuple  # (r, R) actually used
    lhs_error: float


def _sphere_area(n):
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def jensen_constant(inst: TripleJensenInstance) -> float:
    """||exp(lambda K~)||_L1 / |S^(n-1)| over the domain ball: int_0^D s^(n-1) e^(lambda K~(s)) ds."""

    def integrand(t):
        s = math.exp(t)
        return 0.0 if s == 0.0 else math.exp(inst.n * t + inst.lam * inst.K_tilde(s))

    val, _ = integrate.quad(integrand, -np.inf, math.log(inst.domain_radius), epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def admissible_outer_radius(inst: TripleJensenInstance) -> float:
    """R0 with R0^n = C e; the bound needs R < min(R0, domain radius)."""
    return (jensen_constant(inst) * math.e) ** (1.0 / inst.n)


def triple_jensen_check(inst: TripleJensenInstance) -> TripleJensenReport:
    """LHS int_r^R ds / (s K~(s)) against (lambda/n)(loglog(C/r^n) - loglog(C e^2/R^n)).

    For a radial profile the spherical mean of K~^(n-1) is K~(s)^(n-1), so
    the LHS is a 1D integral, taken in t = log s.
    """
    C = jensen_constant(inst)
    R0 = (C * math.e) ** (1.0 / inst.n)
    if not inst.R < min(R0, inst.domain_radius):
        raise ValueError(f"R = {inst.R} must be below min(R0, d) = {min(R0, inst.domain_radius)}")
    if not inst.r < inst.R / math.e**3:
        raise ValueError(f"r = {inst.r} must be below R / e^3 = {inst.R / math.e**3}")
    lhs, err = integrate.quad(lambda t: 1.0 / inst.K_tilde(math.exp(t)), math.log(inst.r), math.log(inst.R),
                              epsabs=0.0, epsrel=1e-12, limit=200)
    n = inst.n
    rhs = inst.lam / n * (math.log(math.log(C) - n * math.log(inst.r))
                          - math.log(math.log(C) + 2.0 - n * math.log(inst.R)))
    return TripleJensenReport(lhs, rhs, lhs - rhs, C, R0, (inst.r, inst.R), err)


# --------------------------------------------------------------------------
# reverse Hoelder monitor


@dataclass
class ReverseHolderReport:
    max_ratio: float
    ratios: list
    worst_cube: tuple  # (center, half_width)


def _cartesian_fields(family, x, y):
    """|Df|^2, K and Sigma at Cartesian points (operator norm squared)."""
    L, theta, r = family.from_cartesian(x, y)
    L = np.asarray(L, dtype=float)
    theta = np.asarray(theta, dtype=float)
    tags = np.asarray(family.region_of(L, theta, r), dtype=object)
    on_curve = tags == "interface"
    if np.any(on_curve):
        # measure zero: nudge off the curve
        theta = np.where(on_curve, theta + 1e-12, theta)
        tags = np.asarray(family.region_of(L, theta, r), dtype=object)
    if np.any(tags == "outside"):
        raise OutOfDomainError(f"cube leaves the domain of {family.name}")
    df2, K, sig = (np.empty(L.shape) for _ in range(3))
    for tag in set(tags.tolist()):
        sel = tags == tag
        rr = None if r is None else np.asarray(r)[sel]
        b = family.fields(tag, L[sel], theta[sel], rr)
        with np.errstate(divide="ignore"):
            df2[sel] = np.exp(np.log(opnorm_sq(b.scaled_df)) + 2.0 * b.log_inv_r)
        K[sel] = b.K
        sig[sel] = b.sigma
    return df2, K, sig


def _cube_nodes(center, h, order, cells):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-h, h, cells + 1)
    xs = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])]) / (2.0 * h)
    X, Y = np.meshgrid(center[0] + xs, center[1] + xs, indexing="ij")
    W = np.outer(ws, ws)
    return X.ravel(), Y.ravel(), W.ravel()


def reverse_holder_ratio(family, centers, half_widths, order: int = 8, cells: int = 4) -> ReverseHolderReport:
    """Empirical constant of the planar reverse Hoelder inequality.

    Per cube Q (and its double 2Q) the ratio is
        (mean_Q |Df|^2)^(2/3) / ( sup_2Q K^(2/3) [ mean_2Q |Df|^(4/3) + (mean_2Q Sigma)^(2/3) ] ),
    with means by tensor Gauss-Legendre and the sup of K over the 2Q nodes.
    A cube with vanishing numerator has ratio 0.
    """
    if np.ndim(half_widths) == 0:
        half_widths = [float(half_widths)] * len(centers)
    ratios = []
    for c, h in zip(centers, half_widths):
        xq, yq, wq = _cube_nodes(c, h, order, cells)
        x2, y2, w2 = _cube_nodes(c, 2.0 * h, order, cells)
        df2_q, _, _ = _cartesian_fields(family, xq, yq)
        df2_2, K2, sig2 = _cartesian_fields(family, x2, y2)
        lhs = float(wq @ df2_q) ** (2.0 / 3.0)
        if lhs == 0.0:
            ratios.append(0.0)
            continue
        denom = float(np.max(K2)) ** (2.0 / 3.0) * (float(w2 @ df2_2 ** (2.0 / 3.0)) + float(w2 @ sig2) ** (2.0 / 3.0))
        ratios.append(lhs / denom)
    k = int(np.argmax(ratios))
    return ReverseHolderReport(float(ratios[k]), ratios, (tuple(centers[k]), float(half_widths[k])))


def cubes_in_annulus(inner: float, outer: float, half_width: float):
    """Centers on a 2h-spaced grid whose doubled cubes lie in inner <= |x| <= outer."""
    h = half_width
    ticks = np.arange(-outer, outer + 1e-12, 2.0 * h) + h
    out = []
    for x in ticks:
        for y in ticks:
            cx = np.array([x - 2 * h, x + 2 * h])
            cy = np.array([y - 2 * h, y + 2 * h])
            far = math.hypot(np.max(np.abs(cx)), np.max(np.abs(cy)))
            near = math.hypot(0.0 if cx[0] <= 0 <= cx[1] else np.min(np.abs(cx)),
                              0.0 if cy[0] <= 0 <= cy[1] else np.min(np.abs(cy)))
            if far <= outer and near >= inner:
                out.append((float(x), float(y)))
    return out


# --------------------------------------------------------------------------
# modulus exponent


def fit_log_exponent(samples, min_samples: int = 8, min_decades: float = 6.0):
    """alpha with omega ~ log^-alpha(1/r): minus the slope of log omega on log log(1/r).

    Returns (alpha_hat, standard error). Radii must lie in (0, 1).
    """
    r = np.array([s[0] for s in samples], dtype=float)
    w = np.array([s[1] for s in samples], dtype=float)
    if len(r) < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {len(r)}")
    if np.any(w <= 0):
        raise ValueError("modulus samples must be positive")
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("radii must lie in (0, 1)")
    if math.log10(r.max() / r.min()) < min_decades:
        raise ValueError(f"radii must span at least {min_decades:g} decades")
    fit = stats.linregress(np.log(-np.log(r)), np.log(w))
    return -float(fit.slope), float(fit.stderr)
