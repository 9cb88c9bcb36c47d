"""Polar Gauss-Legendre quadrature toward a singular origin.

Integrals are organized by log-radius L = log(1/r). A region is cut into
shells [L_k, L_k+1]; each shell into tensor Gauss-Legendre cells laid out
between the region's bounding curves (angular bounds for cusp sectors,
radial strip bounds for spiral turns). The innermost piece [L_c, inf) is
mapped to a finite interval, u = 1/L for sectors and disks, w = 1/log theta
for spiral strips.

Norm integrands are summed in log space with logsumexp, so exp(lambda K)
deep inside a cusp is integrated without overflow. Shell values are reduced
with math.fsum, which is exact-rounded and therefore independent of the
order in which worker threads finish.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .core import TWO_PI
from .spiral import SpiralMap, g_step, radial_bounds

REGION_KINDS = ("cusp_A", "cusp_B", "spiral_A", "spiral_B", "disk", "annulus")
QUANTITIES = ("K", "sigma", "sigma_over_K", "df_opnorm_sq", "expK", "custom")
TRANSFORMS = ("raw", "power", "zygmund", "exp")

EXP_LIMIT = 700.0
MAX_CELL_WIDTH = 2.0  # in log-radius


class QuadratureError(RuntimeError):
    """Integrand evaluation failed inside a cell."""


@dataclass(frozen=True)
class RegionSpec:
    """Integration region.

    Attributes
    ----------
    kind : str
        cusp_A, cusp_B (both reflections), spiral_A, spiral_B, disk or annulus.
    family : map family or None
        Owner of the region geometry and fields; optional for a bare disk.
    r_inner, r_outer : float
        Radial limits; r_outer defaults to the family's outer radius (1 for
        a bare disk), r_inner = 0 includes the origin.
    """

    kind: str
    family: object = None
    r_inner: float = 0.0
    r_outer: float | None = None

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind.startswith(("cusp", "spiral")) and self.family is None:
            raise ValueError(f"{self.kind} needs its map family")
        if self.kind.startswith("spiral") and not isinstance(self.family, SpiralMap):
            raise ValueError(f"{self.kind} needs a spiral family")
        if self.r_outer is None:
            outer = math.exp(-self.family.log_inv_r_outer) if self.family is not None else 1.0
            object.__setattr__(self, "r_outer", outer)
        if self.family is not None:
            limit = math.exp(-self.family.log_inv_r_outer)
            if self.r_outer > limit * (1.0 + 1e-12):
                raise ValueError(f"r_outer={self.r_outer} exceeds the domain radius {limit}")
        if not 0.0 <= self.r_inner < self.r_outer:
            raise ValueError("need 0 <= r_inner < r_outer")
        if self.kind == "annulus" and self.r_inner == 0.0:
            raise ValueError("an annulus needs r_inner > 0")

    @property
    def parts(self):
        return {
            "cusp_A": ("A1", "A2"),
            "cusp_B": ("B1", "B2"),
            "spiral_A": ("A",),
            "spiral_B": ("B",),
        }.get(self.kind, ("disk",))

    @property
    def L_outer(self):
        return -math.log(self.r_outer)

    @property
    def L_inner(self):
        return math.inf if self.r_inner == 0.0 else -math.log(self.r_inner)

    @property
    def L_limit(self):
        """Deepest log-radius the family can evaluate (inf for most)."""
        return getattr(self.family, "max_log_inv_r", math.inf)


def whole_domain(family) -> tuple:
    """RegionSpecs covering a family's whole domain."""
    if isinstance(family, SpiralMap):
        kinds = ("spiral_A", "spiral_B")
    elif "disk" in family.regions:
        kinds = ("disk",)
    else:
        kinds = ("cusp_A", "cusp_B")
    return tuple(RegionSpec(k, family) for k in kinds)


@dataclass(frozen=True)
class Transform:
    """raw F; power F^p; zygmund F log^mu(e + F); exp exp(lambda F).

    Everything is evaluated in log space, so exp(lambda F) never overflows
    during integration. ``clamp`` instead caps exp-transform exponents at 700
    and counts the saturated samples.
    """

    kind: str = "raw"
    param: float = 1.0
    clamp: bool = False

    def __post_init__(self):
        if self.kind not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.kind!r}")
        if self.kind == "power" and not self.param >= 1.0:
            raise ValueError("power transform needs p >= 1")
        if self.kind == "zygmund" and not self.param >= 0.0:
            raise ValueError("zygmund transform needs mu >= 0")
        if self.kind == "exp" and not self.param > 0.0:
            raise ValueError("exp transform needs lambda > 0")

    @classmethod
    def power(cls, p):
        return cls("power", p)

    @classmethod
    def zygmund(cls, mu):
        return cls("zygmund", mu)

    @classmethod
    def exp(cls, lam, clamp=False):
        return cls("exp", lam, clamp)

    def apply_log(self, log_f):
        """log of the transformed field from log F (F >= 0, log 0 = -inf)."""
        if self.kind == "raw":
            return log_f, 0
        if self.kind == "power":
            return self.param * log_f, 0
        if self.kind == "zygmund":
            with np.errstate(divide="ignore"):
                loglog = np.log(np.logaddexp(1.0, log_f))
            return np.where(np.isneginf(log_f), -np.inf, log_f + self.param * loglog), 0
        expo = self.param * np.exp(log_f)
        over = expo > EXP_LIMIT
        if self.clamp:
            return np.minimum(expo, EXP_LIMIT), int(np.count_nonzero(over))
        return expo, 0

    def describe(self):
        return self.kind if self.kind == "raw" else f"{self.kind}({self.param:g})"


@dataclass(frozen=True)
class NormQuery:
    """Which field, which transform, over which region, how deep.

    ``region`` may be a RegionSpec or a tuple of them (a disjoint union).
    ``custom`` is a callable FieldBatch -> log F used when quantity='custom'.
    """

    quantity: str
    transform: Transform = field(default_factory=Transform)
    region: object = None
    depth: int = 40
    ratio: float = 0.5
    cells: int = 2
    order: int = 8
    custom: Callable | None = None
    workers: int = 1

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.quantity == "custom" and self.custom is None:
            raise ValueError("custom quantity needs a callable")
        if self.region is None:
            raise ValueError("a region is required")
        if self.depth < 1 or self.cells < 1 or self.order < 1:
            raise ValueError("depth, cells and order must be positive")

    @property
    def regions(self):
        return self.region if isinstance(self.region, tuple) else (self.region,)


class NormValue(NamedTuple):
    """Integral, order-doubling error and log of the integral.

    ``overflow`` names the sample with the largest transformed integrand when
    the value exceeds the float range (value and error are then inf).
    ``truncated_at`` is the log-radius where integration stopped short of
    the origin, if it did.
    """

    value: float
    error: float
    log_value: float
    saturated: int = 0
    overflow: dict | None = None
    truncated_at: float | None = None


@dataclass
class ConvergenceVerdict:
    """Shell decomposition of an integral and its convergence call.

    shell_contributions[k] integrates over r in [r_out ratio^(k+1), r_out ratio^k];
    log_contributions holds the same numbers as logs (they can exceed the
    float range for exp transforms). fitted_slope is log q for the geometric
    model c_k ~ q^k and s for the power model c_k ~ ell_k^-s, ell_k being
    the log-radius at the shell midpoint. Under the power model
    log_exponent repeats s, and in the borderline band log_correction is the
    beta of c_k ell ~ log^-beta(ell).
    """

    partial_value: float
    shell_contributions: list
    fitted_slope: float
    verdict: str
    verdict_basis: str
    model: str = ""
    log_contributions: list = field(default_factory=list)
    log_partial: float = -math.inf
    ratio: float = 0.5
    tail_bound: float = math.nan
    log_exponent: float | None = None
    log_correction: float | None = None
    saturated: int = 0
    shell_mid_log_radius: list = field(default_factory=list)


# ---------------------------------------------------------------- nodes


@dataclass
class _Nodes:
    part: str
    L: np.ndarray
    theta: np.ndarray
    r: np.ndarray | None
    log_w: np.ndarray


_GL_CACHE: dict = {}


def _gl(order):
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def _cell_edges(a, b, n):
    return np.linspace(a, b, n + 1)


CORE_LEVELS = 24


def _graded_edges(top, n):
    """Edges on [0, top] refined geometrically toward 0, n cells per halving.

    Core-cell integrands behave like powers of the substituted variable at
    0, which uniform cells resolve only algebraically.
    """
    inner = top * 2.0 ** -np.arange(CORE_LEVELS, 0, -1 / n)
    return np.concatenate([[0.0], inner, [top]])


def _tensor(edges_x, edges_y, order):
    """Tensor GL nodes on a grid of cells; returns x, y, log weight (unit Jacobian)."""
    x, w = _gl(order)
    hx = np.diff(edges_x)
    hy = np.diff(edges_y)
    xs = (edges_x[:-1, None] + hx[:, None] * x).ravel()
    wx = (hx[:, None] * w).ravel()
    ys = (edges_y[:-1, None] + hy[:, None] * x).ravel()
    wy = (hy[:, None] * w).ravel()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.log(np.outer(wx, wy))
    return X.ravel(), Y.ravel(), W.ravel()


def _radial_cells(a, b, cells):
    return max(cells, math.ceil((b - a) / MAX_CELL_WIDTH))


def _sector_nodes(spec, part, a, b, order, cells):
    """Disk or cusp sector between log-radii a < b (b may be inf)."""
    core = math.isinf(b)
    if core:
        # L = 1/u, dL = du/u^2
        xs, phis, lw = _tensor(_graded_edges(1.0 / a, cells), _cell_edges(0.0, 1.0, cells), order)
        L = 1.0 / xs
        lw = lw - 2.0 * np.log(xs)
    else:
        xs, phis, lw = _tensor(_cell_edges(a, b, _radial_cells(a, b, cells)), _cell_edges(0.0, 1.0, cells), order)
        L = xs
    if part == "disk":
        lo, hi = -math.pi, math.pi
        width = TWO_PI
        theta = lo + phis * width
        lw = lw + math.log(width)
    else:
        lo, hi = spec.family.angular_bounds(part, L)
        theta = lo + phis * (hi - lo)
        lw = lw + np.log(hi - lo)
    # area element r dr dtheta = e^{-2L} dL dtheta
    return _Nodes(part, L, theta, None, lw - 2.0 * L)


def _spiral_theta_at(spec, part, side, r):
    """Winding angle where a strip edge passes through radius r."""
    # side 'lo' or 'hi' edge of the strip; both edges are decreasing in theta
    t0 = spec.family.params.theta0

    def edge(theta):
        lo, hi = radial_bounds(spec.family.params, part, theta)
        return math.log(lo if side == "lo" else hi) - math.log(r)

    if edge(t0) <= 0:
        return t0
    guess = math.exp(_w_of_log(-math.log(r)))
    a, b = max(t0, 0.5 * guess - TWO_PI), 2.0 * guess + 4.0 * TWO_PI
    if edge(a) <= 0:
        a = t0
    while edge(b) > 0:
        b *= 2.0
    return optimize.brentq(edge, a, b, xtol=1e-14 * b, rtol=1e-15, maxiter=200)


def _w_of_log(L):
    # log theta for theta log theta = e^L
    w = max(L - math.log(max(L, 1.0)), 0.5)
    for _ in range(60):
        step = (w + math.log(w) - L) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * w:
            break
    return w


def _spiral_nodes(spec, part, a, b, order, cells):
    """Strip region between log-radii a < b, in (log theta, fraction) cells."""
    params = spec.family.params
    r_hi = math.exp(-a)
    th_start = _spiral_theta_at(spec, part, "lo", r_hi)  # strip bottom reaches r_hi
    th_k1 = _spiral_theta_at(spec, part, "hi", r_hi)  # strip top drops below r_hi
    pieces = []
    if math.isinf(b):
        th_end = th_k1
        breaks = sorted({max(th_start, params.theta0), max(th_k1, params.theta0)})
    else:
        r_lo = math.exp(-b)
        th_k2 = _spiral_theta_at(spec, part, "lo", r_lo)
        th_end = _spiral_theta_at(spec, part, "hi", r_lo)
        breaks = sorted({max(t, params.theta0) for t in (th_start, th_k1, th_k2, th_end)})
    for t_a, t_b in zip(breaks[:-1], breaks[1:]):
        if t_b > t_a:
            pieces.append((math.log(t_a), math.log(t_b)))
    parts = []
    for la, lb in pieces:
        n = max(cells, math.ceil((lb - la) / 0.5))
        x, s, lw = _tensor(_cell_edges(la, lb, n), _cell_edges(0.0, 1.0, cells), order)
        parts.append((np.exp(x), s, lw + x))  # d theta = theta d log theta
    if math.isinf(b):
        # full strips beyond th_end: log theta = 1/w, d theta = theta / w^2 dw
        w_hi = 1.0 / math.log(max(th_end, params.theta0))
        x, s, lw = _tensor(_graded_edges(w_hi, cells), _cell_edges(0.0, 1.0, cells), order)
        lt = 1.0 / x
        with np.errstate(over="ignore"):
            theta = np.exp(lt)
        keep = np.isfinite(theta)
        parts.append((theta[keep], s[keep], (lw + lt - 2.0 * np.log(x))[keep]))
    if not parts:
        return _Nodes(part, np.empty(0), np.empty(0), np.empty(0), np.empty(0))
    theta = np.concatenate([p[0] for p in parts])
    s = np.concatenate([p[1] for p in parts])
    lw = np.concatenate([p[2] for p in parts])
    lo, hi = radial_bounds(params, part, theta)
    r_lo = 0.0 if math.isinf(b) else math.exp(-b)
    clipped = (lo < r_lo) | (hi > r_hi)
    # hi - lo cancels to theta * eps relative; an unclipped strip is exactly half a turn step
    width = np.where(clipped, 0.0, 0.5 * g_step(theta))
    lo = np.maximum(lo, r_lo)
    hi = np.minimum(hi, r_hi)
    width = np.where(clipped, np.maximum(hi - lo, 0.0), width)
    r = lo + s * width
    with np.errstate(divide="ignore"):
        lw = lw + np.log(width) + np.log(r)
    ok = width > 0
    return _Nodes(part, -np.log(r[ok]), theta[ok], r[ok], lw[ok])


def shell_nodes(spec: RegionSpec, part: str, a: float, b: float, order: int, cells: int) -> _Nodes:
    """Quadrature nodes of one region part between log-radii a < b."""
    if spec.kind.startswith("spiral"):
        return _spiral_nodes(spec, part, a, b, order, cells)
    return _sector_nodes(spec, part, a, b, order, cells)


# ---------------------------------------------------------------- fields


def _log_quantity(query, batch):
    q = query.quantity
    if q == "K":
        return batch.log_K
    if q == "sigma":
        return batch.log_sigma
    if q == "sigma_over_K":
        return batch.log_sigma - batch.log_K
    if q == "df_opnorm_sq":
        return batch.log_opnorm_sq
    if q == "expK":
        return batch.K
    return query.custom(batch)


def _shell_log_value(query, spec, a, b, order, cells):
    """log of the transformed integral over one shell of one region.

    Returns (log value, saturated sample count, largest-integrand sample).
    """
    logs, sat, peak = [], 0, None
    mirror = getattr(spec.family, "mirror_parts", {})
    for part in spec.parts:
        # fields on a mirrored part equal those on its partner at the antipode
        part = mirror.get(part, part)
        nodes = shell_nodes(spec, part, a, b, order, cells)
        if len(nodes.L) == 0:
            continue
        try:
            batch = spec.family.fields(part, nodes.L, nodes.theta, nodes.r)
            log_f = _log_quantity(query, batch)
        except Exception as exc:
            raise QuadratureError(f"{query.quantity} failed in {spec.kind}/{part} for L in [{a}, {b}]: {exc}") from exc
        tf, n_sat = query.transform.apply_log(log_f)
        sat += n_sat
        terms = nodes.log_w + tf
        logs.append(logsumexp(terms))
        k = int(np.argmax(tf))
        if peak is None or tf[k] > peak["log_integrand"]:
            peak = {"log_inv_r": float(nodes.L[k]), "theta": float(nodes.theta[k]), "log_integrand": float(tf[k])}
    if not logs:
        return -math.inf, sat, peak
    return float(logsumexp(logs)), sat, peak


def _shell_edges(spec, ratio, k_max):
    delta = -math.log(ratio)
    L0 = spec.L_outer
    edges = L0 + delta * np.arange(k_max + 1)
    stop = min(spec.L_inner, spec.L_limit)
    return [(float(a), float(min(b, stop))) for a, b in zip(edges[:-1], edges[1:]) if a < stop]


def _map_ordered(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _log_profile(query, ratio, k_max, order=None, cells=None):
    """Per-shell log values summed over the regions of a union, plus saturation count."""
    order = query.order if order is None else order
    cells = query.cells if cells is None else cells
    edges = [_shell_edges(spec, ratio, k_max) for spec in query.regions]
    n = min(len(e) for e in edges)
    jobs = [(spec, k, e[k]) for spec, e in zip(query.regions, edges) for k in range(n)]
    results = _map_ordered(lambda j: _shell_log_value(query, j[0], j[2][0], j[2][1], order, cells), jobs, query.workers)
    logs = [[] for _ in range(n)]
    sat = 0
    for (_, k, _), (value, n_sat, _) in zip(jobs, results):
        logs[k].append(value)
        sat += n_sat
    return [float(logsumexp(v)) for v in logs], sat


# ---------------------------------------------------------------- public


def integrate(F=None, region: RegionSpec = None, cells_per_shell: int = 2, order: int = 8, log_F=None, workers=1):
    """Integral of a scalar field over a region, with an order-doubling error estimate.

    Pass either ``F(r, theta)`` (linear values) or ``log_F(log_inv_r, theta)``
    (log values, needed when the field is only representable in log form
    near r = 0). The region is cut into shells of ratio 1/2; with
    r_inner = 0 the origin is included through a substituted core cell.
    """
    if (F is None) == (log_F is None):
        raise ValueError("pass exactly one of F and log_F")
    if region is None:
        raise ValueError("a region is required")

    def run(ordr):
        edges = _integration_edges(region)

        def shell(ab):
            a, b = ab
            total = []
            for part in region.parts:
                nodes = shell_nodes(region, part, a, b, ordr, cells_per_shell)
                if len(nodes.L) == 0:
                    continue
                try:
                    if log_F is not None:
                        total.append(float(np.sum(np.exp(nodes.log_w + log_F(nodes.L, nodes.theta)))))
                    else:
                        r = np.exp(-nodes.L) if nodes.r is None else nodes.r
                        total.append(float(np.sum(np.exp(nodes.log_w) * F(r, nodes.theta))))
                except Exception as exc:
                    raise QuadratureError(f"integrand failed in {region.kind}/{part} for log(1/r) in [{a}, {b}]: {exc}") from exc
            return math.fsum(total)

        return math.fsum(_map_ordered(shell, edges, workers))

    coarse = run(order)
    fine = run(2 * order)
    return fine, abs(fine - coarse)


def _integration_edges(region, core_depth=8.0):
    a0, b0 = region.L_outer, region.L_inner
    delta = math.log(2.0)
    stop = b0 if math.isfinite(b0) else a0 + core_depth
    n = max(1, math.ceil((stop - a0) / delta - 1e-12))
    edges = list(np.linspace(a0, stop, n + 1))
    out = list(zip(edges[:-1], edges[1:]))
    if not math.isfinite(b0):
        out.append((stop, math.inf))
    return [(float(a), float(b)) for a, b in out]


def norm_value(q: NormQuery) -> NormValue:
    """Integral of the transformed quantity over the whole query region.

    Shells down to ``q.depth`` use ratio ``q.ratio``; regions reaching the
    origin add a substituted core cell beyond them. The error is the change
    under order doubling. The integral is taken at face value: use
    shell_profile to decide whether it converges at all. Families that
    cannot evaluate their fields arbitrarily close to the origin stop at
    their ``max_log_inv_r``, which is then reported as ``truncated_at``.
    """
    truncated = None

    def total(order):
        nonlocal truncated
        logs, sat, peak = [], 0, None
        for spec in q.regions:
            edges = _shell_edges(spec, q.ratio, q.depth)
            if math.isinf(spec.L_inner) and edges:
                if math.isinf(spec.L_limit):
                    edges.append((edges[-1][1], math.inf))
                else:
                    if edges[-1][1] < spec.L_limit:
                        edges.append((edges[-1][1], spec.L_limit))
                    truncated = spec.L_limit
            vals = _map_ordered(lambda ab: _shell_log_value(q, spec, ab[0], ab[1], order, q.cells), edges, q.workers)
            for v, n_sat, pk in vals:
                logs.append(v)
                sat += n_sat
                if pk is not None and (peak is None or pk["log_integrand"] > peak["log_integrand"]):
                    peak = pk
        return (float(logsumexp(logs)) if logs else -math.inf), sat, peak

    lc, _, _ = total(q.order)
    lf, sat, peak = total(2 * q.order)
    if math.isinf(lf):
        return NormValue(0.0, 0.0, lf, sat, None, truncated)
    rel = abs(math.expm1(lc - lf)) if math.isfinite(lc) else 1.0
    if lf >= 709.0:
        # the value itself is not a float; report where the integrand peaks
        return NormValue(math.inf, math.inf, lf, sat, peak, truncated)
    value = math.exp(lf)
    return NormValue(value, value * rel, lf, sat, None, truncated)


MAX_PROBE_WIDTH = 600.0


def probe_ratio(q: NormQuery, k_max: int, drop: float = 40.0) -> float:
    """Shell ratio that puts the decaying tail of the integrand in the fit window.

    The log radial density is probed on unit-width cells at geometrically
    spread depths. With L_cut the first depth past the peak where the density
    has fallen by ``drop`` (in log units), shells get log-width
    max(log 2, 2 (L_cut - L_outer) / k_max), so the second half of the
    profile lies beyond L_cut. Widths are capped at MAX_PROBE_WIDTH to keep
    the ratio a normal float.
    """
    L0 = q.regions[0].L_outer
    depth_cap = min(min(s.L_inner, s.L_limit) for s in q.regions)
    offsets = np.concatenate([[0.0], np.geomspace(0.25, 1e6, 160)])
    dens = []
    for a in offsets:
        if L0 + a + 1.0 > depth_cap:
            break
        lv = -math.inf
        for s in q.regions:
            lv = np.logaddexp(lv, _shell_log_value(q, s, s.L_outer + a, s.L_outer + a + 1.0, 4, 1)[0])
        dens.append(float(lv))
    dens = np.array(dens)
    peak = int(np.argmax(dens))
    below = np.nonzero(dens[peak:] < dens[peak] - drop)[0]
    cut = offsets[peak + below[0]] if below.size else offsets[len(dens) - 1]
    delta = min(max(math.log(2.0), 2.0 * cut / k_max), MAX_PROBE_WIDTH)
    return math.exp(-delta)


def shell_profile(q: NormQuery, ratio=None, k_max: int | None = None) -> ConvergenceVerdict:
    """Shell contributions c_k toward the origin and a convergence verdict.

    ``ratio`` defaults to the query's ratio; "auto" picks it with
    probe_ratio. The last max(6, k_max // 2) shells are fitted by a
    geometric model log c = a + k log q and a power model
    log c = a - s log ell. The smaller residual picks the model:

    * divergent if the window is nondecreasing, the geometric slope is
      nonnegative, or the power exponent is <= 0.9;
    * convergent if the geometric tail c_last q / (1 - q) is below 1e-3
      of the partial sum, or the power exponent is >= 1.1;
    * inconclusive otherwise; for borderline power laws the basis records
      beta in c ell ~ log^-beta ell.
    """
    k_max = q.depth if k_max is None else k_max
    if k_max < 12:
        raise ValueError("k_max must be at least 12")
    ratio = q.ratio if ratio is None else ratio
    if ratio == "auto":
        ratio = probe_ratio(q, k_max)
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    logs, sat = _log_profile(q, ratio, k_max)
    delta = -math.log(ratio)
    mids = [q.regions[0].L_outer + (k + 0.5) * delta for k in range(len(logs))]
    verdict = classify_profile(np.array(logs), np.array(mids), delta)
    verdict.ratio = ratio
    verdict.saturated = sat
    if sat:
        verdict.verdict_basis += f"; {sat} samples saturated at exp({EXP_LIMIT:g})"
    return verdict


def _fit(x, y):
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return float(coef[0]), float(coef[1]), rss


def classify_profile(log_c, mids, delta, window=None) -> ConvergenceVerdict:
    """Classify shell log-contributions (see shell_profile for the rules)."""
    log_c = np.asarray(log_c, dtype=float)
    mids = np.asarray(mids, dtype=float)
    n = len(log_c)
    log_partial = float(logsumexp(log_c)) if n else -math.inf
    contributions = [math.exp(v) if v < 709.0 else math.inf for v in log_c]
    partial = math.exp(log_partial) if log_partial < 709.0 else math.inf
    base = dict(
        partial_value=partial,
        shell_contributions=contributions,
        log_contributions=[float(v) for v in log_c],
        log_partial=log_partial,
        shell_mid_log_radius=[float(m) for m in mids],
    )
    w = window or max(6, n // 2)
    if n < 6 or not np.all(np.isfinite(log_c[-w:])):
        if n and np.all(np.isneginf(log_c[-w:])):
            return ConvergenceVerdict(fitted_slope=-math.inf, verdict="convergent", model="geometric",
                                      verdict_basis="contributions vanish on the fit window", tail_bound=0.0, **base)
        return ConvergenceVerdict(fitted_slope=math.nan, verdict="inconclusive", model="",
                                  verdict_basis="too few finite shells to fit", **base)
    y = log_c[-w:]
    k = np.arange(n)[-w:].astype(float)
    ell = mids[-w:]
    try:
        _, slope_g, rss_g = _fit(k, y)
        _, slope_p, rss_p = _fit(np.log(ell), y)
    except np.linalg.LinAlgError as exc:
        return ConvergenceVerdict(fitted_slope=math.nan, verdict="inconclusive", model="",
                                  verdict_basis=f"fit failed: {exc}", **base)
    s = -slope_p
    steps = np.diff(y)
    nondecreasing = bool(np.all(steps >= -1e-9 * np.maximum(1.0, np.abs(y[1:]))))
    if nondecreasing or slope_g >= 0.0:
        return ConvergenceVerdict(fitted_slope=float(slope_g), verdict="divergent", model="geometric",
                                  verdict_basis=f"contributions do not decay (log q = {slope_g:.4g})",
                                  tail_bound=math.inf, **base)
    if rss_g <= rss_p:
        log_q = slope_g
        log_tail = y[-1] + log_q - math.log(-math.expm1(log_q))
        rel = log_tail - log_partial
        tail = math.exp(log_tail) if log_tail < 709 else math.inf
        basis = f"geometric decay q = {math.exp(log_q):.4g}, tail/partial = {math.exp(rel):.3g}"
        verdict = "convergent" if rel < math.log(1e-3) else "inconclusive"
        return ConvergenceVerdict(fitted_slope=float(log_q), verdict=verdict, model="geometric",
                                  verdict_basis=basis, tail_bound=tail, **base)
    # power model: sum_k c_k ~ (1/delta) int ell^-s d ell
    tail = math.inf
    if s > 1.0:
        log_tail = y[-1] + math.log(ell[-1]) - math.log((s - 1.0) * delta)
        tail = math.exp(log_tail) if log_tail < 709 else math.inf
    beta = None
    if s >= 1.1:
        verdict = "convergent"
        basis = f"power decay, fitted log-exponent s = {s:.3f} (c_k ~ log^-s(1/r)), tail bound {tail:.3g}"
    elif s <= 0.9:
        verdict = "divergent"
        basis = f"power decay too slow, fitted log-exponent s = {s:.3f} (c_k ~ log^-s(1/r))"
    else:
        _, slope_b, _ = _fit(np.log(np.log(ell)), y + np.log(ell))
        beta = -slope_b
        verdict = "inconclusive"
        basis = (f"borderline power decay, fitted log-exponent s = {s:.3f}; "
                 f"log-corrected fit c_k log(1/r) ~ loglog^-{beta:.3f}(1/r)")
    return ConvergenceVerdict(fitted_slope=float(s), verdict=verdict, model="power", verdict_basis=basis,
                              tail_bound=tail, log_exponent=float(s), log_correction=beta, **base)
