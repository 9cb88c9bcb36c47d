"""Named counterexample presets and the integrability claims attached to them.

A preset bundles a map family with its headline norm checks (used by the
``norms`` command) and, where a sharp threshold is known, a scan
definition (used by ``scan``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cusp import CuspMap, CuspParams
from .quadrature import NormQuery, RegionSpec, Transform, whole_domain
from .simple_maps import PowerLogMap, TripleLogMap
from .spiral import SpiralMap, SpiralParams

__all__ = ["PresetParams", "NormClaim", "ScanSpec", "PRESETS", "build_family", "norm_claims", "scan_spec", "preset_names"]


@dataclass
class PresetParams:
    """Every parameter any preset reads; each preset ignores the others."""

    p: float = 2.0
    eps: float = 0.5
    mu: float = 1.5
    nu: float | None = None
    alpha: float = 1.0
    lambdas: tuple = (1.0, 5.0, 25.0)
    q_grid: tuple = (1.5, 2.0, 2.5, 3.0)
    s_grid: tuple = (1.3, 1.4, 1.5, 1.6, 1.7)
    depth: int = 40
    cells: int = 2
    order: int = 8


@dataclass
class NormClaim:
    """One integrability claim: the query and the verdict it should get.

    ``ratio`` is passed to shell_profile ("auto" probes it).
    """

    name: str
    query: NormQuery
    expected: str = "convergent"
    ratio: object = None


@dataclass
class ScanSpec:
    """Exponent sweep: ``make(x)`` builds the query at exponent x.

    ``predicted(x)`` gives the expected verdict or None where the theory is
    silent at the boundary itself.
    """

    exponent: str
    grid: tuple
    make: Callable[[float], NormQuery]
    predicted: Callable[[float], str | None]
    boundary: float
    rule: str
    extra: list = field(default_factory=list)  # more (label, make) pairs on the same grid


def _cusp(regime):
    def build(pp: PresetParams):
        return CuspMap(CuspParams(regime, p=pp.p, eps=pp.eps, mu=pp.mu, nu=pp.nu), name=f"cusp-{regime.replace('_', '-')}")
    return build


def _spiral(regime):
    def build(pp: PresetParams):
        return SpiralMap(SpiralParams(regime, p=pp.p), name=f"spiral-{regime.replace('_', '-')}")
    return build


PRESETS = {
    "cusp-lp-duality": _cusp("lp_duality"),
    "cusp-sigma-ls": _cusp("sigma_ls"),
    "cusp-exp-k": _cusp("exp_k"),
    "spiral-bounded-sigma": _spiral("bounded_sigma"),
    "spiral-lp": _spiral("lp"),
    "triple-log": lambda pp: TripleLogMap(),
    "power-log": lambda pp: PowerLogMap(pp.alpha),
}

# the five discontinuous constructions
COUNTEREXAMPLES = ("cusp-lp-duality", "cusp-sigma-ls", "cusp-exp-k", "spiral-bounded-sigma", "spiral-lp")


def preset_names():
    return tuple(PRESETS)


def build_family(name: str, pp: PresetParams | None = None):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    return PRESETS[name](pp or PresetParams())


def _regions(family):
    return whole_domain(family)


def _query(pp, quantity, transform, region, **kw):
    return NormQuery(quantity, transform, region, depth=pp.depth, cells=pp.cells, order=pp.order, **kw)


def _conjugate(p):
    return math.inf if p == 1.0 else p / (p - 1.0)


def _log_theta_sq(batch):
    return 2.0 * np.log(batch.theta)


def norm_claims(name: str, family, pp: PresetParams) -> list[NormClaim]:
    """Headline integrability claims of a preset, as shell-classified queries."""
    whole = _regions(family)
    q = lambda *a, **k: _query(pp, *a, **k)  # noqa: E731
    if name == "cusp-lp-duality":
        qc = _conjugate(pp.p)
        return [
            NormClaim(f"K in L^{pp.p:g}", q("K", Transform.power(pp.p), whole)),
            NormClaim(f"sigma/K in L^{qc:g}", q("sigma_over_K", Transform.power(qc), whole)),
        ]
    if name == "cusp-sigma-ls":
        out = [NormClaim(f"K in L^{pp.p:g}", q("K", Transform.power(pp.p), whole))]
        for s in pp.s_grid:
            if s < 1.0 + 1.0 / pp.p:
                out.append(NormClaim(f"sigma in L^{s:g}", q("sigma", Transform.power(s), whole)))
        return out
    if name == "cusp-exp-k":
        out = [NormClaim(f"exp({lam:g} K) in L^1", q("K", Transform.exp(lam), whole), ratio="auto") for lam in pp.lambdas]
        out.append(NormClaim(f"sigma log^{pp.mu:g}(e + sigma) in L^1",
                             q("sigma", Transform.zygmund(pp.mu), whole), ratio=math.exp(-4.0)))
        return out
    if name == "spiral-bounded-sigma":
        region_a = RegionSpec("spiral_A", family)
        return [
            NormClaim("K in L^1(A)", q("K", Transform(), region_a)),
            NormClaim("theta^2 in L^1(A)", q("custom", Transform(), region_a, custom=_log_theta_sq)),
            NormClaim("K in L^1", q("K", Transform(), whole)),
        ]
    if name == "spiral-lp":
        qc = _conjugate(pp.p)
        out = [NormClaim(f"K in L^{pp.p:g}", q("K", Transform.power(pp.p), whole))]
        if math.isfinite(qc):
            out.append(NormClaim(f"sigma/K in L^{qc:g}", q("sigma_over_K", Transform.power(qc), whole)))
            if qc >= 2.0:
                out.append(NormClaim(f"sigma in L^{qc / 2:g}", q("sigma", Transform.power(qc / 2), whole)))
        return out
    if name == "triple-log":
        return [NormClaim("|Df|^2 log(e + |Df|^2) in L^1", q("df_opnorm_sq", Transform.zygmund(1.0), whole))]
    if name == "power-log":
        return [NormClaim("|Df|^2 in L^1", q("df_opnorm_sq", Transform(), whole))]
    raise KeyError(name)


def scan_spec(name: str, family, pp: PresetParams) -> ScanSpec:
    """Exponent sweep with the predicted convergence boundary, for presets that have one."""
    whole = _regions(family)
    if name in ("cusp-lp-duality", "spiral-lp"):
        qc = _conjugate(pp.p)
        # 1/p + 1/q >= 1 is attained at the boundary itself for these constructions
        pred = lambda x: "convergent" if 1.0 / pp.p + 1.0 / x >= 1.0 - 1e-12 else "divergent"  # noqa: E731
        spec = ScanSpec("q", tuple(pp.q_grid), lambda x: _query(pp, "sigma_over_K", Transform.power(x), whole),
                        pred, qc, "1/p + 1/q >= 1")
        if name == "spiral-lp":
            spec.extra.append(("sigma in L^(q/2)",
                               lambda x: _query(pp, "sigma", Transform.power(x / 2), whole) if x >= 2 else None))
        return spec
    if name == "cusp-sigma-ls":
        b = 1.0 + 1.0 / pp.p
        pred = lambda x: None if math.isclose(x, b, rel_tol=1e-12) else ("convergent" if x < b else "divergent")  # noqa: E731
        return ScanSpec("s", tuple(pp.s_grid), lambda x: _query(pp, "sigma", Transform.power(x), whole),
                        pred, b, "1/(p+1) + 1/s >= 1")
    raise KeyError(f"preset {name!r} has no threshold scan; use explore mode")


def explore_queries(family, pp: PresetParams, p_grid, q_grid):
    """(p, q) grid of K^p and (sigma/K)^q queries, for classification only."""
    whole = _regions(family)
    out = []
    for p in p_grid:
        out.append((f"K in L^{p:g}", _query(pp, "K", Transform.power(p), whole)))
    for q in q_grid:
        out.append((f"sigma/K in L^{q:g}", _query(pp, "sigma_over_K", Transform.power(q), whole)))
    return out
