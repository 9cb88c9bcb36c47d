"""Command-line front end.

    gfdlab verify  --preset spiral-bounded-sigma --samples 100000 --seed 42
    gfdlab norms   --preset cusp-exp-k --mu 1.5 --lambda 1,5,25
    gfdlab scan    --preset cusp-lp-duality --p 2 --q 1.5,2,2.5,3
    gfdlab modulus --preset power-log --alpha 0.5,1,2
    gfdlab lemmas  --seed 0

Exit codes: 0 when no check failed, 1 when one did, 2 on usage errors,
3 on internal or numeric errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from . import field_checks as fc
from . import lemmas
from .core import UnsupportedError
from .presets import COUNTEREXAMPLES, PresetParams, build_family, explore_queries, norm_claims, preset_names, scan_spec
from .quadrature import shell_profile

SCHEMA_VERSION = 1
COMMANDS = ("verify", "norms", "scan", "modulus", "lemmas")
CSV_COLUMNS = ("check", "status", "value", "tolerance", "samples", "seconds")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

INCLUSION_TOL = 1e-9
FD_TOL = 1e-6
GAP_TOL = 1e-8
FD_SAMPLES = 10_000
GAP_SAMPLES = 1_000
BLOWUP_LEVELS = (1.0, 2.0, 4.0)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    p: tuple = (2.0,)
    q: tuple = (1.5, 2.0, 2.5, 3.0)
    s: tuple = (1.3, 1.4, 1.5, 1.6, 1.7)
    mu: float = 1.5
    lam: tuple = (1.0, 5.0, 25.0)
    eps: float = 0.5
    nu: float | None = None
    alpha: tuple = (1.0,)
    samples: int = 100_000
    seed: int = 0
    depth: int = 40
    cells: int = 2
    order: int = 8
    out: str | None = None
    format: str = "json"
    explore: bool = False

    def preset_params(self, alpha=None) -> PresetParams:
        return PresetParams(p=self.p[0], eps=self.eps, mu=self.mu, nu=self.nu,
                            alpha=self.alpha[0] if alpha is None else alpha, lambdas=self.lam,
                            q_grid=self.q, s_grid=self.s, depth=self.depth, cells=self.cells, order=self.order)


@dataclass
class Check:
    name: str
    status: str  # pass, fail, inconclusive, unsupported or reported
    value: object
    tolerance: object
    samples: int
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# argument handling

_LIST_KEYS = {"p", "q", "s", "lam", "alpha"}
_INT_KEYS = {"samples", "seed", "depth", "cells", "order"}
_FLOAT_KEYS = {"mu", "eps", "nu"}
_STR_KEYS = {"preset", "out", "format"}
_BOOL_KEYS = {"explore"}


def _float_list(text):
    try:
        vals = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise UsageError("empty exponent list")
    return vals


def _coerce(key, value):
    try:
        if key in _LIST_KEYS:
            return _float_list(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            return value if isinstance(value, bool) else str(value).strip().lower() in ("1", "true", "yes", "on")
        return str(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc


def read_config_file(path):
    """``key = value`` lines; '#' starts a comment; keys are flag names without dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            key = "lam" if key == "lambda" else key
            if key not in _LIST_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _BOOL_KEYS:
                raise UsageError(f"{path}:{n}: unknown key {key!r}")
            out[key] = _coerce(key, value)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--preset", help=f"one of {', '.join(preset_names())}")
    common.add_argument("--config", help="key = value file; flags win")
    for flag in ("p", "q", "s", "alpha"):
        common.add_argument(f"--{flag}", help="exponent or comma-separated list")
    common.add_argument("--lambda", dest="lam", help="exp-transform rates, comma-separated")
    for flag in ("mu", "eps", "nu"):
        common.add_argument(f"--{flag}")
    for flag in ("samples", "seed", "depth", "cells", "order"):
        common.add_argument(f"--{flag}")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv", "table"))
    common.add_argument("--explore", action="store_const", const=True, default=None,
                        help="scan: classify K^p and (sigma/K)^q over the --p and --q grids without predictions")
    parser = _Parser(prog="gfdlab", description="Checks for planar maps of generalized finite distortion.")
    parser.add_argument("--version", action="version", version=f"gfdlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "verify": "pointwise inclusion, derivative, interface and blow-up checks",
        "norms": "headline integrability claims of a preset",
        "scan": "exponent sweep against the predicted convergence boundary",
        "modulus": "fitted log-exponent of the modulus of continuity",
        "lemmas": "randomized and oracle checks of the auxiliary inequalities",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    for key in _LIST_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _BOOL_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    cfg = RunConfig(command=args.command, **values)
    if cfg.preset is not None and cfg.preset not in preset_names():
        raise UsageError(f"unknown preset {cfg.preset!r}; known: {', '.join(preset_names())}")
    if cfg.command in ("verify", "norms", "scan") and cfg.preset is None:
        raise UsageError(f"{cfg.command} needs --preset")
    if cfg.format not in ("json", "csv", "table"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.samples < 1 or cfg.depth < 12 or cfg.cells < 1 or cfg.order < 1:
        raise UsageError("samples, cells and order must be positive and depth at least 12")
    return cfg


# --------------------------------------------------------------------------
# commands


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    dt = time.perf_counter() - t0
    for c in out if isinstance(out, list) else [out]:
        c.seconds = dt / (len(out) if isinstance(out, list) else 1)
    return out


def _status(ok):
    return "pass" if ok else "fail"


def _blowup_checks(family, seed):
    out = []
    for M in BLOWUP_LEVELS:
        try:
            w, worst = fc.confirm_blowup(family, M, seed=seed)
        except UnsupportedError as exc:
            out.append(Check(f"blowup[M={M:g}]", "unsupported", None, M, 0, detail={"reason": str(exc)}))
            continue
        out.append(Check(f"blowup[M={M:g}]", _status(worst >= M), worst, M, 4096,
                         detail={"witness_log_inv_radius": w.log_inv_radius}))
    return out


def cmd_verify(cfg: RunConfig, family=None) -> list[Check]:
    family = family or build_family(cfg.preset, cfg.preset_params())
    equality = cfg.preset.startswith("cusp")
    checks = []

    def inclusion():
        out = []
        for rep in fc.inclusion_sweep(family, cfg.samples, cfg.seed):
            val = abs(rep.relative) if equality else rep.relative
            out.append(Check(f"inclusion[{rep.region}]", _status(val <= INCLUSION_TOL), val, INCLUSION_TOL, rep.count,
                             detail={"equality": equality, "worst_point": list(rep.worst_point),
                                     "lhs_operator": rep.lhs, "lhs_frobenius": rep.lhs_frobenius}))
        return out

    checks += _timed(inclusion)
    n_fd = min(cfg.samples, FD_SAMPLES)

    def fd():
        errs = fc.fd_sweep(family, n_fd, cfg.seed)
        return [Check(f"fd_jacobian[{reg}]", _status(e <= FD_TOL), e, FD_TOL, n_fd // len(errs)) for reg, e in errs.items()]

    checks += _timed(fd)
    u = fc.unit_samples(GAP_SAMPLES, cfg.seed + 3, dim=1)[:, 0]
    for iid in family.interfaces:
        def gap(iid=iid):
            g = float(np.max(fc.interface_gaps(family, iid, family.interface_params(u))))
            return Check(f"interface_gap[{iid}]", _status(g <= GAP_TOL), g, GAP_TOL, GAP_SAMPLES)
        checks.append(_timed(gap))
    checks += _timed(lambda: _blowup_checks(family, cfg.seed))
    return checks


def _verdict_check(name, verdict, expected, detail=None):
    if verdict.verdict == expected:
        status = "pass"
    elif verdict.verdict == "inconclusive" or expected is None:
        status = "inconclusive"
    else:
        status = "fail"
    d = {
        "verdict": verdict.verdict,
        "expected": expected,
        "basis": verdict.verdict_basis,
        "model": verdict.model,
        "fitted_slope": verdict.fitted_slope,
        "log_exponent": verdict.log_exponent,
        "log_correction": verdict.log_correction,
        "log_partial": verdict.log_partial,
        "ratio": verdict.ratio,
    }
    d.update(detail or {})
    value = verdict.partial_value if math.isfinite(verdict.partial_value) else verdict.log_partial
    return Check(name, status, value, 1e-3, len(verdict.shell_contributions), detail=d)


def cmd_norms(cfg: RunConfig, family=None) -> list[Check]:
    pp = cfg.preset_params()
    family = family or build_family(cfg.preset, pp)
    checks = []
    for claim in norm_claims(cfg.preset, family, pp):
        checks.append(_timed(lambda c=claim: _verdict_check(c.name, shell_profile(c.query, ratio=c.ratio), c.expected)))
    if cfg.preset == "spiral-bounded-sigma":
        checks.append(_timed(lambda: _sigma_sup(family, cfg)))
    if cfg.preset == "triple-log":
        checks.append(_timed(lambda: _fd_jacobian_magnitude(family, cfg)))
    if cfg.preset == "cusp-exp-k":
        checks.append(_timed(lambda: Check("K_over_log_nu_minus_1", "reported", family.distortion_constant(seed=cfg.seed),
                                           None, 4096, detail={"nu": family.params.nu})))
    if cfg.preset in COUNTEREXAMPLES or cfg.preset == "triple-log":
        checks += _timed(lambda: _blowup_checks(family, cfg.seed))
    return checks


def _sigma_sup(family, cfg):
    """Largest sampled Sigma; exactly 9 = 6 + 3 phi'^2 with phi' = 1."""
    u = fc.unit_samples(cfg.samples, cfg.seed)
    top = 0.0
    for reg, c in zip(family.regions, np.array_split(u, len(family.regions))):
        top = max(top, float(np.max(family.fields(reg, *family.sample(reg, c)).sigma)))
    return Check("sigma_sup", _status(abs(top - 9.0) <= 1e-12 * 9.0), top, 1e-12 * 9.0, cfg.samples,
                 detail={"expected": 9.0})


def _fd_jacobian_magnitude(family, cfg):
    """|det| of the finite-difference Jacobian relative to |Df|^2."""
    n = min(cfg.samples, FD_SAMPLES)
    L, theta, r = family.sample("disk", fc.unit_samples(n, cfg.seed))
    m = fc.fd_scaled_batch(family, "disk", L, theta, r, step=family.fd_step)
    exact = family.fields("disk", L, theta, r).scaled_df
    rel = np.abs(np.linalg.det(m)) / np.einsum("...ij,...ij->...", exact, exact)
    val = float(np.max(rel))
    return Check("fd_jacobian_magnitude", _status(val <= 1e-8), val, 1e-8, n)


def cmd_scan(cfg: RunConfig, family=None) -> list[Check]:
    pp = cfg.preset_params()
    family = family or build_family(cfg.preset, pp)
    checks = []
    if cfg.explore:
        for label, q in explore_queries(family, pp, cfg.p, cfg.q):
            def run(label=label, q=q):
                v = shell_profile(q)
                c = _verdict_check(label, v, None)
                c.status = "reported"
                return c
            checks.append(_timed(run))
        return checks
    try:
        spec = scan_spec(cfg.preset, family, pp)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    verdicts = {}
    for x in spec.grid:
        def run(x=x):
            v = shell_profile(spec.make(x))
            verdicts[x] = v.verdict
            return _verdict_check(f"{spec.exponent}={x:g}", v, spec.predicted(x))
        checks.append(_timed(run))
        for label, make in spec.extra:
            q = make(x)
            if q is not None:
                checks.append(_timed(lambda q=q, label=label, x=x: _verdict_check(
                    f"{label} at {spec.exponent}={x:g}", shell_profile(q), spec.predicted(x))))
    conv = [x for x, v in verdicts.items() if v == "convergent"]
    div = [x for x, v in verdicts.items() if v == "divergent"]
    lo = max(conv) if conv else None
    hi = min(div) if div else None
    ok = lo is not None and hi is not None and lo <= spec.boundary <= hi and lo < hi
    consistent = all(c < d for c in conv for d in div)
    status = "pass" if ok and consistent else ("fail" if not consistent or (lo is not None and hi is not None) else "inconclusive")
    checks.append(Check("empirical_boundary", status, [lo, hi], spec.boundary, len(spec.grid),
                        detail={"predicted_boundary": spec.boundary, "rule": spec.rule}))
    return checks


def cmd_modulus(cfg: RunConfig) -> list[Check]:
    preset = cfg.preset or "power-log"
    if preset != "power-log":
        raise UsageError("modulus runs on the power-log preset, the only one continuous at the origin")
    radii = np.exp(-np.linspace(5.0, 40.0, 12))
    checks = []
    for alpha in cfg.alpha:
        def run(alpha=alpha):
            family = build_family(preset, cfg.preset_params(alpha=alpha))
            samples = fc.modulus_samples(family, (0.0, 0.0), radii)
            a_hat, se = lemmas.fit_log_exponent(samples)
            tol = 0.05 * alpha
            return Check(f"alpha_hat[alpha={alpha:g}]", _status(abs(a_hat - alpha) <= tol), a_hat, tol, len(samples),
                         detail={"alpha": alpha, "stderr": se, "radius_range": [float(radii[-1]), float(radii[0])]})
        checks.append(_timed(run))
    return checks


def cmd_lemmas(cfg: RunConfig) -> list[Check]:
    checks = []

    def young():
        rep = lemmas.exp_young_suite(cfg.samples, cfg.seed)
        return Check("exp_young", _status(rep["violations"] == 0), rep["violations"], 0, rep["cases"],
                     detail={"min_log_margin": rep["min_log_margin"], "constant_k1_l1": lemmas.exp_young_constant(1.0, 1.0)})

    def diff_ineq():
        reps = lemmas.diff_ineq_suite(20, cfg.seed)
        worst = max(r.max_excess for r in reps)
        ok = all(r.holds for r in reps)
        return Check("diff_ineq", _status(ok), worst, 1e-8, len(reps),
                     detail={"statuses": [r.status for r in reps]})

    def jensen(label, K, lam, R, r, D):
        inst = lemmas.TripleJensenInstance(2, lam, K, R=R, r=r, domain_radius=D)
        rep = lemmas.triple_jensen_check(inst)
        return Check(f"triple_jensen[{label}]", _status(rep.margin >= -1e-6), rep.margin, -1e-6, 1,
                     detail={"lhs": rep.lhs, "rhs": rep.rhs, "C": rep.constant, "R0": rep.R0, "window": list(rep.window)})

    def rh_identity():
        from .simple_maps import IdentityMap
        rep = lemmas.reverse_holder_ratio(IdentityMap(), [(0.3, 0.1), (-0.2, 0.4)], 0.05)
        return Check("reverse_holder[identity]", _status(rep.max_ratio <= 1.5), rep.max_ratio, 1.5, 2)

    def rh_cusp():
        family = build_family("cusp-lp-duality", PresetParams())
        r0 = family.params.r0
        vals = []
        for k in (32, 64):
            h = r0 / k
            centers = lemmas.cubes_in_annulus(0.4 * r0, 0.9 * r0, h)
            vals.append(lemmas.reverse_holder_ratio(family, centers, h, order=6, cells=2).max_ratio)
        change = abs(vals[1] / vals[0] - 1.0)
        return Check("reverse_holder[cusp-lp-duality]", _status(change <= 0.1), change, 0.1, 2,
                     detail={"empirical_C": vals})

    checks.append(_timed(young))
    checks.append(_timed(diff_ineq))
    checks.append(_timed(lambda: jensen("constant", lambda s: 1.0, 1.0, 0.5, 0.5 * math.exp(-5.0), 1.0)))
    checks.append(_timed(lambda: jensen("log", lambda s: math.log(1.0 / s), 1.0, 0.3, 1e-6, math.exp(-1.0))))
    checks.append(_timed(rh_identity))
    checks.append(_timed(rh_cusp))
    return checks


RUNNERS = {"verify": cmd_verify, "norms": cmd_norms, "scan": cmd_scan, "modulus": cmd_modulus, "lemmas": cmd_lemmas}


# --------------------------------------------------------------------------
# reports


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def make_report(cfg: RunConfig, checks: list[Check]) -> dict:
    params = {k: v for k, v in asdict(cfg).items() if k not in ("command", "out", "format")}
    summary = {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "inconclusive", "unsupported", "reported")}
    rows = []
    for c in checks:
        row = {k: v for k, v in asdict(c).items() if k != "seconds"}
        rows.append(row)
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "gfdlab", "version": __version__},
        "command": cfg.command,
        "preset": cfg.preset,
        "seed": cfg.seed,
        "parameters": params,
        "checks": rows,
        "summary": summary,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
            "timings": {c.name: c.seconds for c in checks},
        },
    })


def render(report: dict, checks: list[Check], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row, c in zip(report["checks"], checks):
            w.writerow([row["name"], row["status"], row["value"], row["tolerance"], row["samples"], f"{c.seconds:.4f}"])
        return buf.getvalue()
    lines = [f"gfdlab {report['command']}" + (f" --preset {report['preset']}" if report["preset"] else "")
             + f"  (seed {report['seed']})"]
    width = max([len(c.name) for c in checks] + [5])
    for row, c in zip(report["checks"], checks):
        val = row["value"]
        val = f"{val:.6g}" if isinstance(val, float) else str(val)
        lines.append(f"  {c.name:<{width}}  {c.status.upper():<12} value={val}  tol={row['tolerance']}  n={c.samples}  [{c.seconds:.2f}s]")
    s = report["summary"]
    lines.append("  " + ", ".join(f"{v} {k}" for k, v in s.items() if v))
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig):
    """Run a command; returns (report dict, checks)."""
    checks = RUNNERS[cfg.command](cfg)
    return make_report(cfg, checks), checks


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
        report, checks = run(cfg)
    except UsageError as exc:
        print(f"gfdlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gfdlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"gfdlab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = render(report, checks, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_FAIL if report["summary"]["fail"] else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
