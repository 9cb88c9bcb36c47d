"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[acceptance NN] PASS|FAIL  <summary>`` line to
the terminal (captured output is bypassed) and then asserts.
"""

import json
import math

import numpy as np
import pytest

from gfdlab import cli
from gfdlab import field_checks as fc
from gfdlab import lemmas
from gfdlab.presets import COUNTEREXAMPLES, PresetParams, build_family, norm_claims, scan_spec
from gfdlab.quadrature import NormQuery, RegionSpec, Transform, integrate, norm_value, shell_profile, whole_domain
from gfdlab.special_fn import lambert_w, lambert_w_prime
from oracles import proof_integrand_verdict

SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(number, ok, summary):
        with capsys.disabled():
            print(f"\n[acceptance {number:02d}] {'PASS' if ok else 'FAIL'}  {summary}")
        assert ok, summary

    return emit


def families(names=COUNTEREXAMPLES):
    pp = PresetParams()
    return {n: build_family(n, pp) for n in names}


def test_01_differential_inclusion(report):
    worst = {}
    for name, fam in families().items():
        equality = name.startswith("cusp")
        reps = fc.inclusion_sweep(fam, 100_000, SEED)
        worst[name] = max(abs(r.relative) if equality else r.relative for r in reps)
    ok = len(worst) == 5 and all(v <= 1e-9 for v in worst.values())
    report(1, ok, "worst residual/(1+|Df|^2): " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))


def test_02_derivatives(report):
    worst = {}
    for name, fam in families().items():
        for reg, err in fc.fd_sweep(fam, 10_000, SEED).items():
            worst[f"{name}:{reg}"] = err
    # region A of the spiral evaluates the Lambert-W branch
    ok = "spiral-lp:A" in worst and "spiral-bounded-sigma:A" in worst and max(worst.values()) <= 1e-6
    report(2, ok, f"max FD relative error {max(worst.values()):.2e} over {len(worst)} regions")


def test_03_continuity_and_blowup(report):
    u = fc.unit_samples(1_000, SEED, dim=1)[:, 0]
    gaps, blow = {}, {}
    for name, fam in families().items():
        for iid in fam.interfaces:
            gaps[f"{name}:{iid}"] = float(np.max(fc.interface_gaps(fam, iid, fam.interface_params(u))))
        for M in (1.0, 2.0, 4.0):
            _, smallest = fc.confirm_blowup(fam, M, seed=SEED)
            blow[f"{name}:M={M:g}"] = smallest / M
    ok = max(gaps.values()) <= 1e-8 and min(blow.values()) >= 1.0
    report(3, ok, f"max interface gap {max(gaps.values()):.2e} over {len(gaps)} curves; "
                  f"min |f|/M inside witness {min(blow.values()):.3f}")


def test_04_lambert_w(report):
    rng = np.random.default_rng(SEED)
    t = np.concatenate([
        -math.exp(-1.0) * (1.0 - np.geomspace(1e-16, 1.0, 100_000)),
        np.geomspace(1e-300, 1e300, 800_000),
        rng.uniform(-math.exp(-1.0), 10.0, 100_000),
    ])
    w = lambert_w(t)
    ident = np.max(np.abs(w * np.exp(w) - t) / np.maximum(1.0, np.abs(t)))
    s = np.geomspace(math.exp(-1.0), 1e12, 20_000)
    logid = np.max(np.abs(lambert_w(s * np.log(s)) - np.log(s)) / np.maximum(1.0, np.abs(np.log(s))))
    x = np.geomspace(1e-3, 1e6, 2_000)
    h = 1e-5 * x
    fd = (lambert_w(x + h) - lambert_w(x - h)) / (2.0 * h)
    dres = np.max(np.abs(fd - lambert_w_prime(x)) / np.abs(lambert_w_prime(x)))
    ok = len(t) == 1_000_000 and ident <= 1e-12 and logid <= 1e-10 and dres <= 1e-6
    report(4, ok, f"identity {ident:.1e}, W(t log t) {logid:.1e}, W' vs FD {dres:.1e}")


def test_05_sharp_lp_duality(report):
    pp = PresetParams(p=2.0, eps=0.5)
    fam = build_family("cusp-lp-duality", pp)
    spec = scan_spec("cusp-lp-duality", fam, pp)
    got = {"K^2": shell_profile(NormQuery("K", Transform.power(2.0), whole_domain(fam))).verdict}
    want = {"K^2": proof_integrand_verdict("K", 2.0, 0.5)}
    for q in (1.5, 2.0, 2.5, 3.0):
        got[f"q={q:g}"] = shell_profile(spec.make(q)).verdict
        want[f"q={q:g}"] = proof_integrand_verdict("sigma_over_K", 2.0, 0.5, q)
    expected = {"K^2": "convergent", "q=1.5": "convergent", "q=2": "convergent",
                "q=2.5": "divergent", "q=3": "divergent"}
    ok = got == want == expected
    report(5, ok, ", ".join(f"{k}: {v}" for k, v in got.items()))


def test_06_sigma_ls_boundary(report):
    pp = PresetParams(p=2.0)
    fam = build_family("cusp-sigma-ls", pp)
    spec = scan_spec("cusp-sigma-ls", fam, pp)
    v = {s: shell_profile(spec.make(s)) for s in (1.4, 1.5, 1.7)}
    edge = v[1.5]
    reported = edge.log_exponent is not None and "log-exponent" in edge.verdict_basis
    ok = v[1.4].verdict == "convergent" and v[1.7].verdict == "divergent" and reported
    report(6, ok, f"s=1.4 {v[1.4].verdict}, s=1.7 {v[1.7].verdict}, "
                  f"s=1.5 {edge.verdict} (log-exponent {edge.log_exponent})")


def _grows(fam, component, depths, samples=512):
    """Smallest |f_component| over a thin shell at each depth."""
    out = []
    for L in depths:
        low = math.inf
        for reg in fam.regions:
            Ls, th, r = fam.sample(reg, fc.unit_samples(samples, SEED), lo=L, hi=1.01 * L)
            f = fam.fields(reg, Ls, th, r).f
            vals = np.abs(f[:, component]) if component is not None else np.hypot(f[:, 0], f[:, 1])
            low = min(low, float(np.min(vals)))
        out.append(low)
    return out


def _unbounded(fam, component, depths):
    lows = _grows(fam, component, depths)
    witnesses = [fam.blowup_log_radius(M) for M in (1.0, 2.0, 4.0)]
    increasing = all(a < b for a, b in zip(lows, lows[1:]))
    return increasing and all(math.isfinite(w) for w in witnesses), lows


def test_07_exp_k_regime(report):
    pp = PresetParams(mu=1.5, nu=1.75, lambdas=(1.0, 5.0, 25.0))
    fam = build_family("cusp-exp-k", pp)
    verdicts = {c.name: shell_profile(c.query, ratio=c.ratio).verdict for c in norm_claims("cusp-exp-k", fam, pp)}
    unb, lows = _unbounded(fam, 0, (5.0, 50.0, 500.0, 5000.0))
    ok = len(verdicts) == 4 and all(v == "convergent" for v in verdicts.values()) and unb and fam.params.nu == 1.75
    report(7, ok, ", ".join(f"{k}: {v}" for k, v in verdicts.items()) + f"; min |f_1| by depth {[round(x, 3) for x in lows]}")


def test_08_bounded_sigma_spiral(report):
    pp = PresetParams()
    fam = build_family("spiral-bounded-sigma", pp)
    top = 0.0
    u = fc.unit_samples(100_000, SEED)
    for reg, c in zip(fam.regions, np.array_split(u, len(fam.regions))):
        top = max(top, float(np.max(fam.fields(reg, *fam.sample(reg, c)).sigma)))
    claims = {c.name: shell_profile(c.query, ratio=c.ratio).verdict for c in norm_claims("spiral-bounded-sigma", fam, pp)}
    unb, lows = _unbounded(fam, 1, (5.0, 20.0, 100.0, 300.0))
    ok = (top <= 9.0 * (1 + 1e-12) and top == pytest.approx(9.0, rel=1e-12)
          and claims["K in L^1(A)"] == claims["theta^2 in L^1(A)"] == "convergent" and unb)
    report(8, ok, f"sup Sigma {top:.15g}; " + ", ".join(f"{k}: {v}" for k, v in claims.items())
           + f"; min |Im f| by depth {[round(x, 3) for x in lows]}")


def test_09_triple_log(report):
    pp = PresetParams()
    fam = build_family("triple-log", pp)
    L, theta, r = fam.sample("disk", fc.unit_samples(10_000, SEED))
    m = fc.fd_scaled_batch(fam, "disk", L, theta, r, step=fam.fd_step)
    exact = fam.fields("disk", L, theta, r).scaled_df
    # the scaled matrices carry the factor r, so compare det against |r Df|^2
    mag = float(np.max(np.abs(np.linalg.det(m)) / np.einsum("...ij,...ij->...", exact, exact)))
    (claim,) = norm_claims("triple-log", fam, pp)
    verdict = shell_profile(claim.query).verdict
    unb, lows = _unbounded(fam, None, (5.0, 50.0, 500.0, 5000.0))
    ok = mag <= 1e-8 and verdict == "convergent" and unb
    report(9, ok, f"FD |det Df| relative {mag:.1e}; |Df|^2 log(e+|Df|^2): {verdict}; "
                  f"min |f| by depth {[round(x, 3) for x in lows]}")


def test_10_lemma_oracles(report):
    young = lemmas.exp_young_suite(100_000, SEED)
    diff = lemmas.diff_ineq_suite(20, SEED)
    jensen = [
        lemmas.triple_jensen_check(lemmas.TripleJensenInstance(2, 1.0, lambda s: 1.0, R=0.5, r=0.5 * math.exp(-5.0),
                                                                domain_radius=1.0)),
        lemmas.triple_jensen_check(lemmas.TripleJensenInstance(2, 1.0, lambda s: math.log(1.0 / s), R=0.3, r=1e-6,
                                                                domain_radius=math.exp(-1.0))),
    ]
    fam = build_family("cusp-lp-duality", PresetParams())
    r0 = fam.params.r0
    rh = []
    for k in (32, 64):
        h = r0 / k
        rh.append(lemmas.reverse_holder_ratio(fam, lemmas.cubes_in_annulus(0.4 * r0, 0.9 * r0, h), h, order=6,
                                              cells=2).max_ratio)
    change = abs(rh[1] / rh[0] - 1.0)
    ok = (young["violations"] == 0 and len(diff) == 20 and all(d.holds for d in diff)
          and all(j.lhs >= j.rhs - 1e-6 for j in jensen) and change <= 0.1)
    report(10, ok, f"exp-Young violations {young['violations']}/{young['cases']}; "
                   f"diff-ineq {sum(d.holds for d in diff)}/20; "
                   f"Jensen margins {[f'{j.lhs - j.rhs:.3g}' for j in jensen]}; reverse Holder change {change:.3f}")


def test_11_modulus_exponent(report):
    radii = np.exp(-np.linspace(5.0, 40.0, 12))
    fits = {}
    for alpha in (0.5, 1.0, 2.0):
        fam = build_family("power-log", PresetParams(alpha=alpha))
        fits[alpha], _ = lemmas.fit_log_exponent(fc.modulus_samples(fam, (0.0, 0.0), radii))
    ok = all(abs(a_hat - a) <= 0.05 * a for a, a_hat in fits.items())
    report(11, ok, ", ".join(f"alpha={a:g}: {v:.4f}" for a, v in fits.items()))


def test_12_infrastructure(report, capsys):
    area, _ = integrate(lambda r, th: np.ones_like(r), RegionSpec("disk"))
    fam = build_family("cusp-lp-duality", PresetParams())
    runs = [norm_value(NormQuery("K", Transform.power(2.0), whole_domain(fam), workers=w)) for w in (1, 2, 4)]
    bitwise = len({(v.value.hex(), v.error.hex()) for v in runs}) == 1

    def json_run():
        cli.main(["verify", "--preset", "spiral-lp", "--samples", "4000", "--seed", str(SEED), "--format", "json"])
        rep = json.loads(capsys.readouterr().out)
        rep.pop("environment")
        return json.dumps(rep, sort_keys=True)

    same_json = json_run() == json_run()
    ok = abs(area - math.pi) <= 1e-8 and bitwise and same_json
    report(12, ok, f"disk area error {abs(area - math.pi):.1e}; worker-count bit-identical {bitwise}; "
                   f"JSON reproducible {same_json}")
