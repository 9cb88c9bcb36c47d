"""Print shell-classifier verdicts for Sigma/K in L^q across a (p, q) grid on the cusp.

The predicted boundary is 1/p + 1/q = 1; each row marks where the
classifier agrees with it.
"""

import argparse

import numpy as np

from gfdlab.presets import PresetParams, build_family
from gfdlab.quadrature import NormQuery, Transform, shell_profile, whole_domain


def parse():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--q", type=float, nargs="+", default=list(np.round(np.arange(1.25, 4.01, 0.25), 2)))
    ap.add_argument("--eps", type=float, default=0.5)
    return ap.parse_args()


def main():
    args = parse()
    print("p      q      1/p+1/q  verdict       predicted  log-exponent")
    for p in args.p:
        fam = build_family("cusp-lp-duality", PresetParams(p=p, eps=args.eps))
        for q in args.q:
            v = shell_profile(NormQuery("sigma_over_K", Transform.power(q), whole_domain(fam)))
            s = 1.0 / p + 1.0 / q
            pred = "convergent" if s >= 1.0 - 1e-12 else "divergent"
            mark = "" if v.verdict == pred else "  <-- differs"
            le = "" if v.log_exponent is None else f"{v.log_exponent:.3f}"
            print(f"{p:<6g} {q:<6g} {s:<8.4f} {v.verdict:13s} {pred:10s} {le}{mark}")


if __name__ == "__main__":
    main()
