#!/usr/bin/env python3
"""Generate the canonical test dispersion profile (data/canonical_profile.json).

The group-velocity dispersion is written as

    beta2(w) = (x - x_a) (x - x_b) q(x),    x = (w - w0) / 1e15 rad/s

so the zero-dispersion wavelengths sit exactly at 747 nm and 1260 nm.  The
quartic q is fitted in least squares to a parabolic D(lambda) template of
peak height --d-peak, subject to two exact linear constraints:

  * beta1(w(1542 nm)) == beta1(w0)                (pump/idler group velocity match)
  * 2k(w0) - k(w0 + W) - k(w0 - W) == 0            (771 -> 514 + 1542 nm phase matched)

The template height sets the overall dispersion scale, which in turn sets the
phase-matching bandwidth.  The default was chosen so that a 0.65 m fiber
pumped with 3 nm at 771 nm gives a signal marginal near 1.2 nm and a
heralded purity near 0.85 after instrument broadening.
"""
import argparse
import json
import math

import numpy as np
from numpy.polynomial import polynomial as P

C = 299792458.0
UNIT = 1e15


def omega(nm):
    return 2.0 * math.pi * C / (nm * 1e-9)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-peak", type=float, default=1.08,
                    help="template D peak in ps/(nm km)")
    ap.add_argument("--pump", type=float, default=771.0)
    ap.add_argument("--signal", type=float, default=514.0)
    ap.add_argument("--idler", type=float, default=1542.0)
    ap.add_argument("--zdw", type=float, nargs=2, default=[747.0, 1260.0])
    ap.add_argument("--domain", type=float, nargs=2, default=[450.0, 2000.0])
    ap.add_argument("--phase-index", type=float, default=1.45)
    ap.add_argument("--group-index", type=float, default=1.47)
    ap.add_argument("-o", "--output", default="data/canonical_profile.json")
    args = ap.parse_args()

    w0 = omega(args.pump)
    xa = (omega(args.zdw[0]) - w0) / UNIT
    xb = (omega(args.zdw[1]) - w0) / UNIT
    xi = (omega(args.idler) - w0) / UNIT
    big_omega = (omega(args.signal) - w0) / UNIT
    qdeg = 4
    n = qdeg + 1

    def beta2_poly(q):
        return P.polymul(P.polymul([-xa, 1.0], [-xb, 1.0]), q)

    def constraints(q):
        b2 = beta2_poly(q)
        k = P.polyint(P.polyint(b2))
        gv = P.polyval(xi, P.polyint(b2))
        pm = 2 * P.polyval(0.0, k) - P.polyval(big_omega, k) - P.polyval(-big_omega, k)
        return gv, pm

    eye = np.eye(n)
    cmat = np.array([constraints(eye[j]) for j in range(n)]).T

    lam = np.linspace(args.domain[0], args.domain[1], 600)
    x = (2 * math.pi * C / (lam * 1e-9) - w0) / UNIT
    # q in units of 1e-27 s^2/m; D in ps/(nm km) = 1e6 s/m^2
    scale = -(2 * math.pi * C / (lam * 1e-9) ** 2) * 1e-27 * 1e6
    m = np.array([scale * P.polyval(x, beta2_poly(eye[j])) for j in range(n)]).T
    half = 0.5 * (args.zdw[1] - args.zdw[0])
    target = args.d_peak * (lam - args.zdw[0]) * (args.zdw[1] - lam) / half**2

    kkt = np.block([[m.T @ m, cmat.T], [cmat, np.zeros((2, 2))]])
    q = np.linalg.solve(kkt, np.concatenate([m.T @ target, [0.0, 0.0]]))[:n]
    if np.min(P.polyval(x, q)) <= 0:
        raise SystemExit("q changes sign on the domain; extra zero-dispersion points")

    b2 = beta2_poly(q) * 1e-27  # s^2/m, polynomial in x
    betas = [args.phase_index * w0 / C, args.group_index / C]
    for j, coef in enumerate(b2):
        betas.append(float(coef) * math.factorial(j) / UNIT**j)

    out = {
        "reference_frequency": w0,
        "beta_coefficients": betas,
        "index_offset": 0.0,
        "domain": args.domain,
        "generator": {
            "script": "tools/make_fixture.py",
            "d_peak": args.d_peak,
            "pump_nm": args.pump,
            "signal_nm": args.signal,
            "idler_nm": args.idler,
            "zdw_nm": args.zdw,
        },
    }
    with open(args.output, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
