#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) problem with SDPA-GMP through sdpap and
write the primal block matrices in SDPA result layout (`yMat = {...}`).

usage: sdpa_solve.py INPUT.dat-s OUTPUT.out [key=value ...]

Extra key=value pairs override solver options (mpfPrecision, epsilonStar,
epsilonDash, lambdaStar, maxIteration, ...).
"""
import sys

import numpy as np
import sdpap
from sdpap import fileio

DEFAULTS = {
    "mpfPrecision": 256,
    "epsilonStar": 1e-30,
    "epsilonDash": 1e-30,
    "lambdaStar": 1e4,
    "maxIteration": 200,
    "upperBound": 1e40,
    "lowerBound": -1e40,
    "print": "no",
}


def parse_value(v):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def main(argv):
    if len(argv) < 3:
        sys.stderr.write(__doc__)
        return 3
    src, dst = argv[1], argv[2]
    opts = dict(DEFAULTS)
    for kv in argv[3:]:
        k, _, v = kv.partition("=")
        opts[k] = parse_value(v)
    A, b, c, K, J = fileio.importsdpa(src, flipsign=True)
    x, y, info, tinfo, sinfo = sdpap.solve(A, b, c, K, J, opts)
    x = np.asarray(x.todense()).ravel()
    with open(dst, "w") as out:
        out.write("phase.value = %s\n" % sinfo.get("phasevalue"))
        out.write("objValPrimal = %.17e\n" % -sinfo["primalObj"])
        out.write("objValDual = %.17e\n" % -sinfo["dualObj"])
        out.write("iteration = %s\n" % sinfo.get("iteration"))
        out.write("total_time = %.3f\n" % tinfo["total"])
        out.write("yMat = \n{\n")
        off = 0
        for n in K.s:
            block = x[off:off + n * n].reshape(n, n)
            off += n * n
            out.write("{\n")
            for row in block:
                out.write("{" + ", ".join("%.17e" % v for v in row) + "},\n")
            out.write("}\n")
        out.write("}\n")
    return 0 if str(sinfo.get("phasevalue")) in ("pdOPT", "pdFEAS") else 4


if __name__ == "__main__":
    sys.exit(main(sys.argv))
