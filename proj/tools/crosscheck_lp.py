#!/usr/bin/env python3
"""Solve exported programs with HiGHS and compare against `medge solve`.

usage: crosscheck_lp.py MEDGE CONFIG [--requests N ...] [--mu MU ...]
"""

import argparse
import os
import subprocess
import sys
import tempfile

import highspy


def medge_objective(medge, config, requests, mu, mode):
    out = subprocess.run(
        [medge, "solve", "--config", config, "--requests", str(requests), "--mu", str(mu), "--scheme", mode],
        check=True, capture_output=True, text=True).stdout
    fields = dict(line.split("=", 1) for line in out.splitlines() if "=" in line and not line.startswith(" "))
    return fields["status"], float(fields["objective"])


def highs_objective(medge, config, requests, mu, mode, directory):
    path = os.path.join(directory, f"r{requests}_mu{mu}_{mode}.lp")
    subprocess.run(
        [medge, "export-lp", "--config", config, "--requests", str(requests), "--mu", str(mu), "--mode", mode, path],
        check=True, capture_output=True)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-12)
    if h.readModel(path) != highspy.HighsStatus.kOk:
        raise RuntimeError(f"HiGHS could not read {path}")
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"HiGHS did not prove optimality on {path}: {h.modelStatusToString(h.getModelStatus())}")
    return h.getInfo().objective_function_value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("medge")
    ap.add_argument("config")
    ap.add_argument("--requests", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--mu", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    # HiGHS prunes nodes that come within its feasibility tolerance (1e-6) of
    # the incumbent, so its "optimal" value can sit that far above ours.
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for requests in args.requests:
            for mu in args.mu:
                for mode in ("OptimT", "OptimNT"):
                    status, ours = medge_objective(args.medge, args.config, requests, mu, mode)
                    theirs = highs_objective(args.medge, args.config, requests, mu, mode, tmp)
                    ok = status == "optimal" and abs(ours - theirs) <= args.tol
                    failures += not ok
                    print(f"requests={requests} mu={mu} {mode}: medge {ours:.10g} ({status}) "
                          f"highs {theirs:.10g} {'ok' if ok else 'MISMATCH'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
