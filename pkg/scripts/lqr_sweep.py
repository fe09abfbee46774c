"""Scalar LQR check of the update laws across cost weights and plant poles.

    python scripts/lqr_sweep.py [--out lqr_sweep.csv]
"""

import argparse
import csv

from hjbr.trainer import GateError, SelftestConfig, lqr_selftest

GRID = [(a, eta) for a in (-2.0, -1.0, -0.5, 0.0) for eta in (1.5, 2.0, 5.0, 10.0)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="lqr_sweep.csv")
    args = p.parse_args()
    rows = []
    for a, eta in GRID:
        cfg = SelftestConfig(a=a, eta=eta)
        try:
            rep = lqr_selftest(cfg)
            forced = False
        except GateError:
            rep = lqr_selftest(cfg, force=True)
            forced = True
        rows.append((a, eta, rep.P_riccati, rep.gain_learned, rep.rel_error, rep.hjb_residual, rep.converged, forced))
        print(f"a={a:5.2f} eta={eta:5.2f}  P*={rep.P_riccati:.5f}  gain={rep.gain_learned:.5f}  "
              f"rel={rep.rel_error:.1e}  hjb={rep.hjb_residual:.1e}  {'ok' if rep.converged else 'FAIL'}"
              f"{'  (gate forced)' if forced else ''}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "eta", "P_riccati", "gain_learned", "rel_error", "hjb_residual", "converged", "gate_forced"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
