"""Sup deviation from 1 on B_1 of the n = 5 counterexample family, with the fitted log-log slope."""
import argparse

import numpy as np

from confbubble.fields import ball_values
from confbubble.fixtures import gen_fixture


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--R", type=float, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--h", type=float, default=0.25)
    args = ap.parse_args(argv)
    sups = []
    for R in args.R:
        fx = gen_fixture("remark21-counterexample", {"R": R, "h": args.h})
        _, vals = ball_values(fx.grid, np.zeros(5), 1.0)
        sups.append(float(np.max(np.abs(vals - 1))))
        print(f"R={R:6g} grid sup {sups[-1]:.6e} exact sup {fx.meta['sup_deviation_B1']:.6e}")
    slope = np.polyfit(np.log(args.R), np.log(sups), 1)[0]
    print(f"log-log slope {slope:.4f} (reference -9)")


if __name__ == "__main__":
    main()
