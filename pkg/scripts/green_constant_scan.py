"""Walk-on-spheres estimates of the annulus Green's function constant c over inner radii."""
import argparse

from confbubble.errors import BudgetExceeded
from confbubble.harmonic import AnnulusSpec, green_estimate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.005, 0.01, 0.02, 0.05, 0.1, 0.2])
    ap.add_argument("--walks", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(f"{'rho':>8} {'c':>12}")
    for rho in args.rho:
        try:
            est = green_estimate(AnnulusSpec(rho, 0.5, 0.7, 0.9), walks=args.walks, seed=args.seed)
        except BudgetExceeded as exc:
            print(f"{rho:8g} {'-':>12}  ({exc}; raise --walks)")
            continue
        print(f"{rho:8g} {est.c:12.6g}")


if __name__ == "__main__":
    main()
