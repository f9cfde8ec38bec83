"""Critical radius of the standard bubble against sqrt(1 + |x|^2) for a sweep of centres."""
import argparse
import csv
import sys

import numpy as np

from confbubble.blowup import standard_bubble
from confbubble.symmetry import critical_radius


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--R", type=float, default=50.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="CSV output path (stdout if omitted)")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    U = standard_bubble(args.n)
    rows = []
    for r in np.linspace(0.0, 2.0, args.count):
        d = rng.standard_normal(args.n)
        x = r * d / np.linalg.norm(d)
        res = critical_radius(U, x, args.R)
        exact = float(np.sqrt(1 + r * r))
        rows.append({"abs_x": r, "lambda_bar": res.lambda_bar, "exact": exact, "rel_err": res.lambda_bar / exact - 1, "identity_ratio": res.identity_ratio(U)})
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
