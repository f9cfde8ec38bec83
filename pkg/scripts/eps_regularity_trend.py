"""B_1 sup and B_2 energy of concentrating bubbles U^{0, mu} against the total bubble energy."""
import argparse

from confbubble.blowup import bubble, bubble_energy, eps_regularity_probe
from confbubble.mobius import BubbleParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.25, 1, 4, 16, 64, 256, 1024])
    args = ap.parse_args(argv)
    total = bubble_energy(args.n)
    print(f"total bubble energy {total:.12g}")
    print(f"{'mu':>8} {'energy_B2':>16} {'gap':>12} {'sup_B1':>12} {'median_B2':>12}")
    for mu in args.mu:
        res = eps_regularity_probe(bubble(BubbleParams([0.0] * args.n, mu)), total / 2)
        print(f"{mu:8g} {res.energy:16.12g} {total - res.energy:12.3e} {res.sup_b1:12.6g} {res.median_b2:12.6g}")


if __name__ == "__main__":
    main()
