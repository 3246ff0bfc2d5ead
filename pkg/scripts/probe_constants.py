"""Coercivity and inf-sup estimates on a sequence of uniform meshes.

    python3 scripts/probe_constants.py --q 2 --ns 2 4 8
"""

import argparse

from chnsdg import Discretization, coercivity_constants, estimate_infsup, structured_unit_square


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=1)
    ap.add_argument("--ns", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--sigma", type=float, default=None)
    args = ap.parse_args()

    print(f"{'n':>4} {'K_alpha':>9} {'K_eps':>9} {'beta_h':>9}")
    for n in args.ns:
        disc = Discretization(structured_unit_square(n), args.q, args.sigma)
        ka, ke = coercivity_constants(disc)
        print(f"{n:4d} {ka:9.4f} {ke:9.4f} {estimate_infsup(disc):9.4f}")


if __name__ == "__main__":
    main()
