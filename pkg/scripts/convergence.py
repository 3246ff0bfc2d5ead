"""Manufactured-solution convergence tables (space or time refinement).

    python3 scripts/convergence.py space --q 1 --ns 4 8 16
    python3 scripts/convergence.py time --n 32 --divisions 4 8 16
"""

import argparse

from chnsdg.verify_mms import builtin_case, run_convergence, spatial_taus, temporal_case

NORMS = ("err_c_dg", "err_mu_dg_acc", "err_v_l2", "err_v_dg_acc")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("study", choices=["space", "time"])
    ap.add_argument("--q", type=int, default=1)
    ap.add_argument("--ns", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--divisions", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--T", type=float, default=None)
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args()

    if args.study == "space":
        T = args.T or 0.1
        table = run_convergence(builtin_case(), args.q, args.ns,
                                spatial_taus(args.ns, T, 0.1, args.q), T, by="h")
    else:
        T = args.T or 0.5
        table = run_convergence(temporal_case(), args.q, [args.n] * len(args.divisions),
                                [T / d for d in args.divisions], T, by="tau")
    eocs = {k: table.eoc(k) for k in NORMS}
    print(f"{'h':>9} {'tau':>9} " + " ".join(f"{k:>14} {'eoc':>5}" for k in NORMS))
    for i, row in enumerate(table.as_records()):
        cells = []
        for k in NORMS:
            e = eocs[k][i]
            cells.append(f"{row[k]:14.4e} {'' if e is None else f'{e:5.2f}':>5}")
        print(f"{row['h']:9.4g} {row['tau']:9.3g} " + " ".join(cells))
    if args.csv:
        table.write_csv(args.csv)


if __name__ == "__main__":
    main()
