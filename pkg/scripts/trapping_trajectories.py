"""Pole trajectories of an N-site chain as one contact (or both) is strengthened.

Prints a subsampled table of the branches and the trapping summary: how many
widths grow past the reference coupling and how many shrink.
"""
import argparse

import numpy as np

from tbsmatrix.coupling import chain_system
from tbsmatrix.tracker import coupling_path, trace_poles, trapping_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--energy", type=float, default=1.0)
    ap.add_argument("--v-r", type=float, default=0.05, help="fixed right contact; omit with --symmetric")
    ap.add_argument("--symmetric", action="store_true", help="sweep v_L = v_R together")
    ap.add_argument("--stop", type=float, default=4.0)
    ap.add_argument("--count", type=int, default=401)
    ap.add_argument("--reference", type=float, default=1.0)
    ap.add_argument("--every", type=int, default=40)
    args = ap.parse_args()

    values = np.linspace(0.0, args.stop, args.count)
    path = [(v, v if args.symmetric else args.v_r) for v in values]
    traj = trace_poles(coupling_path(lambda a, b: chain_system(args.n, a, b), args.energy), path)
    for s in range(0, len(values), args.every):
        zs = " ".join(f"{z.real:+.4f}{z.imag:+.4f}j" for z in traj.branches[s])
        print(f"v_L = {values[s]:5.2f}  {zs}")
    ref = int(np.argmin(np.abs(values - args.reference)))
    rep = trapping_report(traj, ref)
    print(f"reference v_L = {values[ref]:.3f}")
    for b in range(traj.n_branches):
        print(f"branch {b + 1}: width {rep.widths_ref[b]:.4e} -> {rep.widths_end[b]:.4e}"
              f"  ratio {rep.ratio[b]:.3g}{'  (outside band)' if rep.band_exit[b] else ''}")
    print(f"broad {rep.n_broad}, trapped {rep.n_trapped}, trace defect {traj.trace_defect:.1e}, "
          f"flags {len(traj.flags)}")


if __name__ == "__main__":
    main()
