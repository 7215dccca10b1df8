"""|t|^2 of a short chain against k over a range of contact strengths.

Prints the pipeline value next to the closed form and the lattice solution,
plus the closed-box levels where the weak-contact peaks should sit.
"""
import argparse

import numpy as np

from tbsmatrix.analytic import chain_rt, closed_levels
from tbsmatrix.coupling import chain_system
from tbsmatrix.oracle import solve_chain_1d
from tbsmatrix.scattering import smatrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--v", type=float, nargs="+", default=[0.2, 1.0, 5.0])
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()

    print("closed levels:", " ".join(f"{e:+.6f}" for e in closed_levels(args.n)))
    print(f"{'v':>6} {'k':>9} {'E':>10} {'T pipeline':>13} {'T closed':>13} {'T lattice':>13}")
    worst = 0.0
    for v in args.v:
        system = chain_system(args.n, v, v)
        for k in np.linspace(0.05, np.pi - 0.05, args.points):
            E = -2 * np.cos(k)
            T = smatrix(E, system).conductance
            Tc = abs(chain_rt(args.n, v, v, k).t) ** 2
            To = abs(solve_chain_1d(args.n, v, v, k).t) ** 2
            worst = max(worst, abs(T - Tc), abs(T - To))
            print(f"{v:6.2f} {k:9.5f} {E:+10.5f} {T:13.6e} {Tc:13.6e} {To:13.6e}")
    print(f"max deviation: {worst:.2e}")


if __name__ == "__main__":
    main()
