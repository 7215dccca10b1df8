"""Poles of the two-site dot against energy for both lead arrangements.

For each E the two eigenvalues of the effective Hamiltonian are listed with
the closed-form pair, and |t| in both conventions of the closed form.
"""
import argparse

import numpy as np

from tbsmatrix.analytic import TwoSiteDotParams, dot2_poles, dot2_transmission
from tbsmatrix.coupling import dot2_system
from tbsmatrix.heff import build_heff, eigensystem
from tbsmatrix.scattering import smatrix
from tbsmatrix.tracker import matched_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", choices=["A", "C"], default="A")
    ap.add_argument("--v-l", type=float, default=1.5)
    ap.add_argument("--v-r", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=21)
    args = ap.parse_args()

    params = TwoSiteDotParams(args.v_l, args.v_r, args.case)
    system = dot2_system(args.case, args.v_l, args.v_r)
    print(f"{'E':>8} {'z1':>24} {'z2':>24} {'|t|':>10} {'|t| closed':>10} {'pole dev':>9}")
    for E in np.linspace(-1.9, 1.9, args.points):
        z = np.sort_complex(eigensystem(build_heff(system, E)).poles)
        dev = matched_distance(z, dot2_poles(params, E))
        t = abs(smatrix(E, system).t[0, 0])
        tc = abs(dot2_transmission(params, E))
        print(f"{E:+8.4f} {z[0].real:+11.6f}{z[0].imag:+11.6f}j {z[1].real:+11.6f}{z[1].imag:+11.6f}j "
              f"{t:10.6f} {tc:10.6f} {dev:9.1e}")


if __name__ == "__main__":
    main()
