"""Search for coalescing pole pairs in the two-site dot and the Nz = 2 slab.

Each certificate lists the parameters found, the pole, the remaining gap,
the eigenvector self-orthogonality and the distance from the closed-form
condition. A generic chain is searched as a negative control.
"""
import numpy as np

from tbsmatrix.analytic import TwoSiteDotParams, dot2_double_pole_residual, slab_double_pole_residual
from tbsmatrix.coupling import chain_system, dot2_system, slab_system
from tbsmatrix.heff import build_heff
from tbsmatrix.tracker import find_double_pole


def report(label, certs):
    if not certs:
        print(f"{label}: none found")
    for c in certs:
        res = "n/a" if c.analytic_residual is None else f"{c.analytic_residual:.1e}"
        print(f"{label}: params ({c.params[0]:+.8f}, {c.params[1]:.8f})  z = {c.z.real:+.6f}{c.z.imag:+.6f}j  "
              f"gap {c.gap:.1e}  self-orth {c.self_orthogonality:.1e}  closed-form residual {res}")


def main():
    v_R = 0.5
    report("dot A  (E, v_L)", find_double_pole(
        lambda E, v: build_heff(dot2_system("A", v, v_R), E), ((-0.5, 0.5), (1.0, 2.0)),
        analytic_residual=lambda E, v: dot2_double_pole_residual(TwoSiteDotParams(v, v_R, "A"), E)))
    report("dot C  (E, v)", find_double_pole(
        lambda E, v: build_heff(dot2_system("C", v, v), E), ((-0.5, 0.5), (0.5, 1.5)),
        analytic_residual=lambda E, v: dot2_double_pole_residual(TwoSiteDotParams(v, v, "C"), E)))
    E_b = 0.3
    report("slab b (E, v)", find_double_pole(
        lambda E, v: build_heff(slab_system("b", 2, v, E_b=np.array([E_b])), E), ((0.0, 0.6), (1.0, 1.8)),
        analytic_residual=lambda E, v: slab_double_pole_residual(E_b, v, E)))
    report("chain N=3 (E, v_L)", find_double_pole(
        lambda E, v: build_heff(chain_system(3, v, 0.7), E), ((-1.0, 1.0), (0.2, 1.0))))


if __name__ == "__main__":
    main()
