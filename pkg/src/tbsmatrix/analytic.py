"""Closed-form transmission amplitudes, poles and double-pole conditions.

These exist to be compared against the numerical pipeline, so each formula
is written out directly rather than routed through ``heff``/``scattering``.
Self-energies follow the decaying-resonance sign, -v^2 e^{ik}, throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, InvalidArgumentError
from .spectra import box_eigensystem, channel_momentum, continued_phase

__all__ = [
    "ChainAmplitudes",
    "chain_rt",
    "dot1_transmission",
    "TwoSiteDotParams",
    "dot2_heff",
    "dot2_poles",
    "dot2_transmission",
    "dot2_double_pole_residual",
    "PointContactRoots",
    "point_contact_pole_roots",
    "slab_block",
    "slab_poles",
    "slab_double_pole_residual",
    "duality_probe",
]


@dataclass(frozen=True)
class ChainAmplitudes:
    t: complex
    r: complex
    decoupled: bool = False


def chain_rt(N: int, v_L: float, v_R: float, k: float) -> ChainAmplitudes:
    """Transmission and reflection of an N-site chain between two 1D leads.

    Plane-wave convention: psi_j = e^{ikj} + r e^{-ikj} (j < 1) and t e^{ikj}
    (j > N). With a vanishing contact the limit t = 0, r = -e^{2ik}... is not
    what the formula's 1/v terms give, so it is returned directly and flagged.
    """
    if not 0.0 < k < np.pi:
        raise InvalidArgumentError(f"k must lie in (0, pi), got {k!r}")
    e = np.exp(1j * k)
    if v_L == 0.0 or v_R == 0.0:
        # decoupled chain: total reflection off the lead end site
        return ChainAmplitudes(0.0j, complex(-e * e) if v_L == 0.0 else complex(-1.0), True)
    A = (v_L - 1 / v_L) * (v_R - 1 / v_R) * e ** (2 * N) - e**-2 * (v_L * e**2 - 1 / v_L) * (
        v_R * e**2 - 1 / v_R
    )
    t = 4 * np.sin(k) ** 2 / A
    r = t / (v_L * (1 - e**-2)) * (v_R - e**-2 / v_R + (1 / v_R - v_R) * e ** (2 * N)) - 1
    return ChainAmplitudes(complex(t), complex(r))


def dot1_transmission(v: float, k: float) -> complex:
    """Single site between two leads of equal strength v: -i v^2 sin k / (cos k - v^2 e^{ik})."""
    if not 0.0 < k < np.pi:
        raise InvalidArgumentError(f"k must lie in (0, pi), got {k!r}")
    return complex(-1j * v * v * np.sin(k) / (np.cos(k) - v * v * np.exp(1j * k)))


@dataclass(frozen=True)
class TwoSiteDotParams:
    """Two-site dot: case A (= B) has one lead per site, case C both leads on site 1."""

    v_L: float
    v_R: float
    case: str = "A"

    def __post_init__(self):
        if self.case.upper() not in ("A", "B", "C"):
            raise InvalidArgumentError(f"unknown two-site dot case {self.case!r}")

    def mean_shift(self, E: float) -> complex:
        """Self-energy of the two contacts averaged: (v_L^2 + v_R^2) e^{ik} / 2."""
        _, x = channel_momentum(E)
        return 0.5 * (self.v_L**2 + self.v_R**2) * x

    def split_shift(self, E: float) -> complex:
        """Half the contact imbalance: (v_L^2 - v_R^2) e^{ik} / 2."""
        _, x = channel_momentum(E)
        return 0.5 * (self.v_L**2 - self.v_R**2) * x


def _check_band(E: float) -> None:
    if not abs(E) < 2.0:
        raise InvalidArgumentError(f"two-site dot formulas need |E| < 2, got {E!r}")


def dot2_heff(params: TwoSiteDotParams, E: float) -> np.ndarray:
    """2x2 effective Hamiltonian in the closed-box basis (E_1 = -1, E_2 = +1)."""
    mean, split = params.mean_shift(E), params.split_shift(E)
    if params.case.upper() == "C":
        return np.array([[-1 - mean, -mean], [-mean, 1 - mean]])
    return np.array([[-1 - mean, -split], [-split, 1 - mean]])


def dot2_poles(params: TwoSiteDotParams, E: float) -> tuple[complex, complex]:
    """z = -m +/- sqrt(1 + s^2) (case A) or -m +/- sqrt(1 + m^2) (case C), m the mean and s the split shift."""
    _check_band(E)
    mean = params.mean_shift(E)
    other = mean if params.case.upper() == "C" else params.split_shift(E)
    root = np.sqrt(1 + other * other + 0j)
    return complex(-mean + root), complex(-mean - root)


def dot2_transmission(params: TwoSiteDotParams, E: float) -> complex:
    """Standing-wave convention amplitude:

    case A:  2i v_L v_R sqrt(1 - E^2/4) / ((E - z_1)(E - z_2))
    case C: -2i v_L v_R E sqrt(1 - E^2/4) / ((E - z_1)(E - z_2))
    """
    _check_band(E)
    z1, z2 = dot2_poles(params, E)
    s = np.sqrt(1 - 0.25 * E * E)
    num = 2j * params.v_L * params.v_R * s
    if params.case.upper() == "C":
        num = -num * E
    return complex(num / ((E - z1) * (E - z2)))


def dot2_double_pole_residual(params: TwoSiteDotParams, E: float) -> float:
    """Distance from the double-pole condition: E = 0 with unit split shift (case A) or unit mean shift (case C)."""
    if params.case.upper() == "C":
        strength = 0.5 * (params.v_L**2 + params.v_R**2)
    else:
        strength = 0.5 * abs(params.v_L**2 - params.v_R**2)
    return abs(E) + abs(strength - 1.0)


# ----------------------------------------------------------------------------
# point contact with both leads on one site


@dataclass(frozen=True)
class PointContactRoots:
    poles: np.ndarray
    residuals: np.ndarray
    shifted: np.ndarray  # True for roots of the secular equation, False for untouched E_b
    converged: bool


def _merge_levels(E_b: np.ndarray, weights: np.ndarray, tol: float = 1e-12):
    order = np.argsort(E_b, kind="stable")
    levels: list[float] = []
    w: list[float] = []
    count: list[int] = []
    for i in order:
        if levels and abs(E_b[i] - levels[-1]) <= tol * (1 + abs(levels[-1])):
            w[-1] += weights[i]
            count[-1] += 1
        else:
            levels.append(float(E_b[i]))
            w.append(float(weights[i]))
            count.append(1)
    return np.array(levels), np.array(w), np.array(count)


def point_contact_pole_roots(
    E_b: Sequence[float],
    psi0: Sequence[float],
    v_L: float,
    v_R: float,
    E: float | None = None,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> PointContactRoots:
    """Poles for two 1D leads on one site j_0 from the scalar secular equation

        1 - omega sum_b psi_b(j_0)^2 / (E_b - z) = 0,  omega = (v_L^2 + v_R^2) e^{ik},

    i.e. 1 + sum_b 1/x_b = 0 with x_b = (E_b - z) / (-omega psi_b^2).

    With ``E`` given, omega is frozen at e^{ik(E)} and the roots are the
    eigenvalues of H_eff(E). With ``E=None`` omega follows z through the
    continued e^{ik(z)} and the roots are the self-consistent resonance poles.

    Degenerate levels are merged (their weights add) and each leaves
    multiplicity - 1 poles at E_b; levels with psi_b(j_0) = 0 stay at E_b.
    Roots come from fixed-point iteration seeded at each E_b, polished by
    Newton; missing roots are re-seeded from the numerator polynomial.
    """
    E_b = np.asarray(E_b, dtype=float)
    psi0 = np.asarray(psi0, dtype=float)
    if E_b.shape != psi0.shape:
        raise InvalidArgumentError("E_b and psi0 must have the same length")
    g = v_L**2 + v_R**2
    weights = psi0**2
    levels, w, count = _merge_levels(E_b, weights)
    active = w > 1e-28
    if g == 0.0 or not active.any():
        return PointContactRoots(np.sort(E_b.astype(complex)), np.zeros(len(E_b)), np.zeros(len(E_b), bool), True)
    La, wa = levels[active], w[active]

    if E is None:
        def omega(z):
            return g * continued_phase(z)

        def domega(z):
            x = continued_phase(z)
            return g * (-x * x / (x * x - 1.0))
    else:
        _, x0 = channel_momentum(E)

        def omega(z):
            return g * x0

        def domega(z):
            return 0.0

    def F(z):
        return 1.0 - omega(z) * np.sum(wa / (La - z))

    def dF(z):
        s = np.sum(wa / (La - z))
        ds = np.sum(wa / (La - z) ** 2)
        return -domega(z) * s - omega(z) * ds

    def newton(z):
        for _ in range(max_iter):
            step = F(z) / dF(z)
            if not np.isfinite(step):
                return z, False
            z = z - step
            if abs(step) < tol * (1 + abs(z)):
                return z, True
        return z, abs(F(z)) < 1e-9

    def fixed_point(b):
        z = complex(La[b])
        others = np.arange(len(La)) != b
        for _ in range(max_iter):
            denom = 1.0 - omega(z) * np.sum(wa[others] / (La[others] - z))
            z_new = La[b] - omega(z) * wa[b] / denom
            if abs(z_new - z) < 1e-10 * (1 + abs(z)):
                return z_new
            z = z_new
        return z

    roots: list[complex] = []

    def accept(z, ok):
        if not ok or not np.isfinite(z):
            return
        if any(abs(z - r) < 1e-8 * (1 + abs(r)) for r in roots):
            return
        roots.append(complex(z))

    # iterates may land exactly on a level; those runs are discarded by accept()
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for b in range(len(La)):
            accept(*newton(fixed_point(b)))
        if len(roots) < len(La):
            # numerator of the secular function: prod(L - z) - omega sum_b w_b prod_{b' != b}(L' - z)
            om = omega(complex(np.mean(La)))
            poly = np.poly(La)  # prod(z - L)
            sign = (-1) ** len(La)
            num = sign * poly
            for b in range(len(La)):
                num = num - np.pad(om * wa[b] * sign * -np.poly(np.delete(La, b)), (1, 0))
            for seed in np.roots(num):
                accept(*newton(seed))
                if len(roots) == len(La):
                    break
    converged = len(roots) == len(La)
    unshifted = list(np.repeat(levels[active], count[active] - 1))
    unshifted += list(np.repeat(levels[~active], count[~active]))
    poles = np.array(roots + [complex(u) for u in unshifted])
    residuals = np.array([abs(F(r)) for r in roots] + [0.0] * len(unshifted))
    shifted = np.array([True] * len(roots) + [False] * len(unshifted))
    order = np.lexsort((poles.imag, poles.real))
    if not converged:
        raise ConvergenceError(
            f"found {len(roots)} of {len(La)} secular roots; residuals {residuals[: len(roots)]}"
        )
    return PointContactRoots(poles[order], residuals[order], shifted[order], converged)


# ----------------------------------------------------------------------------
# slab with a face lead, Nz = 2


def slab_block(E_b: float, v: float, E: float) -> np.ndarray:
    """The 2x2 block of H_eff for one transverse state b of an Nz = 2 slab (face lead)."""
    _, x = channel_momentum(E, E_b)
    h = 0.5 * v * v * x
    return np.array([[E_b - 1 - h, h], [h, E_b + 1 - h]])


def slab_poles(E_b: float, v: float, E: float) -> tuple[complex, complex]:
    """z_+- = E_b - (v^2/2) e^{ik_b} +/- sqrt(1 + (v^4/4) e^{2ik_b})."""
    _, x = channel_momentum(E, E_b)
    root = np.sqrt(1 + 0.25 * v**4 * x * x + 0j)
    base = E_b - 0.5 * v * v * x
    return complex(base + root), complex(base - root)


def slab_double_pole_residual(E_b: float, v: float, E: float) -> float:
    """Distance from v^2 = 2, E = E_b (where the radical vanishes and z = E_b - i)."""
    return abs(v * v - 2.0) + abs(E - E_b)


def duality_probe(N: int, v: float, ks: Sequence[float]) -> np.ndarray:
    """|t| for couplings v and 1/v on a k grid, columns (k, |t(v)|, |t(1/v)|).

    Tabulated for inspection only: the two curves share narrow peaks in both
    limits but are not pointwise equal.
    """
    rows = []
    for k in ks:
        rows.append((k, abs(chain_rt(N, v, v, k).t), abs(chain_rt(N, 1 / v, 1 / v, k).t)))
    return np.array(rows)


def closed_levels(N: int) -> np.ndarray:
    """Closed-box levels, the reference marks for transmission curves."""
    return box_eigensystem(N).energies
