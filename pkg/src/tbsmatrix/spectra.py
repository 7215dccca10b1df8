"""Closed-form spectra of lattice boxes and straight leads.

Every closed system here is separable, so eigenvalues and eigenvectors are
written down directly from the sine solution of the discrete Laplacian with
Dirichlet walls. Nothing is diagonalized numerically.

Lattice conventions: hopping -1 between nearest neighbours, so a box of N
sites has E_n = -2 cos(pi n / (N + 1)) and a lead channel with transverse
threshold E_p disperses as E = -2 cos k + E_p.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "BoxSpectrum1D",
    "RectSpectrum2D",
    "Channel",
    "box_eigensystem",
    "transverse_modes",
    "rect_eigensystem",
    "channel_momentum",
    "phase_factor",
    "continued_phase",
]


def _cos_pi_frac(m: np.ndarray, d: int) -> np.ndarray:
    """cos(pi m / d) for integer 0 < m < d, antisymmetric about m = d/2 to the bit."""
    m = np.asarray(m)
    mirrored = 2 * m > d
    base = np.where(mirrored, d - m, m)
    out = np.cos(np.pi * base / d)
    out = np.where(2 * base == d, 0.0, out)
    return np.where(mirrored, -out, out)


def _sine_modes(n_sites: int) -> np.ndarray:
    """Orthonormal Dirichlet sine modes, column n-1 holds psi_n(j), j = 1..n_sites."""
    d = n_sites + 1
    j = np.arange(1, n_sites + 1)
    # reduce the argument mod 2d so large n*j keeps full precision
    arg = np.mod(np.outer(j, j), 2 * d)
    return np.sqrt(2.0 / d) * np.sin(np.pi * arg / d)


@dataclass(frozen=True)
class BoxSpectrum1D:
    """Spectrum of an N-site chain with Dirichlet walls at sites 0 and N+1."""

    N: int
    energies: np.ndarray
    eigvecs: np.ndarray

    def psi(self, n: int, j: int) -> float:
        """psi_n(j) with 1-based indices; zero on the virtual wall sites."""
        if j <= 0 or j > self.N:
            return 0.0
        return float(self.eigvecs[j - 1, n - 1])


def box_eigensystem(N: int) -> BoxSpectrum1D:
    if int(N) != N or N < 1:
        raise InvalidArgumentError(f"box size must be an integer >= 1, got {N!r}")
    N = int(N)
    n = np.arange(1, N + 1)
    energies = -2.0 * _cos_pi_frac(n, N + 1)
    return BoxSpectrum1D(N=N, energies=energies, eigvecs=_sine_modes(N))


def transverse_modes(N_L: int) -> BoxSpectrum1D:
    """Thresholds E_p and transverse profiles phi_p of a straight lead of width N_L.

    The cross-section of a lead is itself a Dirichlet box, so this is the same
    object as ``box_eigensystem(N_L)``: ``energies[p-1]`` is E_p and column
    ``p-1`` of ``eigvecs`` is phi_p over the lead's own transverse sites.
    """
    if int(N_L) != N_L or N_L < 1:
        raise InvalidArgumentError(f"lead width must be an integer >= 1, got {N_L!r}")
    return box_eigensystem(N_L)


@dataclass(frozen=True)
class RectSpectrum2D:
    """Product spectrum of an Nx x Ny rectangle.

    ``states`` lists (m, n, E_mn) in ascending energy, ties broken by (m, n).
    Site (i, j) is flattened as (i - 1) * Ny + (j - 1).
    """

    Nx: int
    Ny: int
    box_x: BoxSpectrum1D
    box_y: BoxSpectrum1D
    states: tuple[tuple[int, int, float], ...]

    @property
    def energies(self) -> np.ndarray:
        return np.array([s[2] for s in self.states])

    @property
    def quantum_numbers(self) -> np.ndarray:
        return np.array([(s[0], s[1]) for s in self.states], dtype=int)

    def site_index(self, i: int, j: int) -> int:
        if not (1 <= i <= self.Nx and 1 <= j <= self.Ny):
            raise InvalidArgumentError(f"site ({i}, {j}) outside {self.Nx}x{self.Ny} grid")
        return (i - 1) * self.Ny + (j - 1)

    def psi(self, state: int, i: int, j: int) -> float:
        m, n, _ = self.states[state]
        return self.box_x.psi(m, i) * self.box_y.psi(n, j)

    def eigvecs(self) -> np.ndarray:
        """All eigenvectors sampled on the grid, shape (Nx*Ny, n_states)."""
        qn = self.quantum_numbers
        px = self.box_x.eigvecs[:, qn[:, 0] - 1]
        py = self.box_y.eigvecs[:, qn[:, 1] - 1]
        return (px[:, None, :] * py[None, :, :]).reshape(self.Nx * self.Ny, len(qn))


def rect_eigensystem(Nx: int, Ny: int) -> RectSpectrum2D:
    bx, by = box_eigensystem(Nx), box_eigensystem(Ny)
    m, n = np.meshgrid(np.arange(1, Nx + 1), np.arange(1, Ny + 1), indexing="ij")
    m, n = m.ravel(), n.ravel()
    e = bx.energies[m - 1] + by.energies[n - 1]
    # ties from mirrored levels are exact; rounding only guards accidental ones
    order = np.lexsort((n, m, np.round(e, 12)))
    states = tuple((int(m[s]), int(n[s]), float(e[s])) for s in order)
    return RectSpectrum2D(Nx=Nx, Ny=Ny, box_x=bx, box_y=by, states=states)


@dataclass(frozen=True)
class Channel:
    """One transverse mode of one lead.

    ``origin`` is the longitudinal lattice coordinate of the lead's first site
    along the lead axis; it only enters the plane-wave phase convention of the
    S-matrix (see ``scattering``).
    """

    lead_id: str
    p: int
    threshold: float
    phi: np.ndarray = field(repr=False)
    v: float
    origin: int = 0

    def status(self, E: float) -> Literal["open", "evanescent"]:
        return "open" if abs(E - self.threshold) < 2.0 else "evanescent"


def channel_momentum(E: float, E_p: float = 0.0) -> tuple[complex, complex]:
    """Longitudinal wavenumber k and phase factor e^{ik} at energy E.

    Inside the band the retarded branch is taken, 0 < k < pi. Outside it the
    decaying branch |e^{ik}| < 1 is taken: k = i kappa below the band and
    k = pi + i kappa above it. Band edges give e^{ik} = +1 or -1 exactly.
    """
    w = float(E) - float(E_p)
    if abs(w) < 2.0:
        c = -0.5 * w
        s = np.sqrt(1.0 - c * c)
        return complex(np.arccos(c)), complex(c, s)
    kappa = float(np.arccosh(0.5 * abs(w)))
    if w < 0:
        return complex(0.0, kappa), complex(np.exp(-kappa))
    return complex(np.pi, kappa), complex(-np.exp(-kappa))


def phase_factor(w: np.ndarray | float) -> np.ndarray:
    """Vectorized e^{ik} for detunings w = E - E_p (same branches as channel_momentum)."""
    w = np.asarray(w, dtype=float)
    out = np.empty(w.shape, dtype=complex)
    inside = np.abs(w) < 2.0
    c = -0.5 * w[inside]
    out[inside] = c + 1j * np.sqrt(1.0 - c * c)
    wo = w[~inside]
    decay = np.exp(-np.arccosh(0.5 * np.abs(wo)))
    out[~inside] = np.where(wo < 0, decay, -decay)
    return out


def continued_phase(z: complex | np.ndarray) -> np.ndarray | complex:
    """e^{ik} continued to complex detuning z = E - E_p.

    For |Re z| < 2 the retarded band value is continued through the cut, so
    poles below the real axis land on the resonance sheet (|e^{ik}| > 1 there).
    For |Re z| >= 2 the decaying root (|e^{ik}| <= 1) is kept, matching
    ``channel_momentum`` for closed channels.
    """
    z = np.asarray(z, dtype=complex)
    band = -0.5 * z + 1j * np.sqrt(1.0 - 0.25 * z * z)
    r = np.sqrt(0.25 * z * z - 1.0)
    a, b = -0.5 * z + r, -0.5 * z - r
    decaying = np.where(np.abs(a) <= np.abs(b), a, b)
    out = np.where(np.abs(z.real) < 2.0, band, decaying)
    return out[()] if out.ndim == 0 else out
