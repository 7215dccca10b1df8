"""Direct lattice solution of the scattering problem by wave matching.

This is the reference path: it never touches ``heff``, ``scattering`` or
``analytic``. Everything is set up on lattice sites. Each lead is expanded in
all of its transverse modes (propagating and evanescent), so the result is
exact on the lattice up to linear-algebra round-off.

Lead conventions: a lead is a semi-infinite stack of identical slices,
s = 0, 1, 2, ... counted away from the billiard. Slice 0 touches the listed
contact sites through hopping -v (one bond per transverse site); neighbouring
slices are joined by hopping -1. In mode p the slice amplitude is
c_p(s) = delta_{p,p0} x_p^{-s} + o_p x_p^{s}, with x_p = e^{ik_p} on the
retarded or decaying branch.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import BandEdgeError, InvalidArgumentError, SingularResolventError
from .spectra import box_eigensystem, continued_phase, phase_factor, rect_eigensystem

__all__ = [
    "ScatteringSolution1D",
    "solve_chain_1d",
    "Billiard",
    "LatticeLead",
    "LatticeSolution",
    "rect_billiard",
    "side_lead",
    "point_lead",
    "face_lead",
    "solve_lattice",
    "solve_lattice_2d",
    "OraclePole",
    "oracle_pole_scan",
]


# ----------------------------------------------------------------------------
# 1D chain, four unknowns


@dataclass(frozen=True)
class ScatteringSolution1D:
    """Amplitudes of e^{ikj} + r e^{-ikj} (left), a e^{ikj} + b e^{-ikj} (chain), t e^{ikj} (right)."""

    r: complex
    t: complex
    a: complex
    b: complex
    residual: float


def solve_chain_1d(N: int, v_L: float, v_R: float, k: float) -> ScatteringSolution1D:
    if int(N) != N or N < 1:
        raise InvalidArgumentError(f"chain length must be an integer >= 1, got {N!r}")
    if not 0.0 < k < np.pi:
        raise BandEdgeError(f"k must lie strictly inside (0, pi), got {k!r}")
    E = -2.0 * np.cos(k)
    x = np.exp(1j * k)
    xN = x**N
    A = np.array(
        [
            [E + x, v_L * x, v_L / x, 0.0],
            [v_L, -1.0, -1.0, 0.0],
            [0.0, xN * x, 1.0 / (xN * x), -v_R * xN * x],
            [0.0, v_R * xN, v_R / xN, E * xN * x + xN * x * x],
        ],
        dtype=complex,
    )
    rhs = np.array([-E - 1.0 / x, -v_L, 0.0, 0.0], dtype=complex)
    r, a, b, t = np.linalg.solve(A, rhs)

    # residual of the raw site equations E psi_j = -(neighbours), evaluated at j = 0, 1, N, N+1
    def lead_L(j):
        return x**j + r * x ** (-j)

    def chain(j):
        return a * x**j + b * x ** (-j)

    def lead_R(j):
        return t * x**j

    def box(j):
        if j <= 0:
            return lead_L(j)
        if j > N:
            return lead_R(j)
        return chain(j)

    def hop(i, j):
        lo, hi = min(i, j), max(i, j)
        if lo == 0 and hi == 1:
            return v_L
        if lo == N and hi == N + 1:
            return v_R
        return 1.0

    res = max(
        abs(E * box(j) + hop(j, j - 1) * box(j - 1) + hop(j, j + 1) * box(j + 1))
        for j in (0, 1, N, N + 1)
    )
    return ScatteringSolution1D(complex(r), complex(t), complex(a), complex(b), float(res))


# ----------------------------------------------------------------------------
# general lattice billiards


@dataclass(frozen=True)
class Billiard:
    """Occupied sites of a grid (any dimension); sites numbered in C order."""

    mask: np.ndarray

    @property
    def n_sites(self) -> int:
        return int(self.mask.sum())

    def index(self, *coords: int) -> int:
        """Flat site index for 1-based grid coordinates."""
        pos = tuple(c - 1 for c in coords)
        if len(pos) != self.mask.ndim or any(not 0 <= p < s for p, s in zip(pos, self.mask.shape)):
            raise InvalidArgumentError(f"site {coords} outside grid {self.mask.shape}")
        if not self.mask[pos]:
            raise InvalidArgumentError(f"site {coords} is not part of the billiard")
        numbering = np.cumsum(self.mask.ravel()) - 1
        return int(numbering[np.ravel_multi_index(pos, self.mask.shape)])

    def hamiltonian(self) -> np.ndarray:
        numbering = -np.ones(self.mask.shape, dtype=int)
        numbering[self.mask] = np.arange(self.n_sites)
        H = np.zeros((self.n_sites, self.n_sites))
        for axis in range(self.mask.ndim):
            a = np.moveaxis(numbering, axis, 0)
            left, right = a[:-1].ravel(), a[1:].ravel()
            bond = (left >= 0) & (right >= 0)
            H[left[bond], right[bond]] = -1.0
            H[right[bond], left[bond]] = -1.0
        return H


def rect_billiard(*shape: int) -> Billiard:
    return Billiard(np.ones(shape, dtype=bool))


@dataclass(frozen=True)
class LatticeLead:
    """A straight lead: contact sites in transverse order, their modes, and the lattice origin.

    ``phi[:, p]`` is transverse mode p sampled on the contact sites and
    ``thresholds[p]`` its band centre. ``origin`` is the longitudinal lattice
    coordinate of slice 0, used only to express S in absolute plane waves.
    """

    lead_id: str
    sites: np.ndarray
    thresholds: np.ndarray
    phi: np.ndarray
    v: float
    origin: int = 0

    @property
    def n_modes(self) -> int:
        return len(self.thresholds)


def side_lead(billiard: Billiard, side: str, wall_lo: int, wall_hi: int, v: float) -> LatticeLead:
    """Lead on the left (column 1) or right (column Nx) of a 2D grid, occupying rows wall_lo+1..wall_hi-1."""
    Nx, Ny = billiard.mask.shape
    width = wall_hi - wall_lo - 1
    if width < 1 or wall_lo < 0 or wall_hi > Ny + 1:
        raise InvalidArgumentError(f"lead walls ({wall_lo}, {wall_hi}) do not fit {Ny} rows")
    column = {"left": 1, "right": Nx}.get(side)
    if column is None:
        raise InvalidArgumentError(f"side must be 'left' or 'right', got {side!r}")
    modes = box_eigensystem(width)
    sites = np.array([billiard.index(column, j) for j in range(wall_lo + 1, wall_hi)])
    lead_id = "L" if side == "left" else "R"
    origin = 0 if side == "left" else Nx + 1
    return LatticeLead(lead_id, sites, modes.energies, modes.eigvecs, float(v), origin)


def point_lead(lead_id: str, site: int, v: float, origin: int = 0) -> LatticeLead:
    return LatticeLead(lead_id, np.array([site]), np.zeros(1), np.ones((1, 1)), float(v), origin)


def face_lead(billiard: Billiard, z: int, v: float, lead_id: str = "B") -> LatticeLead:
    """Lead covering the whole face z of an Nx x Ny x Nz grid; its modes are the face's own states."""
    Nx, Ny, _ = billiard.mask.shape
    rect = rect_eigensystem(Nx, Ny)
    sites = np.array([billiard.index(i, j, z) for i in range(1, Nx + 1) for j in range(1, Ny + 1)])
    return LatticeLead(lead_id, sites, rect.energies, rect.eigvecs(), float(v), 0)


@dataclass(frozen=True)
class LatticeSolution:
    """S over the open channels, in table order (lead_id, p).

    ``S`` uses absolute-coordinate plane waves, ``S_local`` the waves measured
    from each lead's slice 0. ``psi[:, c]`` is the billiard wavefunction for a
    unit incoming wave in open channel c.
    """

    E: float
    S: np.ndarray
    S_local: np.ndarray
    channels: tuple[tuple[str, int], ...]
    k: np.ndarray
    psi: np.ndarray = field(repr=False)
    residual: float
    condition: float

    def block(self, out_lead: str, in_lead: str) -> np.ndarray:
        rows = [i for i, c in enumerate(self.channels) if c[0] == out_lead]
        cols = [i for i, c in enumerate(self.channels) if c[0] == in_lead]
        return self.S[np.ix_(rows, cols)]

    @property
    def unitarity_defect(self) -> float:
        return float(np.abs(self.S @ self.S.conj().T - np.eye(len(self.S))).max())

    @property
    def reciprocity_defect(self) -> float:
        return float(np.abs(self.S - self.S.T).max())


def solve_lattice(billiard: Billiard, leads: Sequence[LatticeLead], E: float) -> LatticeSolution:
    E = float(E)
    leads = sorted(leads, key=lambda l: l.lead_id)
    n = billiard.n_sites
    H = billiard.hamiltonian()
    sizes = [l.n_modes for l in leads]
    offsets = np.concatenate([[n], n + np.cumsum(sizes)])
    dim = int(offsets[-1])
    A = np.zeros((dim, dim), dtype=complex)
    A[:n, :n] = E * np.eye(n) - H
    xs = []
    for lead, off in zip(leads, offsets[:-1]):
        x = phase_factor(E - lead.thresholds)
        xs.append(x)
        m = lead.n_modes
        A[lead.sites, off : off + m] += lead.v * lead.phi
        A[off : off + m, lead.sites] += lead.v * x[:, None] * lead.phi.T
        A[off : off + m, off : off + m] -= np.eye(m)

    incoming = []  # (lead index, mode index)
    for li, lead in enumerate(leads):
        w = E - lead.thresholds
        for p in range(lead.n_modes):
            if abs(w[p]) < 2.0:
                if 1.0 - 0.25 * w[p] ** 2 < 1e-24:
                    raise BandEdgeError(f"channel {lead.lead_id}{p + 1} sits on its band edge at E={E}")
                incoming.append((li, p))
    if not incoming:
        raise InvalidArgumentError(f"no open channel at E={E}")
    B = np.zeros((dim, len(incoming)), dtype=complex)
    for col, (li, p) in enumerate(incoming):
        lead, off = leads[li], offsets[li]
        x = xs[li][p]
        B[lead.sites, col] = -lead.v * lead.phi[:, p]
        B[off + p, col] = x * x

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A)
        inv_norm = np.abs(sla.lu_solve((lu, piv), np.eye(dim))).sum(axis=0).max()
    anorm = np.abs(A).sum(axis=0).max()
    rcond = 1.0 / (anorm * inv_norm) if np.isfinite(inv_norm) else 0.0
    if rcond > 1e-13:
        X = sla.lu_solve((lu, piv), B)
    else:
        # a bound state in the continuum leaves A singular; the sources are
        # still in its range and the outgoing amplitudes are unaffected
        X = sla.lstsq(A, B)[0]
        if np.abs(A @ X - B).max() > 1e-9 * max(1.0, np.abs(B).max()):
            raise SingularResolventError(f"wave-matching system is singular at E={E} (rcond={rcond:.3e})")
    residual = float(np.abs(A @ X - B).max())

    k = np.array([np.arccos(-0.5 * (E - leads[li].thresholds[p])) for li, p in incoming])
    sin_k = np.sin(k)
    origin = np.array([leads[li].origin for li, _ in incoming], dtype=float)
    rows = np.array([offsets[li] + p for li, p in incoming])
    O = X[rows, :]
    S_local = O * np.sqrt(sin_k[:, None] / sin_k[None, :])
    phase = np.exp(-1j * k * origin)
    S = phase[:, None] * S_local * phase[None, :]
    channels = tuple((leads[li].lead_id, p + 1) for li, p in incoming)
    condition = float(1.0 / rcond) if rcond > 0 else float("inf")
    return LatticeSolution(E, S, S_local, channels, k, X[:n, :], residual, condition)


def solve_lattice_2d(
    Nx: int, Ny: int, leads: Sequence[tuple[str, int, int, float]], E: float, mask: np.ndarray | None = None
) -> LatticeSolution:
    """Rectangle (or masked grid) with side leads given as (side, wall_lo, wall_hi, v)."""
    billiard = Billiard(np.ones((Nx, Ny), dtype=bool) if mask is None else np.asarray(mask, bool))
    return solve_lattice(billiard, [side_lead(billiard, *spec) for spec in leads], E)


# ----------------------------------------------------------------------------
# pole scan


@dataclass(frozen=True)
class OraclePole:
    z: complex
    residual: float  # smallest singular value of z - H - Sigma at the root


def _site_matrix(billiard_H, leads, z, E):
    n = billiard_H.shape[0]
    M = z * np.eye(n, dtype=complex) - billiard_H
    dM = np.eye(n, dtype=complex)
    for lead in leads:
        if E is None:
            x = np.array([continued_phase(z - t) for t in lead.thresholds])
            dx = -x * x / (x * x - 1.0)
        else:
            x = phase_factor(E - lead.thresholds)
            dx = np.zeros_like(x)
        v2 = lead.v**2
        idx = np.ix_(lead.sites, lead.sites)
        M[idx] += v2 * (lead.phi * x) @ lead.phi.T
        dM[idx] += v2 * (lead.phi * dx) @ lead.phi.T
    return M, dM


def oracle_pole_scan(
    billiard: Billiard,
    leads: Sequence[LatticeLead],
    window: tuple[float, float, float, float],
    density: int = 200,
    energy: float | None = None,
    tol: float = 1e-13,
    seeds: Sequence[complex] = (),
) -> list[OraclePole]:
    """Zeros of det(z - H_site - Sigma(z)) inside window = (re_min, re_max, im_min, im_max).

    Sigma(z) is the lead self-energy on the contact sites, -v^2 sum_p phi_p phi_p^T e^{ik_p}.
    With ``energy=None`` e^{ik_p} follows z on the continued branch (self-consistent
    resonance poles); with a real ``energy`` it is frozen there, and the zeros are the
    eigenvalues of the energy-dependent effective Hamiltonian at that energy.
    Local minima of log|det| on a density x density grid seed a Newton search;
    extra ``seeds`` (e.g. candidate poles to be certified) are added to them.
    Seeds that converge onto a zero already found are retried with the known
    zeros deflated, and a final deflated search around every zero picks up
    neighbours the grid did not resolve. Repeated zeros are reported once.
    """
    re0, re1, im0, im1 = window
    if not (re0 < re1 and im0 < im1):
        raise InvalidArgumentError(f"empty window {window}")
    H = billiard.hamiltonian()
    re = np.linspace(re0, re1, density)
    im = np.linspace(im0, im1, density)
    logdet = np.empty((density, density))
    for a, y in enumerate(im):
        for b, x in enumerate(re):
            M, _ = _site_matrix(H, leads, complex(x, y), energy)
            logdet[a, b] = np.linalg.slogdet(M)[1]
    pad = np.pad(logdet, 1, constant_values=np.inf)
    centre = pad[1:-1, 1:-1]
    is_min = np.ones_like(centre, dtype=bool)
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            if da or db:
                is_min &= centre <= pad[1 + da : 1 + da + density, 1 + db : 1 + db + density]
    seeds = [complex(s) for s in seeds] + [complex(re[b], im[a]) for a, b in zip(*np.nonzero(is_min))]
    span = max(re1 - re0, im1 - im0)
    found: list[OraclePole] = []

    def newton(z, known):
        # Newton on det(M) / prod(z - known), i.e. with the known zeros divided out
        for _ in range(100):
            M, dM = _site_matrix(H, leads, z, energy)
            try:
                g = np.trace(np.linalg.solve(M, dM)) - sum(1.0 / (z - p) for p in known)
            except (np.linalg.LinAlgError, ZeroDivisionError):
                return None
            step = 1.0 / g
            if not np.isfinite(step):
                return None
            z = z - step
            if abs(step) < tol * (1 + abs(z)):
                break
        return z

    def accept(z):
        if z is None or not np.isfinite(z):
            return False
        inside = re0 - 1e-9 * span <= z.real <= re1 + 1e-9 * span and im0 - 1e-9 * span <= z.imag <= im1 + 1e-9 * span
        if not inside or any(abs(z - p.z) < 1e-7 * (1 + abs(z)) for p in found):
            return False
        M, _ = _site_matrix(H, leads, z, energy)
        smin = float(np.linalg.svd(M, compute_uv=False).min())
        if smin > 1e-7:
            return False
        found.append(OraclePole(complex(z), smin))
        return True

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for z0 in seeds:
            z = newton(z0, ())
            if accept(z) or z is None:
                continue
            # a seed that lands on a known zero may sit in a cluster the grid did not resolve
            accept(newton(z0, [p.z for p in found]))
        # look for unresolved neighbours next to every zero, with all known zeros deflated
        h = span / density
        queue = list(found)
        while queue:
            p0 = queue.pop()
            for offset in (h, 1j * h, -h, -1j * h):
                if accept(newton(p0.z + offset, [p.z for p in found])):
                    queue.append(found[-1])
    found.sort(key=lambda p: (p.z.real, p.z.imag))
    return found
