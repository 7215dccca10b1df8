"""Billiard-to-lead coupling matrices W and the open systems built from them.

W[b, c] is the overlap of closed-billiard state b with channel c on the
attachment area, times the lead hopping v_C. It carries no energy
dependence: the flux factor sqrt(|sin k|/2pi) and the self-energy phase
e^{ik} are applied downstream, so one W serves a whole energy sweep.

Channel order is frozen as (lead_id, p) ascending; S-matrix layouts rely on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .spectra import (
    BoxSpectrum1D,
    Channel,
    RectSpectrum2D,
    box_eigensystem,
    rect_eigensystem,
    transverse_modes,
)

__all__ = [
    "CouplingMatrix",
    "OpenSystem",
    "LeadSpec",
    "coupling_1d",
    "coupling_rect2d",
    "coupling_point_contact",
    "coupling_slab3d",
    "flux_normalized",
    "chain_system",
    "dot2_system",
    "rect_system",
    "point_contact_system",
    "slab_system",
]


def _check_v(*vs: float) -> None:
    for v in vs:
        if not np.isfinite(v) or v < 0:
            raise InvalidArgumentError(f"coupling strength must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class CouplingMatrix:
    W: np.ndarray
    channels: tuple[Channel, ...]

    def __post_init__(self):
        if self.W.ndim != 2 or self.W.shape[1] != len(self.channels):
            raise InvalidArgumentError("W must have one column per channel")

    @property
    def K(self) -> int:
        return len(self.channels)

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([c.threshold for c in self.channels], dtype=float)

    @property
    def v(self) -> np.ndarray:
        return np.array([c.v for c in self.channels], dtype=float)

    @property
    def origins(self) -> np.ndarray:
        return np.array([c.origin for c in self.channels], dtype=float)

    @property
    def lead_ids(self) -> tuple[str, ...]:
        seen: list[str] = []
        for c in self.channels:
            if c.lead_id not in seen:
                seen.append(c.lead_id)
        return tuple(seen)

    @staticmethod
    def concat(parts: Sequence["CouplingMatrix"]) -> "CouplingMatrix":
        W = np.hstack([p.W for p in parts])
        channels = tuple(c for p in parts for c in p.channels)
        order = sorted(range(len(channels)), key=lambda i: (channels[i].lead_id, channels[i].p))
        return CouplingMatrix(W=W[:, order], channels=tuple(channels[i] for i in order))


def flux_normalized(coupling: CouplingMatrix, E: float) -> np.ndarray:
    """V_b(E, C, p) = W_C(b, p) sqrt(|sin k_p| / pi) over the channels open at E.

    With this factor the width part of the self-energy, W W^T sin k, equals
    pi V V^T, which is what makes 1 - 2 pi i V^T (E - H_eff)^{-1} V unitary.
    Columns of closed channels are dropped; the result has one column per open
    channel in table order.
    """
    w = E - coupling.thresholds
    is_open = np.abs(w) < 2.0
    sin_k = np.sqrt(1.0 - 0.25 * w[is_open] ** 2)
    return coupling.W[:, is_open] * np.sqrt(sin_k / np.pi)


@dataclass(frozen=True)
class OpenSystem:
    """A closed billiard spectrum together with its lead coupling.

    ``basis`` optionally samples the closed eigenstates on the billiard sites
    (shape ``(n_sites, N)``) so interior wavefunctions can be drawn.
    """

    energies: np.ndarray
    coupling: CouplingMatrix
    label: str = ""
    basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.energies)

    @property
    def W(self) -> np.ndarray:
        return self.coupling.W

    @property
    def channels(self) -> tuple[Channel, ...]:
        return self.coupling.channels


# ----------------------------------------------------------------------------
# 1D chain


def coupling_1d(box: BoxSpectrum1D, v_L: float, v_R: float) -> CouplingMatrix:
    """Two single-channel leads on sites 1 and N: W[n] = (v_L psi_n(1), v_R psi_n(N))."""
    _check_v(v_L, v_R)
    one = np.ones(1)
    W = np.column_stack([v_L * box.eigvecs[0, :], v_R * box.eigvecs[-1, :]])
    channels = (
        Channel("L", 1, 0.0, one, float(v_L), origin=0),
        Channel("R", 1, 0.0, one, float(v_R), origin=box.N + 1),
    )
    return CouplingMatrix(W=W, channels=channels)


def chain_system(N: int, v_L: float, v_R: float) -> OpenSystem:
    box = box_eigensystem(N)
    return OpenSystem(box.energies, coupling_1d(box, v_L, v_R), f"chain1d(N={N})", box.eigvecs)


def dot2_system(case: str, v_L: float, v_R: float) -> OpenSystem:
    """Two-site dot. Case A (and B, which is the same network) is the 2-site
    chain with one lead per site; case C hangs both leads on site 1."""
    case = case.upper()
    if case in ("A", "B"):
        sys = chain_system(2, v_L, v_R)
        return OpenSystem(sys.energies, sys.coupling, f"dot2({case})", sys.basis)
    if case != "C":
        raise InvalidArgumentError(f"unknown two-site dot case {case!r}")
    _check_v(v_L, v_R)
    box = box_eigensystem(2)
    one = np.ones(1)
    W = np.column_stack([v_L * box.eigvecs[0, :], v_R * box.eigvecs[0, :]])
    channels = (Channel("L", 1, 0.0, one, float(v_L)), Channel("R", 1, 0.0, one, float(v_R)))
    return OpenSystem(box.energies, CouplingMatrix(W, channels), "dot2(C)", box.eigvecs)


# ----------------------------------------------------------------------------
# 2D rectangle with side leads


@dataclass(frozen=True)
class LeadSpec:
    """Straight lead on the left or right side of a rectangle.

    The lead's walls sit at rows ``wall_lo`` and ``wall_hi`` (exclusive), so it
    occupies rows wall_lo+1 .. wall_hi-1 and has width wall_hi - wall_lo - 1.
    ``wall_lo=0, wall_hi=Ny+1`` is a full-width lead.
    """

    side: Literal["left", "right"]
    wall_lo: int
    wall_hi: int
    v: float = 1.0

    @property
    def width(self) -> int:
        return self.wall_hi - self.wall_lo - 1

    @property
    def rows(self) -> np.ndarray:
        return np.arange(self.wall_lo + 1, self.wall_hi)

    @property
    def lead_id(self) -> str:
        return "L" if self.side == "left" else "R"

    @classmethod
    def full_width(cls, side: str, Ny: int, v: float = 1.0) -> "LeadSpec":
        return cls(side, 0, Ny + 1, v)  # type: ignore[arg-type]


def coupling_rect2d(rect: RectSpectrum2D, lead: LeadSpec) -> CouplingMatrix:
    """W[(m,n), p] = v_C psi_m(column) * sum_j phi_p(j) psi_n(j)."""
    _check_v(lead.v)
    if lead.side not in ("left", "right"):
        raise InvalidArgumentError(f"lead side must be 'left' or 'right', got {lead.side!r}")
    if lead.width < 1 or lead.wall_lo < 0 or lead.wall_hi > rect.Ny + 1:
        raise InvalidArgumentError(
            f"lead walls ({lead.wall_lo}, {lead.wall_hi}) do not fit a side of {rect.Ny} rows"
        )
    modes = transverse_modes(lead.width)
    rows = lead.rows
    # transverse overlap: rows of the billiard basis restricted to the lead rows
    overlap = rect.box_y.eigvecs[rows - 1, :].T @ modes.eigvecs  # (Ny, N_L)
    column = 1 if lead.side == "left" else rect.Nx
    qn = rect.quantum_numbers
    W = lead.v * rect.box_x.eigvecs[column - 1, qn[:, 0] - 1][:, None] * overlap[qn[:, 1] - 1, :]
    origin = 0 if lead.side == "left" else rect.Nx + 1
    channels = tuple(
        Channel(lead.lead_id, p + 1, float(modes.energies[p]), modes.eigvecs[:, p], float(lead.v), origin)
        for p in range(lead.width)
    )
    return CouplingMatrix(W=W, channels=channels)


def rect_system(Nx: int, Ny: int, leads: Sequence[LeadSpec]) -> OpenSystem:
    rect = rect_eigensystem(Nx, Ny)
    ids = [l.lead_id for l in leads]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError("at most one lead per side")
    coupling = CouplingMatrix.concat([coupling_rect2d(rect, l) for l in leads])
    return OpenSystem(rect.energies, coupling, f"rect2d({Nx}x{Ny})", rect.eigvecs())


# ----------------------------------------------------------------------------
# point contacts


def coupling_point_contact(
    basis: np.ndarray, site_L: int, site_R: int, v_L: float, v_R: float
) -> CouplingMatrix:
    """Two 1D leads touching single billiard sites: W[b] = (v_L psi_b(j_L), v_R psi_b(j_R)).

    ``basis`` holds psi_b sampled on the billiard sites, shape (n_sites, N).
    """
    _check_v(v_L, v_R)
    n_sites = basis.shape[0]
    for s in (site_L, site_R):
        if not 0 <= s < n_sites:
            raise InvalidArgumentError(f"contact site {s} outside billiard of {n_sites} sites")
    one = np.ones(1)
    W = np.column_stack([v_L * basis[site_L, :], v_R * basis[site_R, :]])
    channels = (Channel("L", 1, 0.0, one, float(v_L)), Channel("R", 1, 0.0, one, float(v_R)))
    return CouplingMatrix(W=W, channels=channels)


def point_contact_system(
    Nx: int, Ny: int, j_L: tuple[int, int], j_R: tuple[int, int], v_L: float, v_R: float
) -> OpenSystem:
    rect = rect_eigensystem(Nx, Ny)
    basis = rect.eigvecs()
    coupling = coupling_point_contact(basis, rect.site_index(*j_L), rect.site_index(*j_R), v_L, v_R)
    return OpenSystem(rect.energies, coupling, f"point-contact({Nx}x{Ny})", basis)


# ----------------------------------------------------------------------------
# 3D slab of height Nz


def coupling_slab3d(
    case: str,
    E_b: np.ndarray,
    Nz: int,
    v: float,
    transverse_basis: np.ndarray | None = None,
) -> tuple[np.ndarray, CouplingMatrix]:
    """Slab states |b, n_z> (b-major) and their coupling.

    Case "a": one 1D lead on every site of the bottom face z = 1. Without a
    transverse basis the leads are rotated into the billiard basis (an
    orthogonal change of channel basis, all leads share the same k), giving
    W[(b,n_z), b'] = v psi_{n_z}(1) delta_bb'. With a basis (n_sites, Nb) the
    channels stay one per site: W[(b,n_z), j] = v psi_b(j) psi_{n_z}(1).

    Case "b": one 3D lead over the top face z = Nz whose transverse modes are
    the billiard's own states, so channel b has threshold E_b and
    W[(b,n_z), b'] = v psi_{n_z}(Nz) delta_bb'.

    Returns the slab energies E_b + E_{n_z} and the coupling matrix.
    """
    _check_v(v)
    E_b = np.asarray(E_b, dtype=float).ravel()
    box_z = box_eigensystem(Nz)
    Nb = len(E_b)
    energies = (E_b[:, None] + box_z.energies[None, :]).ravel()
    case = case.lower()
    if case == "a":
        amp = box_z.eigvecs[0, :]  # psi_{n_z}(1)
        if transverse_basis is None:
            W = v * np.kron(np.eye(Nb), amp[:, None])
            channels = tuple(Channel("A", b + 1, 0.0, np.ones(1), float(v)) for b in range(Nb))
        else:
            U = np.asarray(transverse_basis, dtype=float)
            if U.shape[1] != Nb:
                raise InvalidArgumentError("transverse basis must have one column per E_b")
            W = v * np.kron(U.T, amp[:, None])
            channels = tuple(
                Channel("A", j + 1, 0.0, np.ones(1), float(v)) for j in range(U.shape[0])
            )
    elif case == "b":
        amp = box_z.eigvecs[-1, :]  # psi_{n_z}(Nz)
        W = v * np.kron(np.eye(Nb), amp[:, None])
        channels = tuple(
            Channel("B", b + 1, float(E_b[b]), np.eye(Nb)[:, b], float(v)) for b in range(Nb)
        )
    else:
        raise InvalidArgumentError(f"unsupported slab geometry {case!r} (expected 'a' or 'b')")
    return energies, CouplingMatrix(W=W, channels=channels)


def slab_system(
    case: str,
    Nz: int,
    v: float,
    E_b: np.ndarray | None = None,
    Nx: int | None = None,
    Ny: int | None = None,
) -> OpenSystem:
    """Slab over either an explicit list of transverse energies or an Nx x Ny rectangle.

    With a rectangle the closed basis is sampled on the Nx*Ny*Nz grid
    (C order over (i, j, z)) and case "a" keeps one channel per bottom site.
    """
    basis = None
    transverse = None
    if E_b is None:
        if Nx is None or Ny is None:
            raise InvalidArgumentError("slab needs either E_b or a rectangle Nx x Ny")
        rect = rect_eigensystem(Nx, Ny)
        E_b = rect.energies
        transverse = rect.eigvecs()
        box_z = box_eigensystem(Nz)
        basis = np.kron(transverse, box_z.eigvecs)
    energies, coupling = coupling_slab3d(
        case, E_b, Nz, v, transverse if case.lower() == "a" else None
    )
    return OpenSystem(energies, coupling, f"slab3d({case},Nz={Nz})", basis)
