"""Energy-dependent effective Hamiltonian and its biorthogonal eigensystem.

    H_eff(E) = diag(E_b) - sum_c W[:, c] W[:, c]^T e^{ik_c(E)}

Eliminating a semi-infinite lead (hopping -1, contact hopping -v) leaves the
surface self-energy -v^2 e^{ik} on the contact sites, exactly: the principal
value integral over the bounded band is what produces the real part
(radiation shift). The matrix is complex symmetric, not Hermitian, and its
eigenvalues are the S-matrix poles at energy E.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .coupling import CouplingMatrix, OpenSystem, coupling_point_contact, coupling_slab3d
from .errors import InvalidArgumentError, NoOpenChannelError
from .spectra import BoxSpectrum1D, RectSpectrum2D, phase_factor

__all__ = [
    "Mode",
    "EffectiveHamiltonian",
    "PoleSet",
    "DEFECT_TOL",
    "build_heff",
    "build_heff_1d",
    "build_heff_rect2d",
    "build_heff_point_contact",
    "build_heff_slab3d",
    "eigensystem",
]

# relative eigenvalue gap below which a pair counts as coalescing
DEFECT_TOL = 1e-6
# smallest singular value of a unit-normalized cluster Gram matrix that still
# counts as diagonalizable
_GRAM_TOL = 1e-3


class Mode(str, enum.Enum):
    OPEN = "open-only"
    ALL = "all-channels"
    WIDE = "wide-band"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        aliases = {"open": cls.OPEN, "all": cls.ALL, "wide": cls.WIDE, "wideband": cls.WIDE}
        try:
            return cls(value)
        except ValueError:
            if value in aliases:
                return aliases[value]
            raise InvalidArgumentError(
                f"unknown mode {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class EffectiveHamiltonian:
    H: np.ndarray
    E: float
    mode: Mode
    phases: np.ndarray  # e^{ik_c} per channel (as used)
    included: np.ndarray  # channels entering the self-energy
    is_open: np.ndarray
    energies: np.ndarray
    label: str = ""

    @property
    def N(self) -> int:
        return self.H.shape[0]

    @property
    def radiation_shift(self) -> np.ndarray:
        """Real part of the self-energy matrix, H.real - diag(E_b)."""
        return self.H.real - np.diag(self.energies)

    @property
    def width_matrix(self) -> np.ndarray:
        """-Im H_eff: positive semidefinite whenever every included channel is open."""
        return -self.H.imag


def build_heff(system: OpenSystem, E: float, mode: Mode | str = Mode.ALL) -> EffectiveHamiltonian:
    """Assemble H_eff(E) for any open system.

    Modes:
      open-only     self-energy summed over channels with |E - E_p| < 2
      all-channels  evanescent channels added too (real e^{ik}); exact on the lattice
      wide-band     open channels with e^{ik} replaced by -(E - E_p)/2 + i
    """
    mode = Mode.parse(mode)
    E = float(E)
    w = E - system.coupling.thresholds
    x = phase_factor(w)
    is_open = np.abs(w) < 2.0
    if mode is Mode.ALL:
        included = np.ones_like(is_open)
    else:
        included = is_open.copy()
        if not included.any():
            raise NoOpenChannelError(f"no open channel at E={E!r} in {mode.value} mode")
        if mode is Mode.WIDE:
            x = np.where(is_open, -0.5 * w + 1j, x)
    W = system.W[:, included]
    H = np.diag(system.energies).astype(complex) - (W * x[included]) @ W.T
    H = 0.5 * (H + H.T)
    return EffectiveHamiltonian(H, E, mode, x, included, is_open, system.energies, system.label)


def build_heff_1d(box: BoxSpectrum1D, coupling: CouplingMatrix, E: float, mode=Mode.OPEN):
    """H_mn = E_m delta_mn - V_mn e^{ik}, V_mn = v_L^2 psi_m(1)psi_n(1) + v_R^2 psi_m(N)psi_n(N)."""
    return build_heff(OpenSystem(box.energies, coupling, f"chain1d(N={box.N})"), E, mode)


def build_heff_rect2d(rect: RectSpectrum2D, couplings, E: float, mode=Mode.OPEN):
    coupling = CouplingMatrix.concat(list(couplings))
    return build_heff(OpenSystem(rect.energies, coupling, f"rect2d({rect.Nx}x{rect.Ny})"), E, mode)


def build_heff_point_contact(basis, E_b, site_L: int, site_R: int, v_L, v_R, E, mode=Mode.OPEN):
    """Rank <= 2 self-energy; for site_L == site_R it is rank 1 with strength (v_L^2 + v_R^2) e^{ik}."""
    coupling = coupling_point_contact(np.asarray(basis), site_L, site_R, v_L, v_R)
    return build_heff(OpenSystem(np.asarray(E_b, float), coupling, "point-contact"), E, mode)


def build_heff_slab3d(case: str, E_b, Nz: int, v: float, E: float, mode=Mode.OPEN):
    """Case a: blocks with one common e^{ik}; case b: block b uses e^{ik_b}, k_b from E - E_b.
    Both are block diagonal with Nz x Nz blocks (diagonal for Nz = 1)."""
    energies, coupling = coupling_slab3d(case, E_b, Nz, v)
    return build_heff(OpenSystem(energies, coupling, f"slab3d({case},Nz={Nz})"), E, mode)


# ----------------------------------------------------------------------------
# eigensystem


@dataclass(frozen=True)
class PoleSet:
    """Poles z_lambda with right eigenvectors normalized so that R^T R = 1.

    ``defective[i]`` marks a pole inside a cluster of coalescing eigenvalues
    whose eigenvectors are (numerically) linearly dependent, i.e. a double
    pole. Columns of defective clusters are left at unit 2-norm instead.
    ``self_orthogonality[i]`` is |r^T r| / (r^H r) before normalization.
    """

    poles: np.ndarray
    right: np.ndarray
    defective: np.ndarray
    self_orthogonality: np.ndarray
    E: float | None = None
    mode: Mode | None = None
    clusters: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def widths(self) -> np.ndarray:
        return -2.0 * self.poles.imag

    @property
    def any_defective(self) -> bool:
        return bool(self.defective.any())

    def overlap(self) -> np.ndarray:
        """(lambda|lambda') = R^T R (transpose, no conjugation)."""
        return self.right.T @ self.right


def _clusters(z: np.ndarray, tol: float) -> list[list[int]]:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < tol * (1.0 + abs(z[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _fix_sign(r: np.ndarray) -> np.ndarray:
    big = np.argmax(np.abs(r))
    return -r if r[big].real < 0 else r


def eigensystem(H: EffectiveHamiltonian | np.ndarray, defect_tol: float = DEFECT_TOL) -> PoleSet:
    """All eigenpairs of a complex symmetric H, biorthogonally normalized.

    Poles come out sorted by (Re z, Im z). Exactly degenerate but
    diagonalizable clusters (symmetry degeneracies) are re-orthogonalized with
    the inverse square root of their transpose Gram matrix; clusters whose
    Gram matrix is singular are flagged defective rather than failing.
    """
    E = mode = None
    if isinstance(H, EffectiveHamiltonian):
        E, mode, H = H.E, H.mode, H.H
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise InvalidArgumentError("effective Hamiltonian has non-finite entries")
    z, R = sla.eig(H)
    order = np.lexsort((z.imag, z.real))
    z, R = z[order], R[:, order]
    R = R / np.linalg.norm(R, axis=0)
    self_orth = np.abs(np.einsum("ij,ij->j", R, R))
    defective = np.zeros(len(z), dtype=bool)
    clusters = _clusters(z, defect_tol)
    for group in clusters:
        if len(group) == 1:
            i = group[0]
            s = np.sqrt(R[:, i] @ R[:, i])
            if abs(s) ** 2 > _GRAM_TOL:
                R[:, i] = _fix_sign(R[:, i] / s)
            else:
                defective[i] = True
            continue
        Rc = R[:, group]
        G = Rc.T @ Rc
        if np.linalg.svd(G, compute_uv=False).min() > _GRAM_TOL:
            offdiag = np.abs(G - np.diag(np.diag(G))).max()
            if offdiag < 1e-10:
                Rc = Rc / np.sqrt(np.diag(G))
            else:
                # exact degeneracy: any basis of the eigenspace is valid, pick a biorthogonal one
                Rc = Rc @ np.linalg.inv(sla.sqrtm(G))
                z[group] = np.einsum("ij,ik,kj->j", Rc, H, Rc)
            for col, i in enumerate(group):
                R[:, i] = _fix_sign(Rc[:, col])
        else:
            defective[group] = True
            for i in group:
                big = np.argmax(np.abs(R[:, i]))
                R[:, i] *= np.exp(-1j * np.angle(R[big, i]))
    return PoleSet(z, R, defective, self_orth, E, mode, tuple(tuple(g) for g in clusters))
