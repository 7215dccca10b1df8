"""Multichannel S-matrix, transmission, conductance and interior wavefunction.

Two phase conventions are carried side by side:

``S_standing``
    delta - 2 pi i V^T (E - H_eff)^{-1} V with flux-normalized couplings
    V = W sqrt(sin k / pi). This is the channel basis of the delta-normalized
    standing-wave lead states sin k(1 - j) / sqrt(pi sin k). The two-site dot
    closed forms in ``analytic`` are written in it.
``S`` (lattice)
    Plane-wave amplitudes with every lead wave measured from the absolute
    lattice coordinate of its channel's ``origin``: incoming e^{ikx} in the
    left lead, outgoing t e^{ikx} to the right, etc. This is the convention of
    the chain closed form and of the wave-matching oracle. The two are related
    by S = -D S_standing D with D_c = e^{i k_c (1 - origin_c)}.

Transmission probabilities, conductance, unitarity and reciprocity are the
same in both.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .coupling import OpenSystem, flux_normalized
from .errors import DefectivePoleError, InvalidArgumentError, NoOpenChannelError, SingularResolventError
from .heff import Mode, PoleSet, build_heff, eigensystem
from .spectra import Channel

__all__ = [
    "SMatrixResult",
    "InteriorWavefunction",
    "SweepRow",
    "smatrix",
    "smatrix_pole_expansion",
    "transmission_pole_expansion",
    "conductance_sweep",
    "interior_wavefunction",
    "BAND_EDGE_GUARD",
]

BAND_EDGE_GUARD = 1e-6


@dataclass(frozen=True)
class SMatrixResult:
    E: float
    S: np.ndarray
    S_standing: np.ndarray
    channels: tuple[Channel, ...]
    k: np.ndarray  # real wavenumbers of the open channels
    mode: Mode

    def _block(self, S: np.ndarray, out_lead: int, in_lead: int) -> np.ndarray:
        ids = self.lead_ids
        if len(ids) < 2:
            raise InvalidArgumentError("transmission needs at least two leads")
        rows = [i for i, c in enumerate(self.channels) if c.lead_id == ids[out_lead]]
        cols = [i for i, c in enumerate(self.channels) if c.lead_id == ids[in_lead]]
        return S[np.ix_(rows, cols)]

    @property
    def lead_ids(self) -> tuple[str, ...]:
        out: list[str] = []
        for c in self.channels:
            if c.lead_id not in out:
                out.append(c.lead_id)
        return tuple(out)

    @property
    def t(self) -> np.ndarray:
        """First lead -> second lead, lattice convention (rows: outgoing channel)."""
        return self._block(self.S, 1, 0)

    @property
    def t_prime(self) -> np.ndarray:
        return self._block(self.S, 0, 1)

    @property
    def r(self) -> np.ndarray:
        return self._block(self.S, 0, 0)

    @property
    def r_prime(self) -> np.ndarray:
        return self._block(self.S, 1, 1)

    @property
    def t_standing(self) -> np.ndarray:
        return self._block(self.S_standing, 1, 0)

    @property
    def conductance(self) -> float:
        """Landauer sum over channel pairs, sum |t_pp'|^2 (units of the conductance quantum)."""
        if len(self.lead_ids) < 2:
            return 0.0
        return float(np.sum(np.abs(self.t) ** 2))

    @property
    def unitarity_defect(self) -> float:
        K = self.S.shape[0]
        return float(np.abs(self.S @ self.S.conj().T - np.eye(K)).max())

    @property
    def reciprocity_defect(self) -> float:
        return float(np.abs(self.S - self.S.T).max())


def _lattice_phases(channels: Sequence[Channel], k: np.ndarray) -> np.ndarray:
    origins = np.array([c.origin for c in channels], dtype=float)
    return np.exp(1j * k * (1.0 - origins))


def _open_parts(system: OpenSystem, E: float):
    w = E - system.coupling.thresholds
    is_open = np.abs(w) < 2.0
    if not is_open.any():
        raise NoOpenChannelError(f"no open channel at E={E!r}")
    k = np.arccos(-0.5 * w[is_open])
    V = flux_normalized(system.coupling, E)
    channels = tuple(ch for ch, o in zip(system.channels, is_open) if o)
    return is_open, k, V, channels


def _assemble(E, S_std, channels, k, mode) -> SMatrixResult:
    D = _lattice_phases(channels, k)
    S = -(D[:, None] * S_std * D[None, :])
    return SMatrixResult(float(E), S, S_std, channels, k, mode)


def _resolvent_solve(Q: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Q^{-1} rhs. At a bound state in the continuum (a real pole whose
    eigenvector has no overlap with any channel) Q is singular, but rhs lies
    in its range and S does not depend on the null component; the
    least-squares solution is used there."""
    if Q.shape[0] == 0:
        return np.zeros_like(rhs, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(Q, check_finite=True)
    scale = max(1.0, np.abs(Q).max())
    if np.abs(np.diag(lu)).min() > 1e3 * np.finfo(float).eps * scale:
        return sla.lu_solve((lu, piv), rhs)
    X = sla.lstsq(Q, rhs)[0]
    if np.abs(Q @ X - rhs).max() > 1e-10 * max(1.0, np.abs(rhs).max()):
        raise SingularResolventError("E - H_eff is singular and the source couples to its null space")
    return X


def smatrix(E: float, system: OpenSystem, mode: Mode | str = Mode.ALL) -> SMatrixResult:
    """S-matrix over the channels open at E, by inverting Q = E - H_eff."""
    mode = Mode.parse(mode)
    heff = build_heff(system, E, mode)
    _, k, V, channels = _open_parts(system, E)
    Q = E * np.eye(system.N) - heff.H
    X = _resolvent_solve(Q, V.astype(complex))
    S_std = np.eye(len(channels)) - 2j * np.pi * (V.T @ X)
    return _assemble(E, S_std, channels, k, mode)


def smatrix_pole_expansion(
    E: float, system: OpenSystem, poles: PoleSet | None = None, mode: Mode | str = Mode.ALL
) -> SMatrixResult:
    """S-matrix from the biorthogonal eigenbasis of H_eff(E):

        S_standing = 1 - 2 pi i sum_lambda (V^T r_lambda)(r_lambda^T V) / (E - z_lambda)

    Refuses defective pole sets; the resolvent path in ``smatrix`` stays exact
    at double poles.
    """
    mode = Mode.parse(mode)
    if poles is None:
        poles = eigensystem(build_heff(system, E, mode))
    elif poles.E is not None and (poles.E != E or poles.mode != mode):
        raise InvalidArgumentError(
            f"pole set was computed at E={poles.E}, mode={poles.mode}; H_eff depends on E"
        )
    if poles.any_defective:
        raise DefectivePoleError("pole set contains a double pole; use smatrix() instead")
    _, k, V, channels = _open_parts(system, E)
    A = poles.right.T @ V  # (lambda|V|c)
    S_std = np.eye(len(channels)) - 2j * np.pi * (A.T / (E - poles.poles)) @ A
    return _assemble(E, S_std, channels, k, mode)


def transmission_pole_expansion(
    E: float,
    system: OpenSystem,
    poles: PoleSet | None = None,
    mode: Mode | str = Mode.ALL,
    convention: str = "lattice",
) -> np.ndarray:
    """Transmission block t (first lead -> second lead) from the pole sum."""
    res = smatrix_pole_expansion(E, system, poles, mode)
    if convention == "lattice":
        return res.t
    if convention == "standing":
        return res.t_standing
    raise InvalidArgumentError(f"unknown convention {convention!r}")


# ----------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    E: float
    k: float
    conductance: float
    T: np.ndarray  # per incoming channel of the first lead: sum_p' |t_p'p|^2
    arg_t: np.ndarray  # arg of the diagonal t_pp (nan when absent)
    n_open: int
    flag: str  # "", "no-open-channel", "band-edge"


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TBSMATRIX_THREADS", "1")))
    except ValueError:
        return 1


def _sweep_point(E: float, system: OpenSystem, mode: Mode, first_lead: list[int]) -> SweepRow:
    n_in = len(first_lead)
    nan = np.full(n_in, np.nan)
    w = E - system.coupling.thresholds
    is_open = np.abs(w) < 2.0
    n_open = int(is_open.sum())
    if n_open == 0 or (mode is not Mode.ALL and not is_open.any()):
        return SweepRow(E, float("nan"), 0.0, np.zeros(n_in), nan, 0, "no-open-channel")
    sin_open = np.sqrt(1.0 - 0.25 * w[is_open] ** 2)
    k0 = float(np.arccos(-0.5 * w[is_open][0]))
    if sin_open.min() < BAND_EDGE_GUARD:
        return SweepRow(E, k0, float("nan"), nan, nan, n_open, "band-edge")
    res = smatrix(E, system, mode)
    T = np.zeros(n_in)
    arg = nan.copy()
    if len(res.lead_ids) >= 2:
        ids = res.lead_ids
        open_index = {id(c): i for i, c in enumerate(res.channels)}
        out_rows = [i for i, c in enumerate(res.channels) if c.lead_id == ids[1]]
        for slot, ch_idx in enumerate(first_lead):
            ch = system.channels[ch_idx]
            if id(ch) not in open_index:
                continue
            col = open_index[id(ch)]
            T[slot] = float(np.sum(np.abs(res.S[out_rows, col]) ** 2))
            same_p = [i for i in out_rows if res.channels[i].p == ch.p]
            if same_p:
                arg[slot] = float(np.angle(res.S[same_p[0], col]))
    return SweepRow(E, k0, res.conductance, T, arg, n_open, "")


def conductance_sweep(
    energies: Sequence[float], system: OpenSystem, mode: Mode | str = Mode.ALL
) -> list[SweepRow]:
    """Conductance table over an energy grid, in grid order.

    Points with no open channel report conductance 0 and flag
    ``no-open-channel``; points within BAND_EDGE_GUARD of a channel edge are
    reported with flag ``band-edge`` and NaN values instead of being dropped.
    Set TBSMATRIX_THREADS to evaluate points in parallel (order is preserved).
    """
    energies = [float(e) for e in energies]
    if not energies:
        raise InvalidArgumentError("energy grid is empty")
    mode = Mode.parse(mode)
    lead0 = system.coupling.lead_ids[0]
    first_lead = [i for i, c in enumerate(system.channels) if c.lead_id == lead0]

    def point(E):
        return _sweep_point(E, system, mode, first_lead)

    threads = _thread_count()
    if threads == 1:
        return [point(E) for E in energies]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(point, energies))


# ----------------------------------------------------------------------------
# interior wavefunction


@dataclass(frozen=True)
class InteriorWavefunction:
    """Billiard part of the scattering state, normalized to delta-normalized lead states.

    ``f_b`` expands it over closed-billiard states, ``f_lambda`` over the
    right eigenvectors of H_eff (None when the pole set is defective).
    ``sites`` / ``sites_from_poles`` sample both expansions on the lattice
    when the system carries a basis.
    """

    E: float
    f_b: np.ndarray
    f_lambda: np.ndarray | None
    poles: PoleSet = field(repr=False)
    sites: np.ndarray | None = None
    sites_from_poles: np.ndarray | None = None

    @property
    def pole_weights(self) -> np.ndarray | None:
        if self.f_lambda is None:
            return None
        p = np.abs(self.f_lambda) ** 2
        return p / p.sum() if p.sum() > 0 else p


def interior_wavefunction(
    E: float,
    system: OpenSystem,
    incident: int | None = None,
    mode: Mode | str = Mode.ALL,
) -> InteriorWavefunction:
    """psi_B = Q^{-1} V |in>.

    ``incident`` is an index into the channels open at E; ``None`` feeds every
    open channel at once (the sum over C, p_C of the closed-billiard expansion).
    """
    mode = Mode.parse(mode)
    heff = build_heff(system, E, mode)
    _, _, V, channels = _open_parts(system, E)
    if incident is None:
        source = V.sum(axis=1)
    else:
        if not 0 <= incident < len(channels):
            raise InvalidArgumentError(f"incident channel {incident} is not open at E={E}")
        source = V[:, incident]
    Q = E * np.eye(system.N) - heff.H
    f_b = _resolvent_solve(Q, source.astype(complex))
    poles = eigensystem(heff)
    f_lambda = None
    if not poles.any_defective:
        f_lambda = (poles.right.T @ source) / (E - poles.poles)
    sites = sites_poles = None
    if system.basis is not None:
        sites = system.basis @ f_b
        if f_lambda is not None:
            sites_poles = system.basis @ (poles.right @ f_lambda)
    return InteriorWavefunction(float(E), f_b, f_lambda, poles, sites, sites_poles)
