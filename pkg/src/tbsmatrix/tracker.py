"""Pole trajectories along parameter paths, trapping diagnostics and double-pole search."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .coupling import OpenSystem
from .errors import InvalidArgumentError
from .heff import EffectiveHamiltonian, Mode, build_heff, eigensystem

__all__ = [
    "PoleTrajectory",
    "TrappingReport",
    "DoublePoleCertificate",
    "trace_poles",
    "coupling_path",
    "energy_path",
    "trapping_report",
    "find_double_pole",
    "classify_crossing",
    "matched_distance",
]

Hamiltonian = Callable[[tuple], "np.ndarray | EffectiveHamiltonian"]


def _matrix(h) -> np.ndarray:
    return h.H if isinstance(h, EffectiveHamiltonian) else np.asarray(h, dtype=complex)


@dataclass(frozen=True)
class PoleTrajectory:
    """Poles followed continuously along a path.

    ``branches[s, i]`` is branch i at path point s. ``permutations[s]`` maps
    the eigensolver's sorted output at point s onto branches. ``flags`` holds
    (step, message) for steps where continuity could not be guaranteed; for
    ambiguous steps ``alternatives`` records the greedy assignment that the
    optimal one overrode.
    """

    params: tuple[tuple[float, ...], ...]
    branches: np.ndarray
    permutations: tuple[np.ndarray, ...]
    traces: np.ndarray
    flags: tuple[tuple[int, str], ...] = ()
    alternatives: dict = field(default_factory=dict, repr=False)

    @property
    def n_branches(self) -> int:
        return self.branches.shape[1]

    @property
    def widths(self) -> np.ndarray:
        return -2.0 * self.branches.imag

    @property
    def trace_defect(self) -> float:
        return float(np.abs(self.branches.sum(axis=1) - self.traces).max())


def matched_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest |a_i - b_pi(i)| under the pairing pi that minimizes the total distance."""
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"pole sets differ in size: {len(a)} vs {len(b)}")
    cost = np.abs(a[:, None] - b[None, :])
    row, col = linear_sum_assignment(cost)
    return float(cost[row, col].max()) if len(a) else 0.0


def _greedy(cost: np.ndarray) -> np.ndarray:
    n = cost.shape[0]
    out = -np.ones(n, dtype=int)
    taken = np.zeros(n, dtype=bool)
    for flat in np.argsort(cost, axis=None):
        i, j = divmod(int(flat), n)
        if out[i] < 0 and not taken[j]:
            out[i], taken[j] = j, True
    return out


def _assign(prev: np.ndarray, new: np.ndarray):
    cost = np.abs(prev[:, None] - new[None, :])
    _, col = linear_sum_assignment(cost)
    greedy = _greedy(cost)
    return col, (None if np.array_equal(greedy, col) else greedy)


def _suspicious(prev: np.ndarray, new: np.ndarray) -> bool:
    """Continuity guard: some branch jumps far more than the typical one and by a
    sizeable fraction of its distance to the nearest other pole."""
    disp = np.abs(new - prev)
    med = np.median(disp)
    if len(prev) < 2:
        return False
    sep = np.abs(prev[:, None] - prev[None, :])
    np.fill_diagonal(sep, np.inf)
    nearest = sep.min(axis=1)
    return bool(np.any((disp > 10.0 * med + 1e-12) & (disp > 0.25 * nearest)))


def trace_poles(
    hamiltonian: Hamiltonian,
    path: Sequence[float | Sequence[float]],
    max_halvings: int = 10,
) -> PoleTrajectory:
    """Eigenvalues of hamiltonian(p) along ``path``, matched step to step.

    Matching is the minimal-total-distance assignment. When the continuity
    guard fires, the step is split in halves (linear interpolation of the
    parameters) up to ``max_halvings`` times before the step is flagged.
    """
    pts = [tuple(np.atleast_1d(np.asarray(p, dtype=float))) for p in path]
    if len(pts) < 1:
        raise InvalidArgumentError("path is empty")

    def evaluate(p):
        H = _matrix(hamiltonian(p if len(p) > 1 else p[0]))
        z = np.linalg.eigvals(H)
        z = z[np.lexsort((z.imag, z.real))]
        return z, complex(np.trace(H))

    z0, tr0 = evaluate(pts[0])
    branches = [z0]
    traces = [tr0]
    perms = [np.arange(len(z0))]
    flags: list[tuple[int, str]] = []
    alternatives: dict[int, np.ndarray] = {}

    def advance(prev, a, b, depth):
        """Follow branches from a (poles prev) to b; returns (matched, col, ok, greedy_alt)."""
        znew, _ = evaluate(b)
        col, alt = _assign(prev, znew)
        matched = znew[col]
        if not _suspicious(prev, matched):
            return matched, col, True, alt
        if depth >= max_halvings:
            return matched, col, False, alt
        mid = tuple(0.5 * (np.asarray(a) + np.asarray(b)))
        zmid, _, ok1, _ = advance(prev, a, mid, depth + 1)
        zend, _, ok2, alt2 = advance(zmid, mid, b, depth + 1)
        col = np.array([int(np.argmin(np.abs(znew - z))) for z in zend])
        return zend, col, ok1 and ok2, alt2

    for s in range(1, len(pts)):
        matched, col, ok, alt = advance(branches[-1], pts[s - 1], pts[s], 0)
        _, tr = evaluate(pts[s])
        if not ok:
            flags.append((s, "continuity guard still violated after step halving; possible branch swap"))
        if alt is not None:
            alternatives[s] = alt
            flags.append((s, "greedy and optimal matching disagree; optimal kept"))
        branches.append(matched)
        traces.append(tr)
        perms.append(col)
    return PoleTrajectory(
        tuple(pts), np.array(branches), tuple(perms), np.array(traces), tuple(flags), alternatives
    )


def coupling_path(builder: Callable[[float, float], OpenSystem], E: float, mode: Mode | str = Mode.ALL):
    """Hamiltonian callable over (v_L, v_R) at fixed energy, for ``trace_poles``."""

    def h(p):
        v_L, v_R = p
        return build_heff(builder(v_L, v_R), E, mode)

    return h


def energy_path(system: OpenSystem, mode: Mode | str = Mode.ALL):
    """Hamiltonian callable over E at fixed couplings, for ``trace_poles``."""
    return lambda E: build_heff(system, float(np.atleast_1d(E)[0]), mode)


# ----------------------------------------------------------------------------
# trapping


@dataclass(frozen=True)
class TrappingReport:
    widths_end: np.ndarray
    widths_ref: np.ndarray
    re_end: np.ndarray
    broad: np.ndarray  # width at the end exceeds the reference width
    band_exit: np.ndarray  # Re z at the end outside [-2, 2]

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.widths_end / self.widths_ref

    @property
    def n_broad(self) -> int:
        return int(self.broad.sum())

    @property
    def n_trapped(self) -> int:
        return int((~self.broad).sum())

    def count_above(self, factor: float) -> int:
        return int(np.sum(self.widths_end > factor * self.widths_ref))


def trapping_report(traj: PoleTrajectory, reference_index: int) -> TrappingReport:
    """Compare each branch's width at the end of the path with its width at ``reference_index``."""
    w = traj.widths
    end = traj.branches[-1]
    return TrappingReport(
        widths_end=w[-1],
        widths_ref=w[reference_index],
        re_end=end.real,
        broad=w[-1] > w[reference_index],
        band_exit=np.abs(end.real) > 2.0,
    )


# ----------------------------------------------------------------------------
# double poles


@dataclass(frozen=True)
class DoublePoleCertificate:
    params: tuple[float, float]
    z: complex
    gap: float
    self_orthogonality: float
    analytic_residual: float | None
    certified: bool


def _min_gap(H: np.ndarray) -> tuple[float, int, int, np.ndarray]:
    z = np.linalg.eigvals(H)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return float(d[i, j]), int(i), int(j), z


def find_double_pole(
    hamiltonian: Callable[[float, float], "np.ndarray | EffectiveHamiltonian"],
    box: tuple[tuple[float, float], tuple[float, float]],
    grid: int = 21,
    analytic_residual: Callable[[float, float], float] | None = None,
    gap_tol: float = 1e-6,
    orth_tol: float = 1e-4,
    sweeps: int = 60,
) -> list[DoublePoleCertificate]:
    """Search a 2-parameter box for coalescing eigenvalue pairs.

    The squared gap behaves like |p - p*| near a coalescence (a cone, not a
    smooth minimum), so each coarse-grid minimum is refined by alternating
    bounded 1D minimizations along the two axes. Only refined points with
    gap < gap_tol and eigenvector self-orthogonality < orth_tol are returned;
    an empty list means nothing was found.
    """
    (a0, a1), (b0, b1) = box
    if not (a0 < a1 and b0 < b1):
        raise InvalidArgumentError(f"empty search box {box}")

    def gap2(a, b):
        return _min_gap(_matrix(hamiltonian(a, b)))[0] ** 2

    A = np.linspace(a0, a1, grid)
    B = np.linspace(b0, b1, grid)
    G = np.array([[gap2(a, b) for b in B] for a in A])
    pad = np.pad(G, 1, constant_values=np.inf)
    seeds = []
    for i in range(grid):
        for j in range(grid):
            if G[i, j] <= pad[i : i + 3, j : j + 3].min():
                seeds.append((i, j))
    da, db = A[1] - A[0], B[1] - B[0]
    found: list[DoublePoleCertificate] = []
    for i, j in seeds:
        a, b = A[i], B[j]
        lo_a, hi_a = max(a0, a - da), min(a1, a + da)
        lo_b, hi_b = max(b0, b - db), min(b1, b + db)
        best = G[i, j]
        for _ in range(sweeps):
            # search offsets from the current point: Brent's tolerance has a
            # sqrt(eps)*|x| floor, which would stall on the cone tip otherwise
            ra = minimize_scalar(lambda t: gap2(a + t, b), bounds=(lo_a - a, hi_a - a),
                                 method="bounded", options={"xatol": 1e-16})
            a = a + ra.x
            rb = minimize_scalar(lambda t: gap2(a, b + t), bounds=(lo_b - b, hi_b - b),
                                 method="bounded", options={"xatol": 1e-16})
            b = b + rb.x
            improved = best - rb.fun
            best = rb.fun
            wa = max(4.0 * abs(ra.x), 1e-14 * (1 + abs(a)))
            wb = max(4.0 * abs(rb.x), 1e-14 * (1 + abs(b)))
            lo_a, hi_a = max(a0, a - wa), min(a1, a + wa)
            lo_b, hi_b = max(b0, b - wb), min(b1, b + wb)
            if best < 1e-28 or (0 <= improved < 1e-30):
                break
        H = _matrix(hamiltonian(a, b))
        gap, p, q, z = _min_gap(H)
        poles = eigensystem(H)
        k = int(np.argmin(np.abs(poles.poles - 0.5 * (z[p] + z[q]))))
        orth = float(poles.self_orthogonality[k])
        res = None if analytic_residual is None else float(analytic_residual(a, b))
        if gap < gap_tol and orth < orth_tol:
            if any(abs(c.params[0] - a) < 1e-6 and abs(c.params[1] - b) < 1e-6 for c in found):
                continue
            found.append(
                DoublePoleCertificate((float(a), float(b)), complex(0.5 * (z[p] + z[q])), gap, orth, res, True)
            )
    return found


def classify_crossing(traj: PoleTrajectory, i: int = 0, j: int = 1) -> str:
    """'crossing' if Re z of branches i and j swap order between path ends, else 'avoided'."""
    d0 = traj.branches[0, i].real - traj.branches[0, j].real
    d1 = traj.branches[-1, i].real - traj.branches[-1, j].real
    return "crossing" if np.sign(d0) != np.sign(d1) else "avoided"
