import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbsmatrix.analytic import chain_rt
from tbsmatrix.errors import BandEdgeError, InvalidArgumentError
from tbsmatrix.oracle import (
    Billiard,
    face_lead,
    oracle_pole_scan,
    point_lead,
    rect_billiard,
    side_lead,
    solve_chain_1d,
    solve_lattice,
    solve_lattice_2d,
)
from tbsmatrix.spectra import box_eigensystem, phase_factor, rect_eigensystem
from tbsmatrix.tracker import matched_distance

ks = st.floats(0.05, np.pi - 0.05)
vs = st.floats(0.1, 3.0)


@given(st.integers(1, 10), vs, vs, ks)
@settings(max_examples=80, deadline=None)
def test_chain_flux_and_residual(N, vL, vR, k):
    sol = solve_chain_1d(N, vL, vR, k)
    assert abs(sol.r) ** 2 + abs(sol.t) ** 2 == pytest.approx(1.0, abs=1e-9)
    assert sol.residual < 1e-9


@pytest.mark.parametrize("N,vL,vR,k", [(1, 0.5, 0.7, 1.1), (3, 0.4, 1.3, 0.7), (4, 2.0, 0.3, 2.5)])
def test_chain_interior_amplitudes_closed_form(N, vL, vR, k):
    sol = solve_chain_1d(N, vL, vR, k)
    amp = chain_rt(N, vL, vR, k)
    e2 = np.exp(-2j * k)
    assert sol.t == pytest.approx(amp.t, abs=1e-12)
    assert sol.r == pytest.approx(amp.r, abs=1e-12)
    assert sol.a == pytest.approx(sol.t * (vR - e2 / vR) / (1 - e2), abs=1e-12)
    assert sol.b == pytest.approx(sol.t * (1 / vR - vR) * np.exp(2j * k * N) / (1 - e2), abs=1e-12)


def test_chain_rejects_band_edge():
    with pytest.raises(BandEdgeError):
        solve_chain_1d(3, 1.0, 1.0, np.pi)
    with pytest.raises(InvalidArgumentError):
        solve_chain_1d(0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("k", [0.6, 1.9])
def test_single_row_grid_reduces_to_chain(k):
    E = -2 * np.cos(k)
    sol = solve_lattice_2d(5, 1, [("left", 0, 2, 0.7), ("right", 0, 2, 1.2)], E)
    amp = chain_rt(5, 0.7, 1.2, k)
    assert sol.block("R", "L")[0, 0] == pytest.approx(amp.t, abs=1e-12)
    assert sol.block("L", "L")[0, 0] == pytest.approx(amp.r, abs=1e-12)


def test_full_width_leads_separate_by_mode():
    # full-width leads conserve the transverse mode, and each mode is a 1D chain
    Nx, Ny, v, E = 4, 3, 0.8, -0.5
    sol = solve_lattice_2d(Nx, Ny, [("left", 0, Ny + 1, v), ("right", 0, Ny + 1, v)], E)
    t = sol.block("R", "L")
    off = t - np.diag(np.diag(t))
    assert np.abs(off).max() < 1e-12
    for p, eps in enumerate(box_eigensystem(Ny).energies):
        if abs(E - eps) < 2:
            k = np.arccos(-(E - eps) / 2)
            assert abs(t[p, p]) == pytest.approx(abs(chain_rt(Nx, v, v, k).t), abs=1e-12)


def test_partial_leads_unitary_and_reciprocal():
    sol = solve_lattice_2d(6, 6, [("left", 0, 4, 1.0), ("right", 2, 7, 0.9)], -0.7)
    assert sol.unitarity_defect < 1e-12
    assert sol.reciprocity_defect < 1e-12
    assert sol.residual < 1e-10
    assert sol.S.shape == (len(sol.channels),) * 2


def test_masked_billiard():
    mask = np.ones((5, 4), bool)
    mask[2, 1:3] = False
    b = Billiard(mask)
    assert b.n_sites == 18
    with pytest.raises(InvalidArgumentError):
        b.index(3, 2)
    sol = solve_lattice(b, [side_lead(b, "left", 0, 5, 1.0), side_lead(b, "right", 0, 5, 1.0)], 0.3)
    assert sol.unitarity_defect < 1e-12


def test_face_lead_on_slab():
    b = rect_billiard(2, 3, 2)
    sol = solve_lattice(b, [face_lead(b, 2, 1.1)], 0.4)
    assert sol.unitarity_defect < 1e-12
    assert len(sol.channels) == int(np.sum(np.abs(0.4 - rect_eigensystem(2, 3).energies) < 2))


def test_pole_scan_uncoupled_gives_levels():
    b = rect_billiard(4)
    poles = oracle_pole_scan(b, [point_lead("L", 0, 0.0), point_lead("R", 3, 0.0)], (-2.5, 2.5, -0.5, 0.5), density=60, energy=0.0)
    assert matched_distance([p.z for p in poles], box_eigensystem(4).energies) < 1e-9


def test_pole_scan_single_site():
    b = rect_billiard(1)
    poles = oracle_pole_scan(b, [point_lead("L", 0, 0.5), point_lead("R", 0, 0.5)], (-1, 1, -1.5, 0.2), density=40)
    assert len(poles) == 1
    assert poles[0].z == pytest.approx(-1j / np.sqrt(2), abs=1e-10)


def test_fixed_energy_scan_matches_site_eigenvalues():
    b = rect_billiard(3, 3)
    leads = [side_lead(b, "left", 0, 4, 0.7), side_lead(b, "right", 1, 3, 0.9)]
    E = 0.35
    poles = oracle_pole_scan(b, leads, (-4.5, 4.5, -3.0, 0.5), density=40, energy=E)
    H = b.hamiltonian().astype(complex)
    for lead in leads:
        for p, eps in enumerate(lead.thresholds):
            x = phase_factor(E - eps)
            u = np.zeros(b.n_sites)
            u[lead.sites] = lead.phi[:, p]
            H -= lead.v**2 * np.outer(u, u) * x
    assert matched_distance([p.z for p in poles], np.linalg.eigvals(H)) < 1e-8
    assert max(p.residual for p in poles) < 1e-7
