import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbsmatrix.coupling import LeadSpec, chain_system, dot2_system, rect_system, slab_system
from tbsmatrix.errors import InvalidArgumentError, NoOpenChannelError
from tbsmatrix.heff import (
    Mode,
    build_heff,
    build_heff_1d,
    build_heff_point_contact,
    build_heff_slab3d,
    eigensystem,
)
from tbsmatrix.spectra import box_eigensystem, rect_eigensystem
from tbsmatrix.coupling import coupling_1d

couplings = st.floats(0.0, 3.0)
energies = st.floats(-1.95, 1.95)


def test_chain_matrix_elements():
    N, vL, vR, E = 4, 0.6, 1.4, 0.5
    box = box_eigensystem(N)
    x = -E / 2 + 1j * np.sqrt(1 - E * E / 4)
    H = build_heff_1d(box, coupling_1d(box, vL, vR), E).H
    V = vL**2 * np.outer(box.eigvecs[0], box.eigvecs[0]) + vR**2 * np.outer(box.eigvecs[-1], box.eigvecs[-1])
    assert np.allclose(H, np.diag(box.energies) - V * x, atol=1e-14)


@given(st.integers(1, 8), couplings, couplings, energies)
@settings(max_examples=60, deadline=None)
def test_complex_symmetric_with_psd_width(N, vL, vR, E):
    h = build_heff(chain_system(N, vL, vR), E, Mode.OPEN)
    assert np.abs(h.H - h.H.T).max() < 1e-14
    assert np.linalg.eigvalsh(h.width_matrix).min() > -1e-12
    assert np.allclose(h.radiation_shift + np.diag(h.energies), h.H.real)


@given(st.integers(1, 8), couplings, couplings, energies)
@settings(max_examples=60, deadline=None)
def test_eigensystem_is_biorthonormal_and_reconstructs(N, vL, vR, E):
    h = build_heff(chain_system(N, vL, vR), E)
    poles = eigensystem(h)
    if poles.any_defective:
        return
    R = poles.right
    assert np.abs(R.T @ R - np.eye(N)).max() < 1e-8
    assert np.abs(R @ np.diag(poles.poles) @ R.T - h.H).max() < 1e-8
    assert np.all(poles.widths > -1e-12)
    assert abs(poles.poles.sum() - np.trace(h.H)) < 1e-10


def test_closed_system_poles_are_the_levels():
    poles = eigensystem(build_heff(chain_system(5, 0.0, 0.0), 0.3))
    assert np.allclose(poles.poles, box_eigensystem(5).energies, atol=1e-14)
    assert np.allclose(poles.widths, 0.0)


def test_modes_differ_only_in_closed_channels():
    sys = rect_system(5, 4, [LeadSpec.full_width("left", 4), LeadSpec.full_width("right", 4)])
    E = -2.9  # only the lowest transverse mode is open
    h_all = build_heff(sys, E, "all-channels")
    h_open = build_heff(sys, E, "open-only")
    assert h_open.included.sum() == 2 and h_all.included.sum() == 8
    assert np.allclose(h_all.H.imag, h_open.H.imag)
    assert not np.allclose(h_all.H.real, h_open.H.real)


def test_wide_band_phase():
    sys = chain_system(3, 0.7, 0.7)
    E = 0.4
    h = build_heff(sys, E, Mode.WIDE)
    assert np.allclose(h.phases, -E / 2 + 1j)
    expected = np.diag(sys.energies) - sys.W @ sys.W.T * (-E / 2 + 1j)
    assert np.allclose(h.H, expected)


def test_no_open_channel():
    sys = chain_system(3, 1.0, 1.0)
    with pytest.raises(NoOpenChannelError):
        build_heff(sys, 2.5, Mode.OPEN)
    h = build_heff(sys, 2.5, Mode.ALL)
    assert np.allclose(h.H.imag, 0.0)


def test_mode_parsing():
    assert Mode.parse("open") is Mode.OPEN
    assert Mode.parse("wide-band") is Mode.WIDE
    with pytest.raises(InvalidArgumentError):
        Mode.parse("bogus")


def test_point_contact_same_site_is_rank_one():
    rect = rect_eigensystem(3, 3)
    U = rect.eigvecs()
    j = rect.site_index(1, 2)
    h = build_heff_point_contact(U, rect.energies, j, j, 0.5, 0.8, 0.1)
    sigma = h.H - np.diag(rect.energies)
    assert np.linalg.matrix_rank(sigma, tol=1e-12) == 1
    x = -0.05 + 1j * np.sqrt(1 - 0.0025)
    assert np.allclose(sigma, -(0.25 + 0.64) * np.outer(U[j], U[j]) * x)


def test_slab_blocks():
    h = build_heff_slab3d("b", [0.0, 0.5], 2, 1.0, 0.2)
    H = h.H
    assert np.allclose(H[:2, 2:], 0) and np.allclose(H[2:, :2], 0)
    h1 = build_heff_slab3d("a", [0.0, 0.5, -0.3], 1, 0.6, 0.2)
    assert np.allclose(h1.H, np.diag(np.diag(h1.H)))


def test_symmetric_degeneracy_is_not_defective():
    # a square with symmetric leads has exact degeneracies (m, n) <-> (n, m)
    sys = slab_system("a", 2, 0.8, Nx=3, Ny=3)
    poles = eigensystem(build_heff(sys, 0.5))
    assert not poles.any_defective
    assert np.abs(poles.overlap() - np.eye(len(poles.poles))).max() < 1e-8


def test_double_pole_is_flagged():
    # two-site dot, case A, E = 0 and |mu| = 1: v_L^2 - v_R^2 = 2
    poles = eigensystem(build_heff(dot2_system("A", 1.5, 0.5), 0.0))
    assert poles.defective.all()
    assert poles.self_orthogonality.max() < 1e-6
    assert np.allclose(poles.poles, -1.25j, atol=1e-7)


def test_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        eigensystem(np.array([[np.nan]]))


def test_wide_band_equals_open_at_band_centre():
    sys = chain_system(4, 0.6, 0.9)
    assert np.abs(build_heff(sys, 0.0, Mode.WIDE).H - build_heff(sys, 0.0, Mode.OPEN).H).max() < 1e-15


def test_poles_are_continuous_in_energy():
    from tbsmatrix.tracker import matched_distance

    sys = rect_system(4, 3, [LeadSpec("left", 0, 3, 0.8), LeadSpec("right", 1, 4, 0.6)])
    grid = np.linspace(-1.5, 1.5, 301)
    z = [eigensystem(build_heff(sys, E)).poles for E in grid]
    jumps = [matched_distance(a, b) for a, b in zip(z, z[1:])]
    assert max(jumps) < 20 * (grid[1] - grid[0])
