import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbsmatrix.coupling import (
    CouplingMatrix,
    LeadSpec,
    chain_system,
    coupling_slab3d,
    dot2_system,
    flux_normalized,
    point_contact_system,
    rect_system,
    slab_system,
)
from tbsmatrix.errors import InvalidArgumentError
from tbsmatrix.spectra import box_eigensystem, rect_eigensystem


def test_chain_coupling_entries():
    sys = chain_system(4, 0.3, 1.7)
    box = box_eigensystem(4)
    assert np.allclose(sys.W[:, 0], 0.3 * box.eigvecs[0])
    assert np.allclose(sys.W[:, 1], 1.7 * box.eigvecs[-1])
    assert [c.origin for c in sys.channels] == [0, 5]


def test_full_width_lead_only_couples_matching_transverse_mode():
    Ny = 5
    rect = rect_eigensystem(3, Ny)
    W = rect_system(3, Ny, [LeadSpec.full_width("left", Ny, 1.0)]).W
    for row, (_, n, _) in enumerate(rect.states):
        assert np.flatnonzero(np.abs(W[row]) > 1e-12).tolist() == [n - 1]


def test_channel_order_is_lead_then_mode():
    leads = [LeadSpec("right", 1, 5, 0.5), LeadSpec("left", 0, 4, 1.0)]
    sys = rect_system(4, 6, leads)
    keys = [(c.lead_id, c.p) for c in sys.channels]
    assert keys == sorted(keys)
    assert sys.coupling.K == 3 + 3
    assert sys.coupling.lead_ids == ("L", "R")


@pytest.mark.parametrize("lo,hi", [(3, 3), (-1, 4), (0, 8)])
def test_bad_lead_walls(lo, hi):
    with pytest.raises(InvalidArgumentError):
        rect_system(4, 6, [LeadSpec("left", lo, hi)])


def test_negative_coupling_rejected():
    with pytest.raises(InvalidArgumentError):
        chain_system(3, -0.1, 1.0)


def test_point_contact_same_site_has_parallel_columns():
    sys = point_contact_system(4, 4, (2, 3), (2, 3), 0.4, 0.9)
    a, b = sys.W[:, 0], sys.W[:, 1]
    assert np.allclose(a / 0.4, b / 0.9)


def test_dot2_case_c_couples_both_leads_to_site_one():
    sys = dot2_system("C", 0.5, 2.0)
    psi1 = box_eigensystem(2).eigvecs[0]
    assert np.allclose(sys.W, np.column_stack([0.5 * psi1, 2.0 * psi1]))
    with pytest.raises(InvalidArgumentError):
        dot2_system("D", 1, 1)


@given(st.floats(-1.99, 1.99), st.floats(0.0, 3.0))
@settings(max_examples=50)
def test_flux_normalization_reproduces_the_width(E, v):
    # pi V V^T equals the anti-Hermitian part W W^T sin k of the self-energy
    sys = chain_system(3, v, 0.7)
    V = flux_normalized(sys.coupling, E)
    sin_k = np.sqrt(1 - E * E / 4)
    assert np.allclose(np.pi * V @ V.T, sys.W @ sys.W.T * sin_k, atol=1e-12)


def test_flux_normalized_drops_closed_channels():
    sys = rect_system(3, 4, [LeadSpec.full_width("left", 4)])
    V = flux_normalized(sys.coupling, -3.0)
    th = sys.coupling.thresholds
    assert V.shape[1] == int(np.sum(np.abs(-3.0 - th) < 2))


def test_slab_cases():
    E_b = np.array([-0.5, 0.25])
    energies, cm = coupling_slab3d("b", E_b, 2, 1.2)
    assert np.allclose(energies, [-1.5, 0.5, -0.75, 1.25])
    assert np.allclose(cm.thresholds, E_b)
    # top face of a 2-site z box: psi_nz(2) = (1/sqrt2, -1/sqrt2)
    assert np.allclose(cm.W[:, 0], 1.2 * np.array([1, -1, 0, 0]) / np.sqrt(2))
    energies, cm = coupling_slab3d("a", E_b, 3, 0.5)
    assert cm.K == 2 and np.allclose(cm.thresholds, 0)
    with pytest.raises(InvalidArgumentError):
        coupling_slab3d("c", E_b, 2, 1.0)


def test_slab_on_rectangle_basis_and_site_channels():
    sys = slab_system("a", 2, 0.8, Nx=2, Ny=3)
    assert sys.basis.shape == (12, 12)
    assert sys.coupling.K == 6
    assert np.allclose(sys.basis.T @ sys.basis, np.eye(12), atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        slab_system("b", 2, 1.0)


def test_coupling_matrix_shape_check():
    with pytest.raises(InvalidArgumentError):
        CouplingMatrix(np.zeros((3, 2)), ())


@given(st.integers(1, 12), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=40, deadline=None)
def test_chain_is_the_single_row_rectangle(N, vL, vR):
    chain = chain_system(N, vL, vR)
    rect = rect_system(N, 1, [LeadSpec.full_width("left", 1, vL), LeadSpec.full_width("right", 1, vR)])
    assert np.allclose(chain.energies, rect.energies, atol=1e-14)
    assert np.abs(chain.W - rect.W).max() < 1e-14


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
@settings(max_examples=40, deadline=None)
def test_coupling_scales_linearly_with_v(v, alpha):
    a = rect_system(4, 5, [LeadSpec("left", 0, 4, v), LeadSpec("right", 1, 6, 0.7)])
    b = rect_system(4, 5, [LeadSpec("left", 0, 4, alpha * v), LeadSpec("right", 1, 6, 0.7)])
    left = np.array([c.lead_id == "L" for c in a.channels])
    assert np.allclose(b.W[:, left], alpha * a.W[:, left], rtol=1e-14, atol=0)
    assert np.array_equal(b.W[:, ~left], a.W[:, ~left])
