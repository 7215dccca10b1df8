import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbsmatrix.analytic import TwoSiteDotParams, dot2_double_pole_residual
from tbsmatrix.coupling import chain_system, dot2_system
from tbsmatrix.errors import InvalidArgumentError
from tbsmatrix.heff import build_heff
from tbsmatrix.spectra import box_eigensystem
from tbsmatrix.tracker import (
    classify_crossing,
    coupling_path,
    energy_path,
    find_double_pole,
    matched_distance,
    trace_poles,
    trapping_report,
)


@given(st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=6), st.randoms())
@settings(max_examples=50, deadline=None)
def test_matched_distance_ignores_order(z, rnd):
    shuffled = list(z)
    rnd.shuffle(shuffled)
    assert matched_distance(z, shuffled) == 0.0


def test_matched_distance_size_mismatch():
    assert matched_distance([1, 2j], [2j + 0.1, 1]) == pytest.approx(0.1)
    with pytest.raises(InvalidArgumentError):
        matched_distance([1], [1, 2])


def test_coupling_sweep_conserves_trace_and_starts_real():
    N, E = 5, 1.0
    path = [(v, 0.05) for v in np.linspace(0.0, 2.0, 81)]
    traj = trace_poles(coupling_path(lambda a, b: chain_system(N, a, b), E), path)
    assert traj.trace_defect < 1e-10
    assert np.abs(traj.branches[0].imag).max() < 0.01
    assert np.all(traj.widths > -1e-12)
    assert matched_distance(traj.branches[0].real, box_eigensystem(N).energies) < 0.01
    # permutations map the eigensolver's sorted output onto branches
    assert all(sorted(p) == list(range(N)) for p in traj.permutations)


def test_symmetric_two_level_trapping():
    path = [(v, v) for v in np.linspace(0.0, 4.0, 161)]
    traj = trace_poles(coupling_path(lambda a, b: chain_system(2, a, b), 0.0), path)
    report = trapping_report(traj, reference_index=40)
    assert report.n_broad == 2 and report.n_trapped == 0


def test_five_level_single_lead_trapping():
    path = [(v, 0.05) for v in np.linspace(0.0, 4.0, 161)]
    traj = trace_poles(coupling_path(lambda a, b: chain_system(5, a, b), 1.0), path)
    report = trapping_report(traj, reference_index=40)
    assert report.n_broad == 1
    assert report.count_above(10.0) == 1
    assert report.ratio.shape == (5,)


def test_single_path_point():
    traj = trace_poles(energy_path(chain_system(3, 0.5, 0.5)), [0.2])
    assert traj.branches.shape == (1, 3)
    with pytest.raises(InvalidArgumentError):
        trace_poles(energy_path(chain_system(3, 0.5, 0.5)), [])


def test_crossing_classification():
    def run(m):
        sys = dot2_system("A", np.sqrt(2 * m + 0.25), 0.5)
        return classify_crossing(trace_poles(energy_path(sys), np.linspace(-1.5, 1.5, 301)))

    assert run(1.03) == "crossing"
    assert run(0.97) == "avoided"


def test_double_pole_in_two_site_dot():
    def h(E, vL):
        return build_heff(dot2_system("A", vL, 0.5), E)

    found = find_double_pole(
        h, ((-0.3, 0.3), (1.2, 1.8)), grid=11,
        analytic_residual=lambda E, vL: dot2_double_pole_residual(TwoSiteDotParams(vL, 0.5), E),
    )
    assert len(found) == 1
    cert = found[0]
    assert cert.certified
    assert cert.params == pytest.approx((0.0, 1.5), abs=1e-6)
    assert cert.analytic_residual < 1e-6
    assert cert.z == pytest.approx(-1.25j, abs=1e-6)


def test_no_double_pole_in_generic_chain():
    found = find_double_pole(lambda E, v: build_heff(chain_system(3, v, 0.7), E), ((-1.0, 1.0), (0.2, 1.0)), grid=9)
    assert found == []
    with pytest.raises(InvalidArgumentError):
        find_double_pole(lambda E, v: np.eye(2), ((1.0, 0.0), (0.0, 1.0)))


def test_gapped_pair_is_avoided_and_skew_pair_crosses():
    gapped = trace_poles(lambda t: np.array([[t, 0.2], [0.2, -t]]), np.linspace(-1, 1, 41))
    assert classify_crossing(gapped) == "avoided"
    assert gapped.flags == ()
    # complex levels pass each other in Re z without meeting
    skew = trace_poles(lambda t: np.diag([t - 0.3j, -t - 0.1j]), np.linspace(-1, 1, 41))
    assert classify_crossing(skew) == "crossing"
    assert np.allclose(skew.branches[:, 0].imag, skew.branches[0, 0].imag)
