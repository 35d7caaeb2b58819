import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from ionfock import hamiltonians as hm
from ionfock.errors import AccuracyError
from ionfock.hamiltonians import ChainConfig, PulseSpec
from ionfock.hilbert import BasisKind, StateVector, make_basis
from ionfock.integrator import PropagationSettings, convergence_audit, propagate


def magnus_two_level(Om, d0, window=5.0, steps=20000):
    """Fourth-order commutator-free Magnus for H = [[0, Om sech/2], [., d0 tanh]]."""
    h = 2 * window / steps
    c1, c2 = 0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6
    a1, a2 = 0.25 + math.sqrt(3) / 6, 0.25 - math.sqrt(3) / 6

    def H(t):
        g = 0.5 * Om / math.cosh(t)
        return np.array([[0.0, g], [g, d0 * math.tanh(t)]])

    psi = np.array([1.0, 0.0], complex)
    t = -window
    for _ in range(steps):
        H1, H2 = H(t + c1 * h), H(t + c2 * h)
        psi = expm(-1j * h * (a2 * H1 + a1 * H2)) @ (expm(-1j * h * (a1 * H1 + a2 * H2)) @ psi)
        t += h
    return abs(psi[1]) ** 2


def test_two_level_against_magnus():
    # sideband pass with N = 1 is a two-level crossing with coupling g = Omega/2
    Om, d0 = 3.0, 2.0
    cfg = ChainConfig(1, 1.0, Om / 2)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=d0))
    psi = propagate(H, StateVector.basis_state(H.basis, 0), (-5.0, 5.0)).final
    assert abs(abs(psi.amplitudes[1]) ** 2 - magnus_two_level(Om, d0)) < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 4.0))
def test_static_rabi_oscillation(area, phase):
    basis = make_basis(BasisKind.FULL, 1, 0)
    H = hm.single_ion_rotation(basis, 0, area, phase)
    tr = propagate(H, StateVector.basis_state(basis, "0"), (0.0, 1.0), PropagationSettings(sample_spacing=0.25))
    p1 = np.abs(tr.states[:, basis.index("1")]) ** 2
    assert p1 == pytest.approx(np.sin(area * tr.times / 2) ** 2, abs=1e-9)
    assert tr.max_drift < 1e-8


def test_sampling_grid_does_not_change_result():
    cfg = ChainConfig(3, 0.1, 1.2)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=2.5))
    psi0 = StateVector.basis_state(H.basis, 0)
    coarse = propagate(H, psi0, (-5, 5), PropagationSettings(sample_spacing=1.0))
    fine = propagate(H, psi0, (-5, 5), PropagationSettings(sample_spacing=0.01))
    assert np.allclose(coarse.states[-1], fine.states[-1], atol=1e-9)
    assert coarse.times[0] == -5 and coarse.times[-1] == 5
    assert len(fine.times) == 1001


def test_zero_length_span():
    cfg = ChainConfig(2, 0.1, 1.0)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=1.0))
    tr = propagate(H, StateVector.basis_state(H.basis, 1), (0.0, 0.0))
    assert tr.final.amplitudes[1] == 1


def test_drift_guard():
    cfg = ChainConfig(3, 0.1, 4.0)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=2.5))
    loose = PropagationSettings(rtol=1e-2, atol=1e-2, drift_limit=1e-14)
    with pytest.raises(AccuracyError):
        propagate(H, StateVector.basis_state(H.basis, 0), (-5, 5), loose)


def test_basis_mismatch():
    cfg = ChainConfig(2, 0.1, 1.0)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=1.0))
    with pytest.raises(ValueError):
        propagate(H, StateVector.basis_state(make_basis("LADDER", 3), 0), (0, 1))


def test_trajectory_csv(tmp_path):
    cfg = ChainConfig(2, 0.1, 1.0)
    H = hm.ladder_hamiltonian(cfg, PulseSpec(delta0T=1.0, window=1.0))
    tr = propagate(H, StateVector.basis_state(H.basis, 0), (-1, 1), PropagationSettings(sample_spacing=0.5))
    tr.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["tau", "P_n0", "P_n1", "P_n2", "norm_drift"]
    assert len(rows) == 6
    assert sum(float(x) for x in rows[-1][1:4]) == pytest.approx(1.0, abs=1e-9)


def test_audit_ladder_reports_zero_truncation_shifts():
    cfg = ChainConfig(2, 0.1, 3.0)
    rep = convergence_audit(cfg, PulseSpec(delta0T=3.0, window=12.0))
    assert rep.shifts["cutoff"] == 0.0 and rep.shifts["buffer"] == 0.0
    assert rep.converged
    assert set(rep.to_dict()) >= {"baseline_fidelity", "shifts", "flagged", "converged"}


def test_audit_flags_starved_cutoff():
    cfg = ChainConfig(2, 0.3, 2.0, m_max=2, tier="FULL_LD_RWA")
    rep = convergence_audit(cfg, PulseSpec(delta0T=3.0, window=3.0), threshold=1e-12)
    assert "window" in rep.flagged
