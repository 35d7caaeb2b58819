"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Companion lines marked INFO are printed for context and never decide the
outcome.
"""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from ionfock import chain, protocols as pr
from ionfock import hamiltonians as hm
from ionfock.hamiltonians import ChainConfig, PulseSpec, Tier
from ionfock.hilbert import BasisKind, StateVector, make_basis, symmetric_embedding
from ionfock.integrator import convergence_audit, propagate
from ionfock.sweep import SweepGrid, fidelity_map

# norm drifts of the runs above, checked in criterion 10
DRIFTS = {}


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            status = "INFO" if ok is None else ("PASS" if ok else "FAIL")
            print(f"\n[{tag}] {status} {detail}")
    return emit


def eight_ion_config(window=5.0):
    return ChainConfig(8, 0.3, 12.5, nuT=250 * math.pi, tier=Tier.BEYOND_RWA), PulseSpec(delta0T=10.0, window=window)


def test_ac1_eight_ion_pass(report):
    cfg, pulse = eight_ion_config()
    t0 = time.perf_counter()
    rep = pr.fock_via_blue(cfg, pulse, compute_phase=False, keep_trajectory=False)
    runtime = time.perf_counter() - t0
    DRIFTS["ac1"] = rep.steps[0].norm_drift
    audit = convergence_audit(cfg, pulse, run=lambda c, p, s: pr.fock_via_blue(
        c, p, s, keep_trajectory=False, compute_phase=False).fidelity)
    ok = 0.995 <= rep.fidelity <= 1.0 and audit.max_shift < 1e-4 and runtime < 600
    report("AC1", ok, f"N=8 BEYOND_RWA w=5: F={rep.fidelity:.5f} (need [0.995,1]), "
                      f"audit max shift={audit.max_shift:.2e} {audit.shifts} (need <1e-4), runtime={runtime:.1f}s")
    wide = pr.fock_via_blue(*eight_ion_config(7.0), compute_phase=False, keep_trajectory=False)
    report("AC1", None, f"companion window +-7T: F={wide.fidelity:.5f}")
    assert 0.995 <= rep.fidelity <= 1.0
    assert audit.max_shift < 1e-4
    assert runtime < 600


def test_ac2_morris_shore(report):
    N = 3
    g, pulse = pr.blue_template(N)
    ladder = pr.fock_via_blue(ChainConfig(N, 0.1, g), pulse, compute_phase=False)
    full = pr.fock_via_blue(ChainConfig(N, 0.1, g, m_max=N, tier=Tier.FULL_LD_RWA), pulse, compute_phase=False)
    lt, ft = ladder.trajectory, full.trajectory
    iso = symmetric_embedding(ft.basis)
    sym = make_basis(BasisKind.SYMMETRIC, N, N)
    amps = ft.states @ iso
    pops = np.abs(amps[:, [sym.index(n, n) for n in range(N + 1)]]) ** 2
    dev = float(np.max(np.abs(pops - np.abs(lt.states) ** 2)))
    DRIFTS["ac2"] = max(lt.max_drift, ft.max_drift)
    ok = dev < 1e-6 and np.array_equal(lt.times, ft.times)
    report("AC2", ok, f"N=3 FULL_LD_RWA vs LADDER max population deviation={dev:.2e} (need <1e-6)")
    assert ok


def test_ac3_landscape(report):
    cfg = ChainConfig(5, 0.1, 6.0, nuT=120 * math.pi, tier=Tier.BEYOND_RWA)
    rep = pr.fock_via_blue(cfg, PulseSpec(delta0T=10.0), compute_phase=False, keep_trajectory=False)
    score = -math.log10(1 - rep.fidelity)
    for tier in (Tier.LADDER, Tier.FULL_LD_RWA):
        f = pr.fock_via_blue(cfg.with_(tier=tier, m_max=10), PulseSpec(delta0T=10.0), compute_phase=False).fidelity
        report("AC3", None, f"companion {tier.value}: F={f:.5f}, -log10(1-F)={-math.log10(1 - f):.2f}")
    res = fidelity_map(SweepGrid.default(ChainConfig(5, 0.1, 1.0), PulseSpec(delta0T=1.0)), jobs=4)
    bl, tr = res.quadrant_means()
    island = tr > bl
    report("AC3", score >= 2 and island,
           f"N=5 point BEYOND_RWA: F={rep.fidelity:.5f}, -log10(1-F)={score:.2f} (need >=2); "
           f"island (LADDER 30x30) top-right mean={tr:.3f} > bottom-left mean={bl:.3f}: {island}")
    assert island
    assert score >= 2


def magnus_two_level(Om, d0, window=5.0, steps=20000):
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


def test_ac4_two_level(report):
    rng = np.random.default_rng(7)
    worst, drift = 0.0, 0.0
    for Om, d0 in rng.uniform(0.5, 10.0, size=(10, 2)):
        rep = pr.fock_via_blue(ChainConfig(1, 1.0, Om / 2), PulseSpec(delta0T=d0), compute_phase=False)
        worst = max(worst, abs(rep.fidelity - magnus_two_level(Om, d0)))
        drift = max(drift, rep.steps[0].norm_drift)
    DRIFTS["ac4"] = drift
    report("AC4", worst < 1e-8, f"N=1 LADDER vs 4th-order Magnus, 10 pairs: max |dF|={worst:.2e} (need <1e-8)")
    assert worst < 1e-8


def test_ac5_heating(report):
    nu = 2 * math.pi * 4e6
    glob = pr.heating_estimate(8, 1e-4, nu, rate=5.0)
    factor = pr.heating_estimate(8, 0.01, nu, scheme="LOCAL").duration_ratio
    ok = (140e-6 <= glob.T_total <= 160e-6 and 5.5e-3 <= glob.phonons <= 6.5e-3
          and abs(factor - 1.45) <= 0.05)
    report("AC5", ok, f"T_total={glob.T_total * 1e6:.1f}us (need [140,160]), phonons={glob.phonons:.3e} "
                      f"(need [5.5,6.5]e-3), LOCAL/GLOBAL={factor:.4f} (need 1.45+-0.05)")
    assert ok


def test_ac6_sidebands(report):
    m = chain.normal_modes(10)
    o2, o3 = chain.sideband_spectrum(m, 2).min(), chain.sideband_spectrum(m, 3).min()
    a2, a3 = chain.sideband_spectrum(m, 2, include_com=True).min(), chain.sideband_spectrum(m, 3, include_com=True).min()
    ok = abs(o2 - 0.11) <= 0.02 and abs(o3 - 0.047) <= 0.010
    report("AC6", ok, f"N=10 default set (COM excluded): order2={o2:.4f} (0.11+-0.02), order3={o3:.4f} (0.047+-0.010)")
    report("AC6", None, f"alternative set with COM: order2={a2:.4f}, order3={a3:.4f}")
    assert ok


def test_ac7_wedge(report):
    rng = np.random.default_rng(2024)
    worst, drift, count = 1.0, 0.0, 0
    for _ in range(25):
        N = int(rng.integers(2, 7))
        left, right = rng.uniform(1.5, 3.0, 2)
        g, pulse = pr.blue_template(N, 0.01, left, right_margin=right)
        cfg = ChainConfig(N, 0.1, g)
        lm, rm = pr.adiabaticity_margins(cfg, pulse, 0.01)
        assert lm >= 1.5 - 1e-9 and rm >= 1.5 - 1e-9
        rep = pr.fock_via_blue(cfg, pulse, compute_phase=False)
        worst = min(worst, rep.fidelity)
        drift = max(drift, rep.steps[0].norm_drift)
        count += 1
    DRIFTS["ac7"] = drift
    corner = {}
    for N in range(2, 7):
        g, pulse = pr.blue_template(N, 0.01, 1.5)
        corner[N] = pr.fock_via_blue(ChainConfig(N, 0.1, g), pulse, compute_phase=False).fidelity
    report("AC7", worst >= 0.98 and count >= 20,
           f"{count} sampled sets (seed 2024, margins in [1.5,3]): min F={worst:.5f} (need >=0.98)")
    report("AC7", None, "corner, both margins exactly 1.5: " + ", ".join(f"N={k}:{v:.5f}" for k, v in corner.items()))
    assert worst >= 0.98 and count >= 20


def test_ac8_ghz(report):
    c = 1 / math.sqrt(2)
    rep = pr.ghz_prepare(1, c, c, epsilon=0.01, margin=1.5)
    DRIFTS["ac8"] = max(s.norm_drift for s in rep.steps)
    ok = rep.fidelity >= 0.99 and rep.extras["crossings"] == 2
    report("AC8", ok, f"GHZ n=1: F={rep.fidelity:.5f} (need >=0.99) with xi={rep.xi:.4f} "
                      f"(readout {rep.extras['xi_readout']:.4f}), crossings={rep.extras['crossings']} (need 2)")
    assert ok


def test_ac9_closed_forms(report):
    errs = []
    u2 = chain.equilibrium_positions(2)
    errs.append(np.max(np.abs(u2 - [-(0.5 ** (2 / 3)), 0.5 ** (2 / 3)])))
    u3 = chain.equilibrium_positions(3)
    errs.append(np.max(np.abs(u3 - [-(1.25 ** (1 / 3)), 0.0, 1.25 ** (1 / 3)])))
    pos_err = max(errs)
    nu_err = abs(chain.normal_modes(2).frequencies[1] - math.sqrt(3))
    kap_err = max(np.max(np.abs(chain.normal_modes(N).kappa[0] - 1 / math.sqrt(N))) for N in range(1, 21))
    ok = pos_err < 1e-9 and nu_err < 1e-9 and kap_err < 1e-10
    report("AC9", ok, f"positions err={pos_err:.1e}, nu2/nu err={nu_err:.1e}, COM kappa err={kap_err:.1e}")
    assert ok


def test_ac10_invariants(report):
    N = 3
    g, pulse = pr.blue_template(N)
    cfg = ChainConfig(N, 0.1, g, m_max=2 * N, tier=Tier.FULL_LD_RWA)
    basis = make_basis(BasisKind.FULL, N, 2 * N)
    iso = symmetric_embedding(basis)
    sector = {}
    leak = 0.0
    drift = dict(DRIFTS)
    for sb, start, sign in (("BLUE", ("000", 0), -1), ("RED", ("111", 0), 1)):
        H = hm.collective_ld_hamiltonian(basis, cfg, PulseSpec(pulse.delta0T, sideband=sb))
        psi0 = StateVector.basis_state(basis, *start)
        tr = propagate(H, psi0, pulse.span)
        q = basis.excitations + sign * basis.phonons
        q0 = q[basis.index(*start)]
        sector[sb] = float(np.max(np.sum(np.abs(tr.states[:, q != q0]) ** 2, axis=1)))
        proj = tr.states @ iso
        leak = max(leak, float(np.max(1 - np.sum(np.abs(proj) ** 2, axis=1) / np.sum(np.abs(tr.states) ** 2, axis=1))))
        drift[f"ac10-{sb}"] = tr.max_drift
    # dark state: |000>|0> inside a superposition under a red pass
    Hr = hm.collective_ld_hamiltonian(basis, cfg, PulseSpec(pulse.delta0T, sideband="RED"))
    amp = (StateVector.basis_state(basis, "000", 0).amplitudes + StateVector.basis_state(basis, "111", 0).amplitudes)
    tr = propagate(Hr, StateVector(basis, amp / math.sqrt(2)), pulse.span)
    dark = float(np.max(np.abs(tr.states[:, basis.index("000", 0)] - 1 / math.sqrt(2))))
    drift["ac10-dark"] = tr.max_drift
    herm = 0.0
    big, big_pulse = eight_ion_config()
    for H in (hm.ladder_hamiltonian(cfg, pulse), hm.full_ld_rwa_hamiltonian(cfg, pulse),
              hm.beyond_rwa_hamiltonian(big, big_pulse)):
        for t in np.linspace(-5, 5, 11):
            herm = max(herm, hm.hermiticity_residual(H, t))
    defect = hm.displacement_operator(big.eta / math.sqrt(big.N), big.m_max, big.buffer).defect
    worst_drift = max(abs(v) for v in drift.values())
    ok = (worst_drift < 1e-8 and max(sector.values()) < 1e-8 and leak < 1e-10 and dark < 1e-10
          and herm < 1e-12 and defect < 1e-10)
    report("AC10", ok, f"norm drift={worst_drift:.1e} over {sorted(drift)}, blue/red sector leakage="
                       f"{sector['BLUE']:.1e}/{sector['RED']:.1e}, symmetric leakage={leak:.1e}, "
                       f"dark-state deviation={dark:.1e}, hermiticity={herm:.1e}, displacement defect={defect:.1e}")
    assert ok
