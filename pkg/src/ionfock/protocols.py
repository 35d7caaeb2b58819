"""Pulse sequences: Fock-state creation, transition cycles, GHZ states and
motional superpositions.

Every collective pass is a sech-tanh chirped pulse. Relative phases are
predicted by following the adiabatic eigenvalue of each branch through each
pass (``xi``) and compared against the simulated amplitudes.
"""

from dataclasses import dataclass, field, replace
import cmath
import math

import numpy as np

from .errors import DomainError, ProtocolAbort, TrackingError
from .hamiltonians import (
    ChainConfig,
    PulseSpec,
    Sideband,
    Tier,
    beyond_rwa_hamiltonian,
    collective_ld_hamiltonian,
    dynamical_phase,
    follow_adiabatic_state,
    ladder_hamiltonian,
    peak_coupling,
    single_ion_rotation,
)
from .hilbert import BasisKind, StateVector, fidelity, make_basis, populations
from .integrator import PropagationSettings, propagate

DEFAULT_FLOOR = 0.9


@dataclass
class StepSummary:
    name: str
    pulse: PulseSpec
    fidelity: float
    phonon_marginal: np.ndarray = field(repr=False)
    norm_drift: float = 0.0
    trajectory: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            "name": self.name,
            "pulse": None if self.pulse is None else _pulse_dict(self.pulse),
            "fidelity": self.fidelity,
            "phonon_marginal": [float(x) for x in self.phonon_marginal],
            "norm_drift": self.norm_drift,
        }


@dataclass
class ProtocolReport:
    """Outcome of a protocol run.

    ``xi`` is the predicted phase of the target amplitude (relative to the
    reference branch for superpositions): minus the integral of the followed
    eigenvalue, plus pi for an eigenvector sign flip, minus the leading
    nonadiabatic correction. ``xi_dynamical`` is the bare integral of the
    followed eigenvalues (accumulated over passes and differenced between
    branches where relevant). Either may be None when the adiabatic branch
    cannot be followed (e.g. zero coupling).
    """

    name: str
    steps: list
    final_state: StateVector = field(repr=False)
    target: StateVector = field(repr=False)
    fidelity: float
    xi: float = None
    xi_dynamical: float = None
    extras: dict = field(default_factory=dict)

    @property
    def trajectory(self):
        return self.steps[-1].trajectory if self.steps else None

    def phonon_marginal(self):
        return populations(self.final_state, "phonon")

    def to_dict(self):
        return {
            "protocol": self.name,
            "fidelity": self.fidelity,
            "xi": self.xi,
            "xi_dynamical": self.xi_dynamical,
            "steps": [s.to_dict() for s in self.steps],
            "phonon_marginal": [float(x) for x in self.phonon_marginal()],
            "extras": _jsonable(self.extras),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _pulse_dict(p: PulseSpec):
    return {
        "delta0T": p.delta0T,
        "Omega0T": p.Omega0T,
        "chirp": p.chirp,
        "sideband": p.sideband.value,
        "window": p.window,
    }


def _wrap(phase):
    return (phase + math.pi) % (2 * math.pi) - math.pi


def _run_step(name, H, psi, span, target, settings, floor=None, keep=True):
    traj = propagate(H, psi, span, settings)
    final = traj.final
    f = fidelity(final, target)
    step = StepSummary(
        name, getattr(H, "pulse", None), f, populations(final, "phonon"),
        traj.max_drift, traj if keep else None,
    )
    if floor is not None and f < floor:
        raise ProtocolAbort(
            f"step {name!r} reached fidelity {f:.4f} below floor {floor}",
            diagnostics={
                "step": name,
                "fidelity": f,
                "phonon_marginal": [float(x) for x in step.phonon_marginal],
            },
        )
    return final, step


def _ladder_path(cfg, pulse, start, phonon_offset=0):
    H = ladder_hamiltonian(cfg, pulse, phonon_offset)
    return follow_adiabatic_state(H, start, pulse.span, derivative_fn=H.derivative)


def _ladder_phase(cfg, pulse, start=0, phonon_offset=0):
    """(transfer phase, dynamical phase) of one ladder pass, or (None, None)."""
    try:
        path = _ladder_path(cfg, pulse, start, phonon_offset)
    except TrackingError:
        return None, None
    xi = dynamical_phase(path.energy_fn, *path.span)
    return path.transfer_phase(), xi


def _check_tier(cfg, allowed):
    if cfg.tier not in allowed:
        raise DomainError(f"tier {cfg.tier.value} not supported here")


def _single_pass(name, cfg, pulse, settings, start, target, keep, compute_phase):
    """One collective sideband pass in the tier selected by ``cfg``.

    ``start`` and ``target`` are (Dicke level, phonon number) pairs.
    """
    N = cfg.N
    if cfg.tier is Tier.LADDER:
        H = ladder_hamiltonian(cfg, pulse)
        red = pulse.sideband is Sideband.RED
        level = lambda nm: nm[1] if red else nm[0]  # noqa: E731
        psi0 = StateVector.basis_state(H.basis, level(start))
        tgt = StateVector.basis_state(H.basis, level(target))
    elif cfg.tier is Tier.FULL_LD_RWA:
        basis = make_basis(BasisKind.FULL, N, max(cfg.m_max, N))
        H = collective_ld_hamiltonian(basis, cfg, pulse)
        full = lambda k: "1" * k + "0" * (N - k)  # noqa: E731
        psi0 = StateVector.basis_state(basis, full(start[0]), start[1])
        tgt = StateVector.basis_state(basis, full(target[0]), target[1])
    else:
        H = beyond_rwa_hamiltonian(cfg, pulse)
        psi0 = StateVector.basis_state(H.basis, *start)
        tgt = StateVector.basis_state(H.basis, *target)
    final, step = _run_step(name, H, psi0, pulse.span, tgt, settings, keep=keep)
    xi_t = xi_d = None
    if compute_phase:
        xi_t, xi_d = _ladder_phase(cfg, pulse)
    return ProtocolReport(name, [step], final, tgt, step.fidelity, xi_t, xi_d)


def fock_via_blue(cfg: ChainConfig, pulse: PulseSpec, settings=None, keep_trajectory=True,
                  compute_phase=True) -> ProtocolReport:
    """Single blue-sideband pass ``|0...0>|0> -> |1...1>|N>``."""
    if pulse.sideband is not Sideband.BLUE:
        pulse = replace(pulse, sideband=Sideband.BLUE)
    settings = settings or PropagationSettings()
    return _single_pass("fock_via_blue", cfg, pulse, settings, (0, 0), (cfg.N, cfg.N),
                        keep_trajectory, compute_phase and peak_nonzero(cfg, pulse))


def fock_via_red(cfg: ChainConfig, pulse: PulseSpec, settings=None, keep_trajectory=True,
                 compute_phase=True) -> ProtocolReport:
    """Single red-sideband pass ``|1...1>|0> -> |0...0>|N>``."""
    if pulse.sideband is not Sideband.RED:
        pulse = replace(pulse, sideband=Sideband.RED)
    settings = settings or PropagationSettings()
    return _single_pass("fock_via_red", cfg, pulse, settings, (cfg.N, 0), (0, cfg.N),
                        keep_trajectory, compute_phase and peak_nonzero(cfg, pulse))


def peak_nonzero(cfg, pulse):
    if pulse.Omega0T is not None:
        return pulse.Omega0T > 0 and (cfg.eta > 0 or pulse.sideband is Sideband.CARRIER)
    return cfg.g0T > 0


# ---------------------------------------------------------------------------
# pulse design and adiabaticity

def adiabaticity_margins(cfg: ChainConfig, pulse: PulseSpec, epsilon):
    """Left and right margins of the multistate adiabaticity condition.

    ``left = (pi eta Omega0 T)^2 / (2 N ln(1/eps)) / (pi delta0 T)`` and
    ``right = pi delta0 T / (N ln(1/eps))``. Both >= 1 means the condition
    holds.
    """
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    L = math.log(1 / epsilon)
    eta_omega = 2 * math.sqrt(cfg.N) * peak_coupling(cfg, pulse)
    d = math.pi * abs(pulse.delta0T)
    if L == 0:
        return math.inf, math.inf
    left = (math.pi * eta_omega) ** 2 / (2 * cfg.N * L) / d if d > 0 else math.inf
    right = d / (cfg.N * L)
    return left, right


def design_pulse(N, epsilon, margin=1.5, right_margin=None):
    """``(eta*Omega0*T, delta0*T)`` with left margin ``margin`` and right margin
    ``right_margin`` (default: the same)."""
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    right = margin if right_margin is None else right_margin
    L = math.log(1 / epsilon)
    delta0T = right * N * L / math.pi
    eta_omega = math.sqrt(margin * math.pi * delta0T * 2 * N * L) / math.pi
    return eta_omega, delta0T


def blue_template(N, epsilon=0.01, margin=1.5, window=5.0, right_margin=None):
    """(g0T, PulseSpec) for a collective sideband pass with the given margins."""
    eta_omega, d = design_pulse(N, epsilon, margin, right_margin)
    return eta_omega / (2 * math.sqrt(N)), PulseSpec(delta0T=d, window=window)


def carrier_template(N, epsilon=0.01, margin=1.5, window=5.0):
    """Carrier pass treated as an N-level ladder with unit Lamb-Dicke factor."""
    omega, d = design_pulse(N, epsilon, margin)
    return PulseSpec(delta0T=d, Omega0T=omega, sideband=Sideband.CARRIER, window=window)


# ---------------------------------------------------------------------------
# heating budget

@dataclass
class HeatingReport:
    scheme: str
    T: float
    T_total: float
    steps: int
    phonons: float
    duration_ratio: float
    inputs: dict

    def to_dict(self):
        return {
            "scheme": self.scheme,
            "T_s": self.T,
            "T_total_s": self.T_total,
            "steps": self.steps,
            "phonons": self.phonons,
            "local_to_global_duration": self.duration_ratio,
            "inputs": self.inputs,
        }


def heating_estimate(N, epsilon, nu, g0=None, Omega0=None, eta=None, rate=5.0,
                     scheme="GLOBAL") -> HeatingReport:
    """Pulse duration and expected heating for global or local addressing.

    ``nu`` is the trap angular frequency (rad/s) and ``rate`` the heating
    rate per ion (phonons/s). The peak coupling is ``g0`` (rad/s), or
    ``eta*Omega0/(2 sqrt N)``, or by default ``nu/(20 pi)``. The sech pulse
    is allotted ten pulse widths.

    GLOBAL: one pulse of width ``sqrt(N) ln(1/eps) / (sqrt(2) pi g0)``.
    LOCAL: N single-ion pulses, each of width
    ``sqrt(N) ln(N/eps) / (sqrt(2) pi g0) / N``.
    """
    scheme = scheme.upper()
    if scheme not in ("GLOBAL", "LOCAL"):
        raise DomainError(f"unknown scheme {scheme!r}")
    for name, v in (("N", N), ("epsilon", epsilon), ("nu", nu)):
        if not v > 0:
            raise DomainError(f"{name} must be positive")
    if rate < 0:
        raise DomainError("rate must be >= 0")
    if g0 is None:
        if Omega0 is not None:
            if eta is None:
                raise DomainError("Omega0 needs eta")
            g0 = eta * Omega0 / (2 * math.sqrt(N))
        else:
            g0 = nu / (20 * math.pi)
    scale = math.sqrt(N) / (math.sqrt(2) * math.pi * g0)
    T_global = scale * math.log(1 / epsilon)
    if scheme == "GLOBAL":
        T, steps = T_global, 1
    else:
        T, steps = scale * math.log(N / epsilon) / N, N
    T_total = 10 * T * steps
    ratio = math.log(N / epsilon) / math.log(1 / epsilon)
    return HeatingReport(
        scheme, T, T_total, steps, rate * N * T_total, ratio,
        {"N": N, "epsilon": epsilon, "nu": nu, "g0": g0, "Omega0": Omega0, "eta": eta,
         "rate_per_ion": rate},
    )


# ---------------------------------------------------------------------------
# composite sequences on the symmetric (Dicke x phonon) space

def _composite_basis(cfg, m_max):
    if cfg.tier is Tier.LADDER:
        return make_basis(BasisKind.SYMMETRIC, cfg.N, m_max)
    if cfg.tier is Tier.FULL_LD_RWA:
        return make_basis(BasisKind.FULL, cfg.N, m_max)
    raise DomainError("composite sequences use the LADDER or FULL_LD_RWA tier")


def _collective_index(basis, level, phonon):
    if basis.kind is BasisKind.SYMMETRIC:
        return basis.index(level, phonon)
    if level not in (0, basis.N):
        raise DomainError("only |0..0> and |1..1> are product states")
    return basis.index("1" * level + "0" * (basis.N - level), phonon)


def _collective_state(basis, level, phonon):
    amp = np.zeros(basis.dim, complex)
    amp[_collective_index(basis, level, phonon)] = 1.0
    return StateVector(basis, amp)


class _Branch:
    """Basis-state branch tracked through collective passes for phase bookkeeping."""

    def __init__(self, level, phonon, phase=0.0, dyn=0.0):
        self.level, self.phonon, self.phase, self.dyn = level, phonon, phase, dyn

    def advance(self, cfg, pulse):
        N = cfg.N
        sb = pulse.sideband
        if sb is Sideband.BLUE and self.level == 0:
            start, offset, new = 0, self.phonon, (N, self.phonon + N)
        elif sb is Sideband.RED and self.level == N:
            start, offset, new = 0, self.phonon, (0, self.phonon + N)
        elif sb is Sideband.CARRIER and self.level == N:
            start, offset, new = N, 0, (0, self.phonon)
        elif sb is Sideband.RED and self.level == 0 and self.phonon == 0:
            return  # dark: zero energy in the red frame
        else:
            raise DomainError(f"branch {(self.level, self.phonon)} has no {sb.value} pass")
        path = _ladder_path(cfg, pulse, start, offset)
        self.phase += path.transfer_phase()
        self.dyn += dynamical_phase(path.energy_fn, *path.span)
        self.level, self.phonon = new


def transition_cycle(cfg: ChainConfig, k, kind="BLUE_CARRIER", blue=None, second=None,
                     settings=None, floor=DEFAULT_FLOOR, keep_trajectory=False) -> ProtocolReport:
    """Repeat blue-carrier (or blue-red) cycles starting from ``|0...0>|0>``.

    BLUE_CARRIER: k cycles reach ``|0...0>|kN>``. BLUE_RED: k pairs reach
    ``|0...0>|2kN>``. ``blue`` and ``second`` are the pulse templates; by
    default they come from ``cfg`` and :func:`carrier_template`.
    """
    kind = kind.upper()
    if kind not in ("BLUE_CARRIER", "BLUE_RED"):
        raise DomainError(f"unknown cycle kind {kind!r}")
    if k < 0:
        raise DomainError("k must be >= 0")
    _check_tier(cfg, (Tier.LADDER, Tier.FULL_LD_RWA))
    settings = settings or PropagationSettings()
    N = cfg.N
    blue = replace(blue or PulseSpec(delta0T=blue_template(N)[1].delta0T), sideband=Sideband.BLUE)
    if second is None:
        second = carrier_template(N) if kind == "BLUE_CARRIER" else replace(blue, sideband=Sideband.RED)
    gain = N if kind == "BLUE_CARRIER" else 2 * N
    m_max = max(1, k * gain)
    basis = _composite_basis(cfg, m_max)
    psi = _collective_state(basis, 0, 0)
    branch = _Branch(0, 0)
    steps = []
    for cycle in range(k):
        m0 = cycle * gain
        for pulse, level, phonon in ((blue, N, m0 + N), (second, 0, m0 + gain)):
            H = collective_ld_hamiltonian(basis, cfg, pulse)
            tgt = _collective_state(basis, level, phonon)
            psi, step = _run_step(
                f"{pulse.sideband.value.lower()}#{cycle + 1}", H, psi, pulse.span, tgt,
                settings, floor, keep_trajectory,
            )
            steps.append(step)
            branch.advance(cfg, pulse)
    target = _collective_state(basis, 0, k * gain)
    target = StateVector(basis, target.amplitudes * cmath.exp(1j * branch.phase))
    return ProtocolReport(
        f"transition_cycle[{kind}]", steps, psi, target, fidelity(psi, target),
        _wrap(branch.phase), branch.dyn, {"k": k, "kind": kind},
    )


def motional_superposition(cfg: ChainConfig, c0, c1, k=0, red=None, blue=None, carrier=None,
                           settings=None, floor=DEFAULT_FLOOR,
                           keep_trajectory=False) -> ProtocolReport:
    """Map ``(c0|0..0> + c1|1..1>)|0>`` onto ``|0..0>(c0|kN> + c1 e^{i xi'}|(k+1)N>)``.

    A collective red pass transfers the GHZ excitation into N phonons; each
    of the k following blue-carrier cycles adds N phonons to both branches.
    ``extras['xi_red']`` is the relative phase after the red pass and
    ``xi`` the final relative phase; ``extras['xi_readout']`` holds the same
    phases read from the simulated amplitudes.
    """
    _check_tier(cfg, (Tier.LADDER, Tier.FULL_LD_RWA))
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1) > 1e-9:
        raise DomainError("|c0|^2 + |c1|^2 must equal 1")
    settings = settings or PropagationSettings()
    N = cfg.N
    p_default = blue_template(N)[1]
    red = replace(red or p_default, sideband=Sideband.RED)
    blue = replace(blue or p_default, sideband=Sideband.BLUE)
    carrier = carrier or carrier_template(N)
    basis = _composite_basis(cfg, (k + 1) * N)
    psi = StateVector(
        basis,
        c0 * _collective_state(basis, 0, 0).amplitudes + c1 * _collective_state(basis, N, 0).amplitudes,
    )
    dark, bright = _Branch(0, 0), _Branch(N, 0)
    steps = []

    def relative(psi_, m_lo, m_hi):
        a_lo = psi_.amplitudes[_collective_index(basis, 0, m_lo)]
        a_hi = psi_.amplitudes[_collective_index(basis, 0, m_hi)]
        return _wrap(cmath.phase(a_hi) - cmath.phase(a_lo) - cmath.phase(c1) + cmath.phase(c0))

    sequence = [(red, "red")]
    for cycle in range(k):
        sequence += [(blue, f"blue#{cycle + 1}"), (carrier, f"carrier#{cycle + 1}")]
    xi_red = readout_red = None
    for pulse, name in sequence:
        H = collective_ld_hamiltonian(basis, cfg, pulse)
        for b in (dark, bright):
            b.advance(cfg, pulse)
        tgt = StateVector(
            basis,
            c0 * cmath.exp(1j * dark.phase) * _collective_state(basis, dark.level, dark.phonon).amplitudes
            + c1 * cmath.exp(1j * bright.phase)
            * _collective_state(basis, bright.level, bright.phonon).amplitudes,
        )
        psi, step = _run_step(name, H, psi, pulse.span, tgt, settings, floor, keep_trajectory)
        steps.append(step)
        if name == "red":
            xi_red = _wrap(bright.phase - dark.phase)
            readout_red = relative(psi, 0, N) if c0 != 0 and c1 != 0 else None
    xi = _wrap(bright.phase - dark.phase)
    readout = relative(psi, k * N, (k + 1) * N) if c0 != 0 and c1 != 0 else None
    return ProtocolReport(
        "motional_superposition", steps, psi, tgt, fidelity(psi, tgt), xi,
        bright.dyn - dark.dyn,
        {"k": k, "xi_red": xi_red, "xi_readout": readout, "xi_red_readout": readout_red},
    )


# ---------------------------------------------------------------------------
# GHZ preparation on the full 2^N x phonon space

def crossing_sequence(n):
    """Sideband order of the n+1 single-ion crossings (always ending red)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    seq = ["RED"] if n % 2 == 0 else ["BLUE"]
    while len(seq) < n + 1:
        seq.append("BLUE" if seq[-1] == "RED" else "RED")
    if seq[-1] != "RED":
        raise DomainError("crossing sequence must end on the red sideband")
    return seq


def _local_phase(H, state_index, span):
    """Adiabatic transfer phase for a branch under a single-ion crossing."""
    nbrs = H.neighbours(state_index)
    if not nbrs:
        energy = lambda t: H.detuning(t) * H.counts[state_index]  # noqa: E731
        xi = dynamical_phase(energy, *span)
        return state_index, -xi, xi
    if len(nbrs) > 1:
        raise DomainError("single-ion crossing couples a branch to several states")
    idx = [state_index, nbrs[0]]
    path = follow_adiabatic_state(
        lambda t: H.submatrix(t, idx), 0, span,
        derivative_fn=lambda t: H.submatrix(t, idx, derivative=True),
    )
    if path.end != 1:
        raise TrackingError("branch was not transferred by the crossing")
    xi = dynamical_phase(path.energy_fn, *path.span)
    return nbrs[0], path.transfer_phase(), xi


def ghz_prepare(n, c0, c1, eta=0.1, single=None, collective=None, settings=None,
                epsilon=0.01, margin=1.5, floor=DEFAULT_FLOOR,
                keep_trajectory=False) -> ProtocolReport:
    """Prepare ``c0|0...0> + c1 e^{i xi}|1...1>`` on N = 2n+1 ions.

    Starts from ``|0...0>|n>`` and runs: a carrier rotation of ion 1, n+1
    alternating single-ion sideband crossings on ion 1, then a collective
    red pass. ``single`` and ``collective`` are ``(g0T, PulseSpec)`` pairs;
    by default both satisfy the adiabaticity margins (``N = 1`` and
    ``N = 2n+1`` respectively).
    """
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1) > 1e-9:
        raise DomainError("|c0|^2 + |c1|^2 must equal 1")
    settings = settings or PropagationSettings()
    N = 2 * n + 1
    seq = crossing_sequence(n)
    if single is None:
        eta_omega, d = design_pulse(1, epsilon, margin)
        single = (eta_omega / 2, PulseSpec(delta0T=d))
    if collective is None:
        collective = blue_template(N, epsilon, margin)
    basis = make_basis(BasisKind.FULL, N, N)
    steps = []

    # (i) carrier rotation of ion 1: coefficient order depends on parity of n
    first, second = (c0, c1) if n % 2 == 0 else (c1, c0)
    area = 2 * math.acos(min(1.0, abs(first)))
    rel = cmath.phase(second) - cmath.phase(first) if abs(first) > 0 and abs(second) > 0 else 0.0
    # |0> -> cos(a/2)|0> - i e^{i phi} sin(a/2)|1>; global phase is irrelevant
    H = single_ion_rotation(basis, 0, area, rel + math.pi / 2)
    psi = StateVector.basis_state(basis, "0" * N, n)
    rotated = (first * StateVector.basis_state(basis, "0" * N, n).amplitudes
               + second * StateVector.basis_state(basis, "1" + "0" * (N - 1), n).amplitudes)
    psi, step = _run_step("carrier-rotation", H, psi, (0.0, 1.0), StateVector(basis, rotated),
                          settings, floor, keep_trajectory)
    steps.append(step)

    # branch bookkeeping: c0 and c1 follow separate basis states
    idx0 = basis.index("1" + "0" * (N - 1), n) if n % 2 else basis.index("0" * N, n)
    idx1 = basis.index("0" * N, n) if n % 2 else basis.index("1" + "0" * (N - 1), n)
    branches = {"c0": [idx0, 0.0, 0.0], "c1": [idx1, 0.0, 0.0]}
    ground = basis.index("0" * N, 0)
    dark_dev = 0.0

    # (ii) n+1 single-ion crossings on ion 1
    g_single, p_single = single
    cfg_single = ChainConfig(N, eta if eta > 0 else 1.0, g_single, m_max=N)
    for i, sb in enumerate(seq):
        pulse = replace(p_single, sideband=Sideband(sb))
        H = collective_ld_hamiltonian(basis, cfg_single, pulse, ions=[0])
        for b in branches.values():
            new, phase, dyn = _local_phase(H, b[0], pulse.span)
            b[0] = new
            b[1] += phase
            b[2] += dyn
        tgt = np.zeros(basis.dim, complex)
        tgt[branches["c0"][0]] += c0 * cmath.exp(1j * branches["c0"][1])
        tgt[branches["c1"][0]] += c1 * cmath.exp(1j * branches["c1"][1])
        start_amp = psi.amplitudes[ground]
        psi, step = _run_step(f"{sb.lower()}-crossing#{i + 1}", H, psi, pulse.span,
                              StateVector(basis, tgt), settings, floor, True)
        if sb == "RED":
            traj = step.trajectory
            dark_dev = max(dark_dev, float(np.max(np.abs(traj.states[:, ground] - start_amp))))
        if not keep_trajectory:
            step.trajectory = None
        steps.append(step)
    if branches["c0"][0] != ground or branches["c1"][0] != basis.index("0" * N, N):
        raise DomainError("crossing sequence did not map the branches onto |0>|0> and |0>|N>")

    # (iii) collective red pass maps |0..0>|N> onto |1..1>|0>
    g_coll, p_coll = collective
    cfg_coll = ChainConfig(N, eta if eta > 0 else 1.0, g_coll, m_max=N, tier=Tier.FULL_LD_RWA)
    pulse = replace(p_coll, sideband=Sideband.RED)
    H = collective_ld_hamiltonian(basis, cfg_coll, pulse)
    path = _ladder_path(cfg_coll, pulse, N)
    branches["c1"][1] += path.transfer_phase()
    branches["c1"][2] += dynamical_phase(path.energy_fn, *path.span)
    xi = _wrap(branches["c1"][1] - branches["c0"][1])
    xi_dyn = branches["c1"][2] - branches["c0"][2]
    top = basis.index("1" * N, 0)
    tgt = np.zeros(basis.dim, complex)
    tgt[ground] = c0 * cmath.exp(1j * branches["c0"][1])
    tgt[top] = c1 * cmath.exp(1j * branches["c1"][1])
    target = StateVector(basis, tgt)
    psi, step = _run_step("collective-red", H, psi, pulse.span, target, settings, floor,
                          keep_trajectory)
    steps.append(step)
    readout = None
    if abs(c0) > 0 and abs(c1) > 0:
        readout = _wrap(cmath.phase(psi.amplitudes[top]) - cmath.phase(psi.amplitudes[ground])
                        - cmath.phase(c1) + cmath.phase(c0))
    return ProtocolReport(
        "ghz_prepare", steps, psi, target, fidelity(psi, target), xi, xi_dyn,
        {"n": n, "N": N, "crossings": len(seq), "sequence": seq,
         "dark_branch_deviation": dark_dev, "xi_readout": readout},
    )
