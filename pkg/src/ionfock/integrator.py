"""Adaptive Runge-Kutta propagation of the time-dependent Schroedinger equation."""

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError, StiffnessError
from .hilbert import StateVector, populations, write_population_csv


@dataclass(frozen=True)
class PropagationSettings:
    """Error control and sampling for :func:`propagate`.

    Times are in units of the pulse width T. ``steps_per_period`` bounds the
    step size by a fraction of the fastest oscillation period the
    Hamiltonian reports (the trap period for the beyond-RWA model).
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = None
    sample_spacing: float = 0.01
    steps_per_period: int = 40
    method: str = "DOP853"
    drift_limit: float = 1e-6

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not self.sample_spacing > 0:
            raise ValueError("sample_spacing must be positive")

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    basis: object = field(repr=False)
    norm_drift: np.ndarray = field(repr=False)
    nfev: int = 0
    energies: np.ndarray = field(default=None, repr=False)

    @property
    def final(self) -> StateVector:
        return StateVector(self.basis, self.states[-1])

    @property
    def max_drift(self):
        return float(np.max(np.abs(self.norm_drift)))

    def state(self, i) -> StateVector:
        return StateVector(self.basis, self.states[i])

    def marginals(self, marginal="phonon"):
        return np.array([populations(self.state(i), marginal) for i in range(len(self.times))])

    def to_csv(self, path):
        write_population_csv(
            path, self.times, self.states, self.basis,
            extra={"norm_drift": self.norm_drift}, time_name="tau",
        )


def _sample_times(span, spacing):
    t0, t1 = span
    n = max(1, int(math.ceil((t1 - t0) / spacing - 1e-9)))
    return np.linspace(t0, t1, n + 1)


def propagate(hamiltonian, psi0: StateVector, span, settings: PropagationSettings = None) -> Trajectory:
    """Solve ``i dpsi/dtau = H(tau) psi`` over ``span``.

    The state is never renormalised; the norm drift at every sample is
    recorded, and a drift above ``settings.drift_limit`` raises
    :class:`AccuracyError`.
    """
    settings = settings or PropagationSettings()
    if psi0.basis != hamiltonian.basis:
        raise ValueError("initial state and Hamiltonian use different bases")
    t_eval = _sample_times(span, settings.sample_spacing)
    max_step = np.inf if settings.max_step is None else settings.max_step
    period = hamiltonian.fastest_period
    if period is not None:
        max_step = min(max_step, period / settings.steps_per_period)

    apply = hamiltonian.apply

    def rhs(tau, y):
        return -1j * apply(tau, y)

    y0 = np.array(psi0.amplitudes, dtype=complex)
    if span[1] == span[0]:
        states = y0[None, :]
        t_eval = np.array([span[0]])
        nfev = 0
    else:
        sol = solve_ivp(
            rhs, span, y0, method=settings.method, t_eval=t_eval,
            rtol=settings.rtol, atol=settings.atol, max_step=max_step,
        )
        if sol.status != 0:
            raise StiffnessError(f"integration failed at tau={sol.t[-1]:.6g}: {sol.message}")
        states = sol.y.T
        nfev = sol.nfev
    drift = np.linalg.norm(states, axis=1) - np.linalg.norm(y0)
    traj = Trajectory(np.asarray(t_eval, float), states, psi0.basis, drift, nfev)
    if traj.max_drift > settings.drift_limit:
        raise AccuracyError(f"norm drift {traj.max_drift:.2e} exceeds {settings.drift_limit:.0e}")
    return traj


@dataclass
class AuditReport:
    baseline: float
    fidelities: dict
    shifts: dict
    threshold: float

    @property
    def max_shift(self):
        return max(self.shifts.values()) if self.shifts else 0.0

    @property
    def converged(self):
        return self.max_shift < self.threshold

    @property
    def flagged(self):
        return sorted(k for k, v in self.shifts.items() if v >= self.threshold)

    def to_dict(self):
        return {
            "baseline_fidelity": self.baseline,
            "fidelities": self.fidelities,
            "shifts": self.shifts,
            "threshold": self.threshold,
            "converged": self.converged,
            "flagged": self.flagged,
        }


def convergence_audit(cfg, pulse, settings=None, run=None, threshold=1e-4) -> AuditReport:
    """Re-run with a larger cutoff, buffer, window and tighter tolerance.

    ``run(cfg, pulse, settings)`` returns a fidelity; the default is
    :func:`ionfock.protocols.fock_via_blue` (or ``fock_via_red`` for red
    pulses). The LADDER tier has no phonon truncation, so cutoff and buffer
    variations are skipped there and reported as exact zeros.
    """
    from . import protocols
    from .hamiltonians import Sideband, Tier

    settings = settings or PropagationSettings()
    if run is None:
        proto = protocols.fock_via_red if pulse.sideband is Sideband.RED else protocols.fock_via_blue

        def run(c, p, s):
            return proto(c, p, s).fidelity

    base = run(cfg, pulse, settings)
    variants = {
        "tolerance": (cfg, pulse, settings.with_(rtol=settings.rtol / 10, atol=settings.atol / 10)),
        "window": (cfg, replace(pulse, window=pulse.window + 2), settings),
    }
    if cfg.tier is not Tier.LADDER:
        variants["cutoff"] = (cfg.with_(m_max=cfg.m_max + 10), pulse, settings)
        variants["buffer"] = (cfg.with_(buffer=2 * cfg.buffer), pulse, settings)
    fids = {}
    for name, args in variants.items():
        fids[name] = run(*args)
    shifts = {k: abs(v - base) for k, v in fids.items()}
    if cfg.tier is Tier.LADDER:
        fids.update(cutoff=base, buffer=base)
        shifts.update(cutoff=0.0, buffer=0.0)
    return AuditReport(base, fids, shifts, threshold)
