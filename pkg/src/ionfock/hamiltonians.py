"""Pulse shapes and time-dependent Hamiltonians.

Units: hbar = 1 and time in units of the pulse width T, so every rate enters
as a dimensionless product with T (``g0T``, ``delta0T``, ``nuT``). All
per-ion laser phases are gauged to zero.

Three tiers are provided:

* ``LADDER``: the (N+1)-level Morris-Shore chain, with diagonal ``n delta``.
* ``FULL_LD_RWA``: Lamb-Dicke, vibrational-RWA couplings on the full
  2^N x phonon space (or on the symmetric Dicke x phonon space).
* ``BEYOND_RWA``: the COM Hamiltonian with the full displacement operator
  and counter-rotating terms, on the symmetric Dicke x phonon space.

Frame conventions for the swept LD/RWA models: blue-sideband and carrier
pulses carry ``delta(t)`` times the ionic excitation count on the diagonal,
red-sideband pulses carry ``delta(t)`` times the phonon number. With these
conventions the red and blue Morris-Shore ladders are the same matrix.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
import math

import numba
import numpy as np
from scipy import integrate, sparse
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigError, DomainError, TrackingError, TruncationError
from .hilbert import Basis, BasisKind, make_basis, DIMENSION_CAP


class Sideband(str, Enum):
    BLUE = "BLUE"
    RED = "RED"
    CARRIER = "CARRIER"


class Tier(str, Enum):
    LADDER = "LADDER"
    FULL_LD_RWA = "FULL_LD_RWA"
    BEYOND_RWA = "BEYOND_RWA"


@dataclass(frozen=True)
class PulseSpec:
    """Sech-tanh chirped pulse.

    ``Omega0T`` may be left as None for sideband pulses, in which case the
    peak coupling comes from ``ChainConfig.g0T``.
    """

    delta0T: float
    Omega0T: float = None
    chirp: int = 1
    sideband: Sideband = Sideband.BLUE
    window: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "sideband", Sideband(self.sideband))
        if self.chirp not in (1, -1):
            raise DomainError("chirp must be +1 or -1")
        if self.Omega0T is not None and self.Omega0T < 0:
            raise DomainError("Omega0T must be >= 0")
        if not self.window > 0:
            raise DomainError("window must be positive")

    @property
    def span(self):
        return (-self.window, self.window)


def pulse_eval(p: PulseSpec, tau, Omega0T=None):
    """Rabi frequency and detuning (both times T) at ``tau = t/T``."""
    om = p.Omega0T if Omega0T is None else Omega0T
    if om is None:
        raise DomainError("pulse has no Omega0T")
    return om / np.cosh(tau), p.chirp * p.delta0T * np.tanh(tau)


def _chirp_integral(p: PulseSpec, tau):
    # integral of delta0T*tanh from 0; log(cosh) written to avoid overflow
    a = np.abs(tau)
    return p.chirp * p.delta0T * (a + np.log1p(np.exp(-2 * a)) - math.log(2))


@dataclass(frozen=True)
class ChainConfig:
    """System parameters shared by all pulses of a run.

    ``g0T`` is the peak scaled coupling ``eta*Omega0/(2 sqrt N)`` times T.
    ``nuT`` defaults to ``20*pi*g0T`` (coupling at one twentieth-pi of the
    trap frequency); ``m_max`` defaults to ``N + 20``.
    """

    N: int
    eta: float
    g0T: float
    nuT: float = None
    m_max: int = None
    buffer: int = 10
    tier: Tier = Tier.LADDER

    def __post_init__(self):
        object.__setattr__(self, "tier", Tier(self.tier))
        if self.N < 1:
            raise ConfigError("N must be >= 1", "N")
        if self.eta < 0:
            raise ConfigError("eta must be >= 0", "eta")
        if self.g0T < 0:
            raise ConfigError("g0T must be >= 0", "g0T")
        if self.m_max is None:
            object.__setattr__(self, "m_max", self.N + 20)
        if self.nuT is None:
            object.__setattr__(self, "nuT", 20 * math.pi * self.g0T)
        if self.tier is Tier.BEYOND_RWA and not self.nuT > 0:
            raise ConfigError("BEYOND_RWA needs nuT > 0", "nuT")
        if self.buffer < 0:
            raise ConfigError("buffer must be >= 0", "buffer")

    def with_(self, **changes):
        return replace(self, **changes)


def peak_rabi(cfg: ChainConfig, pulse: PulseSpec):
    if pulse.Omega0T is not None:
        return pulse.Omega0T
    if cfg.eta == 0:
        if cfg.g0T == 0:
            return 0.0
        raise ConfigError("cannot derive Omega0T from g0T with eta = 0", "eta")
    return 2 * math.sqrt(cfg.N) * cfg.g0T / cfg.eta


def peak_coupling(cfg: ChainConfig, pulse: PulseSpec):
    if pulse.Omega0T is not None:
        return cfg.eta * pulse.Omega0T / (2 * math.sqrt(cfg.N))
    return cfg.g0T


class SweptHamiltonian:
    """``H(tau) = a(tau) (C + C^+) + delta(tau) diag(counts)``.

    ``a(tau) = peak * sech(tau)`` and ``delta(tau) = chirp * delta0T * tanh(tau)``.
    ``coupling`` is a sparse matrix holding the raising part C.
    """

    def __init__(self, basis, coupling, counts, peak, pulse: PulseSpec, name=""):
        self.basis = basis
        self.pulse = pulse
        self.peak = float(peak)
        self.name = name
        C = sparse.csr_matrix(coupling, dtype=complex)
        self._X = (C + C.conj().T).tocsr()
        self._counts = np.asarray(counts, dtype=float)
        self._dense = self._X.toarray() if basis.dim <= 600 else None

    @property
    def fastest_period(self):
        return None

    @property
    def counts(self):
        return self._counts

    def amplitude(self, tau):
        return self.peak / np.cosh(tau)

    def detuning(self, tau):
        return self.pulse.chirp * self.pulse.delta0T * np.tanh(tau)

    def __call__(self, tau):
        a, d = self.amplitude(tau), self.detuning(tau)
        if self._dense is not None:
            return a * self._dense + np.diag(d * self._counts)
        return a * self._X + sparse.diags(d * self._counts)

    def apply(self, tau, psi):
        a, d = self.amplitude(tau), self.detuning(tau)
        X = self._dense if self._dense is not None else self._X
        return a * (X @ psi) + (d * self._counts) * psi

    def derivative(self, tau):
        """dH/dtau."""
        da = -self.peak * np.tanh(tau) / np.cosh(tau)
        dd = self.pulse.chirp * self.pulse.delta0T / np.cosh(tau) ** 2
        if self._dense is not None:
            return da * self._dense + np.diag(dd * self._counts)
        return da * self._X + sparse.diags(dd * self._counts)

    def submatrix(self, tau, indices, derivative=False):
        """Dense restriction of H(tau) (or dH/dtau) to the given basis indices."""
        idx = np.asarray(indices)
        X = self._X[idx][:, idx].toarray()
        if derivative:
            da = -self.peak * np.tanh(tau) / np.cosh(tau)
            dd = self.pulse.chirp * self.pulse.delta0T / np.cosh(tau) ** 2
            return da * X + np.diag(dd * self._counts[idx])
        return self.amplitude(tau) * X + np.diag(self.detuning(tau) * self._counts[idx])

    def neighbours(self, index):
        """Basis indices directly coupled to ``index``."""
        row = self._X.getrow(index)
        return [int(j) for j, v in zip(row.indices, row.data) if v != 0 and j != index]


def ladder_couplings(N, sideband, phonon_offset=0):
    """Off-diagonal ladder elements for unit coupling amplitude."""
    n = np.arange(N, dtype=float)
    base = np.sqrt((N - n) * (n + 1))
    if Sideband(sideband) is Sideband.CARRIER:
        return base
    return base * np.sqrt(phonon_offset + n + 1)


def ladder_hamiltonian(cfg: ChainConfig, pulse: PulseSpec, phonon_offset=0) -> SweptHamiltonian:
    """Morris-Shore ladder for one pulse.

    BLUE: level n is ``|W_n>|m0+n>``. RED: level n is ``|W_{N-n}>|m0+n>``.
    CARRIER: level n is ``|W_n>`` with the phonon number a spectator.
    Coupling amplitude is g(t) for sidebands and Omega(t)/2 for the carrier.
    """
    N = cfg.N
    sb = pulse.sideband
    lam = ladder_couplings(N, sb, phonon_offset)
    C = sparse.diags(lam, 1, shape=(N + 1, N + 1))
    peak = peak_rabi(cfg, pulse) / 2 if sb is Sideband.CARRIER else peak_coupling(cfg, pulse)
    basis = make_basis(BasisKind.LADDER, N)
    return SweptHamiltonian(basis, C, np.arange(N + 1), peak, pulse, name=f"ladder-{sb.value}")


class StaticHamiltonian:
    """Time-independent Hamiltonian with the provider interface."""

    fastest_period = None

    def __init__(self, basis, matrix, name=""):
        self.basis = basis
        self.name = name
        self._H = sparse.csr_matrix(matrix, dtype=complex)
        self._dense = self._H.toarray() if basis.dim <= 600 else None

    def __call__(self, tau):
        return self._dense if self._dense is not None else self._H

    def apply(self, tau, psi):
        return (self._dense if self._dense is not None else self._H) @ psi


def single_ion_rotation(basis: Basis, ion, area, phase=0.0) -> StaticHamiltonian:
    """Resonant carrier rotation of one ion, run over a unit time interval.

    ``H = (area/2) (exp(i phase) sigma+ + h.c.)`` so that
    ``|0> -> cos(area/2)|0> - i exp(i phase) sin(area/2)|1>``.
    """
    if basis.kind is not BasisKind.FULL:
        raise DomainError("single-ion addressing needs a FULL basis")
    S = _full_raising(basis, [ion])
    X = 0.5 * area * np.exp(1j * phase) * sparse.kron(S, sparse.identity(basis.m_max + 1))
    return StaticHamiltonian(basis, X + X.conj().T, name=f"carrier-rotation-ion{ion}")


def _annihilation(M):
    return sparse.diags(np.sqrt(np.arange(1, M, dtype=float)), 1, shape=(M, M))


def _collective_raising(N):
    n = np.arange(N, dtype=float)
    return sparse.diags(np.sqrt((N - n) * (n + 1)), -1, shape=(N + 1, N + 1))


def _full_raising(basis: Basis, ions):
    """sum_{j in ions} sigma_j^+ on the internal FULL space, basis order."""
    N = basis.N
    configs = basis.configurations
    pos = {int(b): i for i, b in enumerate(configs)}
    rows, cols = [], []
    for j in ions:
        bit = 1 << (N - 1 - j)
        for i, b in enumerate(configs):
            b = int(b)
            if not b & bit:
                rows.append(pos[b | bit])
                cols.append(i)
    dim = len(configs)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim))


def collective_ld_hamiltonian(basis: Basis, cfg: ChainConfig, pulse: PulseSpec, ions=None):
    """Lamb-Dicke/RWA Hamiltonian on a SYMMETRIC or FULL basis.

    ``ions`` restricts addressing to a subset (0-based, FULL basis only);
    the coupling per addressed ion is g(t) = eta*Omega(t)/(2 sqrt N) as for
    whole-chain addressing.
    """
    sb = pulse.sideband
    M = basis.m_max + 1
    if basis.kind is BasisKind.SYMMETRIC:
        if ions is not None and sorted(ions) != list(range(basis.N)):
            raise DomainError("partial addressing needs a FULL basis")
        S = _collective_raising(basis.N)
        exc = basis.excitations
    elif basis.kind is BasisKind.FULL:
        ions = list(range(basis.N)) if ions is None else list(ions)
        S = _full_raising(basis, ions)
        mask = sum(1 << (basis.N - 1 - j) for j in ions)
        exc = np.repeat([bin(int(b) & mask).count("1") for b in basis.configurations], M)
    else:
        raise DomainError("use ladder_hamiltonian for LADDER bases")
    a = _annihilation(M)
    eye = sparse.identity(M)
    if sb is Sideband.BLUE:
        C, counts, peak = sparse.kron(S, a.T), exc, peak_coupling(cfg, pulse)
    elif sb is Sideband.RED:
        C, counts, peak = sparse.kron(S, a), basis.phonons, peak_coupling(cfg, pulse)
    else:
        C, counts, peak = sparse.kron(S, eye), exc, peak_rabi(cfg, pulse) / 2
    return SweptHamiltonian(basis, C, counts, peak, pulse, name=f"ld-{basis.kind.value}-{sb.value}")


def full_ld_rwa_hamiltonian(cfg: ChainConfig, pulse: PulseSpec, m_max=None, cap=DIMENSION_CAP):
    """Full 2^N x phonon Lamb-Dicke/RWA Hamiltonian (tridiagonal block form)."""
    basis = make_basis(BasisKind.FULL, cfg.N, cfg.m_max if m_max is None else m_max, cap=cap)
    return collective_ld_hamiltonian(basis, cfg, pulse)


@dataclass(frozen=True)
class Displacement:
    """``E = exp(i x (a + a^+))`` cropped to ``m_max + 1`` phonon states.

    The time-dependent operator is ``D(t) = R(t) E R(t)^+`` with
    ``R(t) = diag(exp(i nu t m))``.
    """

    x: float
    m_max: int
    buffer: int
    E: np.ndarray = field(repr=False)
    defect: float

    def at(self, nuT, tau):
        r = np.exp(1j * nuT * tau * np.arange(self.m_max + 1))
        return r[:, None] * self.E * r.conj()[None, :]


def displacement_operator(x, m_max, b=10, tol=1e-10) -> Displacement:
    """Displacement ``exp(i x (a + a^+))`` on a buffered Fock space.

    Computed by diagonalising the truncated position operator on
    ``m_max + 1 + b`` states, then cropped to ``m_max + 1``. The unitarity
    defect is measured on the interior block ``0..m_max - b``; above ``tol``
    a :class:`TruncationError` is raised.
    """
    if x < 0:
        raise DomainError("x must be >= 0")
    if b < 5:
        raise DomainError("buffer must be >= 5")
    M = m_max + 1
    size = M + b
    off = np.sqrt(np.arange(1, size, dtype=float))
    w, V = eigh_tridiagonal(np.zeros(size), off)
    E = ((V * np.exp(1j * x * w)) @ V.T)[:M, :M]
    inner = max(1, M - b)
    G = E[:, :inner].conj().T @ E[:, :inner]
    defect = float(np.max(np.abs(G - np.eye(inner))))
    if defect > tol:
        raise TruncationError(
            f"displacement unitarity defect {defect:.2e} > {tol:.0e}; increase the buffer"
        )
    return Displacement(float(x), int(m_max), int(b), np.ascontiguousarray(E), defect)


def displacement_element(x, m, n):
    """``<m| exp(i x (a + a^+)) |n>`` from the associated-Laguerre closed form."""
    from scipy.special import eval_genlaguerre, gammaln

    lo, hi = min(m, n), max(m, n)
    alpha = 1j * x
    # <m|D(alpha)|n> for m >= n; the other triangle follows from alpha -> -conj(alpha)
    a = alpha if m >= n else -np.conj(alpha)
    pref = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)))
    return pref * a ** (hi - lo) * np.exp(-x * x / 2) * eval_genlaguerre(lo, hi - lo, x * x)


@numba.njit(cache=True)
def _beyond_rhs(psi, E, jp, r, cp, n_int, M):
    out = np.zeros(n_int * M, np.complex128)
    Y = np.empty(M, np.complex128)
    A = np.empty(M, np.complex128)
    B = np.empty(M, np.complex128)
    cm = np.conj(cp)
    for n in range(n_int):
        for k in range(M):
            Y[k] = psi[n * M + k] * np.conj(r[k])
        for m in range(M):
            sa = 0j
            sb = 0j
            for k in range(M):
                e = E[k, m]
                sa += Y[k] * e
                sb += Y[k] * np.conj(e)
            A[m] = sa * r[m]
            B[m] = sb * r[m]
        if n < n_int - 1:
            c = cp * jp[n]
            for m in range(M):
                out[(n + 1) * M + m] += c * A[m]
        if n > 0:
            c = cm * jp[n - 1]
            for m in range(M):
                out[(n - 1) * M + m] += c * B[m]
    return out


class BeyondRWAHamiltonian:
    """COM Hamiltonian without Lamb-Dicke or vibrational RWA.

    ``H = (Omega/2) [exp(i Phi) J+ (x) D(t) + h.c.]`` on the SYMMETRIC basis
    with ``Phi = +-(integral of delta) -+ nu t`` (upper signs blue) and
    ``D(t)`` the displacement with ``x = eta / sqrt(N)``.
    """

    def __init__(self, cfg: ChainConfig, pulse: PulseSpec):
        if pulse.sideband is Sideband.CARRIER:
            raise DomainError("carrier pulses are only modelled in the LD/RWA tiers")
        # m_max >= N + buffer is the accurate regime; smaller cutoffs are
        # allowed so that convergence audits can demonstrate starvation
        if cfg.m_max < cfg.N:
            raise ConfigError(f"m_max = {cfg.m_max} must be >= N = {cfg.N}", "m_max")
        self.cfg = cfg
        self.pulse = pulse
        self.basis = make_basis(BasisKind.SYMMETRIC, cfg.N, cfg.m_max)
        self.disp = displacement_operator(cfg.eta / math.sqrt(cfg.N), cfg.m_max, max(cfg.buffer, 5))
        self.omega0T = peak_rabi(cfg, pulse)
        self._sign = 1.0 if pulse.sideband is Sideband.BLUE else -1.0
        n = np.arange(cfg.N, dtype=float)
        self._jp = np.sqrt((cfg.N - n) * (n + 1))
        self._m = np.arange(cfg.m_max + 1)

    @property
    def fastest_period(self):
        return 2 * math.pi / self.cfg.nuT

    def phase(self, tau):
        return self._sign * (_chirp_integral(self.pulse, tau) - self.cfg.nuT * tau)

    def _coefficient(self, tau):
        return 0.5 * self.omega0T / math.cosh(tau) * np.exp(1j * self.phase(tau))

    def __call__(self, tau):
        J = _collective_raising(self.cfg.N).toarray()
        X = self._coefficient(tau) * np.kron(J, self.disp.at(self.cfg.nuT, tau))
        return X + X.conj().T

    def apply(self, tau, psi):
        r = np.exp(1j * self.cfg.nuT * tau * self._m)
        return _beyond_rhs(
            np.ascontiguousarray(psi, dtype=np.complex128), self.disp.E, self._jp, r,
            complex(self._coefficient(tau)), self.cfg.N + 1, self.cfg.m_max + 1,
        )


def beyond_rwa_hamiltonian(cfg: ChainConfig, pulse: PulseSpec) -> BeyondRWAHamiltonian:
    return BeyondRWAHamiltonian(cfg, pulse)


def hermiticity_residual(H, tau):
    M = H(tau)
    if sparse.issparse(M):
        return float(sparse.linalg.norm(M - M.conj().T))
    return float(np.linalg.norm(M - M.conj().T))


@dataclass(frozen=True)
class AdiabaticPath:
    """Eigenvalue branch followed from a basis state through one pulse.

    ``sign`` is the product of the eigenvector signs on the start and end
    basis states after continuous sign fixing, so the transfer amplitude is
    approximately ``sign * exp(-i * integral(E))``.

    ``correction_fn``, when available, is the leading nonadiabatic energy
    shift ``sum_m |<m|dH/dtau|k>|^2 / (E_k - E_m)^3``. Its integral removes
    the O(1/T) part of the difference between the adiabatic prediction and
    the propagated phase.
    """

    index: int
    start: int
    end: int
    sign: int
    span: tuple
    energy_fn: object = field(repr=False)
    correction_fn: object = field(default=None, repr=False)

    def energy(self, tau):
        return self.energy_fn(tau)

    def phase_correction(self):
        if self.correction_fn is None:
            return 0.0
        return dynamical_phase(self.correction_fn, *self.span)

    def transfer_phase(self, corrected=True):
        xi = dynamical_phase(self.energy_fn, *self.span)
        if corrected:
            xi += self.phase_correction()
        return -xi + (math.pi if self.sign < 0 else 0.0)


def follow_adiabatic_state(matrix_fn, start, span, samples=4001, min_overlap=0.9,
                           derivative_fn=None) -> AdiabaticPath:
    """Follow the eigenstate of a small real-symmetric H(tau) that starts on ``start``.

    The branch is picked at ``span[0]`` as the eigenvector with the largest
    weight on the basis state ``start`` and then identified by its rank in
    the sorted spectrum, which is exact while the spectrum stays simple (as
    for an irreducible tridiagonal ladder). Continuity is checked on a grid.
    """
    taus = np.linspace(span[0], span[1], samples)
    w, V = np.linalg.eigh(np.real(matrix_fn(taus[0])))
    k = int(np.argmax(np.abs(V[start, :])))
    v_prev = V[:, k]
    v_first = v_prev
    for t in taus[1:]:
        w, V = np.linalg.eigh(np.real(matrix_fn(t)))
        v = V[:, k]
        ov = float(v_prev @ v)
        if abs(ov) < min_overlap:
            raise TrackingError(f"eigenvector overlap {abs(ov):.3f} at tau={t:.4f}")
        if ov < 0:
            v = -v
        v_prev = v
    end = int(np.argmax(np.abs(v_prev)))
    sign = int(np.sign(v_first[start]) * np.sign(v_prev[end]))

    def energy(tau, k=k):
        return float(np.linalg.eigvalsh(np.real(matrix_fn(tau)))[k])

    correction = None
    if derivative_fn is not None:

        def correction(tau, k=k):
            w, V = np.linalg.eigh(np.real(matrix_fn(tau)))
            M = V.T @ np.real(derivative_fn(tau)) @ V[:, k]
            gap = w[k] - np.delete(w, k)
            return float(np.sum(np.delete(M, k) ** 2 / gap**3))

    return AdiabaticPath(k, int(start), end, sign, (float(span[0]), float(span[1])), energy, correction)


def dynamical_phase(energy, t_start, t_stop, epsabs=1e-11, epsrel=1e-11):
    """Integral of an eigenvalue trace (hbar = 1) by adaptive quadrature.

    ``energy`` may be a callable or a constant.
    """
    if not callable(energy):
        return float(energy) * (t_stop - t_start)
    val, _ = integrate.quad(energy, t_start, t_stop, limit=500, epsabs=epsabs, epsrel=epsrel)
    return float(val)
