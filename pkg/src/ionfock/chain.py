"""Static properties of a linear ion chain.

Positions are dimensionless, in units of the length scale
``l = (e^2 / 4 pi eps0 M nu^2)^(1/3)``; frequencies are in units of the
axial trap frequency ``nu``.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy import constants

from .errors import ConvergenceError, DomainError, NumericalError

__all__ = [
    "LaserGeometry",
    "NormalModeData",
    "lamb_dicke_parameter",
    "length_scale",
    "equilibrium_positions",
    "normal_modes",
    "sideband_spectrum",
    "laser_phases",
]


@dataclass(frozen=True)
class LaserGeometry:
    """Laser and trap parameters in SI units.

    Attributes
    ----------
    k : float
        Laser wavenumber (1/m).
    theta : float
        Angle between the beam and the trap axis (rad), in [0, pi/2].
    phi_L : float
        Laser phase (rad).
    mass : float
        Ion mass (kg).
    nu : float
        Axial trap angular frequency (rad/s).
    """

    k: float
    theta: float
    phi_L: float
    mass: float
    nu: float

    def __post_init__(self):
        for name in ("k", "theta", "phi_L", "mass", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.k <= 0 or self.mass <= 0 or self.nu <= 0:
            raise DomainError("k, mass and nu must be positive")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise DomainError("theta must lie in [0, pi/2]")

    @classmethod
    def from_wavelength(cls, wavelength, theta, mass, nu_hz, phi_L=0.0):
        return cls(2 * math.pi / wavelength, theta, phi_L, mass, 2 * math.pi * nu_hz)


@dataclass(frozen=True)
class NormalModeData:
    """Axial normal modes of an N-ion chain.

    ``kappa[p, j]`` is the participation of ion ``j`` in mode ``p``; rows are
    orthonormal and the first row (centre-of-mass) is all-positive.
    """

    N: int
    positions: np.ndarray
    frequencies: np.ndarray
    kappa: np.ndarray


def lamb_dicke_parameter(geom: LaserGeometry) -> float:
    """Single-ion Lamb-Dicke parameter sqrt(hbar k^2 cos^2 theta / 2 M nu)."""
    c = math.cos(geom.theta)
    # cos(pi/2) is 6e-17 in floating point, not zero
    if abs(c) < 1e-15:
        return 0.0
    return math.sqrt(constants.hbar * geom.k**2 * c**2 / (2 * geom.mass * geom.nu))


def length_scale(mass, nu):
    """Characteristic inter-ion distance (m) for singly charged ions."""
    return (constants.e**2 / (4 * math.pi * constants.epsilon_0 * mass * nu**2)) ** (1 / 3)


def _gradient(u):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d**2, axis=1)


def _hessian(u):
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    h = -2.0 / d**3
    np.fill_diagonal(h, 1.0 + 2.0 * np.sum(1.0 / d**3, axis=1))
    return h


def _potential(u):
    d = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * np.sum(u**2) + np.sum(1.0 / d[iu])


def equilibrium_positions(N: int, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Equilibrium positions of N ions in a harmonic well.

    Minimises ``sum u_j^2/2 + sum_{i<j} 1/|u_i - u_j|`` by damped Newton
    iteration from an equally spaced seed. The result is symmetrised so that
    it is exactly antisymmetric under reflection.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if N == 1:
        return np.zeros(1)
    u = (np.arange(1, N + 1) - (N + 1) / 2) * 1.1
    for _ in range(max_iter):
        grad = _gradient(u)
        gnorm = np.linalg.norm(grad)
        if gnorm < tol:
            break
        step = np.linalg.solve(_hessian(u), grad)
        e0 = _potential(u)
        lam = 1.0
        while lam > 1e-8:
            trial = u - lam * step
            if np.all(np.diff(trial) > 0) and _potential(trial) <= e0 + 1e-14 * abs(e0):
                break
            lam *= 0.5
        u = trial
        u = 0.5 * (u - u[::-1])
    else:
        raise ConvergenceError(
            f"equilibrium search for N={N} did not converge in {max_iter} iterations "
            f"(|grad| = {np.linalg.norm(_gradient(u)):.3e})"
        )
    return u


def normal_modes(N: int) -> NormalModeData:
    """Axial normal modes of the N-ion chain, sorted by frequency."""
    u = equilibrium_positions(N)
    evals, evecs = np.linalg.eigh(_hessian(u))
    if evals[0] <= 0:
        raise NumericalError("non-positive Hessian eigenvalue at equilibrium")
    freqs = np.sqrt(evals / evals[0])
    kappa = evecs.T.copy()
    # COM row all-positive; other rows: last ion positive
    for p in range(N):
        ref = kappa[p].sum() if p == 0 else kappa[p, -1]
        if ref < 0:
            kappa[p] *= -1
    return NormalModeData(N=N, positions=u, frequencies=freqs, kappa=kappa)


def sideband_spectrum(modes: NormalModeData, order: int, include_com: bool = False) -> np.ndarray:
    """Relative detunings of the order-``order`` motional sidebands.

    Every multiset of ``order`` modes with independent signs gives a sideband
    at ``sum s_i nu_{p_i}`` from the carrier. Returned values are
    ``|combination - nu| / nu``, sorted, with the addressed COM blue sideband
    and carrier-coincident combinations removed. By default the COM mode is
    excluded from the multisets; ``include_com=True`` lets every mode appear.
    """
    if order not in (2, 3):
        raise DomainError("order must be 2 or 3")
    first = 0 if include_com else 1
    pool = range(first, modes.N)
    out = []
    for combo in itertools.combinations_with_replacement(pool, order):
        f = modes.frequencies[list(combo)]
        for signs in itertools.product((1.0, -1.0), repeat=order):
            c = float(np.dot(signs, f))
            if abs(c - 1.0) < 1e-9 or abs(c) < 1e-9:
                continue
            out.append(abs(c - 1.0))
    return np.array(sorted(out))


def laser_phases(positions, geom: LaserGeometry, symmetric_gauge: bool = False) -> np.ndarray:
    """Laser phase at each ion's equilibrium position.

    ``phi_j = phi_L - k x_j cos(theta)`` with ``x_j = u_j * l``. With
    ``symmetric_gauge`` the laser phase is chosen so that the phases sum to 0.
    """
    u = np.asarray(positions, dtype=float)
    x = u * length_scale(geom.mass, geom.nu)
    shift = geom.k * x * math.cos(geom.theta)
    phi_L = shift.mean() if symmetric_gauge else geom.phi_L
    return phi_L - shift
