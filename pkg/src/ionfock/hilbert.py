"""Bases, Dicke states and the Morris-Shore block structure.

Ordering convention for every basis: excitation-count major, then
internal configuration, then phonon number minor. Internal configurations of
N ions are integers whose most significant bit is ion 1, so within one
excitation count the ascending integer order is the lexicographic order of
the bit strings.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
import csv
import math

import numpy as np

from .errors import CapacityError, DomainError

DIMENSION_CAP = 2_000_000


class BasisKind(str, Enum):
    LADDER = "LADDER"
    SYMMETRIC = "SYMMETRIC"
    FULL = "FULL"


@dataclass(frozen=True)
class Basis:
    """Labelled basis of one of the three model tiers.

    ``LADDER`` has N+1 states; index n counts both ionic excitations (Dicke
    level) and phonons. ``SYMMETRIC`` is Dicke level (0..N) times phonon
    number (0..m_max). ``FULL`` is all 2^N internal configurations times
    phonon number.
    """

    kind: BasisKind
    N: int
    m_max: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if self.m_max < 0:
            raise DomainError("m_max must be >= 0")

    @property
    def n_phonon(self):
        return 1 if self.kind is BasisKind.LADDER else self.m_max + 1

    @property
    def n_internal(self):
        if self.kind is BasisKind.FULL:
            return 2**self.N
        return self.N + 1

    @property
    def dim(self):
        return self.n_internal * self.n_phonon

    @cached_property
    def configurations(self):
        """Internal configurations (bit masks) in basis order; FULL only."""
        if self.kind is not BasisKind.FULL:
            raise DomainError("configurations are defined for FULL bases only")
        return np.array(sorted(range(2**self.N), key=lambda b: (bin(b).count("1"), b)))

    @cached_property
    def _config_index(self):
        return {int(b): i for i, b in enumerate(self.configurations)}

    @cached_property
    def excitations(self):
        """Ionic excitation count of every basis state."""
        if self.kind is BasisKind.FULL:
            per = np.array([bin(int(b)).count("1") for b in self.configurations])
        else:
            per = np.arange(self.N + 1)
        return np.repeat(per, self.n_phonon)

    @cached_property
    def phonons(self):
        """Phonon number of every basis state."""
        if self.kind is BasisKind.LADDER:
            return np.arange(self.N + 1)
        return np.tile(np.arange(self.m_max + 1), self.n_internal)

    def index(self, internal, phonon=0):
        """Basis index of (internal, phonon).

        ``internal`` is the Dicke level for LADDER/SYMMETRIC and either a bit
        mask or a string such as ``"101"`` for FULL.
        """
        if self.kind is BasisKind.FULL:
            if isinstance(internal, str):
                internal = int(internal, 2)
            try:
                i = self._config_index[int(internal)]
            except KeyError:
                raise DomainError(f"no configuration {internal!r} for N={self.N}") from None
        else:
            i = int(internal)
            if not 0 <= i <= self.N:
                raise DomainError(f"Dicke level {i} outside 0..{self.N}")
        if self.kind is BasisKind.LADDER:
            return i
        if not 0 <= phonon <= self.m_max:
            raise DomainError(f"phonon number {phonon} outside 0..{self.m_max}")
        return i * self.n_phonon + phonon

    def label(self, index):
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} outside basis of dimension {self.dim}")
        if self.kind is BasisKind.LADDER:
            return f"n{index}"
        i, m = divmod(index, self.n_phonon)
        if self.kind is BasisKind.SYMMETRIC:
            return f"W{i}_m{m}"
        return f"{int(self.configurations[i]):0{self.N}b}_m{m}"

    def labels(self):
        return [self.label(i) for i in range(self.dim)]


def make_basis(kind, N, m_max=0, cap=DIMENSION_CAP) -> Basis:
    basis = Basis(BasisKind(kind), int(N), int(m_max))
    if basis.dim > cap:
        raise CapacityError(f"basis dimension {basis.dim} exceeds cap {cap}")
    return basis


@dataclass
class StateVector:
    basis: Basis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise DomainError(
                f"amplitude vector of shape {self.amplitudes.shape} does not match "
                f"basis dimension {self.basis.dim}"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise DomainError("non-finite amplitude")

    @classmethod
    def basis_state(cls, basis, internal, phonon=0):
        amp = np.zeros(basis.dim, complex)
        amp[basis.index(internal, phonon)] = 1.0
        return cls(basis, amp)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def copy(self):
        return StateVector(self.basis, self.amplitudes.copy())

    def __getitem__(self, key):
        if isinstance(key, tuple):
            return self.amplitudes[self.basis.index(*key)]
        return self.amplitudes[self.basis.index(key)]


def dicke_state(N, n) -> StateVector:
    """Symmetric Dicke state with n of N ions excited (internal space only)."""
    if not 0 <= n <= N:
        raise DomainError(f"Dicke level {n} outside 0..{N}")
    basis = make_basis(BasisKind.FULL, N, 0)
    counts = basis.excitations
    amp = np.where(counts == n, 1.0 / math.sqrt(math.comb(N, n)), 0.0)
    return StateVector(basis, amp)


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """Overlap fidelity |<phi|psi>|^2."""
    if psi.basis != phi.basis:
        raise DomainError("states live in different bases")
    return float(min(1.0, abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2))


def populations(psi: StateVector, marginal="phonon") -> np.ndarray:
    """Marginal population over phonon number or ionic excitation count.

    For a LADDER basis both marginals are the level populations.
    """
    p = np.abs(psi.amplitudes) ** 2
    basis = psi.basis
    if marginal == "phonon":
        key, size = basis.phonons, (basis.N + 1 if basis.kind is BasisKind.LADDER else basis.m_max + 1)
    elif marginal == "excitation":
        key, size = basis.excitations, basis.N + 1
    else:
        raise DomainError(f"unknown marginal {marginal!r}")
    return np.bincount(key, weights=p, minlength=size)


def symmetric_embedding(basis: Basis):
    """Isometry from the SYMMETRIC basis into a FULL basis (dense, FULL x SYMMETRIC)."""
    if basis.kind is not BasisKind.FULL:
        raise DomainError("embedding target must be a FULL basis")
    N, M = basis.N, basis.m_max + 1
    counts = np.array([bin(int(b)).count("1") for b in basis.configurations])
    iso = np.zeros((basis.dim, (N + 1) * M))
    for i, c in enumerate(counts):
        w = 1.0 / math.sqrt(math.comb(N, c))
        for m in range(M):
            iso[i * M + m, c * M + m] = w
    return iso


@dataclass(frozen=True)
class CouplingBlocks:
    """Off-diagonal blocks V_{n,n+1} of the blue-sideband Hamiltonian (g = 1).

    ``blocks[n]`` has shape C(N,n) x C(N,n+1); ``multipliers[n] = n`` so that
    the diagonal block is ``multipliers[n] * delta * identity``.
    """

    N: int
    blocks: tuple
    multipliers: tuple


def coupling_blocks(N) -> CouplingBlocks:
    if N < 1:
        raise DomainError("N must be >= 1")
    by_count = [[] for _ in range(N + 1)]
    for b in sorted(range(2**N)):
        by_count[bin(b).count("1")].append(b)
    blocks = []
    for n in range(N):
        rows, cols = by_count[n], by_count[n + 1]
        col_index = {b: c for c, b in enumerate(cols)}
        V = np.zeros((len(rows), len(cols)))
        for r, b in enumerate(rows):
            for j in range(N):
                bit = 1 << j
                if not b & bit:
                    V[r, col_index[b | bit]] = math.sqrt(n + 1)
        blocks.append(V)
    return CouplingBlocks(N, tuple(blocks), tuple(range(N + 1)))


def check_ms_condition(blocks: CouplingBlocks) -> float:
    """Largest Frobenius norm of [V_{n-1,n}^+ V_{n-1,n}, V_{n,n+1} V_{n,n+1}^+]."""
    worst = 0.0
    for n in range(1, len(blocks.blocks)):
        lo, hi = blocks.blocks[n - 1], blocks.blocks[n]
        A = lo.conj().T @ lo
        B = hi @ hi.conj().T
        worst = max(worst, float(np.linalg.norm(A @ B - B @ A)))
    return worst


def ms_coupling(N, n, g=1.0):
    """Coupling between levels n and n+1 of the Morris-Shore ladder."""
    if not 0 <= n <= N - 1:
        raise DomainError(f"level {n} outside 0..{N - 1}")
    return g * (n + 1) * math.sqrt(N - n)


def write_population_csv(path, times, states, basis: Basis, extra=None, time_name="time"):
    """Write one row per time: time, |amplitude|^2 per basis label, extras.

    ``states`` is an array of shape (len(times), basis.dim); ``extra`` maps
    column names to per-row values.
    """
    extra = extra or {}
    header = [time_name] + [f"P_{lab}" for lab in basis.labels()] + list(extra)
    probs = np.abs(np.asarray(states)) ** 2
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, t in enumerate(times):
            row = [repr(float(t))] + [repr(float(x)) for x in probs[i]]
            row += [repr(float(v[i])) for v in extra.values()]
            writer.writerow(row)
