"""Fidelity landscapes over (g0T, delta0T) grids."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import math

import numpy as np

from .errors import ConfigError, IonFockError
from .hamiltonians import ChainConfig, PulseSpec, Sideband
from .integrator import PropagationSettings
from .protocols import fock_via_blue

DEFAULT_CEILING = 12.0
EDGE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("axis count must be >= 1", "count")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("axis limits must be finite", "start")

    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepGrid:
    """Row-major (g0T outer, delta0T inner) grid around a template run.

    With ``nuT=None`` every cell uses the default trap frequency
    ``nuT = 20 pi g0T``; otherwise ``nuT`` is held fixed.
    """

    g0T: Axis
    delta0T: Axis
    config: ChainConfig
    pulse: PulseSpec = field(default_factory=lambda: PulseSpec(delta0T=1.0))
    nuT: float = None

    @classmethod
    def default(cls, config, pulse=None, count=30):
        return cls(Axis(0.5, 15.0, count), Axis(0.5, 15.0, count), config,
                   pulse or PulseSpec(delta0T=1.0))

    def cells(self):
        return [(g, d) for g in self.g0T.values() for d in self.delta0T.values()]

    @property
    def shape(self):
        return (self.g0T.count, self.delta0T.count)

    def cell_inputs(self, g, d):
        nu = self.nuT if self.nuT is not None else 20 * math.pi * g
        cfg = self.config.with_(g0T=float(g), nuT=nu if nu > 0 else None)
        return cfg, replace(self.pulse, delta0T=float(d), sideband=Sideband.BLUE, Omega0T=None)


@dataclass
class SweepResult:
    grid: SweepGrid
    fidelity: np.ndarray
    converged: np.ndarray
    errors: dict
    ceiling: float = DEFAULT_CEILING

    @property
    def neglog10_infidelity(self):
        inf = 1.0 - self.fidelity
        out = np.full(inf.shape, float(self.ceiling))
        ok = inf >= 10.0 ** (-self.ceiling)
        out[ok] = -np.log10(inf[ok])
        return out

    def quadrant_means(self):
        """Mean fidelity of the bottom-left and top-right quadrants (low/high g and delta)."""
        G, D = self.shape
        bl = self.fidelity[: G // 2, : D // 2]
        tr = self.fidelity[(G + 1) // 2:, (D + 1) // 2:]
        return float(bl.mean()), float(tr.mean())

    @property
    def shape(self):
        return self.grid.shape

    def rows(self):
        nl = self.neglog10_infidelity
        for (g, d), f, c, q in zip(self.grid.cells(), self.fidelity.ravel(), self.converged.ravel(),
                                   nl.ravel()):
            yield float(g), float(d), float(f), float(q), bool(c)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["g0T", "delta0T", "fidelity", "neglog10_infidelity", "converged"])
            for g, d, f, q, c in self.rows():
                w.writerow([repr(g), repr(d), repr(f), repr(q), int(c)])

    def to_dict(self):
        return {
            "shape": list(self.shape),
            "g0T": [float(x) for x in self.grid.g0T.values()],
            "delta0T": [float(x) for x in self.grid.delta0T.values()],
            "fidelity": self.fidelity.tolist(),
            "converged": self.converged.tolist(),
            "errors": {f"{i},{j}": msg for (i, j), msg in sorted(self.errors.items())},
        }


def _run_cell(args):
    grid, g, d, settings = args
    try:
        cfg, pulse = grid.cell_inputs(g, d)
        rep = fock_via_blue(cfg, pulse, settings, keep_trajectory=False, compute_phase=False)
    except (IonFockError, ValueError, ArithmeticError, MemoryError) as exc:
        return 0.0, False, f"{type(exc).__name__}: {exc}"
    marg = rep.phonon_marginal()
    edge = float(marg[-1]) if rep.final_state.basis.kind.value != "LADDER" else 0.0
    return rep.fidelity, edge < EDGE_TOLERANCE, None


def fidelity_map(grid: SweepGrid, settings: PropagationSettings = None, jobs=1,
                 ceiling=DEFAULT_CEILING) -> SweepResult:
    """Run ``fock_via_blue`` in every cell.

    Results are placed by cell index, so the output does not depend on
    ``jobs``. A failing cell gets fidelity 0, ``converged=False`` and an
    entry in ``errors``; the sweep carries on. ``converged`` is also False
    when the final population in the top phonon level exceeds 1e-6.
    """
    settings = settings or PropagationSettings()
    tasks = [(grid, g, d, settings) for g, d in grid.cells()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        out = [_run_cell(t) for t in tasks]
    G, D = grid.shape
    fid = np.array([o[0] for o in out], float).reshape(G, D)
    conv = np.array([o[1] for o in out], bool).reshape(G, D)
    errors = {divmod(i, D): o[2] for i, o in enumerate(out) if o[2] is not None}
    return SweepResult(grid, fid, conv, errors, ceiling)
