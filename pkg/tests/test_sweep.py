import csv

import numpy as np
import pytest

from ionfock.errors import ConfigError
from ionfock.hamiltonians import ChainConfig, PulseSpec
from ionfock.sweep import Axis, SweepGrid, SweepResult, fidelity_map


def small_grid(**kw):
    return SweepGrid(Axis(0.5, 6.0, 3), Axis(0.5, 6.0, 3), ChainConfig(2, 0.1, 1.0, **kw), PulseSpec(delta0T=1.0))


def test_axis_validation():
    with pytest.raises(ConfigError):
        Axis(0, 1, 0)
    assert Axis(1, 2, 1).values() == pytest.approx([1.0])


def test_result_identical_for_any_job_count():
    grid = small_grid()
    a = fidelity_map(grid, jobs=1)
    b = fidelity_map(grid, jobs=3)
    assert np.array_equal(a.fidelity, b.fidelity)
    assert a.fidelity.shape == (3, 3)
    assert a.converged.all()


def test_failed_cells_are_flagged():
    grid = SweepGrid(Axis(0.0, 1.0, 2), Axis(1.0, 1.0, 1), ChainConfig(2, 0.1, 1.0, tier="BEYOND_RWA", m_max=6),
                     PulseSpec(delta0T=1.0, window=2.0))
    res = fidelity_map(grid)
    assert res.fidelity[0, 0] == 0.0
    assert not res.converged[0, 0]
    assert (0, 0) in res.errors and "ConfigError" in res.errors[(0, 0)]
    assert (1, 0) not in res.errors


def test_edge_population_marks_unconverged():
    grid = SweepGrid(Axis(3.0, 3.0, 1), Axis(2.0, 2.0, 1), ChainConfig(2, 0.1, 1.0, m_max=2, tier="FULL_LD_RWA"),
                     PulseSpec(delta0T=1.0))
    res = fidelity_map(grid)
    assert not res.converged[0, 0]


def test_neglog_ceiling_and_csv(tmp_path):
    grid = small_grid()
    res = SweepResult(grid, np.array([[1.0, 0.99, 0.0]] * 3), np.ones((3, 3), bool), {}, ceiling=12)
    assert res.neglog10_infidelity[0] == pytest.approx([12.0, 2.0, 0.0])
    res.to_csv(tmp_path / "s.csv")
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows[0] == ["g0T", "delta0T", "fidelity", "neglog10_infidelity", "converged"]
    assert len(rows) == 10
    assert float(rows[2][1]) == pytest.approx(3.25)


def test_quadrants():
    grid = SweepGrid(Axis(0, 1, 4), Axis(0, 1, 4), ChainConfig(2, 0.1, 1.0))
    f = np.zeros((4, 4))
    f[2:, 2:] = 1.0
    bl, tr = SweepResult(grid, f, np.ones((4, 4), bool), {}).quadrant_means()
    assert (bl, tr) == (0.0, 1.0)


def test_fixed_nuT_is_used():
    grid = SweepGrid(Axis(1, 2, 2), Axis(1, 1, 1), ChainConfig(2, 0.1, 1.0), nuT=50.0)
    cfg, pulse = grid.cell_inputs(2.0, 1.0)
    assert cfg.nuT == 50.0 and cfg.g0T == 2.0 and pulse.delta0T == 1.0
    cfg, _ = SweepGrid(Axis(1, 2, 2), Axis(1, 1, 1), ChainConfig(2, 0.1, 1.0)).cell_inputs(2.0, 1.0)
    assert cfg.nuT == pytest.approx(40 * np.pi)
