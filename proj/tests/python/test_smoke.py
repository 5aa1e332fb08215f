import math

import numpy as np
import pytest

import gplab


def test_square_well_scattering_length():
    V = gplab.RadialPotential.square_well(2.0, 1.0, 1e-3)
    sol = gplab.solve_zero_energy(V, 8.0)
    exact = 1.0 - math.tanh(1.0)
    assert abs(sol.a - exact) / exact < 1e-4
    assert abs(gplab.integral_identity_length(sol) - sol.a) < 1e-6
    assert abs(gplab.scattering_length_variational(V) - exact) / exact < 1e-4


def test_harmonic_ground_state():
    grid = gplab.Grid.cube(1, 128, 16.0)
    gs = gplab.ground_state(grid, trap=1.0, width=1.5)
    assert abs(gs["energy"] - 1.0) < 1e-6
    phi = np.asarray(gs["phi"])
    assert phi.shape == (128,)
    assert abs(np.sum(np.abs(phi) ** 2) * grid.cell_volume() - 1.0) < 1e-12


def test_sector_dimension():
    assert gplab.sector_dimension(8, 3) == 120


def test_bad_config_raises():
    with pytest.raises(ValueError):
        gplab.parse_config("[run]\ncommand = nope\n")


def test_run_scatter(tmp_path):
    report = gplab.run("[run]\ncommand = scatter\n", str(tmp_path))
    assert report["schema"] == "gplab-report-1"
    assert report["command"] == "scatter"
    assert all(c["passed"] for c in report["checks"])
    assert (tmp_path / "report.json").exists()
