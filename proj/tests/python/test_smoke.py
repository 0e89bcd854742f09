import math

import pytest

import segwave as sw

SMALL = """
[phenotypes]
alpha = 10, 0
mu = 1e-4, 2e-4
omega = 1, 2
p_bar = 4e4

[grid]
length = 3
dx = 0.1
tau = 1e-4

[initial]
amplitude = 38800, 19400
decay = 6e-2
boundaries = 0, 1, 3

[run]
t_end = 0.05
snapshot_times = 0, 0.05
track_interval = 0.01
levels = 0.2
fit_start = 0
dt_max = 1e-4
"""


def baseline3():
    return sw.PhenotypeSet([10, 0, 0], [1e-4, 2e-4, 3e-4], [1, 2, 3], 4e4)


def test_core_examples():
    params = sw.PhenotypeSet([1, 0], [1e-4, 2e-4], [1, 2], 4e4)
    assert sw.pressure(sw.FieldState([[1.0], [2.0]]), params) == [5.0]
    assert sw.growth(0.0, 4e4) == pytest.approx(math.atan(0.1))
    grid = sw.GridSpec(150, 0.1, 1e-4)
    assert sw.gamma_from_mu(baseline3(), grid)[0] == pytest.approx(0.08)


def test_errors_map_to_exceptions():
    with pytest.raises(sw.ConfigError):
        sw.GridSpec(1.0, 0.3)
    with pytest.raises(sw.DomainError):
        sw.growth(1.0, 0.0)
    with pytest.raises(sw.ConfigError):
        sw.parse_config(SMALL + "colour = red\n")
    assert issubclass(sw.ConvergenceError, sw.NumericalError)


def test_wave_analytics():
    params = baseline3()
    p = sw.interface_pressures(0.42, [1.0, 1.0], params)
    assert p[0] == pytest.approx(129.61, rel=1e-4)
    z = sw.interface_positions(0.42, [1.0, 1.0], params)
    assert z[0] == pytest.approx(0.01808, rel=1e-3)
    assert sw.density_jump_ratios(params) == pytest.approx([0.5, 2 / 3])
    assert sw.speed_from_p0(p[0], [1.0, 1.0], params) == pytest.approx(0.42, rel=1e-12)
    assert sw.shoot_rear(0.3, params) > sw.shoot_rear(0.5, params)


def test_pde_and_lattice_runs():
    config = sw.parse_config(SMALL)
    assert sw.parse_config(config.canonical()).hash() == config.hash()
    snapshots, summary = sw.simulate_pde(config)
    assert [s.t for s in snapshots][0] == 0.0
    assert abs(summary["mass_drift"][1]) < 1e-12
    assert summary["clipped_mass"] == 0.0

    start = sw.init_lattice(config.initial, config.grid, config.params)
    a = sw.ibm_run(config.params, config.grid, start, 7, 0.01, [0.01])
    b = sw.ibm_run(config.params, config.grid, start, 7, 0.01, [0.01])
    assert a[0].counts == b[0].counts
    assert a[0].step == 100
    assert a[0].total(1) == start.total(1)


def test_presets_are_available():
    names = sw.preset_names()
    assert "fig3-pde" in names and "fig6-bottom" in names
    assert sw.load_preset("fig6-top").params.omega == [1, 2, 3, 4]
