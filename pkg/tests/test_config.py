import math

import numpy as np
import pytest

from uscpair.config import (
    ConfigError,
    layer_configs,
    load,
    parse_config_text,
    parse_kappa_grid,
    parse_overrides,
    resolve,
)
from uscpair.presets import PRESETS, preset

T_LAMBDA = 2.0 * math.pi * 6.0 * 54.6
T_VEE = 2.0 * math.pi * 6.0 * 13.0


def test_presets_are_fresh_copies():
    one = preset("fig1b")
    one["kappa"] = 123.0
    assert preset("fig1b")["kappa"] == 1e-4
    with pytest.raises(KeyError, match="fig3a"):
        preset("nope")  # error message lists what exists
    assert set(PRESETS) == {"fig1b", "fig1c", "fig3a", "fig3b"}


def test_parse_config_text_accepts_comments_and_sections():
    text = """
    # full line comment
    [system]
    lam = 0.5      # trailing comment
    n_max = 12

    [pulses]
    configuration = lambda
    """
    parsed = parse_config_text(text)
    assert parsed == {"lam": 0.5, "n_max": 12, "configuration": "lambda"}


def test_parse_config_text_rejects_bad_lines():
    with pytest.raises(ConfigError, match="config.ini:2.*key = value"):
        parse_config_text("lam = 0.5\njust words\n", source="config.ini")
    with pytest.raises(ConfigError, match="duplicate key 'lam'"):
        parse_config_text("lam = 0.5\nlam = 0.6\n")
    with pytest.raises(ConfigError, match="unknown configuration key 'lambda_prime'"):
        parse_config_text("lambda_prime = 0.5\n")
    with pytest.raises(ConfigError, match="'n_max' needs an integer"):
        parse_config_text("n_max = twenty\n")
    with pytest.raises(ConfigError, match="'kappa' needs a number"):
        parse_config_text("kappa = tiny\n")


def test_parse_overrides():
    assert parse_overrides(["kappa=1e-3", "n_max=24"]) == {"kappa": 1e-3, "n_max": 24}
    with pytest.raises(ConfigError, match="key=value"):
        parse_overrides(["kappa"])


def test_layering_precedence_and_eviction():
    merged = layer_configs(preset("fig1b"), {"T": 100.0}, {"kappa": 0.0})
    # setting T evicts the preset's T_ns spelling
    assert "T_ns" not in merged
    assert merged["T"] == 100.0
    assert merged["kappa"] == 0.0
    cfg = resolve(merged)
    assert cfg.pulses.T == 100.0


def test_conflicting_spellings_in_one_layer_are_rejected():
    raw = dict(preset("fig1b"))
    raw["T"] = 100.0  # preset already carries T_ns
    with pytest.raises(ConfigError, match="alternative forms"):
        resolve(raw)


def test_preset_resolution_in_internal_units():
    cfg = load("fig1b")
    assert cfg.pulses.T == T_LAMBDA
    assert cfg.pulses.tau == 0.6 * T_LAMBDA
    assert cfg.pulses.w_s_peak == 0.1
    assert cfg.pulses.w_p_peak == 0.0972 * 0.1
    assert cfg.pulses.configuration == "lambda"
    assert cfg.pulses.omega_p is None  # derived at run time
    assert cfg.dissipation.kappa == 1e-4
    assert cfg.dissipation.gamma == 0.0
    assert cfg.system.n_max == 20
    echo = cfg.echo()
    assert echo["kappa"] == 1e-4
    assert echo["omega_p"] == "derived"
    assert echo["max_step"] == "derived"


def test_override_wins_over_preset():
    cfg = load("fig1b", overrides=["kappa=0"])
    assert cfg.dissipation.kappa == 0.0
    assert cfg.echo()["kappa"] == 0.0


def test_vee_preset_layout():
    cfg = load("fig3a")
    assert cfg.system.epsilon_prime == -1.5
    assert cfg.pulses.T == T_VEE
    assert cfg.pulses.w_p_peak == pytest.approx(0.04078, rel=1e-12)
    assert cfg.doublet_reference == "lower"
    spec = cfg.protocol_run()
    assert spec.configuration == "vee"
    assert spec.dissipation.configuration == "vee"


def test_truncation_below_minimum_is_rejected():
    with pytest.raises(ConfigError, match="n_max"):
        load("fig1b", overrides=["n_max=2"])


def test_time_conversion_requires_explicit_convention():
    base = {k: v for k, v in preset("fig1b").items() if k != "angular_convention"}
    with pytest.raises(ConfigError, match="angular_convention.*no default"):
        resolve(base)
    missing_ghz = {k: v for k, v in preset("fig1b").items() if k != "omega_c_ghz"}
    with pytest.raises(ConfigError, match="omega_c_ghz"):
        resolve(missing_ghz)
    with pytest.raises(ConfigError, match="angular_convention"):
        resolve({**preset("fig1b"), "angular_convention": "radians"})


def test_angular_convention_changes_the_scale():
    cfg = resolve({**preset("fig1b"), "angular_convention": "angular"})
    assert cfg.pulses.T == 54.6 * 6.0


def test_missing_required_keys_are_named():
    with pytest.raises(ConfigError, match="configuration"):
        resolve({"w_s_peak": 0.1, "T": 10.0, "tau": 6.0})
    with pytest.raises(ConfigError, match="T or T_ns"):
        resolve({"configuration": "lambda", "w_s_peak": 0.1, "tau": 6.0})
    with pytest.raises(ConfigError, match="Stokes"):
        resolve({"configuration": "lambda", "T": 10.0, "tau": 6.0})
    with pytest.raises(ConfigError, match="w_p_peak or w_p_over_w_s"):
        resolve({"configuration": "lambda", "T": 10.0, "tau": 6.0, "w_s_peak": 0.1})


def test_spectrum_style_config_needs_no_pulses():
    cfg = load(None, config_text="lam = 0.4\nn_max = 12\n", require_pulses=False)
    assert cfg.pulses is None
    assert cfg.system.lam == 0.4
    with pytest.raises(ConfigError, match="no pulse parameters"):
        cfg.protocol_run()


def test_integrator_keys_resolve():
    cfg = load("fig1b", overrides=["rel_tol=1e-8", "abs_tol=1e-10", "n_samples=500"])
    assert cfg.integrator.rel_tol == 1e-8
    assert cfg.integrator.abs_tol == 1e-10
    assert cfg.integrator.n_samples == 500
    with pytest.raises(ConfigError, match="n_samples"):
        load("fig1b", overrides=["n_samples=1"])


def test_kappa_grid_parsing():
    grid = parse_kappa_grid("log:1e-5:1e-2:13")
    assert grid.size == 13
    assert grid[0] == pytest.approx(1e-5, rel=1e-12)
    assert grid[-1] == pytest.approx(1e-2, rel=1e-12)
    assert np.all(np.diff(grid) > 0)
    np.testing.assert_allclose(parse_kappa_grid("0,1e-4,1e-3"), [0.0, 1e-4, 1e-3])
    for bad in ("log:1e-5:1e-2", "log:0:1e-2:5", "log:1e-5:1e-2:1", "log:a:b:5", "a,b", ""):
        with pytest.raises(ConfigError):
            parse_kappa_grid(bad)


def test_scan_preset_carries_its_grid():
    cfg = load("fig1c")
    assert cfg.kappa_grid is not None
    assert cfg.kappa_grid.size == 13
    assert "kappa_grid" in cfg.echo()
    assert load("fig1b").kappa_grid is None


def test_unknown_preset_is_a_config_error():
    with pytest.raises(ConfigError, match="unknown preset"):
        load("fig9")
