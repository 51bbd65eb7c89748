import math

import pytest

from interceptsim.scenario import (LAWS, ScenarioConfig, read_config,
                                   write_config)


def test_roundtrip_default(tmp_path):
    cfg = ScenarioConfig()
    path = tmp_path / "scenario.txt"
    write_config(cfg, path)
    assert read_config(path) == cfg


def test_roundtrip_awkward_floats(tmp_path):
    cfg = ScenarioConfig(t_sw=0.1 + 1e-13, sigma_lambda=5.000000000000001e-4,
                         rho0=15000.000000000002, seed=987654321,
                         law="dglc", perfect_info=True,
                         tpm=(0.9990000000000001, 0.0009999999999999,
                              0.001, 0.999))
    path = tmp_path / "scenario.txt"
    write_config(cfg, path)
    back = read_config(path)
    assert back == cfg


def test_comments_and_blank_lines(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# header\n\nt_sw = 2.5  # switch\nlaw = dgl1\n")
    cfg = read_config(path)
    assert cfg.t_sw == 2.5
    assert cfg.law == "dgl1"


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("warp_drive = 1\n")
    with pytest.raises(ValueError, match="unknown key"):
        read_config(path)


def test_malformed_line_rejected(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("t_sw 2.5\n")
    with pytest.raises(ValueError, match="expected key"):
        read_config(path)


def test_bad_law_rejected():
    with pytest.raises(ValueError):
        ScenarioConfig(law="png")


def test_tpm_shape_checked():
    with pytest.raises(ValueError):
        ScenarioConfig(tpm=(0.9, 0.1))


def test_derived_quantities():
    cfg = ScenarioConfig()
    assert cfg.a_p_max == pytest.approx(45 * 9.80665)
    assert cfg.vehicle_params().mu == pytest.approx(2.25)
    assert cfg.game_params().epsilon == pytest.approx(1.0)
    assert cfg.dt_meas == pytest.approx(0.01)
    assert cfg.tpm_matrix().shape == (2, 2)
    assert cfg.theta_ranges() == ((2.9, 3.1), (0.0, 0.2))
    assert set(LAWS) == {"dgl1", "dglc", "tv-dglcc"}


def test_replace_is_pure():
    cfg = ScenarioConfig()
    other = cfg.replace(t_sw=2.2)
    assert cfg.t_sw == 1.5 and other.t_sw == 2.2
