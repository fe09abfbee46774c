import dataclasses

import numpy as np
import pytest

from hjbr.config import ConfigError, TrainConfig, load_config, parse_config


def test_parse_roundtrip():
    cfg = TrainConfig(eta=3.5, epochs=4, pe_on_g=True)
    assert parse_config(cfg.dumps()) == cfg


def test_comments_and_alias():
    cfg = parse_config("# header\nlambda = 0.25  # ridge\n\nepochs = 3\n")
    assert cfg.ridge_lambda == 0.25 and cfg.epochs == 3


@pytest.mark.parametrize(
    "text,key",
    [
        ("lambda = -1\n", "lambda"),
        ("etta = 2\n", "etta"),
        ("epochs = many\n", "epochs"),
        ("dt = 0\n", "dt"),
        ("ridge_lambda = 1\n", "ridge_lambda"),
    ],
)
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.txt")


def test_seed_override():
    cfg = TrainConfig().with_seed_override(100)
    assert list(cfg.seeds.values()) == [100, 101, 102, 103, 104]


def test_u_limit_default():
    assert TrainConfig(n_plastic=25).u_limit == pytest.approx(1.0)
    assert TrainConfig(u_max=0.3).u_limit == 0.3


def test_cost_from_file(tmp_path):
    R = np.diag(np.arange(1.0, 5.0))
    p = tmp_path / "R.txt"
    np.savetxt(p, R)
    cfg = TrainConfig(n_r=4, n_plastic=4, R_file=str(p))
    assert np.array_equal(cfg.cost().R, R)
    with pytest.raises(ConfigError):
        dataclasses.replace(cfg, n_plastic=3).cost()
    with pytest.raises(ConfigError):
        dataclasses.replace(cfg, R_file=str(tmp_path / "missing.txt")).cost()
