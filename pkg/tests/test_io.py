import numpy as np
import pytest

from swimrom.config import (ConfigError, ExperimentConfig, config_text,
                            parse_config)
from swimrom.container import ContainerError, read_container, write_container


def test_container_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    arrays = {
        "floats": rng.normal(size=(7, 5)),
        "ints": rng.integers(0, 100, size=13),
        "scalar_ish": np.array(3.5),
        "big": rng.normal(size=(50, 3, 2)),
    }
    path = tmp_path / "c.bin"
    write_container(path, arrays)
    loaded = read_container(path)
    assert set(loaded) == set(arrays)
    for name, arr in arrays.items():
        assert loaded[name].dtype == np.asarray(arr).dtype
        np.testing.assert_array_equal(loaded[name], arr)


def test_container_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"not a container at all")
    with pytest.raises(ContainerError):
        read_container(path)


def test_container_rejects_wrong_version(tmp_path):
    path = tmp_path / "v.bin"
    write_container(path, {"a": np.zeros(3)})
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(ContainerError):
        read_container(path)


def test_config_defaults_valid():
    cfg = ExperimentConfig().validate()
    assert cfg.swimmer == "bacterium"


def test_config_parsing_with_comments():
    cfg = parse_config("""
    # a comment
    swimmer = eukaryote
    frames = 48   # trailing comment
    seed = 7
    """)
    assert cfg.swimmer == "eukaryote"
    assert cfg.frames == 48
    assert cfg.seed == 7


def test_config_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("swimmmer = bacterium")


def test_config_bad_value_rejected():
    with pytest.raises(ConfigError):
        parse_config("seed = not_a_number")


def test_config_semantic_validation():
    with pytest.raises(ConfigError):
        parse_config("pod_threshold = 1.5")
    with pytest.raises(ConfigError):
        parse_config("verify = maybe")
    with pytest.raises(ConfigError):
        parse_config("domain_min = 3.0\ndomain_max = 1.0")


def test_config_text_roundtrip():
    cfg = parse_config("n_lambda = 1.25\nr_head = 0.6")
    again = parse_config(config_text(cfg))
    assert again == cfg
