import pytest

from posegraph.config import Config, build_config, load_config_file
from posegraph.joints import JOINT_COUNT, OKS_SIGMAS, default_grouping_deltas


def test_defaults():
    config = Config()
    assert config.mu == 0.5
    assert config.sigma == 2.0
    assert (config.heatmap_width, config.heatmap_height) == (64, 80)
    assert config.peak_threshold == 0.1
    assert config.peak_window == 3
    assert config.delta == default_grouping_deltas()
    assert config.oks_sigmas == OKS_SIGMAS
    assert len(config.delta) == JOINT_COUNT
    assert config.nms_iou == 0.5
    assert config.oks_dedup == 0.7
    assert config.oracle_limit == 8
    assert config.seed == 0


@pytest.mark.parametrize(
    "field,value",
    [
        ("mu", -0.1),
        ("mu", 1.1),
        ("sigma", 0.0),
        ("heatmap_width", 0),
        ("peak_threshold", -0.5),
        ("peak_window", 2),
        ("peak_window", 1),
        ("delta", (1.0,) * 5),
        ("delta", (0.0,) * JOINT_COUNT),
        ("oks_sigmas", (0.5,) * 3),
        ("nms_iou", 1.0),
        ("oks_dedup", 0.0),
        ("oracle_limit", 0),
        ("seed", -1),
    ],
)
def test_validation_rejects_out_of_range(field, value):
    with pytest.raises(ValueError):
        Config(**{field: value})


def test_load_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"mu": 0.25, "seed": 7}')
    assert load_config_file(path) == {"mu": 0.25, "seed": 7}


def test_load_config_file_rejects_unknown_key(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"mu": 0.25, "muu": 1}')
    with pytest.raises(ValueError) as err:
        load_config_file(path)
    assert "muu" in str(err.value)


def test_load_config_file_rejects_non_object(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_config_file(path)


def test_precedence_cli_over_file_over_defaults():
    config = build_config(
        file_overrides={"mu": 0.25, "sigma": 3.0},
        cli_overrides={"mu": 0.75, "seed": None},
    )
    assert config.mu == 0.75       # CLI wins
    assert config.sigma == 3.0     # file fills what CLI left alone
    assert config.seed == 0        # None means the flag was not given


def test_build_config_converts_tables_to_tuples():
    config = build_config(file_overrides={"delta": [1.0] * JOINT_COUNT})
    assert config.delta == (1.0,) * JOINT_COUNT


def test_build_config_rejects_unknown_override():
    with pytest.raises(ValueError):
        build_config(cli_overrides={"bogus": 1})


def test_config_is_frozen():
    with pytest.raises(Exception):
        Config().mu = 0.9
