import pytest

from bathyscatter.config import (
    ExperimentConfig,
    auto_sigma,
    format_config,
    load_config,
    parse_config_text,
    parse_value,
    sub_seed,
)
from bathyscatter.errors import ConfigError


def test_defaults_mirror_experiment():
    c = ExperimentConfig()
    assert (c.side_length_m, c.samples_per_side, c.amplitude_m, c.noise_level) == (100.0, 100, 0.3, 0.1)
    assert c.omegas == (1.0, 2.0) and c.topographies == ("d1", "d2")
    inv = c.inversion(0)
    assert (inv.sigma, inv.gamma, inv.alpha) == (2.5, 0.001, 0.1)
    assert c.inversion(1).sigma == 1.5


def test_auto_sigma():
    assert auto_sigma(1.0) == 2.5 and auto_sigma(2.0) == 1.5


def test_parse_grammar():
    text = """
    # comment line
    side_length_m = 60   # trailing comment
    omegas = 1, 1.5,2
    sigma = 2.5
    sampled_kernel = TRUE
    edge_trim = none
    topographies = flat
    """
    c = parse_config_text(text)
    assert c.side_length_m == 60.0 and c.omegas == (1.0, 1.5, 2.0)
    assert c.sigma == (2.5,) and c.sampled_kernel is True and c.edge_trim is None
    assert c.topographies == ("flat",)


@pytest.mark.parametrize("text,match", [
    ("bogus = 1", "unknown"),
    ("seed = 1\nseed = 2", "duplicate"),
    ("seed 1", "key = value"),
    ("seed = one", "cannot parse"),
    ("sampled_kernel = yes", "cannot parse"),
    ("omegas = ,", "empty"),
    ("omegas = 1, 2\nsigma = 1, 2, 3", "needs 1 or 2"),
    ("topographies = d7", "unknown topography"),
    ("noise_kind = pink", "noise_kind"),
    ("gamma = -1", "gamma"),
    ("samples_per_side = 4", "samples_per_side"),
])
def test_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_round_trip():
    c = ExperimentConfig(omegas=(1.0, 2.0), sigma=(2.0, 1.25), seed=17, edge_trim=9,
                         cutoff_margin=None, noise_kind="real", output_dir="out dir")
    assert parse_config_text(format_config(c)) == c
    assert parse_config_text(format_config(ExperimentConfig())) == ExperimentConfig()


def test_float_round_trip_exact():
    c = ExperimentConfig(noise_level=0.1 + 1e-17, amplitude_m=1 / 3)
    assert parse_config_text(format_config(c)).amplitude_m == 1 / 3


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.txt")


def test_parse_value_auto():
    assert parse_value("sigma", "auto") == ()
    assert parse_value("cutoff_margin", "auto") is None


def test_sub_seed():
    a = sub_seed(0, "noise/d1/0")
    assert a == sub_seed(0, "noise/d1/0")
    assert a != sub_seed(1, "noise/d1/0") and a != sub_seed(0, "noise/d1/1")
    assert 0 <= a < 2 ** 64
    import hashlib
    assert a == int.from_bytes(hashlib.sha256(b"0:noise/d1/0").digest()[:8], "little")
