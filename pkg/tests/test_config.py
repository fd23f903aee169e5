"""Config parsing, overrides, and asset resolution."""

from __future__ import annotations

import json
from dataclasses import replace

import pytest

from pace_align.config import (
    SCHEMES,
    ConfigError,
    SessionConfig,
    UserConfig,
    apply_overrides,
    config_from_dict,
    load_config,
    resolve_asset,
    with_scheme_and_seed,
)

MINIMAL = {"trajectory": "t.json", "graph": "g.json"}


def test_minimal_config_takes_defaults():
    cfg = config_from_dict(MINIMAL)
    assert cfg.scheme == "LC"
    assert cfg.dt == 0.002
    assert cfg.m0 == 15.0 and cfg.d0 == 310.0 and cfg.k == 500.0
    assert cfg.f_propell == 20.0
    assert cfg.user.profile == ((0.0, 0.0),)


def test_file_keys_use_controller_symbols():
    cfg = config_from_dict({**MINIMAL, "M0": 12.0, "D0": 250.0, "K": 450.0,
                            "F_propell": 18.0, "M_robot": 3.5, "C_gain": 380.0,
                            "F_max": 25.0})
    assert cfg.m0 == 12.0
    assert cfg.d0 == 250.0
    assert cfg.k == 450.0
    assert cfg.f_propell == 18.0
    assert cfg.m_robot == 3.5
    assert cfg.c_gain == 380.0
    assert cfg.f_max == 25.0


def test_per_axis_gains_become_tuples():
    cfg = config_from_dict({**MINIMAL, "M0": [15.0, 15.0, 12.0]})
    assert cfg.m0 == (15.0, 15.0, 12.0)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config keys.*mass"):
        config_from_dict({**MINIMAL, "mass": 3.0})


@pytest.mark.parametrize("missing", ["trajectory", "graph"])
def test_required_assets_enforced(missing):
    doc = {k: v for k, v in MINIMAL.items() if k != missing}
    with pytest.raises(ConfigError, match=missing):
        config_from_dict(doc)


def test_bad_scheme_rejected():
    with pytest.raises(ConfigError, match="scheme"):
        config_from_dict({**MINIMAL, "scheme": "PD"})
    assert SCHEMES == ("AC", "LC_noAP", "LC")


def test_user_block_validation():
    with pytest.raises(ConfigError, match="non-decreasing"):
        UserConfig(profile=((1.0, 0.0), (0.5, 0.2)))
    with pytest.raises(ConfigError, match=r"outside \[0, 1\]"):
        UserConfig(profile=((0.0, 1.4),))
    with pytest.raises(ConfigError, match="scripted_profile"):
        UserConfig(kind="viscous_resistor",
                   pushes=((0.0, 1.0, (1.0, 0.0, 0.0), 5.0),))
    with pytest.raises(ConfigError, match="unknown user kind"):
        UserConfig(kind="spring")
    with pytest.raises(ConfigError, match="bad user block"):
        config_from_dict({**MINIMAL, "user": {"bogus_field": 1}})


def test_json_and_toml_load_identically(tmp_path):
    doc = {**MINIMAL, "scheme": "AC", "seed": 3, "K": 450.0,
           "user": {"profile": [[0.0, 0.0], [2.0, 0.5]], "r_max": 90.0}}
    jpath = tmp_path / "c.json"
    jpath.write_text(json.dumps(doc))
    tpath = tmp_path / "c.toml"
    tpath.write_text(
        'trajectory = "t.json"\ngraph = "g.json"\nscheme = "AC"\nseed = 3\n'
        "K = 450.0\n[user]\nprofile = [[0.0, 0.0], [2.0, 0.5]]\nr_max = 90.0\n"
    )
    assert load_config(jpath) == load_config(tpath)


def test_load_config_error_paths(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="root"):
        load_config(arr)


def test_resolve_asset_builtin_and_relative(tmp_path):
    builtin = resolve_asset("builtin:phrase_graph.json", tmp_path)
    assert builtin.name == "phrase_graph.json"
    assert builtin.exists()
    rel = resolve_asset("sub/t.json", tmp_path)
    assert rel == tmp_path / "sub" / "t.json"
    absolute = resolve_asset(str(tmp_path / "x.json"), "/elsewhere")
    assert absolute == tmp_path / "x.json"


def test_overrides_parse_json_values():
    doc = apply_overrides(dict(MINIMAL), [("seed", "7"), ("scheme", "AC"),
                                          ("user.r_max", "450"),
                                          ("M0", "[12, 12, 9]")])
    assert doc["seed"] == 7
    assert doc["scheme"] == "AC"
    assert doc["user"]["r_max"] == 450
    assert doc["M0"] == [12, 12, 9]
    cfg = config_from_dict(doc)
    assert cfg.user.r_max == 450.0
    assert cfg.m0 == (12.0, 12.0, 9.0)


def test_override_through_scalar_rejected():
    with pytest.raises(ConfigError, match="crosses a scalar"):
        apply_overrides({"seed": 3}, [("seed.deep", "1")])


def test_override_leaves_input_untouched():
    doc = {**MINIMAL, "user": {"r_max": 10.0}}
    apply_overrides(doc, [("user.r_max", "99")])
    assert doc["user"]["r_max"] == 10.0


def test_with_scheme_and_seed():
    cfg = config_from_dict(MINIMAL)
    out = with_scheme_and_seed(cfg, "AC", 9)
    assert out.scheme == "AC" and out.seed == 9
    assert replace(out, scheme="LC", seed=0) == cfg


def test_round_trip_to_dict():
    cfg = config_from_dict({**MINIMAL, "K": 450.0, "seed": 5,
                            "user": {"noise_std": 0.3}})
    doc = cfg.to_dict()
    assert doc["K"] == 450.0
    assert doc["user"]["noise_std"] == 0.3
    assert config_from_dict(doc) == replace(cfg, base_dir=".")


def test_config_requires_positive_timing():
    with pytest.raises(ConfigError):
        SessionConfig(trajectory="t", graph="g", dt=0.0)
    with pytest.raises(ConfigError):
        SessionConfig(trajectory="t", graph="g", cap_s=-1.0)
