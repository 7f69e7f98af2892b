import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispersive_interface import io
from dispersive_interface.config import load_config, parse_config
from dispersive_interface.errors import ConfigError

from conftest import CONFIGS, make_fixture

BASE = {
    "material": {"eps1": {"eps0": 1.0, "alpha": 2.0, "beta": 1.0}, "eps2": {"eps0": 1.0}},
    "cell_a": {"layers": [[0.5, 1], [0.5, 2]]},
    "cell_b": {"layers": [[1.0, 1]]},
}


def _doc(**patch):
    doc = json.loads(json.dumps(BASE))
    for path, value in patch.items():
        node = doc
        keys = path.split("__")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
    return doc


def test_fixture_config_matches():
    cfg = load_config(CONFIGS / "fixture.toml")
    s = make_fixture()
    assert cfg.structure.cell_a.as_pairs() == s.cell_a.as_pairs()
    assert cfg.structure.cell_b.as_pairs() == s.cell_b.as_pairs()
    assert cfg.structure.eps1 == s.eps1 and cfg.structure.eps2 == s.eps2
    assert cfg.window == (0.0, 0.99)


@pytest.mark.parametrize("patch, path", [
    ({"material__eps1__gamma": 1.0}, "material.eps1.gamma"),
    ({"cell_a__layers": [[0.5, 1], [0.4, 2]]}, "cell_a.layers"),
    ({"cell_a__layers": [[0.5, 1], [0.5, 3]]}, "cell_a.layers[1]"),
    ({"cell_a__layers": [[0.5, 1], "x"]}, "cell_a.layers[1]"),
    ({"material__eps2__alpha": -1.0}, "material.eps2.alpha"),
    ({"material__eps2__alpha": "big"}, "material.eps2.alpha"),
    ({"perturbation__kind": "cubic"}, "perturbation.kind"),
    ({"scan__window": [1.0, 0.5]}, "scan.window"),
    ({"globals__mu0": 0.0}, "globals.mu0"),
    ({"tolerances__eta_edge": -1.0}, "tolerances.eta_edge"),
    ({"bogus__x": 1}, "bogus"),
    ({"sweep__delta_grid": [0.1, 0.0]}, "sweep.delta_grid"),
])
def test_config_errors_name_path(patch, path):
    with pytest.raises(ConfigError) as exc:
        parse_config(_doc(**patch))
    assert exc.value.path == path
    assert str(exc.value).startswith(path + ": ")


def test_missing_section():
    doc = _doc()
    del doc["cell_b"]
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.path == "cell_b"


def test_bad_toml(tmp_path):
    p = tmp_path / "x.toml"
    p.write_text("[material\n")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_effective_structure():
    cfg = parse_config(_doc(perturbation={"kind": "inverse_sq_decreasing", "delta": 0.2}))
    s = cfg.effective_structure()
    assert s.eps1.pert_delta == 0.2 and s.eps1.pert_kind == "inverse_sq_decreasing"


@settings(max_examples=300)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip(x):
    assert float(io.fmt(x)) == x
    assert json.loads(io.dumps({"v": x}))["v"] == x


def test_nonfinite_json_null():
    out = json.loads(io.dumps({"a": math.nan, "b": [math.inf, 1.5], "c": np.float64(0.1)}))
    assert out == {"a": None, "b": [None, 1.5], "c": 0.1}


def test_json_text_form():
    text = io.dumps({"x": 0.1, "n": 3, "s": "f:1", "flag": True})
    assert '"x": 0.10000000000000001' in text
    assert '"s": "f:1"' in text and '"n": 3' in text and "true" in text


def test_csv_format(tmp_path):
    p = tmp_path / "a.csv"
    io.write_csv(p, ["a", "b", "c"], [(0.1, None, True), (np.int64(2), "x", math.inf)])
    assert p.read_text() == "a,b,c\n0.10000000000000001,,true\n2,x,inf\n"
