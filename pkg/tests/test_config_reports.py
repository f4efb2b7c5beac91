import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colombeau.config import RunConfig, load_config, parse_config
from colombeau.errors import ParameterError
from colombeau.reports import csv_text, fmt, json_text, write_csv


def test_defaults():
    cfg = RunConfig()
    assert (cfg.eps_max, cfg.ratio, cfg.count) == (0.5, 0.7, 24)
    assert cfg.mollifier.q == 4 and cfg.tolerances.ode_rtol == 1e-10
    assert len(cfg.grid) == 24


def test_parse_overrides_and_comments(tmp_path):
    text = "# run\ngrid = 0.4,0.6,12\nmollifier-q = 2\n\nout = results  # trailing\ntol_assoc = 1e-8\n"
    cfg = parse_config(text)
    assert (cfg.eps_max, cfg.ratio, cfg.count) == (0.4, 0.6, 12)
    assert cfg.mollifier_q == 2 and cfg.out == "results" and cfg.tol_assoc == 1e-8
    path = tmp_path / "run.cfg"
    path.write_text(cfg.to_text())
    assert load_config(str(path)) == cfg


@pytest.mark.parametrize("bad", [
    "nonsense", "colour = red", "count = 2.5", "mollifier_q = 9", "ratio = 1.5",
    "ode_rtol = 1e-3", "grid = 0.5,0.7", "tol_slope = x",
])
def test_bad_config_is_a_parameter_error(bad):
    with pytest.raises(ParameterError):
        parse_config(bad)


def test_float_format_round_trips():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(fmt(v)) == v
    assert fmt(True) == "1" and fmt(np.int64(3)) == "3"
    assert fmt(float("nan")) == "nan" and fmt(-math.inf) == "-inf"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_csv_values_round_trip(vals):
    text = csv_text(["c%d" % i for i in range(len(vals))], [vals])
    back = [float(v) for v in text.splitlines()[1].split(",")]
    assert back == vals


def test_csv_rejects_ragged_rows():
    with pytest.raises(ValueError):
        csv_text(["a", "b"], [[1.0]])


def test_writers_are_deterministic(tmp_path):
    rows = [[0.5, np.float64(1 / 7), True], [0.35, -0.0, False]]
    a = write_csv(str(tmp_path / "a.csv"), ["eps", "v", "flag"], rows)
    b = write_csv(str(tmp_path / "b.csv"), ["eps", "v", "flag"], rows)
    assert open(a, "rb").read() == open(b, "rb").read()
    doc = {"b": np.array([1.0, 2.0]), "a": {"z": np.nan, "y": np.bool_(True)}}
    assert json_text(doc) == json_text(dict(reversed(list(doc.items()))))
    assert json.loads(json_text(doc)) == {"a": {"y": True, "z": "nan"}, "b": [1.0, 2.0]}
