import math

import numpy as np
import pytest

import garsamp


def test_expression():
    e = garsamp.Expression("exp(-x) + x^2")
    v, d1, d2 = e.jet(0.5)
    assert v == pytest.approx(math.exp(-0.5) + 0.25)
    assert d1 == pytest.approx(-math.exp(-0.5) + 1.0)
    assert d2 == pytest.approx(math.exp(-0.5) + 2.0)
    with pytest.raises(ValueError):
        garsamp.Expression("exp(")


def test_bound_table_example1():
    rows = {r["method"]: r["gamma"] for r in garsamp.bound_table(1)}
    assert rows["bm1"] == pytest.approx(2.89, abs=0.01)
    assert rows["bm2"] == pytest.approx(3.77, abs=0.01)
    assert rows["optimal"] == pytest.approx(3.78, abs=0.01)
    b = garsamp.bound(1, "bm2", 3)
    assert b["gamma"] == pytest.approx(rows["bm2"])
    assert b["L"] == pytest.approx(math.exp(-b["gamma"]))


def test_quad_not_applicable():
    with pytest.raises(ValueError):
        garsamp.bound(1, "quad")


def test_sample_deterministic():
    a = garsamp.sample(2, "gars", 300, 4)
    b = garsamp.sample(2, "gars", 300, 4)
    assert a["samples"].shape == (300,)
    np.testing.assert_array_equal(a["samples"], b["samples"])
    assert 0 < a["acceptance_rate"] <= 1


def test_rs_from_dict():
    cfg = garsamp.builtin_config(1)
    out = garsamp.sample(cfg, "rs", 200, 2)
    assert len(out["samples"]) == 200
    assert out["acceptance_rate"] == pytest.approx(0.39, abs=0.1)


def test_gibbs_shapes():
    out = garsamp.gibbs(3, 100, 5)
    assert out["chain"].shape == (100, 2)
    assert np.all(np.isfinite(out["chain"]))


def test_verify_and_fault():
    assert garsamp.verify(2)["pass"]
    cfg = garsamp.builtin_config(1)
    cfg["observations"][0]["nonlinearity"]["branches"][0]["curvature"] *= -1
    report = garsamp.verify(cfg)
    assert not report["pass"]
    assert report["checks"][0]["name"] == "model_load"


def test_run_example(tmp_path):
    summary = garsamp.run_example(1, tmp_path, {"experiment": {"rs": {"samples": 500, "seeds": 2}}})
    assert summary["example"] == 1
    assert (tmp_path / "bounds.csv").read_text().startswith("method,gamma,L,region,minimizer\n")
