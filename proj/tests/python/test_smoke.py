import json
import math

import numpy as np
import pytest

import score_lab as sl


def test_catalog_and_errors():
    assert "mixture2" in sl.catalog_names()
    t = sl.catalog("gaussian", {"var": 4.0})
    assert t.dim == 1
    with pytest.raises(ValueError):
        sl.catalog("no_such_target")


def test_quadrature_matches_closed_form():
    t = sl.catalog("mixture2")
    field = sl.ScoreField(t)
    for time in (0.1, 0.7, 2.0):
        for x in (-2.0, 0.3, 1.7):
            s, j = field.score(time, np.array([x]))
            sc, jc = sl.closed_form_score(t, time, np.array([x]))
            assert s[0] == pytest.approx(sc[0], rel=1e-8, abs=1e-8)
            assert j[0, 0] == pytest.approx(jc[0, 0], rel=1e-8, abs=1e-8)


def test_gaussian_hessian_oracle():
    # N(0, 4): g'' = a = 1/4 - 1, heat flow gives a / (1 + a t)
    field = sl.ScoreField(sl.catalog("gaussian", {"var": 4.0}))
    a = 0.25 - 1.0
    for tb in (0.05, 0.5, 0.9):
        assert field.hess_qbar(tb, np.array([0.4]))[0, 0] == pytest.approx(a / (1.0 + a * tb), rel=1e-10)


def test_bounds_and_horizon():
    b = sl.thm31_bounds(2.0, 1.0, 0.1)
    assert b["horizon"] == pytest.approx(math.log(2.0), rel=1e-14)
    assert sl.prior_horizon(3.0) < b["horizon"]
    with pytest.raises(ArithmeticError):
        sl.cor32_Ct(1.0, 1.0, 1.0)
    r = sl.sweep_verify(sl.catalog("std_normal"), "thm31", [0.1, 0.5], per_axis=9)
    assert r["violations"] == 0 and r["rows"] == 36


def test_block_ratio_paths_agree():
    c = sl.block_ratio(4.0)
    q = sl.block_ratio(4.0, "quadrature")
    assert c["ratio"] == pytest.approx(26.976870515060952, rel=1e-12)
    assert q["ratio"] == pytest.approx(c["ratio"], rel=1e-6)


def test_sampler_is_reproducible_and_close():
    t = sl.catalog("mixture2")
    a, ex = sl.sample(t, N=40, ensemble=20000, seed=4)
    b, _ = sl.sample(t, N=40, ensemble=20000, seed=4)
    assert ex == 0 and a.shape == (20000, 1)
    assert np.array_equal(a, b)
    ref = sl.forward_sample(t, 0.0, 20000, seed=9)
    assert sl.w1_1d(a[:, 0], ref[:, 0]) < 0.08


def test_rate_fit_recovers_exponent():
    Ns = [5, 10, 20, 40, 80]
    fit = sl.rate_fit(Ns, [0.01 + 2.0 * n ** -1.0 for n in Ns])
    assert fit["gamma"] == pytest.approx(1.0, abs=1e-3)


def test_run_cli_config_error_and_success(tmp_path):
    code, _ = sl.run_cli("verify-bounds", json.dumps({"target": "nope"}), [("output", str(tmp_path / "a"))])
    assert code == 2
    assert not (tmp_path / "a").exists()
    code, log = sl.run_cli("counterexample", json.dumps({"M": [2]}), [("output", str(tmp_path / "b"))])
    assert code == 0
    rows = (tmp_path / "b" / "counterexample_blocks.csv").read_text().splitlines()
    assert rows[1].endswith(",true")
