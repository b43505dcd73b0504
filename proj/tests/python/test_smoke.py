import json
import math

import pytest

import mertens_lab as ml


@pytest.fixture(scope="module")
def wb():
    return ml.Workbench(100000, 10000)


def test_sieve_small():
    mu, lam = ml.sieve(10)
    assert list(mu[1:]) == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert lam[8] == pytest.approx(math.log(2), abs=1e-15)
    assert lam[6] == 0.0


def test_mertens_and_f(wb):
    assert wb.mertens(10) == -1
    assert wb.mertens(1e4) == -23
    assert wb.big_f(4) == pytest.approx(math.log(1.5), rel=1e-14)
    assert wb.big_f_integral(4) == pytest.approx(math.log(1.5), rel=1e-14)
    assert wb.h_mertens(10) == pytest.approx(-0.1)


def test_identities(wb):
    assert abs(wb.tatuzawa_iseki(4.0, "one")) < 1e-12
    assert abs(wb.f_sum_residual(1234.5)) < 1e-9 * 1234.5
    assert abs(wb.floor_weighted_residual(1000.0)) < 1e-8 * 1000
    assert wb.lemma1_smoothed(2.0) == pytest.approx(0.0476, abs=5e-4)


def test_lambda2_forms():
    l2 = ml.lambda2(12)
    assert l2[4] == pytest.approx(3 * math.log(2) ** 2, rel=1e-12)
    assert l2[12] == pytest.approx(2 * math.log(2) * math.log(3), rel=1e-12)


def test_remainder_series(wb):
    s = wb.remainder_series("selberg_eq3", [10.0])
    x, raw, norm = s["samples"][0]
    assert raw == pytest.approx(-26.768, abs=1e-3)
    assert norm == pytest.approx(-2.6768, abs=1e-4)


def test_profile(wb):
    p = wb.profile("smoothed", 2, 10)
    assert p["h"][-1] == pytest.approx(math.log(2) / 2)
    assert all(abs(h) <= 1 + 1e-9 for h in p["h"])


def test_iteration_and_errors():
    ks, limit = ml.lambda_iteration(0.5, 3)
    assert ks == pytest.approx([1.0, 1.5, 1.75, 1.875])
    assert limit == 2.0
    with pytest.raises(ValueError):
        ml.lambda_iteration(1.5, 3)


def test_cli_roundtrip():
    code, out, _ = ml.run_cli(["mertens", "--n-max", "100", "--conv-cap", "100", "--points", "1,10"])
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert [(r[0], r[1]) for r in rows] == [("1", "1"), ("10", "-1")]
    code, out, _ = ml.run_cli(["iterate", "--lambda", "0.5", "--steps", "3", "--format", "json"])
    assert code == 0 and json.loads(out)["limit"] == 2.0
    code, _, _ = ml.run_cli(["verify", "--n-max", "100", "--grid", "2:1.5:0"])
    assert code == 2
