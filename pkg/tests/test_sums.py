"""Summation oracle: direct sums, tail corrections, and rate fits."""

from fractions import Fraction

import pytest
from mpmath import mp

from logladder import criteria as cr
from logladder import numeric as nm
from logladder import sums
from logladder.errors import BudgetExceededError, PositivityViolation

# Exact rational reference for the first frozen example.
_FIRST_TEN = sum(Fraction(1, i * i) for i in range(1, 11))


def test_partial_sum_first_ten():
    r = sums.partial_sum("1/n^2", 10)
    assert r.n_terms == 10
    assert nm.to_float(r.value) == pytest.approx(float(_FIRST_TEN),
                                                 rel=1e-14)
    assert str(float(_FIRST_TEN)).startswith("1.549767731")


def test_zero_padded_single_term():
    r = sums.partial_sum(lambda n: 1.0 if n == 5 else 0.0, 100)
    assert nm.to_float(r.value) == 1.0


def test_partial_sum_monotone_in_n():
    prev = 0.0
    for N in (10, 100, 1000, 10000):
        v = nm.to_float(sums.partial_sum("1/n^2", N).value)
        assert v > prev
        prev = v


def test_methods_agree_within_roundoff():
    a = sums.partial_sum("1/(n*ln(n))", 10**6, method="compensated")
    b = sums.partial_sum("1/(n*ln(n))", 10**6, method="pairwise")
    tol = nm.to_float(a.estimated_roundoff) + nm.to_float(
        b.estimated_roundoff
    )
    assert abs(nm.to_float(a.value) - nm.to_float(b.value)) <= tol
    assert a.summation_method == "compensated"
    assert b.summation_method == "pairwise"


def test_roundoff_invariant():
    r = sums.partial_sum("1/n^2", 10**5)
    bound = r.n_terms * 2.0 ** (1 - r.precision_bits) * nm.to_float(r.value)
    assert nm.to_float(r.estimated_roundoff) <= bound * (1 + 1e-12)


def test_budget_exceeded():
    with pytest.raises(BudgetExceededError):
        sums.partial_sum("1/n", 10**9)
    with pytest.raises(BudgetExceededError):
        sums.partial_sum("1/n", 10**6, budget=10**5)


def test_negative_terms_rejected():
    with pytest.raises(PositivityViolation):
        sums.partial_sum(lambda n: 1.0 if n < 50 else -1.0, 1000)


def test_start_index_respects_domain():
    # lnln needs n >= 3; the first index must clear it automatically
    r = sums.partial_sum("1/(n*ln(n)*lnln(n))", 100)
    assert nm.to_float(r.value) > 0


def test_high_precision_path_matches_float():
    a = sums.partial_sum("1/n^2", 2000)
    b = sums.partial_sum("1/n^2", 2000, precision=128)
    assert b.precision_bits == 128
    assert nm.to_float(a.value) == pytest.approx(
        nm.to_float(b.value), rel=1e-12
    )


def test_single_term_window():
    r = sums.tail_sum("1/n^2", 9, 10)
    assert nm.to_float(r.value) == pytest.approx(1 / 81 + 1 / 100,
                                                 rel=1e-14)


def test_tail_estimate_inverse_square():
    r = sums.tail_sum("1/n^2", 10**4, 10**8)
    want = float(mp.zeta(2, 10**4))  # independent reference for the tail
    assert nm.to_float(r.estimate) == pytest.approx(want, rel=1e-4)
    # the window alone misses the reference by the truncated remainder
    assert nm.to_float(r.value) < want


def test_tail_estimate_needs_correction():
    r = sums.tail_sum("n^(-3/2)", 10**4, 10**8)
    want = float(mp.zeta(mp.mpf(3) / 2, 10**4))
    est = nm.to_float(r.estimate)
    raw = nm.to_float(r.value)
    assert est == pytest.approx(want, rel=2e-3)
    assert abs(raw - want) / want > 5e-3  # correction is load-bearing
    assert r.truncation_correction is not None


def test_tail_warns_on_divergent_series():
    r = sums.tail_sum("1/n", 10, 1000, verdict="diverges")
    assert "not mark convergent" in r.note


def test_checkpoint_sums_and_csv(tmp_path):
    rows = sums.checkpoint_sums("1/n^2", [10, 100, 1000])
    vals = [nm.to_float(s) for _, s in rows]
    assert vals == sorted(vals)
    assert vals[0] == pytest.approx(float(_FIRST_TEN), rel=1e-14)
    out = tmp_path / "cp.csv"
    sums.write_checkpoints_csv(out, rows)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "N,partial_sum"
    assert len(lines) == 4


def test_checkpoint_requires_reachable_indices():
    with pytest.raises(ValueError):
        sums.checkpoint_sums("1/(n*ln(n))", [1, 100])  # 1 precedes ln > 0


def test_log_increment_consistency():
    # S(10^6) - S(10^5) for 1/(n ln n) tracks lnln growth
    rows = sums.checkpoint_sums("1/(n*ln(n))", [10**5, 10**6])
    diff = nm.to_float(rows[1][1]) - nm.to_float(rows[0][1])
    want = float(mp.log(mp.log(10**6)) - mp.log(mp.log(10**5)))
    assert diff == pytest.approx(want, rel=1e-3)


# -- slope checks ------------------------------------------------------------------

_CPS = [10**4, 10**5, 10**6, 10**7]


def test_slope_check_slow_log():
    rep = cr.analyze("1/(n*ln(n))")
    chk = sums.slope_check("1/(n*ln(n))", rep.final.rate, _CPS,
                           tolerance=0.02)
    assert chk.passed
    assert chk.target == 1.0
    assert chk.observed[-1] == pytest.approx(1.0, abs=0.02)


def test_slope_check_precise_tail():
    rep = cr.analyze("1/n^2")
    chk = sums.slope_check("1/n^2", rep.final.rate, _CPS, tolerance=0.001)
    assert chk.passed
    assert chk.observed[-1] == pytest.approx(1.0, abs=0.001)


def test_slope_check_log_ratio_partial():
    rep = cr.analyze("(ln(n))^t/n", params={"t": "0.5"})
    chk = sums.slope_check("(ln(n))^t/n", rep.final.rate, _CPS,
                           tolerance=0.02, params={"t": "0.5"})
    assert chk.passed
    assert chk.target == pytest.approx(1.5)


def test_slope_check_log_ratio_tail():
    rep = cr.analyze("(ln(n))^t/n", params={"t": -2})
    chk = sums.slope_check("(ln(n))^t/n", rep.final.rate, _CPS,
                           tolerance=0.05, params={"t": -2})
    assert chk.passed
    assert chk.target == pytest.approx(-1.0)
    assert chk.observed[-1] == pytest.approx(-1.0, abs=0.05)


def test_slope_check_insufficient_signal():
    rep = cr.analyze("(lnln(n))^p/(n*ln(n))", params={"p": -2})
    chk = sums.slope_check("(lnln(n))^p/(n*ln(n))", rep.final.rate, _CPS,
                           params={"p": -2})
    assert chk.status == "insufficient-signal"
    assert "e-folds" in chk.note


def test_slope_check_detects_wrong_prediction():
    # rate fitted for 1/n^2 applied to sums of 1/n^3 must fail
    rep = cr.analyze("1/n^2")
    chk = sums.slope_check("1/n^3", rep.final.rate, _CPS, tolerance=0.001)
    assert chk.status == "fail"


def test_slope_check_fits_open_constant():
    rep = cr.analyze("1/(n*ln(n))")
    open_rate = cr.RatePrediction(
        template="slow-log-bound",
        scale=rep.final.rate.scale,
        one_sided=True,
    )
    chk = sums.slope_check("1/(n*ln(n))", open_rate, _CPS, tolerance=0.05)
    assert chk.passed
    assert chk.fitted_constant == pytest.approx(1.0, abs=0.05)


def test_slope_check_needs_three_checkpoints():
    rep = cr.analyze("1/n^2")
    with pytest.raises(ValueError):
        sums.slope_check("1/n^2", rep.final.rate, [10**4, 10**5])


def test_slope_check_determinism():
    rep = cr.analyze("1/(n*ln(n))")
    a = sums.slope_check("1/(n*ln(n))", rep.final.rate, _CPS)
    b = sums.slope_check("1/(n*ln(n))", rep.final.rate, _CPS)
    assert a == b
