"""Expression parsing, binding, evaluation, and log-linear forms."""

from fractions import Fraction

import pytest
from mpmath import mp

from logladder import expr as ex
from logladder import numeric as nm
from logladder.errors import ParseError, PositivityViolation


def _f(text, n, params=None):
    return nm.to_float(ex.eval_expr(ex.parse(text), n, params))


def test_parse_eval_basics():
    assert _f("1/n^2", nm.from_value(10)) == pytest.approx(0.01)
    assert _f("(ln(n))^2/n", nm.from_value(mp.e)) == pytest.approx(
        float(1 / mp.e), rel=1e-12
    )
    assert _f("exp(-n/2)", nm.from_value(2)) == pytest.approx(
        float(mp.exp(-1)), rel=1e-12
    )


def test_iterated_log_shorthands():
    n = nm.from_value(10**6)
    assert _f("lnln(n)", n) == pytest.approx(float(mp.log(mp.log(10**6))),
                                             rel=1e-12)
    assert _f("ln(ln(n))", n) == pytest.approx(_f("lnln(n)", n), rel=1e-15)
    assert _f("lnlnln(n)", n) == pytest.approx(
        float(mp.log(mp.log(mp.log(10**6)))), rel=1e-12
    )


def test_rational_constants_stay_exact():
    # the exponent must survive as an exact fraction, not a float
    form = ex.to_log_power(ex.parse("n^(-3/2)"))
    assert form is not None
    assert form.exponent(0) == Fraction(-3, 2)
    assert form.exponent(1) == Fraction(0)


def test_parse_errors():
    for bad in ("", "1/((n)", "n +", "foo(n)", "2 3"):
        with pytest.raises(ParseError):
            ex.parse(bad)


def test_format_parse_roundtrip():
    for text in ("1/n^2", "(ln(n))^t/n", "1/(n*ln(n)*lnln(n))",
                 "exp(-n/2)", "n^(-1/2)"):
        e = ex.parse(text)
        again = ex.parse(ex.format_expr(e))
        n = nm.from_value(50)
        params = {"t": Fraction(1, 2)}
        assert nm.to_float(ex.eval_expr(e, n, params)) == pytest.approx(
            nm.to_float(ex.eval_expr(again, n, params)), rel=1e-14
        )


def test_free_params_and_bind():
    e = ex.parse("(ln(n))^t/n^s")
    assert ex.free_params(e) == {"t", "s"}
    bound = ex.bind(e, {"t": Fraction(1, 2), "s": 2})
    assert ex.free_params(bound) == set()
    assert nm.to_float(
        ex.eval_expr(bound, nm.from_value(100))
    ) == pytest.approx(float(mp.sqrt(mp.log(100)) / 100**2), rel=1e-12)


def test_domain_start_clears_iterated_logs():
    e = ex.parse("1/(n*ln(n)*lnln(n))")
    n0 = ex.domain_start(e)
    # lnln must be positive from the start index on
    v = nm.to_float(ex.eval_expr(e, n0))
    assert v > 0


def test_check_positive_rejects_sign_change():
    e = ex.parse("ln(n)-2")  # negative below e^2
    with pytest.raises(PositivityViolation):
        ex.check_positive(e, nm.from_value(2))


def test_check_positive_accepts_positive_terms():
    e = ex.parse("1/n^2")
    ex.check_positive(e, nm.from_value(1))


def test_to_log_power_reads_exponents():
    form = ex.to_log_power(ex.parse("(ln(n))^(1/2)/n"))
    assert form is not None


def test_linearize_log_transform_exact_combo():
    # ln of n^a (ln n)^b is a*ln(n) + b*lnln(n) exactly
    log_expr, opaque = ex.log_transform(ex.parse("(ln(n))^3/n^2"))
    assert not opaque
    combo = ex.linearize(log_expr)
    assert combo.is_exact
    assert combo.coeffs == {1: Fraction(-2), 2: Fraction(3)}
    assert combo.const == 0


def test_combo_leading_and_scaled():
    log_expr, _ = ex.log_transform(ex.parse("(ln(n))^3/n^2"))
    combo = ex.linearize(log_expr)
    depth, coeff = combo.leading()
    assert (depth, coeff) == (1, Fraction(-2))
    doubled = combo.scaled(Fraction(2))
    assert doubled.coeffs[1] == Fraction(-4)


def test_combo_merged_cancels():
    a = ex.linearize(ex.log_transform(ex.parse("1/n"))[0])
    b = ex.linearize(ex.log_transform(ex.parse("n"))[0])
    merged = a.merged(b, 1)
    assert merged.leading() is None  # full cancellation
    assert merged.const == 0


def test_constant_factor_lands_in_const_logs():
    log_expr, _ = ex.log_transform(ex.parse("2/(n*ln(n))"))
    combo = ex.linearize(log_expr)
    assert combo.is_exact
    got = nm.to_float(combo.const_value())
    assert got == pytest.approx(float(mp.log(2)), rel=1e-12)


def test_eval_matches_combo_eval():
    # the linear form evaluates to ln(a_n)
    e = ex.parse("(ln(n))^2/n^3")
    log_expr, _ = ex.log_transform(e)
    combo = ex.linearize(log_expr)
    n = nm.from_value(10**5)
    direct = nm.ext_ln(ex.eval_expr(e, n))
    linear = nm.from_value(combo.const)
    for depth, c in combo.coeffs.items():
        linear = nm.ext_add(
            linear,
            nm.ext_mul(nm.from_value(c), nm.iter_ln(depth, n)),
        )
    linear = nm.ext_add(linear, combo.const_value())
    assert nm.to_float(direct) == pytest.approx(
        nm.to_float(linear), rel=1e-12
    )
