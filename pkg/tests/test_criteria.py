"""Decision ladder: statistics, verdicts, escalation, and rates."""

from fractions import Fraction

import pytest

from logladder import criteria as cr
from logladder import numeric as nm
from logladder import scale as sc
from logladder.errors import (
    ExhaustedHierarchy,
    PositivityViolation,
    RangeError,
    UnboundParameterError,
)

NUM = cr.AnalysisPolicy(backend="numeric")
SYM = cr.AnalysisPolicy(backend="symbolic")


# -- term sources ----------------------------------------------------------------


def test_expr_term_requires_bound_params():
    with pytest.raises(UnboundParameterError):
        cr.ExprTerm("1/n^q")


def test_expr_term_rejects_negative_terms():
    with pytest.raises(PositivityViolation):
        cr.ExprTerm("ln(n)-10")


def test_callable_term_plain_only():
    t = cr.CallableTerm(lambda n: 1.0 / n)
    tower = nm.ext_exp(nm.ext_exp(nm.from_value(100)))
    with pytest.raises(RangeError):
        t.term(tower)


def test_callable_term_positivity_probe():
    with pytest.raises(PositivityViolation):
        cr.CallableTerm(lambda n: -1.0 / n)


def test_mutated_term_overrides():
    base = cr.ExprTerm("1/n^2")
    mut = cr.MutatedTerm(base, {7: "0.001"})
    assert mut.term(nm.from_value(7)) == nm.from_value(Fraction(1, 1000))
    assert nm.to_float(mut.term(nm.from_value(8))) == pytest.approx(1 / 64)
    with pytest.raises(ValueError):
        cr.MutatedTerm(base, {101: 1.0})  # beyond the mutable prefix
    with pytest.raises(PositivityViolation):
        cr.MutatedTerm(base, {3: -2.0})


# -- first rung: ratio statistic ---------------------------------------------------


def test_raabe_decides_powers():
    v = cr.raabe_test("1/n^2")
    assert v.decision == "converges"
    assert v.exact_value == Fraction(-2)
    assert v.rate.template == "precise-tail"
    pt = v.rate.predicted_sum(cr.ExprTerm("1/n^2"), 10**4)
    assert nm.to_float(pt) == pytest.approx(1e-4, abs=1e-8)

    v = cr.raabe_test("n^(-1/2)")
    assert v.decision == "diverges"
    assert v.exact_value == Fraction(-1, 2)
    assert v.rate.template == "precise-partial"


def test_raabe_boundary_hands_off():
    v = cr.raabe_test("(ln(n))^t/n", params={"t": 2})
    assert v.decision == "inconclusive"
    assert v.reason == "statistic-at-boundary"
    assert v.exact_value == Fraction(-1)


def test_raabe_numeric_callable():
    v = cr.raabe_test(lambda n: 1.0 / n**2)
    assert v.decision == "converges"
    assert nm.to_float(v.statistic.value) == pytest.approx(-2, abs=1e-3)


def test_raabe_geometric_infinite_statistic():
    v = cr.raabe_test("exp(-n/2)")
    assert v.decision == "converges"
    assert v.one_sided
    assert v.statistic.status == "diverged"


# -- scaled-log statistics ---------------------------------------------------------


def test_scaled_log_exact_order():
    for t, want in [("-2", "converges"), ("-1.2", "converges"),
                    ("0.5", "diverges")]:
        v = cr.scaled_log_test("(ln(n))^t/n", sc.IterLog(1),
                               params={"t": t})
        assert v.decision == want
        assert v.exact_value == Fraction(t)


def test_scaled_log_numeric_recovers_order():
    for t in ("-2", "-1.2", "0.5"):
        v = cr.scaled_log_test("(ln(n))^t/n", sc.IterLog(1), NUM,
                               params={"t": t})
        got = nm.to_float(v.statistic.value)
        assert got == pytest.approx(float(Fraction(t)), abs=1e-6)


def test_log_ratio_without_increment():
    v = cr.log_ratio_test("(ln(n))^t/n", sc.Identity(),
                          params={"t": "-1.2"})
    assert v.exact_value == Fraction(-1)
    assert v.decision == "inconclusive"
    v = cr.log_ratio_test("1/n^2", sc.Identity())
    assert v.exact_value == Fraction(-2)
    assert v.decision == "converges"


def test_difference_form_matches_quotient():
    v = cr.scaled_log_diff_test("1/n^2", sc.Identity())
    assert v.exact_value == Fraction(-2)
    assert v.rate.template == "precise-tail"
    vn = cr.scaled_log_diff_test("1/n^2", sc.Identity(), NUM)
    assert vn.decision == "converges"
    assert nm.to_float(vn.statistic.value) == pytest.approx(-2, abs=1e-3)


def test_local_order_statistic_pointwise():
    x = cr.local_order_statistic("1/n^2", sc.Identity(), 10**6)
    assert nm.to_float(x) == pytest.approx(-2, abs=1e-4)


# -- slow divergence ---------------------------------------------------------------


def test_slow_divergence_constant():
    v = cr.slow_divergence_test("1/(n*ln(n))", sc.IterLog(1))
    assert v.decision == "diverges"
    assert v.rate.template == "slow-log"
    assert v.rate.exact_constant == Fraction(1)
    v = cr.slow_divergence_test("2/(n*ln(n))", sc.IterLog(1))
    assert v.rate.exact_constant == Fraction(2)


def test_slow_divergence_numeric():
    v = cr.slow_divergence_test("1/(n*ln(n))", sc.IterLog(1), NUM)
    assert v.decision == "diverges"
    assert nm.to_float(v.rate.constant) == pytest.approx(1, abs=1e-3)


def test_slow_divergence_vanishing_ratio_inconclusive():
    v = cr.slow_divergence_test(
        "(lnln(n))^p/(n*ln(n))", sc.IterLog(1), params={"p": -2}
    )
    assert v.decision == "inconclusive"
    assert v.reason == "term-to-increment-ratio-vanishes"


def test_slow_divergence_diff_form_leaves_constant_open():
    v = cr.slow_divergence_diff_test("1/(n*ln(n))", sc.IterLog(1))
    assert v.decision == "diverges"
    assert v.rate.constant is None
    assert any("proportionality constant" in n for n in v.notes)


# -- escalation hierarchy ----------------------------------------------------------


def test_hierarchy_level_one():
    for p, want in [(-2, "converges"), ("0.5", "diverges")]:
        vs = cr.hierarchy_test("(lnln(n))^p/(n*ln(n))", sc.IterLog(1),
                               params={"p": p})
        v = vs[-1]
        assert v.level == 1
        assert v.decision == want
        assert v.exact_value == Fraction(str(p))


def test_hierarchy_level_one_numeric():
    vs = cr.hierarchy_test("(lnln(n))^p/(n*ln(n))", sc.IterLog(1),
                           policy=NUM, params={"p": -2})
    v = vs[-1]
    assert v.level == 1 and v.decision == "converges"
    assert nm.to_float(v.statistic.value) == pytest.approx(-2, abs=1e-6)


def test_hierarchy_truncated_all_boundary_decides_zero():
    vs = cr.hierarchy_test("1/(n*ln(n)*lnln(n))", sc.IterLog(1))
    assert [v.level for v in vs] == [1, 2]
    assert vs[0].exact_value == Fraction(-1)
    assert vs[0].decision == "inconclusive"
    assert vs[1].exact_value == Fraction(0)
    assert vs[1].decision == "diverges"
    assert any("0 + 1 = 1" in n for n in vs[1].notes)


def test_hierarchy_exhausts():
    with pytest.raises(ExhaustedHierarchy):
        cr.hierarchy_test(
            "1/(n*ln(n)*lnln(n)*lnlnln(n)*lnlnlnln(n))",
            sc.IterLog(1), k_max=2,
        )


def test_hierarchy_kmax_validation():
    with pytest.raises(ValueError):
        cr.hierarchy_test("1/(n*ln(n))", sc.IterLog(1), k_max=50)


# -- one-sided and o-regular -------------------------------------------------------


def test_one_sided_oscillating_divergence():
    def osc(n):
        return (2 + (-1) ** n) / n**0.5

    v = cr.one_sided_test(cr.CallableTerm(osc), sc.Identity())
    assert v.decision == "diverges"
    assert v.one_sided


def test_oscillation_vetoes_subsequence_verdicts():
    # plain estimates on even-only samples would claim convergence
    def osc(n):
        return (2 + (-1) ** n) / n**0.5

    rep = cr.analyze(osc)
    assert rep.final.decision == "diverges"


def test_o_regular_sandwich():
    rep = cr.o_regular_bounds("1/n^2", sc.Identity(), [2, 4])
    lo = nm.to_float(rep.lower_order.value)
    hi = nm.to_float(rep.upper_order.value)
    assert lo == pytest.approx(-2, abs=1e-2)
    assert hi == pytest.approx(-2, abs=1e-2)
    assert all(row.violations == 0 for row in rep.rows)


# -- the assembled ladder ----------------------------------------------------------


def test_analyze_power_term():
    rep = cr.analyze("1/n^2")
    assert rep.final.decision == "converges"
    assert rep.final.test_id == "raabe"
    assert len(rep.trace) == 1


def test_analyze_log_power_escalates_scale():
    rep = cr.analyze("(ln(n))^t/n", params={"t": "-1.2"})
    assert [v.test_id for v in rep.trace] == [
        "raabe", "scaled-log", "scaled-log"
    ]
    assert rep.trace[0].reason == "statistic-at-boundary"
    assert rep.trace[1].exact_value == Fraction(-1)
    assert rep.final.exact_value == Fraction(-6, 5)
    assert rep.final.scale.name == "ln"
    assert rep.final.rate.template == "log-ratio-tail"
    assert nm.to_float(rep.final.rate.exponent) == pytest.approx(-0.2)


def test_analyze_slow_divergence_chain():
    rep = cr.analyze("1/(n*ln(n))")
    assert rep.final.test_id == "slow-divergence"
    assert rep.final.decision == "diverges"
    assert rep.final.rate.exact_constant == Fraction(1)


def test_analyze_bertrand_middle():
    rep = cr.analyze("1/(n*ln(n)*(lnln(n))^q)", params={"q": "0.5"})
    assert rep.final.decision == "diverges"
    assert rep.final.level == 1
    assert rep.final.exact_value == Fraction(-1, 2)
    rep = cr.analyze("1/(n*ln(n)*(lnln(n))^q)", params={"q": 2})
    assert rep.final.decision == "converges"
    assert rep.final.exact_value == Fraction(-2)


def test_analyze_discrepancy_warning():
    rep = cr.analyze("1/(n*ln(n)*lnln(n))")
    hs = [v for v in rep.trace if v.test_id == "hierarchy"]
    assert hs[-1].exact_value == Fraction(0)
    assert rep.final.decision == "diverges"
    assert any("0 + 1 = 1" in w for w in rep.warnings)
    assert any("sometimes quoted" in w for w in rep.warnings)


def test_analyze_symbolic_backend_deep():
    rep = cr.analyze("1/(n*ln(n)*lnln(n)*lnlnln(n))", policy=SYM)
    assert rep.backend == "symbolic"
    assert rep.final.decision == "diverges"
    assert rep.final.level == 3
    assert rep.final.exact_value == Fraction(0)


def test_analyze_pinned_power_scale():
    pol = cr.AnalysisPolicy(scale=sc.parse_scale("pow:1/2"))
    rep = cr.analyze("1/n^2", pol)
    assert rep.final.decision == "converges"
    assert rep.final.exact_value == Fraction(-3)


def test_analyze_pinned_deep_scale():
    pol = cr.AnalysisPolicy(scale=sc.IterLog(2))
    rep = cr.analyze("1/(n*ln(n))", pol)
    assert rep.final.decision == "diverges"
    assert rep.final.exact_value == Fraction(0)


def test_analyze_pinned_identity_on_geometric():
    pol = cr.AnalysisPolicy(scale=sc.Identity())
    rep = cr.analyze("exp(-n/2)", pol)
    assert rep.final.decision == "converges"
    assert rep.final.one_sided


def test_analyze_exhausted_is_inconclusive():
    pol = cr.AnalysisPolicy(k_max=3)
    rep = cr.analyze("1/(n*ln(n)*lnln(n)*lnlnln(n)*lnlnlnln(n))", pol)
    assert rep.final.decision == "inconclusive"
    assert rep.final.reason == "exhausted"


def test_analyze_mutated_prefix_invariance():
    base = cr.ExprTerm("(ln(n))^t/n", params={"t": "0.5"})
    mut = cr.MutatedTerm(base, {1: "1000", 7: "0.001", 100: 5})
    r1 = cr.analyze(base)
    r2 = cr.analyze(mut)
    assert [v.decision for v in r1.trace] == [v.decision for v in r2.trace]
    assert r1.final.decision == r2.final.decision == "diverges"


def test_policy_validation():
    with pytest.raises(ValueError):
        cr.AnalysisPolicy(k_max=0)
    with pytest.raises(ValueError):
        cr.AnalysisPolicy(backend="psychic")
    # large k_max is accepted at construction; the hierarchy rejects it
    policy = cr.AnalysisPolicy(k_max=99)
    with pytest.raises(ValueError):
        cr.hierarchy_test("1/n", sc.Identity(), policy=policy)
