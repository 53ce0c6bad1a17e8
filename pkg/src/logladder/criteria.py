"""Convergence decisions for positive series.

Every test in this module compares some order statistic of the terms
against the boundary value -1: ratio increments, logs of the terms
against logs of a scale function, and an escalation hierarchy that
peels one iterated-log layer per level when the previous level landed
exactly on the boundary.

Statistics are carried as exact-coefficient combinations of iterated
logarithms (see expr.LogCombo) plus pointwise corrections that vanish
at infinity. The escalation cancellations therefore happen in exact
rational arithmetic; floating point only enters through residual
subexpressions and through the limit estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

from mpmath import mp

from . import expr as ex
from . import limits as lm
from . import numeric as nm
from . import scale as sc
from .errors import (
    AssumptionViolation,
    CancellationError,
    DivisionByZero,
    DomainError,
    ExhaustedHierarchy,
    LogLadderError,
    PositivityViolation,
    RangeError,
    UnboundParameterError,
)
from .expr import LogCombo
from .numeric import ExtScalar

__all__ = [
    "DECIDE_MARGIN",
    "TermSource",
    "ExprTerm",
    "CallableTerm",
    "MutatedTerm",
    "RatePrediction",
    "Verdict",
    "AnalysisPolicy",
    "AnalysisReport",
    "SandwichRow",
    "ORegularReport",
    "raabe_test",
    "log_ratio_test",
    "scaled_log_test",
    "scaled_log_diff_test",
    "local_order_statistic",
    "slow_divergence_test",
    "slow_divergence_diff_test",
    "hierarchy_test",
    "one_sided_test",
    "o_regular_bounds",
    "analyze",
]

DECIDE_MARGIN = Fraction(1, 1000)

# Grids never sample below this index, so finitely many leading terms
# (indices 1..100) can be modified without touching any statistic.
_GRID_FLOOR = 101


# -- term sources -------------------------------------------------------------


class TermSource:
    """Where the terms a_n come from.

    Implementations supply positive values at integer (or extended)
    indices and, when the sequence has an exact product-of-logs
    structure, the split of ln a_n used by the symbolic decision path.
    """

    text: str = "<terms>"

    @property
    def n_start(self) -> ExtScalar:
        raise NotImplementedError

    def term(self, n: ExtScalar) -> ExtScalar:
        raise NotImplementedError

    def log_combo(self) -> LogCombo | None:
        return None

    def normal_form(self) -> ex.LogPowerForm | None:
        return None


class ExprTerm(TermSource):
    """Terms defined by a parsed expression with all parameters bound."""

    def __init__(self, expression, params=None, text=None):
        if isinstance(expression, str):
            if text is None:
                text = expression
            expression = ex.parse(expression)
        self.params = {
            k: ex._as_fraction(v) for k, v in (params or {}).items()
        }
        bound = ex.bind(expression, self.params)
        free = ex.free_params(bound)
        if free:
            raise UnboundParameterError(free)
        self.expression = bound
        self.text = text if text is not None else ex.format_expr(bound)
        self._n_start = ex.domain_start(bound)
        ex.check_positive(bound, self._n_start)
        self._combo: LogCombo | None = None

    @property
    def n_start(self) -> ExtScalar:
        return self._n_start

    def term(self, n: ExtScalar) -> ExtScalar:
        return ex.eval_expr(self.expression, n)

    def log_combo(self) -> LogCombo:
        if self._combo is None:
            log_expr, _ = ex.log_transform(self.expression)
            self._combo = ex.linearize(log_expr)
        return self._combo

    def normal_form(self) -> ex.LogPowerForm | None:
        return ex.to_log_power(self.expression)


class CallableTerm(TermSource):
    """Terms supplied by a Python callable on integer indices.

    No exact log split is available, so every test runs numerically on
    plain integer grids.
    """

    def __init__(self, fn: Callable[[int], object], n_start: int = 1,
                 text: str = "<callable>"):
        self.fn = fn
        self.text = text
        n_start = int(n_start)
        if n_start < 1:
            raise ValueError("n_start must be at least 1")
        self._n_start = nm.from_value(n_start)
        for probe in (n_start, n_start + 1, 10 * (n_start + 1)):
            self.term(nm.from_value(probe))

    @property
    def n_start(self) -> ExtScalar:
        return self._n_start

    def term(self, n: ExtScalar) -> ExtScalar:
        if isinstance(n, ExtScalar):
            if n.level > 0 or n.as_mpf() > mp.mpf(2) ** 62:
                raise RangeError(
                    "callable terms are sampled at plain integer indices only"
                )
            idx = int(n.as_mpf())
        else:
            idx = int(n)
        v = nm.from_value(self.fn(idx))
        if v.sign < 0:
            # exact zeros pass: they read as underflowed terms, and the
            # log machinery skips those grid points on its own
            raise PositivityViolation(
                f"{self.text} is not positive at n={idx}", witness=idx
            )
        return v


class MutatedTerm(TermSource):
    """A source with finitely many overridden leading terms.

    Overrides are restricted to indices 1..100 and positive values;
    grids start at index 101 or later, so every limit statistic sees
    the base sequence unchanged. The wrapper exists to make that
    invariance testable, not to alter analysis results.
    """

    def __init__(self, base: TermSource, overrides: dict):
        self.base = base
        cleaned = {}
        for k, v in overrides.items():
            k = int(k)
            if not 1 <= k <= 100:
                raise ValueError("term overrides are limited to indices 1..100")
            val = nm.from_value(v)
            if not val.sign > 0:
                raise PositivityViolation(
                    f"override at n={k} is not positive", witness=k
                )
            cleaned[k] = val
        self.overrides = cleaned
        self.text = base.text + " [mutated prefix]"

    @property
    def n_start(self) -> ExtScalar:
        return self.base.n_start

    def term(self, n: ExtScalar) -> ExtScalar:
        if isinstance(n, ExtScalar) and n.level == 0:
            v = n.as_mpf()
            if abs(v) <= 100 and v == int(v) and int(v) in self.overrides:
                return self.overrides[int(v)]
        elif isinstance(n, int) and n in self.overrides:
            return self.overrides[n]
        return self.base.term(n)

    def log_combo(self) -> LogCombo | None:
        return self.base.log_combo()

    def normal_form(self) -> ex.LogPowerForm | None:
        return self.base.normal_form()


def _as_term(seq, params=None) -> TermSource:
    if isinstance(seq, TermSource):
        return seq
    if isinstance(seq, (str, ex.Expr)):
        return ExprTerm(seq, params)
    if callable(seq):
        return CallableTerm(seq)
    raise TypeError(f"not a term source: {seq!r}")


# -- rate predictions ----------------------------------------------------------

_TAIL_TEMPLATES = frozenset({"precise-tail", "log-ratio-tail", "log-log-tail"})
_RATIO_PREFIXES = ("log-ratio-", "log-log-")


@dataclass(frozen=True)
class RatePrediction:
    """How the partial or tail sums grow, according to the deciding test.

    Templates:
      precise-tail      sum from n on  ~ (-1/(1+order)) * (w(n)/dw(n)) * a_n
      precise-partial   sum up to n    ~ ( 1/(1+order)) * (w(n)/dw(n)) * a_n
      log-ratio-tail    ln(tail sum)    / ln w(n)              -> order + 1
      log-ratio-partial ln(partial sum) / ln w(n)              -> order + 1
      log-log-tail      ln(tail sum)    / (level+1)-fold log w -> order + 1
      log-log-partial   ln(partial sum) / (level+1)-fold log w -> order + 1
      slow-log          partial sums ~ constant * ln w(n)
      slow-log-bound    partial sums grow at least like ln w(n) (one-sided)
    """

    template: str
    scale: sc.ScaleFn
    level: int = 0
    order: ExtScalar | None = None
    exact_order: Fraction | None = None
    constant: ExtScalar | None = None
    exact_constant: Fraction | None = None
    one_sided: bool = False

    @property
    def sum_kind(self) -> str:
        """Which sum the prediction is about: 'tail' or 'partial'."""
        return "tail" if self.template in _TAIL_TEMPLATES else "partial"

    @property
    def exponent(self) -> ExtScalar | None:
        """Predicted limit of ln(sum)/normalizer for the ratio templates."""
        if not self.template.startswith(_RATIO_PREFIXES):
            return None
        if self.exact_order is not None:
            return nm.from_value(self.exact_order + 1)
        if self.order is None:
            return None
        return nm.ext_add(self.order, nm.ONE)

    def normalizer(self, n) -> ExtScalar:
        """The comparison function at n: the (level+1)-fold log of the scale."""
        return ex.eval_expr(self.scale.ln_chain(self.level + 1), nm.from_value(n))

    def predicted_sum(self, term: TermSource, n) -> ExtScalar | None:
        """Asymptotic sum value at n for templates that pin one down."""
        n = nm.from_value(n)
        if self.template in ("precise-tail", "precise-partial"):
            if self.exact_order is not None:
                th = nm.from_value(self.exact_order)
            else:
                th = self.order
            lead = nm.ext_div(self.scale.value(n), self.scale.delta(n))
            base = nm.ext_mul(lead, term.term(n))
            coef = nm.ext_div(nm.ONE, nm.ext_add(nm.ONE, th))
            if self.template == "precise-tail":
                coef = nm.ext_neg(coef)
            return nm.ext_mul(coef, base)
        if self.template == "slow-log" and self.constant is not None:
            return nm.ext_mul(
                self.constant, ex.eval_expr(self.scale.ln_chain(1), n)
            )
        return None


# -- verdicts -------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of one test: a decision plus the statistic behind it.

    statistic holds the estimate of the test's limit; for the
    slow-divergence tests it is the limit of ln(w * a_n / dw), not a
    quantity compared against -1. exact_value is set when the symbolic
    path produced the statistic as an exact rational. one_sided marks
    decisions justified by an envelope or an unbounded statistic rather
    than a two-sided limit.
    """

    decision: str
    test_id: str
    scale: sc.ScaleFn | None
    level: int
    statistic: lm.LimitEstimate
    rate: RatePrediction | None = None
    exact_value: Fraction | None = None
    one_sided: bool = False
    reason: str = ""
    notes: tuple = ()

    @property
    def decisive(self) -> bool:
        return self.decision in ("converges", "diverges")


@dataclass(frozen=True)
class AnalysisPolicy:
    """Knobs for analyze(); the defaults mirror the CLI."""

    scale: sc.ScaleFn | None = None
    k_max: int = 4
    margin: Fraction = DECIDE_MARGIN
    backend: str = "auto"
    tower_count: int = 12
    geometric_count: int = 10
    geometric_ratio: int = 10
    grid: object | None = None

    def __post_init__(self):
        if self.backend not in ("auto", "symbolic", "numeric"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


@dataclass
class AnalysisReport:
    """Everything analyze() learned about one series."""

    sequence: str
    params: dict
    backend: str
    normal_form: ex.LogPowerForm | None
    policy: AnalysisPolicy
    trace: list
    final: Verdict
    warnings: list
    oracle: dict | None = None


# -- combo evaluation -----------------------------------------------------------


def _eval_combo(combo: LogCombo, n: ExtScalar) -> ExtScalar:
    """Value of the combo at n under the active precision."""
    total = combo.const_value()
    for depth in sorted(combo.coeffs):
        c = combo.coeffs[depth]
        v = n if depth == 0 else nm.iter_ln(depth, n)
        total = nm.ext_add(total, nm.ext_mul(nm.from_value(c), v))
    for r in combo.residuals:
        total = nm.ext_add(total, ex.eval_expr(r, n))
    return total


def _index_bits(n: ExtScalar) -> int:
    v = abs(n.as_mpf())
    return max(1, int(mp.log(v + 2, 2)) + 1)


def _delta_combo(combo: LogCombo, n: ExtScalar) -> ExtScalar:
    """combo(n+1) - combo(n) via per-term stable increments.

    Constant parts drop exactly. Residuals are differenced at a
    precision boosted past the 1/n-scale cancellation.
    """
    total = nm.ZERO
    for depth in sorted(combo.coeffs):
        c = combo.coeffs[depth]
        inc = nm.ONE if depth == 0 else sc.IterLog(depth).delta(n)
        total = nm.ext_add(total, nm.ext_mul(nm.from_value(c), inc))
    if combo.residuals:
        bits = nm.get_precision().significand_bits
        n1 = nm.ext_add(n, nm.ONE)
        with nm.local_precision(bits + 2 * _index_bits(n) + 64):
            for r in combo.residuals:
                d = nm.ext_sub(ex.eval_expr(r, n1), ex.eval_expr(r, n))
                total = nm.ext_add(total, d)
    return total


def _chain_combo(w: sc.ScaleFn, depth: int) -> LogCombo:
    return ex.linearize(w.ln_chain(depth))


# -- symbolic kernel -------------------------------------------------------------


def _symbolic_ratio(num: LogCombo, den: LogCombo):
    """Exact limit of num/den along n, when both splits are exact.

    The corrections attached to these statistics vanish at infinity and
    constant parts are dominated by any growing log, so the limit is
    read off the shallowest surviving terms: a shallower numerator term
    forces the ratio to +/- infinity, matching depths give the ratio of
    coefficients, and a deeper numerator (or none) gives 0. The same
    reading applies to ratios of first differences, because increments
    of iterated logs at matching depth dominate all deeper ones.

    Returns ('finite', Fraction), ('infinite', +1 or -1), or None when
    the exact route does not apply.
    """
    if not (num.is_exact and den.is_exact):
        return None
    dl = den.leading()
    if dl is None or dl[1] <= 0:
        return None
    m, s = dl
    nl = num.leading()
    if nl is None or nl[0] > m:
        return ("finite", Fraction(0))
    if nl[0] == m:
        return ("finite", nl[1] / s)
    return ("infinite", 1 if nl[1] > 0 else -1)


def _exact_const_exp(combo: LogCombo) -> Fraction | None:
    """exp(constant part of combo) as an exact rational, when it is one."""
    if combo.const != 0:
        return None
    out = Fraction(1)
    for mult, depth, base in combo.const_logs:
        if depth != 1 or mult.denominator != 1:
            return None
        out *= Fraction(base) ** mult.numerator
    return out


# -- grids ------------------------------------------------------------------------


def _n_floor(term: TermSource) -> ExtScalar:
    lo = nm.from_value(_GRID_FLOOR)
    return term.n_start if term.n_start > lo else lo


def _plain_start(term: TermSource) -> int | None:
    """Integer grid start, or None when the domain begins out of range."""
    nf = _n_floor(term)
    try:
        v = nf.as_mpf()
    except RangeError:
        return None
    if v > 10**14:
        return None
    return int(mp.ceil(v))


def _tower_start(level: int, n_floor: ExtScalar, extra_depth: int):
    """Smallest integer r with exp^level(r) past the floor and the
    deepest numerator log positive, or None when no such grid fits."""
    r0 = 2
    try:
        f = nm.to_float(nm.iter_ln(level, n_floor))
        if math.isinf(f):
            return None
        if f > 1e7:
            return None
        r0 = max(r0, int(math.floor(f)) + 1)
    except (DomainError, RangeError):
        pass  # floor is below the level threshold; r0 = 2 clears it
    if extra_depth > 0:
        req = mp.mpf("1.000001")
        for _ in range(extra_depth):
            req = mp.exp(req)
            if req > 1e7:
                return None
        r0 = max(r0, int(mp.ceil(req)))
    return r0


def _statistic_grid(term: TermSource, den_depth: int, num_depths,
                    policy: AnalysisPolicy):
    """Grid for a quotient statistic whose comparison log has den_depth."""
    if policy.grid is not None:
        return lm.make_grid(policy.grid)
    if term.log_combo() is None:
        start = _plain_start(term)
        if start is None:
            return None
        return lm.make_grid(
            lm.Geometric(start, policy.geometric_ratio, policy.geometric_count)
        )
    if den_depth > nm.get_precision().max_tower_level:
        return None
    extra = max((d for d in num_depths if d > den_depth), default=den_depth)
    r0 = _tower_start(den_depth, _n_floor(term), extra - den_depth)
    if r0 is None:
        return None
    return lm.make_grid(
        lm.TowerGeometric(den_depth, r0, 1, policy.tower_count)
    )


def _plain_grid(term: TermSource, policy: AnalysisPolicy):
    if policy.grid is not None:
        return lm.make_grid(policy.grid)
    start = _plain_start(term)
    if start is None:
        return None
    return lm.make_grid(
        lm.Geometric(start, policy.geometric_ratio, policy.geometric_count)
    )


# -- sampling ----------------------------------------------------------------------

_SKIP = (DomainError, DivisionByZero, RangeError, CancellationError)


def _collect(sampler, grid):
    values, dropped = [], 0
    for n in grid:
        try:
            values.append(sampler(n))
        except _SKIP:
            dropped += 1
    return values, dropped


def _pair_spread(a: ExtScalar, b: ExtScalar):
    fa, fb = nm.to_float(a), nm.to_float(b)
    if math.isinf(fa) or math.isinf(fb):
        return 0.0 if (fa > 0) == (fb > 0) else math.inf
    return abs(fb - fa) / (1 + max(abs(fa), abs(fb)))


def _sample_grid(sampler, grid):
    """Primary samples plus n+1 companions at plain points.

    Returns (values, interleaved, spreads, dropped): values follows the
    grid, interleaved also holds the companion samples in order, and
    spreads holds the relative gap of each pair.
    """
    values, inter, spreads, dropped = [], [], [], 0
    for n in grid:
        try:
            v = sampler(n)
        except _SKIP:
            dropped += 1
            continue
        values.append(v)
        inter.append(v)
        if n.level == 0:
            try:
                v2 = sampler(nm.ext_add(n, nm.ONE))
            except _SKIP:
                continue
            inter.append(v2)
            spreads.append(_pair_spread(v, v2))
    return values, inter, spreads, dropped


def _estimate(sampler, grid, margin=DECIDE_MARGIN):
    """Estimate the sampler's limit over the grid.

    Geometric integer grids can stride over a periodic component of the
    statistic (even indices only, say) and watch a subsequence that
    settles or blows up while the full statistic oscillates. At plain
    points the sampler is therefore also evaluated at n+1, and pair
    spreads beyond the decision margin veto any verdict from the
    strided subsequence.
    """
    values, _, spreads, dropped = _sample_grid(sampler, grid)
    if len(values) < 8:
        return None, dropped
    if spreads and max(spreads[-3:]) > float(margin):
        return lm.LimitEstimate(
            "not_converged", samples_used=len(values)
        ), dropped
    return lm.estimate_limit(values), dropped


def _quotient_pieces(term: TermSource, w: sc.ScaleFn, level: int,
                     include_delta: bool):
    """(num, den) combos for the level-th escalation statistic.

    num = ln a_n [- ln dw(n)] + sum_{i=1..level} i-fold log of w(n)
    den = (level+1)-fold log of w(n)

    Returns None when the term has no exact log split or, with
    include_delta, when the scale has no increment split.
    """
    tc = term.log_combo()
    if tc is None:
        return None
    num = tc
    if include_delta:
        dc = w.log_delta_combo()
        if dc is None:
            return None
        num = num.merged(dc, -1)
    for i in range(1, level + 1):
        num = num.merged(_chain_combo(w, i), 1)
    return num, _chain_combo(w, level + 1)


def _combo_quotient_sampler(num: LogCombo, den: LogCombo, corr):
    bits = nm.get_precision().significand_bits

    def sample(n):
        with nm.local_precision(bits + 64):
            dv = _eval_combo(den, n)
            if not dv.sign > 0:
                raise DomainError("comparison log not yet positive")
            nv = _eval_combo(num, n)
            if corr is not None:
                nv = nm.ext_sub(nv, corr(n))
            return nm.ext_div(nv, dv)

    return sample


def _raw_quotient_sampler(term: TermSource, w: sc.ScaleFn, level: int,
                          include_delta: bool):
    bits = nm.get_precision().significand_bits
    chains = [w.ln_chain(i) for i in range(1, level + 1)]
    den_expr = w.ln_chain(level + 1)

    def sample(n):
        with nm.local_precision(bits + 64):
            nv = nm.ext_ln(term.term(n))
            if include_delta:
                nv = nm.ext_sub(nv, w.log_delta(n))
            for c in chains:
                nv = nm.ext_add(nv, ex.eval_expr(c, n))
            dv = ex.eval_expr(den_expr, n)
            if not dv.sign > 0:
                raise DomainError("comparison log not yet positive")
            return nm.ext_div(nv, dv)

    return sample


def _combo_difference_sampler(num: LogCombo, den: LogCombo, corr):
    bits = nm.get_precision().significand_bits

    def sample(n):
        if n.level > 0:
            raise RangeError("difference statistics need plain indices")
        with nm.local_precision(bits + 2 * _index_bits(n) + 64):
            dd = _delta_combo(den, n)
            if dd.sign == 0:
                raise DivisionByZero("scale increment vanished")
            dn = _delta_combo(num, n)
            if corr is not None:
                n1 = nm.ext_add(n, nm.ONE)
                dn = nm.ext_sub(dn, nm.ext_sub(corr(n1), corr(n)))
            return nm.ext_div(dn, dd)

    return sample


def _raw_difference_sampler(term: TermSource, w: sc.ScaleFn, level: int,
                            include_delta: bool):
    bits = nm.get_precision().significand_bits
    chains = [w.ln_chain(i) for i in range(1, level + 1)]
    den_expr = w.ln_chain(level + 1)

    def sample(n):
        if n.level > 0:
            raise RangeError("difference statistics need plain indices")
        with nm.local_precision(bits + 2 * _index_bits(n) + 64):
            n1 = nm.ext_add(n, nm.ONE)
            dn = nm.ext_ln(nm.ext_div(term.term(n1), term.term(n)))
            if include_delta:
                dn = nm.ext_sub(
                    dn, nm.ext_ln(nm.ext_div(w.delta(n1), w.delta(n)))
                )
            for c in chains:
                dn = nm.ext_add(dn, nm.ext_ln(nm.ext_div(
                    ex.eval_expr(c, n1), ex.eval_expr(c, n))))
            dv = nm.ext_ln(nm.ext_div(
                ex.eval_expr(den_expr, n1), ex.eval_expr(den_expr, n)))
            if dv.sign == 0:
                raise DivisionByZero("scale increment vanished")
            return nm.ext_div(dn, dv)

    return sample


# -- decisions ----------------------------------------------------------------------


def _decide(est: lm.LimitEstimate, exact: Fraction | None, margin: Fraction):
    """Side of the -1 boundary, or None when undecided."""
    if est.status == "diverged":
        return "converges" if est.direction < 0 else "diverges"
    if est.status != "converged":
        return None
    if exact is not None:
        if exact == -1:
            return None
        return "converges" if exact < -1 else "diverges"
    if est.value < nm.from_value(Fraction(-1) - margin):
        return "converges"
    if est.value > nm.from_value(Fraction(-1) + margin):
        return "diverges"
    return None


def _ratio_rate(decision: str, w: sc.ScaleFn, level: int,
                est: lm.LimitEstimate, exact: Fraction | None):
    kind = "log-ratio-" if level == 0 else "log-log-"
    kind += "tail" if decision == "converges" else "partial"
    return RatePrediction(
        template=kind, scale=w, level=level,
        order=est.value, exact_order=exact,
    )


def _precise_rate(decision: str, w: sc.ScaleFn, est: lm.LimitEstimate,
                  exact: Fraction | None):
    kind = "precise-tail" if decision == "converges" else "precise-partial"
    return RatePrediction(
        template=kind, scale=w, level=0,
        order=est.value, exact_order=exact,
    )


def _inconclusive(test_id, w, level, est, reason, exact=None, notes=()):
    if est is None:
        est = lm.LimitEstimate("not_converged")
    return Verdict(
        "inconclusive", test_id, w, level, est,
        exact_value=exact, reason=reason, notes=tuple(notes),
    )


def _ratio_verdict(term: TermSource, w: sc.ScaleFn, level: int,
                   policy: AnalysisPolicy, test_id: str,
                   include_delta: bool, form: str = "quotient") -> Verdict:
    """Shared engine for the quotient and difference log tests."""
    pieces = _quotient_pieces(term, w, level, include_delta)
    exact = None
    est = None
    if pieces is not None and policy.backend != "numeric":
        sym = _symbolic_ratio(*pieces)
        if sym is not None:
            if sym[0] == "finite":
                exact = sym[1]
                est = lm.LimitEstimate.exact(exact)
            else:
                est = lm.LimitEstimate.exact_infinite(sym[1])
    if est is None:
        if policy.backend == "symbolic":
            raise LogLadderError(
                f"{test_id}: no exact log split for the symbolic backend"
            )
        corr = w.delta_correction if include_delta else None
        if form == "quotient":
            if pieces is not None:
                num, den = pieces
                dl = den.leading()
                den_depth = dl[0] if dl is not None else level + 1
                grid = _statistic_grid(
                    term, den_depth, num.coeffs.keys(), policy
                )
                sampler = _combo_quotient_sampler(num, den, corr)
            else:
                grid = _plain_grid(term, policy)
                sampler = _raw_quotient_sampler(term, w, level, include_delta)
        else:
            grid = _plain_grid(term, policy)
            if pieces is not None:
                sampler = _combo_difference_sampler(*pieces, corr)
            else:
                sampler = _raw_difference_sampler(
                    term, w, level, include_delta
                )
        if grid is None:
            return _inconclusive(test_id, w, level, None, "insufficient-signal")
        est, _ = _estimate(sampler, grid, policy.margin)
        if est is None:
            return _inconclusive(
                test_id, w, level, None, "insufficient-signal"
            )
    decision = _decide(est, exact, policy.margin)
    if decision is None:
        reason = (
            "statistic-at-boundary" if est.status == "converged"
            else "statistic-not-convergent"
        )
        return _inconclusive(test_id, w, level, est, reason, exact)
    rate = None
    one_sided = False
    if est.status == "converged":
        if form == "difference" and level == 0:
            rate = _precise_rate(decision, w, est, exact)
        else:
            rate = _ratio_rate(decision, w, level, est, exact)
    else:
        one_sided = True  # unbounded statistic: one-sided comparison
    return Verdict(
        decision, test_id, w, level, est,
        rate=rate, exact_value=exact, one_sided=one_sided,
    )


# -- public tests ----------------------------------------------------------------


def raabe_test(seq, policy: AnalysisPolicy | None = None,
               params=None) -> Verdict:
    """Ratio-increment test: the limit of n * (a_{n+1}/a_n - 1).

    Below -1 the series converges with tail sums ~ -n a_n/(1+order);
    above -1 it diverges with partial sums ~ n a_n/(1+order); at -1
    nothing follows and the scale tests take over.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    combo = term.log_combo()
    exact = None
    est = None
    if (combo is not None and combo.is_exact
            and policy.backend != "numeric"):
        # Exact product of log powers: each factor (k-fold log)^c
        # contributes c to the statistic at depth 1 and only o(1)
        # beyond it, so the limit is the depth-1 coefficient; a
        # depth-0 term means a geometric factor and an infinite limit.
        c0 = combo.coeffs.get(0, Fraction(0))
        if c0 != 0:
            est = lm.LimitEstimate.exact_infinite(1 if c0 > 0 else -1)
        else:
            exact = combo.coeffs.get(1, Fraction(0))
            est = lm.LimitEstimate.exact(exact)
    if est is None:
        if policy.backend == "symbolic":
            raise LogLadderError(
                "raabe: no exact log split for the symbolic backend"
            )
        grid = _plain_grid(term, policy)
        if grid is None:
            return _inconclusive("raabe", None, 0, None, "insufficient-signal")
        bits = nm.get_precision().significand_bits

        def sample(n):
            with nm.local_precision(bits + _index_bits(n) + 64):
                r = nm.ext_div(
                    term.term(nm.ext_add(n, nm.ONE)), term.term(n)
                )
                return nm.ext_mul(n, nm.ext_sub(r, nm.ONE))

        est, _ = _estimate(sample, grid, policy.margin)
        if est is None:
            return _inconclusive("raabe", None, 0, None, "insufficient-signal")
    decision = _decide(est, exact, policy.margin)
    if decision is None:
        reason = (
            "statistic-at-boundary" if est.status == "converged"
            else "statistic-not-convergent"
        )
        return _inconclusive("raabe", None, 0, est, reason, exact)
    rate = None
    one_sided = False
    if est.status == "converged":
        rate = _precise_rate(decision, sc.Identity(), est, exact)
    else:
        one_sided = True
    return Verdict(
        decision, "raabe", None, 0, est,
        rate=rate, exact_value=exact, one_sided=one_sided,
    )


def log_ratio_test(seq, w: sc.ScaleFn, policy: AnalysisPolicy | None = None,
                   params=None) -> Verdict:
    """Limit of ln a_n / ln w(n) against the -1 boundary.

    Decisive values attach the log-ratio rate: ln of the partial (or
    tail) sums over ln w(n) tends to order + 1.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    return _ratio_verdict(
        term, w, 0, policy, "log-ratio", include_delta=False
    )


def scaled_log_test(seq, w: sc.ScaleFn, policy: AnalysisPolicy | None = None,
                    params=None) -> Verdict:
    """Limit of ln(a_n / dw(n)) / ln w(n) against the -1 boundary.

    dw(n) = w(n+1) - w(n). Same rate templates as the plain log-ratio
    test, but the increment normalization makes the statistic exact for
    scale-matched sequences and feeds the escalation hierarchy when the
    limit lands on -1.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    return _ratio_verdict(
        term, w, 0, policy, "scaled-log", include_delta=True
    )


def scaled_log_diff_test(seq, w: sc.ScaleFn,
                         policy: AnalysisPolicy | None = None,
                         params=None) -> Verdict:
    """First-difference form: lim d ln(a_n/dw(n)) / d ln w(n).

    Stronger rates than the quotient form when decisive: the precise
    templates, partial sums ~ (1/(1+order)) (w(n)/dw(n)) a_n and the
    mirrored tail form.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    return _ratio_verdict(
        term, w, 0, policy, "scaled-log-diff",
        include_delta=True, form="difference",
    )


def local_order_statistic(seq, w: sc.ScaleFn, n, form: str = "quotient",
                          params=None) -> ExtScalar:
    """Pointwise order of a_n against the scale increment.

    quotient:   ln(a_n / dw(n)) / ln w(n) at the given n.
    difference: the increment of ln(a_n/dw(n)) over the increment of
                ln w(n) between n and n+1.
    """
    term = _as_term(seq, params)
    n = nm.from_value(n)
    bits = nm.get_precision().significand_bits
    if form == "quotient":
        with nm.local_precision(bits + 64):
            num = nm.ext_sub(nm.ext_ln(term.term(n)), w.log_delta(n))
            den = ex.eval_expr(w.ln_chain(1), n)
            if not den.sign > 0:
                raise DomainError("comparison log not yet positive")
            return nm.ext_div(num, den)
    if form == "difference":
        sampler = _raw_difference_sampler(term, w, 0, include_delta=True)
        return sampler(n)
    raise ValueError(f"unknown form {form!r}")


_BOUND_NOTE = (
    "one-sided: the term-to-increment ratio stays bounded away from "
    "zero, so the partial sums grow at least like ln of the scale"
)


def _slow_divergence(term: TermSource, w: sc.ScaleFn,
                     policy: AnalysisPolicy, mode: str,
                     test_id: str, identify_constant: bool) -> Verdict:
    pieces = _quotient_pieces(term, w, 1, include_delta=True)
    lng = pieces[0] if pieces is not None else None
    est = None
    exact_c = None
    if (lng is not None and lng.is_exact
            and policy.backend != "numeric"):
        lead = lng.leading()
        if lead is None:
            value = lng.const_value()
            est = lm.LimitEstimate(
                "converged", value, nm.ZERO, "exact", 0
            )
            if identify_constant:
                exact_c = _exact_const_exp(lng)
        else:
            est = lm.LimitEstimate.exact_infinite(1 if lead[1] > 0 else -1)
    values = None
    if est is None:
        if policy.backend == "symbolic":
            raise LogLadderError(
                f"{test_id}: no exact log split for the symbolic backend"
            )
        if lng is not None:
            lead = lng.leading()
            grid_depth = lead[0] if lead is not None and lead[0] >= 1 else 1
            grid = _statistic_grid(term, grid_depth, lng.coeffs.keys(), policy)

            def sampler(n):
                with nm.local_precision(
                        nm.get_precision().significand_bits + 64):
                    v = _eval_combo(lng, n)
                    return nm.ext_sub(v, w.delta_correction(n))
        else:
            grid = _plain_grid(term, policy)

            def sampler(n):
                with nm.local_precision(
                        nm.get_precision().significand_bits + 64):
                    g = nm.ext_div(
                        nm.ext_mul(w.value(n), term.term(n)), w.delta(n)
                    )
                    return nm.ext_ln(g)
        if grid is None:
            return _inconclusive(test_id, w, 0, None, "insufficient-signal")
        primary, values, spreads, _ = _sample_grid(sampler, grid)
        if len(primary) < 8:
            return _inconclusive(test_id, w, 0, None, "insufficient-signal")
        if spreads and max(spreads[-3:]) > float(policy.margin):
            est = lm.LimitEstimate(
                "not_converged", samples_used=len(primary)
            )
        else:
            est = lm.estimate_limit(primary)
    # Interpret the limit of ln g, g = w * a_n / dw.
    if est.status == "converged" and mode in ("full", "convergent"):
        if identify_constant:
            c = (nm.from_value(exact_c) if exact_c is not None
                 else nm.ext_exp(est.value))
            rate = RatePrediction(
                template="slow-log", scale=w,
                constant=c, exact_constant=exact_c,
            )
            notes = ()
        else:
            rate = RatePrediction(template="slow-log", scale=w)
            notes = (
                "proportionality constant not identified by this form; "
                "estimate it from checkpoint sums",
            )
        return Verdict(
            "diverges", test_id, w, 0, est, rate=rate,
            exact_value=exact_c, notes=notes,
        )
    if est.status == "diverged":
        if est.direction > 0 and mode in ("full", "bound"):
            rate = RatePrediction(
                template="slow-log-bound", scale=w, one_sided=True
            )
            return Verdict(
                "diverges", test_id, w, 0, est, rate=rate,
                one_sided=True, notes=(_BOUND_NOTE,),
            )
        if est.direction < 0:
            return _inconclusive(
                test_id, w, 0, est, "term-to-increment-ratio-vanishes"
            )
    if (est.status == "not_converged" and values is not None
            and mode in ("full", "bound")):
        _, inf_est = lm.estimate_limsup_liminf(values)
        bounded_below = (
            inf_est.status == "converged"
            or (inf_est.status == "diverged" and inf_est.direction > 0)
        )
        if bounded_below:
            rate = RatePrediction(
                template="slow-log-bound", scale=w, one_sided=True
            )
            return Verdict(
                "diverges", test_id, w, 0, inf_est, rate=rate,
                one_sided=True, notes=(_BOUND_NOTE,),
            )
    reason = (
        "deferred" if est.status == "converged"
        else "statistic-not-convergent"
    )
    return _inconclusive(test_id, w, 0, est, reason)


def slow_divergence_test(seq, w: sc.ScaleFn,
                         policy: AnalysisPolicy | None = None,
                         params=None, mode: str = "full") -> Verdict:
    """Growth of g(n) = w(n) a_n / dw(n) when the scaled-log limit is -1.

    If g tends to a finite limit C > 0 the series diverges with partial
    sums ~ C ln w(n). If g only stays bounded away from zero, the series
    still diverges but only the one-sided floor ln w(n) is claimed.
    mode restricts which outcome may fire: 'convergent', 'bound', or
    'full'.
    """
    if mode not in ("full", "convergent", "bound"):
        raise ValueError(f"unknown mode {mode!r}")
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    return _slow_divergence(
        term, w, policy, mode, "slow-divergence", identify_constant=True
    )


def slow_divergence_diff_test(seq, w: sc.ScaleFn,
                              policy: AnalysisPolicy | None = None,
                              params=None, mode: str = "full") -> Verdict:
    """Difference-form variant of the slow-divergence test.

    Works from accumulated increments of ln g rather than from g
    itself, so a convergent outcome asserts partial sums ~ E ln w(n)
    for some constant E > 0 without identifying E.
    """
    if mode not in ("full", "convergent", "bound"):
        raise ValueError(f"unknown mode {mode!r}")
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    return _slow_divergence(
        term, w, policy, mode, "slow-divergence-diff",
        identify_constant=False,
    )


def _zero_statistic_note(level: int) -> str:
    return (
        f"level-{level} statistic is 0, so the predicted exponent of "
        f"ln(partial sums) over the level-{level + 1} log of the scale "
        "is 0 + 1 = 1; the value 0 is sometimes quoted for this limit, "
        "but the partial sums grow like the comparison log itself, "
        "which makes the normalized limit 1"
    )


def hierarchy_test(seq, w: sc.ScaleFn, k_max: int | None = None,
                   policy: AnalysisPolicy | None = None,
                   params=None, form: str = "quotient") -> list:
    """Escalation levels 1..k_max of the scaled-log statistic.

    Level j adds the j-th iterated log of w(n) to the numerator and
    compares against the (j+1)-fold log: the level-j limit below -1
    gives convergence, above -1 divergence, and exactly -1 escalates to
    level j+1. Raises ExhaustedHierarchy (carrying the per-level
    verdicts) when no level decides.
    """
    if form not in ("quotient", "difference"):
        raise ValueError(f"unknown form {form!r}")
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    k_max = policy.k_max if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    limit = nm.get_precision().max_tower_level - 2
    if k_max > limit:
        raise ValueError(
            f"k_max={k_max} exceeds the tower budget (max {limit})"
        )
    test_id = "hierarchy" if form == "quotient" else "hierarchy-diff"
    levels = []
    for j in range(1, k_max + 1):
        v = _ratio_verdict(
            term, w, j, policy, test_id,
            include_delta=True, form=form,
        )
        if v.decision == "diverges" and _is_zero_statistic(v, policy.margin):
            v = replace(v, notes=v.notes + (_zero_statistic_note(j),))
        levels.append(v)
        if v.decisive:
            return levels
        if v.reason != "statistic-at-boundary":
            break  # deeper levels assume this one landed exactly on -1
    raise ExhaustedHierarchy(levels)


def _is_zero_statistic(v: Verdict, margin: Fraction) -> bool:
    if v.exact_value is not None:
        return v.exact_value == 0
    est = v.statistic
    if est.status != "converged":
        return False
    return abs(est.value) < nm.from_value(margin)


def one_sided_test(seq, w: sc.ScaleFn, policy: AnalysisPolicy | None = None,
                   params=None) -> Verdict:
    """Envelope version of the scaled-log test for oscillating statistics.

    The upper envelope settling below -1 proves convergence; the lower
    envelope settling above -1 proves divergence. No rate is claimed in
    either case.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    pieces = _quotient_pieces(term, w, 0, include_delta=True)
    if pieces is not None and policy.backend != "numeric":
        sym = _symbolic_ratio(*pieces)
        if sym is not None:
            # Exact statistics have a plain limit; both envelopes agree
            # with it, so the two-sided verdict carries over.
            v = _ratio_verdict(
                term, w, 0, policy, "one-sided", include_delta=True
            )
            return replace(v, one_sided=True)
    if policy.backend == "symbolic":
        raise LogLadderError(
            "one-sided: no exact log split for the symbolic backend"
        )
    if pieces is not None:
        num, den = pieces
        dl = den.leading()
        den_depth = dl[0] if dl is not None else 1
        grid = _statistic_grid(term, den_depth, num.coeffs.keys(), policy)
        sampler = _combo_quotient_sampler(num, den, w.delta_correction)
    else:
        grid = _plain_grid(term, policy)
        sampler = _raw_quotient_sampler(term, w, 0, include_delta=True)
    if grid is None:
        return _inconclusive("one-sided", w, 0, None, "insufficient-signal")
    _, values, _, _ = _sample_grid(sampler, grid)
    if len(values) < 8:
        return _inconclusive("one-sided", w, 0, None, "insufficient-signal")
    sup_est, inf_est = lm.estimate_limsup_liminf(values)
    lo = nm.from_value(Fraction(-1) - policy.margin)
    hi = nm.from_value(Fraction(-1) + policy.margin)
    if sup_est.status == "diverged" and sup_est.direction < 0:
        return Verdict("converges", "one-sided", w, 0, sup_est,
                       one_sided=True, notes=("upper envelope",))
    if sup_est.status == "converged" and sup_est.value < lo:
        return Verdict("converges", "one-sided", w, 0, sup_est,
                       one_sided=True, notes=("upper envelope",))
    if inf_est.status == "diverged" and inf_est.direction > 0:
        return Verdict("diverges", "one-sided", w, 0, inf_est,
                       one_sided=True, notes=("lower envelope",))
    if inf_est.status == "converged" and inf_est.value > hi:
        return Verdict("diverges", "one-sided", w, 0, inf_est,
                       one_sided=True, notes=("lower envelope",))
    # Drifting envelopes: a statistic that stays on one side of the
    # boundary over the whole trailing window still bounds the terms
    # from that side, even when no envelope limit can be certified.
    tail = values[-max(4, len(values) // 2):]
    finite = [v for v in tail if not math.isinf(nm.to_float(v))]
    if finite and all(v < lo for v in tail):
        est = lm.LimitEstimate(
            "not_converged", max(finite), None, "window-bound", len(values)
        )
        return Verdict("converges", "one-sided", w, 0, est, one_sided=True,
                       notes=("empirical ceiling of the trailing window",))
    if finite and all(v > hi for v in tail):
        est = lm.LimitEstimate(
            "not_converged", min(finite), None, "window-bound", len(values)
        )
        return Verdict("diverges", "one-sided", w, 0, est, one_sided=True,
                       notes=("empirical floor of the trailing window",))
    return _inconclusive(
        "one-sided", w, 0, sup_est, "envelopes-straddle-boundary"
    )


# -- order-envelope sandwich ------------------------------------------------------


@dataclass(frozen=True)
class SandwichRow:
    """Predicted bounds and empirical samples of a(t n)/a(n) for one t."""

    t: object
    lower: ExtScalar | None
    upper: ExtScalar | None
    samples: tuple
    violations: int


@dataclass(frozen=True)
class ORegularReport:
    """Envelope orders of the terms and the induced ratio sandwich.

    lower_order and upper_order estimate liminf and limsup of the
    increment ratio d ln a_n / d ln w(n). For each requested t the
    asymptotic sandwich is t^lower <= a(t n)/a(n) <= t^upper; sample
    violations beyond the tolerance are counted as diagnostics of
    estimator uncertainty, not as refutations.
    """

    lower_order: lm.LimitEstimate
    upper_order: lm.LimitEstimate
    rows: tuple
    tolerance: float
    note: str = ""


def o_regular_bounds(seq, w: sc.ScaleFn, t_list,
                     policy: AnalysisPolicy | None = None,
                     params=None, tolerance: float = 0.05) -> ORegularReport:
    """Two-sided growth sandwich from the envelopes of d ln a / d ln w."""
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    for t in t_list:
        if not float(t) >= 1:
            raise ValueError("sandwich factors t must be at least 1")
    grid = _plain_grid(term, policy)
    if grid is None:
        empty = lm.LimitEstimate("not_converged")
        return ORegularReport(empty, empty, (), tolerance,
                              note="no usable integer grid")
    combo = term.log_combo()
    if combo is not None:
        sampler = _combo_difference_sampler(
            combo, _chain_combo(w, 1), None
        )
    else:
        sampler = _raw_difference_sampler(term, w, 0, include_delta=False)
    _, values, _, _ = _sample_grid(sampler, grid)
    if len(values) < 8:
        empty = lm.LimitEstimate("not_converged")
        return ORegularReport(empty, empty, (), tolerance,
                              note="too few valid samples")
    sup_est, inf_est = lm.estimate_limsup_liminf(values)
    if not (sup_est.status == "converged" and inf_est.status == "converged"):
        return ORegularReport(
            inf_est, sup_est, (), tolerance,
            note="order envelopes not finite; sandwich unavailable",
        )
    rows = []
    check_points = [n for n in grid if n.level == 0][-6:]
    for t in t_list:
        tf = ex._as_fraction(t)
        lower = nm.ext_pow(nm.from_value(tf), inf_est.value)
        upper = nm.ext_pow(nm.from_value(tf), sup_est.value)
        lo_gate = nm.ext_mul(lower, nm.from_value(1 - tolerance))
        hi_gate = nm.ext_mul(upper, nm.from_value(1 + tolerance))
        samples = []
        violations = 0
        for n in check_points:
            idx = int(n.as_mpf())
            scaled = (tf.numerator * idx) // tf.denominator
            try:
                ratio = nm.ext_div(
                    term.term(nm.from_value(scaled)),
                    term.term(nm.from_value(idx)),
                )
            except _SKIP:
                continue
            samples.append((idx, ratio))
            if ratio < lo_gate or ratio > hi_gate:
                violations += 1
        rows.append(SandwichRow(t, lower, upper, tuple(samples), violations))
    return ORegularReport(inf_est, sup_est, tuple(rows), tolerance)


# -- the ladder -------------------------------------------------------------------


def _undecided_chain(term, w, policy, trace):
    """Escalation once the scaled-log limit lands on -1 at scale w."""
    v = slow_divergence_test(term, w, policy, mode="convergent")
    trace.append(v)
    if v.decisive:
        return v
    try:
        levels = hierarchy_test(term, w, policy.k_max, policy)
        trace.extend(levels)
        if levels and levels[-1].decisive:
            return levels[-1]
    except ExhaustedHierarchy as e:
        trace.extend(e.levels)
    v = slow_divergence_test(term, w, policy, mode="bound")
    trace.append(v)
    if v.decisive:
        return v
    v = one_sided_test(term, w, policy)
    trace.append(v)
    if v.decisive:
        return v
    return None


def analyze(seq, policy: AnalysisPolicy | None = None,
            params=None) -> AnalysisReport:
    """Run the decision ladder and collect the full trace.

    With no pinned scale: ratio-increment test, then the scaled-log
    test against n, then against ln n; a boundary limit at ln n opens
    the slow-divergence check and the escalation hierarchy, and
    envelopes serve as the last fallback. A pinned scale skips straight
    to its scaled-log test and escalates within that scale only.
    """
    policy = policy or AnalysisPolicy()
    term = _as_term(seq, params)
    prec = nm.get_precision()
    if policy.k_max > prec.max_tower_level - 2:
        raise ValueError(
            f"k_max={policy.k_max} exceeds the tower budget "
            f"(max {prec.max_tower_level - 2})"
        )
    combo = term.log_combo()
    symbolic_ok = combo is not None and combo.is_exact
    if policy.backend == "symbolic" and not symbolic_ok:
        raise LogLadderError(
            "no exact log split; symbolic backend unavailable"
        )
    backend = (
        "symbolic" if symbolic_ok and policy.backend != "numeric"
        else "numeric"
    )
    if isinstance(policy.scale, sc.Custom):
        w_report = policy.scale.check_assumptions()
        if not w_report.ok:
            which = "a"
            if w_report.failures and w_report.failures[0][:1] in ("a", "b"):
                which = w_report.failures[0][:1]
            raise AssumptionViolation("; ".join(w_report.failures), which)
    trace = []
    final = None
    with nm.absorption_log() as absorbed:
        if policy.scale is None:
            v = raabe_test(term, policy)
            trace.append(v)
            if v.decisive:
                final = v
            if final is None:
                v = scaled_log_test(term, sc.Identity(), policy)
                trace.append(v)
                if v.decisive:
                    final = v
            if final is None:
                w1 = sc.IterLog(1)
                v = scaled_log_test(term, w1, policy)
                trace.append(v)
                if v.decisive:
                    final = v
                elif v.reason == "statistic-at-boundary":
                    final = _undecided_chain(term, w1, policy, trace)
                else:
                    v = one_sided_test(term, w1, policy)
                    trace.append(v)
                    if v.decisive:
                        final = v
        else:
            w = policy.scale
            v = scaled_log_test(term, w, policy)
            trace.append(v)
            if v.decisive:
                final = v
            elif v.reason == "statistic-at-boundary":
                final = _undecided_chain(term, w, policy, trace)
            else:
                v = one_sided_test(term, w, policy)
                trace.append(v)
                if v.decisive:
                    final = v
    if final is None:
        final = Verdict(
            "inconclusive", "ladder", policy.scale, 0,
            lm.LimitEstimate("not_converged"), reason="exhausted",
        )
    warnings = []
    seen = set()
    for v in trace:
        for note in v.notes:
            if note not in seen:
                seen.add(note)
                warnings.append(f"{v.test_id}: {note}")
    for msg in sorted({str(a.args[0]) for a in absorbed}):
        warnings.append(f"absorption: {msg}")
    return AnalysisReport(
        sequence=term.text,
        params=dict(getattr(term, "params", {})),
        backend=backend,
        normal_form=term.normal_form(),
        policy=policy,
        trace=trace,
        final=final,
        warnings=warnings,
    )
