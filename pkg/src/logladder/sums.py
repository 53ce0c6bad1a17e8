"""Brute-force summation oracle.

Ground truth for the rate predictions: partial sums, windowed tail
sums, and slope fits of the predicted growth templates, computed by
direct term evaluation with none of the acceleration machinery the
limit estimator uses.

Terms are evaluated vectorized in float64 over fixed-size chunks; each
chunk is reduced with numpy's pairwise sum and the chunk totals are
accumulated in high-precision scalars, so accumulation error stays far
below the per-term evaluation error. estimated_roundoff reports the
conservative bound n_terms * 2^(1-53) * value for that reason: the
53-bit term evaluation dominates. A precision override evaluates terms
one by one at the requested bits instead; it is orders of magnitude
slower and meant for spot checks, not full-budget runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp

from . import criteria as cr
from . import expr as ex
from . import numeric as nm
from .errors import (
    BudgetExceededError,
    PositivityViolation,
    RangeError,
    UnboundParameterError,
)
from .numeric import ExtScalar

__all__ = [
    "DEFAULT_BUDGET",
    "CHUNK",
    "SIGNAL_EFOLDS",
    "SumResult",
    "RateCheck",
    "partial_sum",
    "tail_sum",
    "checkpoint_sums",
    "slope_check",
    "write_checkpoints_csv",
]

DEFAULT_BUDGET = 10**8
CHUNK = 1 << 20

# A fit abscissa must move at least this much over the checkpoints;
# below it the template is unverifiable at desk scale (the deep-log
# comparison functions are essentially constant below any budget).
SIGNAL_EFOLDS = 0.5

_TERM_BITS = 53
_ACC_BITS = 160


@dataclass(frozen=True)
class SumResult:
    """One finished summation run.

    value is exactly the windowed sum of the evaluated terms. For tail
    runs truncation_correction carries the fitted remainder beyond the
    last summed index and estimate combines the two; estimate equals
    value for partial sums. estimated_roundoff bounds the float error
    as n_terms * 2^(1-precision_bits) * value.
    """

    n_terms: int
    value: ExtScalar
    summation_method: str
    estimated_roundoff: ExtScalar
    precision_bits: int = _TERM_BITS
    truncation_correction: ExtScalar | None = None
    note: str = ""

    @property
    def estimate(self) -> ExtScalar:
        if self.truncation_correction is None:
            return self.value
        with mp.workprec(_ACC_BITS):
            total = self.value.as_mpf() + self.truncation_correction.as_mpf()
        return nm.from_value(total)


@dataclass(frozen=True)
class RateCheck:
    """Outcome of fitting a rate prediction against checkpoint sums.

    status is 'pass', 'fail', or 'insufficient-signal'; the last is a
    first-class outcome meaning the template's comparison function
    moves too little over any feasible checkpoint range to measure,
    not that the prediction failed. observed holds the per-step fitted
    values (slopes, exponents, or ratios depending on the template).
    """

    template: str
    status: str
    target: float | None
    observed: tuple
    tolerance: float
    checkpoints: tuple
    fitted_constant: float | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


# -- term compilation ----------------------------------------------------------


def _compile(e: ex.Expr):
    """Build an ndarray evaluator for a bound expression tree."""
    if isinstance(e, ex.Const):
        c = float(e.value)
        return lambda x: np.full_like(x, c)
    if isinstance(e, ex.Var):
        return lambda x: x
    if isinstance(e, ex.Param):
        raise UnboundParameterError([e.name])
    if isinstance(e, ex.Add):
        a, b = _compile(e.left), _compile(e.right)
        return lambda x: a(x) + b(x)
    if isinstance(e, ex.Sub):
        a, b = _compile(e.left), _compile(e.right)
        return lambda x: a(x) - b(x)
    if isinstance(e, ex.Mul):
        a, b = _compile(e.left), _compile(e.right)
        return lambda x: a(x) * b(x)
    if isinstance(e, ex.Div):
        a, b = _compile(e.left), _compile(e.right)
        return lambda x: a(x) / b(x)
    if isinstance(e, ex.Pow):
        a, b = _compile(e.base), _compile(e.exponent)
        return lambda x: np.power(a(x), b(x))
    if isinstance(e, ex.Exp):
        a = _compile(e.arg)
        return lambda x: np.exp(a(x))
    if isinstance(e, ex.IterLn):
        a = _compile(e.arg)
        k = e.count

        def f(x, _a=a, _k=k):
            y = _a(x)
            for _ in range(_k):
                y = np.log(y)
            return y

        return f
    raise TypeError(f"cannot compile {e!r}")


def _chunk_evaluator(term):
    """Map an index array to term values, choosing the fastest route."""
    if isinstance(term, cr.MutatedTerm):
        inner = _chunk_evaluator(term.base)
        overrides = {
            k: nm.to_float(v) for k, v in term.overrides.items()
        }

        def f(idx):
            vals = inner(idx)
            if idx[0] <= 100:
                for k, v in overrides.items():
                    if idx[0] <= k <= idx[-1]:
                        vals[int(k - idx[0])] = v
            return vals

        return f
    if isinstance(term, cr.ExprTerm):
        fn = _compile(term.expression)

        def f(idx, _fn=fn):
            with np.errstate(all="ignore"):
                return _fn(idx)

        return f
    # Callable source: try a vectorized call once, else loop.
    probe = np.array([101.0, 102.0])
    try:
        out = term.fn(probe)
        vectorized = (
            isinstance(out, np.ndarray) and out.shape == probe.shape
        )
    except Exception:
        vectorized = False
    if vectorized:
        def f(idx):
            with np.errstate(all="ignore"):
                return np.asarray(term.fn(idx), dtype=np.float64)

        return f

    def f(idx):
        fn = term.fn
        return np.array([fn(int(i)) for i in idx], dtype=np.float64)

    return f


def _check_chunk(vals: np.ndarray, lo: int, text: str) -> None:
    # Exact zeros are tolerated: far tails of fast-decaying terms
    # underflow float64 and contribute nothing.
    if not np.isfinite(vals).all():
        j = int(np.argmin(np.isfinite(vals)))
        raise RangeError(
            f"{text}: term at n={lo + j} is not finite in float64"
        )
    if (vals < 0).any():
        j = int(np.argmax(vals < 0))
        raise PositivityViolation(
            f"{text}: term at n={lo + j} is negative", witness=lo + j
        )


def _pairwise_merge(parts):
    while len(parts) > 1:
        nxt = [
            parts[i] + parts[i + 1] if i + 1 < len(parts) else parts[i]
            for i in range(0, len(parts), 2)
        ]
        parts = nxt
    return parts[0] if parts else mp.mpf(0)


def _start_index(term) -> int:
    try:
        v = term.n_start.as_mpf()
    except RangeError:
        raise RangeError(
            "the sequence's first index is beyond summation range"
        )
    if v > 10**14:
        raise RangeError(
            "the sequence's first index is beyond any summation budget"
        )
    return int(mp.ceil(v))


def _run(term, n0: int, N: int, method: str, budget: int, cuts=()):
    """Sum a_n for n in [n0, N], recording totals at the cut indices.

    Returns (final total, [(cut, running total)], n_terms), everything
    in mpf at the accumulator precision. The running totals come from
    the sequential accumulator; with the pairwise method the final
    total is re-merged as a fixed binary tree over the chunk sums.
    """
    if method not in ("compensated", "pairwise"):
        raise ValueError(f"unknown summation method {method!r}")
    if N < n0:
        raise ValueError(f"empty summation range [{n0}, {N}]")
    n_terms = N - n0 + 1
    if n_terms > budget:
        raise BudgetExceededError(
            f"{n_terms} term evaluations exceed the budget of {budget}"
        )
    evaluate = _chunk_evaluator(term)
    cuts = sorted(set(int(c) for c in cuts))
    with mp.workprec(_ACC_BITS):
        running = mp.mpf(0)
        chunk_sums = []
        at_cuts = []
        ci = 0
        lo = n0
        while lo <= N:
            hi = min(lo + CHUNK - 1, N)
            # Stop a chunk early at a cut so the running total is exact
            # at every requested index.
            while ci < len(cuts) and lo <= cuts[ci] <= hi:
                hi = cuts[ci]
                break
            idx = np.arange(lo, hi + 1, dtype=np.float64)
            vals = evaluate(idx)
            _check_chunk(vals, lo, term.text)
            s = mp.mpf(float(np.sum(vals)))
            chunk_sums.append(s)
            running += s
            if ci < len(cuts) and hi == cuts[ci]:
                at_cuts.append((hi, running))
                ci += 1
            lo = hi + 1
        total = (
            _pairwise_merge(chunk_sums) if method == "pairwise" else running
        )
        return total, at_cuts, n_terms


def _run_precise(term, n0: int, N: int, budget: int, bits: int, cuts=()):
    """Per-term high-precision path; meant for modest ranges only."""
    n_terms = N - n0 + 1
    if n_terms > budget:
        raise BudgetExceededError(
            f"{n_terms} term evaluations exceed the budget of {budget}"
        )
    cuts = sorted(set(int(c) for c in cuts))
    at_cuts = []
    ci = 0
    with nm.local_precision(bits), mp.workprec(bits + 10):
        running = mp.mpf(0)
        for n in range(n0, N + 1):
            v = term.term(nm.from_value(n))
            if v.sign < 0:
                raise PositivityViolation(
                    f"{term.text}: term at n={n} is negative", witness=n
                )
            running += v.as_mpf()
            if ci < len(cuts) and n == cuts[ci]:
                at_cuts.append((n, running))
                ci += 1
        return running, at_cuts, n_terms


def _roundoff(n_terms: int, value, bits: int) -> ExtScalar:
    with mp.workprec(_ACC_BITS):
        bound = mp.mpf(n_terms) * mp.mpf(2) ** (1 - bits) * abs(value)
    return nm.from_value(bound)


# -- public operations ----------------------------------------------------------


def partial_sum(seq, N, method: str = "compensated",
                budget: int = DEFAULT_BUDGET, n0: int | None = None,
                precision: int = _TERM_BITS, params=None) -> SumResult:
    """Sum the terms from the sequence's first index through N."""
    term = cr._as_term(seq, params)
    start = _start_index(term) if n0 is None else int(n0)
    N = int(N)
    if precision > _TERM_BITS:
        total, _, n_terms = _run_precise(term, start, N, budget, precision)
        bits = precision
    else:
        total, _, n_terms = _run(term, start, N, method, budget)
        bits = _TERM_BITS
    return SumResult(
        n_terms=n_terms,
        value=nm.from_value(total),
        summation_method=method,
        estimated_roundoff=_roundoff(n_terms, total, bits),
        precision_bits=bits,
    )


def _fitted_remainder(term, N: int):
    """Remainder beyond N from a locally fitted power decay.

    Fits p from the term values at N/2 and N and integrates the power
    tail; valid when the fit shows clear decay (p well below -1). The
    estimate is first order: slowly varying log factors in the terms
    shift the effective constant, so this is a correction, not a bound
    certificate.
    """
    try:
        with nm.local_precision(_ACC_BITS):
            aN = term.term(nm.from_value(N))
            aM = term.term(nm.from_value(N // 2))
    except cr._SKIP:
        return None, "tail fit unavailable at the last checkpoint"
    with nm.local_precision(_ACC_BITS):
        fa, fm = nm.to_float(aN), nm.to_float(aM)
        if not (fa > 0 and fm > 0) or math.isinf(fa) or math.isinf(fm):
            return None, "tail fit unavailable at the last checkpoint"
        p = math.log(fa / fm) / math.log(N / (N // 2))
        if p >= -1.05:
            return None, (
                f"fitted local exponent {p:.3f} too close to -1 for a "
                "power-tail remainder"
            )
        rem = fa * N / (-1 - p)
    return mp.mpf(rem), ""


def tail_sum(seq, n, N, method: str = "compensated",
             budget: int = DEFAULT_BUDGET, precision: int = _TERM_BITS,
             params=None, verdict: str | None = None) -> SumResult:
    """Sum the terms from n through N, inclusive of both ends.

    The result's truncation_correction carries a fitted remainder for
    the terms beyond N (local power fit at N, integrated); when the fit
    shows no clear decay the correction is absent and a note says why.
    Pass the ladder's verdict to get a warning note when a tail is
    requested for a series not marked convergent.
    """
    term = cr._as_term(seq, params)
    n, N = int(n), int(N)
    if not n < N:
        raise ValueError("tail window needs n < N")
    if precision > _TERM_BITS:
        total, _, n_terms = _run_precise(term, n, N, budget, precision)
        bits = precision
    else:
        total, _, n_terms = _run(term, n, N, method, budget)
        bits = _TERM_BITS
    rem, note = _fitted_remainder(term, N)
    corr = nm.from_value(rem) if rem is not None else None
    if verdict is not None and verdict != "converges":
        warn = "tail requested for a series the ladder does not mark convergent"
        note = f"{warn}; {note}" if note else warn
    return SumResult(
        n_terms=n_terms,
        value=nm.from_value(total),
        summation_method=method,
        estimated_roundoff=_roundoff(n_terms, total, bits),
        precision_bits=bits,
        truncation_correction=corr,
        note=note,
    )


def checkpoint_sums(seq, checkpoints, method: str = "compensated",
                    budget: int = DEFAULT_BUDGET, n0: int | None = None,
                    params=None) -> list:
    """Running totals (N, S(N)) at each checkpoint, from one pass."""
    term = cr._as_term(seq, params)
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps:
        raise ValueError("no checkpoints given")
    start = _start_index(term) if n0 is None else int(n0)
    if cps[0] < start:
        raise ValueError(
            f"checkpoint {cps[0]} is below the first index {start}"
        )
    _, at_cuts, _ = _run(term, start, cps[-1], method, budget, cuts=cps)
    return [(n, nm.from_value(s)) for n, s in at_cuts]


def write_checkpoints_csv(path, rows) -> None:
    """Write (N, S(N)) pairs as a two-column CSV file."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "partial_sum"])
        for n, s in rows:
            writer.writerow([int(n), nm.fmt(s, digits=30)])


def _rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)


def _triple_exponent(w0, w1, x0, x1, x2):
    """Exponent q fitting two adjacent tail windows.

    A tail following c * exp(q * x) in the comparison log x leaves
    windows W_k = c (e^{q x_k} - e^{q x_{k+1}}) between checkpoints, so
    the ratio W_{k+1}/W_k pins q without knowing the unsummable total.
    Returns None when the observed ratio falls outside the family.
    """
    target = w1 / w0
    xm = x1  # center to keep the exponentials in range
    def f(q):
        e0 = math.exp(q * (x0 - xm))
        e1 = 1.0
        e2 = math.exp(q * (x2 - xm))
        return (e1 - e2) / (e0 - e1)
    a, b = -60.0, -1e-9
    fa, fb = f(a), f(b)
    if not min(fa, fb) <= target <= max(fa, fb):
        return None
    for _ in range(100):
        mid = 0.5 * (a + b)
        if (f(mid) - target) * (fb - target) <= 0:
            a = mid
        else:
            b, fb = mid, f(mid)
    return 0.5 * (a + b)


def _insufficient(prediction, cps, tolerance, note) -> RateCheck:
    return RateCheck(
        template=prediction.template,
        status="insufficient-signal",
        target=None,
        observed=(),
        tolerance=tolerance,
        checkpoints=tuple(cps),
        note=note,
    )


def slope_check(seq, prediction, checkpoints, tolerance: float = 0.02,
                method: str = "compensated", budget: int = DEFAULT_BUDGET,
                params=None) -> RateCheck:
    """Fit the predicted growth template against checkpoint sums.

    slow-log templates fit consecutive slopes of S(N) against ln w(N)
    and compare to the predicted constant (or report the fitted
    constant when the prediction leaves it open). The log-ratio and
    log-log templates fit consecutive slopes of ln(sum) against the
    template's comparison log, targeting order + 1. Precise templates
    report the ratio of the sum to the predicted value, targeting 1.
    Tail templates work on S(last) - S(N) plus a fitted remainder.
    """
    term = cr._as_term(seq, params)
    cps = sorted(set(int(c) for c in checkpoints))
    if len(cps) < 3:
        raise ValueError("slope_check needs at least 3 checkpoints")
    template = prediction.template
    ratio_fit = template.startswith(("log-ratio-", "log-log-"))
    slow = template in ("slow-log", "slow-log-bound")
    precise = template in ("precise-tail", "precise-partial")
    if not (ratio_fit or slow or precise):
        raise ValueError(f"no fit procedure for template {template!r}")

    if ratio_fit or slow:
        absc = [nm.to_float(prediction.normalizer(c)) for c in cps]
        moved = absc[-1] - absc[0]
        if not all(math.isfinite(x) for x in absc) or moved < SIGNAL_EFOLDS:
            return _insufficient(
                prediction, cps, tolerance,
                f"comparison log moves {moved:.3f} e-folds over the "
                f"checkpoints, below the {SIGNAL_EFOLDS} needed to fit",
            )

    rows = checkpoint_sums(term, cps, method=method, budget=budget)
    sums = [nm.to_float(s) for _, s in rows]
    note = ""
    tail = prediction.sum_kind == "tail"

    if ratio_fit and tail:
        # The total is not summable at budget, so fit the checkpoint
        # windows instead; their ratios pin the tail exponent without
        # an additive remainder estimate.
        absc = [nm.to_float(prediction.normalizer(c)) for c in cps]
        wins = [b - a for a, b in zip(sums, sums[1:])]
        if any(w <= 0 for w in wins):
            return _insufficient(
                prediction, cps, tolerance,
                "tail windows vanish at these checkpoints",
            )
        qs = []
        for k in range(len(wins) - 1):
            q = _triple_exponent(
                wins[k], wins[k + 1], absc[k], absc[k + 1], absc[k + 2]
            )
            if q is None:
                return RateCheck(
                    template=template,
                    status="fail",
                    target=nm.to_float(prediction.exponent)
                    if prediction.exponent is not None else None,
                    observed=(),
                    tolerance=tolerance,
                    checkpoints=tuple(cps),
                    note="window ratios fall outside the decaying "
                         "template family",
                )
            qs.append(q)
        if prediction.exponent is None:
            return _insufficient(
                prediction, cps, tolerance, "prediction carries no exponent"
            )
        target = nm.to_float(prediction.exponent)
        ok = abs(qs[-1] - target) <= tolerance * max(1.0, abs(target))
        return RateCheck(
            template=template,
            status="pass" if ok else "fail",
            target=target,
            observed=tuple(qs),
            tolerance=tolerance,
            checkpoints=tuple(cps),
        )

    if tail:
        rem, note = _fitted_remainder(term, cps[-1])
        rem = float(rem) if rem is not None else 0.0
        vals = [sums[-1] - s + rem for s in sums[:-1]]
        cps_used = cps[:-1]
        if any(v <= 0 for v in vals):
            return _insufficient(
                prediction, cps, tolerance,
                "tail window vanishes at these checkpoints",
            )
    else:
        vals = sums
        cps_used = cps

    if precise:
        preds = [
            nm.to_float(prediction.predicted_sum(term, c)) for c in cps_used
        ]
        if any(not math.isfinite(p) or p <= 0 for p in preds):
            return _insufficient(
                prediction, cps, tolerance,
                "prediction not evaluable at the checkpoints",
            )
        observed = tuple(v / p for v, p in zip(vals, preds))
        ok = _rel_err(observed[-1], 1.0) <= tolerance
        return RateCheck(
            template=template,
            status="pass" if ok else "fail",
            target=1.0,
            observed=observed,
            tolerance=tolerance,
            checkpoints=tuple(cps_used),
            note=note,
        )

    absc_used = [nm.to_float(prediction.normalizer(c)) for c in cps_used]
    if len(cps_used) < 3:
        return _insufficient(
            prediction, cps, tolerance, "too few usable checkpoints"
        )
    if slow:
        series = vals
    else:
        series = [math.log(v) for v in vals]
    slopes = tuple(
        (b - a) / (y - x)
        for a, b, x, y in zip(series, series[1:], absc_used, absc_used[1:])
    )

    if slow:
        if prediction.constant is not None:
            target = nm.to_float(prediction.constant)
            ok = _rel_err(slopes[-1], target) <= tolerance
            return RateCheck(
                template=template,
                status="pass" if ok else "fail",
                target=target,
                observed=slopes,
                tolerance=tolerance,
                checkpoints=tuple(cps_used),
                note=note,
            )
        # Constant left open: fit it, demand a stable positive slope.
        stable = (
            slopes[-1] > 0
            and abs(slopes[-1] - slopes[-2])
            <= tolerance * max(abs(slopes[-1]), 1e-12)
        )
        return RateCheck(
            template=template,
            status="pass" if stable else "fail",
            target=None,
            observed=slopes,
            tolerance=tolerance,
            checkpoints=tuple(cps_used),
            fitted_constant=slopes[-1],
            note=note or "constant fitted from the last slope",
        )

    exp_est = prediction.exponent
    if exp_est is None:
        return _insufficient(
            prediction, cps, tolerance, "prediction carries no exponent"
        )
    target = nm.to_float(exp_est)
    ok = abs(slopes[-1] - target) <= tolerance * max(1.0, abs(target))
    return RateCheck(
        template=template,
        status="pass" if ok else "fail",
        target=target,
        observed=slopes,
        tolerance=tolerance,
        checkpoints=tuple(cps_used),
        note=note,
    )
