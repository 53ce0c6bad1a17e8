"""Scale functions: the measuring sticks the convergence tests divide by.

A scale w must increase to infinity, admit an inverse, and vary slowly in
the additive sense (w(x + y)/w(x) -> 1 for fixed y). The catalog covers
the identity, iterated logarithms, and fixed powers of n, all of which
satisfy the assumptions structurally. Arbitrary expression scales are
accepted too and get a sampled assumption check instead of a proof.

The quantity the statistics actually consume is ln of the forward
increment, ln(w(n+1) - w(n)). Computing the increment first and taking
its log would cancel catastrophically for slow scales, so catalog scales
expose it as an exact rational combination of iterated logs of n plus a
small correction term that is evaluated directly from series-safe
primitives (log1p, expm1) and vanishes as n grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from . import expr as ex
from . import numeric as nm
from .errors import CancellationError, DomainError, ParseError, RangeError
from .expr import Expr, LogCombo
from .numeric import ExtScalar

__all__ = [
    "ScaleFn",
    "Identity",
    "IterLog",
    "PowerOfN",
    "Custom",
    "AssumptionReport",
    "parse_scale",
]


@dataclass(frozen=True)
class AssumptionReport:
    ok: bool
    method: str  # "structural" or "sampled"
    failures: tuple[str, ...]
    notes: tuple[str, ...] = ()


class ScaleFn:
    """Base interface; instances are immutable."""

    name: str = "?"

    def w_expr(self) -> Expr:
        raise NotImplementedError

    def value(self, n: ExtScalar) -> ExtScalar:
        return ex.eval_expr(self.w_expr(), n)

    def delta(self, n: ExtScalar) -> ExtScalar:
        """w(n+1) - w(n), computed without catastrophic cancellation."""
        raise NotImplementedError

    def log_delta_combo(self) -> LogCombo | None:
        """Exact split of ln delta(n), or None when only pointwise
        evaluation is available. The residual part is delta_correction."""
        return None

    def delta_correction(self, n: ExtScalar) -> ExtScalar:
        """Residual of ln delta(n) beyond the exact combo terms."""
        return nm.ZERO

    def log_delta(self, n: ExtScalar) -> ExtScalar:
        """ln(w(n+1) - w(n)) assembled from the stable split."""
        combo = self.log_delta_combo()
        if combo is None:
            return nm.ext_ln(self.delta(n))
        total = combo.const_value()
        for depth, coeff in sorted(combo.coeffs.items()):
            term = nm.ext_mul(
                nm.from_value(coeff), nm.iter_ln(depth, n) if depth else n
            )
            total = nm.ext_add(total, term)
        return nm.ext_add(total, self.delta_correction(n))

    def ln_chain(self, depth: int) -> Expr:
        """Expression for the depth-fold iterated log of w(n)."""
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        e = self.w_expr()
        for _ in range(depth):
            e, _ = ex.log_transform(e)
        return e

    def inverse(self, x: ExtScalar) -> ExtScalar:
        raise NotImplementedError

    def check_assumptions(self, grid=None) -> AssumptionReport:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


@dataclass(frozen=True, repr=False)
class Identity(ScaleFn):
    """w(n) = n."""

    @property
    def name(self) -> str:
        return "n"

    def w_expr(self) -> Expr:
        return ex.Var()

    def delta(self, n: ExtScalar) -> ExtScalar:
        return nm.ONE

    def log_delta_combo(self) -> LogCombo:
        return LogCombo({}, Fraction(0), [], [])

    def inverse(self, x: ExtScalar) -> ExtScalar:
        return x

    def check_assumptions(self, grid=None) -> AssumptionReport:
        return AssumptionReport(True, "structural", ())


@dataclass(frozen=True, repr=False)
class IterLog(ScaleFn):
    """w(n) = the depth-fold iterated natural log of n."""

    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("IterLog depth must be at least 1")

    @property
    def name(self) -> str:
        return "ln" * self.depth if self.depth <= 4 else f"iterlog:{self.depth}"

    def w_expr(self) -> Expr:
        return ex.iterln(self.depth, ex.Var())

    def delta(self, n: ExtScalar) -> ExtScalar:
        d = nm.ext_ln1p(nm.ext_div(nm.ONE, n))
        for j in range(2, self.depth + 1):
            level = nm.iter_ln(j - 1, n)
            d = nm.ext_ln1p(nm.ext_div(d, level))
        return d

    def log_delta_combo(self) -> LogCombo:
        coeffs = {j: Fraction(-1) for j in range(1, self.depth + 1)}
        return LogCombo(coeffs, Fraction(0), [], [])

    def delta_correction(self, n: ExtScalar) -> ExtScalar:
        # Sum over levels of ln(log1p(q)/q); below any feasible working
        # precision once n is past plain range.
        try:
            nv = n.as_mpf()
        except RangeError:
            return nm.ZERO
        bits = nm.get_precision().significand_bits
        with mp.workprec(bits + 10):
            ld = mp.mpf(0)
            total = mp.mpf(0)
            level = nv
            cutoff = -(bits + 64) * mp.ln(2)
            for _ in range(self.depth):
                ln_level = mp.ln(level)
                lq = ld - ln_level
                if lq < cutoff:
                    break
                q = mp.exp(lq)
                v = mp.log1p(q)
                corr = mp.ln(v / q)
                total += corr
                ld = lq + corr
                level = ln_level
        return nm.from_value(total)

    def inverse(self, x: ExtScalar) -> ExtScalar:
        for _ in range(self.depth):
            x = nm.ext_exp(x)
        return x

    def check_assumptions(self, grid=None) -> AssumptionReport:
        return AssumptionReport(True, "structural", ())


@dataclass(frozen=True, repr=False)
class PowerOfN(ScaleFn):
    """w(n) = n^sigma for a fixed rational sigma > 0."""

    sigma: Fraction

    def __post_init__(self):
        s = self.sigma
        if not isinstance(s, Fraction):
            object.__setattr__(self, "sigma", ex._as_fraction(s))
        if self.sigma <= 0:
            raise ValueError("PowerOfN needs sigma > 0")

    @property
    def name(self) -> str:
        return f"pow:{self.sigma}"

    def w_expr(self) -> Expr:
        return ex.Pow(ex.Var(), ex.Const(self.sigma))

    def delta(self, n: ExtScalar) -> ExtScalar:
        s = nm.from_value(self.sigma)
        t = nm.ext_ln1p(nm.ext_div(nm.ONE, n))
        return nm.ext_mul(nm.ext_pow(n, s), nm.ext_expm1(nm.ext_mul(s, t)))

    def log_delta_combo(self) -> LogCombo:
        return LogCombo(
            {1: self.sigma - 1},
            Fraction(0),
            [(Fraction(1), 1, self.sigma)],
            [],
        )

    def delta_correction(self, n: ExtScalar) -> ExtScalar:
        # ln delta = (sigma - 1) ln n + ln sigma + corr with
        # corr = ln(expm1(sigma t)/(sigma t)) + ln(n log1p(1/n)), t = log1p(1/n).
        try:
            nv = n.as_mpf()
        except RangeError:
            return nm.ZERO
        bits = nm.get_precision().significand_bits
        with mp.workprec(bits + 10):
            s = mp.mpf(self.sigma.numerator) / mp.mpf(self.sigma.denominator)
            t = mp.log1p(1 / nv)
            if s * t < -(bits + 64) * mp.ln(2):
                return nm.ZERO
            corr = mp.ln(mp.expm1(s * t) / (s * t)) + mp.ln(nv * t)
        return nm.from_value(corr)

    def inverse(self, x: ExtScalar) -> ExtScalar:
        return nm.ext_pow(x, nm.from_value(Fraction(1) / self.sigma))

    def check_assumptions(self, grid=None) -> AssumptionReport:
        return AssumptionReport(True, "structural", ())


class Custom(ScaleFn):
    """A scale given by an expression in n. Assumptions are sampled."""

    def __init__(self, expression: Expr, label: str | None = None):
        if isinstance(expression, str):
            expression = ex.parse(expression)
        missing = ex.free_params(expression)
        if missing:
            from .errors import UnboundParameterError

            raise UnboundParameterError(missing)
        self._expr = expression
        self._label = label or ex.format_expr(expression)

    @property
    def name(self) -> str:
        return f"expr:{self._label}"

    def __repr__(self):
        return f"Custom({self._label!r})"

    def w_expr(self) -> Expr:
        return self._expr

    def delta(self, n: ExtScalar) -> ExtScalar:
        bits = nm.get_precision().significand_bits
        with nm.local_precision(2 * bits + 64):
            a = ex.eval_expr(self._expr, nm.ext_add(n, nm.ONE))
            b = ex.eval_expr(self._expr, n)
            d = nm.ext_sub(a, b)
            if d.sign == 0:
                raise CancellationError(
                    "scale increment vanished at doubled precision"
                )
            if d.level == 0 and a.level == 0:
                with mp.workprec(32):
                    lost = mp.log(abs(a.as_mpf()) / abs(d.as_mpf()), 2)
                if lost > bits + 32:
                    raise CancellationError(
                        "scale increment lost more than the doubled-precision margin"
                    )
        return d

    def inverse(self, x: ExtScalar) -> ExtScalar:
        xv = x.as_mpf()
        bits = nm.get_precision().significand_bits

        def f(t):
            return ex.eval_expr(self._expr, nm.from_value(t)).as_mpf()

        with mp.workprec(bits + 10):
            lo = mp.mpf(1)
            # Walk up until defined and past x.
            flo = None
            for _ in range(64):
                try:
                    flo = f(lo)
                    break
                except (DomainError, CancellationError):
                    lo *= 4
            if flo is None:
                raise DomainError("scale is nowhere evaluable")
            hi = lo
            fhi = flo
            for _ in range(1 << 12):
                if fhi >= xv:
                    break
                hi = hi * 2
                fhi = f(hi)
            else:
                raise RangeError("could not bracket the inverse")
            if flo > xv:
                raise DomainError("inverse target below the scale range")
            for _ in range(bits + 16):
                mid = (lo + hi) / 2
                if f(mid) >= xv:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= abs(hi) * mp.mpf(2) ** (-bits):
                    break
        return nm.from_value(hi)

    def check_assumptions(self, grid=None) -> AssumptionReport:
        failures: list[str] = []
        notes: list[str] = []
        if grid is None:
            grid = [nm.from_value(10**k) for k in range(3, 13)]
        vals = []
        for p in grid:
            try:
                vals.append((p, ex.eval_expr(self._expr, p)))
            except (DomainError, CancellationError, RangeError):
                continue
        if len(vals) < 4:
            return AssumptionReport(
                False, "sampled", ("a: scale not evaluable on the check grid",)
            )
        for (p0, v0), (p1, v1) in zip(vals, vals[1:]):
            if not (v1 > v0):
                failures.append(
                    f"a: not strictly increasing between n = {nm.fmt(p0, 6)}"
                    f" and n = {nm.fmt(p1, 6)}"
                )
                break
        if vals[0][1].sign <= 0:
            failures.append("a: scale is not positive on the check grid")
        if not failures and not (vals[-1][1] > vals[0][1]):
            failures.append("a: no growth across the check grid")
        # Slow variation: w(x + y)/w(x) - 1 must die out along the grid.
        for y in (1, 7, 50):
            ratios = []
            for p, v in vals:
                try:
                    shifted = ex.eval_expr(
                        self._expr, nm.ext_add(p, nm.from_value(y))
                    )
                    ratios.append(
                        float(nm.ext_div(shifted, v).as_mpf()) - 1.0
                    )
                except (DomainError, CancellationError, RangeError):
                    continue
            if len(ratios) < 4:
                continue
            if not (abs(ratios[-1]) < 0.01 and abs(ratios[-1]) <= abs(ratios[0]) * 1.01 + 1e-12):
                failures.append(
                    f"b: w(x+{y})/w(x) stays {1 + ratios[-1]:.4g} instead of"
                    " approaching 1"
                )
                break
        if failures:
            return AssumptionReport(False, "sampled", tuple(failures))
        notes.append(
            "sampled check only: growth to infinity cannot be certified from"
            " finitely many points"
        )
        return AssumptionReport(True, "sampled", (), tuple(notes))


def parse_scale(text: str) -> ScaleFn:
    """Parse a scale name: n, ln, lnln, lnlnln, pow:sigma, expr:..."""
    s = text.strip()
    if s == "n":
        return Identity()
    if s in ("ln", "lnln", "lnlnln", "lnlnlnln"):
        return IterLog(len(s) // 2)
    if s.startswith("pow:"):
        try:
            return PowerOfN(ex._as_fraction(s[4:]))
        except (ValueError, ZeroDivisionError, TypeError) as err:
            raise ParseError(f"bad power scale {text!r}: {err}") from None
    if s.startswith("expr:"):
        return Custom(s[5:])
    raise ParseError(
        f"unknown scale {text!r}; expected n, ln, lnln, lnlnln, pow:sigma,"
        " or expr:..."
    )
