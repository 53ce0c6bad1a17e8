"""Extended positive-range scalars for statistics on iterated-log scales.

Two representations share one type:

- plain: a sign and an arbitrary-precision float magnitude. The float's
  exponent is an arbitrary integer, so plain form already reaches numbers
  like 10**(10**4000). The practical ceiling is the cost of carrying that
  exponent integer, capped here at 2**14 bits (_EXP_CAP_BITS).

- tower: exp applied `level` times to a float residue. Canonical towers
  keep the residue in [1, e) so that level and residue order values
  lexicographically. Towers are exact under ln (the level just drops) and
  under exp (the level just rises), which is what keeps deep sampling
  grids free of rounding drift.

Negative numbers and zero are always plain. A value that would need a
negative or reciprocal tower raises RangeError instead.

Addition at tower scale is resolution-limited: when one operand cannot
change the other at working precision, the dominant operand is returned
and the event is recorded in the active absorption log. Subtraction of
two towers that agree at working precision raises CancellationError,
since no digits of the true difference are known.
"""

from __future__ import annotations

import re
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .errors import (
    AbsorptionWarning,
    CancellationError,
    DivisionByZero,
    DomainError,
    ParseError,
    RangeError,
)

__all__ = [
    "ExtScalar",
    "Precision",
    "ZERO",
    "ONE",
    "absorption_log",
    "arith",
    "ext_add",
    "ext_sub",
    "ext_mul",
    "ext_div",
    "ext_pow",
    "ext_neg",
    "ext_abs",
    "ext_ln",
    "ext_exp",
    "ext_ln1p",
    "ext_expm1",
    "ext_cmp",
    "iter_ln",
    "fmt",
    "from_value",
    "parse_scalar",
    "to_float",
    "get_precision",
    "set_precision",
    "local_precision",
]

_GUARD = 10

# Plain-form exponent integers are capped at this many bits. exp() of an
# argument past the corresponding magnitude returns a tower instead.
_EXP_CAP_BITS = 1 << 14

with mp.workprec(64):
    _EXP_ARG_CAP = mp.mpf("0.693147180559945") * mp.mpf(2) ** _EXP_CAP_BITS


@dataclass(frozen=True)
class Precision:
    """Working precision for extended arithmetic.

    significand_bits is the mantissa size used by every operation (a few
    guard bits are added internally). max_tower_level bounds how high a
    tower exp() may build before raising RangeError; a canonical tower at
    the top level is allowed a residue past e so the cap does not bite on
    ordinary deep grids.
    """

    significand_bits: int = 256
    max_tower_level: int = 6

    def __post_init__(self):
        if self.significand_bits < 64:
            raise ValueError("significand_bits must be at least 64")
        if self.max_tower_level < 4:
            raise ValueError("max_tower_level must be at least 4")


_prec_stack: list[Precision] = [Precision()]


def get_precision() -> Precision:
    return _prec_stack[-1]


def set_precision(precision: Precision) -> None:
    """Replace the default precision at the bottom of the stack."""
    if not isinstance(precision, Precision):
        raise TypeError("set_precision expects a Precision")
    _prec_stack[0] = precision


@contextmanager
def local_precision(precision):
    """Temporarily switch precision. Accepts a Precision or a bit count."""
    if isinstance(precision, int):
        base = get_precision()
        precision = Precision(precision, base.max_tower_level)
    _prec_stack.append(precision)
    try:
        yield precision
    finally:
        _prec_stack.pop()


def _bits() -> int:
    return get_precision().significand_bits


_absorb_sinks: list[list[AbsorptionWarning]] = []


@contextmanager
def absorption_log():
    """Collect absorption events from the enclosed operations.

    Yields a list that receives one AbsorptionWarning per absorbed
    operand, in evaluation order. Nesting works; every active log sees
    every event.
    """
    sink: list[AbsorptionWarning] = []
    _absorb_sinks.append(sink)
    try:
        yield sink
    finally:
        _absorb_sinks.remove(sink)


def _note_absorption(message: str) -> None:
    if _absorb_sinks:
        event = AbsorptionWarning(message)
        for sink in _absorb_sinks:
            sink.append(event)


class ExtScalar:
    """One number in plain or tower form. Immutable.

    Do not call the constructor directly; use from_value, the tower
    classmethod, or the module arithmetic.
    """

    __slots__ = ("sign", "level", "mag")

    def __init__(self, sign: int, level: int, mag):
        if level > 0 and sign != 1:
            raise RangeError("tower form must be positive")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "mag", mag)

    def __setattr__(self, name, value):
        raise AttributeError("ExtScalar is immutable")

    # -- construction ---------------------------------------------------

    @classmethod
    def tower(cls, level: int, residue) -> "ExtScalar":
        """exp applied `level` times to residue, canonicalized."""
        if level < 0:
            raise ValueError("tower level must be nonnegative")
        with mp.workprec(_bits() + _GUARD):
            r = _to_mpf(residue)
            h = level
            while h > 0:
                if r >= _e():
                    r = mp.ln(r)
                    h += 1
                elif r < 1:
                    r = mp.exp(r)
                    h -= 1
                else:
                    break
            if h == 0:
                return _plain(r)
            cap = get_precision().max_tower_level
            while h > cap:
                # Fold excess levels into the residue; at the cap the
                # residue may exceed e.
                if r > _EXP_ARG_CAP:
                    raise RangeError(
                        f"tower level {h} exceeds the configured maximum {cap}"
                    )
                r = mp.exp(r)
                h -= 1
            return cls(1, h, r)

    @property
    def is_plain(self) -> bool:
        return self.level == 0

    def as_mpf(self):
        """Plain signed value, or RangeError if the tower does not fit."""
        if self.level == 0:
            return self.mag if self.sign >= 0 else -self.mag
        with mp.workprec(_bits() + _GUARD):
            v = self.mag
            for _ in range(self.level):
                if v > _EXP_ARG_CAP:
                    raise RangeError(
                        "tower form exceeds the plain representable range"
                    )
                v = mp.exp(v)
        return v

    def lowered(self) -> "ExtScalar":
        """Plain-form copy of self (RangeError if infeasible)."""
        if self.level == 0:
            return self
        return _plain(self.as_mpf())

    # -- python protocol -------------------------------------------------

    def __repr__(self):
        return f"ExtScalar({fmt(self)!r})"

    def __str__(self):
        return fmt(self)

    __hash__ = None

    def _coerced(self, other):
        if isinstance(other, ExtScalar):
            return other
        if isinstance(other, (int, float, Fraction, type(mp.mpf(1)))):
            return from_value(other)
        return None

    def __eq__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return ext_cmp(self, o) == 0

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return ext_cmp(self, o) < 0

    def __le__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return ext_cmp(self, o) <= 0

    def __gt__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return ext_cmp(self, o) > 0

    def __ge__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return ext_cmp(self, o) >= 0

    def __add__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_add(self, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_sub(self, o)

    def __rsub__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_sub(o, self)

    def __mul__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_div(self, o)

    def __rtruediv__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_div(o, self)

    def __pow__(self, other):
        o = self._coerced(other)
        return NotImplemented if o is None else ext_pow(self, o)

    def __neg__(self):
        return ext_neg(self)

    def __abs__(self):
        return ext_abs(self)

    def __float__(self):
        return to_float(self)


def _e():
    return mp.e


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.mpf(x)


def _plain(v) -> ExtScalar:
    if v == 0:
        return ExtScalar(0, 0, mp.mpf(0))
    if v > 0:
        return ExtScalar(1, 0, v)
    return ExtScalar(-1, 0, -v)


def from_value(x) -> ExtScalar:
    """Coerce an int, float, Fraction, mpf, or decimal string."""
    if isinstance(x, ExtScalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    with mp.workprec(_bits() + _GUARD):
        return _plain(_to_mpf(x))


ZERO = ExtScalar(0, 0, mp.mpf(0))
ONE = ExtScalar(1, 0, mp.mpf(1))


_TOWER_RE = re.compile(r"^exp\^(\d+)\((.+)\)$")


def parse_scalar(text: str) -> ExtScalar:
    """Parse 'exp^h(r)' tower syntax or a plain decimal."""
    s = text.strip()
    m = _TOWER_RE.match(s)
    try:
        with mp.workprec(_bits() + _GUARD):
            if m:
                return ExtScalar.tower(int(m.group(1)), mp.mpf(m.group(2)))
            return _plain(mp.mpf(s))
    except (ValueError, TypeError):
        raise ParseError(f"not a scalar: {text!r}") from None


def fmt(x: ExtScalar, digits: int | None = None) -> str:
    """Decimal rendering; towers print as exp^h(residue)."""
    if digits is None:
        digits = max(6, int(_bits() * 0.3010) - 2)
    if x.level == 0:
        v = x.mag if x.sign >= 0 else -x.mag
        return mp.nstr(v, digits)
    return f"exp^{x.level}({mp.nstr(x.mag, digits)})"


def to_float(x: ExtScalar) -> float:
    if x.level > 0:
        return float("inf")
    try:
        return float(x.mag) * x.sign
    except (OverflowError, ValueError):
        return float("inf") * x.sign


# -- comparison ----------------------------------------------------------


def _cmp_mag(x: ExtScalar, y: ExtScalar) -> int:
    """Order the magnitudes of two nonzero scalars."""
    with mp.workprec(_bits() + _GUARD):
        hx, rx = x.level, x.mag
        hy, ry = y.level, y.mag
        # Strip ln from both sides until one is plain. ln preserves order
        # and is exact on towers.
        while hx > 0 and hy > 0:
            hx -= 1
            hy -= 1
        while hx > 0:
            if ry <= 1:
                return 1
            ry = mp.ln(ry)
            hx -= 1
        while hy > 0:
            if rx <= 1:
                return -1
            rx = mp.ln(rx)
            hy -= 1
        if rx == ry:
            return 0
        return 1 if rx > ry else -1


def ext_cmp(x: ExtScalar, y: ExtScalar) -> int:
    """Three-way compare at working precision."""
    if x.sign != y.sign:
        return 1 if x.sign > y.sign else -1
    if x.sign == 0:
        return 0
    c = _cmp_mag(x, y)
    return c if x.sign > 0 else -c


# -- addition core -------------------------------------------------------


def _log_gap_exceeds(big: ExtScalar, small: ExtScalar, bits: int) -> bool:
    """True if ln(big) - ln(small) is provably larger than bits * ln 2.

    Both arguments are positive magnitudes with big >= small.
    """
    lb = ext_ln(big)
    ls = ext_ln(small)
    sgn, gap = _add_pairs(lb.sign, ext_abs(lb), -ls.sign, ext_abs(ls))
    if sgn <= 0:
        return False
    if gap.level > 0:
        return True
    with mp.workprec(_bits() + _GUARD):
        return gap.mag > mp.mpf(bits) * mp.ln(2)


def _add_plain(sx: int, xv, sy: int, yv):
    """Signed plain add with absorption detection. Returns an ExtScalar."""
    a = xv if sx > 0 else -xv
    b = yv if sy > 0 else -yv
    s = a + b
    if s == a and sy != 0:
        _note_absorption(
            f"term {fmt(_plain(b))} absorbed into {fmt(_plain(a))}"
        )
    elif s == b and sx != 0:
        _note_absorption(
            f"term {fmt(_plain(a))} absorbed into {fmt(_plain(b))}"
        )
    return _plain(s)


def _add_pairs(sx: int, xm: ExtScalar, sy: int, ym: ExtScalar):
    """Add two signed magnitudes. Returns (sign, magnitude) without
    materializing a possibly negative tower."""
    if sx == 0 or xm.sign == 0:
        return sy, ym
    if sy == 0 or ym.sign == 0:
        return sx, xm

    prec = _bits()
    with mp.workprec(prec + _GUARD):
        lx = None
        ly = None
        if xm.level > 0:
            try:
                xm = xm.lowered()
            except RangeError:
                lx = True
        if ym.level > 0:
            try:
                ym = ym.lowered()
            except RangeError:
                ly = True

        if lx is None and ly is None:
            r = _add_plain(sx, xm.mag, sy, ym.mag)
            return r.sign, ext_abs(r)

        # At least one operand is a tower beyond plain range.
        c = _cmp_mag(xm, ym)
        if c == 0:
            if sx == sy:
                _note_absorption(
                    f"equal-magnitude term folded into {fmt(xm)}"
                )
                return sx, xm
            raise CancellationError(
                "difference of tower forms that agree at working precision"
            )
        if c > 0:
            sb, big, ss, small = sx, xm, sy, ym
        else:
            sb, big, ss, small = sy, ym, sx, xm
        if _log_gap_exceeds(big, small, prec + 2):
            _note_absorption(f"term {fmt(small)} absorbed into {fmt(big)}")
            return sb, big
        if sb == ss:
            # The smaller term matters in value but not at the resolution
            # of a tower this size: ln(big + small) differs from ln(big)
            # by less than one ulp of the residue.
            _note_absorption(
                f"term {fmt(small)} below log resolution of {fmt(big)}"
            )
            return sb, big
        raise CancellationError(
            "difference of comparable tower-range values cannot be resolved"
        )


def _materialize(sign: int, mag: ExtScalar) -> ExtScalar:
    if sign == 0 or mag.sign == 0:
        return ZERO
    if mag.level > 0:
        if sign < 0:
            raise RangeError("negative values must fit plain form")
        return mag
    return ExtScalar(sign, 0, mag.mag)


def ext_add(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    s, m = _add_pairs(x.sign, ext_abs(x), y.sign, ext_abs(y))
    return _materialize(s, m)


def ext_sub(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    s, m = _add_pairs(x.sign, ext_abs(x), -y.sign, ext_abs(y))
    return _materialize(s, m)


def ext_neg(x: ExtScalar) -> ExtScalar:
    if x.sign == 0:
        return ZERO
    if x.level > 0:
        raise RangeError("negative values must fit plain form")
    return ExtScalar(-x.sign, 0, x.mag)


def ext_abs(x: ExtScalar) -> ExtScalar:
    if x.sign >= 0:
        return x
    return ExtScalar(1, x.level, x.mag)


# -- multiplication ------------------------------------------------------


def ext_mul(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    if x.sign == 0 or y.sign == 0:
        return ZERO
    sign = x.sign * y.sign
    if x.level == 0 and y.level == 0:
        with mp.workprec(_bits() + _GUARD):
            return _materialize(sign, _plain(x.mag * y.mag))
    # Tower involved: multiply on the log side. Exponent arithmetic there
    # is an add, which carries its own absorption reporting.
    lx = ext_ln(ext_abs(x))
    ly = ext_ln(ext_abs(y))
    s, m = _add_pairs(lx.sign, ext_abs(lx), ly.sign, ext_abs(ly))
    return _materialize(sign, ext_exp(_materialize(s, m)))


def ext_div(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    if y.sign == 0:
        raise DivisionByZero("division by zero")
    if x.sign == 0:
        return ZERO
    sign = x.sign * y.sign
    if x.level == 0 and y.level == 0:
        with mp.workprec(_bits() + _GUARD):
            return _materialize(sign, _plain(x.mag / y.mag))
    lx = ext_ln(ext_abs(x))
    ly = ext_ln(ext_abs(y))
    s, m = _add_pairs(lx.sign, ext_abs(lx), -ly.sign, ext_abs(ly))
    return _materialize(sign, ext_exp(_materialize(s, m)))


def ext_pow(x: ExtScalar, y: ExtScalar) -> ExtScalar:
    if y.sign == 0:
        return ONE
    if x.sign == 0:
        if y.sign > 0:
            return ZERO
        raise DivisionByZero("zero raised to a negative power")
    if x.sign < 0:
        if y.level != 0 or not mp.isint(y.mag):
            raise DomainError(
                "non-integer power of a negative value"
            )
        with mp.workprec(_bits() + _GUARD):
            e = int(y.mag) * y.sign
            sign = -1 if e % 2 else 1
        mag = ext_pow(ext_abs(x), y)
        return _materialize(sign, mag)
    if x.level == 0 and y.level == 0 and mp.isint(y.mag) and y.mag <= 4096:
        with mp.workprec(_bits() + _GUARD):
            return _plain(x.mag ** (int(y.mag) * y.sign))
    return ext_exp(ext_mul(y, ext_ln(x)))


# -- exponentials and logarithms ------------------------------------------


def ext_ln(x: ExtScalar) -> ExtScalar:
    if x.sign <= 0:
        raise DomainError("ln of a non-positive value")
    if x.level > 0:
        if x.level == 1:
            return _plain(x.mag)
        return ExtScalar(1, x.level - 1, x.mag)
    with mp.workprec(_bits() + _GUARD):
        return _plain(mp.ln(x.mag))


def ext_exp(x: ExtScalar) -> ExtScalar:
    if x.sign == 0:
        return ONE
    if x.level > 0:
        # x is a positive tower; exp raises the level by one.
        cap = get_precision().max_tower_level
        if x.level + 1 > cap:
            raise RangeError(
                f"tower level {x.level + 1} exceeds the configured maximum {cap}"
            )
        return ExtScalar(1, x.level + 1, x.mag)
    with mp.workprec(_bits() + _GUARD):
        v = x.mag if x.sign > 0 else -x.mag
        if abs(v) <= _EXP_ARG_CAP:
            return _plain(mp.exp(v))
        if v > 0:
            return ExtScalar.tower(1, v)
        raise RangeError("exp underflows the plain representable range")


def ext_ln1p(x: ExtScalar) -> ExtScalar:
    """ln(1 + x), accurate for tiny x."""
    if x.sign == 0:
        return ZERO
    if x.level > 0:
        _note_absorption(f"1 absorbed into {fmt(x)} under ln1p")
        return ext_ln(x)
    with mp.workprec(_bits() + _GUARD):
        v = x.mag if x.sign > 0 else -x.mag
        if v <= -1:
            raise DomainError("ln1p of a value at or below -1")
        return _plain(mp.log1p(v))


def ext_expm1(x: ExtScalar) -> ExtScalar:
    """exp(x) - 1, accurate for tiny x."""
    if x.sign == 0:
        return ZERO
    if x.level > 0:
        _note_absorption(f"1 absorbed into exp of {fmt(x)} under expm1")
        return ext_exp(x)
    with mp.workprec(_bits() + _GUARD):
        v = x.mag if x.sign > 0 else -x.mag
        return _plain(mp.expm1(v))


def iter_ln(k: int, x: ExtScalar) -> ExtScalar:
    """k-fold iterated ln; k = 0 returns x unchanged."""
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    for _ in range(k):
        x = ext_ln(x)
    return x


_ARITH_OPS = {
    "add": ext_add,
    "sub": ext_sub,
    "mul": ext_mul,
    "div": ext_div,
    "pow": ext_pow,
}


def arith(op: str, x, y) -> ExtScalar:
    """Named dispatch over the binary operations."""
    try:
        f = _ARITH_OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return f(from_value(x), from_value(y))
