"""Command-line front end.

Binds the expression parser, the decision ladder, and the summation
oracle into reproducible runs. Exit codes for analyze: 0 decisive (or
matching --expect), 1 input error, 2 inconclusive after exhausting the
ladder, 3 decisive but contradicting --expect. verify reuses 0/1/2 and
exits 3 when the measured rate contradicts the prediction; a rate
whose comparison log cannot move at any feasible budget exits 0 with
an unverifiable-at-scale tag.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import corpus as corpus_mod
from . import criteria as cr
from . import numeric as nm
from . import sums
from .errors import (
    BudgetExceededError,
    CorpusMismatch,
    LogLadderError,
    ParseError,
    PositivityViolation,
    RangeError,
    UnboundParameterError,
)
from .limits import Geometric, TowerGeometric, make_grid
from .scale import parse_scale

__all__ = ["RunConfig", "main"]

SCHEMA_VERSION = "1"

_VERIFY_CHECKPOINTS = (10**4, 10**5, 10**6, 10**7)
_VERIFY_TOLERANCE = {
    "precise-tail": 0.001,
    "precise-partial": 0.001,
    "slow-log": 0.02,
    "slow-log-bound": 0.02,
}
_DEFAULT_RATIO_TOLERANCE = 0.05


@dataclass(frozen=True)
class RunConfig:
    """Everything one command invocation depends on."""

    expression: str
    params: dict
    scale: object | None  # parsed scale, None = auto ladder
    k_max: int
    precision: int
    grid: object | None
    budget: int
    fmt: str  # 'text' | 'json'
    expect: str | None


class _StageError(Exception):
    """Carries which pipeline stage failed for the exit-1 message."""

    def __init__(self, stage: str, err: Exception):
        super().__init__(f"error in {stage}: {err}")
        self.stage = stage
        self.err = err


def _parse_params(pairs) -> dict:
    out = {}
    for raw in pairs or ():
        name, sep, val = raw.partition("=")
        if not sep or not name:
            raise ParseError(f"--param needs NAME=VALUE, got {raw!r}")
        try:
            out[name] = Fraction(val)
        except (ValueError, ZeroDivisionError):
            try:
                out[name] = Fraction(float(val))
            except (ValueError, OverflowError):
                raise ParseError(
                    f"--param {name}: cannot read {val!r} as a number"
                )
    return out


def _parse_grid(text: str):
    """Grid override syntax: semicolon-joined segments.

    geometric:START:RATIO:COUNT or tower:LEVEL:START:STEP:COUNT.
    """
    schedule = []
    for seg in text.split(";"):
        parts = seg.strip().split(":")
        kind = parts[0]
        try:
            if kind == "geometric" and len(parts) == 4:
                schedule.append(
                    Geometric(int(parts[1]), int(parts[2]), int(parts[3]))
                )
            elif kind == "tower" and len(parts) == 5:
                schedule.append(
                    TowerGeometric(
                        int(parts[1]), int(parts[2]),
                        int(parts[3]), int(parts[4]),
                    )
                )
            else:
                raise ValueError(f"unrecognized grid segment {seg!r}")
        except (ValueError, TypeError) as e:
            raise ParseError(f"--grid: {e}")
    return schedule[0] if len(schedule) == 1 else schedule


def _build_config(args) -> RunConfig:
    try:
        params = _parse_params(getattr(args, "param", None))
        scale = None
        w = getattr(args, "w", None)
        if w and w != "auto":
            scale = parse_scale(w)
        grid = None
        if getattr(args, "grid", None):
            grid = _parse_grid(args.grid)
    except (ParseError, LogLadderError) as e:
        raise _StageError("input parsing", e)
    return RunConfig(
        expression=args.expression,
        params=params,
        scale=scale,
        k_max=getattr(args, "kmax", 4),
        precision=getattr(args, "precision", 0) or 0,
        grid=grid,
        budget=getattr(args, "budget", sums.DEFAULT_BUDGET),
        fmt="json" if getattr(args, "json", False) else "text",
        expect=getattr(args, "expect", None),
    )


def _analyze(config: RunConfig):
    try:
        policy = cr.AnalysisPolicy(
            scale=config.scale, k_max=config.k_max, grid=config.grid
        )
    except ValueError as e:
        raise _StageError("policy validation", e)
    try:
        if config.precision:
            with nm.local_precision(config.precision):
                return cr.analyze(
                    config.expression, policy=policy,
                    params=config.params or None,
                )
        return cr.analyze(
            config.expression, policy=policy, params=config.params or None
        )
    except (ParseError, UnboundParameterError) as e:
        raise _StageError("input parsing", e)
    except PositivityViolation as e:
        raise _StageError("sequence construction", e)
    except LogLadderError as e:
        raise _StageError("ladder analysis", e)


# -- serialization ---------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    f = nm.to_float(x)
    if math.isfinite(f):
        return f
    return "inf" if f > 0 else "-inf"


def _rate_json(rate):
    if rate is None:
        return None
    return {
        "template": rate.template,
        "w": rate.scale.name if rate.scale is not None else None,
        "level": rate.level,
        "order": _num(rate.order),
        "order_exact": (
            str(rate.exact_order) if rate.exact_order is not None else None
        ),
        "exponent": _num(rate.exponent),
        "constant": _num(rate.constant),
        "constant_exact": (
            str(rate.exact_constant)
            if rate.exact_constant is not None else None
        ),
        "one_sided": rate.one_sided,
    }


def _verdict_json(v):
    est = v.statistic
    return {
        "test": v.test_id,
        "w": v.scale.name if v.scale is not None else None,
        "level": v.level,
        "statistic_value": _num(est.value) if est is not None else None,
        "uncertainty": (
            _num(est.uncertainty) if est is not None else None
        ),
        "statistic_status": est.status if est is not None else None,
        "statistic_exact": (
            str(v.exact_value) if v.exact_value is not None else None
        ),
        "decision": v.decision,
        "reason": v.reason,
        "one_sided": v.one_sided,
        "rate": _rate_json(v.rate),
    }


def _report_json(config: RunConfig, report) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "sequence": report.sequence,
        "params": {k: str(v) for k, v in sorted(report.params.items())},
        "backend": report.backend,
        "scale": config.scale.name if config.scale is not None else "auto",
        "trace": [_verdict_json(v) for v in report.trace],
        "final": _verdict_json(report.final),
        "warnings": list(report.warnings),
    }


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, allow_nan=False))


def _fmt_stat(v) -> str:
    if v.exact_value is not None:
        return str(v.exact_value)
    est = v.statistic
    if est is None or est.value is None:
        return "-"
    s = nm.fmt(est.value, digits=8)
    if est.uncertainty is not None:
        u = nm.to_float(est.uncertainty)
        if math.isfinite(u) and u > 0:
            s += f" ± {u:.1e}"
    return s


def _fmt_rate(rate) -> str:
    if rate is None:
        return "-"
    bits = [rate.template]
    if rate.scale is not None:
        bits.append(f"w={rate.scale.name}")
    if rate.level:
        bits.append(f"level={rate.level}")
    if rate.exact_order is not None:
        bits.append(f"order={rate.exact_order}")
    elif rate.order is not None:
        bits.append(f"order={nm.fmt(rate.order, digits=6)}")
    if rate.exact_constant is not None:
        bits.append(f"C={rate.exact_constant}")
    elif rate.constant is not None:
        bits.append(f"C={nm.fmt(rate.constant, digits=6)}")
    if rate.one_sided:
        bits.append("one-sided")
    return " ".join(bits)


def _print_report(report) -> None:
    print(f"sequence: {report.sequence}")
    if report.params:
        joined = ", ".join(
            f"{k}={v}" for k, v in sorted(report.params.items())
        )
        print(f"params:   {joined}")
    print(f"backend:  {report.backend}")
    print()
    header = f"{'test':<16} {'w':<6} {'lvl':<3} {'statistic':<24} decision"
    print(header)
    print("-" * len(header))
    for v in report.trace:
        w = v.scale.name if v.scale is not None else "-"
        line = (
            f"{v.test_id:<16} {w:<6} {v.level:<3} {_fmt_stat(v):<24} "
            f"{v.decision}"
        )
        if v.reason:
            line += f" ({v.reason})"
        print(line)
    print()
    final = report.final
    print(f"verdict: {final.decision} [{final.test_id}]")
    if final.rate is not None:
        print(f"rate:    {_fmt_rate(final.rate)}")
    for w in report.warnings:
        print(f"warning: {w}")


# -- subcommands -----------------------------------------------------------------


def _cmd_analyze(args) -> int:
    config = _build_config(args)
    report = _analyze(config)
    if config.fmt == "json":
        _emit(_report_json(config, report))
    else:
        _print_report(report)
    final = report.final
    if not final.decisive:
        return 2
    if config.expect is not None and final.decision != config.expect:
        return 3
    return 0


def _verification_json(check, tag) -> dict:
    return {
        "template": check.template,
        "status": check.status,
        "tag": tag,
        "target": check.target,
        "observed": list(check.observed),
        "tolerance": check.tolerance,
        "checkpoints": list(check.checkpoints),
        "fitted_constant": check.fitted_constant,
        "note": check.note,
    }


def _cmd_verify(args) -> int:
    config = _build_config(args)
    report = _analyze(config)
    final = report.final
    if not final.decisive or final.rate is None:
        if config.fmt == "json":
            out = _report_json(config, report)
            out["verification"] = None
            _emit(out)
        else:
            _print_report(report)
            print("verify: no quantitative rate to check")
        return 2
    checkpoints = args.checkpoints or list(_VERIFY_CHECKPOINTS)
    checkpoints = [c for c in checkpoints if c <= config.budget]
    tolerance = args.tolerance
    if tolerance is None:
        tolerance = _VERIFY_TOLERANCE.get(
            final.rate.template, _DEFAULT_RATIO_TOLERANCE
        )
    try:
        check = sums.slope_check(
            config.expression, final.rate, checkpoints,
            tolerance=tolerance, budget=config.budget,
            params=config.params or None,
        )
        if args.csv:
            rows = sums.checkpoint_sums(
                config.expression, checkpoints, budget=config.budget,
                params=config.params or None,
            )
            sums.write_checkpoints_csv(args.csv, rows)
    except (BudgetExceededError, RangeError, ValueError) as e:
        raise _StageError("oracle summation", e)
    tag = (
        "unverifiable-at-scale"
        if check.status == "insufficient-signal" else check.status
    )
    if config.fmt == "json":
        out = _report_json(config, report)
        out["verification"] = _verification_json(check, tag)
        _emit(out)
    else:
        _print_report(report)
        print()
        print(f"verification: {tag}")
        if check.target is not None:
            print(f"  target:    {check.target}")
        if check.observed:
            obs = ", ".join(f"{o:.6g}" for o in check.observed)
            print(f"  observed:  {obs}")
        if check.fitted_constant is not None:
            print(f"  fitted C:  {check.fitted_constant:.6g}")
        print(f"  tolerance: {check.tolerance}")
        if check.note:
            print(f"  note:      {check.note}")
    if check.status == "fail":
        return 3
    return 0


def _cmd_sum(args) -> int:
    config = _build_config(args)
    try:
        if args.checkpoints:
            rows = sums.checkpoint_sums(
                config.expression, args.checkpoints,
                method=args.method, budget=config.budget,
                params=config.params or None,
            )
            if args.csv:
                sums.write_checkpoints_csv(args.csv, rows)
            if config.fmt == "json":
                _emit({
                    "schema_version": SCHEMA_VERSION,
                    "sequence": config.expression,
                    "checkpoints": [
                        {"N": n, "partial_sum": _num(s)} for n, s in rows
                    ],
                })
            else:
                for n, s in rows:
                    print(f"S({n}) = {nm.fmt(s, digits=15)}")
            return 0
        precision = config.precision or 53
        if args.tail_from is not None:
            result = sums.tail_sum(
                config.expression, args.tail_from, args.upto,
                method=args.method, budget=config.budget,
                precision=precision, params=config.params or None,
            )
            kind = "tail"
        else:
            result = sums.partial_sum(
                config.expression, args.upto, method=args.method,
                budget=config.budget, precision=precision,
                params=config.params or None,
            )
            kind = "partial"
    except (BudgetExceededError, RangeError, PositivityViolation,
            ValueError, ParseError, UnboundParameterError) as e:
        raise _StageError("oracle summation", e)
    if config.fmt == "json":
        _emit({
            "schema_version": SCHEMA_VERSION,
            "sequence": config.expression,
            "kind": kind,
            "n_terms": result.n_terms,
            "value": _num(result.value),
            "estimate": _num(result.estimate),
            "truncation_correction": _num(result.truncation_correction),
            "summation_method": result.summation_method,
            "estimated_roundoff": _num(result.estimated_roundoff),
            "precision_bits": result.precision_bits,
            "note": result.note,
        })
    else:
        print(f"{kind} sum of {config.expression}")
        print(f"  terms:    {result.n_terms}")
        print(f"  value:    {nm.fmt(result.value, digits=15)}")
        if result.truncation_correction is not None:
            print(
                "  beyond-window correction: "
                f"{nm.fmt(result.truncation_correction, digits=6)}"
            )
            print(f"  estimate: {nm.fmt(result.estimate, digits=15)}")
        print(f"  method:   {result.summation_method}")
        print(
            f"  roundoff: {nm.fmt(result.estimated_roundoff, digits=3)}"
        )
        if result.note:
            print(f"  note:     {result.note}")
    return 0


def _cmd_examples(args) -> int:
    as_json = getattr(args, "json", False)
    try:
        rows = corpus_mod.run_corpus(
            entry_ids=args.only or None, raise_on_mismatch=False
        )
    except LogLadderError as e:
        raise _StageError("corpus run", e)
    failures = [
        f"{r.entry_id}: {d}" for r in rows for d in r.deviations
    ]
    if args.only:
        known = {e.entry_id for e in corpus_mod.ENTRIES}
        failures += [
            f"{m}: no such corpus entry"
            for m in sorted(set(args.only) - known)
        ]
    if as_json:
        _emit({
            "schema_version": SCHEMA_VERSION,
            "entries": [
                {
                    "id": r.entry_id,
                    "sequence": r.expression,
                    "decision": r.decision,
                    "test": r.test,
                    "w": r.scale_name,
                    "level": r.level,
                    "statistic": r.statistic,
                    "rate": r.rate,
                    "deviations": list(r.deviations),
                }
                for r in rows
            ],
            "mismatches": failures,
        })
    else:
        header = (
            f"{'entry':<26} {'decision':<10} {'test':<16} {'w':<6} "
            f"{'lvl':<3} {'statistic':<10} rate"
        )
        print(header)
        print("-" * len(header))
        for r in rows:
            mark = "" if not r.deviations else "  <- MISMATCH"
            print(
                f"{r.entry_id:<26} {r.decision:<10} {r.test:<16} "
                f"{r.scale_name:<6} {r.level:<3} {r.statistic:<10} "
                f"{r.rate}{mark}"
            )
        for f in failures:
            print(f"mismatch: {f}")
    if failures:
        print(
            CorpusMismatch(f"{len(failures)} corpus deviation(s)"),
            file=sys.stderr,
        )
        return 1
    return 0


# -- argument wiring --------------------------------------------------------------


def _add_common(p, expect=False):
    p.add_argument("expression", help="term formula in n, e.g. '1/(n*ln(n))'")
    p.add_argument(
        "--param", action="append", metavar="NAME=VALUE",
        help="bind a parameter (repeatable); values may be rational "
             "like 1/2 or decimal",
    )
    p.add_argument(
        "--w", default="auto",
        help="scale: auto, n, ln, lnln, lnlnln, pow:SIGMA, or expr:...; "
             "pinning a scale disables escalation to other scales",
    )
    p.add_argument(
        "--kmax", type=int, default=4,
        help="deepest escalation level to try (default 4)",
    )
    p.add_argument(
        "--precision", type=int, default=0, metavar="BITS",
        help="working precision override in bits",
    )
    p.add_argument(
        "--grid", default=None,
        help="sampling grid override: 'geometric:START:RATIO:COUNT' or "
             "'tower:LEVEL:START:STEP:COUNT', ';'-joined",
    )
    p.add_argument(
        "--budget", type=int, default=sums.DEFAULT_BUDGET,
        help="oracle term-evaluation budget (default 10^8)",
    )
    p.add_argument(
        "--json", action="store_true", help="emit a JSON report"
    )
    if expect:
        p.add_argument(
            "--expect", choices=("converges", "diverges"), default=None,
            help="exit 3 when the verdict disagrees (for CI)",
        )


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="logladder",
        description="Convergence analysis for positive series by "
                    "scaled-log statistics, with a summation oracle.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "analyze", help="run the decision ladder on a sequence"
    )
    _add_common(p, expect=True)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser(
        "sum", help="sum terms directly (ground truth, no analysis)"
    )
    _add_common(p)
    p.add_argument("upto", type=int, help="last index to sum")
    p.add_argument(
        "--tail-from", type=int, default=None, metavar="N",
        help="sum the window [N, UPTO] and fit a beyond-window "
             "correction instead of starting at the first index",
    )
    p.add_argument(
        "--method", choices=("compensated", "pairwise"),
        default="compensated",
    )
    p.add_argument(
        "--checkpoints", type=int, nargs="+", default=None,
        help="report running totals at these indices instead",
    )
    p.add_argument("--csv", default=None, help="write checkpoints as CSV")
    p.set_defaults(fn=_cmd_sum)

    p = sub.add_parser(
        "verify", help="check the predicted rate against checkpoint sums"
    )
    _add_common(p)
    p.add_argument(
        "--checkpoints", type=int, nargs="+", default=None,
        help="oracle checkpoints (default 10^4..10^7 by decades)",
    )
    p.add_argument(
        "--tolerance", type=float, default=None,
        help="override the per-template pass tolerance",
    )
    p.add_argument("--csv", default=None, help="write checkpoints as CSV")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser(
        "examples", help="run the reference corpus and check expectations"
    )
    p.add_argument(
        "--only", nargs="+", default=None, metavar="ID",
        help="run a subset of corpus entries",
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_examples)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _StageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except (ParseError, UnboundParameterError) as e:
        print(f"error in input parsing: {e}", file=sys.stderr)
        return 1
    except PositivityViolation as e:
        print(f"error in sequence construction: {e}", file=sys.stderr)
        return 1
    except LogLadderError as e:
        print(f"error in ladder analysis: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
