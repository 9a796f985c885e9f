"""Command-line entry point: ``osface verify ...`` and ``osface eval ...``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on usage,
configuration or domain errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import formulas, suite
from .errors import ConfigError, OSFaceError, PoleError
from .sampling import SamplingError
from .state_sum import ParameterPoint, partition_function_oracle
from .theta import EllipticContext, theta

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_complex(text: str) -> complex:
    """Parse ``"0.1"``, ``"0.1+0.2j"`` or ``"0.1+0.2i"``."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(x) for x in text.split(",") if x.strip()]


def format_complex(z: complex) -> str:
    z = complex(z)
    # +0.0 turns -0.0 into 0.0
    return f"{z.real + 0.0:.15g} {z.imag + 0.0:.15g}"


def _positive_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osface", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run seeded verification checks")
    v.add_argument("group", choices=("all",) + suite.GROUPS)
    v.add_argument("--config", help=f"key=value config file (default: ${suite.CONFIG_ENV})")
    v.add_argument("--seed", type=lambda s: int(s, 0))
    v.add_argument("--q", help="comma-separated nome values")
    v.add_argument("--samples", type=_positive_int, help="samples per check (all checks)")
    v.add_argument("--n-max", type=_positive_int, dest="n_max")
    v.add_argument("--out", help="report path (line-delimited JSON)")
    v.add_argument("--timings", action="store_true", default=None,
                   help="record elapsed_micros (reports are then not reproducible)")

    e = sub.add_parser("eval", help="evaluate one quantity")
    e.add_argument("expr", choices=("theta", "P", "E", "F"))
    e.add_argument("--u", required=True, type=parse_complex_list,
                   help="argument of theta, or comma-separated u_1..u_2n")
    e.add_argument("--h", type=parse_complex, default=None, help="height parameter")
    e.add_argument("--q", type=float, required=True, help="nome in (0, 1)")
    return parser


def _verify(args) -> int:
    try:
        config = suite.load_config(
            args.config,
            seed=args.seed,
            nomes=suite.parse_float_list(args.q) if args.q is not None else None,
            samples_per_check=args.samples,
            n_max=args.n_max,
            out=args.out,
            timings=args.timings,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = suite.run_suite(config, [args.group])
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        suite.write_report(result, config.out)
    except OSError as exc:
        print(f"cannot write report {config.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(format_summary(result, config))
    return EXIT_OK if result.passed else EXIT_FAIL


def format_summary(result: suite.SuiteResult, config: suite.SuiteConfig) -> str:
    lines = [f"seed={config.seed} nomes={','.join(f'{q:g}' for q in config.nomes)} "
             f"n_max={config.n_max}"]
    width = max((len(r[0]) for r in result.summary_rows()), default=10)
    for name, count, failed, worst, tol in result.summary_rows():
        status = "PASS" if failed == 0 else f"FAIL ({failed})"
        lines.append(f"{name:<{width}}  {count:6d}  max residual {worst:9.2e}  "
                     f"tol {tol:7.1e}  {status}")
    for stream, counts in sorted(result.rejections.items()):
        detail = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        lines.append(f"rejected draws {stream}: {detail}")
    lines.extend(result.notes)
    failed = sum(not r.passed for r in result.reports)
    lines.append(f"{len(result.reports)} checks, {failed} failed; report: {config.out}")
    return "\n".join(lines)


def _eval(args) -> int:
    if not 0.0 < args.q < 1.0:
        print(f"error: nome {args.q} outside (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    ctx = EllipticContext(args.q)
    try:
        if args.expr == "theta":
            if len(args.u) != 1:
                print("error: theta takes a single --u value", file=sys.stderr)
                return EXIT_USAGE
            value = theta(args.u[0], ctx)
        else:
            if args.h is None:
                print(f"error: {args.expr} needs --h", file=sys.stderr)
                return EXIT_USAGE
            p = ParameterPoint(args.u, args.h)
            value = {
                "P": lambda: partition_function_oracle(p, ctx),
                "E": lambda: formulas.eval_E(p, ctx),
                "F": lambda: formulas.eval_F(p, ctx),
            }[args.expr]()
    except PoleError as exc:
        print(f"pole error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSFaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(format_complex(value))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return _verify(args)
    return _eval(args)


if __name__ == "__main__":
    raise SystemExit(main())
