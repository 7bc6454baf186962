#! /usr/bin/env python3
"""Command-line front end: one subcommand per computation, CSV or JSON on stdout."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import fields
from fractions import Fraction

from terminaltables import AsciiTable

from ordsum import arith, bounds, classcount, gsum, quadfield
from ordsum.bounds import DEFAULT_PRECISION_BITS, RationalInterval, render_decimal
from ordsum.classcount import PkReport
from ordsum.gsum import DecompositionReport
from ordsum.utils.errors import DomainError, OrdsumError, PrecisionExhausted, WorkBudgetExceeded
from ordsum.utils.logger import Logger
from ordsum.utils.parse_config import parse_field_config
from ordsum.utils.utils import print_environment_info, provide_determinism, worker_count

logger = logging.getLogger(__name__)


REPORT_COLUMNS = ("x", "g_exact", "term_I", "term_II", "term_II1", "term_II2", "term_III",
                  "ell_lo", "ell_hi", "t_lo", "t_hi",
                  "card_S", "card_I", "card_II", "card_III", "card_H", "card_J")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def exact_text(value):
    """'p/q' for a rational, 'p' for an integer."""
    return str(Fraction(value))


def report_row(report):
    row = {}
    for column in REPORT_COLUMNS:
        if column in ("ell_lo", "ell_hi", "t_lo", "t_hi"):
            interval = getattr(report, column[:-3])
            row[column] = exact_text(interval.lo if column.endswith("lo") else interval.hi)
        else:
            value = getattr(report, column)
            row[column] = exact_text(value) if isinstance(value, Fraction) else value
    return row


def _encode(value):
    if isinstance(value, RationalInterval):
        return {"lo": exact_text(value.lo), "hi": exact_text(value.hi)}
    if isinstance(value, Fraction):
        return {"exact": exact_text(value), "decimal": render_decimal(value)}
    return value


def _decode(value):
    if isinstance(value, dict) and "lo" in value:
        return RationalInterval(Fraction(value["lo"]), Fraction(value["hi"]))
    if isinstance(value, dict) and "exact" in value:
        return Fraction(value["exact"])
    return value


def report_document(report):
    """JSON-ready dict of every report field, in declaration order, plus the H(x) bound verdict for G."""
    document = {f.name: _encode(getattr(report, f.name)) for f in fields(report)}
    if isinstance(report, DecompositionReport):
        document["h_bound"] = str(report.check_h_bound().status)
    return document


def load_report_json(text):
    """Inverse of the JSON emitted for a DecompositionReport or PkReport."""
    document = json.loads(text)
    cls = PkReport if "growth_C" in document else DecompositionReport
    return cls(**{f.name: _decode(document[f.name]) for f in fields(cls)})


def emit_report(rows, output_format, columns=None):
    """Serializes rows (dicts, or report dataclasses) to deterministic bytes.

    :param rows: Reports or plain dicts with identical keys
    :type rows: list
    :param output_format: ``csv`` or ``json``
    :type output_format: str
    :param columns: CSV column order, defaults to the keys of the first row
    :type columns: list, optional
    :rtype: bytes
    """
    reports = [r for r in rows if isinstance(r, gsum.ClassifiedReport)]
    if output_format == "json":
        if reports and len(reports) == len(rows):
            payload = [report_document(r) for r in rows]
        else:
            payload = [{key: _encode(value) for key, value in row.items()} for row in rows]
        document = payload[0] if len(payload) == 1 else payload
        return (json.dumps(document, indent=2) + "\n").encode("utf-8")
    if reports and len(reports) == len(rows):
        rows = [report_row(r) for r in rows]
        columns = REPORT_COLUMNS
    columns = list(columns or (rows[0].keys() if rows else []))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[column]) for column in columns])
    return buffer.getvalue().encode("utf-8")


def _csv_cell(value):
    if isinstance(value, Fraction):
        return exact_text(value)
    if isinstance(value, RationalInterval):
        return f"{exact_text(value.lo)}..{exact_text(value.hi)}"
    if value is None:
        return ""
    return value


def write_output(data, path):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fp:
            fp.write(data)
    except OSError as e:
        raise OrdsumError(f"cannot write output file {path}: {e.strerror}")


def print_table(rows, columns, file=sys.stderr):
    table = [list(columns)] + [[str(_csv_cell(row[c])) for c in columns] for row in rows]
    print(AsciiTable(table).table, file=file)


def _rational_arg(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational number such as 2, 1.5 or 5/2, got {text!r}")


def _int_list(text):
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv", help="Output format")
    common.add_argument("-o", "--output", type=str, default=None, help="Write output to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="Print summaries and progress bars to stderr")
    common.add_argument("--selftest", action="store_true", help="Run this subcommand's oracle cross-checks at reduced scale")
    common.add_argument("--precision_bits", type=int, default=None, help="Starting precision of certified comparisons")
    common.add_argument("--field_config", type=str, default=None, help="Path to field config file (.data)")
    common.add_argument("--logdir", type=str, default=None, help="Directory for scalar logs")
    common.add_argument("--seed", type=int, default=42, help="Seed for random test data")

    parser = argparse.ArgumentParser(prog="ordsum", description="Exact order-index sums and their bounds.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    sub.required = True

    p = sub.add_parser("gsum", parents=[common], help="G(x) and its I/II/III decomposition")
    p.add_argument("--a", type=int, default=None, help="Base a >= 2")
    p.add_argument("--x", type=int, default=None, help="Range x >= 3")
    p.add_argument("--alpha", type=_rational_arg, default=Fraction(2), help="Exponent alpha in (1, 3)")
    p.add_argument("--beta", type=_rational_arg, default=None, help="Exponent beta > 0, defaults to (alpha - 1)/2")

    p = sub.add_parser("gsum-table", parents=[common], help="G(x)·(log x)^alpha / x^2 over several x")
    p.add_argument("--a", type=int, default=None, help="Base a >= 2")
    p.add_argument("--xs", type=_int_list, default=None, help="Ascending comma separated x values")
    p.add_argument("--alpha", type=_rational_arg, default=Fraction(2), help="Exponent alpha in (1, 3)")
    p.add_argument("--beta", type=_rational_arg, default=None, help="Exponent beta > 0, defaults to (alpha - 1)/2")

    p = sub.add_parser("verify-lemmas", parents=[common], help="Certified sweeps over the explicit inequalities")
    p.add_argument("--xmax", type=int, default=2000, help="Largest x of the x^x/(x-y)^(x-y) grid")
    p.add_argument("--kmax_lemma2", type=int, default=2000, help="Largest k of the C(k, j) <= C(k, j+1)/2 grid")
    p.add_argument("--kmax_binom", type=int, default=500, help="Largest k of the binomial sum grid")
    p.add_argument("--nmax", type=int, default=300, help="Largest n of the Stirling grid")
    p.add_argument("--matrices", type=int, default=200, help="Random matrix pairs per dimension")
    p.add_argument("--max_dim", type=int, default=8, help="Largest matrix dimension")
    p.add_argument("--ideal_x", type=int, default=2000, help="Check tau of prime-power ideals of norm <= ideal_x")
    p.add_argument("--fields", type=_int_list, default=[2, 5], help="Comma separated d of the fields for the tau check")

    p = sub.add_parser("field-info", parents=[common], help="Fundamental unit, growth constant and unit checks")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2")
    p.add_argument("--kmax", type=int, default=0, help="Check |N(eps^k - 1)| <= C^k for k <= kmax")
    p.add_argument("--bound_x", type=int, default=0, help="Check order lower bounds for N(I) <= bound_x")

    p = sub.add_parser("pksum", parents=[common], help="P_K(x) and its I/II/III decomposition")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2")
    p.add_argument("--x", type=int, default=None, help="Norm bound x >= 3")
    p.add_argument("--alpha", type=_rational_arg, default=Fraction(2), help="Exponent alpha in (1, 3)")
    p.add_argument("--beta", type=_rational_arg, default=None, help="Exponent beta > 0, defaults to (alpha - 1)/2")

    p = sub.add_parser("hnar", parents=[common], help="Narrow ray class numbers of all moduli up to x")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2")
    p.add_argument("--x", type=int, default=None, help="Norm bound x >= 1")
    p.add_argument("--rational", action="store_true", help="Moduli n <= x over Q instead of a quadratic field")

    p = sub.add_parser("delta", parents=[common], help="Primitive characters of conductor norm <= x")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2 (omit for Q)")
    p.add_argument("--x", type=int, default=None, help="Bound x >= 1")

    p = sub.add_parser("jk", parents=[common], help="Sums of omega(I)^2 and counts of ideals with many prime factors")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2")
    p.add_argument("--xs", type=_int_list, default=None, help="Comma separated norm bounds x >= 3")
    p.add_argument("--beta", type=_rational_arg, default=Fraction(1, 2), help="Exponent beta > 0 of the omega threshold")

    p = sub.add_parser("class-number", parents=[common], help="Class number and narrow class number")
    p.add_argument("--d", type=int, default=None, help="Squarefree d >= 2")
    return parser


def _apply_field_config(args):
    config = {}
    if args.field_config is not None:
        try:
            config = parse_field_config(args.field_config)
        except OSError as e:
            raise DomainError(f"--field_config: cannot read {args.field_config}: {e.strerror}")
        except ValueError as e:
            raise DomainError(f"--field_config: {e}")
    if getattr(args, "d", None) is None and "d" in config:
        args.d = config["d"]
    if args.precision_bits is None:
        args.precision_bits = config.get("precision_bits", DEFAULT_PRECISION_BITS)
    return config


def _validate(args):
    """Raises DomainError naming the offending flag and its valid range."""
    if args.precision_bits < 1:
        raise DomainError(f"--precision_bits must be >= 1, got {args.precision_bits}")
    try:
        worker_count()
    except ValueError as e:
        raise DomainError(str(e))
    if args.selftest:
        return
    need = {
        "gsum": [("a", 2), ("x", 3)],
        "gsum-table": [("a", 2)],
        "field-info": [("d", 2)],
        "pksum": [("d", 2), ("x", 3)],
        "hnar": [("x", 1)],
        "delta": [("x", 1)],
        "jk": [("d", 2)],
        "class-number": [("d", 2)],
    }.get(args.subcommand, [])
    if args.subcommand == "hnar" and not args.rational:
        need.append(("d", 2))
    for name, lowest in need:
        value = getattr(args, name)
        if value is None:
            raise DomainError(f"--{name} is required (an integer >= {lowest})")
        if value < lowest:
            raise DomainError(f"--{name} must be >= {lowest}, got {value}")
    if getattr(args, "d", None) is not None and args.d >= 2 and not quadfield.is_squarefree(args.d):
        raise DomainError(f"--d must be squarefree, got {args.d}")
    if hasattr(args, "alpha") and not 1 < args.alpha < 3:
        raise DomainError(f"--alpha must lie in (1, 3), got {args.alpha}")
    if getattr(args, "beta", None) is not None and args.beta <= 0:
        raise DomainError(f"--beta must be > 0, got {args.beta}")
    if args.subcommand == "gsum-table":
        if not args.xs or any(x < 1 for x in args.xs):
            raise DomainError("--xs must list integers >= 1")
        if any(b < a for a, b in zip(args.xs, args.xs[1:])):
            raise DomainError(f"--xs must be ascending, got {args.xs}")
    if args.subcommand == "jk" and (not args.xs or any(x < 3 for x in args.xs)):
        raise DomainError("--xs must list integers >= 3")
    if args.subcommand == "verify-lemmas":
        for name, lowest in (("xmax", 4), ("kmax_lemma2", 5), ("kmax_binom", 5), ("nmax", 2),
                             ("matrices", 0), ("max_dim", 1), ("ideal_x", 0)):
            if getattr(args, name) < lowest:
                raise DomainError(f"--{name} must be >= {lowest}, got {getattr(args, name)}")
        bad = [d for d in args.fields if d < 2 or not quadfield.is_squarefree(d)]
        if bad:
            raise DomainError(f"--fields must list squarefree integers >= 2, got {bad}")
    if getattr(args, "kmax", 0) < 0 or getattr(args, "bound_x", 0) < 0:
        raise DomainError("--kmax and --bound_x must be >= 0")


# Each subcommand returns (rows, columns, exit code).
def _cmd_gsum(args, config, scalars):
    cfg = gsum.DecompositionConfig(args.a, args.x, args.alpha, args.beta)
    report = gsum.decompose(cfg, args.precision_bits, config.get("rho_iterations", arith.DEFAULT_RHO_ITERATIONS),
                            verbose=args.verbose)
    if args.verbose:
        print_table([report_row(report)], REPORT_COLUMNS[:7] + REPORT_COLUMNS[11:])
        print(f"|H(x)| bound: {report.check_h_bound().status}", file=sys.stderr)
    return [report], None, EXIT_OK if not report.violations() else EXIT_FAILED


def _cmd_gsum_table(args, config, scalars):
    rows = []
    for row in gsum.growth_table(args.a, args.alpha, args.xs, args.beta, args.precision_bits, verbose=args.verbose):
        rows.append({"x": row.x, "g_exact": row.g_exact, "g_decimal": render_decimal(row.g_exact),
                     "ratio": row.ratio})
        scalars.list_of_scalars_summary([("gsum/g", row.g_exact), ("gsum/ratio", row.ratio)], row.x)
    columns = ["x", "g_exact", "g_decimal", "ratio"]
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK


def _cmd_verify_lemmas(args, config, scalars):
    bits = args.precision_bits
    summaries = [
        bounds.run_grid("lemma1", args.xmax, bits, verbose=args.verbose),
        bounds.run_grid("lemma2", args.kmax_lemma2, bits, verbose=args.verbose),
        bounds.run_grid("binom_sum", args.kmax_binom, bits, verbose=args.verbose),
        bounds.run_grid("stirling", args.nmax, bits, verbose=args.verbose),
        bounds.matrix_grid(args.matrices, args.max_dim, seed=args.seed),
    ]
    if args.ideal_x:
        summaries.extend(quadfield.ideal_tau_grid(quadfield.make_field(d), args.ideal_x) for d in args.fields)
    return _summary_rows(summaries, args)


def _summary_rows(summaries, args):
    columns = ["check", "checked", "holds", "fails", "undecided", "max_precision_bits", "first_problem"]
    rows = [{c: getattr(s, c) if c != "check" else s.name for c in columns} for s in summaries]
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK if all(s.ok for s in summaries) else EXIT_FAILED


def _cmd_field_info(args, config, scalars):
    K = quadfield.make_field(args.d)
    cd = classcount.resolve_class_data(K, config)
    rows = [{"d": K.d, "disc": K.disc, "omega_kind": str(K.omega_kind), "eps_u": K.eps.u, "eps_v": K.eps.v,
             "eps_norm": K.eps_norm, "growth_C": K.growth_C, "h": cd.h, "h_plus": cd.h_plus}]
    columns = list(rows[0])
    code = EXIT_OK
    checks = []
    if args.kmax:
        summary = bounds.GridSummary("norm_growth")
        for verdict in quadfield.norm_growth_check(K, args.kmax):
            summary.add(verdict)
        checks.append(summary)
    if args.bound_x >= 2:
        summary = bounds.GridSummary("order_lower_bound")
        for _, verdict in quadfield.order_lower_bound_check(K, args.bound_x, args.precision_bits, args.verbose):
            summary.add(verdict)
        checks.append(summary)
    for summary in checks:
        rows[0][f"{summary.name}_holds"] = f"{summary.holds}/{summary.checked}"
        columns.append(f"{summary.name}_holds")
        if not summary.ok:
            code = EXIT_FAILED
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, code


def _cmd_pksum(args, config, scalars):
    K = quadfield.make_field(args.d)
    report = classcount.pk_decompose(K, args.x, args.alpha, args.beta, args.precision_bits, verbose=args.verbose)
    if args.verbose:
        print_table([report_row(report)], REPORT_COLUMNS[:7] + REPORT_COLUMNS[11:])
    return [report], None, EXIT_OK if not report.violations() else EXIT_FAILED


def _cmd_hnar(args, config, scalars):
    rows = []
    if args.rational:
        phi = arith.phi_sieve(args.x)
        for n in range(1, args.x + 1):
            rows.append({"n": n, "phi": int(phi[n]), "hnar": classcount.hnar_rational(n)})
        columns = ["n", "phi", "hnar"]
    else:
        K = quadfield.make_field(args.d)
        cd = classcount.resolve_class_data(K, config)
        for ideal, f in quadfield.ideal_factorizations_up_to(K, args.x):
            rows.append({"a": ideal.a, "b": ideal.b, "c": ideal.c, "norm": ideal.norm, "phi": f.phi,
                         "unit_index": quadfield.unit_index(K, ideal, f),
                         "narrow_unit_index": quadfield.narrow_unit_index(K, ideal, f),
                         "hnar": classcount.hnar(K, ideal, cd, f)})
        columns = ["a", "b", "c", "norm", "phi", "unit_index", "narrow_unit_index", "hnar"]
    if args.verbose:
        print(f"---- sum of hnar: {sum(row['hnar'] for row in rows)} ----", file=sys.stderr)
    return rows, columns, EXIT_OK


def _cmd_delta(args, config, scalars):
    if args.d is None:
        rows = [{"x": args.x, "delta": classcount.delta_rationals(args.x)}]
    else:
        K = quadfield.make_field(args.d)
        cd = classcount.resolve_class_data(K, config)
        rows = [{"x": args.x, "delta": classcount.delta_quadratic(K, args.x, cd),
                 "hnar_sum": classcount.hnar_sum(K, args.x, cd)}]
    columns = list(rows[0])
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK


def _cmd_jk(args, config, scalars):
    K = quadfield.make_field(args.d)
    bits = args.precision_bits
    rows = []
    for x in args.xs:
        jk = quadfield.jk_sum(K, x)
        high = quadfield.count_high_omega_ideals(K, x, args.beta, bits)
        row = {
            "x": x,
            "ideal_count": len(quadfield.ideals_up_to(K, x)),
            "jk_sum": jk,
            "omega_pair_sum": quadfield.omega_pair_sum(K, x),
            "jk_ratio": bounds.render_certified(lambda b: bounds.loglog_ratio(jk, x, b), precision_bits=bits),
            "high_omega": high,
            "high_omega_ratio": bounds.render_certified(
                lambda b: bounds.high_omega_ratio(high, x, args.beta, b), precision_bits=bits),
        }
        rows.append(row)
        scalars.list_of_scalars_summary([("jk/ratio", row["jk_ratio"]),
                                         ("jk/high_omega_ratio", row["high_omega_ratio"])], x)
    columns = list(rows[0])
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK


def _cmd_class_number(args, config, scalars):
    K = quadfield.make_field(args.d)
    cd = classcount.narrow_class_number(args.d, config.get("max_discriminant", classcount.DEFAULT_MAX_DISCRIMINANT))
    rows = [{"d": K.d, "disc": K.disc, "eps_norm": K.eps_norm, "h": cd.h, "h_plus": cd.h_plus}]
    columns = list(rows[0])
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK


def _selftest_gsum(args):
    for a in (2, 3, 5, 7, 10):
        yield f"orders a={a}", gsum.orders_agree(a, 300)
        for x in (1, 2, 3, 10, 100, 300):
            yield f"g_direct=g_oracle a={a} x={x}", gsum.g_direct(a, x) == gsum.g_oracle(a, x)
    report = gsum.decompose(gsum.DecompositionConfig(2, 1000, 2))
    yield "decomposition invariants a=2 x=1000", not report.violations()


def _selftest_lemmas(args):
    for name, upper in (("lemma1", 60), ("lemma2", 60), ("binom_sum", 60), ("stirling", 30)):
        yield f"grid {name}", bounds.run_grid(name, upper, args.precision_bits, workers=1).ok
    yield "matrix bounds", bounds.matrix_grid(10, 4, seed=args.seed).ok
    yield "ideal tau d=2", quadfield.ideal_tau_grid(quadfield.make_field(2), 200).ok
    yield "count_high_omega x=100 beta=1", bounds.count_high_omega(100, 1) == 0


def _selftest_field(args):
    for d in (2, 3, 5):
        K = quadfield.make_field(d)
        yield f"enumeration d={d}", quadfield.ideals_up_to(K, 200) == quadfield.ideals_by_norm_form(K, 200)
        agree = all(quadfield.unit_order_mod(K, ideal, K.eps, f) == classcount._naive_order(K, ideal, K.eps)
                    for ideal, f in quadfield.ideal_factorizations_up_to(K, 100))
        yield f"unit orders d={d}", agree
        yield f"norm growth d={d}", all(v.holds for v in quadfield.norm_growth_check(K, 20))


def _selftest_pksum(args):
    for d in (2, 5):
        K = quadfield.make_field(d)
        for x in (1, 10, 100, 200):
            yield f"pk_direct=pk_oracle d={d} x={x}", classcount.pk_direct(K, x) == classcount.pk_oracle(K, x)


def _selftest_hnar(args):
    yield "hnar over Q is phi", all(classcount.hnar_rational(n) == arith.euler_phi(n) for n in range(1, 101))
    for d in (2, 3, 5):
        K = quadfield.make_field(d)
        cd = classcount.narrow_class_number(d)
        try:
            classcount.hnar_sum(K, 200, cd)
            yield f"hnar integral d={d}", True
        except OrdsumError:
            yield f"hnar integral d={d}", False


def _selftest_delta(args):
    yield "delta over Q", all(classcount.delta_rationals(x) == classcount.delta_rationals_oracle(x)
                              for x in (1, 2, 10, 50, 100))
    for d in (2, 5):
        K = quadfield.make_field(d)
        cd = classcount.narrow_class_number(d)
        yield f"delta <= hnar_sum d={d}", classcount.delta_quadratic(K, 100, cd) <= classcount.hnar_sum(K, 100, cd)


def _selftest_jk(args):
    for d in (2, 5):
        K = quadfield.make_field(d)
        omega_total = sum(f.omega for _, f in quadfield.ideal_factorizations_up_to(K, 500))
        yield f"jk = pairs + omega d={d}", quadfield.jk_sum(K, 500) == quadfield.omega_pair_sum(K, 500) + omega_total


def _selftest_class_number(args):
    expected = {2: (1, 1), 3: (1, 2), 5: (1, 1), 6: (1, 2), 10: (2, 2)}
    for d, (h, h_plus) in expected.items():
        cd = classcount.narrow_class_number(d)
        yield f"class numbers d={d}", (cd.h, cd.h_plus) == (h, h_plus)


SELFTESTS = {
    "gsum": _selftest_gsum,
    "gsum-table": _selftest_gsum,
    "verify-lemmas": _selftest_lemmas,
    "field-info": _selftest_field,
    "pksum": _selftest_pksum,
    "hnar": _selftest_hnar,
    "delta": _selftest_delta,
    "jk": _selftest_jk,
    "class-number": _selftest_class_number,
}

COMMANDS = {
    "gsum": _cmd_gsum,
    "gsum-table": _cmd_gsum_table,
    "verify-lemmas": _cmd_verify_lemmas,
    "field-info": _cmd_field_info,
    "pksum": _cmd_pksum,
    "hnar": _cmd_hnar,
    "delta": _cmd_delta,
    "jk": _cmd_jk,
    "class-number": _cmd_class_number,
}


def _run_selftest(args):
    rows = [{"check": name, "passed": bool(passed)} for name, passed in SELFTESTS[args.subcommand](args)]
    columns = ["check", "passed"]
    if args.verbose:
        print_table(rows, columns)
    return rows, columns, EXIT_OK if all(row["passed"] for row in rows) else EXIT_FAILED


def parse_and_dispatch(argv=None):
    """Parses ``argv``, runs the subcommand and writes its output.

    :param argv: Command line without the program name, defaults to ``sys.argv[1:]``
    :type argv: list[str]
    :return: 0 on success, 1 on a failed verification or check, 2 on a usage error
    :rtype: int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        config = _apply_field_config(args)
        _validate(args)
    except DomainError as e:
        print(f"{parser.prog} {args.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.verbose:
        print_environment_info()
        print(f"Command line arguments: {args}", file=sys.stderr)
    provide_determinism(args.seed)
    scalars = Logger(args.logdir)

    try:
        if args.selftest:
            rows, columns, code = _run_selftest(args)
        else:
            rows, columns, code = COMMANDS[args.subcommand](args, config, scalars)
        write_output(emit_report(rows, args.output_format, columns), args.output)
    except DomainError as e:
        print(f"{parser.prog} {args.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (WorkBudgetExceeded, PrecisionExhausted, OrdsumError) as e:
        print(f"{parser.prog} {args.subcommand}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        scalars.close()
    return code


def run():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    run()
