"""Command-line interface.

Exit status: 0 on success, 1 for a domain error (bad discriminant, excluded
j, level mismatch, ...), 2 when a numeric result cannot be certified or a
relation is indeterminate, 3 when ``verify`` finds a failing invariant, and
64 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Sequence

import mpmath

from . import __version__, cm, fingal, gl2q, halfplane, hecke, jfun, modelcheck, modpoly, verify
from .errors import IndeterminateError, JCoverError, PrecisionError
from .numeric import Approx, format_mp, working_digits

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PRECISION = 2
EXIT_VERIFY = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(text: str, out: str | None) -> None:
    if out:
        from .cache import write_atomic
        from pathlib import Path

        write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _matrix_text(rows) -> str:
    return "[[" + "], [".join(", ".join(str(x) for x in row) for row in rows) + "]]"


_EXACT = re.compile(r"[+-]?\d+(/\d+)?")


def parse_value(text: str, digits: int):
    """An exact rational (``"1728"``, ``"-3/4"``) or a decimal/complex number.

    Decimal input is taken to be accurate to its last written digit.
    """
    text = text.strip()
    if _EXACT.fullmatch(text):
        return Fraction(text) if "/" in text else int(text)
    decimals = max((len(m) for m in re.findall(r"\.(\d+)", text)), default=0)
    with working_digits(max(digits, len(text)) + 10):
        try:
            value = mpmath.mpc(mpmath.mpmathify(text))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"cannot parse value {text!r}") from exc
        radius = mpmath.mpf(10) ** (-decimals) / 2
        return Approx(value, radius)


def cmd_modpoly(args) -> int:
    if args.digits:
        poly = modpoly.modular_polynomial(args.n, args.digits)
    else:
        poly = modpoly.get_modular_polynomial(args.n)
    _emit(modpoly.to_text(poly, args.n), args.out)
    return EXIT_OK


def cmd_classpoly(args) -> int:
    if args.digits:
        poly = cm.class_polynomial(args.d, args.digits)
    else:
        poly = cm.get_class_polynomial(args.d)
    _emit(poly.to_text(), args.out)
    return EXIT_OK


def cmd_cosets(args) -> int:
    reps = gl2q.coset_representatives(args.n)
    if args.json:
        print(json.dumps([g.to_json() for g in reps]))
    else:
        for g in reps:
            print(_matrix_text(g.rows()))
    return EXIT_OK


def cmd_isogeny(args) -> int:
    j1 = parse_value(args.j1, args.digits)
    j2 = parse_value(args.j2, args.digits)
    try:
        n = hecke.in_hecke_orbit(j1, j2, args.max_n)
    except IndeterminateError:
        print("indeterminate")
        return EXIT_PRECISION
    print(f"related N={n}" if n is not None else f"unrelated up to {args.max_n}")
    return EXIT_OK


def cmd_j_eval(args) -> int:
    try:
        obj = json.loads(args.tau)
        tau = halfplane.point_from_json(obj)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"bad --tau: {exc}") from exc
    ev = jfun.evaluate_j_detailed(tau, args.digits)
    with working_digits(args.digits + 40):
        re_s = format_mp(mpmath.nint(ev.value.real * 10**args.digits) / 10**args.digits)
        im_s = format_mp(mpmath.nint(ev.value.imag * 10**args.digits) / 10**args.digits)
        if args.json:
            err = mpmath.nstr(ev.error, 3, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
            print(json.dumps({"re": re_s, "im": im_s, "error": err}))
        else:
            print(re_s, im_s)
    return EXIT_OK


def cmd_galois_order(args) -> int:
    order = fingal.group_order(args.n, args.flavor)
    if args.json:
        print(json.dumps({"level": args.n, "flavor": args.flavor, "order": str(order)}))
    else:
        print(order)
    return EXIT_OK


def cmd_backforth(args) -> int:
    if not args.demo:
        raise UsageError("backforth currently runs only with --demo")
    n = args.level
    if n < 2:
        raise ValueError("--level must be at least 2")
    source = verify.demo_structure(n)
    sigma = next(s for s in fingal.group_elements(n) if not s.is_identity())
    target = source.twisted(sigma)
    final, partial, steps = modelcheck.back_and_forth(source, target)
    preserved = modelcheck.finite_type(source, source.names) == modelcheck.finite_type(
        final, [partial[x] for x in source.names]
    )
    witness = modelcheck.nonstandard_fiber_witness(n)
    violations = witness.sf_violations()
    if args.json:
        print(
            json.dumps(
                {
                    "level": n,
                    "target_twist": sigma.to_json(),
                    "steps": [
                        {"source": s.source, "image": s.image, "twist": s.twist.to_json(), "fresh": s.fresh}
                        for s in steps
                    ],
                    "type_preserved": preserved,
                    "witness": witness.to_json(),
                    "sf_violations": [list(v) for v in violations],
                }
            )
        )
    else:
        print(f"level {n}, target labels twisted by {_matrix_text(sigma.rows())}")
        for s in steps:
            fresh = " (adjoined)" if s.fresh else ""
            print(f"{s.source} -> {s.image}{fresh} twist {_matrix_text(s.twist.rows())}")
        print(f"type preserved: {'yes' if preserved else 'no'}")
        pairs = ", ".join(f"{a}/{b}" for a, b in violations) or "none"
        print(f"nonstandard fibre witness: SF violated by {pairs}")
    return EXIT_OK if preserved and violations else EXIT_VERIFY


def cmd_verify(args) -> int:
    failed = False
    for result in verify.run(args.quick):
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name}: {result.detail}")
        failed |= not result.passed
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jcover", description="Hecke orbits, modular polynomials and finite-level covers of the j-line.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("modpoly", help="print the modular polynomial Phi_N")
    s.add_argument("n", type=int)
    s.add_argument("--digits", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_modpoly)

    s = sub.add_parser("classpoly", help="print the class polynomial H_D")
    s.add_argument("d", type=int)
    s.add_argument("--digits", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classpoly)

    s = sub.add_parser("cosets", help="list the Hecke coset representatives of level N")
    s.add_argument("n", type=int)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_cosets)

    s = sub.add_parser("isogeny", help="find the least N <= K with Phi_N(J1, J2) = 0")
    s.add_argument("j1")
    s.add_argument("j2")
    s.add_argument("--max-n", type=int, required=True)
    s.add_argument("--digits", type=int, default=30)
    s.set_defaults(func=cmd_isogeny)

    s = sub.add_parser("j-eval", help="evaluate j at a point of the upper half plane")
    s.add_argument("--tau", required=True, help='{"a":..,"b":..,"D":..} or {"re":..,"im":..,"prec":..}')
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_j_eval)

    s = sub.add_parser("galois-order", help="order of PSL2(Z/N) or PGL2(Z/N)")
    s.add_argument("n", type=int)
    s.add_argument("--flavor", choices=["psl", "pgl"], default="psl")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_galois_order)

    s = sub.add_parser("backforth", help="run the back-and-forth extension on a demo structure")
    s.add_argument("--level", type=int, default=2)
    s.add_argument("--demo", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_backforth)

    s = sub.add_parser("verify", help="run the invariant suite")
    s.add_argument("--quick", action="store_true")
    s.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionError, IndeterminateError) as exc:
        print(f"jcover: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (JCoverError, ValueError) as exc:
        print(f"jcover: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())
