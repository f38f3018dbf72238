"""Command dispatcher, seeded instance generator, and JSON report emitter.

Commands read a problem file and print one JSON report to stdout; exit code 0
means pass/effective, 1 means a certified failure verdict, 2 means error.
Randomness is Mersenne Twister (random.Random) consuming only randrange, so
fixtures are stable across runs and platforms.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from .coeff import DualNumbers, PrimeField, RationalField
from .descent import DescentDatum, check_cocycle
from .descent import isocrystal_from_descent
from .errors import NovikovError, ProblemSemanticError, ProblemSyntaxError
from .grammar import (
    Problem,
    frac_str,
    parse_monoid_spec,
    parse_problem,
    parse_ring_spec,
    serialize_matrix,
    serialize_problem,
    serialize_series,
)
from .isocrystal import NotEffective, ObstructedOrbit, SlopeNotOne
from .pipeline import descend
from .series import INF, Monoid, Unsolvable, constant_series, monomial, one_series, solve_additive_twist
from .seriesalg import SeriesMatrix

COMMANDS = ("validate", "cocycle", "isocrystal", "descend", "twist-solve")


# -- instance generator ---------------------------------------------------------


def _sample_exponent(rng, monoid: Monoid) -> Fraction:
    # numerators stay in [-2, 2] so magnitudes shrink with the denominator;
    # accumulated weights then stay well inside a cutoff of 16
    if monoid.kind == "z":
        return Fraction(rng.randrange(-2, 3))
    if monoid.kind == "zp":
        den = monoid.p ** rng.randrange(3)  # denominators bounded by p^2
        return Fraction(rng.randrange(-2, 3), den)
    den = rng.randrange(1, 5)
    return Fraction(rng.randrange(-2, 3), den)


def _sample_unit(rng, ring):
    base = ring.base if isinstance(ring, DualNumbers) else ring
    if isinstance(base, PrimeField):
        val = rng.randrange(1, base.p)
    else:
        val = Fraction(rng.randrange(1, 5))
        if rng.randrange(2):
            val = -val
    return ring.coerce(val)


def generate_instance(seed, rank, ring, monoid, lam, prec, kind="coboundary") -> Problem:
    """Deterministic seeded problem: a coboundary datum built from a short
    product of elementary matrices with monomial entries, or (for dual rings)
    one congruent to the identity modulo eps.

    The trivializing matrix is assembled exactly (infinite precision) and its
    inverse taken through the adjugate, so the emitted phi carries the full
    requested precision rather than whatever an elimination would leave."""
    from .series import PI1, PI2, invert_series, rename_vars
    from .seriesalg import mat_adjugate, mat_det, mat_rename

    lam = Fraction(lam)
    rng = random.Random(seed)
    if kind == "coboundary":
        xi = SeriesMatrix.identity(rank, ring, 1)
        count = rank + rng.randrange(rank + 1)  # at most 3*rank factors
        for _ in range(count):
            coeff = _sample_unit(rng, ring)
            exp = _sample_exponent(rng, monoid)
            if rank == 1 or rng.randrange(3) == 0:
                i = j = rng.randrange(rank)
            else:
                i = rng.randrange(rank)
                j = rng.randrange(rank - 1)
                if j >= i:
                    j += 1
            factor = [
                [
                    monomial(ring, exp, coeff)
                    if (r == i and c == j)
                    else (
                        one_series(ring, 1)
                        if r == c and not (r == i and c == j)
                        else constant_series(ring, 0, 1)
                    )
                    for c in range(rank)
                ]
                for r in range(rank)
            ]
            xi = xi @ SeriesMatrix(factor)
    elif kind == "nilpotent":
        if not isinstance(ring, DualNumbers):
            raise ProblemSemanticError("nilpotent instances need a dual coefficient ring")
        entries = [
            [one_series(ring, 1) if r == c else constant_series(ring, 0, 1) for c in range(rank)]
            for r in range(rank)
        ]
        count = rank + rng.randrange(2 * rank + 1)
        for _ in range(count):
            i = rng.randrange(rank)
            j = rng.randrange(rank)
            level = 1 + rng.randrange(ring.order - 1)
            base_val = rng.randrange(1, ring.base.p) if isinstance(ring.base, PrimeField) else Fraction(1)
            payload = tuple(
                base_val if k == level else ring.base.zero for k in range(ring.order)
            )
            exp = abs(_sample_exponent(rng, monoid))  # nonnegative keeps pivots unit-dominant
            entries[i][j] = entries[i][j] + monomial(ring, exp, payload)
        xi = SeriesMatrix(entries)
    else:
        raise ProblemSemanticError(f"unknown instance kind {kind!r}")
    det_inv = invert_series(mat_det(xi))
    xi_inv = mat_adjugate(xi).map_entries(lambda e: e * det_inv)
    phi_exact = mat_rename(xi_inv, PI2) @ mat_rename(xi, PI1)
    phi = phi_exact.map_entries(lambda e: e.truncate(prec))
    return Problem(ring, monoid, lam, prec, rank, "phi", phi)


# -- reports ----------------------------------------------------------------------


def _residual_weight(matrix):
    weights = [e.wmin() for row in matrix.entries for e in row if e.terms]
    if not weights:
        return None
    return frac_str(min(weights))


def _obstruction_json(reason):
    if isinstance(reason, SlopeNotOne):
        ring = reason.value.ring
        return {
            "kind": "slope_not_one",
            "index": reason.index,
            "value": serialize_series(constant_series(ring, reason.value.value)),
        }
    if isinstance(reason, ObstructedOrbit):
        ring = reason.total.ring
        return {
            "kind": "obstructed_orbit",
            "row": reason.row,
            "column": reason.col,
            "orbit": [frac_str(e) for e in reason.orbit],
            "sum": serialize_series(constant_series(ring, reason.total.value)),
        }
    if isinstance(reason, Unsolvable):
        ring = reason.total.ring
        return {
            "kind": "obstructed_orbit",
            "orbit": [frac_str(e) for e in reason.orbit],
            "sum": serialize_series(constant_series(ring, reason.total.value)),
        }
    return {"kind": "unknown", "detail": repr(reason)}


def _datum_from(problem: Problem) -> DescentDatum:
    if problem.payload_kind != "phi":
        raise ProblemSemanticError(
            f"command needs a phi payload, problem carries {problem.payload_kind!r}"
        )
    return DescentDatum(problem.payload, problem.monoid)


def run_command(cmd: str, problem: Problem):
    """Run one command against a parsed problem; returns (report, exit_code)."""
    if cmd == "validate":
        return {
            "verdict": "ok",
            "prec": frac_str(problem.prec),
            "canonical": serialize_problem(problem),
        }, 0
    if cmd == "cocycle":
        datum = _datum_from(problem)
        result = check_cocycle(datum)
        if result.ok:
            return {"verdict": "pass", "prec": frac_str(result.residual.prec)}, 0
        return {
            "verdict": "fail",
            "residual": [[serialize_series(e) for e in row] for row in result.residual.entries],
            "residual_norm_weight": _residual_weight(result.residual),
            "prec": frac_str(result.residual.prec),
        }, 1
    if cmd == "isocrystal":
        datum = _datum_from(problem)
        iso = isocrystal_from_descent(datum, problem.lam)
        return {
            "verdict": "ok",
            "b": [[serialize_series(e) for e in row] for row in iso.b.entries],
            "prec": frac_str(iso.prec),
        }, 0
    if cmd == "descend":
        datum = _datum_from(problem)
        result = descend(datum, problem.lam)
        if isinstance(result, NotEffective):
            return {
                "verdict": "not_effective",
                "xi": None,
                "residual_norm_weight": None,
                "obstruction": _obstruction_json(result.reason),
                "prec": frac_str(problem.prec),
            }, 1
        return {
            "verdict": "effective",
            "xi": [[serialize_series(e) for e in row] for row in result.xi.entries],
            "residual_norm_weight": None,
            "obstruction": None,
            "prec": frac_str(result.prec),
        }, 0
    if cmd == "twist-solve":
        if problem.payload_kind != "twist":
            raise ProblemSemanticError("twist-solve needs a twist payload")
        result = solve_additive_twist(problem.payload, problem.lam, problem.monoid)
        if isinstance(result, Unsolvable):
            return {
                "verdict": "unsolvable",
                "z": None,
                "obstruction": _obstruction_json(result),
                "prec": frac_str(problem.prec),
            }, 1
        return {
            "verdict": "solvable",
            "z": serialize_series(result),
            "obstruction": None,
            "prec": frac_str(result.prec),
        }, 0
    raise ProblemSemanticError(f"unknown command {cmd!r}")


def _error_report(exc) -> dict:
    if isinstance(exc, ProblemSyntaxError):
        detail = {"type": "SyntaxError", "message": str(exc), "line": exc.line, "col": exc.col}
    elif isinstance(exc, ProblemSemanticError):
        detail = {"type": "SemanticError", "message": str(exc)}
    else:
        detail = {"type": type(exc).__name__, "message": str(exc)}
    return {"verdict": "error", "error": detail}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="novikov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("file")
    g = sub.add_parser("gen")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--kind", choices=("coboundary", "nilpotent"), default="coboundary")
    g.add_argument("--ring", default="fp 5")
    g.add_argument("--monoid", default="zp 2")
    g.add_argument("--lambda", dest="lam", default="2")
    g.add_argument("--prec", default="16")
    args = parser.parse_args(argv)

    try:
        if args.command == "gen":
            ring = parse_ring_spec(args.ring)
            monoid = parse_monoid_spec(args.monoid)
            lam = Fraction(args.lam)
            prec = INF if args.prec == "inf" else Fraction(args.prec)
            problem = generate_instance(args.seed, args.rank, ring, monoid, lam, prec, args.kind)
            sys.stdout.write(serialize_problem(problem))
            return 0
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
        problem = parse_problem(text)
        report, code = run_command(args.command, problem)
    except (NovikovError, OSError) as exc:
        print(json.dumps(_error_report(exc)))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report))
    return code


def console():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
