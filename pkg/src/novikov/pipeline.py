"""Top-level effectivity: descend a datum to a trivialization or certify the
obstruction, with square-zero lifting through dual-number chains."""

from __future__ import annotations

from fractions import Fraction

from .coeff import DualNumbers, chain_lift, chain_quotient, chain_reduce
from .descent import CheckResult, DescentDatum, Trivialization, check_cocycle
from .descent import isocrystal_from_descent
from .errors import (
    AdditiveCocycleViolated,
    CocycleViolated,
    HypothesisViolated,
    MonoidNotStable,
    NotSquareZeroStep,
    PrecisionExhausted,
    SupportSplitFailed,
)
from .isocrystal import NotEffective, trivialize_isocrystal_field
from .series import (
    Monoid,
    NovikovSeries,
    PI1,
    PI2,
    PI12,
    PI13,
    PI23,
    support_in_monoid,
)
from .seriesalg import SeriesMatrix, mat_invert, mat_rename


def verify_effectivity(d: DescentDatum, xi) -> CheckResult:
    """Recompute xi(u)^-1 * xi(t) - phi and test it against the cutoff."""
    xi = xi.xi if isinstance(xi, Trivialization) else xi
    xi_inv = mat_invert(xi)
    residual = mat_rename(xi_inv, PI2) @ mat_rename(xi, PI1) - d.phi
    return CheckResult(residual.is_zero(), residual)


def check_exponent_restriction(xi, monoid: Monoid) -> bool:
    xi = xi.xi if isinstance(xi, Trivialization) else xi
    return all(support_in_monoid(e, monoid) for row in xi.entries for e in row)


def _constant_matrix_inverse(ring, rows):
    """Invert a square payload matrix over the coefficient ring, or None."""
    n = len(rows)
    aug = [list(r) + [ring.one if i == j else ring.zero for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if ring.is_unit(aug[r][col]):
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = ring.inv(aug[col][col])
        aug[col] = [ring.mul(inv, v) for v in aug[col]]
        for r in range(n):
            if r != col and not ring.is_zero(aug[r][col]):
                f = aug[r][col]
                aug[r] = [ring.sub(a, ring.mul(f, b)) for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def normalize_trivialization(xi: SeriesMatrix) -> SeriesMatrix:
    """Left-multiply by a constant so the weight-0 part becomes the identity,
    when that part is invertible; otherwise return xi unchanged."""
    ring = xi.ring
    zero_key = (Fraction(0),)
    const = [[e.terms.get(zero_key, ring.zero) for e in row] for row in xi.entries]
    inv = _constant_matrix_inverse(ring, const)
    if inv is None:
        return xi
    n = xi.rows
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = xi.entries[0][j].scale(inv[i][0])
            for k in range(1, n):
                acc = acc + xi.entries[k][j].scale(inv[i][k])
            row.append(acc)
        out.append(row)
    return SeriesMatrix(out)


def _reduce_datum(d: DescentDatum, order: int) -> DescentDatum:
    """Push a dual-number datum down the eps-chain; reduction maps inverses to
    inverses, so a cached inverse travels along (lazily, if absent)."""
    ring = d.ring
    target = chain_quotient(ring, order)
    fn = lambda payload: chain_reduce(ring, payload, order)
    phi = d.phi.map_entries(lambda e: e.map_coefficients(fn, target))
    cached = d._phi_inv
    phi_inv = (
        cached.map_entries(lambda e: e.map_coefficients(fn, target)) if cached is not None else None
    )
    return DescentDatum(phi, d.monoid, phi_inv=phi_inv)


def _lift_matrix(m: SeriesMatrix, target: DualNumbers) -> SeriesMatrix:
    src = m.ring
    fn = lambda payload: chain_lift(src, payload, target)
    return m.map_entries(lambda e: e.map_coefficients(fn, target))


def lift_trivialization_square_zero(d: DescentDatum, xi_bar: SeriesMatrix) -> SeriesMatrix:
    """Lift a trivialization through one square-zero step of the eps-chain.

    The zero-padded lift xi0 conjugates phi into psi = id + defect with the
    defect killed by the reduction.  The defect must be an additive cocycle
    supported on the two coordinate axes with opposite slices; its t-part is
    the correction, and xi = (id + correction) * xi0.
    """
    ring = d.ring
    if not isinstance(ring, DualNumbers):
        raise NotSquareZeroStep("lifting needs dual-number coefficients")
    src = xi_bar.ring
    expected = chain_quotient(ring, ring.order - 1)
    if src != expected:
        raise NotSquareZeroStep(
            f"trivialization lives over {src.describe()}, expected {expected.describe()}"
        )
    xi0 = _lift_matrix(xi_bar, ring)
    xi0_inv = mat_invert(xi0)
    psi = mat_rename(xi0, PI2) @ d.phi @ mat_rename(xi0_inv, PI1)
    defect = psi - SeriesMatrix.identity(d.rank, ring, 2, psi.prec)
    kill = ring.order - 1
    for row in defect.entries:
        for e in row:
            for payload in e.terms.values():
                if any(not ring.base.is_zero(c) for c in payload[:kill]):
                    raise HypothesisViolated(
                        "reduced trivialization does not trivialize the reduced datum"
                    )
    residual = (
        mat_rename(defect, PI13) - mat_rename(defect, PI23) - mat_rename(defect, PI12)
    )
    if not residual.is_zero():
        raise AdditiveCocycleViolated("defect fails the additive cocycle condition", residual)
    correction_rows = []
    for row in defect.entries:
        out_row = []
        for e in row:
            t_part = {}
            u_part = {}
            for (dt, du), payload in e.terms.items():
                if dt != 0 and du != 0:
                    raise SupportSplitFailed(f"defect term at {(dt, du)} sits off the axes")
                if dt == 0 and du == 0:
                    raise SupportSplitFailed("defect has a constant term")
                if du == 0:
                    t_part[dt] = payload
                else:
                    u_part[du] = payload
            if set(t_part) != set(u_part) or any(
                u_part[k] != ring.neg(t_part[k]) for k in t_part
            ):
                raise SupportSplitFailed("t- and u-slices of the defect do not match")
            out_row.append(
                NovikovSeries(ring, 1, {(k,): v for k, v in t_part.items()}, e.prec)
            )
        correction_rows.append(out_row)
    correction = SeriesMatrix(correction_rows)
    xi = (SeriesMatrix.identity(d.rank, ring, 1, correction.prec) + correction) @ xi0
    check = verify_effectivity(d, xi)
    if not check.ok:
        raise PrecisionExhausted("lifted trivialization failed its verification")
    return xi


def descend(d: DescentDatum, lam):
    """Produce a Trivialization of the datum or a certified NotEffective verdict.

    Field coefficients go through the isocrystal trivializer; dual-number
    coefficients reduce to the residue field and lift back through the
    eps-adic chain one square-zero step at a time.
    """
    lam = Fraction(lam)
    if d.monoid is not None:
        for f in (lam, 1 / lam):
            if not d.monoid.stable_under(f):
                raise MonoidNotStable(f"{f} does not preserve {d.monoid.describe()}")
    cocycle = check_cocycle(d)
    if not cocycle.ok:
        raise CocycleViolated("input matrix fails the cocycle condition")
    ring = d.ring
    if isinstance(ring, DualNumbers):
        reduced = _reduce_datum(d, 1)
        base_result = descend(reduced, lam)
        if isinstance(base_result, NotEffective):
            return base_result
        xi = base_result.xi
        for order in range(2, ring.order + 1):
            step_datum = _reduce_datum(d, order) if order < ring.order else d
            xi = lift_trivialization_square_zero(step_datum, xi)
    else:
        iso = isocrystal_from_descent(d, lam)
        result = trivialize_isocrystal_field(iso)
        if isinstance(result, NotEffective):
            return result
        xi = result
    xi = normalize_trivialization(xi)
    check = verify_effectivity(d, xi)
    if not check.ok:
        raise PrecisionExhausted("trivialization failed the final verification")
    return Trivialization(xi, xi.prec)
