"""Descent data over two-variable series rings.

A descent datum of rank n is an invertible n x n matrix phi(t, u) whose three
pullbacks to the three-variable ring compose: phi(t, v) = phi(u, v) * phi(t, u).
Coboundaries phi(t, u) = xi(u)^-1 * xi(t) always satisfy this; the functor to
one-variable isocrystals extracts the matrix b with b(u) * phi(t, u^lam) =
phi(t, u).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import (
    MonoidNotStable,
    NotDescentDatum,
    NotInvertible,
    PrecisionExhausted,
)
from .isocrystal import Isocrystal
from .series import (
    INF,
    Monoid,
    PI1,
    PI2,
    PI12,
    PI13,
    PI23,
    frobenius,
    invert_series,
    slice_coefficient,
)
from .seriesalg import SeriesMatrix, mat_invert, mat_rename


class CheckResult(NamedTuple):
    ok: bool
    residual: SeriesMatrix


class DescentDatum:
    """Rank-n free module with gluing matrix phi over the (t, u) series ring.

    The inverse of phi is cached lazily; constructions that know the inverse
    (coboundaries, chain reductions) hand it over to avoid an elimination.
    """

    def __init__(self, phi: SeriesMatrix, monoid: Monoid, phi_inv: SeriesMatrix | None = None):
        if not phi.is_square():
            raise ValueError("descent matrix must be square")
        if phi.nvars != 2:
            raise ValueError("descent matrix must be two-variable")
        self.phi = phi
        self._phi_inv = phi_inv
        self.monoid = monoid
        self.rank = phi.rows
        self.ring = phi.ring
        self.prec = phi.prec

    @property
    def phi_inv(self) -> SeriesMatrix:
        if self._phi_inv is None:
            self._phi_inv = mat_invert(self.phi)
        return self._phi_inv

    def __repr__(self):
        return f"<descent datum rank {self.rank} over {self.ring.describe()}>"


@dataclass
class Trivialization:
    """Invertible one-variable xi with phi(t, u) = xi(u)^-1 * xi(t)."""

    xi: SeriesMatrix
    prec: object

    @property
    def rank(self):
        return self.xi.rows


def trivial_datum(n, ring, monoid: Monoid, prec=INF) -> DescentDatum:
    ident = SeriesMatrix.identity(n, ring, 2, prec)
    return DescentDatum(ident, monoid, phi_inv=ident)


def coboundary_datum(xi: SeriesMatrix, monoid: Monoid) -> DescentDatum:
    """The datum phi(t, u) = xi(u)^-1 * xi(t); its inverse comes for free."""
    if not xi.is_square():
        raise ValueError("trivializing matrix must be square")
    if xi.nvars != 1:
        raise ValueError("trivializing matrix must be one-variable")
    xi_inv = mat_invert(xi)
    phi = mat_rename(xi_inv, PI2) @ mat_rename(xi, PI1)
    phi_inv = mat_rename(xi_inv, PI1) @ mat_rename(xi, PI2)
    return DescentDatum(phi, monoid, phi_inv=phi_inv)


def check_cocycle(d: DescentDatum) -> CheckResult:
    """Compare phi(u, v) * phi(t, u) with phi(t, v) over three variables."""
    residual = mat_rename(d.phi, PI23) @ mat_rename(d.phi, PI12) - mat_rename(d.phi, PI13)
    return CheckResult(residual.is_zero(), residual)


def _t_exponents(*matrices):
    taus = set()
    for m in matrices:
        for row in m.entries:
            for entry in row:
                for key in entry.terms:
                    taus.add(key[0])
    return sorted(taus)


def isocrystal_from_descent(d: DescentDatum, lam) -> Isocrystal:
    """Extract the one-variable twist b of a descent datum.

    b is pinned by the linear identity b(u) * phi(t, u^lam) = phi(t, u),
    equivalently b = phi * F2(phi)^-1 with no t left over.  Substituting
    u -> u^(1/lam) turns this into c * phi = (inverse u-twist of phi) for
    c = b(u^(1/lam)), and slicing at each t-exponent gives overdetermined
    one-variable systems: the slice of phi at t-exponent tau is known below
    weight prec - tau, and the right-hand sides come from the one-variable
    inverse twist of those same slices, so every step has a sound cutoff.
    The systems share their coefficient matrix (one right-hand side per row
    of c) and solve by valuation-pivoted elimination; any inconsistency
    certifies that the input broke the cocycle condition.
    """
    lam = Fraction(lam)
    if d.monoid is not None and not d.monoid.stable_under(lam):
        raise MonoidNotStable(f"{lam} does not preserve {d.monoid.describe()}")
    n = d.rank
    taus = _t_exponents(d.phi)
    aug = []  # n coefficient slices of phi, then n inverse-twisted right-hand slices
    for tau in taus:  # ascending tau = descending slice precision
        slices = [[slice_coefficient(d.phi.entries[k][j], 0, tau) for j in range(n)] for k in range(n)]
        for j in range(n):
            coeff_row = [slices[k][j] for k in range(n)]
            rhs_row = [frobenius(slices[i][j], lam, "inverse") for i in range(n)]
            if all(c.is_zero() for c in coeff_row):
                if any(not r.is_zero() for r in rhs_row):
                    raise NotDescentDatum(
                        f"t-slice at {tau} of column {j} is inconsistent; "
                        "the cocycle condition must be broken"
                    )
                continue
            aug.append(coeff_row + rhs_row)
    pivots = {}
    used = set()
    for col in range(n):
        cands = sorted(
            (aug[r][col].wmin(), r) for r in range(len(aug)) if r not in used and aug[r][col].terms
        )
        pivot_inv = None
        for _, r in cands:
            try:
                pivot_inv = invert_series(aug[r][col])
                piv = r
                break
            except (NotInvertible, PrecisionExhausted):
                continue
        if pivot_inv is None:
            raise PrecisionExhausted(
                f"cannot isolate twist column {col} at the working precision"
            )
        used.add(piv)
        pivots[col] = piv
        prow = [e * pivot_inv for e in aug[piv]]
        aug[piv] = prow
        for r in range(len(aug)):
            if r == piv:
                continue
            f = aug[r][col]
            if f.terms:
                aug[r] = [a - f * b for a, b in zip(aug[r], prow)]
    for r in range(len(aug)):
        if r not in used and any(aug[r][n + i].terms for i in range(n)):
            raise NotDescentDatum(
                "twist system is inconsistent; the cocycle condition must be broken"
            )
    b = SeriesMatrix(
        [[frobenius(aug[pivots[k]][n + i], lam) for k in range(n)] for i in range(n)]
    )
    return Isocrystal(b, lam, d.monoid)


def check_hom_descent(f: SeriesMatrix, d_src: DescentDatum, d_tgt: DescentDatum) -> bool:
    """Is f compatible with the data: f(u) * phi_src = phi_tgt * f(t)?"""
    if f.cols != d_src.rank or f.rows != d_tgt.rank:
        raise ValueError("morphism shape does not match the data")
    lhs = mat_rename(f, PI2) @ d_src.phi
    rhs = d_tgt.phi @ mat_rename(f, PI1)
    return (lhs - rhs).is_zero()
