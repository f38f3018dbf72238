"""Novikov isocrystals and their structure theory.

An isocrystal of rank n is an invertible one-variable series matrix b acting
semilinearly on columns: v -> b * F(v), where F scales exponents by a fixed
rational lam > 1.  The solvers below produce the slope filtration and, when
every slope is 1, a trivializing basis change.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import RingElement
from .errors import (
    EigenvalueNotInField,
    HypothesisViolated,
    MonoidNotStable,
    NotAField,
    NotInvertible,
    PrecisionExhausted,
    ZeroSeed,
)
from .coeff import roots_in_field
from .series import (
    INF,
    Monoid,
    NovikovSeries,
    Unsolvable,
    frobenius,
    invert_series,
    one_series,
    solve_additive_twist,
    zero_series,
)
from .seriesalg import SeriesMatrix, mat_frobenius, mat_invert, mat_vec

_MAX_LIMIT_STEPS = 10000


def _frac(x):
    return Fraction(x)


class Isocrystal:
    """A rank-n module together with the semilinear action v -> b * F(v)."""

    def __init__(self, b: SeriesMatrix, lam, monoid: Monoid):
        if not b.is_square():
            raise ValueError("isocrystal matrix must be square")
        if b.nvars != 1:
            raise ValueError("isocrystal matrix must be one-variable")
        lam = _frac(lam)
        if lam <= 1:
            raise ValueError("twist factor must exceed 1")
        self.b = b
        self.b_inv = mat_invert(b)  # invertibility is part of the contract
        self.lam = lam
        self.monoid = monoid
        self.rank = b.rows
        self.ring = b.ring
        self.prec = b.prec

    def basis_column(self, i):
        one = one_series(self.ring, 1, self.prec)
        zero = zero_series(self.ring, 1, self.prec)
        return [one if j == i else zero for j in range(self.rank)]

    def __repr__(self):
        return f"<isocrystal rank {self.rank}, lam {self.lam}, over {self.ring.describe()}>"


@dataclass
class Filtration:
    """Basis change p with p^-1 * b * F(p) upper triangular, constant diagonal."""

    p: SeriesMatrix
    slopes: list  # RingElements, one per rank


@dataclass(frozen=True)
class SlopeNotOne:
    index: int
    value: RingElement


@dataclass(frozen=True)
class ObstructedOrbit:
    row: int | None
    col: int | None
    orbit: tuple
    total: RingElement


@dataclass(frozen=True)
class NotEffective:
    """Certified obstruction to trivializing an isocrystal or descent datum."""

    reason: object  # SlopeNotOne | ObstructedOrbit


def apply_semilinear(iso: Isocrystal, v, k=1):
    """k-fold application of v -> b * F(v); negative k runs the inverse map."""
    lam = iso.lam
    if k >= 0:
        if iso.monoid is not None and not iso.monoid.stable_under(lam):
            raise MonoidNotStable(f"{lam} does not preserve {iso.monoid.describe()}")
        for _ in range(k):
            v = mat_vec(iso.b, [frobenius(c, lam) for c in v])
    else:
        if iso.monoid is not None and not iso.monoid.stable_under(1 / lam):
            raise MonoidNotStable(f"1/{lam} does not preserve {iso.monoid.describe()}")
        for _ in range(-k):
            v = [frobenius(c, lam, "inverse") for c in mat_vec(iso.b_inv, v)]
    return v


def find_eigenvector(iso: Isocrystal, seed=None):
    """An eigenpair (c, m) with b * F(m) = c * m, c a unit of the base field.

    Follows the cyclic-vector construction: find the minimal semilinear
    dependence of the seed iterates, rescale by a power of t so the relation
    coefficients sit at weight >= 0 with a unit somewhere, solve the residue
    polynomial for c, then contract to the fixed point of the associated
    operator and back-substitute.
    """
    from .seriesalg import minimal_dependence

    ring = iso.ring
    if not ring.is_field:
        raise NotAField("eigenvector search needs field coefficients")
    if iso.monoid is not None and not iso.monoid.stable_under(iso.lam):
        raise MonoidNotStable(f"{iso.lam} does not preserve {iso.monoid.describe()}")
    if seed is None:
        seed = iso.basis_column(0)
    if all(e.is_zero() for e in seed):
        raise ZeroSeed("eigenvector search needs a nonzero seed")
    lam = iso.lam

    iterates = [list(seed)]
    for _ in range(iso.rank):
        iterates.append(mat_vec(iso.b, [frobenius(c, lam) for c in iterates[-1]]))
    dep = minimal_dependence(iterates)
    if dep is None:
        raise PrecisionExhausted("no dependence among iterates at working precision")
    n, coeffs = dep
    if n == 0:
        raise ZeroSeed("eigenvector search needs a nonzero seed")

    lam_pows = [lam**i for i in range(n + 1)]
    constraints = [
        Fraction(-coeffs[i].wmin()) / (lam_pows[n] - lam_pows[i])
        for i in range(n)
        if coeffs[i].terms
    ]
    if not constraints:
        raise PrecisionExhausted("dependence relation vanished at working precision")
    r = max(constraints)
    shifted = [coeffs[i].mul_monomial(r * (lam_pows[n] - lam_pows[i])) for i in range(n)]
    residues = [RingElement(ring, a.coefficient((0,))) for a in shifted]
    roots = roots_in_field(residues, expect_nonzero=True)
    if not roots:
        raise EigenvalueNotInField(
            f"residue polynomial has no nonzero root in {ring.describe()}"
        )
    c = sorted(root.value for root in roots)[0]

    # fixed point of g(b) = sum_i c^(i-n) F^(n-i)(b) F^(n-1-i)(a_i)
    c_inv = ring.inv(c)
    weights = []
    for i in range(n):
        factor = ring.one
        for _ in range(n - i):
            factor = ring.mul(factor, c_inv)
        a_twisted = shifted[i]
        for _ in range(n - 1 - i):
            a_twisted = frobenius(a_twisted, lam)
        weights.append((n - i, a_twisted.scale(factor)))

    def g(x):
        acc = None
        for steps, a in weights:
            y = x
            for _ in range(steps):
                y = frobenius(y, lam)
            term = y * a
            acc = term if acc is None else acc + term
        return acc

    b_fix = one_series(ring, 1, iso.prec)
    for _ in range(_MAX_LIMIT_STEPS):
        nxt = g(b_fix).truncate(iso.prec)
        if (nxt - b_fix).is_zero():
            b_fix = nxt
            break
        b_fix = nxt
    else:
        raise PrecisionExhausted("fixed-point iteration did not stabilize")

    coords = [None] * n
    coords[n - 1] = b_fix
    fb = frobenius(b_fix, lam)
    if n > 1:
        coords[0] = (fb * shifted[0]).scale(c_inv)
        for j in range(1, n - 1):
            coords[j] = (frobenius(coords[j - 1], lam) + fb * shifted[j]).scale(c_inv)
    vec = None
    for j in range(n):
        piece = [coords[j].mul_monomial(r * lam_pows[j]) * comp for comp in iterates[j]]
        vec = piece if vec is None else [a + b for a, b in zip(vec, piece)]
    if all(e.is_zero() for e in vec):
        raise PrecisionExhausted("eigenvector vanished at working precision")
    return RingElement(ring, c), vec


def _extend_to_basis(w, ring, prec):
    """Complete a column to a square matrix whose determinant is that column's
    dominant entry (column first, then the complementary standard vectors)."""
    q = len(w)
    cands = sorted((w[i].wmin(), i) for i in range(q) if w[i].terms)
    pivot = None
    for _, i in cands:
        try:
            invert_series(w[i])
            pivot = i
            break
        except (NotInvertible, PrecisionExhausted):
            continue
    if pivot is None:
        raise PrecisionExhausted("eigenvector has no invertible coordinate")
    one = one_series(ring, 1, prec)
    zero = zero_series(ring, 1, prec)
    cols = [list(w)]
    for j in range(q):
        if j == pivot:
            continue
        cols.append([one if i == j else zero for i in range(q)])
    return SeriesMatrix([[cols[j][i] for j in range(q)] for i in range(q)])


def dm_filtration(iso: Isocrystal) -> Filtration:
    """Iterated eigenvector extraction on successive quotients.

    Produces p and constants (c_1, ..., c_n) with p^-1 * b * F(p) upper
    triangular and constant diagonal.
    """
    ring = iso.ring
    if not ring.is_field:
        raise NotAField("slope filtration needs field coefficients")
    n = iso.rank
    lam = iso.lam
    p_total = SeriesMatrix.identity(n, ring, 1, iso.prec)
    current = iso.b
    slopes = []
    for k in range(n):
        q = n - k
        block = SeriesMatrix([[current.entries[k + i][k + j] for j in range(q)] for i in range(q)])
        sub = Isocrystal(block, lam, iso.monoid)
        c, w = find_eigenvector(sub)
        slopes.append(c)
        t_block = _extend_to_basis(w, ring, block.prec)
        step_entries = []
        for i in range(n):
            row = []
            for j in range(n):
                if i < k or j < k:
                    row.append(
                        one_series(ring, 1, current.prec)
                        if i == j
                        else zero_series(ring, 1, current.prec)
                    )
                else:
                    row.append(t_block.entries[i - k][j - k])
            step_entries.append(row)
        step = SeriesMatrix(step_entries)
        current = mat_invert(step) @ current @ mat_frobenius(step, lam)
        p_total = p_total @ step
        for i in range(k + 1, n):
            if current.entries[i][k].terms:
                raise PrecisionExhausted("filtration step left residue below the diagonal")
        diag = current.entries[k][k]
        if not diag.is_constant():
            raise PrecisionExhausted("filtration step left a non-constant diagonal")
    return Filtration(p_total, slopes)


def trivialize_unipotent_lattice(iso: Isocrystal) -> SeriesMatrix:
    """Limit-iteration trivializer for b = I + (terms of positive weight).

    Iterates v -> b * F(v) on each basis vector until stable below the cutoff,
    assembles the fixed columns into p, and returns p^-1."""
    ring = iso.ring
    n = iso.rank
    lam = iso.lam
    ident = SeriesMatrix.identity(n, ring, 1, iso.prec)
    gap = iso.b - ident
    for row in gap.entries:
        for e in row:
            if e.wmin() <= 0:
                raise HypothesisViolated(
                    "matrix minus identity must have strictly positive minimal weight"
                )
    cols = []
    for i in range(n):
        v = iso.basis_column(i)
        for _ in range(_MAX_LIMIT_STEPS):
            nxt = mat_vec(iso.b, [frobenius(c, lam) for c in v])
            nxt = [e.truncate(iso.prec) for e in nxt]
            if all((a - b).is_zero() for a, b in zip(nxt, v)):
                v = nxt
                break
            v = nxt
        else:
            raise PrecisionExhausted("limit iteration did not stabilize")
        cols.append(v)
    p = SeriesMatrix([[cols[j][i] for j in range(n)] for i in range(n)])
    xi = mat_invert(p)
    _verify_trivialization(xi, iso)
    return xi


def _verify_trivialization(xi: SeriesMatrix, iso: Isocrystal):
    """Independent check that xi * b * F(xi)^-1 = I up to precision."""
    product = xi @ iso.b @ mat_invert(mat_frobenius(xi, iso.lam))
    residual = product - SeriesMatrix.identity(iso.rank, iso.ring, 1, product.prec)
    if not residual.is_zero():
        raise PrecisionExhausted("trivialization failed its verification product")


def trivialize_isocrystal_field(iso: Isocrystal):
    """Full field-case trivializer: slope filtration, slope test, then
    column-by-column additive twist solves.  Returns xi with
    xi * b * F(xi)^-1 = I, or a NotEffective verdict."""
    ring = iso.ring
    if not ring.is_field:
        raise NotAField("field-case trivializer needs field coefficients")
    lam = iso.lam
    if iso.monoid is not None:
        for f in (lam, 1 / lam):
            if not iso.monoid.stable_under(f):
                raise MonoidNotStable(f"{f} does not preserve {iso.monoid.describe()}")
    filt = dm_filtration(iso)
    for idx, c in enumerate(filt.slopes):
        if c.value != ring.one:
            return NotEffective(SlopeNotOne(idx, c))
    n = iso.rank
    xi = mat_invert(filt.p)
    current = xi @ iso.b @ mat_frobenius(filt.p, lam)
    for col in range(1, n):
        solved = []
        for row in range(col):
            corner = current.entries[row][col]
            if corner.is_zero():
                solved.append(zero_series(ring, 1, corner.prec))
                continue
            z = solve_additive_twist(-corner, lam)
            if isinstance(z, Unsolvable):
                return NotEffective(ObstructedOrbit(row, col, z.orbit, z.total))
            solved.append(z)
        step_rows = []
        fstep_rows = []
        for i in range(n):
            row = []
            frow = []
            for j in range(n):
                if i == j:
                    row.append(one_series(ring, 1, current.prec))
                    frow.append(one_series(ring, 1, current.prec))
                elif j == col and i < col:
                    row.append(solved[i])
                    frow.append(-frobenius(solved[i], lam))
                else:
                    row.append(zero_series(ring, 1, current.prec))
                    frow.append(zero_series(ring, 1, current.prec))
            step_rows.append(row)
            fstep_rows.append(frow)
        step = SeriesMatrix(step_rows)
        f_step_inv = SeriesMatrix(fstep_rows)  # inverse of F(step): the block squares to zero
        current = step @ current @ f_step_inv
        xi = step @ xi
    _verify_trivialization(xi, iso)
    return xi
