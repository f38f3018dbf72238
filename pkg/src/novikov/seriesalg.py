"""Linear algebra over Novikov series: matrix arithmetic, valuation-pivoted
Gauss-Jordan elimination, determinants, and minimal-dependence search."""

from __future__ import annotations

from .errors import ArityMismatch, NotAField, NotInvertible, PrecisionExhausted, RingMismatch
from .series import (
    INF,
    NovikovSeries,
    frobenius,
    invert_series,
    one_series,
    rename_vars,
    zero_series,
)


class SeriesMatrix:
    """Rectangular matrix of series sharing ring, arity and working precision.

    The working precision is the minimum entry precision; entries are
    truncated to it on construction.
    """

    __slots__ = ("rows", "cols", "entries", "ring", "nvars", "prec")

    def __init__(self, entries):
        rows = len(entries)
        if rows == 0 or any(len(r) == 0 for r in entries):
            raise ValueError("matrix needs at least one row and column")
        cols = len(entries[0])
        if any(len(r) != cols for r in entries):
            raise ValueError("ragged rows")
        first = entries[0][0]
        for row in entries:
            for e in row:
                if e.ring != first.ring:
                    raise RingMismatch("mixed coefficient rings in one matrix")
                if e.nvars != first.nvars:
                    raise ArityMismatch("mixed arities in one matrix")
        prec = min(e.prec for row in entries for e in row)
        self.rows = rows
        self.cols = cols
        self.ring = first.ring
        self.nvars = first.nvars
        self.prec = prec
        self.entries = [[e.truncate(prec) for e in row] for row in entries]

    @classmethod
    def identity(cls, n, ring, nvars=1, prec=INF):
        one = one_series(ring, nvars, prec)
        zero = zero_series(ring, nvars, prec)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows, cols, ring, nvars=1, prec=INF):
        zero = zero_series(ring, nvars, prec)
        return cls([[zero for _ in range(cols)] for _ in range(rows)])

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def column(self, j):
        return [self.entries[i][j] for i in range(self.rows)]

    def map_entries(self, fn):
        return SeriesMatrix([[fn(e) for e in row] for row in self.entries])

    def __add__(self, other):
        self._shape_check(other)
        return SeriesMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        self._shape_check(other)
        return SeriesMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __neg__(self):
        return self.map_entries(lambda e: -e)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = self.entries[i][0] * other.entries[0][j]
                for k in range(1, self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def scale(self, coeff):
        return self.map_entries(lambda e: e.scale(coeff))

    def is_zero(self):
        return all(e.is_zero() for row in self.entries for e in row)

    def is_square(self):
        return self.rows == self.cols

    def _shape_check(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and self.entries == other.entries

    __hash__ = None

    def __repr__(self):
        return f"<{self.rows}x{self.cols} matrix over {self.ring.describe()} | prec {self.prec}>"


def mat_rename(m: SeriesMatrix, vmap) -> SeriesMatrix:
    return m.map_entries(lambda e: rename_vars(e, vmap))


def mat_frobenius(m: SeriesMatrix, lam, direction="forward", variables=None) -> SeriesMatrix:
    return m.map_entries(lambda e: frobenius(e, lam, direction, variables))


def mat_vec(m: SeriesMatrix, vec):
    if m.cols != len(vec):
        raise ValueError("vector length mismatch")
    out = []
    for i in range(m.rows):
        acc = m.entries[i][0] * vec[0]
        for k in range(1, m.cols):
            acc = acc + m.entries[i][k] * vec[k]
        out.append(acc)
    return out


def mat_det(m: SeriesMatrix) -> NovikovSeries:
    """Determinant by cofactor expansion; matrices here are small."""
    if not m.is_square():
        raise ValueError("determinant of a non-square matrix")
    ent = m.entries

    def det(rows, cols):
        if len(cols) == 1:
            return ent[rows[0]][cols[0]]
        acc = None
        for idx, c in enumerate(cols):
            minor = det(rows[1:], cols[:idx] + cols[idx + 1 :])
            term = ent[rows[0]][c] * minor
            if idx % 2 == 1:
                term = -term
            acc = term if acc is None else acc + term
        return acc

    return det(tuple(range(m.rows)), tuple(range(m.cols)))


def mat_adjugate(m: SeriesMatrix) -> SeriesMatrix:
    """Adjugate matrix (transposed cofactors): m @ adj(m) = det(m) * I, exactly."""
    if not m.is_square():
        raise ValueError("adjugate of a non-square matrix")
    n = m.rows
    if n == 1:
        return SeriesMatrix([[one_series(m.ring, m.nvars, m.prec)]])
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            rows = [r for r in range(n) if r != j]
            cols = [c for c in range(n) if c != i]
            minor = SeriesMatrix([[m.entries[r][c] for c in cols] for r in rows])
            cof = mat_det(minor)
            if (i + j) % 2 == 1:
                cof = -cof
            out[i][j] = cof
    return SeriesMatrix(out)


def _pick_pivot(rows_entries, eligible, col):
    """Candidate pivots ordered by (wmin, row index); first invertible wins."""
    cands = sorted(
        (rows_entries[r][col].wmin(), r) for r in eligible if rows_entries[r][col].terms
    )
    for _, r in cands:
        try:
            return r, invert_series(rows_entries[r][col])
        except (NotInvertible, PrecisionExhausted):
            continue
    return None, None


def mat_invert(m: SeriesMatrix) -> SeriesMatrix:
    """Gauss-Jordan inverse with valuation-greedy pivoting.

    Pivots are the candidate entries of least minimal weight (ties broken by
    the lowest row index); each pivot goes through invert_series.
    """
    if not m.is_square():
        raise NotInvertible("only square matrices can be inverted")
    n = m.rows
    ident = SeriesMatrix.identity(n, m.ring, m.nvars, m.prec)
    aug = [list(m.entries[i]) + list(ident.entries[i]) for i in range(n)]
    for col in range(n):
        r, pivot_inv = _pick_pivot(aug, range(col, n), col)
        if r is None:
            raise NotInvertible(f"no usable pivot in column {col}")
        aug[col], aug[r] = aug[r], aug[col]
        prow = [e * pivot_inv for e in aug[col]]
        aug[col] = prow
        for r2 in range(n):
            if r2 == col:
                continue
            f = aug[r2][col]
            if f.terms:
                aug[r2] = [a - f * b for a, b in zip(aug[r2], prow)]
    return SeriesMatrix([row[n:] for row in aug])


def solve_linear(m: SeriesMatrix, b):
    """Solve m @ x = b for a column (given as a list of series)."""
    inv = mat_invert(m)
    return mat_vec(inv, list(b))


def minimal_dependence(vectors):
    """Least n with vectors[n] in the span of vectors[:n], over a field.

    Returns (n, coefficients) where vectors[n] = sum(coeffs[i] * vectors[i])
    up to the working precision, or None when the whole list is independent.
    """
    if not vectors:
        return None
    ring = vectors[0][0].ring
    if not ring.is_field:
        raise NotAField("dependence search needs field coefficients")
    height = len(vectors[0])
    if any(len(v) != height for v in vectors):
        raise ValueError("columns of mixed height")
    nvars = vectors[0][0].nvars
    if all(e.is_zero() for e in vectors[0]):
        return 0, []
    prec_w = min(e.prec for v in vectors for e in v)
    zero = zero_series(ring, nvars, prec_w)
    for n in range(1, len(vectors)):
        aug = [[vectors[j][i] for j in range(n)] + [vectors[n][i]] for i in range(height)]
        used = set()
        pivots = {}
        for col in range(n):
            r, pivot_inv = _pick_pivot(aug, (r for r in range(height) if r not in used), col)
            if r is None:
                continue  # free column
            used.add(r)
            pivots[col] = r
            prow = [e * pivot_inv for e in aug[r]]
            aug[r] = prow
            for r2 in range(height):
                if r2 == r:
                    continue
                f = aug[r2][col]
                if f.terms:
                    aug[r2] = [a - f * b for a, b in zip(aug[r2], prow)]
        if any(aug[r][n].terms for r in range(height) if r not in used):
            continue  # residual certifies independence at working precision
        coeffs = [aug[pivots[col]][n] if col in pivots else zero for col in range(n)]
        return n, coeffs
    return None
