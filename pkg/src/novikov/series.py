"""Sparse exact series with rational exponents in one, two, or three variables.

A series is a finite map from exponent vectors to nonzero coefficient
payloads together with a cutoff ``prec``: the element is known modulo terms
whose total weight (the sum of the exponents) is >= prec.  All arithmetic is
exact on stored terms; precision propagation is conservative and never
fabricates terms past the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf as INF

from .coeff import RingElement
from .errors import (
    ArityMismatch,
    MonoidNotStable,
    NotAField,
    NotInvertible,
    PrecisionExhausted,
    RingMismatch,
)

_VAR_NAMES = "tuv"


def _frac(x):
    if isinstance(x, float):
        raise TypeError("floating point exponents are not allowed")
    return Fraction(x)


def _coerce_prec(prec):
    return INF if prec == INF else _frac(prec)


@dataclass(frozen=True)
class Monoid:
    """Exponent monoid: the integers, Z[1/p], or all of Q."""

    kind: str  # "z" | "zp" | "q"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("z", "zp", "q"):
            raise ValueError(f"unknown monoid kind {self.kind!r}")
        if self.kind == "zp" and (self.p is None or self.p < 2):
            raise ValueError("zp monoid needs an inverted integer >= 2")

    def contains(self, e) -> bool:
        e = _frac(e)
        if self.kind == "q":
            return True
        if self.kind == "z":
            return e.denominator == 1
        d = e.denominator
        while d % self.p == 0:
            d //= self.p
        return d == 1

    def stable_under(self, factor) -> bool:
        # Z, Z[1/p] and Q are subrings of Q, so c*G <= G iff c is in G.
        return self.contains(factor)

    def describe(self) -> str:
        if self.kind == "zp":
            return f"zp {self.p}"
        return self.kind


MONOID_Z = Monoid("z")
MONOID_Q = Monoid("q")


def monoid_zp(p: int) -> Monoid:
    return Monoid("zp", p)


@dataclass(frozen=True)
class VarMap:
    """Injective variable embedding between series rings of different arity."""

    source: int
    target: int
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.source or len(set(self.images)) != self.source:
            raise ArityMismatch("variable images must be distinct, one per source variable")
        if any(not 0 <= i < self.target for i in self.images):
            raise ArityMismatch("variable image out of range")

    def then(self, outer: "VarMap") -> "VarMap":
        if self.target != outer.source:
            raise ArityMismatch("variable maps do not compose")
        return VarMap(self.source, outer.target, tuple(outer.images[i] for i in self.images))


PI1 = VarMap(1, 2, (0,))
PI2 = VarMap(1, 2, (1,))
PI12 = VarMap(2, 3, (0, 1))
PI13 = VarMap(2, 3, (0, 2))
PI23 = VarMap(2, 3, (1, 2))
RHO1 = PI1.then(PI12)
RHO2 = PI2.then(PI12)
RHO3 = PI2.then(PI13)


class NovikovSeries:
    """Truncated sparse series. Construct through make_series or the helpers below."""

    __slots__ = ("ring", "nvars", "prec", "terms", "_sorted")

    def __init__(self, ring, nvars, terms, prec):
        # assumes canonical input: nonzero coefficients, weights < prec
        self.ring = ring
        self.nvars = nvars
        self.terms = terms
        self.prec = prec
        self._sorted = None

    # -- basic views ---------------------------------------------------

    def sorted_terms(self):
        """Stored terms as (weight, key, payload), ascending in (weight, key)."""
        if self._sorted is None:
            items = [(sum(k), k, c) for k, c in self.terms.items()]
            items.sort(key=lambda t: (t[0], t[1]))
            self._sorted = items
        return self._sorted

    def support(self):
        return set(self.terms)

    def wmin(self):
        """Least total weight of the support, or the precision when empty."""
        if not self.terms:
            return self.prec
        return self.sorted_terms()[0][0]

    def is_zero(self):
        return not self.terms

    def coefficient(self, key):
        key = tuple(_frac(e) for e in key)
        return self.terms.get(key, self.ring.zero)

    def constant_term(self):
        return self.coefficient((0,) * self.nvars)

    def is_constant(self):
        return all(all(e == 0 for e in k) for k in self.terms)

    def truncate(self, prec):
        prec = _coerce_prec(prec)
        if prec >= self.prec:
            return self
        kept = {k: c for k, c in self.terms.items() if sum(k) < prec}
        return NovikovSeries(self.ring, self.nvars, kept, prec)

    def _compat(self, other):
        if not isinstance(other, NovikovSeries):
            raise TypeError(f"expected a series, got {other!r}")
        if self.nvars != other.nvars:
            raise ArityMismatch(f"{self.nvars} variables vs {other.nvars}")
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring.describe()} vs {other.ring.describe()}")

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        self._compat(other)
        ring = self.ring
        prec = min(self.prec, other.prec)
        out = dict(self.terms)
        for k, c in other.terms.items():
            prev = out.get(k)
            if prev is None:
                out[k] = c
            else:
                s = ring.add(prev, c)
                if ring.is_zero(s):
                    del out[k]
                else:
                    out[k] = s
        if prec < self.prec or prec < other.prec:
            out = {k: c for k, c in out.items() if sum(k) < prec}
        return NovikovSeries(ring, self.nvars, out, prec)

    def __neg__(self):
        ring = self.ring
        return NovikovSeries(ring, self.nvars, {k: ring.neg(c) for k, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._compat(other)
        ring = self.ring
        prec = min(self.prec + other.wmin(), other.prec + self.wmin(), self.prec + other.prec)
        if not self.terms or not other.terms:
            return NovikovSeries(ring, self.nvars, {}, prec)
        xs = self.sorted_terms()
        ys = other.sorted_terms()
        y0 = ys[0][0]
        add, mul = ring.add, ring.mul
        out = {}
        for wx, kx, cx in xs:
            if wx + y0 >= prec:
                break
            for wy, ky, cy in ys:
                if wx + wy >= prec:
                    break
                k = tuple(a + b for a, b in zip(kx, ky))
                v = mul(cx, cy)
                prev = out.get(k)
                out[k] = v if prev is None else add(prev, v)
        out = {k: c for k, c in out.items() if not ring.is_zero(c)}
        return NovikovSeries(ring, self.nvars, out, prec)

    def scale(self, coeff):
        """Multiply by a constant from the coefficient ring (exact, keeps prec)."""
        ring = self.ring
        c = ring.coerce(coeff)
        if ring.is_zero(c):
            return NovikovSeries(ring, self.nvars, {}, self.prec)
        out = {}
        for k, v in self.terms.items():
            p = ring.mul(v, c)
            if not ring.is_zero(p):
                out[k] = p
        return NovikovSeries(ring, self.nvars, out, self.prec)

    def mul_monomial(self, exps, coeff=1):
        """Multiply by coeff * t^exps, an exact monomial."""
        ring = self.ring
        if not isinstance(exps, tuple):
            exps = (exps,)
        if len(exps) != self.nvars:
            raise ArityMismatch("monomial arity mismatch")
        exps = tuple(_frac(e) for e in exps)
        c = ring.coerce(coeff)
        w = sum(exps)
        out = {}
        for k, v in self.terms.items():
            p = ring.mul(v, c)
            if not ring.is_zero(p):
                out[tuple(a + b for a, b in zip(k, exps))] = p
        return NovikovSeries(ring, self.nvars, out, self.prec + w)

    def map_coefficients(self, fn, new_ring):
        """Apply a coefficient map (e.g. a ring homomorphism); drops new zeros."""
        out = {}
        for k, v in self.terms.items():
            c = fn(v)
            if not new_ring.is_zero(c):
                out[k] = c
        return NovikovSeries(new_ring, self.nvars, out, self.prec)

    # -- comparisons ------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.nvars == other.nvars
            and self.prec == other.prec
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for _, k, c in self.sorted_terms():
                monos = "*".join(
                    _VAR_NAMES[i] if e == 1 else f"{_VAR_NAMES[i]}^({e})"
                    for i, e in enumerate(k)
                    if e != 0
                )
                parts.append(f"{c!r}*{monos}" if monos else f"{c!r}")
            body = " + ".join(parts)
        return f"<{body} | prec {self.prec}>"


# -- constructors ----------------------------------------------------------


def make_series(nvars, ring, terms, prec=INF):
    """Canonicalizing constructor: merges duplicate keys, drops zeros and
    terms at weight >= prec."""
    if nvars not in (1, 2, 3):
        raise ArityMismatch(f"series take 1, 2 or 3 variables, not {nvars}")
    prec = _coerce_prec(prec)
    acc = {}
    for exps, coeff in terms:
        if not isinstance(exps, tuple):
            exps = (exps,)
        if len(exps) != nvars:
            raise ArityMismatch(f"exponent vector {exps} has wrong arity for {nvars} variables")
        key = tuple(_frac(e) for e in exps)
        c = ring.coerce(coeff)
        prev = acc.get(key)
        acc[key] = c if prev is None else ring.add(prev, c)
    cleaned = {k: c for k, c in acc.items() if not ring.is_zero(c) and sum(k) < prec}
    return NovikovSeries(ring, nvars, cleaned, prec)


def zero_series(ring, nvars=1, prec=INF):
    return NovikovSeries(ring, nvars, {}, _coerce_prec(prec))


def constant_series(ring, coeff, nvars=1, prec=INF):
    return make_series(nvars, ring, [((0,) * nvars, coeff)], prec)


def one_series(ring, nvars=1, prec=INF):
    return constant_series(ring, ring.one, nvars, prec)


def monomial(ring, exps, coeff=1, prec=INF):
    if not isinstance(exps, tuple):
        exps = (exps,)
    return make_series(len(exps), ring, [(exps, coeff)], prec)


# -- support and valuation ---------------------------------------------------


def valuation_and_support(x: NovikovSeries):
    """(support set, least total weight); the weight falls back to prec when empty."""
    return x.support(), x.wmin()


def support_in_monoid(x: NovikovSeries, monoid: Monoid) -> bool:
    return all(monoid.contains(e) for k in x.terms for e in k)


# -- structure maps -----------------------------------------------------------


def frobenius(x, lam, direction="forward", variables=None, monoid=None):
    """Scale designated exponents by lam (forward) or 1/lam (inverse).

    Defaults to every variable for one-variable series and to the last
    variable otherwise (the mixed twist used on pullbacks).
    """
    lam = _frac(lam)
    if lam <= 1:
        raise ValueError("twist factor must exceed 1")
    factor = lam if direction == "forward" else 1 / lam
    if monoid is not None and not monoid.stable_under(factor):
        raise MonoidNotStable(
            f"{factor} * ({monoid.describe()}) is not contained in ({monoid.describe()})"
        )
    if variables is None:
        variables = (0,) if x.nvars == 1 else (x.nvars - 1,)
    vs = set(variables)
    if any(not 0 <= i < x.nvars for i in vs):
        raise ArityMismatch("scaled variable out of range")
    full = vs == set(range(x.nvars))
    prec = x.prec * factor if full else x.prec
    out = {}
    for k, c in x.terms.items():
        nk = tuple(e * factor if i in vs else e for i, e in enumerate(k))
        out[nk] = c
    if not full:
        out = {k: c for k, c in out.items() if sum(k) < prec}
    return NovikovSeries(x.ring, x.nvars, out, prec)


def rename_vars(x, vmap: VarMap):
    """Embed a series along an injective variable map (a ring homomorphism)."""
    if x.nvars != vmap.source:
        raise ArityMismatch(f"map expects {vmap.source} variables, series has {x.nvars}")
    zero = Fraction(0)
    out = {}
    for k, c in x.terms.items():
        nk = [zero] * vmap.target
        for i, img in enumerate(vmap.images):
            nk[img] = k[i]
        out[tuple(nk)] = c
    return NovikovSeries(x.ring, vmap.target, out, x.prec)


def slice_coefficient(x, var_index, value):
    """Collect terms whose var_index exponent equals value, deleting that variable."""
    if x.nvars < 2:
        raise ArityMismatch("need at least two variables to slice")
    if not 0 <= var_index < x.nvars:
        raise ArityMismatch("slice variable out of range")
    value = _frac(value)
    out = {}
    for k, c in x.terms.items():
        if k[var_index] == value:
            out[k[:var_index] + k[var_index + 1 :]] = c
    return NovikovSeries(x.ring, x.nvars - 1, out, x.prec - value)


# -- inversion -----------------------------------------------------------------


def _invert_one_var(x, e0, a0, out_prec):
    """Coefficient recurrence for 1/x in one variable: walk the exponent grid
    upward, each coefficient cancelling the convolution below it."""
    ring = x.ring
    a0_inv = ring.inv(a0)
    tail = []
    lcm = 1
    for _, k, c in x.sorted_terms()[1:]:
        s = k[0] - e0  # > 0 by dominance
        tail.append((s, ring.mul(a0_inv, c)))
        lcm = lcm * s.denominator // gcd(lcm, s.denominator)
    acc = {Fraction(0): ring.one}
    bound = out_prec + e0
    k = 1
    while Fraction(k, lcm) < bound:
        w = Fraction(k, lcm)
        v = ring.zero
        for s, c in tail:
            prev = acc.get(w - s)
            if prev is not None:
                v = ring.add(v, ring.mul(c, prev))
        if not ring.is_zero(v):
            acc[w] = ring.neg(v)
        k += 1
    terms = {}
    for w, v in acc.items():
        if w - e0 < out_prec:
            terms[(w - e0,)] = ring.mul(v, a0_inv)
    return NovikovSeries(ring, 1, terms, out_prec)


def invert_series(x: NovikovSeries):
    """Invert a series with a unique minimal-weight term whose coefficient is a
    unit (the dominant monomial condition).  Output precision is prec - 2*wmin."""
    ring = x.ring
    if not x.terms:
        raise NotInvertible("the zero series is not invertible")
    items = x.sorted_terms()
    w = items[0][0]
    if len(items) > 1 and items[1][0] == w:
        raise NotInvertible("no unique support point of minimal total weight")
    key, coeff = items[0][1], items[0][2]
    if not ring.is_unit(coeff):
        raise NotInvertible("dominant coefficient is not a unit")
    if x.prec <= w:
        raise PrecisionExhausted(f"precision {x.prec} cannot see past the dominant weight {w}")
    out_prec = x.prec - 2 * w
    lead_inv = monomial(ring, tuple(-e for e in key), ring.inv(coeff))
    if len(items) == 1:
        return lead_inv.truncate(out_prec)
    if x.nvars == 1 and out_prec != INF:
        return _invert_one_var(x, key[0], coeff, out_prec)
    rest = x * lead_inv - one_series(ring, x.nvars)  # wmin > 0 by dominance
    if rest.is_zero():
        return lead_inv.truncate(out_prec)
    if out_prec == INF and any(not ring.is_nilpotent(c) for c in rest.terms.values()):
        raise PrecisionExhausted(
            "inverse of a non-monomial series has unbounded support; a finite cutoff is required"
        )
    acc = one_series(ring, x.nvars, rest.prec)
    power = acc
    neg = -rest
    while True:
        power = power * neg
        if power.is_zero():
            break
        acc = acc + power
        if power.wmin() >= out_prec:
            break
    return (acc * lead_inv).truncate(out_prec)


# -- the additive twist equation ------------------------------------------------


@dataclass(frozen=True)
class Unsolvable:
    """Witness that z - F(z) = c has no solution: an orbit with nonzero sum."""

    orbit: tuple  # stored support exponents in the offending orbit, ascending
    total: RingElement

    def describe(self):
        pts = ", ".join(str(e) for e in self.orbit)
        return f"orbit {{{pts}}} has sum {self.total.value!r}"


def _orbit_anchor(e, lam):
    a = -e if e < 0 else e
    while a >= lam:
        a /= lam
    while a < 1:
        a *= lam
    return -a if e < 0 else a


def solve_additive_twist(c: NovikovSeries, lam, monoid=None):
    """Solve z - F(z) = c for a one-variable series over a field.

    The equation decouples over orbits of exponents under multiplication by
    lam.  Orbits of negative exponents are solvable exactly when the orbit sum
    of c vanishes; exponent zero requires a zero coefficient; positive orbits
    always solve, with the eventually constant tail emitted up to the cutoff.
    Returns the solution series or an Unsolvable witness.
    """
    if c.nvars != 1:
        raise ArityMismatch("the twist equation is one-variable")
    if not c.ring.is_field:
        raise NotAField("the twist solver needs field coefficients")
    lam = _frac(lam)
    if lam <= 1:
        raise ValueError("twist factor must exceed 1")
    if monoid is not None:
        for f in (lam, 1 / lam):
            if not monoid.stable_under(f):
                raise MonoidNotStable(f"{f} * ({monoid.describe()}) leaves {monoid.describe()}")
    ring = c.ring
    prec = c.prec
    zero_key = (Fraction(0),)
    if zero_key in c.terms:
        return Unsolvable((Fraction(0),), RingElement(ring, c.terms[zero_key]))
    groups = {}
    for (e,), coeff in c.terms.items():
        groups.setdefault(_orbit_anchor(e, lam), []).append((e, coeff))
    entries = []
    for anchor in sorted(groups):
        pts = sorted(groups[anchor])
        supp = dict(pts)
        total = ring.zero
        for _, v in pts:
            total = ring.add(total, v)
        bottom, top = pts[0][0], pts[-1][0]
        positions = [bottom]
        while positions[-1] != top:
            positions.append(positions[-1] / lam if anchor < 0 else positions[-1] * lam)
        if anchor < 0:
            if not ring.is_zero(total):
                return Unsolvable(tuple(e for e, _ in pts), RingElement(ring, total))
            # z_e sums c over the orbit points in [e, 0)
            suffix = ring.zero
            sums = []
            for e in reversed(positions):
                suffix = ring.add(suffix, supp.get(e, ring.zero))
                sums.append((e, suffix))
            entries.extend((e, v) for e, v in sums if not ring.is_zero(v))
        else:
            if not ring.is_zero(total) and prec == INF:
                raise PrecisionExhausted(
                    "positive orbit with nonzero sum has unbounded support; a finite cutoff is required"
                )
            prefix = ring.zero
            for e in positions:
                prefix = ring.add(prefix, supp.get(e, ring.zero))
                if not ring.is_zero(prefix) and e < prec:
                    entries.append((e, prefix))
            if not ring.is_zero(total):
                e = top * lam
                while e < prec:
                    entries.append((e, total))
                    e *= lam
    return make_series(1, ring, entries, prec)
