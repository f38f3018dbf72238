"""Exact coefficient rings: prime fields, the rationals, and dual-number chains k[eps]/(eps^m).

Arithmetic acts on plain payload values (int residues, Fraction, or tuples of
base payloads), so the series layer can store coefficients without wrapper
objects.  RingElement is the thin wrapper used at API boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import NotAField, NotInvertible, NotNilpotentRing, RingMismatch


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Ring:
    """Ring descriptor plus payload-level arithmetic."""

    is_field = False
    zero = None
    one = None

    def coerce(self, v):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def is_nilpotent(self, a) -> bool:
        return self.is_zero(a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a) -> bool:
        return a == self.zero

    def element(self, v) -> "RingElement":
        return RingElement(self, v)

    def describe(self) -> str:
        raise NotImplementedError

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Ring) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return self.describe()


class PrimeField(Ring):
    """The field with p elements, residues stored as ints in [0, p)."""

    is_field = True

    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1 % p

    def coerce(self, v):
        if isinstance(v, RingElement):
            if v.ring != self:
                raise RingMismatch(f"cannot coerce element of {v.ring} into {self}")
            return v.value
        if isinstance(v, int):
            return v % self.p
        if isinstance(v, Fraction):
            return self.mul(v.numerator % self.p, self.inv(v.denominator % self.p))
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise NotInvertible(f"0 is not invertible in {self}")
        return pow(a, -1, self.p)

    def is_unit(self, a):
        return a % self.p != 0

    def describe(self):
        return f"fp {self.p}"

    def _key(self):
        return ("fp", self.p)


class RationalField(Ring):
    """The rational numbers with exact Fraction payloads."""

    is_field = True

    def __init__(self):
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def coerce(self, v):
        if isinstance(v, RingElement):
            if v.ring != self:
                raise RingMismatch(f"cannot coerce element of {v.ring} into {self}")
            return v.value
        if isinstance(v, (int, Fraction)):
            return Fraction(v)
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise NotInvertible("0 is not invertible in q")
        return 1 / a

    def is_unit(self, a):
        return a != 0

    def describe(self):
        return "q"

    def _key(self):
        return ("q",)


class DualNumbers(Ring):
    """k[eps]/(eps^m) over a field k; payloads are tuples (a0, ..., a_{m-1})."""

    is_field = False

    def __init__(self, base: Ring, order: int):
        if not base.is_field:
            raise NotAField("dual-number coefficients need a field base")
        if order < 2:
            raise ValueError("dual-number order must be at least 2")
        self.base = base
        self.order = order
        self.zero = (base.zero,) * order
        self.one = (base.one,) + (base.zero,) * (order - 1)

    def coerce(self, v):
        if isinstance(v, RingElement):
            if v.ring == self:
                return v.value
            if v.ring == self.base:
                return (v.value,) + (self.base.zero,) * (self.order - 1)
            raise RingMismatch(f"cannot coerce element of {v.ring} into {self}")
        if isinstance(v, tuple):
            if len(v) != self.order:
                raise ValueError(f"expected {self.order} components, got {len(v)}")
            return tuple(self.base.coerce(c) for c in v)
        if isinstance(v, (int, Fraction)):
            return (self.base.coerce(v),) + (self.base.zero,) * (self.order - 1)
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def add(self, a, b):
        base = self.base
        return tuple(base.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        base = self.base
        return tuple(base.neg(x) for x in a)

    def mul(self, a, b):
        base = self.base
        out = []
        for k in range(self.order):
            acc = base.zero
            for i in range(k + 1):
                acc = base.add(acc, base.mul(a[i], b[k - i]))
            out.append(acc)
        return tuple(out)

    def inv(self, a):
        base = self.base
        if not base.is_unit(a[0]):
            raise NotInvertible("constant part is nilpotent, element has no inverse")
        b0 = base.inv(a[0])
        out = [b0]
        for k in range(1, self.order):
            acc = base.zero
            for i in range(1, k + 1):
                acc = base.add(acc, base.mul(a[i], out[k - i]))
            out.append(base.neg(base.mul(b0, acc)))
        return tuple(out)

    def is_unit(self, a):
        return self.base.is_unit(a[0])

    def is_nilpotent(self, a):
        return self.base.is_zero(a[0])

    def describe(self):
        return f"dual {self.base.describe()} order {self.order}"

    def _key(self):
        return ("dual", self.base._key(), self.order)


@dataclass(frozen=True)
class RingElement:
    """A canonical ring value: the pair (descriptor, payload)."""

    ring: Ring
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", self.ring.coerce(self.value))

    def __add__(self, other):
        return RingElement(self.ring, self.ring.add(self.value, self.ring.coerce(other)))

    def __sub__(self, other):
        return RingElement(self.ring, self.ring.sub(self.value, self.ring.coerce(other)))

    def __mul__(self, other):
        return RingElement(self.ring, self.ring.mul(self.value, self.ring.coerce(other)))

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.value))

    def inverse(self):
        return RingElement(self.ring, self.ring.inv(self.value))

    def __truediv__(self, other):
        return self * RingElement(self.ring, other).inverse()

    def is_unit(self):
        return self.ring.is_unit(self.value)

    def is_zero(self):
        return self.ring.is_zero(self.value)

    def __repr__(self):
        return f"{self.value!r} in {self.ring.describe()}"


def _int_divisors(n: int):
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            out.append(n // d)
        d += 1
    return sorted(set(out))


def roots_in_field(coeffs, expect_nonzero=False):
    """Roots in the base field of x^n - sum(coeffs[i] * x^i), n = len(coeffs).

    Exhaustive scan over prime fields, rational-root search over the
    rationals.  Returns the (possibly empty) set of roots as RingElements.
    """
    if not coeffs:
        raise ValueError("need at least one coefficient")
    ring = coeffs[0].ring
    if not ring.is_field:
        raise NotAField(f"{ring.describe()} is not a field")
    vals = [ring.coerce(c) for c in coeffs]
    n = len(vals)
    roots = set()
    if isinstance(ring, PrimeField):
        p = ring.p
        for c in range(p):
            acc = pow(c, n, p)
            for i, a in enumerate(vals):
                acc = (acc - a * pow(c, i, p)) % p
            if acc == 0:
                roots.add(c)
    else:
        # integer polynomial: L*x^n - L*a_{n-1}*x^{n-1} - ... - L*a_0
        lcm = 1
        for a in vals:
            lcm = lcm * a.denominator // gcd(lcm, a.denominator)
        ipoly = [-(a * lcm).numerator for a in vals] + [lcm]
        low = 0
        while low < n and ipoly[low] == 0:
            low += 1
        if low > 0:
            roots.add(Fraction(0))
        if low <= n:
            const, lead = ipoly[low], ipoly[-1]
            for num in _int_divisors(const):
                for den in _int_divisors(lead):
                    for cand in (Fraction(num, den), Fraction(-num, den)):
                        acc = cand**n
                        for i, a in enumerate(vals):
                            acc -= a * cand**i
                        if acc == 0:
                            roots.add(cand)
    if expect_nonzero:
        roots = {r for r in roots if not ring.is_zero(ring.coerce(r))}
    return {RingElement(ring, r) for r in roots}


def reduce_mod_nilradical(x: RingElement) -> RingElement:
    """Quotient map k[eps]/(eps^m) -> k, keeping the constant component."""
    ring = x.ring
    if not isinstance(ring, DualNumbers):
        raise NotNilpotentRing(f"{ring.describe()} has no nilradical to kill")
    return RingElement(ring.base, x.value[0])


def canonical_lift(x: RingElement, target: DualNumbers) -> RingElement:
    """Zero-padding section of reduce_mod_nilradical."""
    if not isinstance(target, DualNumbers):
        raise NotNilpotentRing(f"{target.describe()} is not a dual-number ring")
    if x.ring != target.base:
        raise RingMismatch(f"{x.ring.describe()} is not the base of {target.describe()}")
    return RingElement(target, (x.value,) + (target.base.zero,) * (target.order - 1))


def chain_quotient(ring: DualNumbers, order: int) -> Ring:
    """The quotient k[eps]/(eps^order) of a dual-number ring (the base field for order 1)."""
    if not isinstance(ring, DualNumbers):
        raise NotNilpotentRing(f"{ring.describe()} has no eps-filtration")
    if not 1 <= order <= ring.order:
        raise ValueError(f"order {order} outside the chain of {ring.describe()}")
    if order == 1:
        return ring.base
    return DualNumbers(ring.base, order)


def chain_reduce(ring: DualNumbers, payload, order: int):
    """Truncate a dual-number payload to the order-j quotient (base payload for j=1)."""
    if order == 1:
        return payload[0]
    return payload[:order]


def chain_lift(src: Ring, payload, target: DualNumbers):
    """Zero-pad a payload from a smaller chain quotient (or the base field) into target."""
    if isinstance(src, DualNumbers):
        pad = target.order - src.order
        if src.base != target.base or pad < 0:
            raise RingMismatch("not a quotient of the target chain")
        return payload + (target.base.zero,) * pad
    if src != target.base:
        raise RingMismatch("not a quotient of the target chain")
    return (payload,) + (target.base.zero,) * (target.order - 1)
