"""Problem-file grammar: tokenizer, parsers, and canonical serializers.

Series text looks like ``1 + 2*t^(1/2) - eps*u^(-1)``; matrices are nested
brackets ``[[a, b], [c, d]]``.  A problem file is a block of header lines
(ring, monoid, lambda, prec, rank) followed by one payload block
(phi:/b:/xi:/twist:).  Whitespace is insignificant inside payloads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import DualNumbers, PrimeField, RationalField, Ring
from .errors import ProblemSemanticError, ProblemSyntaxError
from .series import INF, Monoid, MONOID_Q, MONOID_Z, NovikovSeries, make_series, monoid_zp
from .seriesalg import SeriesMatrix

_VAR_INDEX = {"t": 0, "u": 1, "v": 2}
_VAR_NAMES = "tuv"
_PAYLOAD_KINDS = ("phi", "b", "xi", "twist")


@dataclass
class Problem:
    ring: Ring
    monoid: Monoid
    lam: Fraction
    prec: object  # Fraction or INF
    rank: int
    payload_kind: str
    payload: object  # SeriesMatrix for phi/b/xi, NovikovSeries for twist


# -- tokenizer ---------------------------------------------------------------


@dataclass
class _Tok:
    kind: str  # "num" | "name" | one of "+-*/^()[],"
    text: str
    line: int
    col: int


_PUNCT = set("+-*/^()[],")


def _tokenize(text, line0=1):
    toks = []
    line, col = line0, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(_Tok("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and text[j].isalpha():
                j += 1
            toks.append(_Tok("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(_Tok(ch, ch, line, col))
            col += 1
            i += 1
            continue
        raise ProblemSyntaxError(f"unexpected character {ch!r}", line, col)
    return toks


class _Parser:
    def __init__(self, toks, end_line=1, end_col=1):
        self.toks = toks
        self.pos = 0
        self.end_line = end_line
        self.end_col = end_col

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail(f"expected {kind!r}")
        return self.take()

    def fail(self, message):
        tok = self.peek()
        if tok is None:
            raise ProblemSyntaxError(message + " (at end of input)", self.end_line, self.end_col)
        raise ProblemSyntaxError(message + f", got {tok.text!r}", tok.line, tok.col)

    def at_end(self):
        return self.pos >= len(self.toks)

    # rational := ['-'] int ['/' int]
    def rational(self):
        sign = 1
        if self.peek() is not None and self.peek().kind == "-":
            self.take()
            sign = -1
        num = int(self.expect("num").text)
        den = 1
        if self.peek() is not None and self.peek().kind == "/":
            self.take()
            dtok = self.expect("num")
            den = int(dtok.text)
            if den == 0:
                raise ProblemSyntaxError("zero denominator", dtok.line, dtok.col)
        return Fraction(sign * num, den)

    def unsigned_rational(self):
        num = int(self.expect("num").text)
        den = 1
        if self.peek() is not None and self.peek().kind == "/":
            self.take()
            dtok = self.expect("num")
            den = int(dtok.text)
            if den == 0:
                raise ProblemSyntaxError("zero denominator", dtok.line, dtok.col)
        return Fraction(num, den)


def _parse_term(p: _Parser, nvars, ring):
    """One signed term body: coefficient, optional eps power, monomials."""
    rational = None
    eps_pow = 0
    exps = [Fraction(0)] * nvars
    saw_mono = False

    tok = p.peek()
    if tok is None:
        p.fail("expected a term")
    if tok.kind == "num":
        rational = p.unsigned_rational()
        if p.peek() is not None and p.peek().kind == "*":
            nxt = p.toks[p.pos + 1] if p.pos + 1 < len(p.toks) else None
            if nxt is not None and nxt.kind == "name" and nxt.text == "eps":
                p.take()  # '*'
                p.take()  # eps
                eps_pow = 1
                if p.peek() is not None and p.peek().kind == "^":
                    p.take()
                    eps_pow = int(p.expect("num").text)
    elif tok.kind == "name" and tok.text == "eps":
        p.take()
        eps_pow = 1
        if p.peek() is not None and p.peek().kind == "^":
            p.take()
            eps_pow = int(p.expect("num").text)
    elif tok.kind == "name" and tok.text in _VAR_INDEX:
        pass  # bare monomial product, coefficient 1
    else:
        p.fail("expected a coefficient or a monomial")

    def parse_mono():
        nonlocal saw_mono
        tok = p.expect("name")
        if tok.text not in _VAR_INDEX:
            raise ProblemSyntaxError(f"unknown variable {tok.text!r}", tok.line, tok.col)
        idx = _VAR_INDEX[tok.text]
        if idx >= nvars:
            raise ProblemSemanticError(
                f"variable {tok.text!r} is not allowed in a {nvars}-variable series"
            )
        exp = Fraction(1)
        if p.peek() is not None and p.peek().kind == "^":
            p.take()
            p.expect("(")
            exp = p.rational()
            p.expect(")")
        exps[idx] += exp
        saw_mono = True

    nxt = p.peek()
    if rational is not None or eps_pow:
        while p.peek() is not None and p.peek().kind == "*":
            save = p.pos
            p.take()
            tok = p.peek()
            if tok is not None and tok.kind == "name" and tok.text in _VAR_INDEX:
                parse_mono()
            else:
                p.pos = save
                break
    elif nxt is not None and nxt.kind == "name" and nxt.text in _VAR_INDEX:
        parse_mono()
        while p.peek() is not None and p.peek().kind == "*":
            p.take()
            parse_mono()

    if rational is None:
        rational = Fraction(1)
    if eps_pow:
        if not isinstance(ring, DualNumbers):
            raise ProblemSemanticError("eps coefficients need a dual coefficient ring")
        comp = [ring.base.zero] * ring.order
        if eps_pow < ring.order:
            comp[eps_pow] = ring.base.coerce(rational)
        payload = tuple(comp)
    else:
        payload = ring.coerce(rational)
    return tuple(exps), payload


def parse_series_tokens(p: _Parser, nvars, ring, prec=INF) -> NovikovSeries:
    terms = []
    negate = False
    if p.peek() is not None and p.peek().kind == "-":
        p.take()
        negate = True
    while True:
        key, payload = _parse_term(p, nvars, ring)
        if negate:
            payload = ring.neg(payload)
        terms.append((key, payload))
        tok = p.peek()
        if tok is None or tok.kind not in ("+", "-"):
            break
        negate = tok.kind == "-"
        p.take()
    return make_series(nvars, ring, terms, prec)


def parse_matrix_tokens(p: _Parser, nvars, ring, prec=INF) -> SeriesMatrix:
    p.expect("[")
    rows = []
    while True:
        p.expect("[")
        row = []
        while True:
            row.append(parse_series_tokens(p, nvars, ring, prec))
            tok = p.peek()
            if tok is not None and tok.kind == ",":
                p.take()
                continue
            break
        p.expect("]")
        rows.append(row)
        tok = p.peek()
        if tok is not None and tok.kind == ",":
            p.take()
            continue
        break
    p.expect("]")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ProblemSemanticError("matrix rows have different lengths")
    return SeriesMatrix(rows)


def parse_series(text, nvars, ring, prec=INF, line0=1) -> NovikovSeries:
    p = _Parser(_tokenize(text, line0), line0)
    s = parse_series_tokens(p, nvars, ring, prec)
    if not p.at_end():
        p.fail("trailing input after series")
    return s


def parse_matrix(text, nvars, ring, prec=INF, line0=1) -> SeriesMatrix:
    p = _Parser(_tokenize(text, line0), line0)
    m = parse_matrix_tokens(p, nvars, ring, prec)
    if not p.at_end():
        p.fail("trailing input after matrix")
    return m


# -- ring and monoid specs -----------------------------------------------------


def parse_ring_spec(words) -> Ring:
    if isinstance(words, str):
        words = words.split()
    if not words:
        raise ProblemSemanticError("empty ring spec")
    if words[0] == "fp":
        if len(words) != 2:
            raise ProblemSemanticError("ring fp takes one prime argument")
        try:
            return PrimeField(int(words[1]))
        except ValueError as exc:
            raise ProblemSemanticError(str(exc)) from exc
    if words[0] == "q":
        if len(words) != 1:
            raise ProblemSemanticError("ring q takes no arguments")
        return RationalField()
    if words[0] == "dual":
        if len(words) != 5 or words[1] != "fp" or words[3] != "order":
            raise ProblemSemanticError("dual ring spec is: dual fp <p> order <m>")
        try:
            return DualNumbers(PrimeField(int(words[2])), int(words[4]))
        except ValueError as exc:
            raise ProblemSemanticError(str(exc)) from exc
    raise ProblemSemanticError(f"unknown ring kind {words[0]!r}")


def parse_monoid_spec(words) -> Monoid:
    if isinstance(words, str):
        words = words.split()
    if not words:
        raise ProblemSemanticError("empty monoid spec")
    if words[0] == "z" and len(words) == 1:
        return MONOID_Z
    if words[0] == "q" and len(words) == 1:
        return MONOID_Q
    if words[0] == "zp" and len(words) == 2:
        try:
            return monoid_zp(int(words[1]))
        except ValueError as exc:
            raise ProblemSemanticError(str(exc)) from exc
    raise ProblemSemanticError(f"unknown monoid spec {' '.join(words)!r}")


def _parse_header_rational(text, what):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemSemanticError(f"bad {what} value {text!r}") from exc


def parse_problem(text: str) -> Problem:
    """Parse a full problem file; raises position-tagged syntax errors or
    semantic errors for inadmissible parameters."""
    lines = text.split("\n")
    headers = {}
    payload_kind = None
    payload_text = None
    payload_line = None
    for i, raw in enumerate(lines):
        s = raw.strip()
        if not s:
            continue
        head = s.split(":", 1)[0].strip() if ":" in s else None
        if head in _PAYLOAD_KINDS:
            payload_kind = head
            rest = s.split(":", 1)[1]
            payload_text = rest + "\n" + "\n".join(lines[i + 1 :])
            payload_line = i + 1
            break
        words = s.split()
        key = words[0]
        if key in headers:
            raise ProblemSemanticError(f"duplicate header {key!r}")
        if key == "ring":
            headers["ring"] = parse_ring_spec(words[1:])
        elif key == "monoid":
            headers["monoid"] = parse_monoid_spec(words[1:])
        elif key == "lambda":
            if len(words) != 2:
                raise ProblemSemanticError("lambda takes one rational argument")
            headers["lambda"] = _parse_header_rational(words[1], "lambda")
        elif key == "prec":
            if len(words) != 2:
                raise ProblemSemanticError("prec takes one rational argument or inf")
            headers["prec"] = INF if words[1] == "inf" else _parse_header_rational(words[1], "prec")
        elif key == "rank":
            if len(words) != 2 or not words[1].isdigit():
                raise ProblemSemanticError("rank takes one positive integer")
            headers["rank"] = int(words[1])
        else:
            raise ProblemSyntaxError(f"unknown header {key!r}", i + 1, 1)
    for needed in ("ring", "monoid", "lambda", "prec", "rank"):
        if needed not in headers:
            raise ProblemSemanticError(f"missing header {needed!r}")
    if payload_kind is None:
        raise ProblemSemanticError("missing payload block (phi:, b:, xi: or twist:)")
    ring = headers["ring"]
    monoid = headers["monoid"]
    lam = headers["lambda"]
    prec = headers["prec"]
    rank = headers["rank"]
    if lam <= 1:
        raise ProblemSemanticError(f"lambda must exceed 1, got {lam}")
    for f in (lam, 1 / lam):
        if not monoid.stable_under(f):
            raise ProblemSemanticError(
                f"MonoidNotStable: {f} * ({monoid.describe()}) leaves {monoid.describe()}; "
                "the solvers need both directions"
            )
    if rank < 1:
        raise ProblemSemanticError("rank must be at least 1")
    if payload_kind == "twist":
        if rank != 1:
            raise ProblemSemanticError("twist problems carry rank 1")
        payload = parse_series(payload_text, 1, ring, prec, line0=payload_line)
    else:
        nvars = 2 if payload_kind == "phi" else 1
        payload = parse_matrix(payload_text, nvars, ring, prec, line0=payload_line)
        if payload.rows != rank or payload.cols != rank:
            raise ProblemSemanticError(
                f"payload is {payload.rows}x{payload.cols} but rank is {rank}"
            )
    return Problem(ring, monoid, lam, prec, rank, payload_kind, payload)


# -- canonical serialization -----------------------------------------------------


def frac_str(x) -> str:
    if x == INF:
        return "inf"
    return str(x)


def _coeff_chunks(ring, payload):
    """Split a payload into (eps_power, base_value) chunks with nonzero values."""
    if isinstance(ring, DualNumbers):
        return [(k, v) for k, v in enumerate(payload) if not ring.base.is_zero(v)]
    return [(0, payload)]


def _chunk_str(base_value, eps_pow, key):
    """One serialized term chunk; returns (is_negative, body)."""
    neg = isinstance(base_value, Fraction) and base_value < 0
    mag = -base_value if neg else base_value
    pieces = []
    if mag != 1 or (eps_pow == 0 and all(e == 0 for e in key)):
        pieces.append(str(mag))
    if eps_pow == 1:
        pieces.append("eps")
    elif eps_pow > 1:
        pieces.append(f"eps^{eps_pow}")
    for i, e in enumerate(key):
        if e == 0:
            continue
        pieces.append(_VAR_NAMES[i] if e == 1 else f"{_VAR_NAMES[i]}^({e})")
    if not pieces:
        pieces.append("1")
    return neg, "*".join(pieces)


def serialize_series(s: NovikovSeries) -> str:
    ring = s.ring
    chunks = []
    for _, key, payload in s.sorted_terms():
        for eps_pow, base_value in _coeff_chunks(ring, payload):
            chunks.append(_chunk_str(base_value, eps_pow, key))
    if not chunks:
        return "0"
    out = []
    for i, (neg, body) in enumerate(chunks):
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(out)


def serialize_matrix(m: SeriesMatrix) -> str:
    rows = []
    for row in m.entries:
        rows.append("[" + ", ".join(serialize_series(e) for e in row) + "]")
    return "[" + ", ".join(rows) + "]"


def serialize_problem(p: Problem) -> str:
    lines = [
        f"ring {p.ring.describe()}",
        f"monoid {p.monoid.describe()}",
        f"lambda {frac_str(p.lam)}",
        f"prec {frac_str(p.prec)}",
        f"rank {p.rank}",
        f"{p.payload_kind}:",
    ]
    if p.payload_kind == "twist":
        lines.append(serialize_series(p.payload))
    else:
        lines.append(serialize_matrix(p.payload))
    return "\n".join(lines) + "\n"
