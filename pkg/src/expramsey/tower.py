"""Symbolic power-tower integers and their colour-relevant functionals.

Terms plus the operations the counterexample colourings need: guarded exact
evaluation, residues of tower-sized values (totient chain), the iterated-log
count L, the maximal-root exponent l, p-adic valuations, and certified
iterated-log comparisons.

A term denotes a positive integer built from decimal literals, right-
associative exponentiation, and multiplication, without ever materializing
values that would be astronomically large. Every term denotes an integer >= 1
by construction. Terms are immutable and hashable; structural equality is the
dataclass equality, value-level equality goes through :func:`equal_value`.

Canonical form, maintained by the factory functions ``literal`` / ``power`` /
``product`` (use those rather than the raw constructors):

- nested products are flattened and ``Literal(1)`` factors dropped;
- adjacent literal factors are merged by multiplication while both stay at or
  below the exactness cutoff;
- ``Power(x, Literal(1))`` collapses to ``x`` and a base denoting 1 collapses
  to ``Literal(1)``.

The exactness cutoff (default ``2**64``, overridable through the
``EXPRAMSEY_CUTOFF`` environment variable) separates the exact regime from the
symbolic one: :func:`eval_exact` returns the exact value when it is at most
the cutoff and the verdict Huge otherwise. Huge is still informative, it
certifies value > cutoff.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import gcd
from typing import Optional, Tuple, Union

from ._arith import factorint, gcd_of_exponents, nu, totient
from ._intlog import (
    PREC_SCHEDULE,
    _log2_interval_step,
    iter_log_le,
    log2_scaled_bounds,
    log_star_int,
    log_star_scaled,
)
from .errors import (
    ExactnessRequired,
    ParseError,
    UncertifiableComparison,
    UncertifiableLogStar,
    UnsupportedShape,
)

DEFAULT_CUTOFF = int(os.environ.get("EXPRAMSEY_CUTOFF", str(2**64)))
if DEFAULT_CUTOFF < 2:
    raise ValueError("EXPRAMSEY_CUTOFF must be at least 2")


@dataclass(frozen=True)
class Literal:
    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise TypeError("Literal value must be an int")
        if self.value < 1:
            raise ValueError("Literal value must be a positive integer")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Power:
    base: "ExpTerm"
    exponent: "ExpTerm"

    def __post_init__(self):
        # exponent 1 would break canonical uniqueness; the factory collapses it
        if isinstance(self.exponent, Literal) and self.exponent.value == 1:
            raise ValueError("Power with exponent Literal(1) is not canonical")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Product:
    factors: Tuple["ExpTerm", ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ValueError("Product needs at least two factors")
        if any(isinstance(f, Literal) and f.value == 1 for f in self.factors):
            raise ValueError("Product with a Literal(1) factor is not canonical")

    def __str__(self):
        return to_text(self)


ExpTerm = Union[Literal, Power, Product]


def as_term(x) -> ExpTerm:
    """Coerce an int or term to a term."""
    if isinstance(x, (Literal, Power, Product)):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Literal(x)
    raise TypeError(f"cannot interpret {x!r} as a tower term")


def literal(value: int) -> Literal:
    return Literal(value)


def power(base, exponent) -> ExpTerm:
    base = as_term(base)
    exponent = as_term(exponent)
    if isinstance(exponent, Literal) and exponent.value == 1:
        return base
    if isinstance(base, Literal) and base.value == 1:
        return base
    return Power(base, exponent)


def product(*factors) -> ExpTerm:
    flat = []
    for f in factors:
        f = as_term(f)
        if isinstance(f, Product):
            flat.extend(f.factors)
        elif isinstance(f, Literal) and f.value == 1:
            continue
        else:
            flat.append(f)
    merged: list = []
    for f in flat:
        if (
            merged
            and isinstance(f, Literal)
            and isinstance(merged[-1], Literal)
            and merged[-1].value <= DEFAULT_CUTOFF
            and f.value <= DEFAULT_CUTOFF
        ):
            merged[-1] = Literal(merged[-1].value * f.value)
        else:
            merged.append(f)
    if not merged:
        return Literal(1)
    if len(merged) == 1:
        return merged[0]
    return Product(tuple(merged))


@dataclass(frozen=True)
class BoundedValue:
    """Exact value at or below ``cutoff``, or the verdict Huge (exact=None).

    Huge certifies a lower bound: the denoted value exceeds ``cutoff``.
    """

    exact: Optional[int]
    cutoff: int

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def is_huge(self) -> bool:
        return self.exact is None

    def __str__(self):
        if self.is_exact:
            return str(self.exact)
        return f"Huge(>{self.cutoff})"


def eval_exact(t: ExpTerm, cutoff: Optional[int] = None) -> BoundedValue:
    """Evaluate exactly when the value is at most ``cutoff``, else Huge.

    Exponentiation is guarded by a logarithmic size estimate before any
    multiplication, so the cost is bounded by the cutoff, not by the value.
    """
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF
    return BoundedValue(_eval_bounded(as_term(t), cutoff), cutoff)


def _eval_bounded(t: ExpTerm, cutoff: int) -> Optional[int]:
    if isinstance(t, Literal):
        return t.value if t.value <= cutoff else None
    if isinstance(t, Product):
        acc = 1
        for f in t.factors:
            fv = _eval_bounded(f, cutoff)
            if fv is None:
                return None
            acc *= fv
            if acc > cutoff:
                return None
        return acc
    bv = _eval_bounded(t.base, cutoff)
    if bv is None:
        return None  # base alone exceeds the cutoff and the exponent is >= 1
    if bv == 1:
        return 1
    # exponents above ceil(log2 cutoff)+1 force Huge for any base >= 2
    exp_cut = cutoff.bit_length() + 1
    ev = _eval_bounded(t.exponent, exp_cut)
    if ev is None:
        return None
    if (bv.bit_length() - 1) * ev > cutoff.bit_length():
        return None
    val = bv**ev
    return val if val <= cutoff else None


def equal_value(s: ExpTerm, t: ExpTerm, cutoff: Optional[int] = None) -> bool:
    """Exact-value equality below the cutoff, structural equality above it.

    Structural comparison of two Huge terms may report False for equal values
    (distinct canonical forms can denote the same integer); callers that care
    record which regime applied.
    """
    s = as_term(s)
    t = as_term(t)
    sv = eval_exact(s, cutoff)
    tv = eval_exact(t, cutoff)
    if sv.is_exact and tv.is_exact:
        return sv.exact == tv.exact
    if sv.is_exact != tv.is_exact:
        return False
    return s == t


def dedup_key(t: ExpTerm, cutoff: Optional[int] = None):
    """Hashable identity: exact value when small, canonical structure when Huge."""
    bv = eval_exact(t, cutoff)
    if bv.is_exact:
        return ("v", bv.exact)
    return ("s", t)


# ---------------------------------------------------------------------------
# textual syntax: INT, right-associative ^, *, parentheses


def to_text(t: ExpTerm) -> str:
    if isinstance(t, Literal):
        return str(t.value)
    if isinstance(t, Product):
        return "*".join(_factor_text(f) for f in t.factors)
    base = to_text(t.base)
    if isinstance(t.base, (Power, Product)):
        base = f"({base})"
    exp = to_text(t.exponent)
    if isinstance(t.exponent, Product):
        exp = f"({exp})"
    return f"{base}^{exp}"


def _factor_text(f: ExpTerm) -> str:
    # products are flattened, so a factor is a Literal or a Power; ^ binds
    # tighter than * and needs no parentheses here
    return to_text(f)


def parse_term(text: str) -> ExpTerm:
    """Parse the textual tower syntax; inverse of :func:`to_text`."""
    tokens = _tokenize(text)
    term, pos = _parse_product(tokens, 0)
    if pos != len(tokens):
        raise ParseError(f"unexpected {tokens[pos][0]!r} at position {tokens[pos][1]} in {text!r}")
    return term


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append((text[i:j], i))
            i = j
            continue
        if c in "^*()":
            tokens.append((c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r} at position {i} in {text!r}")
    if not tokens:
        raise ParseError("empty expression")
    return tokens


def _parse_product(tokens, pos):
    term, pos = _parse_power(tokens, pos)
    factors = [term]
    while pos < len(tokens) and tokens[pos][0] == "*":
        nxt, pos = _parse_power(tokens, pos + 1)
        factors.append(nxt)
    if len(factors) == 1:
        return factors[0], pos
    return product(*factors), pos


def _parse_power(tokens, pos):
    base, pos = _parse_atom(tokens, pos)
    if pos < len(tokens) and tokens[pos][0] == "^":
        exp, pos = _parse_power(tokens, pos + 1)  # right-associative
        return power(base, exp), pos
    return base, pos


def _parse_atom(tokens, pos):
    if pos >= len(tokens):
        raise ParseError("unexpected end of expression")
    tok, at = tokens[pos]
    if tok == "(":
        term, pos = _parse_product(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos][0] != ")":
            raise ParseError(f"missing ')' for '(' at position {at}")
        return term, pos + 1
    if tok.isdigit():
        v = int(tok)
        if v < 1:
            raise ParseError(f"literal must be >= 1, got {tok} at position {at}")
        return Literal(v), pos + 1
    raise ParseError(f"unexpected {tok!r} at position {at}")


# ---------------------------------------------------------------------------
# residues of tower-sized values

def eval_mod(t: ExpTerm, m: int) -> int:
    """Denoted value mod m, without materializing the value.

    Powers go through the generalized Euler lift: a^b = a^(phi(m) + b mod
    phi(m)) (mod m) holds for every base once b >= log2(m), and whether b
    clears that threshold is itself a bounded evaluation.
    """
    if m < 1:
        raise ValueError("modulus must be a positive integer")
    if m == 1:
        return 0
    t = as_term(t)
    if isinstance(t, Literal):
        return t.value % m
    if isinstance(t, Product):
        acc = 1
        for f in t.factors:
            acc = acc * eval_mod(f, m) % m
        return acc
    am = eval_mod(t.base, m)
    need = (m - 1).bit_length()  # = ceil(log2 m) for m >= 2
    bv = eval_exact(t.exponent, max(2, need + 1))
    if bv.is_exact and bv.exact < need:
        return pow(am, bv.exact, m)
    phi = totient(m)
    e = phi + eval_mod(t.exponent, phi)
    return pow(am, e, m)


# ---------------------------------------------------------------------------
# iterated-log count L

# Generous ceiling for materializing structural exponents: anything whose
# value stays under 2^(2^20) (a megabit) is cheap to hold as an int, yet the
# module cutoff keeps such values out of the exact regime.
_BIG_BITS = 1 << 20
_big_cutoff_cache: Optional[int] = None


def _big_cutoff() -> int:
    global _big_cutoff_cache
    if _big_cutoff_cache is None:
        _big_cutoff_cache = 1 << _BIG_BITS
    return _big_cutoff_cache


def _concrete_value(t: ExpTerm) -> Optional[int]:
    """The denoted integer when it is materializable (maybe above the cutoff)."""
    if isinstance(t, Literal):
        return t.value
    return eval_exact(t, _big_cutoff()).exact


def _pow2_exponent_term(t: ExpTerm) -> Optional[ExpTerm]:
    """E with t = 2^E when t is 2-power-structured, else None."""
    if isinstance(t, Power):
        # an integer root of a power of two is itself a power of two, so
        # recursing on the base loses nothing and materializes nothing
        eb = _pow2_exponent_term(t.base)
        if eb is not None:
            # (2^y)^e = 2^(y*e)
            return product(eb, t.exponent)
        return None
    v = t.value if isinstance(t, Literal) else eval_exact(t).exact
    if v is not None and v >= 2 and v & (v - 1) == 0:
        return Literal(v.bit_length() - 1)
    return None


def _is_tower_term(t: ExpTerm) -> bool:
    """Whether t denotes one of the tower numbers 1, 2, 4, 16, 65536, ..."""
    v = _concrete_value(t)
    while v is None:
        e = _pow2_exponent_term(t)
        if e is None:
            return False
        t = e
        v = _concrete_value(t)
    while v > 2:
        if v & (v - 1):
            return False
        v = v.bit_length() - 1
    return True


def _log2_term_scaled(t: ExpTerm, prec: int) -> Tuple[int, int]:
    """Certified scaled bounds on log2(value of t).

    Supports exact subterms, powers with materializable exponents, and
    products thereof; anything else raises UncertifiableLogStar.
    """
    v = t.value if isinstance(t, Literal) else eval_exact(t).exact
    if v is not None:
        if v == 1:
            return (0, 0)
        return log2_scaled_bounds(v, prec)
    if isinstance(t, Power):
        ve = _concrete_value(t.exponent)
        if ve is None:
            raise UncertifiableLogStar(
                "log2 bounds need a materializable exponent"
            )
        blo, bhi = _log2_term_scaled(t.base, prec)
        return (blo * ve, bhi * ve)
    if isinstance(t, Product):
        lo = hi = 0
        for f in t.factors:
            flo, fhi = _log2_term_scaled(f, prec)
            lo += flo
            hi += fhi
        return (lo, hi)
    raise UncertifiableLogStar("unsupported term shape for log2 bounds")


def log_star(t: ExpTerm) -> int:
    """L(t): the least k with log2 applied k times pushing the value to <= 1.

    Exact values go through bit inspection; 2-power-structured towers through
    L(2^y) = L(y) + 1; everything else through certified interval bounds on
    log2 of the value, widened on demand. Raises UncertifiableLogStar when no
    strategy certifies an answer.
    """
    t = as_term(t)
    bv = eval_exact(t)
    if bv.is_exact:
        return log_star_int(bv.exact)
    e = _pow2_exponent_term(t)
    if e is not None:
        # every term denotes >= 1 and t is Huge, so the exponent denotes >= 2
        return 1 + log_star(e)
    structural = False
    for prec in PREC_SCHEDULE:
        try:
            lo, hi = _log2_term_scaled(t, prec)
        except UncertifiableLogStar:
            structural = True
            break
        if lo >= 1:
            j = log_star_scaled(lo, hi, prec)
            if j is not None:
                return 1 + j
    if structural and isinstance(t, Power):
        # huge structural exponent over a materializable base: sandwich
        # log2(t) = exp * log2(base) between exp*k and exp*(k+1); for a
        # non-2-power base both bounds are strict, so equal counts certify
        va = _concrete_value(t.base)
        if va is not None and va >= 3:
            k = va.bit_length() - 1
            lo_term = product(Literal(k), t.exponent)
            jlo = log_star(lo_term)
            jhi = log_star(product(Literal(k + 1), t.exponent))
            if jlo == jhi:
                return 1 + jlo
            # L jumps just above each tower number; the sandwiched value is
            # strictly inside, so a tower at the lower endpoint decides it
            if jhi == jlo + 1 and _is_tower_term(lo_term):
                return 1 + jhi
    raise UncertifiableLogStar(
        f"cannot certify log_star of {to_text(t)}"
    )


# ---------------------------------------------------------------------------
# maximal-root exponent l

def _factored_exponent_gcd(t: ExpTerm) -> int:
    """gcd of prime exponents of a product of literal factors."""
    exps: dict = {}
    for f in t.factors:
        if not isinstance(f, Literal):
            raise UnsupportedShape(
                "maximal-root exponent of a huge product needs literal factors"
            )
        for p, e in factorint(f.value).items():
            exps[p] = exps.get(p, 0) + e
    g = 0
    for e in exps.values():
        g = gcd(g, e)
    return g


def max_root_exponent(t: ExpTerm) -> int:
    """l(t) = max{b : value = a^b} = gcd of prime-factorization exponents.

    l(1) = 0 by convention. Huge powers use l(a^b) = l(a)*b, which needs the
    exponent exactly; huge products are combined factorwise when every factor
    is a literal.
    """
    t = as_term(t)
    bv = eval_exact(t)
    if bv.is_exact:
        return gcd_of_exponents(bv.exact)
    if isinstance(t, Power):
        la = max_root_exponent(t.base)
        if la == 0:
            return 0
        ev = eval_exact(t.exponent)
        if ev.is_huge:
            raise ExactnessRequired(
                "exact maximal-root exponent of a power needs an exact exponent"
            )
        return la * ev.exact
    if isinstance(t, Product):
        return _factored_exponent_gcd(t)
    raise UnsupportedShape("huge literal exceeded the evaluation cutoff")


def max_root_exponent_mod(t: ExpTerm, n: int) -> int:
    """l(t) mod n; tolerates huge exponents via l(a^b) = l(a)*b."""
    if n < 1:
        raise ValueError("modulus must be a positive integer")
    t = as_term(t)
    bv = eval_exact(t)
    if bv.is_exact:
        return gcd_of_exponents(bv.exact) % n
    if isinstance(t, Power):
        la = max_root_exponent_mod(t.base, n)
        return la * eval_mod(t.exponent, n) % n
    if isinstance(t, Product):
        return _factored_exponent_gcd(t) % n
    raise UnsupportedShape("huge literal exceeded the evaluation cutoff")


# ---------------------------------------------------------------------------
# p-adic valuation

def nu_p(t: ExpTerm, p: int) -> int:
    """Multiplicity of the prime p in the denoted value."""
    t = as_term(t)
    if isinstance(t, Literal):
        return nu(t.value, p)
    if isinstance(t, Product):
        return sum(nu_p(f, p) for f in t.factors)
    c = nu_p(t.base, p)
    if c == 0:
        return 0
    ev = eval_exact(t.exponent)
    if ev.is_huge:
        raise ExactnessRequired(
            "exact valuation of a power needs an exact exponent"
        )
    return c * ev.exact


# ---------------------------------------------------------------------------
# certified iterated-log comparison

def compare_iter_log(a: ExpTerm, r: int, b: ExpTerm) -> bool:
    """Decide log2 applied r times to a, compared <= b; certified or raised.

    Exact on the power-of-two track (the only place ties can occur);
    elsewhere interval iteration, widened on demand, with a structural
    sandwich for powers whose exponent cannot be materialized.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    a = as_term(a)
    b = as_term(b)
    av = eval_exact(a)
    bv = eval_exact(b)
    if av.is_exact and bv.is_exact:
        return iter_log_le(av.exact, r, bv.exact)
    if r == 0:
        if av.is_exact:
            return True  # a <= cutoff < b
        if bv.is_exact:
            return False  # a > cutoff >= b
        if a == b:
            return True
        for prec in PREC_SCHEDULE:
            try:
                alo, ahi = _log2_term_scaled(a, prec)
                blo, bhi = _log2_term_scaled(b, prec)
            except UncertifiableLogStar:
                break
            if ahi <= blo:
                return True
            if alo > bhi:
                return False
        raise UncertifiableComparison(
            "cannot order two huge terms"
        )
    if av.is_exact:
        # iterated logs never exceed the start value, which is <= cutoff < b
        return True
    e = _pow2_exponent_term(a)
    if e is not None:
        return compare_iter_log(e, r - 1, b)
    structural = False
    for prec in PREC_SCHEDULE:
        try:
            lo, hi = _log2_term_scaled(a, prec)
        except UncertifiableLogStar:
            structural = True
            break
        one = 1 << prec
        undecided = False
        for _ in range(r - 1):
            if hi <= one:
                return True  # already <= 1, later logs only shrink
            if lo <= one:
                undecided = True
                break
            lo, hi = _log2_interval_step(lo, hi, prec)
        if undecided:
            continue
        if bv.is_exact:
            if hi <= bv.exact << prec:
                return True
            if lo > bv.exact << prec:
                return False
        else:
            if hi <= bv.cutoff << prec:
                return True  # <= cutoff < b
            # huge symbolic b: take one more log of both sides
            if lo > one:
                try:
                    tlo, thi = _log2_term_scaled(b, prec)
                except UncertifiableLogStar:
                    continue
                llo, lhi = _log2_interval_step(lo, hi, prec)
                if lhi <= tlo:
                    return True
                if llo > thi:
                    return False
    if structural and isinstance(a, Power):
        va = _concrete_value(a.base)
        if va is not None and va >= 3:
            # log2(a) strictly between exp*k and exp*(k+1); monotone sandwich
            k = va.bit_length() - 1
            try:
                if compare_iter_log(product(Literal(k + 1), a.exponent), r - 1, b):
                    return True
            except UncertifiableComparison:
                pass
            try:
                if not compare_iter_log(product(Literal(k), a.exponent), r - 1, b):
                    return False
            except UncertifiableComparison:
                pass
    raise UncertifiableComparison(
        f"cannot certify iterated-log comparison of {to_text(a)} against {to_text(b)}"
    )
