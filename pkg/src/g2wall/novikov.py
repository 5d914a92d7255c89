"""Truncated Novikov series with rational exponents and coefficients.

A :class:`NovikovSeries` is a finite sum ``sum c_i q^{a_i}`` together with a
cutoff ``A``: the value is only known modulo ``q^A``.  Exponents are
nonnegative rationals, so the representable elements live in the valuation
ring ``Lambda_{>=0}``; the cutoff may be ``INF`` for exact polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

INF = math.inf

Rational = Union[int, Fraction]
Cutoff = Union[Fraction, float]


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and "p/q" strings exactly (floats are rejected)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def as_cutoff(x) -> Cutoff:
    if x is None:
        return INF
    if isinstance(x, float) and math.isinf(x) and x > 0:
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "+inf"):
        return INF
    c = as_fraction(x)
    if c < 0:
        raise ValueError("cutoff must be nonnegative")
    return c


def fmt_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_cutoff(c: Cutoff) -> str:
    return "inf" if c == INF else fmt_rational(c)


@dataclass(frozen=True)
class NovikovSeries:
    """An element of Lambda_{>=0} known modulo q^cutoff.

    ``terms`` is canonicalized on construction: sorted by exponent, merged,
    zero-free and strictly below the cutoff.  Equality is therefore
    structural (same terms and same cutoff).
    """

    terms: tuple = ()
    cutoff: Cutoff = INF

    def __post_init__(self):
        cut = as_cutoff(self.cutoff)
        acc: dict[Fraction, Fraction] = {}
        for e, c in self.terms:
            e = as_fraction(e)
            c = as_fraction(c)
            if e < 0:
                raise ValueError(f"negative exponent {e}")
            if e >= cut or c == 0:
                continue
            acc[e] = acc.get(e, Fraction(0)) + c
        canon = tuple((e, acc[e]) for e in sorted(acc) if acc[e] != 0)
        object.__setattr__(self, "terms", canon)
        object.__setattr__(self, "cutoff", cut)

    # -- constructors -------------------------------------------------------
    @classmethod
    def _trusted(cls, acc: dict, cut) -> "NovikovSeries":
        # acc maps Fraction exponents below cut to Fraction coefficients; skips validation
        out = object.__new__(cls)
        object.__setattr__(out, "terms", tuple((e, acc[e]) for e in sorted(acc) if acc[e]))
        object.__setattr__(out, "cutoff", cut)
        return out

    @classmethod
    def zero(cls, cutoff: Cutoff = INF) -> "NovikovSeries":
        return cls((), cutoff)

    @classmethod
    def one(cls, cutoff: Cutoff = INF) -> "NovikovSeries":
        return cls(((0, 1),), cutoff)

    @classmethod
    def const(cls, c: Rational, cutoff: Cutoff = INF) -> "NovikovSeries":
        return cls(((0, c),), cutoff)

    @classmethod
    def monomial(cls, coeff: Rational, exp: Rational, cutoff: Cutoff = INF) -> "NovikovSeries":
        return cls(((exp, coeff),), cutoff)

    @classmethod
    def from_dict(cls, d: Mapping, cutoff: Cutoff = INF) -> "NovikovSeries":
        return cls(tuple(d.items()), cutoff)

    # -- inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self):
        """Least exponent with nonzero coefficient; ``INF`` for zero."""
        return self.terms[0][0] if self.terms else INF

    def norm(self) -> float:
        v = self.valuation()
        return 0.0 if v == INF else 2.0 ** (-float(v))

    def leading(self) -> tuple[Fraction, Fraction]:
        if not self.terms:
            raise ValueError("zero series has no leading term")
        return self.terms[0]

    def coeff(self, exp: Rational) -> Fraction:
        e = as_fraction(exp)
        for ee, c in self.terms:
            if ee == e:
                return c
        return Fraction(0)

    def constant_term(self) -> Fraction:
        return self.coeff(0)

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(self.terms)

    def is_unit_one_plus_positive(self) -> bool:
        """True iff the series lies in 1 + Lambda_{>0}."""
        return self.constant_term() == 1

    # -- truncation ---------------------------------------------------------
    def truncate(self, cutoff: Cutoff) -> "NovikovSeries":
        return NovikovSeries(self.terms, min(self.cutoff, as_cutoff(cutoff)))

    def with_cutoff(self, cutoff: Cutoff) -> "NovikovSeries":
        """Reinterpret the same terms at another cutoff (no precision check)."""
        return NovikovSeries(self.terms, as_cutoff(cutoff))

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "NovikovSeries":
        if isinstance(other, NovikovSeries):
            return other
        return NovikovSeries.const(as_fraction(other), INF)

    def __add__(self, other):
        other = self._coerce(other)
        cut = min(self.cutoff, other.cutoff)
        acc = {e: c for e, c in self.terms if e < cut}
        for e, c in other.terms:
            if e < cut:
                acc[e] = acc.get(e, 0) + c
        return NovikovSeries._trusted(acc, cut)

    __radd__ = __add__

    def __neg__(self):
        return NovikovSeries._trusted({e: -c for e, c in self.terms}, self.cutoff)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, NovikovSeries):
            if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
                s = Fraction(other)
                return NovikovSeries._trusted({e: c * s for e, c in self.terms}, self.cutoff)
            return NotImplemented
        cut = min(self.cutoff, other.cutoff)
        if not self.terms or not other.terms:
            return NovikovSeries._trusted({}, cut)
        # integer exponents over a common denominator keep the inner loop cheap
        den = math.lcm(*(e.denominator for e, _ in self.terms + other.terms))
        icut = math.inf if cut == INF else cut * den
        left = [(e.numerator * (den // e.denominator), c) for e, c in self.terms]
        right = [(e.numerator * (den // e.denominator), c) for e, c in other.terms]
        acc: dict[int, Fraction] = {}
        for e1, c1 in left:
            for e2, c2 in right:
                e = e1 + e2
                if e >= icut:
                    break
                acc[e] = acc.get(e, 0) + c1 * c2
        return NovikovSeries._trusted({Fraction(e, den): c for e, c in acc.items()}, cut)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if k < 0:
            return unit_pow(self, k)
        result = NovikovSeries.one(self.cutoff)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, exp: Rational) -> "NovikovSeries":
        """Multiply by q^exp.  Negative shifts are allowed when the result
        stays in Lambda_{>=0}; precision shifts along with the terms."""
        e = as_fraction(exp)
        cut = self.cutoff + e if self.cutoff != INF else INF
        if cut != INF and cut < 0:
            raise ValueError("shift leaves no known precision")
        return NovikovSeries(tuple((ee + e, c) for ee, c in self.terms), cut)

    def inverse(self) -> "NovikovSeries":
        """Inverse of a unit of Lambda_{>=0} (nonzero constant term)."""
        c0 = self.constant_term()
        if c0 == 0:
            raise ValueError("series is not a unit of Lambda_{>=0}")
        return unit_pow(self * (1 / c0), -1) * (1 / c0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if e == 0:
                body = fmt_rational(a)
            else:
                qe = f"q^{fmt_rational(e)}" if e.denominator == 1 else f"q^({fmt_rational(e)})"
                body = qe if a == 1 else f"{fmt_rational(a)}*{qe}"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "terms": [{"exp": fmt_rational(e), "coeff": fmt_rational(c)} for e, c in self.terms],
            "cutoff": fmt_cutoff(self.cutoff),
        }

    @classmethod
    def from_json(cls, obj) -> "NovikovSeries":
        if isinstance(obj, list):
            obj = {"terms": obj, "cutoff": "inf"}
        if not isinstance(obj, dict) or "terms" not in obj:
            raise ValueError("series must be an object with 'terms'")
        terms = []
        for i, t in enumerate(obj["terms"]):
            try:
                terms.append((as_fraction(t["exp"]), as_fraction(t["coeff"])))
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"terms[{i}]: {exc}") from exc
        return cls(tuple(terms), as_cutoff(obj.get("cutoff", "inf")))


# -- module-level operations ---------------------------------------------------

def add(a: NovikovSeries, b: NovikovSeries) -> NovikovSeries:
    return a + b


def mul(a: NovikovSeries, b: NovikovSeries) -> NovikovSeries:
    return a * b


def valuation(a: NovikovSeries):
    return a.valuation()


def _need_finite(a: NovikovSeries, what: str):
    if a.cutoff == INF:
        raise ValueError(f"{what} of a nonconstant series needs a finite cutoff")


def exp_pos(a: NovikovSeries) -> NovikovSeries:
    """exp(a) = sum a^k/k! for a in Lambda_{>0}; lands in 1 + Lambda_{>0}."""
    if a.is_zero():
        return NovikovSeries.one(a.cutoff)
    if a.valuation() <= 0:
        raise ValueError("exp_pos requires positive valuation")
    _need_finite(a, "exp_pos")
    result = NovikovSeries.one(a.cutoff)
    term = NovikovSeries.one(a.cutoff)
    k = 0
    while True:
        k += 1
        term = term * a * Fraction(1, k)
        if term.is_zero():
            return result
        result = result + term


def log_unit(u: NovikovSeries) -> NovikovSeries:
    """log(u) = sum (-1)^{k+1} (u-1)^k / k for u in 1 + Lambda_{>0}."""
    if not u.is_unit_one_plus_positive():
        raise ValueError("log_unit requires u in 1 + Lambda_{>0}")
    r = u - 1
    if r.is_zero():
        return NovikovSeries.zero(u.cutoff)
    _need_finite(u, "log_unit")
    result = NovikovSeries.zero(u.cutoff)
    power = NovikovSeries.one(u.cutoff)
    k = 0
    while True:
        k += 1
        power = power * r
        if power.is_zero():
            return result
        result = result + power * Fraction((-1) ** (k + 1), k)


def unit_pow(u: NovikovSeries, k: int) -> NovikovSeries:
    """u^k for u in 1 + Lambda_{>0} and any integer k."""
    if not u.is_unit_one_plus_positive():
        raise ValueError("unit_pow requires u in 1 + Lambda_{>0}")
    if k >= 0:
        return u ** k
    r = u - 1
    if r.is_zero():
        return NovikovSeries.one(u.cutoff)
    _need_finite(u, "unit_pow with negative exponent")
    inv = NovikovSeries.one(u.cutoff)
    power = NovikovSeries.one(u.cutoff)
    sign = 1
    while True:
        power = power * r
        sign = -sign
        if power.is_zero():
            break
        inv = inv + power * sign
    return inv ** (-k)


def series_from_terms(terms: Iterable, cutoff: Cutoff = INF) -> NovikovSeries:
    return NovikovSeries(tuple(terms), cutoff)


def _known_valuation(a: NovikovSeries):
    v = a.valuation()
    return a.cutoff if v == INF or v > a.cutoff else v


def precise_mul(a: NovikovSeries, b: NovikovSeries) -> NovikovSeries:
    """Product with the sharp precision min(v(a) + cut(b), v(b) + cut(a)).

    The ring product uses the conservative min-cutoff rule; linear algebra
    over the valuation ring needs the sharp bound so that eliminating with a
    pivot of valuation v does not cost v digits of precision.
    """
    va, vb = _known_valuation(a), _known_valuation(b)
    cut = min(va + b.cutoff, vb + a.cutoff)
    ea = a.with_cutoff(INF)
    eb = b.with_cutoff(INF)
    return NovikovSeries((ea * eb).terms, cut)
