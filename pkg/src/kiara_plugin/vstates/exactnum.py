# -*- coding: utf-8 -*-

"""Exact arithmetic over rational functions of the inner radius ``b``.

Polynomials and rational functions are backed by *sympy*'s sparse polynomial rings
(``sympy.polys.rings`` / ``sympy.polys.fields``) over ``QQ``, which keep every
fraction in lowest terms. The degenerate inner radius ``b_{2p}`` is the unique root
in (0, 1) of ``b^{2p} + p b^2 - (p - 1)``; it is isolated exactly (Sturm count via
``sympy.Poly.count_roots``, then bisection on dyadic rationals) and numeric values of
elements of ``Q(b)`` are certified with *mpmath* interval arithmetic.
"""

from contextlib import contextmanager
from functools import lru_cache
from typing import Any, Dict, Iterable, Iterator, List, Sequence, Tuple, Union

from mpmath import iv
from pydantic import BaseModel, ConfigDict, Field
from sympy import QQ, Poly, Symbol
from sympy.polys.fields import FracElement, field
from sympy.polys.rings import PolyElement

from kiara.utils import log_message
from kiara_plugin.vstates.defaults import (
    DEFAULT_PRECISION_BITS,
    MAX_ENCLOSURE_REFINEMENTS,
    MIN_PRECISION_BITS,
    ZERO_TEST_PRECISION_BITS,
)
from kiara_plugin.vstates.exceptions import DenominatorVanishes, Inconclusive

B_SYMBOL = Symbol("b")
B_FIELD, _B_GENERATOR = field("b", QQ)
B_RING = B_FIELD.ring

RatLike = Union[int, Any, Tuple[int, int]]


def to_rat(value: RatLike) -> Any:
    """Convert an int, a ``QQ`` element or a ``(numerator, denominator)`` pair to ``QQ``."""

    if isinstance(value, tuple):
        numerator, denominator = value
        if denominator == 0:
            raise ZeroDivisionError("rational with zero denominator")
        return QQ(int(numerator), int(denominator))
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return QQ(value)
    if QQ.of_type(value):
        return value
    raise TypeError(f"Can't convert '{type(value)}' to an exact rational.")


def rat_to_json(value: Any) -> List[str]:
    return [str(int(value.numerator)), str(int(value.denominator))]


class BPoly(object):
    """A polynomial in ``b`` with rational coefficients."""

    __slots__ = ("_poly",)

    def __init__(self, poly: Union[PolyElement, None] = None):
        self._poly: PolyElement = B_RING.zero if poly is None else poly

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[RatLike]) -> "BPoly":
        terms = {(k,): to_rat(c) for k, c in enumerate(coeffs) if to_rat(c) != 0}
        return cls(B_RING.from_dict(terms) if terms else B_RING.zero)

    @classmethod
    def monomial(cls, degree: int, coeff: RatLike = 1) -> "BPoly":
        return cls(B_RING.from_dict({(degree,): to_rat(coeff)}))

    @property
    def element(self) -> PolyElement:
        return self._poly

    @property
    def degree(self) -> int:
        """Degree in ``b``, -1 for the zero polynomial."""

        if not self._poly:
            return -1
        return max(m[0] for m in self._poly.keys())

    @property
    def coeffs(self) -> List[Any]:
        terms = dict(self._poly.items())
        zero = QQ(0)
        return [terms.get((k,), zero) for k in range(self.degree + 1)]

    @property
    def is_zero(self) -> bool:
        return not self._poly

    def rem(self, other: "BPoly") -> "BPoly":
        return BPoly(self._poly.rem(other._poly))

    def __add__(self, other: "BPoly") -> "BPoly":
        return BPoly(self._poly + other._poly)

    def __sub__(self, other: "BPoly") -> "BPoly":
        return BPoly(self._poly - other._poly)

    def __mul__(self, other: "BPoly") -> "BPoly":
        return BPoly(self._poly * other._poly)

    def __neg__(self) -> "BPoly":
        return BPoly(-self._poly)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BPoly):
            return NotImplemented
        return self._poly == other._poly

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._poly.items())))

    def evaluate_rat(self, x: Any) -> Any:
        result = QQ(0)
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def evaluate_float(self, x: float) -> float:
        result = 0.0
        for c in reversed(self.coeffs):
            result = result * x + float(c.numerator) / float(c.denominator)
        return result

    def evaluate_interval(self, x: Any) -> Any:
        result = iv.mpf(0)
        for c in reversed(self.coeffs):
            result = result * x + _rat_interval(c)
        return result

    def to_json(self) -> List[List[str]]:
        return [rat_to_json(c) for c in self.coeffs]

    def __repr__(self) -> str:
        return f"BPoly({self._poly.as_expr()})"


def _rat_interval(value: Any) -> Any:
    return iv.mpf(int(value.numerator)) / iv.mpf(int(value.denominator))


def _as_frac(value: Any) -> FracElement:
    if isinstance(value, BRat):
        return value.element
    if isinstance(value, FracElement):
        return value
    if isinstance(value, BPoly):
        return B_FIELD.new(value.element)
    return B_FIELD.ground_new(to_rat(value))


class BRat(object):
    """A rational function of ``b``, kept in lowest terms."""

    __slots__ = ("_frac",)

    def __init__(self, value: Any = 0):
        self._frac: FracElement = _as_frac(value)

    @classmethod
    def b(cls) -> "BRat":
        return cls(_B_GENERATOR)

    @classmethod
    def from_polys(cls, num: BPoly, den: BPoly) -> "BRat":
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        return cls(B_FIELD.new(num.element, den.element))

    @property
    def element(self) -> FracElement:
        return self._frac

    @property
    def num(self) -> BPoly:
        """Numerator, scaled so that the denominator is monic."""

        lc = self._frac.denom.LC
        return BPoly(self._frac.numer.quo_ground(lc))

    @property
    def den(self) -> BPoly:
        lc = self._frac.denom.LC
        return BPoly(self._frac.denom.quo_ground(lc))

    @property
    def is_zero(self) -> bool:
        return not self._frac.numer

    def __add__(self, other: Any) -> "BRat":
        return BRat(self._frac + _as_frac(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "BRat":
        return BRat(self._frac - _as_frac(other))

    def __rsub__(self, other: Any) -> "BRat":
        return BRat(_as_frac(other) - self._frac)

    def __mul__(self, other: Any) -> "BRat":
        return BRat(self._frac * _as_frac(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "BRat":
        divisor = _as_frac(other)
        if not divisor.numer:
            raise ZeroDivisionError("division by the zero rational function")
        return BRat(self._frac / divisor)

    def __rtruediv__(self, other: Any) -> "BRat":
        if self.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return BRat(_as_frac(other) / self._frac)

    def __neg__(self) -> "BRat":
        return BRat(-self._frac)

    def __pow__(self, exponent: int) -> "BRat":
        if exponent < 0:
            return BRat(1) / BRat(self._frac ** (-exponent))
        return BRat(self._frac**exponent)

    def __eq__(self, other: object) -> bool:
        try:
            difference = self._frac - _as_frac(other)
        except TypeError:
            return NotImplemented
        return not difference.numer

    __hash__ = None  # type: ignore

    def evaluate_float(self, b: float) -> float:
        return self.num.evaluate_float(b) / self.den.evaluate_float(b)

    def to_json(self) -> Dict[str, Any]:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def __repr__(self) -> str:
        return f"BRat({self._frac.as_expr()})"


def relation_poly(p: int) -> BPoly:
    """The defining polynomial ``b^{2p} + p b^2 - (p - 1)`` of ``b_{2p}``."""

    if p < 2:
        raise ValueError(f"Invalid symmetry parameter p={p}: must be >= 2.")
    coeffs: List[RatLike] = [0] * (2 * p + 1)
    coeffs[0] = -(p - 1)
    coeffs[2] = p
    coeffs[2 * p] = 1
    return BPoly.from_coeffs(coeffs)


class AlgRoot(BaseModel):
    """The degenerate inner radius ``b_{2p}``, bracketed by dyadic rationals."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(description="The symmetry parameter, the root solves b^{2p} + p b^2 - (p-1) = 0.", ge=2)
    lower: Tuple[int, int] = Field(description="Lower bracket (numerator, denominator).")
    upper: Tuple[int, int] = Field(description="Upper bracket (numerator, denominator).")
    precision_bits: int = Field(description="Bracket width is at most 2^-precision_bits.")

    @property
    def relation(self) -> BPoly:
        return relation_poly(self.p)

    @property
    def interval(self) -> Tuple[Any, Any]:
        return (to_rat(self.lower), to_rat(self.upper))

    @property
    def midpoint(self) -> Any:
        lo, hi = self.interval
        return (lo + hi) / 2

    def as_float(self) -> float:
        mid = self.midpoint
        return int(mid.numerator) / int(mid.denominator)

    def as_interval(self) -> Any:
        lo, hi = self.interval
        return iv.mpf([_rat_interval(lo).a, _rat_interval(hi).b])

    def to_json(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "lower": [str(x) for x in self.lower],
            "upper": [str(x) for x in self.upper],
            "precision_bits": self.precision_bits,
            "relation": self.relation.to_json(),
        }


def _relation_sign_at_dyadic(p: int, m: int, k: int) -> int:
    # sign of relation(m / 2^k), scaled by 2^(2pk)
    value = m ** (2 * p) + p * m * m * 2 ** ((2 * p - 2) * k) - (p - 1) * 2 ** (2 * p * k)
    return (value > 0) - (value < 0)


@lru_cache(maxsize=64)
def find_b2p(p: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> AlgRoot:
    """Isolate the unique root of the relation in (0, 1) to the requested width."""

    if p < 2:
        raise ValueError(f"Invalid symmetry parameter p={p}: must be >= 2.")
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"Invalid precision '{precision_bits}': must be >= {MIN_PRECISION_BITS}.")

    relation = Poly(B_SYMBOL ** (2 * p) + p * B_SYMBOL**2 - (p - 1), B_SYMBOL, domain=QQ)
    count = relation.count_roots(0, 1)
    if count != 1:
        raise DenominatorVanishes(
            f"Relation for p={p} has {count} roots in [0, 1], expected exactly one."
        )

    # relation(0) < 0 < relation(1); invariant: sign(lo) < 0 < sign(hi)
    lo, hi, k = 0, 1, 0
    while k < precision_bits:
        lo, hi, k = 2 * lo, 2 * hi, k + 1
        mid = lo + 1
        sign = _relation_sign_at_dyadic(p, mid, k)
        if sign == 0:
            lo = hi = mid
            break
        if sign < 0:
            lo = mid
        else:
            hi = mid

    root = AlgRoot(
        p=p, lower=(lo, 2**k), upper=(hi, 2**k), precision_bits=precision_bits
    )
    log_message("exactnum.root.refined", p=p, precision_bits=precision_bits)
    return root


def bpoly_reduce(q: BPoly, p: int) -> BPoly:
    """Remainder of ``q`` modulo the relation of ``b_{2p}``; the result has degree < 2p."""

    return q.rem(relation_poly(p))


def brat_reduce(x: BRat, p: int) -> BRat:
    """Reduce numerator and denominator of ``x`` modulo the relation.

    The value at ``b_{2p}`` is unchanged.
    """

    relation = relation_poly(p)
    num = x.num.rem(relation)
    den = x.den.rem(relation)
    if den.is_zero:
        raise DenominatorVanishes(
            f"Denominator of {x} is divisible by the relation for p={p}."
        )
    return BRat.from_polys(num, den)


@contextmanager
def interval_precision(bits: int) -> Iterator[None]:
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def eval_brat(
    x: BRat, root: AlgRoot, precision_bits: int = DEFAULT_PRECISION_BITS
) -> Any:
    """Certified enclosure of ``x(b_{2p})`` as an *mpmath* interval.

    The bracket of the root is refined until the denominator enclosure excludes zero
    and the result is narrower than ``2^-precision_bits`` (relative to its magnitude).
    """

    bits = max(root.precision_bits, precision_bits + 32)
    current = root
    for _ in range(MAX_ENCLOSURE_REFINEMENTS):
        if current.precision_bits < bits:
            current = find_b2p(root.p, bits)
        with interval_precision(bits + 64):
            b_iv = current.as_interval()
            den = x.den.evaluate_interval(b_iv)
            if den.a <= 0 <= den.b:
                bits *= 2
                continue
            value = x.num.evaluate_interval(b_iv) / den
            scale = max(abs(value.a), abs(value.b), 1)
            if value.delta <= scale * iv.mpf(2) ** (-precision_bits):
                return value
        bits *= 2

    raise DenominatorVanishes(
        f"Can't separate the denominator of {x} from zero at b_{2 * root.p}."
    )


def eval_brat_float(x: BRat, p: int) -> float:
    value = eval_brat(x, find_b2p(p))
    return float(value.mid)


def is_zero_mod_relation(x: BRat, p: int) -> bool:
    """Two-tier zero test: symbolic remainder and an interval enclosure must agree."""

    reduced = bpoly_reduce(x.num, p)
    symbolic_zero = reduced.is_zero
    enclosure = eval_brat(x, find_b2p(p, ZERO_TEST_PRECISION_BITS), ZERO_TEST_PRECISION_BITS)
    encloses_zero = enclosure.a <= 0 <= enclosure.b

    if symbolic_zero and not encloses_zero:
        log_message(
            "exactnum.zero_test.conflict", p=p, value=str(x), enclosure=str(enclosure)
        )
        raise Inconclusive(
            f"Reduced numerator of {x} vanishes but its enclosure excludes zero."
        )
    if not symbolic_zero and encloses_zero:
        log_message("exactnum.zero_test.inconclusive", p=p, value=str(x))
        raise Inconclusive(
            f"Enclosure of {x} contains zero but the reduced numerator does not vanish."
        )
    return symbolic_zero


def brat_from_polys(num: Iterable[RatLike], den: Iterable[RatLike]) -> BRat:
    return BRat.from_polys(BPoly.from_coeffs(list(num)), BPoly.from_coeffs(list(den)))
