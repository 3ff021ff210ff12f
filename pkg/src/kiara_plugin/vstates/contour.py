# -*- coding: utf-8 -*-

"""Exact residue calculus for the Cauchy-type circle integrals.

The integrals ``I_i(phi_j(w))`` over the outer (``i=1``) and inner (``i=2``) boundary
are expanded in the perturbation variables of a [PerturbationScheme][]. After the
substitution ``tau = w * sigma`` every term is a monomial in ``w`` times
``sigma^s / D(sigma)^K``, with ``D`` one of the three canonical denominators, and is
integrated in closed form.
"""

import math
from functools import lru_cache
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Sequence,
    Tuple,
    Union,
)

from sympy.polys.fields import FracElement

from kiara.utils import log_message
from kiara_plugin.vstates.defaults import MAX_EXPANSION_ORDER, CanonicalForm
from kiara_plugin.vstates.exactnum import (
    B_FIELD,
    BRat,
    _as_frac,
    brat_reduce,
    is_zero_mod_relation,
)
from kiara_plugin.vstates.exceptions import PoleOnCircle

Monomial = Tuple[int, ...]
Scalar = Union[int, BRat, FracElement]

_B = B_FIELD.gens[0]
_ONE = B_FIELD.one


class CoefExpr(object):
    """Polynomial in the kernel mixing parameter ``a`` with coefficients in ``Q(b)``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Union[Mapping[int, Any], None] = None):
        self._coeffs: Dict[int, FracElement] = {}
        if coeffs:
            for power, value in coeffs.items():
                frac = _as_frac(value)
                if frac.numer:
                    self._coeffs[power] = frac

    @classmethod
    def _raw(cls, coeffs: Dict[int, FracElement]) -> "CoefExpr":
        obj = cls.__new__(cls)
        obj._coeffs = coeffs
        return obj

    @classmethod
    def constant(cls, value: Any) -> "CoefExpr":
        if isinstance(value, CoefExpr):
            return value
        return cls({0: value})

    @classmethod
    def a(cls) -> "CoefExpr":
        return cls({1: 1})

    @property
    def degree(self) -> int:
        return max(self._coeffs.keys()) if self._coeffs else -1

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    def coefficient(self, power: int) -> BRat:
        return BRat(self._coeffs.get(power, B_FIELD.zero))

    def items(self) -> Iterable[Tuple[int, BRat]]:
        for power in sorted(self._coeffs.keys()):
            yield power, BRat(self._coeffs[power])

    def __add__(self, other: Any) -> "CoefExpr":
        other = CoefExpr.constant(other)
        result = dict(self._coeffs)
        for power, value in other._coeffs.items():
            current = result.get(power)
            total = value if current is None else current + value
            if total.numer:
                result[power] = total
            else:
                result.pop(power, None)
        return CoefExpr._raw(result)

    __radd__ = __add__

    def __neg__(self) -> "CoefExpr":
        return CoefExpr._raw({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other: Any) -> "CoefExpr":
        return self + (-CoefExpr.constant(other))

    def __rsub__(self, other: Any) -> "CoefExpr":
        return CoefExpr.constant(other) - self

    def __mul__(self, other: Any) -> "CoefExpr":
        if not isinstance(other, CoefExpr):
            factor = _as_frac(other)
            if not factor.numer:
                return CoefExpr()
            return CoefExpr._raw({k: v * factor for k, v in self._coeffs.items()})

        result: Dict[int, FracElement] = {}
        for p1, v1 in self._coeffs.items():
            for p2, v2 in other._coeffs.items():
                power = p1 + p2
                prod = v1 * v2
                current = result.get(power)
                result[power] = prod if current is None else current + prod
        return CoefExpr._raw({k: v for k, v in result.items() if v.numer})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, BRat, FracElement)):
            other = CoefExpr.constant(other)
        if not isinstance(other, CoefExpr):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore

    def evaluate(self, a: Any) -> BRat:
        """Substitute an exact value for ``a``."""

        # Horner; sympy refuses 0**0
        value = _as_frac(a)
        result = B_FIELD.zero
        for power in range(self.degree, -1, -1):
            result = result * value + self._coeffs.get(power, B_FIELD.zero)
        return BRat(result)

    def evaluate_float(self, a: float, b: float) -> float:
        return sum(
            BRat(coeff).evaluate_float(b) * a**power
            for power, coeff in self._coeffs.items()
        )

    def reduce_mod(self, p: int) -> "CoefExpr":
        """Reduce every coefficient modulo the relation of ``b_{2p}``."""

        return CoefExpr(
            {k: brat_reduce(BRat(v), p).element for k, v in self._coeffs.items()}
        )

    def is_zero_mod_relation(self, p: int) -> bool:
        return all(is_zero_mod_relation(BRat(v), p) for v in self._coeffs.values())

    def to_json(self) -> Dict[str, Any]:
        return {str(k): v.to_json() for k, v in self.items()}

    def __repr__(self) -> str:
        parts = [f"({v.element.as_expr()})*a^{k}" for k, v in self.items()]
        return "CoefExpr(" + " + ".join(parts or ["0"]) + ")"


class LaurentPoly(object):
    """A finite sum ``sum_k c_k w^k`` on the unit circle, ``w^{-1}`` standing for ``conj(w)``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping[int, Any], None] = None):
        self._terms: Dict[int, CoefExpr] = {}
        if terms:
            for exponent, value in terms.items():
                coeff = CoefExpr.constant(value)
                if not coeff.is_zero:
                    self._terms[exponent] = coeff

    @classmethod
    def monomial(cls, exponent: int, coeff: Any = 1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def exponents(self) -> List[int]:
        return sorted(self._terms.keys())

    def items(self) -> Iterable[Tuple[int, CoefExpr]]:
        for exponent in self.exponents:
            yield exponent, self._terms[exponent]

    def coefficient(self, exponent: int) -> CoefExpr:
        return self._terms.get(exponent, CoefExpr())

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        result = dict(self._terms)
        for exponent, coeff in other._terms.items():
            current = result.get(exponent)
            result[exponent] = coeff if current is None else current + coeff
        return LaurentPoly(result)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: Any) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            factor = CoefExpr.constant(other)
            return LaurentPoly({k: v * factor for k, v in self._terms.items()})
        result: Dict[int, CoefExpr] = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                prod = v1 * v2
                current = result.get(k1 + k2)
                result[k1 + k2] = prod if current is None else current + prod
        return LaurentPoly(result)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore

    def conj(self) -> "LaurentPoly":
        """Complex conjugate on ``|w| = 1`` for real coefficients."""

        return LaurentPoly({-k: v for k, v in self._terms.items()})

    def derivative(self) -> "LaurentPoly":
        return LaurentPoly({k - 1: v * k for k, v in self._terms.items() if k != 0})

    def shift(self, offset: int) -> "LaurentPoly":
        return LaurentPoly({k + offset: v for k, v in self._terms.items()})

    def map_coeffs(self, func: Any) -> "LaurentPoly":
        return LaurentPoly({k: func(v) for k, v in self._terms.items()})

    def to_json(self) -> Dict[str, Any]:
        return {str(k): v.to_json() for k, v in self.items()}

    def __repr__(self) -> str:
        return f"LaurentPoly({dict(self.items())})"


class Direction(NamedTuple):
    """A boundary perturbation, one Laurent polynomial per boundary component."""

    outer: LaurentPoly
    inner: LaurentPoly

    def component(self, j: int) -> LaurentPoly:
        return self.outer if j == 1 else self.inner

    @property
    def is_zero(self) -> bool:
        return self.outer.is_zero and self.inner.is_zero

    def __add__(self, other: "Direction") -> "Direction":  # type: ignore
        return Direction(self.outer + other.outer, self.inner + other.inner)

    def __sub__(self, other: "Direction") -> "Direction":
        return Direction(self.outer - other.outer, self.inner - other.inner)

    def __neg__(self) -> "Direction":
        return Direction(-self.outer, -self.inner)

    def scale(self, factor: Any) -> "Direction":
        return Direction(self.outer * factor, self.inner * factor)

    def map_coeffs(self, func: Any) -> "Direction":
        return Direction(self.outer.map_coeffs(func), self.inner.map_coeffs(func))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Direction):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore


def zero_direction() -> Direction:
    return Direction(LaurentPoly(), LaurentPoly())


class YElement(object):
    """Coefficients ``B_n`` of ``e_n = Im(conj(w)^n)`` for both components."""

    __slots__ = ("_components",)

    def __init__(
        self,
        first: Union[Mapping[int, Any], None] = None,
        second: Union[Mapping[int, Any], None] = None,
    ):
        components = []
        for comp in (first, second):
            clean: Dict[int, CoefExpr] = {}
            for n, value in (comp or {}).items():
                if n < 1:
                    raise ValueError(f"Invalid frequency '{n}': must be >= 1.")
                coeff = CoefExpr.constant(value)
                if not coeff.is_zero:
                    clean[n] = coeff
            components.append(clean)
        self._components: Tuple[Dict[int, CoefExpr], Dict[int, CoefExpr]] = (
            components[0],
            components[1],
        )

    @classmethod
    def from_laurent(cls, first: LaurentPoly, second: LaurentPoly) -> "YElement":
        """Imaginary part of real-coefficient Laurent polynomials: ``B_n = c_{-n} - c_n``."""

        comps = []
        for poly in (first, second):
            result: Dict[int, CoefExpr] = {}
            for k, c in poly.items():
                if k == 0:
                    continue
                n = abs(k)
                value = c if k < 0 else -c
                result[n] = result[n] + value if n in result else value
            comps.append(result)
        return cls(comps[0], comps[1])

    def component(self, j: int) -> Dict[int, CoefExpr]:
        return dict(self._components[j - 1])

    def coefficient(self, j: int, n: int) -> CoefExpr:
        return self._components[j - 1].get(n, CoefExpr())

    @property
    def frequencies(self) -> List[int]:
        return sorted(set(self._components[0]) | set(self._components[1]))

    @property
    def is_zero(self) -> bool:
        return not self._components[0] and not self._components[1]

    def __add__(self, other: "YElement") -> "YElement":
        comps = []
        for mine, theirs in zip(self._components, other._components):
            result = dict(mine)
            for n, c in theirs.items():
                result[n] = result[n] + c if n in result else c
            comps.append(result)
        return YElement(comps[0], comps[1])

    def __neg__(self) -> "YElement":
        return self.scale(-1)

    def __sub__(self, other: "YElement") -> "YElement":
        return self + (-other)

    def scale(self, factor: Any) -> "YElement":
        return YElement(
            {n: c * factor for n, c in self._components[0].items()},
            {n: c * factor for n, c in self._components[1].items()},
        )

    def reduce_mod(self, p: int) -> "YElement":
        return YElement(
            {n: c.reduce_mod(p) for n, c in self._components[0].items()},
            {n: c.reduce_mod(p) for n, c in self._components[1].items()},
        )

    def is_zero_mod_relation(self, p: int) -> bool:
        return all(
            c.is_zero_mod_relation(p) for comp in self._components for c in comp.values()
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "first": {str(n): c.to_json() for n, c in sorted(self._components[0].items())},
            "second": {str(n): c.to_json() for n, c in sorted(self._components[1].items())},
        }

    def __repr__(self) -> str:
        return f"YElement({self._components[0]}, {self._components[1]})"


class PerturbationScheme(object):
    """Perturbation directions attached to monomials in the expansion variables.

    By default direction ``l`` is attached to the ``l``-th variable. Jets attach several
    directions to monomials of the pair ``(delta_lambda, t)``.
    """

    def __init__(
        self,
        p: int,
        directions: Sequence[Direction],
        exponents: Union[Sequence[Monomial], None] = None,
    ):
        if p < 2:
            raise ValueError(f"Invalid symmetry parameter p={p}: must be >= 2.")

        for direction in directions:
            for poly in direction:
                for k in poly.exponents:
                    if k >= 0 or k % 2 == 0:
                        raise ValueError(
                            f"Invalid direction exponent {k}: two-fold perturbations are supported on -(2n-1)."
                        )

        if exponents is None:
            size = len(directions)
            exponents = [
                tuple(1 if i == l else 0 for i in range(size)) for l in range(size)
            ]
        if len(exponents) != len(directions):
            raise ValueError("Number of monomials must match number of directions.")

        self.p = p
        self.directions: List[Direction] = list(directions)
        self.exponents: List[Monomial] = [tuple(e) for e in exponents]
        self.num_variables = len(self.exponents[0]) if self.exponents else 0
        for mono in self.exponents:
            if len(mono) != self.num_variables or sum(mono) < 1:
                raise ValueError(f"Invalid monomial {mono} for a perturbation direction.")

    @property
    def zero(self) -> Monomial:
        return tuple([0] * self.num_variables)


class _Truncation(object):
    def __init__(self, limit: Union[Monomial, None], total: Union[int, None]):
        self.limit = tuple(limit) if limit is not None else None
        if total is None:
            if limit is None:
                raise ValueError("Either a multi-index limit or a total order is required.")
            total = sum(limit)
        self.total = total

    def admits(self, mono: Monomial) -> bool:
        if sum(mono) > self.total:
            return False
        if self.limit is not None:
            return all(m <= l for m, l in zip(mono, self.limit))
        return True


_Series = Dict[Monomial, Dict[Tuple[int, int], CoefExpr]]


def _accumulate(target: Dict[Any, CoefExpr], key: Any, value: CoefExpr) -> None:
    current = target.get(key)
    target[key] = value if current is None else current + value


def _series_mul(x: _Series, y: _Series, trunc: _Truncation) -> _Series:
    out: _Series = {}
    for mx, px in x.items():
        for my, py in y.items():
            mono = tuple(i + j for i, j in zip(mx, my))
            if not trunc.admits(mono):
                continue
            target = out.setdefault(mono, {})
            for (ew1, es1), c1 in px.items():
                for (ew2, es2), c2 in py.items():
                    _accumulate(target, (ew1 + ew2, es1 + es2), c1 * c2)
    return _prune(out)


def _prune(series: _Series) -> _Series:
    result: _Series = {}
    for mono, poly in series.items():
        clean = {k: v for k, v in poly.items() if not v.is_zero}
        if clean:
            result[mono] = clean
    return result


def _radius(j: int) -> FracElement:
    if j not in (1, 2):
        raise ValueError(f"Invalid boundary component '{j}': must be 1 or 2.")
    return _ONE if j == 1 else _B


def _binomial(n: int, k: int) -> int:
    """Generalized binomial coefficient, ``n`` any integer and ``k >= 0``."""

    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k)
    return (-1) ** k * math.comb(-n + k - 1, k)


@lru_cache(maxsize=None)
def _canonical_value(n: int, k3: int, form: CanonicalForm) -> FracElement:
    if k3 < 1:
        raise ValueError(f"Invalid denominator power '{k3}': must be >= 1.")

    if form == CanonicalForm.SELF:
        if n < k3 - 1:
            return B_FIELD.zero
        return B_FIELD.ground_new((-1) ** k3 * math.comb(n, k3 - 1))
    if form == CanonicalForm.OUTER_AT_INNER:
        if n < k3 - 1:
            return B_FIELD.zero
        return (-1) ** k3 * math.comb(n, k3 - 1) * _B ** (n - k3 + 1)
    if n > -1:
        return B_FIELD.zero
    m = -n - 1
    return math.comb(k3 - 1 + m, m) * _B**m


def canonical_integral(k1: int, k2: int, k3: int, form: CanonicalForm) -> BRat:
    """``(1/2 pi i) * contour integral of tau^k1 conj(tau)^k2 / D(tau)^k3`` over the unit circle.

    ``D`` is ``1 - tau`` (SELF, the pole at 1 counted as enclosed), ``b - tau``
    (OUTER_AT_INNER) or ``1 - b tau`` (INNER_AT_OUTER).
    """

    if k1 < 0 or k2 < 0:
        raise ValueError(f"Invalid exponents ({k1}, {k2}): must be non-negative.")
    return BRat(_canonical_value(k1 - k2, k3, form))


def integrate_rational(
    terms: Iterable[Tuple[Any, int, int, int, CanonicalForm]]
) -> CoefExpr:
    """Linear combination of canonical integrals with ``CoefExpr`` weights."""

    result = CoefExpr()
    for coeff, k1, k2, k3, form in terms:
        value = canonical_integral(k1, k2, k3, form)
        if value.is_zero:
            continue
        result = result + CoefExpr.constant(coeff) * value
    return result


def _form_for(source: int, target: int) -> CanonicalForm:
    if source == target:
        return CanonicalForm.SELF
    if source == 1:
        return CanonicalForm.OUTER_AT_INNER
    return CanonicalForm.INNER_AT_OUTER


def _check_regular(
    entries: List[Tuple[int, int, CoefExpr]], mono: Monomial, w_exponent: int
) -> None:
    """The sum of ``c sigma^s / (1-sigma)^K`` must have no pole at ``sigma = 1``."""

    k_max = max(k for _, k, _ in entries)
    for order in range(k_max):
        total = CoefExpr()
        for s, k, c in entries:
            shift = k_max - k
            if order < shift:
                continue
            weight = _binomial(s, order - shift) * (-1) ** (order - shift)
            if weight:
                total = total + c * weight
        if not total.is_zero:
            log_message(
                "contour.pole_check.failed",
                monomial=mono,
                w_exponent=w_exponent,
                order=order,
            )
            raise PoleOnCircle(
                f"Non-removable pole at sigma=1 for monomial {mono}, w^{w_exponent}."
            )


def _order_cap(trunc: _Truncation, max_order: int) -> None:
    if trunc.total > max_order:
        raise ValueError(
            f"Expansion order {trunc.total} exceeds the supported maximum {max_order}."
        )


def cauchy_series(
    scheme: PerturbationScheme,
    source: int,
    target: int,
    limit: Union[Monomial, None] = None,
    total: Union[int, None] = None,
    max_order: int = MAX_EXPANSION_ORDER,
) -> Dict[Monomial, LaurentPoly]:
    """Taylor coefficients of ``I_source(phi_target)`` in the scheme's variables.

    ``phi_j(w) = b_j w + sum_l (prod of variables)^{mono_l} d_l^j(w)``; only monomials
    admitted by the componentwise ``limit`` and the ``total`` order are kept.
    """

    trunc = _Truncation(limit, total)
    _order_cap(trunc, max_order)

    b_i = _radius(source)
    b_j = _radius(target)
    zero = scheme.zero

    num: _Series = {
        zero: {
            (-1, 0): CoefExpr.constant(b_j),
            (-1, -1): CoefExpr.constant(-b_i),
        }
    }
    diff: _Series = {}
    dphi: _Series = {zero: {(0, 0): CoefExpr.constant(b_i)}}

    for direction, mono in zip(scheme.directions, scheme.exponents):
        if not trunc.admits(mono):
            continue
        d_target = direction.component(target)
        d_source = direction.component(source)
        num_terms = num.setdefault(mono, {})
        diff_terms = diff.setdefault(mono, {})
        dphi_terms = dphi.setdefault(mono, {})
        for k, c in d_target.items():
            _accumulate(num_terms, (-k, 0), c)
            _accumulate(diff_terms, (k, 0), c)
        for k, c in d_source.items():
            _accumulate(num_terms, (-k, -k), -c)
            _accumulate(diff_terms, (k, k), -c)
            _accumulate(dphi_terms, (k - 1, k - 1), c * k)

    num, diff, dphi = _prune(num), _prune(diff), _prune(dphi)
    numerator = _series_mul(num, dphi, trunc)

    grouped: Dict[Tuple[Monomial, int], List[Tuple[int, int, CoefExpr]]] = {}
    power: _Series = {zero: {(0, 0): CoefExpr.constant(1)}}
    for k in range(trunc.total + 1):
        if k > 0:
            power = _series_mul(power, diff, trunc)
            if not power:
                break
        term = _series_mul(numerator, power, trunc)
        sign = -1 if k % 2 else 1
        for mono, poly in term.items():
            for (ew, es), c in poly.items():
                grouped.setdefault((mono, ew - k), []).append((es, k + 1, c * sign))

    form = _form_for(source, target)
    result: Dict[Monomial, Dict[int, CoefExpr]] = {}
    for (mono, w_exponent), entries in grouped.items():
        if form == CanonicalForm.SELF:
            # 1/(b_i - b_i sigma)^K = b_i^-K / (1 - sigma)^K
            entries = [(s, k, c * b_i ** (-k)) for s, k, c in entries]
            _check_regular(entries, mono, w_exponent)
        value = CoefExpr()
        for s, k, c in entries:
            integral = _canonical_value(s, k, form)
            if integral.numer:
                value = value + c * integral
        if not value.is_zero:
            _accumulate(result.setdefault(mono, {}), w_exponent, value)

    return {mono: LaurentPoly(terms) for mono, terms in result.items() if terms}


def _factorial(mono: Monomial) -> int:
    return math.prod(math.factorial(m) for m in mono)


def expand_cauchy(
    scheme: PerturbationScheme,
    source: int,
    target: int,
    multi_order: Monomial,
    max_order: int = MAX_EXPANSION_ORDER,
) -> LaurentPoly:
    """Exact mixed partial derivative of ``I_source(phi_target)`` at the annulus."""

    multi_order = tuple(multi_order)
    if len(multi_order) != scheme.num_variables:
        raise ValueError(
            f"Multi-index {multi_order} doesn't match {scheme.num_variables} variables."
        )
    series = cauchy_series(
        scheme, source, target, limit=multi_order, max_order=max_order
    )
    coefficient = series.get(multi_order, LaurentPoly())
    return coefficient * _factorial(multi_order)


def _laurent_mul(
    x: Dict[Monomial, LaurentPoly],
    y: Dict[Monomial, LaurentPoly],
    trunc: _Truncation,
) -> Dict[Monomial, LaurentPoly]:
    out: Dict[Monomial, LaurentPoly] = {}
    for mx, px in x.items():
        for my, py in y.items():
            mono = tuple(i + j for i, j in zip(mx, my))
            if not trunc.admits(mono):
                continue
            prod = px * py
            out[mono] = out[mono] + prod if mono in out else prod
    return {k: v for k, v in out.items() if not v.is_zero}


def lambda_degenerate_exact() -> BRat:
    """``lambda_{2p} = (1 + b^2) / 2`` as an element of ``Q(b)``."""

    b = BRat.b()
    return (1 + b * b) / 2


def g_series(
    scheme: PerturbationScheme,
    lambda_order: int,
    limit: Union[Monomial, None] = None,
    total: Union[int, None] = None,
    max_order: int = MAX_EXPANSION_ORDER,
) -> Dict[Monomial, YElement]:
    """Taylor coefficients of ``d^lambda_order/d lambda^lambda_order G`` at ``lambda_{2p}``.

    ``G_j = Im{[(1-lambda) conj(phi_j) + I_1(phi_j) - I_2(phi_j)] w phi_j'}`` is affine
    in lambda, so only orders 0 and 1 are non-trivial.
    """

    if lambda_order < 0:
        raise ValueError(f"Invalid lambda order '{lambda_order}'.")
    trunc = _Truncation(limit, total)
    if lambda_order > 1:
        return {}

    zero = scheme.zero
    factor = (1 - lambda_degenerate_exact()).element if lambda_order == 0 else -_ONE

    per_component: List[Dict[Monomial, LaurentPoly]] = []
    for j in (1, 2):
        b_j = _radius(j)
        outer_part: Dict[Monomial, LaurentPoly] = {
            zero: LaurentPoly.monomial(-1, factor * b_j)
        }
        tangent: Dict[Monomial, LaurentPoly] = {zero: LaurentPoly.monomial(1, b_j)}
        for direction, mono in zip(scheme.directions, scheme.exponents):
            if not trunc.admits(mono):
                continue
            d = direction.component(j)
            conj_part = d.conj() * factor
            outer_part[mono] = outer_part[mono] + conj_part if mono in outer_part else conj_part
            # w * d'(w)
            dw = d.derivative().shift(1)
            tangent[mono] = tangent[mono] + dw if mono in tangent else dw

        if lambda_order == 0:
            own = cauchy_series(scheme, 1, j, limit=limit, total=total, max_order=max_order)
            other = cauchy_series(scheme, 2, j, limit=limit, total=total, max_order=max_order)
            for mono in set(own) | set(other):
                value = own.get(mono, LaurentPoly()) - other.get(mono, LaurentPoly())
                outer_part[mono] = outer_part[mono] + value if mono in outer_part else value

        per_component.append(_laurent_mul(outer_part, tangent, trunc))

    result: Dict[Monomial, YElement] = {}
    for mono in set(per_component[0]) | set(per_component[1]):
        element = YElement.from_laurent(
            per_component[0].get(mono, LaurentPoly()),
            per_component[1].get(mono, LaurentPoly()),
        )
        if not element.is_zero:
            result[mono] = element
    return result


def derivative_G(
    scheme: PerturbationScheme,
    lambda_order: int,
    multi_order: Monomial,
    max_order: int = MAX_EXPANSION_ORDER,
) -> YElement:
    """Exact ``d_lambda^lambda_order d^multi_order G(lambda_{2p}, 0)`` along the scheme."""

    multi_order = tuple(multi_order)
    if len(multi_order) != scheme.num_variables:
        raise ValueError(
            f"Multi-index {multi_order} doesn't match {scheme.num_variables} variables."
        )
    series = g_series(scheme, lambda_order, limit=multi_order, max_order=max_order)
    coefficient = series.get(multi_order, YElement())
    return coefficient.scale(_factorial(multi_order))
