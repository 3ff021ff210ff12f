# -*- coding: utf-8 -*-

"""Fourier multipliers of the linearized functional at the annulus.

``d_f G(lambda, 0)`` maps the mode ``A_n conj(w)^{2n-1}`` (one coefficient per
boundary component) to ``M_{2n}(lambda) A_n e_{2n}``. At ``lambda_{2p} = (1+b^2)/2``
and ``b = b_{2p}`` the blocks ``n = 1`` and ``n = p`` are singular; their kernel and
co-kernel vectors span the two-dimensional reduced problem.
"""

import math
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kiara.utils import log_message
from kiara_plugin.vstates.contour import (
    CoefExpr,
    Direction,
    LaurentPoly,
    YElement,
    lambda_degenerate_exact,
)
from kiara_plugin.vstates.exactnum import (
    BPoly,
    BRat,
    bpoly_reduce,
    eval_brat,
    find_b2p,
    is_zero_mod_relation,
)
from kiara_plugin.vstates.exceptions import SingularBlock
from kiara_plugin.vstates.spectral import FourierState, YCoeffs

SQRT2 = math.sqrt(2.0)
SINGULAR_DET_THRESHOLD = 1e-14


class Mult2(BaseModel):
    """The 2x2 multiplier ``M_n(lambda)`` of absolute frequency ``n``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(description="Absolute frequency.", ge=1)
    entries: Tuple[Tuple[Any, Any], Tuple[Any, Any]]

    def det(self) -> Any:
        (m11, m12), (m21, m22) = self.entries
        return m11 * m22 - m12 * m21

    def apply(self, vector: Tuple[Any, Any]) -> Tuple[Any, Any]:
        (m11, m12), (m21, m22) = self.entries
        x, y = vector
        return (m11 * x + m12 * y, m21 * x + m22 * y)

    def solve(self, vector: Tuple[Any, Any]) -> Tuple[Any, Any]:
        """Cramer's rule; callers make sure the block is regular."""

        (m11, m12), (m21, m22) = self.entries
        x, y = vector
        det = self.det()
        return ((m22 * x - m12 * y) / det, (m11 * y - m21 * x) / det)


def multiplier(n: int, lam: Any, b: Any) -> Mult2:
    """``[[n lam - 1 - n b^2, b^{n+1}], [-b^n, b (n lam - n + 1)]]``."""

    if n < 1:
        raise ValueError(f"Invalid frequency '{n}': must be >= 1.")
    entries = (
        (n * lam - 1 - n * b * b, b ** (n + 1)),
        (-(b**n), b * (n * lam - n + 1)),
    )
    return Mult2(n=n, entries=entries)


def lambda_degenerate(b: Any) -> Any:
    """``lambda_{2p} = (1 + b^2) / 2`` for a float or an exact ``b``."""

    return (1 + b * b) / 2


def angular_velocity(lam: float) -> float:
    return (1.0 - lam) / 2.0


def lambda_from_angular_velocity(omega: float) -> float:
    return 1.0 - 2.0 * omega


def dispersion(m: int, lam: Any, b: Any) -> Any:
    """``((1-lam) + b^2 + m (b^2 - lam)) (m (1-lam) - lam) + b^{2m+2}``.

    ``m`` is offset by one from the Fourier frequency: at ``(lambda_{2p}, b_{2p})`` the zeros
    sit at ``m = 1`` (frequency 2, for every ``b``) and ``m = 2p - 1`` (frequency ``2p``).
    """

    if m < 0:
        raise ValueError(f"Invalid mode '{m}': must be >= 0.")
    return ((1 - lam) + b * b + m * (b * b - lam)) * (m * (1 - lam) - lam) + b ** (
        2 * m + 2
    )


class KernelPair(NamedTuple):
    """``x1 = (b, 1) conj(w)`` and ``x2 = (b, -1) conj(w)^{2p-1}``."""

    p: int
    x1: Direction
    x2: Direction

    def xa(self, a: Any) -> Direction:
        return self.x1 + self.x2.scale(CoefExpr.constant(a))


def kernel_pair(p: int) -> KernelPair:
    b = BRat.b()
    x1 = Direction(LaurentPoly.monomial(-1, b), LaurentPoly.monomial(-1, 1))
    x2 = Direction(
        LaurentPoly.monomial(-(2 * p - 1), b), LaurentPoly.monomial(-(2 * p - 1), -1)
    )
    return KernelPair(p=p, x1=x1, x2=x2)


def kernel_state(p: int, a: float, b: float, N: int) -> FourierState:
    """``x_a = x1 + a x2`` as a numeric Fourier state."""

    if N < p:
        raise ValueError(f"Truncation N={N} can't hold the kernel mode of p={p}.")
    coefficients = np.zeros((2, N))
    coefficients[:, 0] = (b, 1.0)
    coefficients[:, p - 1] += (a * b, -a)
    return FourierState(p=p, b=b, coefficients=coefficients)


class CoKernelPair(NamedTuple):
    """Unit vectors ``y1 = (1, -1)/sqrt2 e_2`` and ``y2 = -(1, 1)/sqrt2 e_{2p}``."""

    p: int
    y1: Tuple[float, float]
    y2: Tuple[float, float]

    @property
    def frequencies(self) -> Tuple[int, int]:
        return (2, 2 * self.p)


def co_kernel_pair(p: int) -> CoKernelPair:
    return CoKernelPair(p=p, y1=(1 / SQRT2, -1 / SQRT2), y2=(-1 / SQRT2, -1 / SQRT2))


class SqrtTwoMultiple(object):
    """An exact value ``sqrt(2) * r`` with ``r`` in ``Q(b)[a]``."""

    __slots__ = ("rational",)

    def __init__(self, rational: Any = 0):
        self.rational: CoefExpr = CoefExpr.constant(rational)

    @property
    def is_zero(self) -> bool:
        return self.rational.is_zero

    def __add__(self, other: "SqrtTwoMultiple") -> "SqrtTwoMultiple":
        return SqrtTwoMultiple(self.rational + other.rational)

    def __sub__(self, other: "SqrtTwoMultiple") -> "SqrtTwoMultiple":
        return SqrtTwoMultiple(self.rational - other.rational)

    def __neg__(self) -> "SqrtTwoMultiple":
        return SqrtTwoMultiple(-self.rational)

    def scale(self, factor: Any) -> "SqrtTwoMultiple":
        return SqrtTwoMultiple(self.rational * factor)

    def is_zero_mod_relation(self, p: int) -> bool:
        return self.rational.is_zero_mod_relation(p)

    def evaluate_at(self, a: Any) -> "SqrtTwoMultiple":
        """Substitute an exact value for ``a``."""

        return SqrtTwoMultiple(self.rational.evaluate(a))

    def matches(self, other: "SqrtTwoMultiple", p: int) -> bool:
        return (self - other).is_zero_mod_relation(p)

    def evaluate_float(self, p: int, a: float = 0.0) -> float:
        """Value at ``b_{2p}``, each ``Q(b)`` coefficient through a certified enclosure."""

        root = find_b2p(p)
        total = 0.0
        for power, coeff in self.rational.items():
            total += float(eval_brat(coeff, root).mid) * a**power
        return SQRT2 * total

    def to_json(self) -> Dict[str, Any]:
        return {"sqrt2_times": self.rational.to_json()}

    def __repr__(self) -> str:
        return f"sqrt2*{self.rational!r}"


class Projection(NamedTuple):
    q1: Any
    q2: Any
    remainder: Any


def _project_symbolic(k: YElement, p: int) -> Projection:
    for n in k.frequencies:
        if n % 2:
            raise ValueError(f"Can't project odd frequency {n}: input must be two-fold.")

    first_1, second_1 = k.coefficient(1, 2), k.coefficient(2, 2)
    first_p, second_p = k.coefficient(1, 2 * p), k.coefficient(2, 2 * p)

    r1 = (first_1 - second_1) * BRat((1, 2))
    r2 = -(first_p + second_p) * BRat((1, 2))

    correction = YElement({2: r1}, {2: -r1}) + YElement({2 * p: -r2}, {2 * p: -r2})
    remainder = k - correction
    return Projection(SqrtTwoMultiple(r1), SqrtTwoMultiple(r2), remainder)


def _project_numeric(k: YCoeffs, p: int) -> Projection:
    first = k.block(1)
    degenerate = k.block(p)
    q1 = float(first[0] - first[1]) / SQRT2
    q2 = -float(degenerate[0] + degenerate[1]) / SQRT2

    coefficients = k.coefficients.copy()
    if coefficients.shape[1] > 2 * p:
        coefficients[:, 2] -= q1 * np.asarray((1 / SQRT2, -1 / SQRT2))
        coefficients[:, 2 * p] -= q2 * np.asarray((-1 / SQRT2, -1 / SQRT2))
    remainder = YCoeffs(
        p=k.p, b=k.b, coefficients=coefficients, cosine_residual=k.cosine_residual
    )
    return Projection(q1, q2, remainder)


def project(k: Union[YElement, YCoeffs], p: int) -> Projection:
    """Components of ``k`` along the co-kernel vectors ``y1``, ``y2`` and the remainder.

    Exact inputs give ``q1``/``q2`` as [SqrtTwoMultiple][] values; numeric inputs give floats.
    """

    if isinstance(k, YElement):
        return _project_symbolic(k, p)
    if isinstance(k, YCoeffs):
        return _project_numeric(k, p)
    raise TypeError(f"Can't project object of type '{type(k)}'.")


@lru_cache(maxsize=None)
def _block_det(p: int, n: int) -> BRat:
    return multiplier(2 * n, lambda_degenerate_exact(), BRat.b()).det()


@lru_cache(maxsize=None)
def _assert_regular_block(p: int, n: int) -> None:
    det = _block_det(p, n)
    enclosure = eval_brat(det, find_b2p(p))
    if enclosure.a <= 0 <= enclosure.b:
        log_message("linearization.block.singular", p=p, block=n)
        raise SingularBlock(
            f"Multiplier block {n} is singular at b_{2 * p}.", block=n
        )


def _invert_symbolic(k: YElement, p: int) -> Direction:
    b = BRat.b()
    lam = lambda_degenerate_exact()
    outer: Dict[int, CoefExpr] = {}
    inner: Dict[int, CoefExpr] = {}

    for freq in k.frequencies:
        if freq % 2:
            raise ValueError(f"Can't invert odd frequency {freq}: input must be two-fold.")
        n = freq // 2
        first, second = k.coefficient(1, freq), k.coefficient(2, freq)
        exponent = -(2 * n - 1)
        if n == 1:
            beta = (first + second) * BRat((1, 2))
            outer[exponent] = beta * (-1 / (b * b))
        elif n == p:
            beta = (first - second) * BRat((1, 2))
            outer[exponent] = beta * (1 / b ** (2 * p))
        else:
            _assert_regular_block(p, n)
            block = multiplier(2 * n, lam, b)
            det = _block_det(p, n)
            (m11, m12), (m21, m22) = block.entries
            outer[exponent] = (first * m22 - second * m12) * (1 / det)
            inner[exponent] = (second * m11 - first * m21) * (1 / det)

    return Direction(LaurentPoly(outer), LaurentPoly(inner))


def _invert_numeric(k: YCoeffs, p: int, N: int) -> FourierState:
    b = k.b
    lam = lambda_degenerate(b)
    blocks = np.arange(1, N + 1)
    freqs = 2 * blocks
    data = np.zeros((2, N))
    available = np.minimum(freqs, k.max_frequency)
    values = k.coefficients[:, available] * (freqs <= k.max_frequency)

    m11 = freqs * lam - 1 - freqs * b * b
    m12 = b ** (freqs + 1)
    m21 = -(b**freqs)
    m22 = b * (freqs * lam - freqs + 1)
    det = m11 * m22 - m12 * m21

    regular = (blocks != 1) & (blocks != p)
    small = regular & (np.abs(det) < SINGULAR_DET_THRESHOLD)
    if np.any(small):
        block = int(blocks[small][0])
        raise SingularBlock(f"Multiplier block {block} is numerically singular.", block=block)

    safe_det = np.where(regular, det, 1.0)
    data[0] = np.where(regular, (m22 * values[0] - m12 * values[1]) / safe_det, 0.0)
    data[1] = np.where(regular, (m11 * values[1] - m21 * values[0]) / safe_det, 0.0)

    first = values[:, 0]
    data[0, 0] = -0.5 * (first[0] + first[1]) / (b * b)
    data[1, 0] = 0.0
    if p <= N:
        degenerate = values[:, p - 1]
        data[0, p - 1] = 0.5 * (degenerate[0] - degenerate[1]) / b ** (2 * p)
        data[1, p - 1] = 0.0

    return FourierState(p=p, b=b, coefficients=data)


def invert_linearization(
    k: Union[YElement, YCoeffs], p: int, N: Union[int, None] = None
) -> Union[Direction, FourierState]:
    """The unique ``h`` in the complement of the kernel with ``(Id-Q) d_f G h = k``.

    Block 1 maps ``(1,1) e_2`` to ``(1,0) conj(w)`` scaled by ``-1/b^2``; block ``p`` maps
    ``(1,-1) e_{2p}`` to ``(1,0) conj(w)^{2p-1}`` scaled by ``b^{-2p}``; co-kernel parts are
    dropped. Every other block is inverted with its multiplier.
    """

    if isinstance(k, YElement):
        return _invert_symbolic(k, p)
    if isinstance(k, YCoeffs):
        if N is None:
            N = k.max_frequency // 2
        return _invert_numeric(k, p, N)
    raise TypeError(f"Can't invert object of type '{type(k)}'.")


class MultiplierRow(BaseModel):
    n: int = Field(description="Block index, the multiplier has frequency 2n.")
    reduced_det: List[List[str]] = Field(
        description="det M_2n(lambda_2p) reduced modulo the relation, coefficients by degree."
    )
    lower: float = Field(description="Lower end of the numeric enclosure.")
    upper: float = Field(description="Upper end of the numeric enclosure.")
    degenerate: bool = Field(description="Whether the determinant vanishes at b_2p.")


def multiplier_table(p: int, n_max: int) -> List[MultiplierRow]:
    """Reduced determinants of ``M_{2n}(lambda_{2p})`` for ``n = 1..n_max``."""

    rows = []
    root = find_b2p(p)
    for n in range(1, n_max + 1):
        det = _block_det(p, n)
        # entries are polynomials in b, so the determinant has a constant denominator
        reduced: BPoly = bpoly_reduce(det.num, p)
        enclosure = eval_brat(det, root)
        rows.append(
            MultiplierRow(
                n=n,
                reduced_det=reduced.to_json(),
                lower=float(enclosure.a),
                upper=float(enclosure.b),
                degenerate=is_zero_mod_relation(det, p),
            )
        )
    log_message("linearization.multipliers.computed", p=p, n_max=n_max)
    return rows


def degenerate_blocks(p: int, n_max: int) -> List[int]:
    """Blocks ``n <= n_max`` whose multiplier is singular at ``(lambda_{2p}, b_{2p})``."""

    return [row.n for row in multiplier_table(p, n_max) if row.degenerate]
