# -*- coding: utf-8 -*-

"""Closed-form reference values for the jet of ``F2`` at the degenerate point.

Every value is a derivative ``d_lambda^i d_t^j F2(lambda_{2p}, 0; a)`` along ``y1`` or
``y2``, written as ``sqrt(2) * r`` with ``r`` in ``Q(b)[a]``. Jets store Taylor
coefficients, so comparisons go through [Jet2.derivative][kiara_plugin.vstates.reduction.Jet2.derivative].
"""

import math
from typing import Any, Dict, List, Union

from pydantic import BaseModel, ConfigDict, Field

from kiara.utils import log_message
from kiara_plugin.vstates.contour import CoefExpr
from kiara_plugin.vstates.defaults import (
    DEFAULT_BLOCKS,
    DEFAULT_GRID_SIZE,
    EXPERIMENTAL_P,
    SUPPORTED_P,
    ClaimStatus,
    JetMode,
    VerifyMode,
)
from kiara_plugin.vstates.exactnum import BRat, find_b2p
from kiara_plugin.vstates.linearization import SqrtTwoMultiple

# tolerances for numeric jets against exact values, by total order
NUMERIC_RELATIVE_TOLERANCE = {0: 1e-6, 1: 1e-6, 2: 1e-6, 3: 1e-5}
NUMERIC_ABSOLUTE_TOLERANCE = {0: 1e-9, 1: 1e-8, 2: 1e-6, 3: 1e-6}


def _b() -> BRat:
    return BRat.b()


def _a() -> CoefExpr:
    return CoefExpr.a()


def hessian_c1(p: int, general_form: bool = False) -> SqrtTwoMultiple:
    """Correction ``c1`` of ``Q1 d_tt F2``; ``general_form`` forces the ``p >= 3`` expression."""

    b, a = _b(), _a()
    if p == 2 and not general_form:
        value = a * a * (-2 * b * (b * b + 1) ** 2)
    else:
        value = a * a * (-2 * (b * b - 1) ** 2 / b * (p + (p - 1) * b * b))
    return SqrtTwoMultiple(value)


def hessian_c2(p: int, general_form: bool = False) -> SqrtTwoMultiple:
    """Correction ``c2`` of ``Q2 d_tt F2``, cubic in ``a``."""

    b, a = _b(), _a()
    z = b * b - 1
    if p == 2 and not general_form:
        factor = 2 * z**2 * (4 * b * b - 3) / (b * (2 * b**4 - 1))
    else:
        factor = (
            4
            * (p - 1) ** 4
            * z**2
            * (2 * p * b**3 + (1 - 2 * p) * b)
            / (b * b * (2 + 4 * p * z + p * p * z**2))
        )
    return SqrtTwoMultiple(a * a * a * factor)


def hessian(p: int) -> Dict[Any, SqrtTwoMultiple]:
    """``{(i, j, component): value}`` for all second-order derivatives, general ``a``."""

    b, a = _b(), _a()
    base = (b * b - 1) ** 2 / b
    return {
        (2, 0, 1): SqrtTwoMultiple(4 / b),
        (2, 0, 2): SqrtTwoMultiple(a * (4 * p * p * b ** (1 - 2 * p))),
        (1, 1, 1): SqrtTwoMultiple(),
        (1, 1, 2): SqrtTwoMultiple(),
        (0, 2, 1): SqrtTwoMultiple(-base) + hessian_c1(p),
        (0, 2, 2): SqrtTwoMultiple(a * (base * p * 2) + a * a * a * (base * p * (2 * p - 1)))
        + hessian_c2(p),
    }


def lambda_axis(p: int, n: int) -> Dict[int, SqrtTwoMultiple]:
    """``d_lambda^n F2(lambda_{2p}, 0; a)`` from the closed form of ``F2`` on the axis ``t = 0``."""

    b, a = _b(), _a()
    beta = b ** (2 * p)
    factorial = math.factorial(n)
    first = 2 * factorial * b ** (3 - 2 * n)
    second = (
        b / (2 * beta) * (-1) ** (n - 2) * (2 * p) ** n / (2 * beta) ** (n - 2) * factorial
    )
    return {1: SqrtTwoMultiple(first), 2: SqrtTwoMultiple(a * second)}


def at_zero(p: int) -> Dict[Any, SqrtTwoMultiple]:
    """Higher order derivatives at ``a = 0`` with a closed form."""

    b = _b()
    values: Dict[Any, SqrtTwoMultiple] = {
        (3, 0, 1): SqrtTwoMultiple(12 / b**3),
        (2, 1, 1): SqrtTwoMultiple(),
        (2, 1, 2): SqrtTwoMultiple(-8 if p == 2 else 0),
        (1, 2, 1): SqrtTwoMultiple(b**-3 + 6 / b - 7 * b),
        (1, 2, 2): SqrtTwoMultiple(),
        (0, 3, 1): SqrtTwoMultiple(),
        (0, 3, 2): SqrtTwoMultiple(),
    }
    if p == 3:
        values[(4, 0, 1)] = SqrtTwoMultiple(48 / b**5)
        values[(2, 2, 2)] = SqrtTwoMultiple(-24 * b)
    if p == 4:
        values[(2, 3, 2)] = SqrtTwoMultiple(-96 * b * b)
    return values


def key_pattern(p: int) -> List[Any]:
    """Entries ``(i, j)`` of order ``<= p + 1`` whose ``Q2`` part vanishes at ``a = 0``."""

    return [
        (i, total - i)
        for total in range(p + 2)
        for i in range(total + 1)
        if (i, total - i) != (2, p - 1)
    ]


def derivative_name(i: int, j: int) -> str:
    return ("λ" * i + "t" * j) or "F2"


class VerifyRow(BaseModel):
    name: str = Field(description="Derivative, e.g. 'λλt'.")
    i: int
    j: int
    component: int = Field(description="1 for y1, 2 for y2.")
    mode: str = Field(description="Jet the value was taken from.")
    expected: Union[str, None] = Field(description="Reference value.", default=None)
    expected_value: Union[float, None] = Field(description="Reference value, numeric.", default=None)
    computed: str = Field(description="Computed value.")
    computed_value: float = Field(description="Computed value, numeric.")
    error: Union[float, None] = Field(description="Error estimate of numeric jets.", default=None)
    status: ClaimStatus

    def to_json(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["status"] = self.status.value
        return data


class VerifyReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    p: int
    order: int
    mode: VerifyMode
    a: Union[float, None]
    b_interval: List[str]
    tolerances: Dict[str, float]
    rows: List[VerifyRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.status != ClaimStatus.MISMATCH for row in self.rows)

    @property
    def mismatches(self) -> List[VerifyRow]:
        return [row for row in self.rows if row.status == ClaimStatus.MISMATCH]

    def to_json(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "order": self.order,
            "mode": self.mode.value,
            "a": self.a,
            "b_interval": self.b_interval,
            "tolerances": self.tolerances,
            "passed": self.passed,
            "rows": [row.to_json() for row in self.rows],
        }


def _exact_references(p: int, order: int, symbolic_a: bool) -> Dict[Any, SqrtTwoMultiple]:
    references: Dict[Any, SqrtTwoMultiple] = {}
    for key in [(0, 0), (1, 0), (0, 1)]:
        references[key + (1,)] = SqrtTwoMultiple()
        references[key + (2,)] = SqrtTwoMultiple()
    if order >= 2:
        references.update(hessian(p))
    for n in range(2, order + 1):
        for component, value in lambda_axis(p, n).items():
            references.setdefault((n, 0, component), value)
    if not symbolic_a:
        zero_a = {key: value.evaluate_at(0) for key, value in references.items()}
        references = zero_a
        for key, value in at_zero(p).items():
            if key[0] + key[1] <= order:
                references[key] = value
        if p in SUPPORTED_P:
            for i, j in key_pattern(p):
                if i + j <= order:
                    references.setdefault((i, j, 2), SqrtTwoMultiple())
    return {key: value for key, value in references.items() if key[0] + key[1] <= order}


def _check_exact(
    jet: Any, p: int, order: int, rows: List[VerifyRow], experimental: bool
) -> None:
    symbolic_a = jet.mode == JetMode.SYMBOLIC_A
    references = _exact_references(p, order, symbolic_a)
    pattern = set(key_pattern(p)) if not symbolic_a else set()
    for i, j in jet.keys():
        if i + j > order:
            continue
        computed = jet.derivative(i, j)
        for component in (1, 2):
            value = computed[component - 1]
            reference = references.get((i, j, component))
            if reference is None and experimental and component == 2 and (i, j) in pattern:
                status = ClaimStatus.REPORTED
                expected = "0"
                expected_value: Union[float, None] = 0.0
            elif reference is None:
                status = ClaimStatus.DERIVED
                expected = None
                expected_value = None
            else:
                status = (
                    ClaimStatus.MATCH if value.matches(reference, p) else ClaimStatus.MISMATCH
                )
                expected = repr(reference)
                expected_value = reference.evaluate_float(p)
            rows.append(
                VerifyRow(
                    name=derivative_name(i, j),
                    i=i,
                    j=j,
                    component=component,
                    mode=jet.mode.value,
                    expected=expected,
                    expected_value=expected_value,
                    computed=repr(value),
                    computed_value=value.evaluate_float(p),
                    status=status,
                )
            )


def _check_numeric(
    jet: Any, p: int, references: Dict[Any, float], rows: List[VerifyRow]
) -> None:
    for i, j in jet.keys():
        total = i + j
        factor = math.factorial(i) * math.factorial(j)
        computed = jet.numeric(i, j) * factor
        errors = jet.errors.get((i, j), (0.0, 0.0))
        for component in (1, 2):
            value = float(computed[component - 1])
            reference = references.get((i, j, component))
            if reference is None:
                status = ClaimStatus.DERIVED
            else:
                tolerance = max(
                    NUMERIC_RELATIVE_TOLERANCE[total] * abs(reference),
                    NUMERIC_ABSOLUTE_TOLERANCE[total],
                )
                status = (
                    ClaimStatus.MATCH
                    if abs(value - reference) <= tolerance
                    else ClaimStatus.MISMATCH
                )
            rows.append(
                VerifyRow(
                    name=derivative_name(i, j),
                    i=i,
                    j=j,
                    component=component,
                    mode=jet.mode.value,
                    expected=None if reference is None else repr(reference),
                    expected_value=reference,
                    computed=repr(value),
                    computed_value=value,
                    error=errors[component - 1] * factor,
                    status=status,
                )
            )


def verify_jet(
    p: int,
    order: int,
    mode: Union[VerifyMode, str] = VerifyMode.SYMBOLIC,
    a: Union[float, None] = None,
    experimental: bool = False,
    N: int = DEFAULT_BLOCKS,
    M: int = DEFAULT_GRID_SIZE,
) -> VerifyReport:
    """Compare computed jets of ``F2`` with the closed-form values.

    Exact jets are compared modulo the relation of ``b_{2p}``; numeric jets against the
    exact values (or the exact jet in mode ``both``) evaluated at ``a``.
    """

    from kiara_plugin.vstates.reduction import jet_numeric, jet_symbolic

    mode = VerifyMode(mode)
    allowed = SUPPORTED_P + (EXPERIMENTAL_P if experimental else ())
    if p not in allowed:
        raise ValueError(
            f"Invalid symmetry parameter p={p}: must be one of {', '.join(str(x) for x in allowed)}."
        )
    if order < 1 or order > p + 1:
        raise ValueError(f"Invalid order {order}: must be between 1 and p + 1 = {p + 1}.")

    root = find_b2p(p)
    report = VerifyReport(
        p=p,
        order=order,
        mode=mode,
        a=a,
        b_interval=[str(x) for x in root.interval],
        tolerances={
            **{f"numeric_relative_{k}": v for k, v in NUMERIC_RELATIVE_TOLERANCE.items()},
            **{f"numeric_absolute_{k}": v for k, v in NUMERIC_ABSOLUTE_TOLERANCE.items()},
        },
    )

    exact_jets = []
    if mode in (VerifyMode.SYMBOLIC, VerifyMode.BOTH):
        exact_jets.append(jet_symbolic(p, min(order, 2), symbolic_a=True))
        if order >= 3:
            exact_jets.append(jet_symbolic(p, order, symbolic_a=False))
        for jet in exact_jets:
            _check_exact(jet, p, jet.order, report.rows, experimental)

    if mode in (VerifyMode.NUMERIC, VerifyMode.BOTH):
        numeric_order = min(order, 3)
        value_a = 0.0 if a is None else a
        references: Dict[Any, float] = {}
        exact = _exact_references(p, min(numeric_order, 2), symbolic_a=True)
        if value_a == 0.0:
            exact.update(_exact_references(p, numeric_order, symbolic_a=False))
        for key, value in exact.items():
            references[key] = value.evaluate_float(p, value_a)
        for jet in exact_jets:
            for i, j in jet.keys():
                if i + j > numeric_order or (jet.mode == JetMode.ZERO_A and value_a != 0.0):
                    continue
                values = jet.numeric(i, j, value_a) * math.factorial(i) * math.factorial(j)
                references.setdefault((i, j, 1), float(values[0]))
                references.setdefault((i, j, 2), float(values[1]))
        numeric = jet_numeric(p, value_a, numeric_order, N=N, M=M)
        _check_numeric(numeric, p, references, report.rows)

    log_message(
        "anchors.verify.finished",
        p=p,
        order=order,
        mode=mode.value,
        rows=len(report.rows),
        mismatches=len(report.mismatches),
    )
    return report

