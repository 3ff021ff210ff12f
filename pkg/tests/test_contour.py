# -*- coding: utf-8 -*-
import random

import numpy as np
import pytest

from kiara_plugin.vstates.contour import (
    CoefExpr,
    LaurentPoly,
    PerturbationScheme,
    YElement,
    canonical_integral,
    derivative_G,
    expand_cauchy,
    integrate_rational,
    zero_direction,
)
from kiara_plugin.vstates.defaults import CanonicalForm
from kiara_plugin.vstates.exactnum import BRat, find_b2p
from kiara_plugin.vstates.linearization import kernel_pair


def _quadrature(k1, k2, k3, form, b, M=4096):
    tau = np.exp(2j * np.pi * np.arange(M) / M)
    if form == CanonicalForm.SELF:
        # conj(tau) = 1/tau on the circle; push the contour past the pole at 1
        tau = 1.5 * tau
        return np.mean(tau ** (k1 - k2 + 1) / (1 - tau) ** k3)
    if form == CanonicalForm.OUTER_AT_INNER:
        denominator = b - tau
    else:
        denominator = 1 - b * tau
    # dtau = i tau dtheta
    return np.mean(tau ** (k1 + 1) * np.conj(tau) ** k2 / denominator**k3)


def test_canonical_integral_values():

    b = BRat.b()
    assert canonical_integral(3, 2, 1, CanonicalForm.OUTER_AT_INNER) == -b
    assert canonical_integral(0, 2, 1, CanonicalForm.SELF).is_zero
    assert canonical_integral(0, 2, 1, CanonicalForm.INNER_AT_OUTER) == b


@pytest.mark.parametrize("b", [0.3, 0.5, 0.7])
def test_canonical_integral_against_quadrature(b):

    rng = random.Random(int(b * 10))
    forms = [CanonicalForm.SELF, CanonicalForm.OUTER_AT_INNER, CanonicalForm.INNER_AT_OUTER]
    for _ in range(300):
        k1, k2, k3 = rng.randint(0, 8), rng.randint(0, 8), rng.randint(1, 4)
        form = rng.choice(forms)
        exact = canonical_integral(k1, k2, k3, form).evaluate_float(b)
        numeric = _quadrature(k1, k2, k3, form, b)
        assert abs(numeric.imag) < 1e-10
        assert exact == pytest.approx(numeric.real, abs=1e-10)


def test_integrate_rational():

    assert integrate_rational([]).is_zero

    b = BRat.b()
    result = integrate_rational(
        [
            (CoefExpr.a(), 3, 2, 1, CanonicalForm.OUTER_AT_INNER),
            (2, 0, 2, 1, CanonicalForm.INNER_AT_OUTER),
        ]
    )
    assert result == CoefExpr({0: 2 * b, 1: -b})


def test_expand_cauchy_zero_direction():

    scheme = PerturbationScheme(2, [zero_direction()])
    for source in (1, 2):
        for target in (1, 2):
            assert expand_cauchy(scheme, source, target, (1,)).is_zero


def test_expand_cauchy_symmetric_in_slots():

    pair = kernel_pair(2)
    forward = PerturbationScheme(2, [pair.x1, pair.x2])
    backward = PerturbationScheme(2, [pair.x2, pair.x1])
    for source, target in ((1, 1), (1, 2), (2, 1), (2, 2)):
        assert expand_cauchy(forward, source, target, (1, 1)) == expand_cauchy(
            backward, source, target, (1, 1)
        )


def test_expand_cauchy_multilinear():

    pair = kernel_pair(3)
    single = PerturbationScheme(3, [pair.x1])
    double = PerturbationScheme(3, [pair.x1.scale(2)])
    first = expand_cauchy(single, 2, 1, (1,))
    assert expand_cauchy(double, 2, 1, (1,)) == first * 2


def test_invalid_direction():

    with pytest.raises(ValueError):
        PerturbationScheme(
            2, [zero_direction()._replace(outer=LaurentPoly.monomial(-2, 1))]
        )


def test_second_derivative_along_kernel():

    x_a = kernel_pair(2).xa(CoefExpr.a())
    result = derivative_G(PerturbationScheme(2, [x_a]), 0, (2,))

    b = find_b2p(2).as_float()
    a = 0.3
    first_e2 = 2 * a * (b**2 + b**4)
    first_e8 = 8 * a**2 * (b**4 + 2 * b**6 + b**8)

    assert result.coefficient(1, 2).evaluate_float(a, b) == pytest.approx(first_e2, abs=1e-12)
    assert result.coefficient(1, 8).evaluate_float(a, b) == pytest.approx(first_e8, abs=1e-12)
    assert result.coefficient(2, 2).evaluate_float(a, b) == pytest.approx(first_e2, abs=1e-12)
    assert all(n % 2 == 0 for n in result.frequencies)


def test_third_derivative_at_zero_mixing():

    x_0 = kernel_pair(2).x1
    result = derivative_G(PerturbationScheme(2, [x_0]), 0, (3,))

    b = find_b2p(2).as_float()
    assert result.coefficient(1, 2).evaluate_float(0.0, b) == pytest.approx(
        -6 * (b**3 - b), abs=1e-12
    )
    assert result.coefficient(2, 2).evaluate_float(0.0, b) == pytest.approx(
        -6 * (b - 1 / b), abs=1e-12
    )


def test_lambda_derivative_is_diagonal():

    x_1 = kernel_pair(2).x1
    result = derivative_G(PerturbationScheme(2, [x_1]), 1, (1,))

    b = BRat.b()
    assert result.reduce_mod(2).coefficient(1, 2) == CoefExpr.constant(2 * b)
    assert result.reduce_mod(2).coefficient(2, 2) == CoefExpr.constant(2 * b)
    assert result.frequencies == [2]


def test_y_element_rejects_constant_mode():

    with pytest.raises(ValueError):
        YElement({0: 1})


def test_coef_expr_evaluate_at_zero():

    b = BRat.b()
    assert CoefExpr.constant(3).evaluate(0) == 3
    assert CoefExpr().evaluate(0) == 0

    a = CoefExpr.a()
    expr = (a + 2) * (a - 1) + a * a * a * b
    assert expr.evaluate(0) == -2
    assert expr.evaluate(2) == 4 + 8 * b
    assert expr.evaluate(BRat((1, 2))) == BRat((-5, 4)) + b * BRat((1, 8))
