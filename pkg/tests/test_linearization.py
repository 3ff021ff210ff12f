# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from kiara_plugin.vstates.contour import CoefExpr, YElement
from kiara_plugin.vstates.exactnum import BRat, find_b2p, is_zero_mod_relation
from kiara_plugin.vstates.linearization import (
    SQRT2,
    SqrtTwoMultiple,
    angular_velocity,
    degenerate_blocks,
    dispersion,
    invert_linearization,
    kernel_pair,
    kernel_state,
    lambda_degenerate,
    lambda_from_angular_velocity,
    multiplier,
    multiplier_table,
    project,
)
from kiara_plugin.vstates.spectral import YCoeffs


@pytest.mark.parametrize("p", [2, 3, 4])
def test_multiplier_degenerate_blocks(p):

    b = find_b2p(p).as_float()
    lam = lambda_degenerate(b)
    assert abs(multiplier(2, lam, b).det()) < 1e-14
    assert abs(multiplier(2 * p, lam, b).det()) < 1e-14
    assert abs(multiplier(2 * p + 2, lam, b).det()) > 1e-6


def test_multiplier_invalid_frequency():

    with pytest.raises(ValueError):
        multiplier(0, 0.5, 0.5)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_multiplier_table(p):

    rows = multiplier_table(p, 50)
    assert [r.n for r in rows] == list(range(1, 51))
    assert [r.n for r in rows if r.degenerate] == [1, p]
    for row in rows:
        assert row.lower <= row.upper
        if not row.degenerate:
            assert row.lower > 0 or row.upper < 0
    assert degenerate_blocks(p, 50) == [1, p]


def test_angular_velocity():

    b = find_b2p(2).as_float()
    lam = lambda_degenerate(b)
    assert angular_velocity(lam) == pytest.approx((1 - b * b) / 4)
    assert lambda_from_angular_velocity(angular_velocity(0.37)) == pytest.approx(0.37)


def test_dispersion():

    with pytest.raises(ValueError):
        dispersion(-1, 0.5, 0.5)
    # the trivial mode m = 0 reduces to -lam (1 - lam + b^2) + b^2
    assert dispersion(0, 0.5, 0.5) == pytest.approx(-0.5 * 0.75 + 0.25)


def test_kernel_state():

    b = find_b2p(3).as_float()
    state = kernel_state(3, 0.2, b, 16)
    assert np.allclose(state.block(1), (b, 1.0))
    assert np.allclose(state.block(3), (0.2 * b, -0.2))
    assert np.count_nonzero(state.coefficients) == 4

    with pytest.raises(ValueError):
        kernel_state(3, 0.2, b, 2)


def test_kernel_pair_is_annihilated():

    p = 2
    b = BRat.b()
    pair = kernel_pair(p)
    lam = (1 + b * b) * BRat((1, 2))
    for n, direction in ((1, pair.x1), (p, pair.x2)):
        exponent = -(2 * n - 1)
        vector = (
            direction.outer.coefficient(exponent).coefficient(0),
            direction.inner.coefficient(exponent).coefficient(0),
        )
        image = multiplier(2 * n, lam, b).apply(vector)
        for value in image:
            assert CoefExpr.constant(value).is_zero_mod_relation(p)


def test_project_numeric():

    b = find_b2p(2).as_float()
    k = YCoeffs.from_blocks(
        2, b, {1: (1 / SQRT2, -1 / SQRT2), 2: (-0.5 / SQRT2, -0.5 / SQRT2), 3: (0.1, 0.2)}
    )
    q1, q2, remainder = project(k, 2)
    assert q1 == pytest.approx(1.0)
    assert q2 == pytest.approx(0.5)
    assert np.allclose(remainder.block(1), 0.0)
    assert np.allclose(remainder.block(2), 0.0)
    assert np.allclose(remainder.block(3), (0.1, 0.2))


def test_project_symbolic():

    k = YElement({2: 1, 4: 1, 6: 3}, {2: -1, 4: 1})
    q1, q2, remainder = project(k, 2)
    assert isinstance(q1, SqrtTwoMultiple)
    assert q1.rational == CoefExpr.constant(1)
    assert q2.rational == CoefExpr.constant(-1)
    assert remainder.frequencies == [6]

    with pytest.raises(ValueError):
        project(YElement({3: 1}), 2)


def test_invert_symbolic():

    p = 2
    b = BRat.b()
    lam = (1 + b * b) * BRat((1, 2))

    h = invert_linearization(YElement({2: 1}, {2: 1}), p)
    assert h.outer.coefficient(-1) == CoefExpr.constant(-1 / (b * b))
    assert h.inner.is_zero

    k = YElement({6: 1}, {6: 2})
    h = invert_linearization(k, p)
    vector = (h.outer.coefficient(-5).coefficient(0), h.inner.coefficient(-5).coefficient(0))
    first, second = multiplier(6, lam, b).apply(vector)
    assert CoefExpr.constant(first - 1).is_zero_mod_relation(p)
    assert CoefExpr.constant(second - 2).is_zero_mod_relation(p)


def test_invert_numeric():

    p = 3
    b = find_b2p(p).as_float()
    lam = lambda_degenerate(b)
    k = YCoeffs.from_blocks(p, b, {2: (0.5, 0.2), 5: (-0.1, 0.3)})
    h = invert_linearization(k, p, N=16)
    assert h.N == 16
    for n, expected in ((2, (0.5, 0.2)), (5, (-0.1, 0.3))):
        image = multiplier(2 * n, lam, b).apply(tuple(h.block(n)))
        assert np.allclose(image, expected, atol=1e-12)
    assert np.allclose(h.block(1), 0.0)
    assert np.allclose(h.block(p), 0.0)


def test_sqrt_two_multiple():

    value = SqrtTwoMultiple(CoefExpr({0: 1, 1: 2}))
    assert value.evaluate_float(2, 0.5) == pytest.approx(2 * math.sqrt(2))
    assert value.evaluate_at(0).rational == CoefExpr.constant(1)
    assert value.matches(SqrtTwoMultiple(CoefExpr({0: 1, 1: 2})), 2)
    assert "sqrt2_times" in value.to_json()


@pytest.mark.parametrize("p", [2, 3, 4])
def test_dispersion_vanishes_at_degenerate_pair(p):

    b = find_b2p(p).as_float()
    lam = lambda_degenerate(b)
    zeros = {1, 2 * p - 1}
    for m in range(12):
        value = dispersion(m, lam, b)
        if m in zeros:
            assert abs(value) < 1e-14
        else:
            assert abs(value) > 1e-3

    b_exact = BRat.b()
    lam_exact = (1 + b_exact * b_exact) * BRat((1, 2))
    for m in sorted(zeros):
        assert is_zero_mod_relation(dispersion(m, lam_exact, b_exact), p)
    assert not is_zero_mod_relation(dispersion(2 * p, lam_exact, b_exact), p)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_multiplier_at_degenerate_pair(p):

    b = BRat.b()
    lam = (1 + b * b) * BRat((1, 2))

    # block 1 is singular for every b
    assert multiplier(2, lam, b).entries == ((-(b * b), b**3), (-(b * b), b**3))

    (m11, m12), (m21, m22) = multiplier(2 * p, lam, b).entries
    assert m12 == b ** (2 * p + 1)
    assert m21 == -(b ** (2 * p))
    assert is_zero_mod_relation(m11 - b ** (2 * p), p)
    assert is_zero_mod_relation(m22 + b ** (2 * p + 1), p)


@pytest.mark.parametrize("p", [3, 4])
def test_invert_second_block(p):

    b = BRat.b()
    det = b * (b * b - 1) ** 2 * (b**4 + 2 * b * b - 1)
    alpha_1 = BRat(-32) * (2 * b**3 - b) / det
    alpha_2 = BRat(-32) * b**4 / det

    h = invert_linearization(YElement({4: -32}), p)
    assert h.outer.coefficient(-3) == CoefExpr.constant(alpha_1)
    assert h.inner.coefficient(-3) == CoefExpr.constant(alpha_2)

    b_float = find_b2p(p).as_float()
    k = YCoeffs.from_blocks(p, b_float, {2: (-32.0, 0.0)})
    numeric = invert_linearization(k, p, N=8)
    assert np.allclose(
        numeric.block(2),
        (alpha_1.evaluate_float(b_float), alpha_2.evaluate_float(b_float)),
        rtol=1e-12,
    )
