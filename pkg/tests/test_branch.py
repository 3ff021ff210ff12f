# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest
from pydantic import ValidationError

from kiara_plugin.vstates import branch as branch_module
from kiara_plugin.vstates.branch import (
    BranchCurve,
    BranchSample,
    QuadraticPair,
    degeneracy_check,
    leading_prediction,
    scaling_fit,
    solve_t_of_lambda,
    trace_branch,
)
from kiara_plugin.vstates.defaults import BRANCH_MAX_BISECTIONS, DegeneracyStatus
from kiara_plugin.vstates.exceptions import BranchLost, InsufficientSamples, NewtonDiverged
from kiara_plugin.vstates.linearization import lambda_degenerate
from kiara_plugin.vstates.reduction import inner_radius, jet_symbolic


def _curve(exponent: float, values) -> BranchCurve:
    b = inner_radius(2)
    lam0 = lambda_degenerate(b)
    samples = [
        BranchSample(
            a=a,
            lam=lam0 + 0.3 * a**exponent,
            t=a,
            omega=0.0,
            reduced_residual=0.0,
            full_residual=0.0,
        )
        for a in values
    ]
    return BranchCurve(p=2, sign="+", b=b, samples=samples)


def test_degeneracy_conditions_p2():

    report = degeneracy_check(2, 0.1)
    assert report.status == DegeneracyStatus.ISOLATED
    assert report.conditions_hold
    assert report.c1 < 0
    assert report.ratio == pytest.approx((3 + 8 * math.sqrt(2)) / 7)
    assert report.quadratic_factor is None


def test_degeneracy_at_zero_mixing():

    report = degeneracy_check(3, 0.0)
    assert report.status == DegeneracyStatus.DEGENERATE
    assert report.c2_over_a is None
    assert not report.conditions_hold
    assert report.quadratic_factor is not None

    with pytest.raises(ValueError):
        degeneracy_check(7, 0.1)


def test_quadratic_pair():

    pair = QuadraticPair.from_jet(jet_symbolic(2, 2), a=0.0)
    assert pair.j2 == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
    b = inner_radius(2)
    assert pair.h2[0] == pytest.approx(2 * math.sqrt(2) / b)
    assert pair.evaluate(0.0, 0.0)[0] == 0.0


def test_solve_t_of_lambda_on_the_cone():

    jet = jet_symbolic(2, 2)
    b = jet.b
    lam0 = lambda_degenerate(b)

    assert solve_t_of_lambda(jet, lam0, 0.0, "+") == 0.0

    t = solve_t_of_lambda(jet, lam0 + 1e-3, 0.0, "+")
    assert t == pytest.approx(-2e-3 / (1 - b * b), rel=1e-9)
    assert solve_t_of_lambda(jet, lam0 + 1e-3, 0.0, "-") == pytest.approx(-t, rel=1e-9)

    with pytest.raises(ValueError):
        solve_t_of_lambda(jet, lam0 + 1e-3, 0.0, "?")


def test_leading_prediction():

    b = inner_radius(2)
    dlam, t = leading_prediction(2, 1e-3, "+")
    assert t == pytest.approx(2e-3 * (b**-3 + 1 / b))
    assert abs(dlam) / 1e-3 == pytest.approx((1 - b * b) * (b**-3 + 1 / b))

    dlam_small, _ = leading_prediction(3, 1e-4, "+")
    dlam_large, _ = leading_prediction(3, 4e-4, "+")
    assert dlam_large / dlam_small == pytest.approx(2.0)

    dlam_small, _ = leading_prediction(4, 1e-3, "-")
    dlam_large, _ = leading_prediction(4, 8e-3, "-")
    assert dlam_large / dlam_small == pytest.approx(2.0)

    with pytest.raises(ValueError):
        leading_prediction(3, -1e-3, "+")
    with pytest.raises(ValueError):
        leading_prediction(5, 1e-3, "+")


def test_samples_must_increase():

    with pytest.raises(ValidationError):
        _curve(1.0, [2e-3, 1e-3])


@pytest.mark.parametrize("exponent", [1.0, 0.5, 1.0 / 3.0])
def test_scaling_fit(exponent):

    fit = scaling_fit(_curve(exponent, [1e-4 * 10 ** (k / 8) for k in range(12)]))
    assert fit.exponent == pytest.approx(exponent, abs=1e-9)
    assert fit.prefactor == pytest.approx(0.3)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.samples == 9


def test_scaling_fit_needs_samples():

    with pytest.raises(InsufficientSamples):
        scaling_fit(_curve(1.0, [1e-4, 2e-4, 3e-4]))


def test_curve_tables():

    curve = _curve(1.0, [1e-4, 2e-4])
    assert curve.samples_table().column_names == [
        "a",
        "lambda",
        "t",
        "omega",
        "reduced_residual",
        "full_residual",
    ]
    assert curve.corrections_table().num_rows == 0


@pytest.mark.parametrize(
    "p, a_min, a_max",
    [(5, 1e-3, 1e-2), (2, -1e-3, 1e-2), (2, 1e-3, 0.5), (3, -1e-2, -1e-3)],
)
def test_trace_branch_invalid_range(p, a_min, a_max):

    with pytest.raises(ValueError):
        trace_branch(p, a_min, a_max)


@pytest.mark.slow
def test_trace_branch_p2():

    curve = trace_branch(2, 1e-3, 1e-2, steps=6, N=16, M=128)
    assert len(curve.samples) >= 6
    for sample in curve.samples:
        assert sample.full_residual <= 1e-9
        assert sample.reduced_residual <= 1e-11
        assert sample.t > 0

    assert curve.fitted_exponent == pytest.approx(1.0, abs=0.05)

    b = curve.b
    first = curve.samples[0]
    ratio = abs(first.lam - curve.lambda_degenerate) / first.a
    assert ratio == pytest.approx((1 - b * b) * (b**-3 + 1 / b), rel=0.05)


def _fake_attempt(fail_at=None, always=False):
    """Stand-in corrector that accepts the leading prediction as the sample."""

    calls = []

    def attempt(p, a, prediction, N, M, tol_reduced, tol_full):
        calls.append(a)
        if always or (fail_at is not None and a == fail_at and calls.count(a) == 1):
            raise NewtonDiverged(f"forced failure at a={a}")
        b = inner_radius(p)
        return BranchSample(
            a=a,
            lam=lambda_degenerate(b) + prediction[0],
            t=prediction[1],
            omega=0.0,
            reduced_residual=0.0,
            full_residual=0.0,
        )

    return attempt, calls


def test_trace_branch_bisects_rejected_samples(monkeypatch):

    targets = np.geomspace(1e-3, 1e-2, 6).tolist()
    attempt, calls = _fake_attempt(fail_at=targets[1])
    monkeypatch.setattr(branch_module, "_attempt", attempt)

    curve = trace_branch(2, 1e-3, 1e-2, steps=6)
    values = [s.a for s in curve.samples]
    assert len(values) == 7
    assert math.sqrt(targets[0] * targets[1]) == pytest.approx(values[1])
    assert calls.count(targets[1]) == 2
    assert curve.fitted_exponent == pytest.approx(1.0, abs=1e-9)


def test_trace_branch_lost(monkeypatch):

    attempt, calls = _fake_attempt(always=True)
    monkeypatch.setattr(branch_module, "_attempt", attempt)

    with pytest.raises(BranchLost) as excinfo:
        trace_branch(2, 1e-3, 1e-2, steps=6)
    assert len(calls) == BRANCH_MAX_BISECTIONS + 1
    assert calls[1] == pytest.approx(calls[0] / 2.0)
    assert excinfo.value.a == calls[-1]


@pytest.mark.parametrize(
    "p, a_min, a_max, sign, exponent",
    [
        (2, -1e-2, -1e-3, "+", 1.0),
        (3, 1e-6, 1e-5, "+", 0.5),
        (4, -1e-7, -1e-8, "-", 1.0 / 3.0),
    ],
)
def test_trace_branch_scaling_from_predictions(monkeypatch, p, a_min, a_max, sign, exponent):

    attempt, _ = _fake_attempt()
    monkeypatch.setattr(branch_module, "_attempt", attempt)

    curve = trace_branch(p, a_min, a_max, steps=6, sign=sign)
    assert curve.sign == sign
    assert [s.a for s in curve.samples] == sorted(s.a for s in curve.samples)
    assert all((s.a < 0) == (a_min < 0) for s in curve.samples)
    assert curve.fitted_exponent == pytest.approx(exponent, abs=1e-9)


def test_leading_prediction_signs():

    b = inner_radius(2)
    plus = leading_prediction(2, 1e-3, "+")
    minus = leading_prediction(2, 1e-3, "-")
    assert minus[0] == pytest.approx(-plus[0])
    assert minus[1] == pytest.approx(plus[1])

    negative = leading_prediction(2, -1e-3, "+")
    assert negative[1] == pytest.approx(-plus[1])
    assert negative[0] == pytest.approx(-plus[0])
    assert negative[1] == pytest.approx(-2e-3 * (b**-3 + 1 / b))

    dlam, t = leading_prediction(4, -1e-6, "+")
    dlam_pos, t_pos = leading_prediction(4, 1e-6, "+")
    assert t == pytest.approx(-t_pos)
    assert dlam == pytest.approx(-dlam_pos)


def _coarse_trace(p, a_min, a_max, sign):
    return trace_branch(p, a_min, a_max, steps=5, sign=sign, N=16, M=128)


@pytest.mark.slow
@pytest.mark.parametrize(
    "p, a_min, a_max, sign, exponent",
    [
        (2, 1e-3, 5e-3, "-", 1.0),
        (2, -5e-3, -1e-3, "+", 1.0),
        (3, 1e-6, 5e-6, "+", 0.5),
        (4, 1e-8, 5e-8, "+", 1.0 / 3.0),
    ],
)
def test_trace_branch_coarse(p, a_min, a_max, sign, exponent):

    curve = _coarse_trace(p, a_min, a_max, sign)
    assert len(curve.samples) >= 5
    for sample in curve.samples:
        assert sample.full_residual <= 1e-9
        assert sample.reduced_residual <= 1e-11
        assert sample.t != 0
    assert curve.fitted_exponent == pytest.approx(exponent, abs=0.05)
