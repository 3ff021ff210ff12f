# -*- coding: utf-8 -*-
import numpy as np
import pytest

from kiara_plugin.vstates.defaults import JetMode
from kiara_plugin.vstates.exceptions import NoConvergence
from kiara_plugin.vstates.linearization import SQRT2, lambda_degenerate
from kiara_plugin.vstates.reduction import (
    Jet2,
    _fd_weights,
    f2_axis,
    f2_eval,
    f2_integral_form,
    inner_radius,
    jet_numeric,
    jet_symbolic,
    ls_solve,
    phi_derivatives,
)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_axis_vanishes_at_degenerate_point(p):

    lam0 = lambda_degenerate(inner_radius(p))
    assert np.allclose(f2_axis(lam0, 0.4, p), 0.0, atol=1e-14)
    assert np.allclose(f2_eval(lam0, 0.0, 0.4, p), 0.0, atol=1e-14)


def test_ls_solve_trivial_amplitude():

    result = ls_solve(0.6, 0.0, 0.2, 2, N=16, M=128)
    assert result.iterations == 0
    assert result.phi.norm() == 0.0

    with pytest.raises(ValueError):
        ls_solve(0.6, 0.01, 0.2, 2, N=8, M=128)


def test_ls_solve_converges():

    p = 2
    b = inner_radius(p)
    lam0 = lambda_degenerate(b)
    result = ls_solve(lam0, 1e-2, 0.1, p, N=16, M=128)

    assert result.residual <= 1e-13
    assert result.iterations > 0
    assert np.allclose(result.phi.block(1)[1], 0.0)
    assert np.allclose(result.phi.block(p)[1], 0.0)

    state = result.state()
    assert np.allclose(state.block(1), 1e-2 * np.array([b, 1.0]) + result.phi.block(1))


def test_correction_is_cubic_at_zero_mixing():

    p = 2
    lam0 = lambda_degenerate(inner_radius(p))
    large = ls_solve(lam0, 1e-2, 0.0, p, N=16, M=128).phi.norm()
    small = ls_solve(lam0, 5e-3, 0.0, p, N=16, M=128).phi.norm()
    assert 6.0 < large / small < 10.0


def test_ls_solve_iteration_limit():

    p = 2
    lam0 = lambda_degenerate(inner_radius(p))
    with pytest.raises(NoConvergence) as excinfo:
        ls_solve(lam0, 5e-2, 0.1, p, N=16, M=128, max_iterations=1)
    assert excinfo.value.iterations == 1


@pytest.mark.parametrize("p", [2, 3])
def test_jet_matches_axis(p):

    jet = jet_symbolic(p, 2)
    assert jet.mode == JetMode.SYMBOLIC_A

    lam0 = lambda_degenerate(inner_radius(p))
    a, h = 0.3, 1e-4
    first = (f2_axis(lam0 + h, a, p) - f2_axis(lam0 - h, a, p)) / (2 * h)
    second = (f2_axis(lam0 + h, a, p) - 2 * f2_axis(lam0, a, p) + f2_axis(lam0 - h, a, p)) / h**2
    assert np.allclose(jet.numeric(1, 0, a), 0.0, atol=1e-12)
    assert np.allclose(first, 0.0, atol=1e-6)
    assert np.allclose(2 * jet.numeric(2, 0, a), second, rtol=1e-5)
    assert jet.numeric(2, 0, a)[0] == pytest.approx(2 * SQRT2 / inner_radius(p))
    assert np.allclose(jet.numeric(0, 0, a), 0.0)


def test_jet_order_limits():

    with pytest.raises(ValueError):
        jet_symbolic(2, 4)
    with pytest.raises(ValueError):
        jet_symbolic(3, 3, symbolic_a=True)
    with pytest.raises(ValueError):
        jet_numeric(2, 0.1, 4)


def test_jet_taylor_convention():

    jet = Jet2(p=2, mode=JetMode.NUMERIC, order=2, b=0.5, a=0.1, coeffs={(2, 0): (1.5, -0.5)})
    assert jet.derivative(2, 0) == (3.0, -1.0)
    assert jet.coefficient(0, 1) == (0.0, 0.0)
    assert jet.keys() == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert jet.to_json()["coefficients"]["2,0"]["value"] == [1.5, -0.5]


def test_fd_weights():

    assert np.allclose(_fd_weights(1, 1), [-0.5, 0.0, 0.5])
    assert np.allclose(_fd_weights(2, 1), [1.0, -2.0, 1.0])
    assert np.allclose(_fd_weights(0, 3), [0, 0, 0, 1, 0, 0, 0])


def test_second_order_correction_vanishes_at_zero_mixing():

    derivatives = phi_derivatives(2, order=2)
    x_bar = derivatives.x_bar.map_coeffs(lambda c: c.evaluate(0))
    assert x_bar.is_zero


@pytest.mark.slow
def test_numeric_jet_matches_symbolic():

    a = 0.1
    exact = jet_symbolic(2, 2)
    numeric = jet_numeric(2, a, 2, N=16, M=128)
    for i, j in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
        assert np.allclose(numeric.numeric(i, j), exact.numeric(i, j, a), rtol=1e-5, atol=1e-6)


@pytest.mark.slow
def test_integral_form_agrees_with_quotient():

    p = 2
    lam = lambda_degenerate(inner_radius(p)) + 2e-3
    direct = f2_eval(lam, 2e-2, 0.1, p, N=16, M=128)
    integral = f2_integral_form(lam, 2e-2, 0.1, p, N=16, M=128, nodes=4)
    assert np.allclose(integral, direct, rtol=1e-4, atol=1e-7)
    assert np.allclose(f2_integral_form(lam, 0.0, 0.1, p), f2_axis(lam, 0.1, p))
